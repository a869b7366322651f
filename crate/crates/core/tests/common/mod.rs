//! Oracles shared by the integration and acceptance tests. Written without
//! the library's own numerics so agreement is meaningful.
#![allow(dead_code)]

use std::path::Path;

use netlsa::matrix::{CsrMatrix, Index, Metric, ProfileMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:02}")).collect()
}

pub fn profile_from_dense(rows: &[Vec<f64>]) -> ProfileMatrix {
    let n = rows.len();
    let d = rows[0].len();
    let triplets = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)));
    let csr = CsrMatrix::from_triplets(n, d, triplets).unwrap();
    ProfileMatrix::new(
        csr,
        Index::from_names(names("u", n)).unwrap(),
        Index::from_names(names("d", d)).unwrap(),
        Metric::Bytes,
    )
    .unwrap()
}

/// Random non-negative matrix, about `density` of cells positive.
pub fn random_counts(rng: &mut ChaCha8Rng, n: usize, d: usize, density: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if rng.random::<f64>() < density {
                        rng.random_range(1..100_000) as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Log-TF times IDF, computed cell by cell. Zero rows are removed first.
pub fn tfidf_oracle(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let kept: Vec<&Vec<f64>> = rows.iter().filter(|r| r.iter().any(|&v| v > 0.0)).collect();
    let n_users = kept.len() as f64;
    let d = rows[0].len();
    let mut out = vec![vec![0.0; d]; kept.len()];
    for j in 0..d {
        let visitors = kept.iter().filter(|r| r[j] > 0.0).count();
        if visitors == 0 {
            continue;
        }
        let idf = (n_users / visitors as f64).ln();
        for (i, r) in kept.iter().enumerate() {
            if r[j] > 0.0 {
                let total: f64 = r.iter().sum();
                out[i][j] = (1.0 + (r[j] / total).ln()) * idf;
            }
        }
    }
    out
}

fn partition_cost(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = points[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| {
            p.iter()
                .zip(&sums[l])
                .map(|(x, s)| (x - s / counts[l] as f64).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Smallest inertia over every partition of `points` into at most `k`
/// blocks, by enumerating restricted growth strings.
pub fn brute_force_inertia(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    fn walk(i: usize, used: usize, k: usize, labels: &mut Vec<usize>, points: &[Vec<f64>], best: &mut f64) {
        if i == labels.len() {
            *best = best.min(partition_cost(points, labels, used.max(1)));
            return;
        }
        for l in 0..(used + 1).min(k) {
            labels[i] = l;
            walk(i + 1, used.max(l + 1), k, labels, points, best);
        }
    }
    walk(0, 0, k, &mut labels, points, &mut best);
    let _ = n;
    best
}

/// Spearman rank correlation of two samples without ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Reads every regular file in `dir` into (name, bytes), sorted by name.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

pub fn csr_from_dense(rows: &[Vec<f64>]) -> CsrMatrix {
    let triplets = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)));
    CsrMatrix::from_triplets(rows.len(), rows[0].len(), triplets).unwrap()
}

/// Singular values by nalgebra, descending.
pub fn oracle_singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    (0..n).map(|_| (0..d).map(|_| StandardNormal.sample(rng)).collect()).collect()
}

fn orthonormal(rng: &mut ChaCha8Rng, n: usize, r: usize) -> nalgebra::DMatrix<f64> {
    let g = gaussian(rng, n, r);
    nalgebra::DMatrix::from_fn(n, r, |i, j| g[i][j]).qr().q()
}

/// `U diag(decay^k) Vᵀ` with random orthonormal `U`, `V`: a matrix whose
/// singular values are known in advance and fall off geometrically.
pub fn decaying_spectrum(rng: &mut ChaCha8Rng, n: usize, d: usize, decay: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let r = n.min(d);
    let u = orthonormal(rng, n, r);
    let v = orthonormal(rng, d, r);
    let sigma: Vec<f64> = (0..r).map(|k| 10.0 * decay.powi(k as i32)).collect();
    let a = &u * nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sigma.clone())) * v.transpose();
    ((0..n).map(|i| (0..d).map(|j| a[(i, j)]).collect()).collect(), sigma)
}

/// Largest entry of `|XᵀX − I|`.
pub fn orthonormality_residual(x: &ndarray::Array2<f64>) -> f64 {
    let g = x.t().dot(x);
    g.indexed_iter()
        .map(|((i, j), &v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

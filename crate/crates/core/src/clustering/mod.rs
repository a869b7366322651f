//! K-means++ clustering of user feature vectors.
//!
//! Seeding follows the D² rule: the first centre is drawn uniformly, each
//! further centre with probability proportional to the squared distance to
//! the nearest centre chosen so far. Lloyd iterations then alternate
//! nearest-centre assignment and mean updates. Several seeded restarts run in
//! parallel and the lowest-inertia result wins.

pub mod io;
mod sweep;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use sweep::{sweep_k, SweepEntry};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once an iteration lowers inertia by less than this fraction.
    pub tol: f64,
    /// Restart `r` draws from a ChaCha8 stream seeded with `seed + r`.
    pub seed: u64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    /// Cluster of each point, in `0..k`.
    pub assignments: Vec<usize>,
    /// `k × dim`.
    pub centroids: Array2<f64>,
    /// Sum of squared distances of points to their assigned centroid.
    pub inertia: f64,
    pub restarts: usize,
    /// Lloyd iterations of the selected restart.
    pub iterations_run: usize,
    pub seed: u64,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Point indices of every cluster, in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (i, &a) in self.assignments.iter().enumerate() {
            members[a].push(i);
        }
        members
    }
}

/// Result of one Lloyd run.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after the initial assignment and after every iteration.
    pub history: Vec<f64>,
    /// True when the last iteration left every assignment unchanged.
    pub converged_fixpoint: bool,
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate(points: ArrayView2<'_, f64>, k: usize) -> Result<()> {
    let n = points.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("no points to cluster".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k must be in 1..={n}, got {k}")));
    }
    if let Some((row, _)) = points.rows().into_iter().enumerate().find(|(_, r)| r.iter().any(|x| !x.is_finite())) {
        return Err(Error::NonFinite { row });
    }
    Ok(())
}

/// Nearest centroid of every point (lowest index on ties) and the squared
/// distance to it.
pub fn assign(points: ArrayView2<'_, f64>, centroids: &Array2<f64>) -> (Vec<usize>, Vec<f64>) {
    let centroids = centroids.as_standard_layout();
    let cent: Vec<&[f64]> = centroids.rows().into_iter().map(|r| r.to_slice().expect("standard layout")).collect();
    let points = points.as_standard_layout();
    (0..points.nrows())
        .into_par_iter()
        .map(|i| {
            let p = points.row(i);
            let p = p.as_slice().expect("standard layout");
            let mut best = (0, f64::INFINITY);
            for (c, centre) in cent.iter().enumerate() {
                let d = sq_dist(p, centre);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .unzip()
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn inertia(points: ArrayView2<'_, f64>, assignments: &[usize], centroids: &Array2<f64>) -> Result<f64> {
    if assignments.len() != points.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} assignments for {} points",
            assignments.len(),
            points.nrows()
        )));
    }
    if centroids.ncols() != points.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "centroids have {} columns, points {}",
            centroids.ncols(),
            points.ncols()
        )));
    }
    let mut total = 0.0;
    for (p, &a) in points.rows().into_iter().zip(assignments) {
        if a >= centroids.nrows() {
            return Err(Error::InvalidArgument(format!(
                "assignment {a} out of range for {} centroids",
                centroids.nrows()
            )));
        }
        total += p.iter().zip(centroids.row(a)).map(|(x, c)| (x - c) * (x - c)).sum::<f64>();
    }
    Ok(total)
}

/// D² seeding of `k` centres.
pub fn kmeanspp_init<R: Rng + ?Sized>(points: ArrayView2<'_, f64>, k: usize, rng: &mut R) -> Result<Array2<f64>> {
    validate(points, k)?;
    let first = rng.random_range(0..points.nrows());
    Ok(seed_centroids(points, k, first, rng))
}

pub(crate) fn seed_centroids<R: Rng + ?Sized>(points: ArrayView2<'_, f64>, k: usize, first: usize, rng: &mut R) -> Array2<f64> {
    let n = points.nrows();
    let mut chosen = vec![first];
    let mut is_chosen = vec![false; n];
    is_chosen[first] = true;
    let mut d2: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| p.iter().zip(points.row(first)).map(|(x, c)| (x - c) * (x - c)).sum())
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            // every point coincides with a chosen centre
            let free: Vec<usize> = (0..n).filter(|&i| !is_chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        is_chosen[next] = true;
        let c = points.row(next);
        for (i, p) in points.rows().into_iter().enumerate() {
            let d: f64 = p.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    let mut out = Array2::zeros((k, points.ncols()));
    for (r, &i) in chosen.iter().enumerate() {
        out.row_mut(r).assign(&points.row(i));
    }
    out
}

/// Means of assigned points. Returns the clusters that ended up empty; their
/// centroids are left untouched.
fn update_means(points: ArrayView2<'_, f64>, assignments: &[usize], centroids: &mut Array2<f64>) -> Vec<usize> {
    let k = centroids.nrows();
    let mut sums = Array2::<f64>::zeros(centroids.raw_dim());
    let mut counts = vec![0usize; k];
    for (p, &a) in points.rows().into_iter().zip(assignments) {
        let mut row = sums.row_mut(a);
        row += &p;
        counts[a] += 1;
    }
    let mut empty = Vec::new();
    for c in 0..k {
        if counts[c] == 0 {
            empty.push(c);
        } else {
            let n = counts[c] as f64;
            centroids.row_mut(c).assign(&sums.row(c).mapv(|s| s / n));
        }
    }
    empty
}

/// Lloyd iterations from the given centres. Empty clusters are re-seeded at
/// the point farthest from its current centroid.
pub fn lloyd(points: ArrayView2<'_, f64>, init: Array2<f64>, max_iter: usize, tol: f64) -> LloydRun {
    let mut centroids = init;
    let (mut labels, mut d2) = assign(points, &centroids);
    let mut inertia: f64 = d2.iter().sum();
    let mut history = vec![inertia];
    let mut iterations = 0;
    let mut fixpoint = false;
    while iterations < max_iter {
        iterations += 1;
        let empty = update_means(points, &labels, &mut centroids);
        for c in empty {
            let far = (0..d2.len()).fold(0, |best, i| if d2[i] > d2[best] { i } else { best });
            centroids.row_mut(c).assign(&points.row(far));
            d2[far] = 0.0;
        }
        let (new_labels, new_d2) = assign(points, &centroids);
        let new_inertia: f64 = new_d2.iter().sum();
        fixpoint = new_labels == labels;
        let improvement = inertia - new_inertia;
        let previous = inertia;
        labels = new_labels;
        d2 = new_d2;
        inertia = new_inertia;
        history.push(inertia);
        if fixpoint || improvement <= tol * previous {
            break;
        }
    }
    if !fixpoint {
        // make centroids the means of the final assignment
        update_means(points, &labels, &mut centroids);
        inertia = self::inertia(points, &labels, &centroids).expect("consistent shapes");
        history.push(inertia);
    }
    LloydRun {
        assignments: labels,
        centroids,
        inertia,
        iterations,
        history,
        converged_fixpoint: fixpoint,
    }
}

/// Best of `opts.restarts` seeded K-means++ runs.
pub fn kmeans(points: ArrayView2<'_, f64>, k: usize, opts: &KMeansOptions) -> Result<Clustering> {
    validate(points, k)?;
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    if !(opts.tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be non-negative, got {}", opts.tol)));
    }
    let runs: Vec<LloydRun> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
            let init = kmeanspp_init(points, k, &mut rng).expect("validated");
            lloyd(points, init, opts.max_iter, opts.tol)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .expect("at least one restart");
    Ok(Clustering {
        k,
        assignments: best.assignments,
        centroids: best.centroids,
        inertia: best.inertia,
        restarts: opts.restarts,
        iterations_run: best.iterations,
        seed: opts.seed,
    })
}

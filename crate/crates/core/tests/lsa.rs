mod common;

use common::*;
use netlsa::lsa::{truncated_svd_csr, SvdMethod, SvdOptions};
use proptest::prelude::*;

fn opts(method: SvdMethod, seed: u64) -> SvdOptions {
    SvdOptions {
        method,
        seed,
        ..Default::default()
    }
}

fn frobenius_diff(a: &ndarray::Array2<f64>, rows: &[Vec<f64>]) -> f64 {
    a.indexed_iter().map(|((i, j), v)| (v - rows[i][j]).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn exact_matches_independent_svd() {
    let mut rng = rng(1);
    let rows = gaussian(&mut rng, 50, 40);
    let model = truncated_svd_csr(&csr_from_dense(&rows), 40, &opts(SvdMethod::Exact, 0)).unwrap();
    let oracle = oracle_singular_values(&rows);
    for (s, o) in model.sigma.iter().zip(&oracle) {
        assert!((s - o).abs() <= 1e-10 * o.max(1.0), "{s} vs {o}");
    }
    assert!(orthonormality_residual(&model.u) < 1e-8);
    assert!(orthonormality_residual(&model.v) < 1e-8);
    assert!(frobenius_diff(&model.reconstruct(), &rows) < 1e-8);
}

#[test]
fn randomized_agrees_on_fifty_by_forty() {
    let mut rng = rng(2);
    let (rows, sigma) = decaying_spectrum(&mut rng, 50, 40, 0.6);
    let model = truncated_svd_csr(&csr_from_dense(&rows), 10, &opts(SvdMethod::Randomized, 9)).unwrap();
    for (s, o) in model.sigma.iter().zip(&sigma) {
        assert!((s - o).abs() / o <= 1e-6, "{s} vs {o}");
    }
    assert!(orthonormality_residual(&model.v) < 1e-6);
    assert!(orthonormality_residual(&model.u) < 1e-6);
}

#[test]
fn truncation_error_is_the_tail() {
    let mut rng = rng(3);
    let rows = gaussian(&mut rng, 30, 20);
    let oracle = oracle_singular_values(&rows);
    let model = truncated_svd_csr(&csr_from_dense(&rows), 5, &opts(SvdMethod::Exact, 0)).unwrap();
    let tail = oracle[5..].iter().map(|s| s * s).sum::<f64>().sqrt();
    assert!((frobenius_diff(&model.reconstruct(), &rows) - tail).abs() < 1e-8);
}

#[test]
fn randomized_is_deterministic_per_seed() {
    let mut rng = rng(4);
    let rows = gaussian(&mut rng, 60, 45);
    let a = csr_from_dense(&rows);
    let x = truncated_svd_csr(&a, 6, &opts(SvdMethod::Randomized, 5)).unwrap();
    let y = truncated_svd_csr(&a, 6, &opts(SvdMethod::Randomized, 5)).unwrap();
    assert_eq!(x, y);
}

#[test]
fn canonical_signs_keep_reconstruction() {
    let mut rng = rng(5);
    let rows = gaussian(&mut rng, 12, 9);
    let model = truncated_svd_csr(&csr_from_dense(&rows), 4, &opts(SvdMethod::Exact, 0)).unwrap();
    let before = model.reconstruct();
    let canon = model.canonicalize_signs();
    let after = canon.reconstruct();
    assert!(before.iter().zip(after.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
    assert_eq!(canon.clone().canonicalize_signs(), canon);
    for col in canon.v.columns() {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        assert!(col[best] > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eckart_young(seed in 0u64..1000, n in 4usize..14, d in 4usize..14, m in 2usize..4) {
        let mut rng = rng(seed);
        let rows = gaussian(&mut rng, n, d);
        let a = csr_from_dense(&rows);
        let model = truncated_svd_csr(&a, m, &opts(SvdMethod::Exact, 0)).unwrap();
        let shorter = truncated_svd_csr(&a, m - 1, &opts(SvdMethod::Exact, 0)).unwrap();
        let full = frobenius_diff(&model.reconstruct(), &rows);
        let less = frobenius_diff(&shorter.reconstruct(), &rows);
        prop_assert!(full <= less + 1e-12);
        for w in model.sigma.windows(2) {
            prop_assert!(w[0] >= w[1] && w[1] >= 0.0);
        }
    }
}

mod common;

use common::*;
use ndarray::Array2;
use netlsa::clustering::{assign, inertia, kmeans, sweep_k, KMeansOptions};
use proptest::prelude::*;
use rand::Rng;

fn opts(restarts: usize, seed: u64) -> KMeansOptions {
    KMeansOptions {
        restarts,
        seed,
        ..Default::default()
    }
}

fn to_array(points: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((points.len(), points[0].len()), |(i, j)| points[i][j])
}

#[test]
fn six_point_sweep_is_optimal() {
    let mut rng = rng(21);
    for _ in 0..5 {
        let pts: Vec<Vec<f64>> = (0..6).map(|_| (0..2).map(|_| rng.random_range(0.0..10.0)).collect()).collect();
        let sweep = sweep_k(to_array(&pts).view(), 1, 6, &opts(50, 3)).unwrap();
        assert_eq!(sweep.len(), 6);
        for e in &sweep {
            let best = brute_force_inertia(&pts, e.k);
            assert!((e.inertia - best).abs() <= 1e-9, "k = {}: {} vs {}", e.k, e.inertia, best);
        }
    }
}

#[test]
fn four_point_line() {
    let pts = vec![vec![0.0], vec![2.0], vec![10.0], vec![12.0]];
    let c = kmeans(to_array(&pts).view(), 2, &opts(10, 0)).unwrap();
    assert_eq!(c.inertia, 4.0);
    let mut cents: Vec<f64> = c.centroids.column(0).to_vec();
    cents.sort_by(f64::total_cmp);
    assert_eq!(cents, vec![1.0, 11.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn converged_runs_are_lloyd_fixpoints(
        pts in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 2), 3..30),
        k in 1usize..4,
        seed in 0u64..100,
    ) {
        let k = k.min(pts.len());
        let x = to_array(&pts);
        let c = kmeans(x.view(), k, &KMeansOptions { tol: 0.0, ..opts(3, seed) }).unwrap();
        prop_assert!(c.assignments.iter().all(|&a| a < k));
        let (nearest, _) = assign(x.view(), &c.centroids);
        prop_assert_eq!(&nearest, &c.assignments);
        let recomputed = inertia(x.view(), &c.assignments, &c.centroids).unwrap();
        prop_assert!((recomputed - c.inertia).abs() <= 1e-9 * c.inertia.max(1.0));
        for (cluster, members) in c.members().iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            for d in 0..2 {
                let mean = members.iter().map(|&i| pts[i][d]).sum::<f64>() / members.len() as f64;
                prop_assert!((c.centroids[[cluster, d]] - mean).abs() < 1e-9);
            }
        }
        let again = kmeans(x.view(), k, &KMeansOptions { tol: 0.0, ..opts(3, seed) }).unwrap();
        prop_assert_eq!(again, c);
    }
}

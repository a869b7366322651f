mod common;

use common::{brute_force_inertia, spearman};

#[test]
fn brute_force_four_points() {
    let pts = vec![vec![0.0], vec![2.0], vec![10.0], vec![12.0]];
    assert_eq!(brute_force_inertia(&pts, 2), 4.0);
    assert_eq!(brute_force_inertia(&pts, 4), 0.0);
    assert_eq!(brute_force_inertia(&pts, 1), 36.0 + 16.0 + 16.0 + 36.0);
}

#[test]
fn spearman_extremes() {
    assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]), 1.0);
    assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 40.0, 30.0]), 0.8);
    assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]), -1.0);
}

use ndarray::{concatenate, ArrayView2, Axis};
use serde::Serialize;

use super::{assign, kmeans, lloyd, Clustering, KMeansOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub k: usize,
    pub inertia: f64,
    pub clustering: Clustering,
}

/// Clusters for every `k` in `k_min..=k_max`.
///
/// Besides the fresh K-means++ restarts, each `k` is also started from the
/// `k - 1` solution plus its farthest point, and the lower-inertia result is
/// kept. That start can never be worse than the `k - 1` inertia, so the
/// reported sequence is non-increasing.
pub fn sweep_k(points: ArrayView2<'_, f64>, k_min: usize, k_max: usize, opts: &KMeansOptions) -> Result<Vec<SweepEntry>> {
    if k_min == 0 || k_min > k_max || k_max > points.nrows() {
        return Err(Error::InvalidArgument(format!(
            "k range must satisfy 1 <= k_min <= k_max <= {}, got {k_min}..={k_max}",
            points.nrows()
        )));
    }
    let mut out: Vec<SweepEntry> = Vec::with_capacity(k_max - k_min + 1);
    for k in k_min..=k_max {
        let mut best = kmeans(points, k, opts)?;
        if let Some(prev) = out.last() {
            let prev = &prev.clustering;
            let (_, d2) = assign(points, &prev.centroids);
            let far = (0..d2.len()).fold(0, |b, i| if d2[i] > d2[b] { i } else { b });
            let far_row = points.row(far).insert_axis(Axis(0));
            let init = concatenate![Axis(0), prev.centroids.view(), far_row];
            let warm = lloyd(points, init, opts.max_iter, opts.tol);
            if warm.inertia < best.inertia {
                log::debug!("k={k}: warm start {} beats restarts {}", warm.inertia, best.inertia);
                best = Clustering {
                    k,
                    assignments: warm.assignments,
                    centroids: warm.centroids,
                    inertia: warm.inertia,
                    restarts: opts.restarts,
                    iterations_run: warm.iterations,
                    seed: opts.seed,
                };
            }
        }
        out.push(SweepEntry {
            k,
            inertia: best.inertia,
            clustering: best,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn non_increasing_and_zero_at_n() {
        let p = Array2::from_shape_vec(
            (8, 2),
            vec![0.0, 0.0, 1.0, 0.5, 4.0, 4.0, 4.5, 3.0, 9.0, 1.0, 8.0, 2.0, 0.0, 7.0, 1.0, 8.0],
        )
        .unwrap();
        let sweep = sweep_k(p.view(), 1, 8, &KMeansOptions::default()).unwrap();
        assert_eq!(sweep.len(), 8);
        for w in sweep.windows(2) {
            assert!(w[1].inertia <= w[0].inertia);
        }
        assert_eq!(sweep[7].inertia, 0.0);
    }

    #[test]
    fn single_k_and_bad_range() {
        let p = Array2::from_shape_fn((5, 1), |(i, _)| i as f64);
        assert_eq!(sweep_k(p.view(), 2, 2, &KMeansOptions::default()).unwrap().len(), 1);
        assert!(sweep_k(p.view(), 1, 6, &KMeansOptions::default()).is_err());
        assert!(sweep_k(p.view(), 3, 2, &KMeansOptions::default()).is_err());
        assert!(sweep_k(p.view(), 0, 2, &KMeansOptions::default()).is_err());
    }
}

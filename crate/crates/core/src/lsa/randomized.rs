//! Randomized range finder with subspace (power) iterations.

use faer::Mat;
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::truncate;
use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

fn orthonormal_basis(y: &Mat<f64>) -> Mat<f64> {
    y.qr().compute_thin_Q()
}

pub(super) fn svd(
    a: &CsrMatrix,
    rank: usize,
    oversampling: usize,
    power_iterations: usize,
    seed: u64,
) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let (n_rows, n_cols) = a.shape();
    let width = (rank + oversampling).min(n_rows.min(n_cols));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(n_cols * width);
    for _ in 0..n_cols * width {
        draws.push(StandardNormal.sample(&mut rng));
    }
    let omega: Mat<f64> = Mat::from_fn(n_cols, width, |i, j| draws[j * n_cols + i]);

    let at = a.transpose();
    let mut q = orthonormal_basis(&a.mul_dense(omega.as_ref()));
    for _ in 0..power_iterations {
        let z = orthonormal_basis(&at.mul_dense(q.as_ref()));
        q = orthonormal_basis(&a.mul_dense(z.as_ref()));
    }
    // (Qᵀ A)ᵀ = Aᵀ Q, shape n_cols × width
    let bt = at.mul_dense(q.as_ref());
    let small = bt.thin_svd().map_err(|e| Error::Svd(format!("{e:?}")))?;
    // Aᵀ Q = W S Zᵀ  =>  A ≈ (Q Z) S Wᵀ
    let u = &q * small.V();
    Ok(truncate(u.as_ref(), small.S().column_vector().as_mat(), small.U(), rank))
}

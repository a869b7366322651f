//! Latent topic extraction by truncated SVD of the weighted matrix,
//! `F ≈ U_M · diag(σ_M) · V_Mᵀ`.
//!
//! Rows of `U_M` are the low-dimensional user features fed to clustering and
//! columns of `V_M` are domain loadings per topic. Two solvers are provided:
//! a dense full decomposition for desk-sized inputs, and a Gaussian
//! range-finder with power iterations that only touches the sparse matrix
//! through products.

pub mod io;
mod randomized;

use faer::MatRef;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::weighting::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvdMethod {
    /// Exact below [`SvdOptions::exact_limit`], randomized above.
    #[default]
    Auto,
    Exact,
    Randomized,
}

impl SvdMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SvdMethod::Auto => "auto",
            SvdMethod::Exact => "exact",
            SvdMethod::Randomized => "randomized",
        }
    }
}

impl std::str::FromStr for SvdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SvdMethod::Auto),
            "exact" => Ok(SvdMethod::Exact),
            "randomized" => Ok(SvdMethod::Randomized),
            other => Err(Error::InvalidArgument(format!("unknown svd method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvdOptions {
    pub method: SvdMethod,
    /// Extra sketch columns beyond the requested rank.
    pub oversampling: usize,
    pub power_iterations: usize,
    pub seed: u64,
    /// `Auto` uses the exact solver while `min(rows, cols)` is at most this.
    pub exact_limit: usize,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            method: SvdMethod::Auto,
            oversampling: 10,
            power_iterations: 2,
            seed: 0,
            exact_limit: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsaModel {
    /// `n_users × rank`, orthonormal columns.
    pub u: Array2<f64>,
    /// Descending, non-negative.
    pub sigma: Array1<f64>,
    /// `n_domains × rank`, orthonormal columns.
    pub v: Array2<f64>,
    /// `Exact` or `Randomized`, never `Auto`.
    pub method: SvdMethod,
    pub seed: u64,
    pub oversampling: usize,
    pub power_iterations: usize,
    /// SHA-256 of the decomposed matrix in triplet form.
    pub source_checksum: String,
}

pub fn checksum(m: &CsrMatrix) -> String {
    let mut buf = Vec::with_capacity(m.nnz() * 24);
    crate::matrix::io::write_triplets(&mut buf, m, &[]).expect("in-memory write");
    Sha256::digest(&buf).iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn to_ndarray(m: MatRef<'_, f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Top-`rank` singular triplets of the weighted matrix.
pub fn truncated_svd(f: &FeatureMatrix, rank: usize, opts: &SvdOptions) -> Result<LsaModel> {
    truncated_svd_csr(&f.values, rank, opts)
}

pub fn truncated_svd_csr(a: &CsrMatrix, rank: usize, opts: &SvdOptions) -> Result<LsaModel> {
    let (n_rows, n_cols) = a.shape();
    let max_rank = n_rows.min(n_cols);
    if max_rank == 0 {
        return Err(Error::InvalidArgument("cannot decompose an empty matrix".into()));
    }
    if rank == 0 || rank > max_rank {
        return Err(Error::InvalidArgument(format!(
            "rank must be in 1..={max_rank} for a {n_rows}x{n_cols} matrix, got {rank}"
        )));
    }
    let method = match opts.method {
        SvdMethod::Auto if max_rank <= opts.exact_limit => SvdMethod::Exact,
        SvdMethod::Auto => SvdMethod::Randomized,
        m => m,
    };
    let (u, sigma, v) = match method {
        SvdMethod::Exact => exact(a, rank)?,
        _ => randomized::svd(a, rank, opts.oversampling, opts.power_iterations, opts.seed)?,
    };
    Ok(LsaModel {
        u,
        sigma,
        v,
        method,
        seed: opts.seed,
        oversampling: opts.oversampling,
        power_iterations: opts.power_iterations,
        source_checksum: checksum(a),
    })
}

fn exact(a: &CsrMatrix, rank: usize) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let dense = a.to_faer();
    let svd = dense.thin_svd().map_err(|e| Error::Svd(format!("{e:?}")))?;
    Ok(truncate(svd.U(), svd.S().column_vector().as_mat(), svd.V(), rank))
}

pub(crate) fn truncate(
    u: MatRef<'_, f64>,
    s: MatRef<'_, f64>,
    v: MatRef<'_, f64>,
    rank: usize,
) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
    (
        to_ndarray(u.subcols(0, rank)),
        Array1::from_iter((0..rank).map(|k| s[(k, 0)].max(0.0))),
        to_ndarray(v.subcols(0, rank)),
    )
}

impl LsaModel {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// User coordinates for clustering: `U_M`, or `U_M · diag(σ_M)` when
    /// `scale` is set.
    pub fn user_features(&self, scale: bool) -> Array2<f64> {
        if scale {
            &self.u * &self.sigma
        } else {
            self.u.clone()
        }
    }

    pub fn domain_topics(&self) -> &Array2<f64> {
        &self.v
    }

    /// Dense rank-M approximation `U_M · diag(σ_M) · V_Mᵀ` (`n_users × n_domains`).
    pub fn reconstruct(&self) -> Array2<f64> {
        (&self.u * &self.sigma).dot(&self.v.t())
    }

    /// Flips each (U column, V column) pair so the largest-magnitude entry of
    /// the V column is positive. The first index wins among equal magnitudes.
    pub fn canonicalize_signs(mut self) -> Self {
        for k in 0..self.rank() {
            let col = self.v.column(k);
            let mut best = 0;
            for (i, x) in col.iter().enumerate() {
                if x.abs() > col[best].abs() {
                    best = i;
                }
            }
            if col.len() > 0 && col[best] < 0.0 {
                self.v.column_mut(k).mapv_inplace(|x| -x);
                self.u.column_mut(k).mapv_inplace(|x| -x);
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn csr(rows: &[&[f64]]) -> CsrMatrix {
        let t = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)));
        CsrMatrix::from_triplets(rows.len(), rows[0].len(), t).unwrap()
    }

    fn exact_opts() -> SvdOptions {
        SvdOptions {
            method: SvdMethod::Exact,
            ..Default::default()
        }
    }

    fn diag321() -> CsrMatrix {
        csr(&[&[3.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]])
    }

    #[test]
    fn diagonal_values() {
        let m = truncated_svd_csr(&diag321(), 2, &exact_opts()).unwrap();
        assert!((m.sigma[0] - 3.0).abs() < 1e-12);
        assert!((m.sigma[1] - 2.0).abs() < 1e-12);
        let m = m.canonicalize_signs();
        // V columns are the first two unit vectors
        assert!((m.v[[0, 0]] - 1.0).abs() < 1e-12 && (m.v[[1, 1]] - 1.0).abs() < 1e-12);
        let r = m.reconstruct();
        let expected = array![[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.0]];
        assert!((&r - &expected).iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn rank_one_outer_product() {
        // u = (2, 0) has norm 2, v = (1, 2, 2) has norm 3
        let a = csr(&[&[2.0, 4.0, 4.0], &[0.0, 0.0, 0.0]]);
        let m = truncated_svd_csr(&a, 1, &exact_opts()).unwrap().canonicalize_signs();
        assert!((m.sigma[0] - 6.0).abs() < 1e-12);
        let v = m.v.column(0);
        for (x, want) in v.iter().zip([1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
            assert!((x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_features_of_diagonal() {
        let a = csr(&[&[3.0, 0.0], &[0.0, 2.0]]);
        let m = truncated_svd_csr(&a, 2, &exact_opts()).unwrap().canonicalize_signs();
        let x = m.user_features(true);
        let expected = array![[3.0, 0.0], [0.0, 2.0]];
        assert!((&x - &expected).iter().all(|d| d.abs() < 1e-12), "{x}");
        let unscaled = m.user_features(false);
        for k in 0..2 {
            let norm = unscaled.column(k).dot(&unscaled.column(k)).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_bounds() {
        assert!(truncated_svd_csr(&diag321(), 0, &exact_opts()).is_err());
        assert!(truncated_svd_csr(&diag321(), 4, &exact_opts()).is_err());
        assert!(truncated_svd_csr(&CsrMatrix::zeros(0, 3), 1, &exact_opts()).is_err());
        // rank beyond the numerical rank is allowed
        let a = csr(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let m = truncated_svd_csr(&a, 2, &exact_opts()).unwrap();
        assert!(m.sigma[1].abs() < 1e-12);
    }

    #[test]
    fn canonical_flip() {
        let model = LsaModel {
            u: array![[1.0], [0.5]],
            sigma: array![2.0],
            v: array![[-0.8], [0.6]],
            method: SvdMethod::Exact,
            seed: 0,
            oversampling: 10,
            power_iterations: 2,
            source_checksum: String::new(),
        };
        let before = model.reconstruct();
        let flipped = model.canonicalize_signs();
        assert_eq!(flipped.v, array![[0.8], [-0.6]]);
        assert_eq!(flipped.u, array![[-1.0], [-0.5]]);
        assert!((&flipped.reconstruct() - &before).iter().all(|d| d.abs() < 1e-12));
        assert_eq!(flipped.clone().canonicalize_signs(), flipped);
    }

    #[test]
    fn auto_picks_by_size() {
        let m = truncated_svd_csr(&diag321(), 1, &SvdOptions::default()).unwrap();
        assert_eq!(m.method, SvdMethod::Exact);
        let opts = SvdOptions {
            exact_limit: 2,
            ..Default::default()
        };
        let m = truncated_svd_csr(&diag321(), 1, &opts).unwrap();
        assert_eq!(m.method, SvdMethod::Randomized);
        assert!((m.sigma[0] - 3.0).abs() < 1e-10);
    }
}

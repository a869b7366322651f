use faer::{Mat, MatRef};
use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Compressed sparse row matrix of `f64`. Column indices are strictly
/// increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that end up exactly zero are not stored.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
        for (i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i });
            }
            rows[i].push((j, v));
        }
        Ok(Self::from_row_lists(n_cols, rows))
    }

    pub(crate) fn from_row_lists(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            n_rows: indptr.len() - 1,
            n_cols,
            indptr,
            indices,
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.data[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Number of stored entries per column.
    pub fn column_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_cols];
        for &j in &self.indices {
            counts[j] += 1;
        }
        counts
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let counts = self.column_counts();
        let mut indptr = vec![0; self.n_cols + 1];
        for j in 0..self.n_cols {
            indptr[j + 1] = indptr[j] + counts[j];
        }
        let mut next = indptr.clone();
        let mut indices = vec![0; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for (i, j, v) in self.triplets() {
            let slot = next[j];
            indices[slot] = i;
            data[slot] = v;
            next[j] += 1;
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            indptr,
            indices,
            data,
        }
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> CsrMatrix {
        let lists = rows
            .iter()
            .map(|&i| {
                let (c, v) = self.row(i);
                c.iter().copied().zip(v.iter().copied()).collect()
            })
            .collect();
        Self::from_row_lists(self.n_cols, lists)
    }

    /// Applies `f(row, col, value)` to every stored entry; results equal to
    /// zero are dropped from the structure.
    pub fn map_entries<F>(&self, f: F) -> CsrMatrix
    where
        F: Fn(usize, usize, f64) -> f64 + Sync,
    {
        let rows = (0..self.n_rows)
            .into_par_iter()
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &x)| (j, f(i, j, x))).collect()
            })
            .collect();
        Self::from_row_lists(self.n_cols, rows)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows, self.n_cols));
        for (i, j, v) in self.triplets() {
            out[[i, j]] = v;
        }
        out
    }

    pub fn to_faer(&self) -> Mat<f64> {
        let mut out = Mat::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            out[(i, j)] = v;
        }
        out
    }

    /// Sparse times dense: `self · b` with `b` of shape `n_cols × l`.
    pub fn mul_dense(&self, b: MatRef<'_, f64>) -> Mat<f64> {
        assert_eq!(b.nrows(), self.n_cols, "inner dimensions differ");
        let l = b.ncols();
        let mut b_rows = vec![0.0; self.n_cols * l];
        for c in 0..l {
            for r in 0..self.n_cols {
                b_rows[r * l + c] = b[(r, c)];
            }
        }
        let mut out = vec![0.0; self.n_rows * l];
        if l > 0 {
            out.par_chunks_mut(l).enumerate().for_each(|(i, acc)| {
                let (cols, vals) = self.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    let src = &b_rows[j * l..(j + 1) * l];
                    for (a, s) in acc.iter_mut().zip(src) {
                        *a += v * s;
                    }
                }
            });
        }
        Mat::from_fn(self.n_rows, l, |i, c| out[i * l + c])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix {
        CsrMatrix::from_triplets(3, 4, [(0, 1, 2.0), (2, 3, 1.0), (0, 1, 3.0), (2, 0, -1.0), (1, 2, 0.0)]).unwrap()
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let m = sample();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 1), 5.0);
        assert_eq!(m.get(1, 2), 0.0);
        assert_eq!(m.row(2), (&[0usize, 3][..], &[-1.0, 1.0][..]));
    }

    #[test]
    fn out_of_bounds() {
        assert!(CsrMatrix::from_triplets(1, 1, [(0, 1, 1.0)]).is_err());
        assert!(CsrMatrix::from_triplets(1, 1, [(0, 0, f64::NAN)]).is_err());
    }

    #[test]
    fn transpose_and_products() {
        let m = sample();
        let t = m.transpose();
        assert_eq!(t.shape(), (4, 3));
        assert_eq!(t.transpose(), m);
        let b = Mat::from_fn(4, 2, |i, j| (i * 2 + j) as f64);
        let p = m.mul_dense(b.as_ref());
        let dense = m.to_faer() * &b;
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(p[(i, j)], dense[(i, j)]);
            }
        }
    }

    #[test]
    fn counts_and_sums() {
        let m = sample();
        assert_eq!(m.column_counts(), vec![1, 1, 0, 1]);
        assert_eq!(m.row_sums(), vec![5.0, 0.0, 0.0]);
        assert_eq!(m.select_rows(&[2, 0]).get(1, 1), 5.0);
    }
}

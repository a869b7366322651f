//! Fixed-edge histograms used by the matrix statistics and cluster reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BinSpec {
    /// Decade bins `[10^e, 10^(e+1))` spanning the positive values. Values
    /// `<= 0` are counted in [`Histogram::zero_count`].
    #[default]
    LogDecades,
    /// `bins` equal-width bins over `[min, max]`; the last bin is closed.
    Linear { bins: usize },
    /// Explicit increasing edges. The outermost bins absorb values beyond them.
    Edges(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub edges: Vec<f64>,
    pub log: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` edges; bin `k` is `[edges[k], edges[k+1])`.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Non-positive values under logarithmic binning.
    pub zero_count: usize,
}

impl Histogram {
    pub fn build(values: &[f64], spec: &BinSpec) -> Result<Histogram> {
        Ok(spec.resolve(values)?.count(values))
    }

    pub fn total(&self) -> usize {
        self.zero_count + self.counts.iter().sum::<usize>()
    }
}

fn decade(v: f64) -> i32 {
    let mut e = v.log10().floor() as i32;
    while 10f64.powi(e) > v {
        e -= 1;
    }
    while 10f64.powi(e + 1) <= v {
        e += 1;
    }
    e
}

impl BinSpec {
    /// Fixes concrete bin edges from the value range of `values`.
    pub fn resolve(&self, values: &[f64]) -> Result<Bins> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("histogram values must be finite".into()));
        }
        match self {
            BinSpec::LogDecades => {
                let positive = values.iter().copied().filter(|v| *v > 0.0);
                let (lo, hi) = positive.fold((i32::MAX, i32::MIN), |(lo, hi), v| {
                    let e = decade(v);
                    (lo.min(e), hi.max(e))
                });
                let edges = if lo > hi {
                    Vec::new()
                } else {
                    (lo..=hi + 1).map(|e| 10f64.powi(e)).collect()
                };
                Ok(Bins { edges, log: true })
            }
            BinSpec::Linear { bins } => {
                if *bins == 0 {
                    return Err(Error::InvalidArgument("linear histogram needs at least one bin".into()));
                }
                if values.is_empty() {
                    return Ok(Bins { edges: Vec::new(), log: false });
                }
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi <= lo {
                    hi = lo + 1.0;
                }
                let width = (hi - lo) / *bins as f64;
                let mut edges: Vec<f64> = (0..=*bins).map(|k| lo + width * k as f64).collect();
                edges[*bins] = hi;
                Ok(Bins { edges, log: false })
            }
            BinSpec::Edges(edges) => {
                if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidArgument("histogram edges must be at least two increasing values".into()));
                }
                Ok(Bins {
                    edges: edges.clone(),
                    log: false,
                })
            }
        }
    }
}

impl Bins {
    pub fn n_bins(&self) -> usize {
        self.edges.len().saturating_sub(1)
    }

    pub fn count(&self, values: &[f64]) -> Histogram {
        let n = self.n_bins();
        let mut counts = vec![0; n];
        let mut zero_count = 0;
        for &v in values {
            if self.log && v <= 0.0 {
                zero_count += 1;
                continue;
            }
            if n == 0 {
                continue;
            }
            // first edge strictly greater than v, minus one
            let k = self.edges.partition_point(|e| *e <= v);
            counts[k.saturating_sub(1).min(n - 1)] += 1;
        }
        Histogram {
            edges: self.edges.clone(),
            counts,
            zero_count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decades() {
        assert_eq!(decade(1.0), 0);
        assert_eq!(decade(999.999), 2);
        assert_eq!(decade(1000.0), 3);
        assert_eq!(decade(0.05), -2);
        let h = Histogram::build(&[10.0, 10.0, 1000.0], &BinSpec::LogDecades).unwrap();
        assert_eq!(h.counts, vec![2, 0, 1]);
        let h = Histogram::build(&[], &BinSpec::LogDecades).unwrap();
        assert!(h.counts.is_empty());
        assert_eq!(h.total(), 0);
    }

    #[test]
    fn linear_closes_last_bin() {
        let h = Histogram::build(&[0.0, 1.0, 2.0, 3.0, 4.0], &BinSpec::Linear { bins: 2 }).unwrap();
        assert_eq!(h.edges, vec![0.0, 2.0, 4.0]);
        assert_eq!(h.counts, vec![2, 3]);
        let h = Histogram::build(&[5.0, 5.0], &BinSpec::Linear { bins: 3 }).unwrap();
        assert_eq!(h.total(), 2);
        assert_eq!(h.counts[0], 2);
    }

    #[test]
    fn explicit_edges_absorb_outliers() {
        let h = Histogram::build(&[-1.0, 0.5, 1.5, 9.0], &BinSpec::Edges(vec![0.0, 1.0, 2.0])).unwrap();
        assert_eq!(h.counts, vec![2, 2]);
        assert!(Histogram::build(&[1.0], &BinSpec::Edges(vec![1.0, 1.0])).is_err());
        assert!(Histogram::build(&[1.0], &BinSpec::Linear { bins: 0 }).is_err());
    }
}

use serde::Serialize;

use super::ProfileMatrix;
use crate::error::{Error, Result};
use crate::histogram::{BinSpec, Histogram};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainStat {
    pub domain: String,
    /// Lower median over all users, zeros included.
    pub median: f64,
    /// Users with positive activity on the domain.
    pub n_users: usize,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainStats {
    pub n_users: usize,
    pub domains: Vec<DomainStat>,
    /// Share of domains whose median activity is non-zero.
    pub nonzero_median_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankKey {
    #[default]
    Median,
    Total,
    Users,
}

pub fn domain_stats(m: &ProfileMatrix) -> DomainStats {
    let n_users = m.n_users();
    let columns = m.values.transpose();
    let domains: Vec<DomainStat> = (0..m.n_domains())
        .map(|j| {
            let (_, vals) = columns.row(j);
            DomainStat {
                domain: m.domains.name(j).to_string(),
                median: lower_median_with_zeros(vals, n_users),
                n_users: vals.len(),
                total: vals.iter().sum(),
            }
        })
        .collect();
    let nonzero = domains.iter().filter(|d| d.median != 0.0).count();
    let nonzero_median_fraction = if domains.is_empty() {
        0.0
    } else {
        nonzero as f64 / domains.len() as f64
    };
    DomainStats {
        n_users,
        domains,
        nonzero_median_fraction,
    }
}

/// Lower median of `stored` padded with zeros up to `n` values.
fn lower_median_with_zeros(stored: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let rank = (n - 1) / 2;
    let zeros = n - stored.len();
    let mut sorted = stored.to_vec();
    sorted.sort_by(f64::total_cmp);
    let negatives = sorted.iter().take_while(|v| **v < 0.0).count();
    if rank < negatives {
        sorted[rank]
    } else if rank < negatives + zeros {
        0.0
    } else {
        sorted[rank - zeros]
    }
}

/// Domains in descending order of `by`; equal keys fall back to the domain
/// name, ascending.
pub fn rank_domains(stats: &DomainStats, by: RankKey) -> Vec<String> {
    let key = |d: &DomainStat| match by {
        RankKey::Median => d.median,
        RankKey::Total => d.total,
        RankKey::Users => d.n_users as f64,
    };
    let mut order: Vec<&DomainStat> = stats.domains.iter().collect();
    order.sort_by(|a, b| key(b).total_cmp(&key(a)).then_with(|| a.domain.cmp(&b.domain)));
    order.into_iter().map(|d| d.domain.clone()).collect()
}

/// Histogram of one domain's column. Zero entries are counted only when
/// `include_zeros` is set.
pub fn intensity_histogram(m: &ProfileMatrix, domain: &str, bins: &BinSpec, include_zeros: bool) -> Result<Histogram> {
    let j = m.domains.get(domain).ok_or_else(|| Error::UnknownDomain(domain.to_string()))?;
    let mut values: Vec<f64> = (0..m.n_users()).map(|i| m.values.get(i, j)).filter(|v| *v > 0.0).collect();
    if include_zeros {
        values.resize(m.n_users(), 0.0);
    }
    Histogram::build(&values, bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{CsrMatrix, Index, Metric};

    fn matrix(cols: &[&[f64]]) -> ProfileMatrix {
        let n_users = cols[0].len();
        let triplets = cols
            .iter()
            .enumerate()
            .flat_map(|(j, c)| c.iter().enumerate().map(move |(i, &v)| (i, j, v)));
        let values = CsrMatrix::from_triplets(n_users, cols.len(), triplets).unwrap();
        let users = Index::from_names((0..n_users).map(|i| format!("u{i}")).collect()).unwrap();
        let domains = Index::from_names((0..cols.len()).map(|j| format!("d{j}")).collect()).unwrap();
        ProfileMatrix::new(values, users, domains, Metric::Bytes).unwrap()
    }

    #[test]
    fn median_counts_zeros() {
        let s = domain_stats(&matrix(&[&[0.0, 0.0, 5.0], &[1.0, 2.0, 3.0]]));
        assert_eq!(s.domains[0].median, 0.0);
        assert_eq!(s.domains[0].n_users, 1);
        assert_eq!(s.domains[1].median, 2.0);
        assert_eq!(s.domains[1].n_users, 3);
        assert_eq!(s.nonzero_median_fraction, 0.5);
    }

    #[test]
    fn lower_median_on_even_counts() {
        assert_eq!(lower_median_with_zeros(&[1.0, 2.0, 3.0, 4.0], 4), 2.0);
        assert_eq!(lower_median_with_zeros(&[4.0, 3.0], 4), 0.0);
        assert_eq!(lower_median_with_zeros(&[], 0), 0.0);
    }

    #[test]
    fn universal_domain_fraction() {
        let s = domain_stats(&matrix(&[&[7.0, 7.0, 7.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 4.0]]));
        assert!((s.nonzero_median_fraction - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ranking() {
        let stat = |d: &str, median: f64| DomainStat {
            domain: d.into(),
            median,
            n_users: 1,
            total: median,
        };
        let stats = |ds: Vec<DomainStat>| DomainStats {
            n_users: 1,
            domains: ds,
            nonzero_median_fraction: 0.0,
        };
        assert_eq!(rank_domains(&stats(vec![stat("a", 2.0), stat("b", 5.0)]), RankKey::Median), ["b", "a"]);
        assert_eq!(rank_domains(&stats(vec![stat("b", 3.0), stat("a", 3.0)]), RankKey::Median), ["a", "b"]);
        assert!(rank_domains(&stats(vec![]), RankKey::Total).is_empty());
    }

    #[test]
    fn column_histogram() {
        let m = matrix(&[&[10.0, 10.0, 1000.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
        let h = intensity_histogram(&m, "d0", &BinSpec::LogDecades, false).unwrap();
        assert_eq!(h.edges, vec![10.0, 100.0, 1000.0, 10000.0]);
        assert_eq!(h.counts, vec![2, 0, 1]);
        assert_eq!(h.total(), 3);
        let h = intensity_histogram(&m, "d0", &BinSpec::LogDecades, true).unwrap();
        assert_eq!(h.zero_count, 1);
        assert_eq!(h.total(), 4);
        let h = intensity_histogram(&m, "d1", &BinSpec::LogDecades, false).unwrap();
        assert_eq!(h.counts, vec![1]);
        assert_eq!(h.edges[0], 1.0);
        assert!(matches!(
            intensity_histogram(&m, "nope", &BinSpec::LogDecades, false),
            Err(Error::UnknownDomain(_))
        ));
    }
}

use serde::Serialize;

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::weighting::{FeatureMatrix, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopDomain {
    pub domain: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterTopics {
    pub cluster: usize,
    pub size: usize,
    /// Mean weight of every domain over all members, zeros included.
    #[serde(skip)]
    pub mean_weights: Vec<f64>,
    pub top: Vec<TopDomain>,
    /// Highest-weighted domain; `None` for an empty cluster.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterTopicReport {
    pub provenance: Provenance,
    pub domains: Vec<String>,
    pub clusters: Vec<ClusterTopics>,
}

/// Per-cluster mean feature weights and the `top_n` domains by mean.
///
/// Only domains with at least one non-zero member entry are ranked, so a
/// domain whose weight is zero for everybody (e.g. one visited by all users
/// under TF-IDF) never labels a cluster. Ties go to the smaller name.
pub fn cluster_topics(f: &FeatureMatrix, c: &Clustering, top_n: usize) -> Result<ClusterTopicReport> {
    if f.n_users() != c.assignments.len() {
        return Err(Error::DimensionMismatch(format!(
            "feature matrix has {} users, clustering {}",
            f.n_users(),
            c.assignments.len()
        )));
    }
    let n_domains = f.n_domains();
    let clusters = c
        .members()
        .into_iter()
        .enumerate()
        .map(|(cluster, members)| {
            let mut cells: Vec<Vec<f64>> = vec![Vec::new(); n_domains];
            for &i in &members {
                let (cols, vals) = f.values.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    cells[j].push(v);
                }
            }
            let size = members.len();
            // summing sorted values keeps the result independent of member order
            let mean_weights: Vec<f64> = cells
                .iter_mut()
                .map(|vals| {
                    vals.sort_by(f64::total_cmp);
                    if size == 0 {
                        0.0
                    } else {
                        vals.iter().sum::<f64>() / size as f64
                    }
                })
                .collect();
            let mut ranked: Vec<usize> = (0..n_domains).filter(|&j| !cells[j].is_empty()).collect();
            ranked.sort_by(|&a, &b| {
                mean_weights[b]
                    .total_cmp(&mean_weights[a])
                    .then_with(|| f.domains.name(a).cmp(f.domains.name(b)))
            });
            let top: Vec<TopDomain> = ranked
                .iter()
                .take(top_n)
                .map(|&j| TopDomain {
                    domain: f.domains.name(j).to_string(),
                    weight: mean_weights[j],
                })
                .collect();
            ClusterTopics {
                cluster,
                size,
                label: ranked.first().map(|&j| f.domains.name(j).to_string()),
                mean_weights,
                top,
            }
        })
        .collect();
    Ok(ClusterTopicReport {
        provenance: f.provenance,
        domains: f.domains.names().to_vec(),
        clusters,
    })
}

impl ClusterTopicReport {
    /// Union of each cluster's `n` best domains, ordered cluster by cluster
    /// and by rank within a cluster, first occurrence kept.
    pub fn top_domain_union(&self, n: usize) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for c in &self.clusters {
            for t in c.top.iter().take(n) {
                if seen.insert(t.domain.as_str()) {
                    out.push(t.domain.clone());
                }
            }
        }
        out
    }

    pub fn mean_weight(&self, cluster: usize, domain: &str) -> Option<f64> {
        let j = self.domains.iter().position(|d| d == domain)?;
        Some(self.clusters.get(cluster)?.mean_weights[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{CsrMatrix, Index};
    use crate::weighting::LogBase;
    use ndarray::Array2;

    fn features(rows: &[&[f64]]) -> FeatureMatrix {
        let t = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)));
        FeatureMatrix {
            values: CsrMatrix::from_triplets(rows.len(), rows[0].len(), t).unwrap(),
            users: Index::from_names((0..rows.len()).map(|i| format!("u{i}")).collect()).unwrap(),
            domains: Index::from_names((0..rows[0].len()).map(|j| format!("d{j}")).collect()).unwrap(),
            provenance: Provenance::Tfidf,
            log_base: LogBase::Natural,
            dropped_users: vec![],
            negative_tf_fraction: 0.0,
        }
    }

    fn clustering(assignments: Vec<usize>, k: usize) -> Clustering {
        Clustering {
            k,
            assignments,
            centroids: Array2::zeros((k, 1)),
            inertia: 0.0,
            restarts: 1,
            iterations_run: 1,
            seed: 0,
        }
    }

    #[test]
    fn identical_rows() {
        let f = features(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let r = cluster_topics(&f, &clustering(vec![0, 0], 1), 3).unwrap();
        assert_eq!(r.clusters[0].label.as_deref(), Some("d0"));
        assert_eq!(r.clusters[0].top, vec![TopDomain { domain: "d0".into(), weight: 1.0 }]);
        assert_eq!(r.clusters[0].size, 2);
    }

    #[test]
    fn singleton_and_empty_clusters() {
        let f = features(&[&[0.2, 0.9, 0.0], &[0.5, 0.5, 0.1]]);
        let r = cluster_topics(&f, &clustering(vec![0, 2], 3), 2).unwrap();
        assert_eq!(r.clusters[0].label.as_deref(), Some("d1"));
        assert_eq!(r.clusters[1].size, 0);
        assert_eq!(r.clusters[1].label, None);
        // tie between d0 and d1 broken by name
        assert_eq!(r.clusters[2].top[0].domain, "d0");
        assert_eq!(r.clusters[2].top[1].domain, "d1");
        let sizes: usize = r.clusters.iter().map(|c| c.size).sum();
        assert_eq!(sizes, 2);
        assert_eq!(r.top_domain_union(1), vec!["d1".to_string(), "d0".to_string()]);
    }

    #[test]
    fn zeros_count_in_mean() {
        let f = features(&[&[4.0, 0.0], &[0.0, 1.0]]);
        let r = cluster_topics(&f, &clustering(vec![0, 0], 1), 5).unwrap();
        assert_eq!(r.mean_weight(0, "d0"), Some(2.0));
        assert_eq!(r.mean_weight(0, "d1"), Some(0.5));
    }

    #[test]
    fn misaligned() {
        let f = features(&[&[1.0]]);
        assert!(cluster_topics(&f, &clustering(vec![0, 0], 1), 1).is_err());
    }
}

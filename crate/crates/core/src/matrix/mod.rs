//! Users×domains activity matrix and its descriptive statistics.

mod csr;
pub mod io;
mod stats;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use csr::CsrMatrix;
pub use stats::{domain_stats, intensity_histogram, rank_domains, DomainStat, DomainStats, RankKey};

use crate::error::{Error, Result};

/// Bijection between string keys and dense indices `0..len`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Index {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl Index {
    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut lookup = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if lookup.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate index key `{n}`")));
            }
        }
        Ok(Self { names, lookup })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub(crate) fn select(&self, keep: &[usize]) -> Index {
        Index::from_names(keep.iter().map(|&i| self.names[i].clone()).collect()).expect("subset of a bijection")
    }
}

/// Which per-session statistic fills the profile matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Bytes,
    Duration,
    Requests,
    SessionCount,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Bytes => "bytes",
            Metric::Duration => "duration",
            Metric::Requests => "requests",
            Metric::SessionCount => "session_count",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bytes" => Metric::Bytes,
            "duration" => Metric::Duration,
            "requests" => Metric::Requests,
            "session_count" | "sessions" => Metric::SessionCount,
            other => return Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
        })
    }
}

/// Raw activity `B[i][j]` of user `i` on domain `j`. Only strictly positive
/// entries are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatrix {
    pub values: CsrMatrix,
    pub users: Index,
    pub domains: Index,
    pub metric: Metric,
}

impl ProfileMatrix {
    pub fn new(values: CsrMatrix, users: Index, domains: Index, metric: Metric) -> Result<Self> {
        if values.n_rows() != users.len() || values.n_cols() != domains.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but indices cover {} users and {} domains",
                values.n_rows(),
                values.n_cols(),
                users.len(),
                domains.len()
            )));
        }
        if let Some((i, _, v)) = values.triplets().find(|&(_, _, v)| v <= 0.0) {
            return Err(Error::InvalidArgument(format!("profile entry {v} in row {i} is not positive")));
        }
        Ok(Self {
            values,
            users,
            domains,
            metric,
        })
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_domains(&self) -> usize {
        self.domains.len()
    }

    pub fn get(&self, user: &str, domain: &str) -> Option<f64> {
        Some(self.values.get(self.users.get(user)?, self.domains.get(domain)?))
    }

    /// Drops users whose row sums to zero. Returns the reduced matrix and the
    /// ids of the removed users.
    pub fn without_empty_rows(&self) -> (ProfileMatrix, Vec<String>) {
        let sums = self.values.row_sums();
        let (keep, dropped): (Vec<usize>, Vec<usize>) = (0..self.n_users()).partition(|&i| sums[i] > 0.0);
        if dropped.is_empty() {
            return (self.clone(), Vec::new());
        }
        let reduced = ProfileMatrix {
            values: self.values.select_rows(&keep),
            users: self.users.select(&keep),
            domains: self.domains.clone(),
            metric: self.metric,
        };
        (reduced, dropped.iter().map(|&i| self.users.name(i).to_string()).collect())
    }
}

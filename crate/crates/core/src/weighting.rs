//! Logarithmic TF-IDF weighting of a profile matrix.
//!
//! For a user row `B[i]` with total `S_i = Σ_j B[i][j]`:
//!
//! ```text
//! TF[i][j]  = 1 + log(B[i][j] / S_i)        (only where B[i][j] > 0)
//! IDF[j]    = log(N_users / n_j)            (n_j = users with B[i][j] > 0)
//! F[i][j]   = TF[i][j] · IDF[j]
//! ```
//!
//! Shares below `1/e` give negative TF; they are kept as computed and the
//! share of such entries is reported in [`FeatureMatrix::negative_tf_fraction`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CsrMatrix, Index, ProfileMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Ten => x.log10(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::Natural => "e",
            LogBase::Ten => "10",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "natural" | "ln" => Ok(LogBase::Natural),
            "10" | "ten" | "log10" => Ok(LogBase::Ten),
            other => Err(Error::InvalidArgument(format!("unknown log base `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    Tfidf,
    RowNormalized,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Tfidf => "tfidf",
            Provenance::RowNormalized => "row_normalized",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tfidf" => Ok(Provenance::Tfidf),
            "row_normalized" | "row-normalized" => Ok(Provenance::RowNormalized),
            other => Err(Error::InvalidArgument(format!("unknown weighting `{other}`"))),
        }
    }
}

/// Weighted users×domains matrix. Entries are only ever non-zero where the
/// source profile is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: CsrMatrix,
    pub users: Index,
    pub domains: Index,
    pub provenance: Provenance,
    pub log_base: LogBase,
    /// Users removed before weighting because they had no activity.
    pub dropped_users: Vec<String>,
    /// Share of stored TF values below zero (0 for row normalization).
    pub negative_tf_fraction: f64,
}

impl FeatureMatrix {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_domains(&self) -> usize {
        self.domains.len()
    }
}

/// Log-scaled term frequencies. Rows without activity stay empty.
pub fn tf(m: &ProfileMatrix, base: LogBase) -> CsrMatrix {
    let sums = m.values.row_sums();
    m.values.map_entries(|i, _, b| 1.0 + base.log(b / sums[i]))
}

/// Inverse document frequency per domain. A domain nobody visited has no
/// entries to weight and gets 0.
pub fn idf(m: &ProfileMatrix, base: LogBase) -> Vec<f64> {
    let n_users = m.n_users() as f64;
    m.values
        .column_counts()
        .into_iter()
        .map(|n| if n == 0 { 0.0 } else { base.log(n_users / n as f64) })
        .collect()
}

fn drop_empty(m: &ProfileMatrix) -> (ProfileMatrix, Vec<String>) {
    let (reduced, dropped) = m.without_empty_rows();
    if !dropped.is_empty() {
        log::warn!("dropping {} users with zero activity before weighting", dropped.len());
    }
    (reduced, dropped)
}

pub fn tfidf(m: &ProfileMatrix, base: LogBase) -> FeatureMatrix {
    let (m, dropped_users) = drop_empty(m);
    let tf = tf(&m, base);
    let negative = tf.triplets().filter(|&(_, _, v)| v < 0.0).count();
    let negative_tf_fraction = if tf.nnz() == 0 {
        0.0
    } else {
        negative as f64 / tf.nnz() as f64
    };
    let idf = idf(&m, base);
    FeatureMatrix {
        values: tf.map_entries(|_, j, t| t * idf[j]),
        users: m.users,
        domains: m.domains,
        provenance: Provenance::Tfidf,
        log_base: base,
        dropped_users,
        negative_tf_fraction,
    }
}

/// Each row divided by its sum: the unweighted baseline.
pub fn row_normalize(m: &ProfileMatrix) -> FeatureMatrix {
    let (m, dropped_users) = drop_empty(m);
    let sums = m.values.row_sums();
    FeatureMatrix {
        values: m.values.map_entries(|i, _, b| b / sums[i]),
        users: m.users,
        domains: m.domains,
        provenance: Provenance::RowNormalized,
        log_base: LogBase::Natural,
        dropped_users,
        negative_tf_fraction: 0.0,
    }
}

pub fn weight(m: &ProfileMatrix, mode: Provenance, base: LogBase) -> FeatureMatrix {
    match mode {
        Provenance::Tfidf => tfidf(m, base),
        Provenance::RowNormalized => row_normalize(m),
    }
}

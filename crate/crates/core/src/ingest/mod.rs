//! Reading traffic, demographic and transaction logs, and aggregating
//! sessions into a [`ProfileMatrix`].

mod domain;
mod io;
mod records;
mod sessionize;

use std::collections::HashMap;

pub use domain::{normalize_domain, registrable_domain};
pub use io::{
    format_timestamp, parse_demographics, parse_events, parse_sessions, parse_timestamp, parse_transactions,
    write_demographics, write_events, write_sessions, write_transactions, ErrorPolicy, ParseOptions, Parsed, RowError,
};
pub use records::{DemographicRecord, Gender, RawEvent, SessionRecord, TransactionRecord};
pub use sessionize::{resessionize, sessionize, SessionizeOptions, DEFAULT_GAP_SECONDS};

use crate::matrix::{CsrMatrix, Index, Metric, ProfileMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexOrder {
    /// Users and domains sorted lexicographically.
    #[default]
    Canonical,
    /// Users and domains in order of first appearance in the input.
    FirstAppearance,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ProfileOptions {
    pub metric: Metric,
    pub order: IndexOrder,
}

fn metric_value(s: &SessionRecord, metric: Metric) -> u128 {
    match metric {
        Metric::Bytes => s.bytes as u128,
        Metric::Duration => s.duration as u128,
        Metric::Requests => s.http_requests as u128,
        Metric::SessionCount => 1,
    }
}

fn index_of<'a>(keys: impl Iterator<Item = &'a str>, order: IndexOrder) -> Index {
    let mut seen = HashMap::new();
    let mut names = Vec::new();
    for k in keys {
        if !seen.contains_key(k) {
            seen.insert(k, ());
            names.push(k.to_string());
        }
    }
    if order == IndexOrder::Canonical {
        names.sort_unstable();
    }
    Index::from_names(names).expect("keys deduplicated")
}

/// Sums the chosen metric over all sessions of each (user, domain) pair.
/// Every user and domain seen in `sessions` gets a row or column, even when
/// its total is zero.
pub fn build_profile_matrix(sessions: &[SessionRecord], opts: &ProfileOptions) -> ProfileMatrix {
    let users = index_of(sessions.iter().map(|s| s.user_id.as_str()), opts.order);
    let domains = index_of(sessions.iter().map(|s| s.domain.as_str()), opts.order);
    let mut cells: HashMap<(usize, usize), u128> = HashMap::new();
    for s in sessions {
        let key = (users.get(&s.user_id).unwrap(), domains.get(&s.domain).unwrap());
        *cells.entry(key).or_insert(0) += metric_value(s, opts.metric);
    }
    let values = CsrMatrix::from_triplets(
        users.len(),
        domains.len(),
        cells.into_iter().filter(|(_, v)| *v > 0).map(|((i, j), v)| (i, j, v as f64)),
    )
    .expect("indices in range");
    ProfileMatrix::new(values, users, domains, opts.metric).expect("consistent shape")
}

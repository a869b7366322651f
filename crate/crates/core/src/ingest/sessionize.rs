//! Gap-based sessionization of raw traffic events.

use std::collections::HashMap;

use chrono::{DateTime, Utc};

use super::records::{RawEvent, SessionRecord};
use crate::error::{Error, Result};

/// Inter-event pause that closes a session, in seconds.
pub const DEFAULT_GAP_SECONDS: i64 = 300;

#[derive(Debug, Clone, Copy)]
pub struct SessionizeOptions {
    /// Events closer than this (seconds) join the same session.
    pub gap_threshold: i64,
    /// Sort input by (user_id, timestamp) first. When off, unsorted input is an error.
    pub sort: bool,
}

impl Default for SessionizeOptions {
    fn default() -> Self {
        Self {
            gap_threshold: DEFAULT_GAP_SECONDS,
            sort: true,
        }
    }
}

/// Merges consecutive events of the same user on the same domain into
/// sessions. A pause of at least `gap_threshold` seconds starts a new
/// session. Sessions never span users or domains.
pub fn sessionize(events: &[RawEvent], opts: &SessionizeOptions) -> Result<Vec<SessionRecord>> {
    let sessions: Vec<SessionRecord> = events
        .iter()
        .map(|e| SessionRecord {
            user_id: e.user_id.clone(),
            start_time: e.timestamp,
            duration: 0,
            location: String::new(),
            domain: e.domain.clone(),
            isp: None,
            http_requests: e.http_requests,
            service_class: None,
            bytes: e.bytes,
        })
        .collect();
    merge(sessions, opts)
}

/// Applies the same gap rule to already aggregated sessions, treating each
/// one as the interval `[start, start + duration]`. Sessions produced by
/// [`sessionize`] with the same threshold come back unchanged.
pub fn resessionize(sessions: &[SessionRecord], opts: &SessionizeOptions) -> Result<Vec<SessionRecord>> {
    merge(sessions.to_vec(), opts)
}

fn merge(mut items: Vec<SessionRecord>, opts: &SessionizeOptions) -> Result<Vec<SessionRecord>> {
    if opts.gap_threshold <= 0 {
        return Err(Error::InvalidArgument(format!(
            "gap threshold must be positive, got {}",
            opts.gap_threshold
        )));
    }
    if opts.sort {
        items.sort_by(|a, b| (&a.user_id, a.start_time).cmp(&(&b.user_id, b.start_time)));
    } else if let Some(pos) = items
        .windows(2)
        .position(|w| (&w[0].user_id, w[0].start_time) > (&w[1].user_id, w[1].start_time))
    {
        return Err(Error::Unsorted { position: pos + 1 });
    }

    let mut out: Vec<SessionRecord> = Vec::with_capacity(items.len());
    // Per domain of the current user: (index into `out`, session end).
    let mut open: HashMap<String, (usize, DateTime<Utc>)> = HashMap::new();
    for item in items {
        if out.last().is_some_and(|s| s.user_id != item.user_id) {
            open.clear();
        }
        let item_end = item.end_time();
        if let Some((idx, end)) = open.get_mut(&item.domain) {
            if (item.start_time - *end).num_seconds() < opts.gap_threshold {
                let s = &mut out[*idx];
                *end = (*end).max(item_end);
                s.duration = (*end - s.start_time).num_seconds() as u64;
                s.bytes += item.bytes;
                s.http_requests += item.http_requests;
                continue;
            }
        }
        open.insert(item.domain.clone(), (out.len(), item_end));
        out.push(item);
    }
    Ok(out)
}

//! End-to-end commands over a persisted workspace directory.
//!
//! Each command reads its predecessor's outputs by fixed file names, writes
//! its own, and records a JSON manifest holding the full configuration,
//! checksums of inputs and outputs, a result summary and, in a separate
//! `timings_seconds` field, wall-clock stage timings.

mod commands;

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::clustering::KMeansOptions;
use crate::error::{Error, Result};
use crate::ingest::{ErrorPolicy, ParseOptions, DEFAULT_GAP_SECONDS};
use crate::lsa::{SvdMethod, SvdOptions};
use crate::matrix::Metric;
use crate::weighting::{LogBase, Provenance};

pub use commands::{
    cmd_bench_m, cmd_cluster, cmd_ingest, cmd_report, cmd_sweep_k, cmd_synth, BenchRow, ClusterOutcome, IngestOutcome,
    StageSpread,
};

pub const PROFILE_FILE: &str = "profile.triplets";
pub const FEATURES_FILE: &str = "features.triplets";
pub const USERS_FILE: &str = "users.csv";
pub const DOMAINS_FILE: &str = "domains.csv";
pub const DOMAIN_STATS_FILE: &str = "domain_stats.tsv";
pub const DEMOGRAPHICS_FILE: &str = "demographics.csv";
pub const TRANSACTIONS_FILE: &str = "transactions.csv";
pub const SWEEP_FILE: &str = "sweep_k.tsv";
pub const BENCH_FILE: &str = "bench_m.tsv";
pub const LOCK_FILE: &str = ".netlsa.lock";

/// Every knob of the pipeline. Serializes into the run manifest, and a
/// manifest's `config` object reads back as a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Aggregated session log.
    pub sessions: Option<PathBuf>,
    /// Raw event log, sessionized on ingest. Used when `sessions` is absent.
    pub events: Option<PathBuf>,
    pub demographics: Option<PathBuf>,
    pub transactions: Option<PathBuf>,
    /// Workspace directory.
    pub out: PathBuf,
    pub delimiter: char,
    pub fail_fast: bool,
    pub truncate_registrable: bool,
    pub gap_seconds: i64,
    pub metric: Metric,
    pub weighting: Provenance,
    pub log_base: LogBase,
    /// Truncation rank, also read as the topic count.
    pub m: usize,
    pub scale_features: bool,
    pub svd_method: SvdMethod,
    pub oversampling: usize,
    pub power_iterations: usize,
    pub k: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub top_n: usize,
    pub m_list: Vec<usize>,
    pub repetitions: usize,
    /// Transactions outside `[spend_start, spend_end)` are ignored.
    pub spend_start: Option<DateTime<Utc>>,
    pub spend_end: Option<DateTime<Utc>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sessions: None,
            events: None,
            demographics: None,
            transactions: None,
            out: PathBuf::from("netlsa-out"),
            delimiter: ',',
            fail_fast: false,
            truncate_registrable: false,
            gap_seconds: DEFAULT_GAP_SECONDS,
            metric: Metric::Bytes,
            weighting: Provenance::Tfidf,
            log_base: LogBase::Natural,
            m: 80,
            scale_features: false,
            svd_method: SvdMethod::Auto,
            oversampling: 10,
            power_iterations: 2,
            k: 8,
            k_min: 1,
            k_max: 13,
            restarts: 10,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
            top_n: 10,
            m_list: (1..=8).map(|i| i * 100).collect(),
            repetitions: 5,
            spend_start: None,
            spend_end: None,
        }
    }
}

impl PipelineConfig {
    /// Reads a TOML config, or a JSON run manifest whose `config` object is
    /// taken verbatim.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            let v: Value = serde_json::from_str(&text)?;
            let cfg = v.get("config").cloned().unwrap_or(v);
            return serde_json::from_value(cfg).map_err(|e| Error::Spec(e.to_string()));
        }
        toml::from_str(&text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !self.delimiter.is_ascii() {
            return bad(format!("delimiter must be a single ASCII character, got {:?}", self.delimiter));
        }
        if self.gap_seconds <= 0 {
            return bad(format!("gap must be positive, got {}", self.gap_seconds));
        }
        if self.m == 0 || self.k == 0 {
            return bad("M and K must be at least 1".into());
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return bad(format!("K range {}..{} is empty or starts at 0", self.k_min, self.k_max));
        }
        if self.restarts == 0 || self.max_iter == 0 || self.repetitions == 0 {
            return bad("restarts, max_iter and repetitions must be at least 1".into());
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be finite and non-negative, got {}", self.tol));
        }
        if self.m_list.is_empty() || self.m_list.contains(&0) {
            return bad("M list must be non-empty and positive".into());
        }
        if let (Some(a), Some(b)) = (self.spend_start, self.spend_end) {
            if a >= b {
                return bad("spend window start must precede its end".into());
            }
        }
        Ok(())
    }

    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            delimiter: self.delimiter as u8,
            policy: if self.fail_fast {
                ErrorPolicy::FailFast
            } else {
                ErrorPolicy::SkipAndCount
            },
            truncate_registrable: self.truncate_registrable,
            ..Default::default()
        }
    }

    pub fn svd_options(&self) -> SvdOptions {
        SvdOptions {
            method: self.svd_method,
            oversampling: self.oversampling,
            power_iterations: self.power_iterations,
            seed: self.seed,
            ..Default::default()
        }
    }

    pub fn kmeans_options(&self) -> KMeansOptions {
        KMeansOptions {
            restarts: self.restarts,
            max_iter: self.max_iter,
            tol: self.tol,
            seed: self.seed,
        }
    }

    pub fn spend_window(&self) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        match (self.spend_start, self.spend_end) {
            (None, None) => None,
            (start, end) => Some((
                start.unwrap_or(DateTime::<Utc>::MIN_UTC),
                end.unwrap_or(DateTime::<Utc>::MAX_UTC),
            )),
        }
    }
}

/// Exclusive hold on a workspace, released on drop.
#[derive(Debug)]
pub struct WorkspaceLock {
    path: PathBuf,
}

impl WorkspaceLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(path)),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for WorkspaceLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn checksums<'a>(dir: &Path, paths: impl IntoIterator<Item = &'a PathBuf>) -> Result<BTreeMap<String, String>> {
    paths
        .into_iter()
        .map(|p| {
            let name = p.strip_prefix(dir).unwrap_or(p).to_string_lossy().into_owned();
            Ok((name, sha256_file(p)?))
        })
        .collect()
}

/// Writes `<command>_manifest.json` (`run_manifest.json` for `cluster`).
fn write_manifest(
    dir: &Path,
    command: &str,
    config: Value,
    inputs: &[PathBuf],
    outputs: &[PathBuf],
    summary: Value,
    timings: BTreeMap<String, f64>,
) -> Result<(PathBuf, Value)> {
    let name = if command == "cluster" {
        "run_manifest.json".to_string()
    } else {
        format!("{command}_manifest.json")
    };
    let manifest = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "inputs": checksums(dir, inputs)?,
        "outputs": checksums(dir, outputs)?,
        "summary": summary,
        "timings_seconds": timings,
    });
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok((path, manifest))
}

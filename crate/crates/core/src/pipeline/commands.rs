use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::Serialize;
use serde_json::{json, Value};

use super::*;
use crate::clustering::{self, kmeans, sweep_k, Clustering, SweepEntry};
use crate::fmt::sig6;
use crate::histogram::BinSpec;
use crate::ingest::{
    build_profile_matrix, parse_demographics, parse_events, parse_sessions, parse_transactions, sessionize,
    write_demographics, write_transactions, IndexOrder, Parsed, ProfileOptions, SessionRecord, SessionizeOptions,
};
use crate::lsa::{truncated_svd, LsaModel};
use crate::matrix::io::{read_index, read_triplets, write_index, write_triplets};
use crate::matrix::{domain_stats, rank_domains, DomainStats, Index, ProfileMatrix, RankKey};
use crate::reporting::{
    birth_year_distribution, cluster_topics, gender_breakdown, spend_distribution, write_reports, Reports,
};
use crate::synth::{self, SynthOutput, SynthSpec};
use crate::weighting::{weight, FeatureMatrix};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn report_rejects<T>(what: &str, parsed: &Parsed<T>) {
    for w in &parsed.warnings {
        warn!("{what}: {w}");
    }
    if !parsed.errors.is_empty() {
        warn!("{what}: skipped {} malformed rows (first at line {})", parsed.errors.len(), parsed.errors[0].line);
    }
}

fn config_value(cfg: &PipelineConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub profile: ProfileMatrix,
    pub stats: DomainStats,
    pub sessions: usize,
    pub rejected_rows: usize,
    pub manifest: Value,
}

/// Parses the logs, builds the profile matrix and writes it with its
/// indices, domain statistics and normalized demographic files.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<IngestOutcome> {
    cfg.validate()?;
    let _lock = WorkspaceLock::acquire(&cfg.out)?;
    let started = Instant::now();
    let opts = cfg.parse_options();
    let mut inputs = Vec::new();
    let mut rejected = 0;

    let sessions: Vec<SessionRecord> = match (&cfg.sessions, &cfg.events) {
        (Some(path), _) => {
            let parsed = parse_sessions(open(path)?, &opts)?;
            report_rejects("sessions", &parsed);
            rejected += parsed.errors.len();
            inputs.push(path.clone());
            parsed.records
        }
        (None, Some(path)) => {
            let parsed = parse_events(open(path)?, &opts)?;
            report_rejects("events", &parsed);
            rejected += parsed.errors.len();
            inputs.push(path.clone());
            sessionize(
                &parsed.records,
                &SessionizeOptions {
                    gap_threshold: cfg.gap_seconds,
                    sort: true,
                },
            )?
        }
        (None, None) => return Err(Error::InvalidArgument("ingest needs a sessions or events file".into())),
    };
    let profile = build_profile_matrix(
        &sessions,
        &ProfileOptions {
            metric: cfg.metric,
            order: IndexOrder::Canonical,
        },
    );
    let stats = domain_stats(&profile);
    let out = &cfg.out;
    let mut outputs = Vec::new();

    let path = out.join(PROFILE_FILE);
    write_triplets(
        create(&path)?,
        &profile.values,
        &[("metric", cfg.metric.as_str().to_string()), ("sessions", sessions.len().to_string())],
    )
    .map_err(|e| Error::io(&path, e))?;
    outputs.push(path);
    let path = out.join(USERS_FILE);
    write_index(create(&path)?, &profile.users, "row", "user_id")?;
    outputs.push(path);
    let path = out.join(DOMAINS_FILE);
    write_index(create(&path)?, &profile.domains, "col", "domain")?;
    outputs.push(path);

    let path = out.join(DOMAIN_STATS_FILE);
    let mut w = create(&path)?;
    let by_name: BTreeMap<&str, _> = stats.domains.iter().map(|d| (d.domain.as_str(), d)).collect();
    let io = |e| Error::io(&path, e);
    writeln!(w, "domain\tmedian\tn_users\ttotal").map_err(io)?;
    for name in rank_domains(&stats, RankKey::Median) {
        let d = by_name[name.as_str()];
        writeln!(w, "{}\t{}\t{}\t{}", d.domain, sig6(d.median), d.n_users, sig6(d.total)).map_err(io)?;
    }
    w.flush().map_err(io)?;
    outputs.push(path);

    let mut demo_rows = None;
    if let Some(src) = &cfg.demographics {
        let parsed = parse_demographics(open(src)?, &opts)?;
        report_rejects("demographics", &parsed);
        rejected += parsed.errors.len();
        inputs.push(src.clone());
        let path = out.join(DEMOGRAPHICS_FILE);
        write_demographics(create(&path)?, b',', &parsed.records)?;
        outputs.push(path);
        demo_rows = Some(parsed.records.len());
    }
    let mut tx_rows = None;
    if let Some(src) = &cfg.transactions {
        let parsed = parse_transactions(open(src)?, &opts)?;
        report_rejects("transactions", &parsed);
        rejected += parsed.errors.len();
        inputs.push(src.clone());
        let path = out.join(TRANSACTIONS_FILE);
        write_transactions(create(&path)?, b',', &parsed.records)?;
        outputs.push(path);
        tx_rows = Some(parsed.records.len());
    }

    let summary = json!({
        "sessions": sessions.len(),
        "rejected_rows": rejected,
        "users": profile.n_users(),
        "domains": profile.n_domains(),
        "nnz": profile.values.nnz(),
        "total": profile.values.sum(),
        "nonzero_median_fraction": stats.nonzero_median_fraction,
        "demographic_rows": demo_rows,
        "transaction_rows": tx_rows,
    });
    let timings = BTreeMap::from([("total".to_string(), started.elapsed().as_secs_f64())]);
    let (_, manifest) = write_manifest(out, "ingest", config_value(cfg), &inputs, &outputs, summary, timings)?;
    info!(
        "ingested {} sessions into {} users x {} domains ({} entries)",
        sessions.len(),
        profile.n_users(),
        profile.n_domains(),
        profile.values.nnz()
    );
    Ok(IngestOutcome {
        profile,
        stats,
        sessions: sessions.len(),
        rejected_rows: rejected,
        manifest,
    })
}

fn load_profile(dir: &Path) -> Result<ProfileMatrix> {
    let path = dir.join(PROFILE_FILE);
    let (values, header) = read_triplets(open(&path)?)?;
    let metric = header
        .iter()
        .find(|(k, _)| k == "metric")
        .map(|(_, v)| v.parse())
        .transpose()
        .map_err(|e: Error| Error::format("profile matrix", e.to_string()))?
        .unwrap_or_default();
    let users = read_index(open(&dir.join(USERS_FILE))?)?;
    let domains = read_index(open(&dir.join(DOMAINS_FILE))?)?;
    ProfileMatrix::new(values, users, domains, metric)
}

fn weighted(cfg: &PipelineConfig, profile: &ProfileMatrix) -> FeatureMatrix {
    let f = weight(profile, cfg.weighting, cfg.log_base);
    if !f.dropped_users.is_empty() {
        warn!("dropped {} users without activity", f.dropped_users.len());
    }
    f
}

fn check_rank(m: usize, f: &FeatureMatrix) -> Result<()> {
    let limit = f.n_users().min(f.n_domains());
    if m > limit {
        return Err(Error::InvalidArgument(format!(
            "M = {m} exceeds min(users, domains) = {limit}"
        )));
    }
    Ok(())
}

fn decompose(cfg: &PipelineConfig, f: &FeatureMatrix, m: usize) -> Result<LsaModel> {
    check_rank(m, f)?;
    Ok(truncated_svd(f, m, &cfg.svd_options())?.canonicalize_signs())
}

fn build_reports(cfg: &PipelineConfig, f: &FeatureMatrix, c: &Clustering) -> Result<(Reports, Vec<PathBuf>)> {
    let mut inputs = Vec::new();
    let topics = cluster_topics(f, c, cfg.top_n)?;
    let users = f.users.names();
    let opts = ParseOptions::default();
    let demo_path = cfg.out.join(DEMOGRAPHICS_FILE);
    let (gender, birth_years) = if demo_path.exists() {
        let demo = parse_demographics(open(&demo_path)?, &opts)?.records;
        inputs.push(demo_path);
        (Some(gender_breakdown(c, users, &demo)?), Some(birth_year_distribution(c, users, &demo)?))
    } else {
        (None, None)
    };
    let tx_path = cfg.out.join(TRANSACTIONS_FILE);
    let spend = if tx_path.exists() {
        let tx = parse_transactions(open(&tx_path)?, &opts)?.records;
        inputs.push(tx_path);
        Some(spend_distribution(c, users, &tx, &BinSpec::default(), cfg.spend_window())?)
    } else {
        None
    };
    Ok((
        Reports {
            topics,
            gender,
            birth_years,
            spend,
        },
        inputs,
    ))
}

#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub features: FeatureMatrix,
    pub model: LsaModel,
    pub clustering: Clustering,
    pub reports: Reports,
    pub manifest: Value,
}

/// Weighting, LSA, K-means and reports over an ingested workspace.
pub fn cmd_cluster(cfg: &PipelineConfig) -> Result<ClusterOutcome> {
    cfg.validate()?;
    let _lock = WorkspaceLock::acquire(&cfg.out)?;
    let out = &cfg.out;
    let profile = load_profile(out)?;
    let mut timings = BTreeMap::new();
    let started = Instant::now();

    let t = Instant::now();
    let features = weighted(cfg, &profile);
    timings.insert("weighting".to_string(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let model = decompose(cfg, &features, cfg.m)?;
    timings.insert("lsa".to_string(), t.elapsed().as_secs_f64());

    if cfg.k > features.n_users() {
        return Err(Error::InvalidArgument(format!(
            "K = {} exceeds the {} clustered users",
            cfg.k,
            features.n_users()
        )));
    }
    let t = Instant::now();
    let points = model.user_features(cfg.scale_features);
    let clustering = kmeans(points.view(), cfg.k, &cfg.kmeans_options())?;
    timings.insert("clustering".to_string(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let (reports, mut inputs) = build_reports(cfg, &features, &clustering)?;
    timings.insert("reporting".to_string(), t.elapsed().as_secs_f64());

    let mut outputs = Vec::new();
    let path = out.join(FEATURES_FILE);
    write_triplets(
        create(&path)?,
        &features.values,
        &[
            ("provenance", features.provenance.as_str().to_string()),
            ("log_base", features.log_base.as_str().to_string()),
        ],
    )
    .map_err(|e| Error::io(&path, e))?;
    outputs.push(path);
    model.save(out)?;
    outputs.extend([crate::lsa::io::U_FILE, crate::lsa::io::SIGMA_FILE, crate::lsa::io::V_FILE].map(|f| out.join(f)));
    clustering::io::save(out, &features.users, &clustering)?;
    outputs.extend(
        [clustering::io::ASSIGNMENTS_FILE, clustering::io::CENTROIDS_FILE, clustering::io::META_FILE].map(|f| out.join(f)),
    );
    outputs.extend(write_reports(out, &reports)?);
    timings.insert("total".to_string(), started.elapsed().as_secs_f64());

    inputs.extend([PROFILE_FILE, USERS_FILE, DOMAINS_FILE].map(|f| out.join(f)));
    let summary = json!({
        "users": features.n_users(),
        "dropped_users": features.dropped_users,
        "domains": features.n_domains(),
        "negative_tf_fraction": features.negative_tf_fraction,
        "svd_method": model.method.as_str(),
        "sigma": model.sigma.iter().map(|s| sig6(*s)).collect::<Vec<_>>(),
        "inertia": clustering.inertia,
        "sizes": clustering.sizes(),
        "labels": reports.topics.clusters.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
    });
    let (_, manifest) = write_manifest(out, "cluster", config_value(cfg), &inputs, &outputs, summary, timings)?;
    info!("clustered {} users into {} clusters, inertia {}", features.n_users(), cfg.k, sig6(clustering.inertia));
    Ok(ClusterOutcome {
        features,
        model,
        clustering,
        reports,
        manifest,
    })
}

/// Best inertia for each K in `k_min..=k_max`, written to `sweep_k.tsv`.
pub fn cmd_sweep_k(cfg: &PipelineConfig) -> Result<Vec<SweepEntry>> {
    cfg.validate()?;
    let _lock = WorkspaceLock::acquire(&cfg.out)?;
    let out = &cfg.out;
    let started = Instant::now();
    let profile = load_profile(out)?;
    let features = weighted(cfg, &profile);
    if cfg.k_max > features.n_users() {
        return Err(Error::InvalidArgument(format!(
            "K range ends at {} but only {} users are clustered",
            cfg.k_max,
            features.n_users()
        )));
    }
    let model = decompose(cfg, &features, cfg.m)?;
    let points = model.user_features(cfg.scale_features);
    let sweep = sweep_k(points.view(), cfg.k_min, cfg.k_max, &cfg.kmeans_options())?;

    let path = out.join(SWEEP_FILE);
    let mut w = create(&path)?;
    let io = |e| Error::io(&path, e);
    writeln!(w, "k\tinertia").map_err(io)?;
    for e in &sweep {
        writeln!(w, "{}\t{}", e.k, sig6(e.inertia)).map_err(io)?;
    }
    w.flush().map_err(io)?;

    let summary = json!({ "inertia": sweep.iter().map(|e| (e.k.to_string(), e.inertia)).collect::<BTreeMap<_, _>>() });
    let timings = BTreeMap::from([("total".to_string(), started.elapsed().as_secs_f64())]);
    let inputs = [PROFILE_FILE, USERS_FILE, DOMAINS_FILE].map(|f| out.join(f));
    write_manifest(out, "sweep_k", config_value(cfg), &inputs, &[path], summary, timings)?;
    Ok(sweep)
}

/// Minimum, median and maximum of repeated wall-clock measurements, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageSpread {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl StageSpread {
    pub fn of(samples: &[f64]) -> Self {
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 {
            s[n / 2]
        } else {
            0.5 * (s[n / 2 - 1] + s[n / 2])
        };
        Self {
            min: s[0],
            median,
            max: s[n - 1],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub m: usize,
    pub svd_method: String,
    pub weighting: StageSpread,
    pub lsa: StageSpread,
    pub clustering: StageSpread,
    pub total: StageSpread,
}

/// Times weighting, LSA and K-means for each M, `repetitions` times each.
pub fn cmd_bench_m(cfg: &PipelineConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let _lock = WorkspaceLock::acquire(&cfg.out)?;
    let out = &cfg.out;
    let profile = load_profile(out)?;
    {
        let probe = weighted(cfg, &profile);
        for &m in &cfg.m_list {
            check_rank(m, &probe)?;
        }
        if cfg.k > probe.n_users() {
            return Err(Error::InvalidArgument(format!("K = {} exceeds the {} users", cfg.k, probe.n_users())));
        }
    }
    let mut rows = Vec::new();
    for &m in &cfg.m_list {
        let mut stages = [vec![], vec![], vec![], vec![]];
        let mut method = String::new();
        for _ in 0..cfg.repetitions {
            let t0 = Instant::now();
            let f = weight(&profile, cfg.weighting, cfg.log_base);
            let t1 = Instant::now();
            let model = truncated_svd(&f, m, &cfg.svd_options())?.canonicalize_signs();
            let t2 = Instant::now();
            let points = model.user_features(cfg.scale_features);
            kmeans(points.view(), cfg.k, &cfg.kmeans_options())?;
            let t3 = Instant::now();
            for (s, d) in stages.iter_mut().zip([t1 - t0, t2 - t1, t3 - t2, t3 - t0]) {
                s.push(d.as_secs_f64());
            }
            method = model.method.as_str().to_string();
        }
        info!("M = {m}: median total {:.3} s", StageSpread::of(&stages[3]).median);
        rows.push(BenchRow {
            m,
            svd_method: method,
            weighting: StageSpread::of(&stages[0]),
            lsa: StageSpread::of(&stages[1]),
            clustering: StageSpread::of(&stages[2]),
            total: StageSpread::of(&stages[3]),
        });
    }

    let path = out.join(BENCH_FILE);
    let mut w = create(&path)?;
    let io = |e| Error::io(&path, e);
    writeln!(w, "m\tsvd_method\tstage\tmin_s\tmedian_s\tmax_s").map_err(io)?;
    for r in &rows {
        for (stage, s) in [("weighting", r.weighting), ("lsa", r.lsa), ("clustering", r.clustering), ("total", r.total)] {
            writeln!(w, "{}\t{}\t{stage}\t{}\t{}\t{}", r.m, r.svd_method, sig6(s.min), sig6(s.median), sig6(s.max))
                .map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    let timings = rows
        .iter()
        .map(|r| (format!("m{}", r.m), r.total.median))
        .collect::<BTreeMap<_, _>>();
    let inputs = [PROFILE_FILE, USERS_FILE, DOMAINS_FILE].map(|f| out.join(f));
    let summary = json!({ "repetitions": cfg.repetitions, "m": cfg.m_list });
    let outputs = [path];
    write_manifest(out, "bench_m", config_value(cfg), &inputs, &outputs, summary, timings)?;
    Ok(rows)
}

/// Regenerates the report files from a clustered workspace.
pub fn cmd_report(cfg: &PipelineConfig) -> Result<Reports> {
    cfg.validate()?;
    let _lock = WorkspaceLock::acquire(&cfg.out)?;
    let out = &cfg.out;
    let started = Instant::now();
    let path = out.join(FEATURES_FILE);
    let (values, header) = read_triplets(open(&path)?)?;
    let get = |k: &str| header.iter().find(|(h, _)| h == k).map(|(_, v)| v.clone()).unwrap_or_default();
    let (user_names, clustering) = clustering::io::load(out)?;
    let features = FeatureMatrix {
        values,
        users: Index::from_names(user_names)?,
        domains: read_index(open(&out.join(DOMAINS_FILE))?)?,
        provenance: get("provenance").parse().map_err(|e: Error| Error::format("feature matrix", e.to_string()))?,
        log_base: get("log_base").parse().map_err(|e: Error| Error::format("feature matrix", e.to_string()))?,
        dropped_users: Vec::new(),
        negative_tf_fraction: 0.0,
    };
    if features.values.shape() != (features.n_users(), features.n_domains()) {
        return Err(Error::DimensionMismatch(format!(
            "feature matrix is {:?} but the workspace lists {} users and {} domains",
            features.values.shape(),
            features.n_users(),
            features.n_domains()
        )));
    }
    let (reports, mut inputs) = build_reports(cfg, &features, &clustering)?;
    let outputs = write_reports(out, &reports)?;
    inputs.extend([FEATURES_FILE, DOMAINS_FILE, clustering::io::ASSIGNMENTS_FILE].map(|f| out.join(f)));
    let timings = BTreeMap::from([("total".to_string(), started.elapsed().as_secs_f64())]);
    let summary = json!({ "clusters": clustering.k, "top_n": cfg.top_n });
    write_manifest(out, "report", config_value(cfg), &inputs, &outputs, summary, timings)?;
    Ok(reports)
}

/// Generates a synthetic corpus from a TOML spec into `out`.
pub fn cmd_synth(spec_path: &Path, out: &Path, seed: Option<u64>) -> Result<SynthOutput> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let mut spec = SynthSpec::from_toml(&text)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let _lock = WorkspaceLock::acquire(out)?;
    let started = Instant::now();
    let generated = synth::generate(&spec)?;
    let mut outputs = synth::write_output(out, &generated)?;
    let path = out.join("synth_spec.toml");
    std::fs::write(&path, spec.to_toml()).map_err(|e| Error::io(&path, e))?;
    outputs.push(path);
    let summary = json!({
        "users": spec.n_users,
        "sessions": generated.sessions.len(),
        "transactions": generated.transactions.len(),
    });
    let timings = BTreeMap::from([("total".to_string(), started.elapsed().as_secs_f64())]);
    let config = serde_json::to_value(&spec).expect("spec serializes");
    write_manifest(out, "synth", config, &[], &outputs, summary, timings)?;
    info!("wrote {} sessions for {} users", generated.sessions.len(), spec.n_users);
    Ok(generated)
}

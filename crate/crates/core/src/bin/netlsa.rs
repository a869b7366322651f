//! `netlsa` command-line interface. Exit codes: 0 success, 1 usage or
//! configuration error, 2 data error.

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

use netlsa::fmt::sig6;
use netlsa::lsa::SvdMethod;
use netlsa::matrix::Metric;
use netlsa::pipeline::{self, PipelineConfig};
use netlsa::weighting::{LogBase, Provenance};

#[derive(Parser)]
#[command(name = "netlsa", version, about = "Topic-model clustering of network users from traffic logs")]
struct Cli {
    /// TOML config, or a previous run manifest to replay.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Log more (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse logs and build the user x domain profile matrix.
    Ingest(Flags),
    /// Weight, decompose, cluster and report.
    Cluster(Flags),
    /// Best inertia for a range of K.
    SweepK(Flags),
    /// Time the pipeline for several truncation ranks.
    BenchM(Flags),
    /// Rewrite report files from a clustered workspace.
    Report(Flags),
    /// Generate a synthetic corpus from a TOML spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, env = "NETLSA_OUT")]
        out: Option<PathBuf>,
        #[arg(long, env = "NETLSA_SEED")]
        seed: Option<u64>,
    },
}

/// Overrides on top of the config file or the defaults.
#[derive(Args, Default)]
struct Flags {
    #[arg(long)]
    sessions: Option<PathBuf>,
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    demographics: Option<PathBuf>,
    #[arg(long)]
    transactions: Option<PathBuf>,
    /// Workspace directory.
    #[arg(long, env = "NETLSA_OUT")]
    out: Option<PathBuf>,
    #[arg(long)]
    delimiter: Option<char>,
    #[arg(long)]
    fail_fast: bool,
    #[arg(long)]
    truncate_registrable: bool,
    /// Session gap in seconds.
    #[arg(long)]
    gap: Option<i64>,
    /// bytes, duration, requests or session_count.
    #[arg(long)]
    metric: Option<Metric>,
    /// tfidf or row_normalized.
    #[arg(long)]
    weighting: Option<Provenance>,
    /// natural or ten.
    #[arg(long)]
    log_base: Option<LogBase>,
    /// Truncation rank.
    #[arg(short = 'm', long)]
    m: Option<usize>,
    /// Cluster on U·Σ instead of U.
    #[arg(long)]
    scale_features: bool,
    /// auto, exact or randomized.
    #[arg(long)]
    svd_method: Option<SvdMethod>,
    #[arg(long)]
    oversampling: Option<usize>,
    #[arg(long)]
    power_iterations: Option<usize>,
    #[arg(short = 'k', long)]
    k: Option<usize>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, env = "NETLSA_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    top_n: Option<usize>,
    /// Comma-separated truncation ranks for bench-m.
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<usize>>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// RFC 3339 start of the spend window.
    #[arg(long)]
    spend_start: Option<DateTime<Utc>>,
    #[arg(long)]
    spend_end: Option<DateTime<Utc>>,
}

macro_rules! apply {
    ($cfg:ident, $flags:ident: $($field:ident => $target:ident),* $(,)?) => {
        $(if let Some(v) = $flags.$field { $cfg.$target = v; })*
    };
}

impl Flags {
    fn apply(self, mut cfg: PipelineConfig) -> PipelineConfig {
        for (src, dst) in [
            (self.sessions, &mut cfg.sessions),
            (self.events, &mut cfg.events),
            (self.demographics, &mut cfg.demographics),
            (self.transactions, &mut cfg.transactions),
        ] {
            if src.is_some() {
                *dst = src;
            }
        }
        cfg.fail_fast |= self.fail_fast;
        cfg.truncate_registrable |= self.truncate_registrable;
        cfg.scale_features |= self.scale_features;
        if self.spend_start.is_some() {
            cfg.spend_start = self.spend_start;
        }
        if self.spend_end.is_some() {
            cfg.spend_end = self.spend_end;
        }
        apply!(cfg, self:
            out => out, delimiter => delimiter, gap => gap_seconds, metric => metric,
            weighting => weighting, log_base => log_base, m => m, svd_method => svd_method,
            oversampling => oversampling, power_iterations => power_iterations, k => k,
            k_min => k_min, k_max => k_max, restarts => restarts, max_iter => max_iter,
            tol => tol, seed => seed, top_n => top_n, m_list => m_list, repetitions => repetitions,
        );
        cfg
    }
}

fn run(cli: Cli) -> netlsa::Result<()> {
    let base = match &cli.config {
        Some(p) => PipelineConfig::from_file(p)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Ingest(f) => {
            let r = pipeline::cmd_ingest(&f.apply(base))?;
            println!(
                "sessions\t{}\nusers\t{}\ndomains\t{}\nnnz\t{}\nrejected_rows\t{}",
                r.sessions,
                r.profile.n_users(),
                r.profile.n_domains(),
                r.profile.values.nnz(),
                r.rejected_rows
            );
        }
        Command::Cluster(f) => {
            let r = pipeline::cmd_cluster(&f.apply(base))?;
            println!("cluster\tsize\tlabel");
            for (c, t) in r.reports.topics.clusters.iter().enumerate() {
                println!("{c}\t{}\t{}", t.size, t.label.as_deref().unwrap_or("-"));
            }
            println!("inertia\t{}", sig6(r.clustering.inertia));
        }
        Command::SweepK(f) => {
            println!("k\tinertia");
            for e in pipeline::cmd_sweep_k(&f.apply(base))? {
                println!("{}\t{}", e.k, sig6(e.inertia));
            }
        }
        Command::BenchM(f) => {
            println!("m\tmin_s\tmedian_s\tmax_s");
            for r in pipeline::cmd_bench_m(&f.apply(base))? {
                println!("{}\t{}\t{}\t{}", r.m, sig6(r.total.min), sig6(r.total.median), sig6(r.total.max));
            }
        }
        Command::Report(f) => {
            let r = pipeline::cmd_report(&f.apply(base))?;
            println!("wrote reports for {} clusters", r.topics.clusters.len());
        }
        Command::Synth { spec, out, seed } => {
            let out = out.unwrap_or(base.out);
            let g = pipeline::cmd_synth(&spec, &out, seed)?;
            println!(
                "users\t{}\nsessions\t{}\nout\t{}",
                g.truth.users.len(),
                g.sessions.len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netlsa: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}

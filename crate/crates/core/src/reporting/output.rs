//! Report files. Every number is written with six significant digits.
//!
//! | file | columns |
//! |------|---------|
//! | `report_topics.tsv` | cluster, size, rank, domain, mean_weight |
//! | `report_topic_matrix.tsv` | cluster, label, then one column per domain of the top-10 union |
//! | `report_gender.tsv` | cluster, male, female, unknown, male_fraction (`all` row last) |
//! | `report_birth_year.tsv` | cluster, year, count, share |
//! | `report_spend.tsv` | cluster, bin_low, bin_high, count (`bin_low = zero` for the zero bin) |
//! | `report_summary.json` | per-cluster size, label, top domains, male fraction, mean spend |

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{BirthYearReport, ClusterTopicReport, GenderReport, SpendReport};
use crate::error::{Error, Result};
use crate::fmt::sig6;

/// Domains per cluster that make up the topic-matrix axis.
pub const TOPIC_MATRIX_TOP: usize = 10;

#[derive(Debug, Clone)]
pub struct Reports {
    pub topics: ClusterTopicReport,
    pub gender: Option<GenderReport>,
    pub birth_years: Option<BirthYearReport>,
    pub spend: Option<SpendReport>,
}

fn round6(x: f64) -> Value {
    sig6(x).parse::<f64>().map(Value::from).unwrap_or(Value::Null)
}

fn write_file(path: &Path, lines: &[String]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    for l in lines {
        writeln!(f, "{l}").map_err(|e| Error::io(path, e))?;
    }
    f.flush().map_err(|e| Error::io(path, e))
}

fn topics_table(t: &ClusterTopicReport) -> Vec<String> {
    let mut lines = vec!["cluster\tsize\trank\tdomain\tmean_weight".to_string()];
    for c in &t.clusters {
        for (rank, d) in c.top.iter().enumerate() {
            lines.push(format!("{}\t{}\t{}\t{}\t{}", c.cluster, c.size, rank + 1, d.domain, sig6(d.weight)));
        }
    }
    lines
}

fn topic_matrix(t: &ClusterTopicReport) -> Vec<String> {
    let axis = t.top_domain_union(TOPIC_MATRIX_TOP);
    let mut lines = vec![format!("cluster\tlabel\t{}", axis.join("\t"))];
    for c in &t.clusters {
        let values: Vec<String> = axis
            .iter()
            .map(|d| sig6(t.mean_weight(c.cluster, d).unwrap_or(0.0)))
            .collect();
        lines.push(format!("{}\t{}\t{}", c.cluster, c.label.as_deref().unwrap_or(""), values.join("\t")));
    }
    lines
}

fn gender_table(g: &GenderReport) -> Vec<String> {
    let row = |name: String, c: &super::GenderCounts| {
        format!(
            "{name}\t{}\t{}\t{}\t{}",
            c.male,
            c.female,
            c.unknown,
            c.male_fraction.map(sig6).unwrap_or_default()
        )
    };
    let mut lines = vec!["cluster\tmale\tfemale\tunknown\tmale_fraction".to_string()];
    lines.extend(g.clusters.iter().enumerate().map(|(k, c)| row(k.to_string(), c)));
    lines.push(row("all".into(), &g.overall));
    lines
}

fn birth_year_table(b: &BirthYearReport) -> Vec<String> {
    let shares = b.normalized();
    let mut lines = vec!["cluster\tyear\tcount\tshare".to_string()];
    for (k, row) in b.counts.iter().enumerate() {
        for (y, &n) in row.iter().enumerate() {
            lines.push(format!("{k}\t{}\t{n}\t{}", b.years[y], sig6(shares[k][y])));
        }
    }
    lines
}

fn spend_table(s: &SpendReport) -> Vec<String> {
    let mut lines = vec!["cluster\tbin_low\tbin_high\tcount".to_string()];
    for (k, c) in s.clusters.iter().enumerate() {
        let h = &c.histogram;
        if h.zero_count > 0 {
            lines.push(format!("{k}\tzero\tzero\t{}", h.zero_count));
        }
        for (b, &n) in h.counts.iter().enumerate() {
            lines.push(format!("{k}\t{}\t{}\t{n}", sig6(h.edges[b]), sig6(h.edges[b + 1])));
        }
    }
    lines
}

fn summary(r: &Reports) -> Value {
    let clusters: Vec<Value> = r
        .topics
        .clusters
        .iter()
        .map(|c| {
            let top: Vec<Value> = c
                .top
                .iter()
                .map(|t| json!({"domain": t.domain, "weight": round6(t.weight)}))
                .collect();
            let mut entry = json!({
                "cluster": c.cluster,
                "size": c.size,
                "label": c.label,
                "top": top,
            });
            if let Some(g) = &r.gender {
                entry["male_fraction"] = g.clusters[c.cluster].male_fraction.map(round6).unwrap_or(Value::Null);
            }
            if let Some(s) = &r.spend {
                entry["mean_spend"] = round6(s.clusters[c.cluster].mean);
            }
            entry
        })
        .collect();
    let mut out = json!({
        "provenance": r.topics.provenance,
        "k": r.topics.clusters.len(),
        "n_users": r.topics.clusters.iter().map(|c| c.size).sum::<usize>(),
        "clusters": clusters,
    });
    if let Some(g) = &r.gender {
        out["overall_male_fraction"] = g.overall.male_fraction.map(round6).unwrap_or(Value::Null);
    }
    out
}

/// Writes every available report into `dir` and returns the written paths.
pub fn write_reports(dir: &Path, r: &Reports) -> Result<Vec<PathBuf>> {
    let mut tables = vec![
        ("report_topics.tsv", topics_table(&r.topics)),
        ("report_topic_matrix.tsv", topic_matrix(&r.topics)),
    ];
    if let Some(g) = &r.gender {
        tables.push(("report_gender.tsv", gender_table(g)));
    }
    if let Some(b) = &r.birth_years {
        tables.push(("report_birth_year.tsv", birth_year_table(b)));
    }
    if let Some(s) = &r.spend {
        tables.push(("report_spend.tsv", spend_table(s)));
    }
    let mut written = Vec::new();
    for (name, lines) in tables {
        let path = dir.join(name);
        write_file(&path, &lines)?;
        written.push(path);
    }
    let path = dir.join("report_summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary(r))? + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

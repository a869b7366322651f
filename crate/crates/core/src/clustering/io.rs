//! Clustering files: `clusters.csv` (`user_id,cluster`), `centroids.txt`
//! (dense matrix) and `clustering.json` (run metadata).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Clustering;
use crate::error::{Error, Result};
use crate::lsa::io::{read_dense, write_dense};
use crate::matrix::Index;

pub const ASSIGNMENTS_FILE: &str = "clusters.csv";
pub const CENTROIDS_FILE: &str = "centroids.txt";
pub const META_FILE: &str = "clustering.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringMeta {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub inertia: f64,
    pub iterations_run: usize,
}

pub fn save(dir: &Path, users: &Index, c: &Clustering) -> Result<()> {
    if users.len() != c.assignments.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} users for {} assignments",
            users.len(),
            c.assignments.len()
        )));
    }
    let path = dir.join(ASSIGNMENTS_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["user_id", "cluster"])?;
    for (i, &a) in c.assignments.iter().enumerate() {
        w.write_record([users.name(i), &a.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(CENTROIDS_FILE);
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_dense(std::io::BufWriter::new(file), &c.centroids, &[("k", c.k.to_string())]).map_err(|e| Error::io(&path, e))?;

    let meta = ClusteringMeta {
        k: c.k,
        seed: c.seed,
        restarts: c.restarts,
        inertia: c.inertia,
        iterations_run: c.iterations_run,
    };
    let path = dir.join(META_FILE);
    std::fs::write(&path, serde_json::to_string_pretty(&meta)? + "\n").map_err(|e| Error::io(&path, e))
}

/// Loads a saved clustering, returning the user ids in row order alongside.
pub fn load(dir: &Path) -> Result<(Vec<String>, Clustering)> {
    let path = dir.join(META_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: ClusteringMeta = serde_json::from_str(&text)?;

    let mut users = Vec::new();
    let mut assignments = Vec::new();
    let mut r = csv::Reader::from_path(dir.join(ASSIGNMENTS_FILE))?;
    for rec in r.records() {
        let rec = rec?;
        let a: usize = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .filter(|a| *a < meta.k)
            .ok_or_else(|| Error::format("cluster assignments", format!("bad cluster in {rec:?}")))?;
        users.push(rec.get(0).unwrap_or("").to_string());
        assignments.push(a);
    }

    let path = dir.join(CENTROIDS_FILE);
    let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let (centroids, _) = read_dense(std::io::BufReader::new(file))?;
    if centroids.nrows() != meta.k {
        return Err(Error::format("centroids", format!("{} rows for k = {}", centroids.nrows(), meta.k)));
    }
    Ok((
        users,
        Clustering {
            k: meta.k,
            assignments,
            centroids,
            inertia: meta.inertia,
            restarts: meta.restarts,
            iterations_run: meta.iterations_run,
            seed: meta.seed,
        },
    ))
}

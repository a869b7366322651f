//! Dense text files for the factor matrices.
//!
//! ```text
//! # key: value     (rank, method, seed, oversampling, power_iterations, checksum)
//! n_rows n_cols
//! x x x ...        (one line per row)
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{LsaModel, SvdMethod};
use crate::error::{Error, Result};

pub const U_FILE: &str = "lsa_U.txt";
pub const SIGMA_FILE: &str = "lsa_sigma.txt";
pub const V_FILE: &str = "lsa_V.txt";

pub fn write_dense<W: Write>(mut w: W, m: &Array2<f64>, header: &[(&str, String)]) -> std::io::Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k}: {v}")?;
    }
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()
}

pub fn read_dense<R: BufRead>(r: R) -> Result<(Array2<f64>, Vec<(String, String)>)> {
    let bad = |msg: String| Error::format("dense matrix file", msg);
    let mut header = Vec::new();
    let mut shape = None;
    let mut data = Vec::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::io("<dense>", e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.split_once(':') {
                header.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        match shape {
            None => {
                let dims: Vec<usize> = line
                    .split_whitespace()
                    .map(|s| s.parse().map_err(|_| bad(format!("bad shape `{line}`"))))
                    .collect::<Result<_>>()?;
                if dims.len() != 2 {
                    return Err(bad(format!("bad shape `{line}`")));
                }
                shape = Some((dims[0], dims[1]));
            }
            Some(_) => {
                for s in line.split_whitespace() {
                    data.push(s.parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")))?);
                }
            }
        }
    }
    let (r, c) = shape.ok_or_else(|| bad("missing shape line".into()))?;
    let m = Array2::from_shape_vec((r, c), data).map_err(|e| bad(e.to_string()))?;
    Ok((m, header))
}

impl LsaModel {
    fn header(&self) -> Vec<(&'static str, String)> {
        vec![
            ("rank", self.rank().to_string()),
            ("method", self.method.as_str().to_string()),
            ("seed", self.seed.to_string()),
            ("oversampling", self.oversampling.to_string()),
            ("power_iterations", self.power_iterations.to_string()),
            ("checksum", self.source_checksum.clone()),
        ]
    }

    /// Writes `lsa_U.txt`, `lsa_sigma.txt` and `lsa_V.txt` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let header = self.header();
        let sigma = self.sigma.clone().insert_axis(ndarray::Axis(1));
        for (name, m) in [(U_FILE, &self.u), (SIGMA_FILE, &sigma), (V_FILE, &self.v)] {
            let path = dir.join(name);
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_dense(std::io::BufWriter::new(file), m, &header).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<LsaModel> {
        let read = |name: &str| -> Result<(Array2<f64>, Vec<(String, String)>)> {
            let path = dir.join(name);
            let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            read_dense(std::io::BufReader::new(file))
        };
        let (u, header) = read(U_FILE)?;
        let (sigma, _) = read(SIGMA_FILE)?;
        let (v, _) = read(V_FILE)?;
        let get = |k: &str| header.iter().find(|(h, _)| h == k).map(|(_, v)| v.as_str()).unwrap_or("");
        let num = |k: &str| get(k).parse::<u64>().map_err(|_| Error::format("lsa model", format!("bad `{k}` header")));
        let model = LsaModel {
            u,
            sigma: Array1::from_iter(sigma.column(0).iter().copied()),
            v,
            method: get("method").parse::<SvdMethod>()?,
            seed: num("seed")?,
            oversampling: num("oversampling")? as usize,
            power_iterations: num("power_iterations")? as usize,
            source_checksum: get("checksum").to_string(),
        };
        if model.u.ncols() != model.rank() || model.v.ncols() != model.rank() {
            return Err(Error::format("lsa model", "factor shapes disagree with sigma"));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn model_round_trip() {
        let model = LsaModel {
            u: array![[0.6, 0.8], [0.8, -0.6]],
            sigma: array![2.5, 1.0 / 3.0],
            v: array![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
            method: SvdMethod::Randomized,
            seed: 17,
            oversampling: 10,
            power_iterations: 2,
            source_checksum: "abc".into(),
        };
        let dir = tempfile::tempdir().unwrap();
        model.save(dir.path()).unwrap();
        assert_eq!(LsaModel::load(dir.path()).unwrap(), model);
    }
}

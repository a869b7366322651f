//! Sparse triplet text format.
//!
//! ```text
//! # key: value          (optional header comments)
//! n_rows n_cols nnz
//! i j value             (one line per stored entry, 0-based)
//! ```
//!
//! Values are printed in shortest round-trip form, so a write/read cycle is
//! exact. Index maps are stored separately as two-column CSV (`row,user_id`
//! or `col,domain`).

use std::io::{BufRead, Write};

use super::{CsrMatrix, Index};
use crate::error::{Error, Result};

pub fn write_triplets<W: Write>(mut w: W, m: &CsrMatrix, header: &[(&str, String)]) -> std::io::Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k}: {v}")?;
    }
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(w, "{i} {j} {v:?}")?;
    }
    w.flush()
}

/// Reads a triplet file, returning the matrix and its `# key: value` header
/// entries in file order.
pub fn read_triplets<R: BufRead>(r: R) -> Result<(CsrMatrix, Vec<(String, String)>)> {
    let bad = |msg: String| Error::format("triplet file", msg);
    let mut header = Vec::new();
    let mut shape: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<triplets>", e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if shape.is_none() {
                if let Some((k, v)) = comment.split_once(':') {
                    header.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad(format!("line {}: expected 3 fields", lineno + 1)));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("line {}: `{s}` is not an index", lineno + 1)));
        match shape {
            None => shape = Some((int(fields[0])?, int(fields[1])?, int(fields[2])?)),
            Some(_) => {
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|_| bad(format!("line {}: `{}` is not a number", lineno + 1, fields[2])))?;
                entries.push((int(fields[0])?, int(fields[1])?, v));
            }
        }
    }
    let (n_rows, n_cols, nnz) = shape.ok_or_else(|| bad("missing shape line".into()))?;
    if entries.len() != nnz {
        return Err(bad(format!("header declares {nnz} entries, found {}", entries.len())));
    }
    Ok((CsrMatrix::from_triplets(n_rows, n_cols, entries)?, header))
}

pub fn write_index<W: Write>(w: W, index: &Index, position: &str, key: &str) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([position, key])?;
    for (i, name) in index.names().iter().enumerate() {
        out.write_record([i.to_string().as_str(), name])?;
    }
    out.flush().map_err(|e| Error::io("<index>", e))
}

pub fn read_index<R: std::io::Read>(r: R) -> Result<Index> {
    let mut reader = csv::Reader::from_reader(r);
    let mut names = Vec::new();
    for (expected, rec) in reader.records().enumerate() {
        let rec = rec?;
        let pos: usize = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("index file", format!("row {}: bad position", expected + 1)))?;
        if pos != expected {
            return Err(Error::format("index file", format!("positions must run 0..n, found {pos} at {expected}")));
        }
        names.push(rec.get(1).unwrap_or("").to_string());
    }
    Index::from_names(names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn triplets_round_trip(entries in proptest::collection::vec((0usize..6, 0usize..5, -1e6f64..1e6), 0..30)) {
            let m = CsrMatrix::from_triplets(6, 5, entries).unwrap();
            let mut buf = Vec::new();
            write_triplets(&mut buf, &m, &[("provenance", "tfidf".into())]).unwrap();
            let (back, header) = read_triplets(buf.as_slice()).unwrap();
            prop_assert_eq!(back, m);
            prop_assert_eq!(header, vec![("provenance".to_string(), "tfidf".to_string())]);
        }
    }

    #[test]
    fn rejects_count_mismatch() {
        assert!(read_triplets("2 2 2\n0 0 1.0\n".as_bytes()).is_err());
        assert!(read_triplets("".as_bytes()).is_err());
    }

    #[test]
    fn index_round_trip() {
        let idx = Index::from_names(vec!["b".into(), "a,c".into()]).unwrap();
        let mut buf = Vec::new();
        write_index(&mut buf, &idx, "row", "user_id").unwrap();
        assert_eq!(read_index(buf.as_slice()).unwrap(), idx);
    }
}

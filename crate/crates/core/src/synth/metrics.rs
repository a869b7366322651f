//! Partition agreement scores for checking recovery against planted labels.

use std::collections::HashMap;

use crate::error::{Error, Result};

fn pairs(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

fn contingency(a: &[usize], b: &[usize]) -> Result<(HashMap<(usize, usize), usize>, HashMap<usize, usize>, HashMap<usize, usize>)> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("partitions of length {} and {}", a.len(), b.len())));
    }
    let mut cells = HashMap::new();
    let mut rows = HashMap::new();
    let mut cols = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    Ok((cells, rows, cols))
}

/// Adjusted Rand index of two labelings of the same items. Returns 1.0 when
/// the chance-corrected denominator vanishes (both partitions trivial).
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    let (cells, rows, cols) = contingency(a, b)?;
    let index: f64 = cells.values().map(|&n| pairs(n)).sum();
    let row_pairs: f64 = rows.values().map(|&n| pairs(n)).sum();
    let col_pairs: f64 = cols.values().map(|&n| pairs(n)).sum();
    let total = pairs(a.len());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = row_pairs * col_pairs / total;
    let max = 0.5 * (row_pairs + col_pairs);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Fraction of items whose cluster's majority class is their own class.
pub fn purity(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    let (cells, _, _) = contingency(predicted, truth)?;
    if predicted.is_empty() {
        return Err(Error::InvalidArgument("purity of an empty partition".into()));
    }
    let mut best: HashMap<usize, usize> = HashMap::new();
    for (&(cluster, _), &n) in &cells {
        let e = best.entry(cluster).or_insert(0);
        *e = (*e).max(n);
    }
    Ok(best.values().sum::<usize>() as f64 / predicted.len() as f64)
}

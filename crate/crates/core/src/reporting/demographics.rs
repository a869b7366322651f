use std::collections::HashMap;

use chrono::{DateTime, Utc};
use serde::Serialize;

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::histogram::{BinSpec, Histogram};
use crate::ingest::{DemographicRecord, Gender, TransactionRecord};

fn check_users(users: &[String], c: &Clustering) -> Result<()> {
    if users.len() == c.assignments.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{} user ids for {} assignments",
            users.len(),
            c.assignments.len()
        )))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GenderCounts {
    pub male: usize,
    pub female: usize,
    /// Users with unknown gender or no demographic record.
    pub unknown: usize,
    /// `male / (male + female)`; `None` when nobody's gender is known.
    pub male_fraction: Option<f64>,
}

impl GenderCounts {
    fn add(&mut self, g: Gender) {
        match g {
            Gender::Male => self.male += 1,
            Gender::Female => self.female += 1,
            Gender::Unknown => self.unknown += 1,
        }
    }

    fn finish(mut self) -> Self {
        let known = self.male + self.female;
        self.male_fraction = (known > 0).then(|| self.male as f64 / known as f64);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenderReport {
    pub clusters: Vec<GenderCounts>,
    pub overall: GenderCounts,
}

/// Male share per cluster over users of known gender. `users[i]` is the id
/// of clustered point `i`.
pub fn gender_breakdown(c: &Clustering, users: &[String], demo: &[DemographicRecord]) -> Result<GenderReport> {
    check_users(users, c)?;
    let by_user: HashMap<&str, Gender> = demo.iter().map(|d| (d.user_id.as_str(), d.gender)).collect();
    let mut clusters = vec![GenderCounts::default(); c.k];
    let mut overall = GenderCounts::default();
    for (user, &a) in users.iter().zip(&c.assignments) {
        let g = by_user.get(user.as_str()).copied().unwrap_or(Gender::Unknown);
        clusters[a].add(g);
        overall.add(g);
    }
    Ok(GenderReport {
        clusters: clusters.into_iter().map(GenderCounts::finish).collect(),
        overall: overall.finish(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirthYearReport {
    /// Contiguous year axis covering every recorded birth year.
    pub years: Vec<i32>,
    /// `counts[cluster][year index]`.
    pub counts: Vec<Vec<usize>>,
    /// Members without a birth year, per cluster.
    pub missing: Vec<usize>,
}

impl BirthYearReport {
    /// Each cluster's row divided by its total; empty rows stay zero.
    pub fn normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                row.iter()
                    .map(|&n| if total == 0 { 0.0 } else { n as f64 / total as f64 })
                    .collect()
            })
            .collect()
    }
}

pub fn birth_year_distribution(c: &Clustering, users: &[String], demo: &[DemographicRecord]) -> Result<BirthYearReport> {
    check_users(users, c)?;
    let by_user: HashMap<&str, Option<i32>> = demo.iter().map(|d| (d.user_id.as_str(), d.birth_year)).collect();
    let years: Vec<Option<i32>> = users.iter().map(|u| by_user.get(u.as_str()).copied().flatten()).collect();
    let (lo, hi) = years
        .iter()
        .flatten()
        .fold((i32::MAX, i32::MIN), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    let axis: Vec<i32> = if lo > hi { Vec::new() } else { (lo..=hi).collect() };
    let mut counts = vec![vec![0; axis.len()]; c.k];
    let mut missing = vec![0; c.k];
    for (y, &a) in years.iter().zip(&c.assignments) {
        match y {
            Some(y) => counts[a][(y - lo) as usize] += 1,
            None => missing[a] += 1,
        }
    }
    Ok(BirthYearReport {
        years: axis,
        counts,
        missing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSpend {
    pub size: usize,
    pub mean: f64,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpendReport {
    pub clusters: Vec<ClusterSpend>,
}

/// Total spend per user over the optional `[start, end)` window, summarized
/// per cluster on one shared set of bins. Users without transactions count
/// as zero spend.
pub fn spend_distribution(
    c: &Clustering,
    users: &[String],
    tx: &[TransactionRecord],
    bins: &BinSpec,
    window: Option<(DateTime<Utc>, DateTime<Utc>)>,
) -> Result<SpendReport> {
    check_users(users, c)?;
    let row: HashMap<&str, usize> = users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let mut totals = vec![0.0; users.len()];
    for t in tx {
        if let Some((start, end)) = window {
            if t.timestamp < start || t.timestamp >= end {
                continue;
            }
        }
        if let Some(&i) = row.get(t.user_id.as_str()) {
            totals[i] += t.amount;
        }
    }
    let shared = bins.resolve(&totals)?;
    let clusters = c
        .members()
        .into_iter()
        .map(|members| {
            let values: Vec<f64> = members.iter().map(|&i| totals[i]).collect();
            let mean = if values.is_empty() {
                0.0
            } else {
                values.iter().sum::<f64>() / values.len() as f64
            };
            ClusterSpend {
                size: members.len(),
                mean,
                histogram: shared.count(&values),
            }
        })
        .collect();
    Ok(SpendReport { clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use ndarray::Array2;

    fn clustering(assignments: Vec<usize>, k: usize) -> Clustering {
        Clustering {
            k,
            assignments,
            centroids: Array2::zeros((k, 1)),
            inertia: 0.0,
            restarts: 1,
            iterations_run: 1,
            seed: 0,
        }
    }

    fn person(id: &str, gender: Gender, birth_year: Option<i32>) -> DemographicRecord {
        DemographicRecord {
            user_id: id.into(),
            gender,
            birth_year,
            enrol_year: None,
            degree_type: None,
        }
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("u{i}")).collect()
    }

    #[test]
    fn gender_fractions() {
        use Gender::*;
        let demo = vec![
            person("u0", Male, None),
            person("u1", Male, None),
            person("u2", Female, None),
            person("u3", Female, None),
            person("u4", Male, None),
            person("u5", Male, None),
            person("u6", Male, None),
            person("u7", Unknown, None),
        ];
        // u8 has no record at all
        let c = clustering(vec![0, 0, 0, 0, 1, 1, 1, 2, 2], 3);
        let r = gender_breakdown(&c, &ids(9), &demo).unwrap();
        assert_eq!(r.clusters[0].male_fraction, Some(0.5));
        assert_eq!(r.clusters[1].male_fraction, Some(1.0));
        assert_eq!(r.clusters[2].male_fraction, None);
        assert_eq!(r.clusters[2].unknown, 2);
        assert_eq!(r.overall.male_fraction, Some(5.0 / 7.0));
    }

    #[test]
    fn birth_years() {
        let demo = vec![
            person("u0", Gender::Male, Some(1995)),
            person("u1", Gender::Male, Some(1995)),
            person("u2", Gender::Male, Some(1995)),
            person("u3", Gender::Male, None),
        ];
        let c = clustering(vec![0, 0, 0, 0], 1);
        let r = birth_year_distribution(&c, &ids(4), &demo).unwrap();
        assert_eq!(r.years, vec![1995]);
        assert_eq!(r.counts, vec![vec![3]]);
        assert_eq!(r.missing, vec![1]);
        assert_eq!(r.normalized(), vec![vec![1.0]]);
    }

    #[test]
    fn birth_year_rows_normalize() {
        let demo = vec![
            person("u0", Gender::Male, Some(1990)),
            person("u1", Gender::Male, Some(1993)),
            person("u2", Gender::Male, Some(1993)),
        ];
        let c = clustering(vec![0, 1, 0], 3);
        let r = birth_year_distribution(&c, &ids(3), &demo).unwrap();
        assert_eq!(r.years, vec![1990, 1991, 1992, 1993]);
        let n = r.normalized();
        assert!((n[0].iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((n[1].iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(n[2].iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn spend() {
        let t = |user: &str, amount: f64| TransactionRecord {
            user_id: user.into(),
            timestamp: Utc.with_ymd_and_hms(2014, 10, 1, 12, 0, 0).unwrap(),
            amount,
        };
        let tx = vec![t("u0", 10.0), t("u0", 15.0), t("u1", 5.0), t("stranger", 99.0)];
        let c = clustering(vec![0, 0, 1], 3);
        let r = spend_distribution(&c, &ids(3), &tx, &BinSpec::Linear { bins: 5 }, None).unwrap();
        assert_eq!(r.clusters[0].mean, 15.0);
        assert_eq!(r.clusters[1].mean, 0.0);
        assert_eq!(r.clusters[2].mean, 0.0);
        for (cl, size) in r.clusters.iter().zip([2, 1, 0]) {
            assert_eq!(cl.histogram.total(), size);
        }
        // the 25 total lands in the top bin
        assert_eq!(*r.clusters[0].histogram.counts.last().unwrap(), 1);

        let window = Some((
            Utc.with_ymd_and_hms(2015, 1, 1, 0, 0, 0).unwrap(),
            Utc.with_ymd_and_hms(2015, 2, 1, 0, 0, 0).unwrap(),
        ));
        let r = spend_distribution(&c, &ids(3), &tx, &BinSpec::LogDecades, window).unwrap();
        assert_eq!(r.clusters[0].mean, 0.0);
        assert_eq!(r.clusters[0].histogram.zero_count, 2);
    }
}

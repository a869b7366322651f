//! Synthetic session corpora with planted topic structure.
//!
//! Each user holds a distribution over topics and each topic a distribution
//! over domains. A session draws a topic, then a domain, then a log-normal
//! byte count. The planted labels are returned next to the sessions so that
//! cluster recovery can be scored with [`adjusted_rand_index`].

mod metrics;
mod spec;

use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, LogNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{
    write_demographics, write_sessions, write_transactions, DemographicRecord, Gender, SessionRecord,
    TransactionRecord,
};

pub use metrics::{adjusted_rand_index, purity};
pub use spec::{ByteModel, SessionCount, SynthSpec, TopicWords, UniversalDomain, UserTopics};

pub const SESSIONS_FILE: &str = "sessions.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const DEMOGRAPHICS_FILE: &str = "demographics.csv";
pub const TRANSACTIONS_FILE: &str = "transactions.csv";

const LOCATIONS: [&str; 4] = ["dorm", "library", "teaching", "canteen"];
const SESSION_SPACING: i64 = 1800;

/// Planted labels, in user order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub users: Vec<String>,
    /// Highest-weight topic per user, lowest index on ties.
    pub dominant: Vec<usize>,
    pub distributions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub sessions: Vec<SessionRecord>,
    pub truth: GroundTruth,
    pub demographics: Vec<DemographicRecord>,
    pub transactions: Vec<TransactionRecord>,
}

struct UserDraw {
    sessions: Vec<SessionRecord>,
    distribution: Vec<f64>,
    dominant: usize,
    demographic: Option<DemographicRecord>,
    transactions: Vec<TransactionRecord>,
}

fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2014, 9, 1, 0, 0, 0).unwrap()
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (t, &w) in p.iter().enumerate() {
        if w > p[best] {
            best = t;
        }
    }
    best
}

fn topic_mixture(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let t_count = spec.n_topics;
    match &spec.user_topics {
        UserTopics::Hard => {
            let mut p = vec![0.0; t_count];
            p[rng.random_range(0..t_count)] = 1.0;
            p
        }
        UserTopics::Mixed { alpha } => {
            let gamma = Gamma::new(*alpha, 1.0).expect("validated alpha");
            let mut p: Vec<f64> = (0..t_count).map(|_| gamma.sample(rng)).collect();
            let s: f64 = p.iter().sum();
            if s > 0.0 {
                p.iter_mut().for_each(|x| *x /= s);
            } else {
                // all draws underflowed at tiny alpha
                p[rng.random_range(0..t_count)] = 1.0;
            }
            p
        }
        UserTopics::Fixed { weights } => weights.clone(),
    }
}

fn draw_user(
    spec: &SynthSpec,
    i: usize,
    user: &str,
    domains: &[String],
    topics: &[WeightedIndex<f64>],
) -> UserDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(i as u64 + 1);
    let distribution = topic_mixture(spec, &mut rng);
    let dominant = argmax(&distribution);
    let pick_topic = WeightedIndex::new(&distribution).expect("validated mixture");
    let bytes = LogNormal::new(spec.bytes.median.ln(), spec.bytes.sigma).expect("validated byte model");
    let n = rng.random_range(spec.sessions_per_user.min..=spec.sessions_per_user.max);
    let base = epoch();

    let mut saw_universal = false;
    let mut sessions = Vec::with_capacity(n);
    for s in 0..n {
        let (domain, class) = match &spec.universal_domain {
            Some(u) if rng.random::<f64>() < u.share => {
                saw_universal = true;
                (u.name.clone(), "portal".to_string())
            }
            _ => {
                let t = pick_topic.sample(&mut rng);
                (domains[topics[t].sample(&mut rng)].clone(), format!("topic{t}"))
            }
        };
        let start = base + Duration::seconds(s as i64 * SESSION_SPACING + rng.random_range(0..600));
        sessions.push(SessionRecord {
            user_id: user.to_string(),
            start_time: start,
            duration: rng.random_range(1..600),
            location: LOCATIONS[rng.random_range(0..LOCATIONS.len())].to_string(),
            domain,
            isp: Some("campus".into()),
            http_requests: rng.random_range(1..=50),
            service_class: Some(class),
            bytes: (bytes.sample(&mut rng).round() as u64).max(1),
        });
    }
    if let (Some(u), false) = (&spec.universal_domain, saw_universal) {
        sessions[0].domain = u.name.clone();
        sessions[0].service_class = Some("portal".into());
    }

    let (demographic, transactions) = if spec.demographics {
        let male = [0.3, 0.5, 0.8][dominant % 3];
        let gender = match rng.random::<f64>() {
            x if x < 0.03 => Gender::Unknown,
            x if x < male => Gender::Male,
            _ => Gender::Female,
        };
        let birth_year = 1990 + (dominant % 4) as i32 + rng.random_range(0..3);
        let demographic = DemographicRecord {
            user_id: user.to_string(),
            gender,
            birth_year: Some(birth_year),
            enrol_year: Some(birth_year + 18),
            degree_type: Some(if dominant % 2 == 0 { "undergraduate" } else { "graduate" }.into()),
        };
        let spend = LogNormal::new((6.0 + 2.0 * (dominant % 3) as f64).ln(), 0.6).expect("constant parameters");
        let count = rng.random_range(5..30);
        let transactions = (0..count)
            .map(|_| TransactionRecord {
                user_id: user.to_string(),
                timestamp: base + Duration::seconds(rng.random_range(0..120 * 86_400)),
                amount: (spend.sample(&mut rng) * 100.0).round() / 100.0,
            })
            .collect();
        (Some(demographic), transactions)
    } else {
        (None, Vec::new())
    };

    UserDraw {
        sessions,
        distribution,
        dominant,
        demographic,
        transactions,
    }
}

/// Draws a corpus. The result depends only on `spec`, including `spec.seed`.
pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let topic_word = spec.topic_word()?;
    let topics: Vec<WeightedIndex<f64>> = topic_word
        .iter()
        .map(|row| WeightedIndex::new(row).map_err(|e| Error::Spec(e.to_string())))
        .collect::<Result<_>>()?;
    let domains: Vec<String> = (0..spec.n_domains).map(|j| spec.domain_name(j)).collect();
    let width = spec.n_users.saturating_sub(1).to_string().len().max(4);
    let users: Vec<String> = (0..spec.n_users).map(|i| format!("u{i:0width$}")).collect();

    let draws: Vec<UserDraw> = users
        .par_iter()
        .enumerate()
        .map(|(i, u)| draw_user(spec, i, u, &domains, &topics))
        .collect();

    let mut out = SynthOutput {
        sessions: Vec::new(),
        truth: GroundTruth {
            users,
            dominant: Vec::with_capacity(spec.n_users),
            distributions: Vec::with_capacity(spec.n_users),
        },
        demographics: Vec::new(),
        transactions: Vec::new(),
    };
    for d in draws {
        out.sessions.extend(d.sessions);
        out.truth.dominant.push(d.dominant);
        out.truth.distributions.push(d.distribution);
        out.demographics.extend(d.demographic);
        out.transactions.extend(d.transactions);
    }
    Ok(out)
}

/// Writes the corpus as CSV files into `dir` and returns their paths.
pub fn write_output(dir: &Path, out: &SynthOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let create = |name: &str| -> Result<(PathBuf, std::io::BufWriter<std::fs::File>)> {
        let path = dir.join(name);
        let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok((path, std::io::BufWriter::new(f)))
    };
    let mut written = Vec::new();

    let (path, w) = create(SESSIONS_FILE)?;
    write_sessions(w, b',', &out.sessions)?;
    written.push(path);

    let (path, w) = create(TRUTH_FILE)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["user_id", "topic"])?;
    for (u, t) in out.truth.users.iter().zip(&out.truth.dominant) {
        csv.write_record([u.as_str(), &t.to_string()])?;
    }
    csv.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    if !out.demographics.is_empty() {
        let (path, w) = create(DEMOGRAPHICS_FILE)?;
        write_demographics(w, b',', &out.demographics)?;
        written.push(path);
        let (path, w) = create(TRANSACTIONS_FILE)?;
        write_transactions(w, b',', &out.transactions)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a `user_id,topic` file written by [`write_output`].
pub fn read_truth(path: &Path) -> Result<Vec<(String, usize)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec?;
        let topic = rec
            .get(1)
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| Error::Row {
                line: (n + 2) as u64,
                message: "expected user_id,topic".into(),
            })?;
        rows.push((rec.get(0).unwrap_or_default().to_string(), topic));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn small(seed: u64) -> SynthSpec {
        SynthSpec {
            n_topics: 3,
            n_domains: 30,
            n_users: 40,
            sessions_per_user: SessionCount { min: 5, max: 12 },
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let a = generate(&small(11)).unwrap();
        let b = generate(&small(11)).unwrap();
        assert_eq!(a.sessions, b.sessions);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.transactions, b.transactions);
        let c = generate(&small(12)).unwrap();
        assert_ne!(a.sessions, c.sessions);
    }

    #[test]
    fn single_topic_frequencies_follow_topic_row() {
        let spec = SynthSpec {
            n_topics: 1,
            n_domains: 5,
            n_users: 100,
            sessions_per_user: SessionCount { min: 1000, max: 1000 },
            topic_words: TopicWords::Explicit {
                rows: vec![vec![0.4, 0.3, 0.15, 0.1, 0.05]],
            },
            demographics: false,
            seed: 3,
            ..Default::default()
        };
        let out = generate(&spec).unwrap();
        assert_eq!(out.sessions.len(), 100_000);
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for s in &out.sessions {
            *counts.entry(s.domain.as_str()).or_default() += 1;
        }
        for (j, p) in [0.4, 0.3, 0.15, 0.1, 0.05].iter().enumerate() {
            let f = counts[spec.domain_name(j).as_str()] as f64 / 1e5;
            assert!((f - p).abs() < 0.01, "domain {j}: {f} vs {p}");
        }
    }

    #[test]
    fn fixed_mixture_frequencies() {
        let spec = SynthSpec {
            n_topics: 2,
            n_domains: 2,
            n_users: 50,
            sessions_per_user: SessionCount { min: 2000, max: 2000 },
            topic_words: TopicWords::Explicit {
                rows: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            },
            user_topics: UserTopics::Fixed { weights: vec![0.5, 0.5] },
            demographics: false,
            seed: 5,
            ..Default::default()
        };
        let out = generate(&spec).unwrap();
        let first = out.sessions.iter().filter(|s| s.domain == spec.domain_name(0)).count();
        let f = first as f64 / out.sessions.len() as f64;
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }

    #[test]
    fn dirichlet_mixtures_are_distributions() {
        let spec = SynthSpec {
            user_topics: UserTopics::Mixed { alpha: 0.3 },
            ..small(2)
        };
        let out = generate(&spec).unwrap();
        for (p, &d) in out.truth.distributions.iter().zip(&out.truth.dominant) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(d, argmax(p));
        }
    }

    #[test]
    fn universal_domain_reaches_every_user() {
        let spec = SynthSpec {
            universal_domain: Some(UniversalDomain::default()),
            sessions_per_user: SessionCount { min: 1, max: 2 },
            ..small(4)
        };
        let out = generate(&spec).unwrap();
        for u in &out.truth.users {
            assert!(out.sessions.iter().any(|s| &s.user_id == u && s.domain == "portal.com"), "{u}");
        }
    }

    #[test]
    fn hard_topics_stay_in_their_block() {
        let spec = small(9);
        let out = generate(&spec).unwrap();
        let tw = spec.topic_word().unwrap();
        let by_user: HashMap<&str, usize> = out
            .truth
            .users
            .iter()
            .map(String::as_str)
            .zip(out.truth.dominant.iter().copied())
            .collect();
        for s in &out.sessions {
            let j: usize = s.domain[4..s.domain.len() - 4].parse().unwrap();
            assert!(tw[by_user[s.user_id.as_str()]][j] > 0.0);
        }
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = generate(&small(1)).unwrap();
        let paths = write_output(dir.path(), &out).unwrap();
        assert_eq!(paths.len(), 4);
        let truth = read_truth(&dir.path().join(TRUTH_FILE)).unwrap();
        assert_eq!(truth.len(), 40);
        assert_eq!(truth[3], (out.truth.users[3].clone(), out.truth.dominant[3]));
        let text = std::fs::read_to_string(dir.path().join(SESSIONS_FILE)).unwrap();
        let parsed = crate::ingest::parse_sessions(text.as_bytes(), &Default::default()).unwrap();
        assert_eq!(parsed.records, out.sessions);
    }
}

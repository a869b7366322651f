use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How each topic spreads over domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopicWords {
    /// Domains split into one contiguous block per topic. Each topic also
    /// borrows the first `overlap` fraction of the next topic's block.
    /// Weights follow a 1/rank law over a seeded shuffle of the support.
    Blocks { overlap: f64 },
    /// Explicit `n_topics × n_domains` row-stochastic matrix.
    Explicit { rows: Vec<Vec<f64>> },
}

impl Default for TopicWords {
    fn default() -> Self {
        TopicWords::Blocks { overlap: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UserTopics {
    /// One topic per user, drawn uniformly.
    #[default]
    Hard,
    /// Per-user mixture drawn from a symmetric Dirichlet.
    Mixed { alpha: f64 },
    /// The same mixture for every user.
    Fixed { weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionCount {
    pub min: usize,
    pub max: usize,
}

impl Default for SessionCount {
    fn default() -> Self {
        Self { min: 50, max: 150 }
    }
}

/// Log-normal bytes per session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ByteModel {
    pub median: f64,
    /// Standard deviation of `ln(bytes)`.
    pub sigma: f64,
}

impl Default for ByteModel {
    fn default() -> Self {
        Self {
            median: 1e4,
            sigma: 1.5,
        }
    }
}

/// A domain injected into every user's traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalDomain {
    #[serde(default = "UniversalDomain::default_name")]
    pub name: String,
    /// Fraction of sessions sent to this domain.
    #[serde(default = "UniversalDomain::default_share")]
    pub share: f64,
}

impl UniversalDomain {
    fn default_name() -> String {
        "portal.com".into()
    }

    fn default_share() -> f64 {
        0.3
    }
}

impl Default for UniversalDomain {
    fn default() -> Self {
        Self {
            name: Self::default_name(),
            share: Self::default_share(),
        }
    }
}

/// Parameters of a synthetic corpus. Readable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n_topics: usize,
    pub n_domains: usize,
    pub n_users: usize,
    #[serde(default)]
    pub topic_words: TopicWords,
    #[serde(default)]
    pub user_topics: UserTopics,
    #[serde(default)]
    pub sessions_per_user: SessionCount,
    #[serde(default)]
    pub bytes: ByteModel,
    #[serde(default)]
    pub universal_domain: Option<UniversalDomain>,
    /// Also emit demographic and campus-card fixtures.
    #[serde(default = "default_true")]
    pub demographics: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_topics: 8,
            n_domains: 300,
            n_users: 2000,
            topic_words: TopicWords::default(),
            user_topics: UserTopics::default(),
            sessions_per_user: SessionCount::default(),
            bytes: ByteModel::default(),
            universal_domain: None,
            demographics: true,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SynthSpec = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("spec serializes")
    }

    pub fn domain_name(&self, j: usize) -> String {
        let width = self.n_domains.saturating_sub(1).to_string().len().max(3);
        format!("site{j:0width$}.com")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Spec(m));
        if self.n_topics == 0 || self.n_users == 0 || self.n_domains == 0 {
            return fail("n_topics, n_domains and n_users must be positive".into());
        }
        if self.sessions_per_user.min == 0 || self.sessions_per_user.min > self.sessions_per_user.max {
            return fail("sessions_per_user needs 1 <= min <= max".into());
        }
        if !(self.bytes.median > 0.0) || !(self.bytes.sigma >= 0.0) || !self.bytes.median.is_finite() {
            return fail("bytes needs median > 0 and sigma >= 0".into());
        }
        if let Some(u) = &self.universal_domain {
            if !(u.share > 0.0 && u.share < 1.0) {
                return fail(format!("universal domain share must be in (0, 1), got {}", u.share));
            }
            if (0..self.n_domains).any(|j| self.domain_name(j) == u.name) {
                return fail(format!("universal domain `{}` collides with a topic domain", u.name));
            }
        }
        match &self.user_topics {
            UserTopics::Hard => {}
            UserTopics::Mixed { alpha } => {
                if !(*alpha > 0.0) {
                    return fail("Dirichlet alpha must be positive".into());
                }
            }
            UserTopics::Fixed { weights } => {
                if weights.len() != self.n_topics || weights.iter().any(|w| !(*w >= 0.0)) {
                    return fail("fixed topic weights need one non-negative value per topic".into());
                }
                if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return fail("fixed topic weights must sum to 1".into());
                }
            }
        }
        if let TopicWords::Blocks { overlap } = self.topic_words {
            if !(0.0..=1.0).contains(&overlap) {
                return fail(format!("overlap must be in [0, 1], got {overlap}"));
            }
            if self.n_domains < self.n_topics {
                return fail("need at least one domain per topic".into());
            }
        }
        self.topic_word().map(|_| ())
    }

    /// Row-stochastic `n_topics × n_domains` matrix of domain probabilities.
    pub fn topic_word(&self) -> Result<Vec<Vec<f64>>> {
        match &self.topic_words {
            TopicWords::Explicit { rows } => {
                if rows.len() != self.n_topics || rows.iter().any(|r| r.len() != self.n_domains) {
                    return Err(Error::Spec(format!("topic_words must be {}x{}", self.n_topics, self.n_domains)));
                }
                for (t, r) in rows.iter().enumerate() {
                    if r.iter().any(|p| !(*p >= 0.0)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                        return Err(Error::Spec(format!("topic {t} is not a probability distribution")));
                    }
                }
                Ok(rows.clone())
            }
            TopicWords::Blocks { overlap } => Ok(self.block_topics(*overlap)),
        }
    }

    fn block_topics(&self, overlap: f64) -> Vec<Vec<f64>> {
        let (t_count, w) = (self.n_topics, self.n_domains);
        let base = w / t_count;
        let extra = w % t_count;
        let mut starts = Vec::with_capacity(t_count + 1);
        starts.push(0);
        for t in 0..t_count {
            starts.push(starts[t] + base + usize::from(t < extra));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x746f_7069_6373);
        (0..t_count)
            .map(|t| {
                let mut support: Vec<usize> = (starts[t]..starts[t + 1]).collect();
                if t_count > 1 {
                    let next = (t + 1) % t_count;
                    let len = starts[next + 1] - starts[next];
                    let borrow = ((overlap * len as f64).ceil() as usize).min(len);
                    support.extend(starts[next]..starts[next] + borrow);
                }
                support.shuffle(&mut rng);
                let mut row = vec![0.0; w];
                let norm: f64 = (1..=support.len()).map(|r| 1.0 / r as f64).sum();
                for (r, &j) in support.iter().enumerate() {
                    row[j] = 1.0 / ((r + 1) as f64 * norm);
                }
                row
            })
            .collect()
    }
}

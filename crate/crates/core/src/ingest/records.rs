use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// One aggregated network session of one user on one domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub user_id: String,
    pub start_time: DateTime<Utc>,
    /// Seconds.
    pub duration: u64,
    pub location: String,
    pub domain: String,
    pub isp: Option<String>,
    pub http_requests: u64,
    pub service_class: Option<String>,
    pub bytes: u64,
}

impl SessionRecord {
    pub fn end_time(&self) -> DateTime<Utc> {
        self.start_time + chrono::Duration::seconds(self.duration as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub fn parse(s: &str) -> Option<Gender> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Some(Gender::Male),
            "female" | "f" => Some(Gender::Female),
            "" | "unknown" | "u" | "na" => Some(Gender::Unknown),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemographicRecord {
    pub user_id: String,
    pub gender: Gender,
    pub birth_year: Option<i32>,
    pub enrol_year: Option<i32>,
    pub degree_type: Option<String>,
}

/// One campus-card purchase. `amount` is in RMB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransactionRecord {
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub amount: f64,
}

/// Un-sessionized traffic event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEvent {
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub domain: String,
    pub bytes: u64,
    pub http_requests: u64,
}

//! Behaviour profiling and clustering of wireless network users.
//!
//! Users are treated as documents over a vocabulary of visited domains. The
//! pipeline aggregates session logs into a users×domains activity matrix,
//! applies logarithmic TF-IDF weighting, extracts latent topics with a
//! truncated SVD and clusters users with K-means++. Cluster reports join the
//! result with demographic and campus-card transaction data.
//!
//! ```no_run
//! use netlsa::{ingest, weighting, lsa, clustering};
//!
//! let file = std::fs::File::open("sessions.csv")?;
//! let parsed = ingest::parse_sessions(file, &ingest::ParseOptions::default())?;
//! let profile = ingest::build_profile_matrix(&parsed.records, &ingest::ProfileOptions::default());
//! let features = weighting::tfidf(&profile, weighting::LogBase::Natural);
//! let model = lsa::truncated_svd(&features, 80, &lsa::SvdOptions::default())?.canonicalize_signs();
//! let points = model.user_features(false);
//! let result = clustering::kmeans(points.view(), 8, &clustering::KMeansOptions::default())?;
//! println!("inertia {}", result.inertia);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod clustering;
pub mod error;
pub mod fmt;
pub mod histogram;
pub mod ingest;
pub mod lsa;
pub mod matrix;
pub mod pipeline;
pub mod reporting;
pub mod synth;
pub mod weighting;

pub use error::{Error, Result};

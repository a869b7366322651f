//! Cluster reports: topic labels from mean feature weights, and demographic
//! and spending breakdowns per cluster. All outputs are plot-ready tables.

mod demographics;
pub mod output;
mod topics;

pub use demographics::{
    birth_year_distribution, gender_breakdown, spend_distribution, BirthYearReport, ClusterSpend, GenderCounts,
    GenderReport, SpendReport,
};
pub use output::{write_reports, Reports};
pub use topics::{cluster_topics, ClusterTopicReport, ClusterTopics, TopDomain};

//! Concept-level knowledge transfer analysis.
//!
//! The crate mines multiword concepts from a research corpus, follows each
//! concept through time, labels its transfer into practical corpora (patents,
//! clinical trials) and trains models that predict future transfer from the
//! concept's recent history.
//!
//! Stages, in dependency order:
//!
//! * [`corpus`] ingests line-record documents and indexes them by year.
//! * [`phrase`] mines a phrase vocabulary and segments documents into mentions.
//! * [`registry`] finds emergence years, applies the burn-in cutoff, labels transfers
//!   and assigns fields.
//! * [`graph`] builds the dynamic co-occurrence graph.
//! * [`features`] computes the per-(concept, year) feature series.
//! * [`dataset`] assembles leakage-safe temporal samples.
//! * [`models`] holds logistic regression and a GRU classifier.
//! * [`eval`] covers AUC, importance, ablations and sensitivity sweeps.
//! * [`synth`] generates corpora with planted transfer dynamics.
//! * [`pipeline`] chains everything behind one config file.

pub mod corpus;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod graph;
pub mod io_util;
pub mod models;
pub mod phrase;
pub mod pipeline;
pub mod registry;
pub mod synth;
pub mod text;

pub use error::{Error, Result};

/// Number of per-year features fed to the models.
pub const N_FEATURES: usize = 10;

/// Feature names in their fixed column order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "adopter_size",
    "author_repeated_usage",
    "discipline_diversity",
    "engineering_relation",
    "emotionality",
    "accessibility",
    "journal_linkage",
    "industry_share",
    "weighted_degree",
    "transferred_neighbor_share",
];

//! Hybrid clickbait headline detection.
//!
//! Headlines pass through three labelling phases (rule categories,
//! formality gates, embedding clusters) whose outputs become features for
//! from-scratch classifiers evaluated with ROC/AUC and reliability diagrams.

pub mod category_rules;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod error;
pub mod formality;
pub mod learners;
pub mod manifold;
pub mod pipeline;
pub mod textkit;

pub use error::{Error, Result};

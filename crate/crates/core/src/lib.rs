//! Route-entry modeling: balanced airport-pair panels, entry covariates,
//! binary-choice estimators with cluster-robust inference, and agreement
//! between coefficient sign patterns.

pub mod agreement;
pub mod covariates;
pub mod error;
pub mod estimators;
pub mod fixtures;
pub mod ingest;
pub mod panel;
pub mod synth;

pub use error::{Error, Result};

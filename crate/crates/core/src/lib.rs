//! Negative log-likelihood scoring of multi-object tracking posteriors.
//!
//! The crate evaluates how well a tracker's multi-object posterior explains a
//! ground-truth set of object states, for CPHD and Poisson multi-Bernoulli
//! mixture (PMBM) families, and computes the GOSPA and CLEAR MOT baselines on
//! extracted point estimates.

pub mod assignment;
pub mod baselines;
pub mod densities;
pub mod error;
pub mod logspace;
pub mod report;
pub mod scenario;
pub mod scoring;
mod serde_float;

pub use error::{Error, Result};

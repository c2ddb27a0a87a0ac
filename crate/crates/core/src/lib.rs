//! Non-negative tensor factorization for mining behavioral patterns in
//! player x feature x match telemetry.
//!
//! The pipeline: [`data`] ingests match records and builds a min-max
//! normalized tensor, [`cp`] fits non-negative CP models and picks a rank
//! from the core-consistency curve, and [`mining`] turns the fitted factors
//! into feature signatures, player clusters, temporal profiles and win-rate
//! statistics.

pub mod cp;
pub mod data;
pub mod error;
pub mod linalg;
pub mod mining;
pub mod nnls;
pub mod tensor;
pub mod tensor_file;

pub use error::{Error, Result};

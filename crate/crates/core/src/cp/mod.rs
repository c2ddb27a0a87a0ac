//! Non-negative CP decomposition, the core-consistency diagnostic and rank
//! selection.

mod align;
mod anls;
mod corcondia;
mod model;
mod scan;

pub use align::{align_components, Alignment};
pub use anls::{decompose, decompose_traced};
pub use corcondia::{corcondia, least_squares_core, PINV_REL_TOL};
pub use model::{DecomposeConfig, FactorModel};
pub use scan::{
    decompose_best, fit_restarts, rank_scan, select_best, select_rank, RankRecord, RankScanResult,
    RestartRecord, ScoredFit, KNEE_MIN_CC,
};

use crate::error::Result;
use crate::tensor::DenseTensor3;

/// `x_ijk = sum_r lambda_r a_ir b_jr c_kr`.
pub fn reconstruct(model: &FactorModel) -> Result<DenseTensor3> {
    model.reconstruct()
}

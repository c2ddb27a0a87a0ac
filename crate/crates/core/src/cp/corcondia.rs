//! Core consistency diagnostic.
//!
//! With the CP factors held fixed, the least-squares Tucker core is
//! `G = X ×₁ A⁺ ×₂ B⁺ ×₃ C⁺`, where `A` carries the component weights. The
//! score compares `G` against the unit superdiagonal `T`:
//! `cc = 100 (1 - sum (g_lmn - t_lmn)^2 / R)`. A perfect trilinear fit scores
//! 100; the score has no lower bound.

use super::model::FactorModel;
use crate::error::{Error, Result};
use crate::linalg::pseudo_inverse;
use crate::tensor::{fold, unfold, DenseTensor3};

/// Singular values below this fraction of the largest are discarded.
pub const PINV_REL_TOL: f64 = 1e-12;

pub fn corcondia(t: &DenseTensor3, model: &FactorModel) -> Result<f64> {
    let core = least_squares_core(t, model)?;
    let rank = model.rank;
    let mut sq = 0.0;
    for l in 0..rank {
        for m in 0..rank {
            for n in 0..rank {
                let ideal = if l == m && m == n { 1.0 } else { 0.0 };
                let d = core.get(l, m, n) - ideal;
                sq += d * d;
            }
        }
    }
    Ok(100.0 * (1.0 - sq / rank as f64))
}

/// The `R x R x R` Tucker core best explaining `t` given the model's factors
/// (weights absorbed into `A`).
pub fn least_squares_core(t: &DenseTensor3, model: &FactorModel) -> Result<DenseTensor3> {
    let (di, dj, dk) = t.dims();
    if model.dims() != (di, dj, dk) {
        return Err(Error::shape(format!(
            "model dims {:?} do not match tensor dims {:?}",
            model.dims(),
            t.dims()
        )));
    }
    let rank = model.rank;
    let pa = pseudo_inverse(&model.weighted_a(), PINV_REL_TOL);
    let pb = pseudo_inverse(&model.b, PINV_REL_TOL);
    let pc = pseudo_inverse(&model.c, PINV_REL_TOL);

    let y1 = fold(&pa.matmul(&unfold(t, 1)?)?, 1, (rank, dj, dk))?;
    let y2 = fold(&pb.matmul(&unfold(&y1, 2)?)?, 2, (rank, rank, dk))?;
    fold(&pc.matmul(&unfold(&y2, 3)?)?, 3, (rank, rank, rank))
}

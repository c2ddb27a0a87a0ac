//! Non-negative CP by alternating non-negative least squares.
//!
//! Each sweep updates `A`, `B`, `C` in turn. The mode-1 subproblem is
//! `min_{A >= 0} ||X_(1) - A (C ⊙ B)^T||`, whose normal equations have Gram
//! `(B^T B) * (C^T C)` (elementwise) and right-hand side
//! `(X_(1) (C ⊙ B))^T`; modes 2 and 3 are analogous. While iterating, the
//! component scale lives in `C`: after each sweep the columns of `A` and `B`
//! are renormalized and their norms pushed into `C`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{DecomposeConfig, FactorModel};
use crate::error::{Error, Result};
use crate::nnls::{solve_nnls_bpp_with, BppConfig, NnlsProblem};
use crate::tensor::{frobenius_norm, khatri_rao, unfold, DenseMatrix, DenseTensor3};

/// Fits a rank-`rank` non-negative CP model starting from factors drawn
/// uniformly on `(0, 1]` with `cfg.seed`.
pub fn decompose(t: &DenseTensor3, rank: usize, cfg: &DecomposeConfig) -> Result<FactorModel> {
    decompose_traced(t, rank, cfg).map(|(m, _)| m)
}

/// Like [`decompose`], also returning the squared residual
/// `||X - X_hat||_F^2` at the initial point and after every sweep.
pub fn decompose_traced(
    t: &DenseTensor3,
    rank: usize,
    cfg: &DecomposeConfig,
) -> Result<(FactorModel, Vec<f64>)> {
    cfg.validate()?;
    if !t.is_nonnegative() {
        return Err(Error::InvalidArgument("tensor has negative entries".into()));
    }
    let (di, dj, dk) = t.dims();
    let max_rank = (dj * dk).min(di * dk).min(di * dj);
    if rank == 0 || rank > max_rank {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside 1..={max_rank} for a {di}x{dj}x{dk} tensor"
        )));
    }
    let norm_x = frobenius_norm(t);
    if norm_x == 0.0 {
        return Err(Error::DegenerateTensor);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut init = |rows: usize| {
        // 1 - U[0,1) lies in (0, 1].
        DenseMatrix::from_fn(rows, rank, |_, _| 1.0 - rng.random::<f64>())
    };
    let mut a = init(di);
    let mut b = init(dj);
    let mut c = init(dk);

    let x1 = unfold(t, 1)?;
    let x2 = unfold(t, 2)?;
    let x3 = unfold(t, 3)?;
    let bpp = BppConfig {
        tol: cfg.nnls_tol,
        max_iter: cfg.nnls_max_iter,
        ..BppConfig::default()
    };

    let mut objective = squared_residual(t, &a, &b, &c);
    let mut trace = vec![objective];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_outer_iters {
        iterations += 1;
        a = update_factor(&x1, &c, &b, &b.gram(), &c.gram(), &bpp)?;
        b = update_factor(&x2, &c, &a, &a.gram(), &c.gram(), &bpp)?;
        c = update_factor(&x3, &b, &a, &a.gram(), &b.gram(), &bpp)?;
        rebalance(&mut a, &mut b, &mut c);

        let next = squared_residual(t, &a, &b, &c);
        trace.push(next);
        let rel_change = (objective - next).abs() / objective.max(f64::MIN_POSITIVE);
        objective = next;
        if objective.sqrt() / norm_x <= cfg.abs_tol || rel_change < cfg.rel_tol {
            converged = true;
            break;
        }
    }

    let mut model = FactorModel::from_factors(vec![1.0; rank], a, b, c)?.normalized();
    model.fit = squared_residual_model(t, &model).sqrt() / norm_x;
    model.converged = converged;
    model.iterations = iterations;
    model.seed = cfg.seed;
    Ok((model, trace))
}

/// Solves the NNLS subproblem for the factor whose unfolding is `xn`, with
/// `left ⊙ right` as the Khatri-Rao design.
fn update_factor(
    xn: &DenseMatrix,
    left: &DenseMatrix,
    right: &DenseMatrix,
    gram_l: &DenseMatrix,
    gram_r: &DenseMatrix,
    bpp: &BppConfig,
) -> Result<DenseMatrix> {
    let gram = gram_l.hadamard(gram_r)?;
    let kr = khatri_rao(left, right)?;
    let rhs = xn.matmul(&kr)?.transpose();
    let sol = solve_nnls_bpp_with(&NnlsProblem::new(gram, rhs)?, bpp)?;
    Ok(sol.x.transpose())
}

fn rebalance(a: &mut DenseMatrix, b: &mut DenseMatrix, c: &mut DenseMatrix) {
    for r in 0..a.cols() {
        let mut scale = 1.0;
        for m in [&mut *a, &mut *b] {
            let col = m.column(r);
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                let unit: Vec<f64> = col.iter().map(|v| v / norm).collect();
                m.set_column(r, &unit);
                scale *= norm;
            }
        }
        let col: Vec<f64> = c.column(r).iter().map(|v| v * scale).collect();
        c.set_column(r, &col);
    }
}

/// `||X - [[A, B, C]]||_F^2`, accumulated entrywise so that it stays
/// accurate when the residual is tiny.
fn squared_residual(t: &DenseTensor3, a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> f64 {
    let ones = vec![1.0; a.cols()];
    squared_residual_weighted(t, &ones, a, b, c)
}

fn squared_residual_model(t: &DenseTensor3, m: &FactorModel) -> f64 {
    squared_residual_weighted(t, &m.lambda, &m.a, &m.b, &m.c)
}

fn squared_residual_weighted(
    t: &DenseTensor3,
    w: &[f64],
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
) -> f64 {
    let (di, dj, dk) = t.dims();
    let rank = w.len();
    let mut bc = vec![0.0; rank];
    let mut total = 0.0;
    for j in 0..dj {
        for k in 0..dk {
            for r in 0..rank {
                bc[r] = w[r] * b.get(j, r) * c.get(k, r);
            }
            for i in 0..di {
                let model: f64 = a.row(i).iter().zip(&bc).map(|(x, y)| x * y).sum();
                let d = t.get(i, j, k) - model;
                total += d * d;
            }
        }
    }
    total
}

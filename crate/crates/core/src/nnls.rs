//! Non-negative least squares with many right-hand sides by block principal
//! pivoting.
//!
//! Every column `y` of the right-hand side yields an independent problem
//! `min ||G x - y||_2 s.t. x >= 0`, supplied through its normal equations
//! `gram = G^T G` and `rhs = G^T Y`. The solver keeps a passive set per
//! column, solves the unconstrained system on it, and exchanges every
//! infeasible variable at once. When the infeasible count fails to shrink
//! for `full_exchange_budget` consecutive rounds it falls back to exchanging
//! only the largest infeasible index, which cannot cycle.
//!
//! Columns that share a passive set are solved with one factorization.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::tensor::DenseMatrix;

pub const DEFAULT_KKT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Normal-equation form of a multi-column NNLS problem.
#[derive(Debug, Clone)]
pub struct NnlsProblem {
    gram: DenseMatrix,
    rhs: DenseMatrix,
}

impl NnlsProblem {
    pub fn new(gram: DenseMatrix, rhs: DenseMatrix) -> Result<Self> {
        let n = gram.rows();
        if gram.cols() != n {
            return Err(Error::shape(format!(
                "gram must be square, got {:?}",
                gram.shape()
            )));
        }
        if rhs.rows() != n {
            return Err(Error::shape(format!(
                "rhs has {} rows but gram is {n}x{n}",
                rhs.rows()
            )));
        }
        let scale = gram.values().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for a in 0..n {
            for b in 0..a {
                if (gram.get(a, b) - gram.get(b, a)).abs() > 1e-10 * scale {
                    return Err(Error::InvalidArgument(format!(
                        "gram is not symmetric at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(Self { gram, rhs })
    }

    /// Forms `G^T G` and `G^T Y` from the raw least-squares data.
    pub fn from_least_squares(g: &DenseMatrix, y: &DenseMatrix) -> Result<Self> {
        let rhs = g.transpose().matmul(y)?;
        Self::new(g.gram(), rhs)
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    pub fn rhs(&self) -> &DenseMatrix {
        &self.rhs
    }

    pub fn n_vars(&self) -> usize {
        self.gram.rows()
    }

    pub fn n_rhs(&self) -> usize {
        self.rhs.cols()
    }

    /// `gram * x - rhs`, the gradient of `0.5 x^T gram x - rhs^T x`.
    pub fn gradient(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.shape() != self.rhs.shape() {
            return Err(Error::shape(format!(
                "x is {:?}, expected {:?}",
                x.shape(),
                self.rhs.shape()
            )));
        }
        let gx = self.gram.matmul(x)?;
        let values = gx
            .values()
            .iter()
            .zip(self.rhs.values())
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix::from_vec(x.rows(), x.cols(), values)
    }

    /// `sum over columns of 0.5 x^T gram x - rhs^T x`; equals
    /// `0.5 ||G x - Y||^2` up to the constant `0.5 ||Y||^2`.
    pub fn objective(&self, x: &DenseMatrix) -> Result<f64> {
        let w = self.gradient(x)?;
        // 0.5 x^T G x - b^T x = 0.5 x^T (G x - b) - 0.5 b^T x
        Ok(x.values()
            .iter()
            .zip(w.values())
            .zip(self.rhs.values())
            .map(|((x, w), b)| 0.5 * x * w - 0.5 * b * x)
            .sum())
    }
}

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DenseMatrix,
    pub kkt_residual: f64,
    /// Exchange rounds until every column was feasible.
    pub iterations: usize,
    /// Rounds that used the single-variable backup rule, summed over columns.
    pub single_exchanges: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct BppConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Full exchanges allowed without a decrease in the infeasible count
    /// before switching to single-variable exchanges.
    pub full_exchange_budget: u32,
}

impl Default for BppConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_KKT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            full_exchange_budget: 3,
        }
    }
}

pub fn solve_nnls_bpp(p: &NnlsProblem, tol: f64, max_iter: usize) -> Result<NnlsSolution> {
    solve_nnls_bpp_with(
        p,
        &BppConfig {
            tol,
            max_iter,
            ..BppConfig::default()
        },
    )
}

pub fn solve_nnls_bpp_with(p: &NnlsProblem, cfg: &BppConfig) -> Result<NnlsSolution> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            cfg.tol
        )));
    }
    let n = p.n_vars();
    let m = p.n_rhs();
    let gram = &p.gram;
    let rhs = &p.rhs;

    let trace: f64 = (0..n).map(|i| gram.get(i, i)).sum();
    let ridge = 1e-12 * trace / n as f64;
    let scale = gram
        .values()
        .iter()
        .chain(rhs.values())
        .fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let feas_eps = 1e-12 * scale;

    // Column-major working state: x[j][i], y[j][i].
    let mut x = vec![vec![0.0; n]; m];
    let mut y: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..n).map(|i| -rhs.get(i, j)).collect())
        .collect();
    let mut passive = vec![vec![false; n]; m];
    let mut budget = vec![cfg.full_exchange_budget; m];
    let mut best_count = vec![n + 1; m];

    let mut iterations = 0;
    let mut single_exchanges = 0;
    loop {
        let mut pending: Vec<usize> = Vec::new();
        for j in 0..m {
            let infeasible: Vec<usize> = (0..n)
                .filter(|&i| {
                    if passive[j][i] {
                        x[j][i] < -feas_eps
                    } else {
                        y[j][i] < -feas_eps
                    }
                })
                .collect();
            if infeasible.is_empty() {
                continue;
            }
            let count = infeasible.len();
            if count < best_count[j] {
                best_count[j] = count;
                budget[j] = cfg.full_exchange_budget;
                for &i in &infeasible {
                    passive[j][i] = !passive[j][i];
                }
            } else if budget[j] >= 1 {
                budget[j] -= 1;
                for &i in &infeasible {
                    passive[j][i] = !passive[j][i];
                }
            } else {
                let last = *infeasible.last().expect("non-empty");
                passive[j][last] = !passive[j][last];
                single_exchanges += 1;
            }
            pending.push(j);
        }
        if pending.is_empty() {
            break;
        }
        iterations += 1;
        if iterations > cfg.max_iter {
            return Err(Error::MaxIterationsExceeded(cfg.max_iter));
        }

        let mut groups: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
        for j in pending {
            groups.entry(passive[j].clone()).or_default().push(j);
        }
        for (set, cols) in groups {
            solve_on_passive_set(gram, rhs, &set, ridge, &cols, &mut x, &mut y)?;
        }
    }

    let mut out = DenseMatrix::zeros(n, m);
    for j in 0..m {
        for i in 0..n {
            out.set(i, j, x[j][i].max(0.0));
        }
    }
    let kkt = kkt_residual(p, &out)?;
    Ok(NnlsSolution {
        x: out,
        kkt_residual: kkt,
        iterations,
        single_exchanges,
    })
}

fn solve_on_passive_set(
    gram: &DenseMatrix,
    rhs: &DenseMatrix,
    set: &[bool],
    ridge: f64,
    cols: &[usize],
    x: &mut [Vec<f64>],
    y: &mut [Vec<f64>],
) -> Result<()> {
    let n = set.len();
    let idx: Vec<usize> = (0..n).filter(|&i| set[i]).collect();
    let p = idx.len();
    let factor = if p > 0 {
        let mut sub = vec![0.0; p * p];
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                sub[a * p + b] = gram.get(ia, ib);
            }
            sub[a * p + a] += ridge;
        }
        Some(cholesky(&sub, p).ok_or(Error::NumericallySingular)?)
    } else {
        None
    };

    let mut buf = vec![0.0; p];
    for &j in cols {
        let xj = &mut x[j];
        xj.iter_mut().for_each(|v| *v = 0.0);
        if let Some(l) = &factor {
            for (a, &ia) in idx.iter().enumerate() {
                buf[a] = rhs.get(ia, j);
            }
            cholesky_solve(l, p, &mut buf);
            for (a, &ia) in idx.iter().enumerate() {
                xj[ia] = buf[a];
            }
        }
        let yj = &mut y[j];
        for i in 0..n {
            if set[i] {
                yj[i] = 0.0;
            } else {
                let gx: f64 = idx.iter().map(|&k| gram.get(i, k) * xj[k]).sum();
                yj[i] = gx - rhs.get(i, j);
            }
        }
    }
    Ok(())
}

/// Largest violation of the NNLS optimality conditions at `x`: primal
/// feasibility `x >= 0`, dual feasibility `w = gram x - rhs >= 0`, and
/// complementary slackness `x * w = 0`. Zero exactly at a KKT point.
pub fn kkt_residual(p: &NnlsProblem, x: &DenseMatrix) -> Result<f64> {
    let w = p.gradient(x)?;
    Ok(x.values()
        .iter()
        .zip(w.values())
        .map(|(&xi, &wi)| (-xi).max(0.0).max((-wi).max(0.0)).max((xi * wi).abs()))
        .fold(0.0, f64::max))
}

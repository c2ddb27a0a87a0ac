use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnls::{DEFAULT_KKT_TOL, DEFAULT_MAX_ITER};
use crate::tensor::{kruskal_tensor, DenseMatrix, DenseTensor3};

/// Kruskal-form CP model `[[lambda; A, B, C]]`.
///
/// Models returned by the solver have unit-norm factor columns with the
/// norms folded into `lambda`, components sorted by decreasing weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModel {
    pub rank: usize,
    pub lambda: Vec<f64>,
    #[serde(rename = "A")]
    pub a: DenseMatrix,
    #[serde(rename = "B")]
    pub b: DenseMatrix,
    #[serde(rename = "C")]
    pub c: DenseMatrix,
    /// Relative reconstruction error `||X - X_hat||_F / ||X||_F`.
    pub fit: f64,
    pub converged: bool,
    pub iterations: usize,
    pub seed: u64,
}

impl FactorModel {
    /// Wraps raw factors; `fit`, `converged`, `iterations` and `seed` are
    /// left at neutral values.
    pub fn from_factors(
        lambda: Vec<f64>,
        a: DenseMatrix,
        b: DenseMatrix,
        c: DenseMatrix,
    ) -> Result<Self> {
        let rank = lambda.len();
        if rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        if a.cols() != rank || b.cols() != rank || c.cols() != rank {
            return Err(Error::shape(format!(
                "factor column counts ({}, {}, {}) do not match rank {rank}",
                a.cols(),
                b.cols(),
                c.cols()
            )));
        }
        Ok(Self {
            rank,
            lambda,
            a,
            b,
            c,
            fit: 0.0,
            converged: true,
            iterations: 0,
            seed: 0,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.rows(), self.b.rows(), self.c.rows())
    }

    pub fn reconstruct(&self) -> Result<DenseTensor3> {
        kruskal_tensor(&self.lambda, &self.a, &self.b, &self.c)
    }

    /// Moves every column norm into `lambda` and orders components by
    /// decreasing weight. A component with a zero column gets weight 0 and
    /// uniform unit columns so the unit-norm invariant still holds.
    pub fn normalized(&self) -> Self {
        let rank = self.rank;
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        let mut c = self.c.clone();
        let mut lambda = self.lambda.clone();
        for r in 0..rank {
            let mut w = lambda[r];
            for m in [&mut a, &mut b, &mut c] {
                let col = m.column(r);
                let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
                w *= norm;
                let unit: Vec<f64> = if norm > 0.0 {
                    col.iter().map(|v| v / norm).collect()
                } else {
                    vec![1.0 / (col.len() as f64).sqrt(); col.len()]
                };
                m.set_column(r, &unit);
            }
            lambda[r] = w;
        }
        let mut order: Vec<usize> = (0..rank).collect();
        order.sort_by(|&x, &y| lambda[y].total_cmp(&lambda[x]).then(x.cmp(&y)));
        Self {
            lambda: order.iter().map(|&r| lambda[r]).collect(),
            a: permute_columns(&a, &order),
            b: permute_columns(&b, &order),
            c: permute_columns(&c, &order),
            ..self.clone()
        }
    }

    /// Reorders components so that new component `r` is old `order[r]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.rank];
        if order.len() != self.rank
            || order
                .iter()
                .any(|&r| r >= self.rank || std::mem::replace(&mut seen[r], true))
        {
            return Err(Error::InvalidArgument(format!(
                "{order:?} is not a permutation"
            )));
        }
        Ok(Self {
            lambda: order.iter().map(|&r| self.lambda[r]).collect(),
            a: permute_columns(&self.a, order),
            b: permute_columns(&self.b, order),
            c: permute_columns(&self.c, order),
            ..self.clone()
        })
    }

    /// `A diag(lambda)`.
    pub fn weighted_a(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.a.rows(), self.rank, |i, r| {
            self.a.get(i, r) * self.lambda[r]
        })
    }
}

fn permute_columns(m: &DenseMatrix, order: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(m.rows(), order.len(), |i, r| m.get(i, order[r]))
}

/// Knobs for one ANLS fit and for the restart schedule around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecomposeConfig {
    pub max_outer_iters: usize,
    /// Stop once the relative reconstruction error drops to this value.
    pub abs_tol: f64,
    /// Stop once the relative objective change between sweeps drops below this.
    pub rel_tol: f64,
    pub n_restarts: usize,
    /// Restart `s` is seeded with `seed + s`.
    pub seed: u64,
    pub nnls_tol: f64,
    pub nnls_max_iter: usize,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 500,
            abs_tol: 1e-12,
            rel_tol: 1e-8,
            n_restarts: 5,
            seed: 0,
            nnls_tol: DEFAULT_KKT_TOL,
            nnls_max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl DecomposeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.nnls_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.n_restarts == 0 {
            return Err(Error::InvalidArgument(
                "n_restarts must be at least 1".into(),
            ));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::InvalidArgument(
                "max_outer_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn restart_seed(&self, restart: usize) -> u64 {
        self.seed.wrapping_add(restart as u64)
    }
}

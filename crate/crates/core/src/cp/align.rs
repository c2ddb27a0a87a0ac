use itertools::Itertools;
use serde::Serialize;

use super::model::FactorModel;
use crate::error::{Error, Result};
use crate::tensor::DenseMatrix;

/// Ranks up to this size are matched exhaustively; larger ones greedily.
const EXHAUSTIVE_MAX_RANK: usize = 8;

/// Component matching between an estimate and a reference model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alignment {
    /// `permutation[r]` is the estimated component matched to reference `r`.
    pub permutation: Vec<usize>,
    /// Product of the three per-mode cosines for each matched pair.
    pub congruence: Vec<f64>,
}

impl Alignment {
    pub fn min_congruence(&self) -> f64 {
        self.congruence
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Matches components of `est` to those of `truth`, maximizing the summed
/// factor congruence. CP is identifiable only up to permutation and column
/// scaling, so scores compare directions, not magnitudes.
pub fn align_components(est: &FactorModel, truth: &FactorModel) -> Result<Alignment> {
    if est.rank != truth.rank {
        return Err(Error::InvalidArgument(format!(
            "rank mismatch: {} vs {}",
            est.rank, truth.rank
        )));
    }
    if est.dims() != truth.dims() {
        return Err(Error::shape(format!(
            "dims mismatch: {:?} vs {:?}",
            est.dims(),
            truth.dims()
        )));
    }
    let rank = est.rank;
    // scores[t][e]
    let ca = cosines(&truth.a, &est.a);
    let cb = cosines(&truth.b, &est.b);
    let cc = cosines(&truth.c, &est.c);
    let scores: Vec<Vec<f64>> = (0..rank)
        .map(|t| (0..rank).map(|e| ca[t][e] * cb[t][e] * cc[t][e]).collect())
        .collect();

    let permutation = if rank <= EXHAUSTIVE_MAX_RANK {
        (0..rank)
            .permutations(rank)
            .map(|p| {
                let total: f64 = p.iter().enumerate().map(|(t, &e)| scores[t][e]).sum();
                (p, total)
            })
            // first maximum wins, which keeps the identity on ties
            .fold((Vec::new(), f64::NEG_INFINITY), |best, cand| {
                if cand.1 > best.1 {
                    cand
                } else {
                    best
                }
            })
            .0
    } else {
        greedy(&scores)
    };
    let congruence = permutation
        .iter()
        .enumerate()
        .map(|(t, &e)| scores[t][e])
        .collect();
    Ok(Alignment {
        permutation,
        congruence,
    })
}

fn greedy(scores: &[Vec<f64>]) -> Vec<usize> {
    let rank = scores.len();
    let mut pairs: Vec<(usize, usize)> = (0..rank).cartesian_product(0..rank).collect();
    pairs.sort_by(|&(t1, e1), &(t2, e2)| scores[t2][e2].total_cmp(&scores[t1][e1]));
    let mut perm = vec![usize::MAX; rank];
    let mut used = vec![false; rank];
    for (t, e) in pairs {
        if perm[t] == usize::MAX && !used[e] {
            perm[t] = e;
            used[e] = true;
        }
    }
    perm
}

fn cosines(x: &DenseMatrix, y: &DenseMatrix) -> Vec<Vec<f64>> {
    let xs: Vec<Vec<f64>> = (0..x.cols()).map(|r| x.column(r)).collect();
    let ys: Vec<Vec<f64>> = (0..y.cols()).map(|r| y.column(r)).collect();
    xs.iter()
        .map(|u| ys.iter().map(|v| cosine(u, v)).collect())
        .collect()
}

pub(crate) fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

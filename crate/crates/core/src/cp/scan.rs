//! Multi-restart fitting and rank selection from the core-consistency curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anls::decompose;
use super::corcondia::corcondia;
use super::model::{DecomposeConfig, FactorModel};
use crate::error::{Error, Result};
use crate::tensor::DenseTensor3;

/// Ranks whose best core consistency falls below this are not knee candidates.
pub const KNEE_MIN_CC: f64 = 50.0;

/// One restart at one rank. `error` is set when the fit failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub rank: usize,
    pub restart: usize,
    pub seed: u64,
    pub core_consistency: Option<f64>,
    pub fit: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub rank: usize,
    pub restarts: Vec<RestartRecord>,
    /// Highest core consistency among successful restarts.
    pub best_cc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankScanResult {
    pub ranks: Vec<RankRecord>,
    pub selected_rank: usize,
    pub selection_rationale: String,
}

impl RankScanResult {
    pub fn records(&self) -> impl Iterator<Item = &RestartRecord> {
        self.ranks.iter().flat_map(|r| r.restarts.iter())
    }

    pub fn curve(&self) -> Vec<(usize, Option<f64>)> {
        self.ranks.iter().map(|r| (r.rank, r.best_cc)).collect()
    }
}

/// A fitted restart together with its diagnostic.
#[derive(Debug, Clone)]
pub struct ScoredFit {
    pub model: FactorModel,
    pub core_consistency: f64,
}

/// Runs `cfg.n_restarts` independent fits at `rank`, restart `s` seeded with
/// `cfg.seed + s`. Restarts run on the current rayon pool; the output order
/// is the restart order regardless of scheduling.
pub fn fit_restarts(
    t: &DenseTensor3,
    rank: usize,
    cfg: &DecomposeConfig,
) -> Result<Vec<Result<ScoredFit>>> {
    cfg.validate()?;
    Ok((0..cfg.n_restarts)
        .into_par_iter()
        .map(|s| {
            let run_cfg = DecomposeConfig {
                seed: cfg.restart_seed(s),
                ..cfg.clone()
            };
            let model = decompose(t, rank, &run_cfg)?;
            let core_consistency = corcondia(t, &model)?;
            Ok(ScoredFit {
                model,
                core_consistency,
            })
        })
        .collect())
}

/// Picks the restart with the highest core consistency; ties go to the
/// lower fit error, then the lower seed.
pub fn select_best(fits: &[ScoredFit]) -> Option<&ScoredFit> {
    fits.iter().min_by(|x, y| {
        y.core_consistency
            .total_cmp(&x.core_consistency)
            .then(x.model.fit.total_cmp(&y.model.fit))
            .then(x.model.seed.cmp(&y.model.seed))
    })
}

/// Fits all restarts at `rank` and returns the best one with the per-restart
/// records. Fails only if every restart fails.
pub fn decompose_best(
    t: &DenseTensor3,
    rank: usize,
    cfg: &DecomposeConfig,
) -> Result<(ScoredFit, Vec<RestartRecord>)> {
    let results = fit_restarts(t, rank, cfg)?;
    let records = restart_records(rank, cfg, &results);
    let mut fits = Vec::new();
    let mut last_err = None;
    for r in results {
        match r {
            Ok(f) => fits.push(f),
            Err(e) => last_err = Some(e),
        }
    }
    match select_best(&fits) {
        Some(best) => Ok((best.clone(), records)),
        None => Err(last_err.expect("at least one restart ran")),
    }
}

fn restart_records(
    rank: usize,
    cfg: &DecomposeConfig,
    results: &[Result<ScoredFit>],
) -> Vec<RestartRecord> {
    results
        .iter()
        .enumerate()
        .map(|(s, r)| match r {
            Ok(f) => RestartRecord {
                rank,
                restart: s,
                seed: f.model.seed,
                core_consistency: Some(f.core_consistency),
                fit: Some(f.model.fit),
                error: None,
            },
            Err(e) => RestartRecord {
                rank,
                restart: s,
                seed: cfg.restart_seed(s),
                core_consistency: None,
                fit: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// Fits every rank in `ranks` with `cfg.n_restarts` restarts and selects a
/// rank from the knee of the best-per-rank core-consistency curve. Failed
/// restarts are recorded, not propagated.
pub fn rank_scan(
    t: &DenseTensor3,
    ranks: &[usize],
    cfg: &DecomposeConfig,
) -> Result<RankScanResult> {
    if ranks.is_empty() {
        return Err(Error::InvalidArgument("rank range is empty".into()));
    }
    if ranks.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidArgument(format!(
            "ranks must be consecutive and increasing, got {ranks:?}"
        )));
    }
    let mut out = Vec::with_capacity(ranks.len());
    for &rank in ranks {
        let results = fit_restarts(t, rank, cfg)?;
        let restarts = restart_records(rank, cfg, &results);
        let best_cc = restarts
            .iter()
            .filter_map(|r| r.core_consistency)
            .max_by(f64::total_cmp);
        out.push(RankRecord {
            rank,
            restarts,
            best_cc,
        });
    }
    let curve: Vec<(usize, Option<f64>)> = out.iter().map(|r| (r.rank, r.best_cc)).collect();
    let (selected_rank, selection_rationale) = select_rank(&curve);
    Ok(RankScanResult {
        ranks: out,
        selected_rank,
        selection_rationale,
    })
}

/// Knee of the core-consistency curve.
///
/// Among interior ranks whose best cc is at least [`KNEE_MIN_CC`], picks the
/// one with the sharpest concave bend `2 cc[r] - cc[r-1] - cc[r+1]` (the
/// negated discrete second difference); ties go to the lower rank. Without
/// candidates, falls back to the largest rank reaching the threshold, else
/// the first rank.
pub fn select_rank(curve: &[(usize, Option<f64>)]) -> (usize, String) {
    assert!(!curve.is_empty(), "curve must be non-empty");
    if curve.len() == 1 {
        return (
            curve[0].0,
            format!("single rank {} scanned; no knee possible", curve[0].0),
        );
    }
    let mut best: Option<(usize, f64)> = None;
    for w in curve.windows(3) {
        let (rank, mid) = w[1];
        let (Some(prev), Some(mid), Some(next)) = (w[0].1, mid, w[2].1) else {
            continue;
        };
        if mid < KNEE_MIN_CC {
            continue;
        }
        let bend = 2.0 * mid - prev - next;
        if best.is_none_or(|(_, b)| bend > b) {
            best = Some((rank, bend));
        }
    }
    if let Some((rank, bend)) = best {
        return (
            rank,
            format!(
                "rank {rank} has the sharpest core-consistency knee \
                 (2cc[r]-cc[r-1]-cc[r+1] = {bend:.4}) among interior ranks with cc >= {KNEE_MIN_CC}"
            ),
        );
    }
    if let Some(&(rank, _)) = curve
        .iter()
        .rev()
        .find(|(_, cc)| cc.is_some_and(|c| c >= KNEE_MIN_CC))
    {
        return (
            rank,
            format!("no interior knee candidate; largest rank with cc >= {KNEE_MIN_CC} is {rank}"),
        );
    }
    let first = curve[0].0;
    (
        first,
        format!("no rank reaches cc >= {KNEE_MIN_CC}; falling back to rank {first}"),
    )
}

use serde::{Deserialize, Serialize};

use super::cluster::ClusterAssignment;
use super::stats::{kde_gaussian, kde_grid, silverman_bandwidth, welch_t_test, WelchTest};
use crate::error::{Error, Result};

/// Which values feed the per-cluster density and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KdeMode {
    /// One value per player: the fraction of their matches won.
    #[default]
    PlayerMean,
    /// Every match outcome as a 0/1 value.
    Raw,
}

pub const KDE_MIN_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterWinRate {
    pub cluster: usize,
    pub n_players: usize,
    pub mean_win_rate: f64,
    pub bandwidth: Option<f64>,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Why the density is missing, if it is.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub a: usize,
    pub b: usize,
    pub test: Option<WelchTest>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRateStats {
    pub mode: KdeMode,
    pub clusters: Vec<ClusterWinRate>,
    pub pairwise: Vec<PairwiseTest>,
}

/// Per-cluster win-rate densities and pairwise Welch tests. `winners[i]`
/// holds player `i`'s outcomes in match order.
pub fn win_rate_stats(
    winners: &[Vec<bool>],
    clusters: &ClusterAssignment,
    mode: KdeMode,
) -> Result<WinRateStats> {
    if winners.len() != clusters.labels.len() {
        return Err(Error::shape(format!(
            "{} players with outcomes but {} labels",
            winners.len(),
            clusters.labels.len()
        )));
    }
    let samples: Vec<Vec<f64>> = (0..clusters.k)
        .map(|c| {
            let members = clusters.members(c);
            if members.is_empty() {
                return Err(Error::EmptyCluster(c));
            }
            Ok(cluster_values(winners, &members, mode))
        })
        .collect::<Result<_>>()?;

    let per_cluster = samples
        .iter()
        .enumerate()
        .map(|(c, values)| {
            let n_players = clusters.labels.iter().filter(|&&l| l == c).count();
            let mean_win_rate = values.iter().sum::<f64>() / values.len() as f64;
            let mut out = ClusterWinRate {
                cluster: c,
                n_players,
                mean_win_rate,
                bandwidth: None,
                grid: Vec::new(),
                density: Vec::new(),
                note: None,
            };
            match silverman_bandwidth(values) {
                Ok(h) => {
                    let grid = kde_grid(values, h, KDE_MIN_GRID_POINTS);
                    out.density = kde_gaussian(values, &grid, Some(h))?;
                    out.grid = grid;
                    out.bandwidth = Some(h);
                }
                Err(e) => out.note = Some(e.to_string()),
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pairwise = Vec::new();
    for a in 0..samples.len() {
        for b in a + 1..samples.len() {
            let (test, error) = match welch_t_test(&samples[a], &samples[b]) {
                Ok(t) => (Some(t), None),
                Err(e) => (None, Some(e.to_string())),
            };
            pairwise.push(PairwiseTest { a, b, test, error });
        }
    }
    Ok(WinRateStats {
        mode,
        clusters: per_cluster,
        pairwise,
    })
}

fn cluster_values(winners: &[Vec<bool>], members: &[usize], mode: KdeMode) -> Vec<f64> {
    let as_f = |w: bool| if w { 1.0 } else { 0.0 };
    match mode {
        KdeMode::PlayerMean => members
            .iter()
            .map(|&i| {
                let w = &winners[i];
                w.iter().map(|&x| as_f(x)).sum::<f64>() / w.len().max(1) as f64
            })
            .collect(),
        KdeMode::Raw => members
            .iter()
            .flat_map(|&i| winners[i].iter().map(|&x| as_f(x)))
            .collect(),
    }
}

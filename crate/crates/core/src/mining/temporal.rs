use serde::{Deserialize, Serialize};

use super::cluster::ClusterAssignment;
use crate::cp::FactorModel;
use crate::error::{Error, Result};
use crate::tensor::DenseTensor3;

/// Mean and standard error at each time step.
///
/// The standard error is the sample standard deviation (`n - 1`
/// denominator) over `sqrt(n)`; a single member gives 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Series {
    /// Column statistics of the rows yielded by `rows` (each of length `len`).
    fn from_rows(len: usize, rows: impl Iterator<Item = Vec<f64>> + Clone) -> Self {
        let n = rows.clone().count();
        let mut mean = vec![0.0; len];
        for row in rows.clone() {
            for (m, v) in mean.iter_mut().zip(&row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut stderr = vec![0.0; len];
        if n > 1 {
            for row in rows {
                for ((s, v), m) in stderr.iter_mut().zip(&row).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
            let scale = 1.0 / ((n - 1) as f64 * n as f64);
            stderr.iter_mut().for_each(|s| *s = (*s * scale).sqrt());
        }
        Series { mean, stderr }
    }
}

/// Per-cluster, per-component membership modulated over time,
/// `P_r = lambda_r a_r c_r^T`, averaged over each cluster's rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalProfile {
    /// `profiles[cluster][component]`, each of length `K`.
    pub profiles: Vec<Vec<Series>>,
    pub cluster_sizes: Vec<usize>,
}

fn cluster_members(clusters: &ClusterAssignment, rows: usize) -> Result<Vec<Vec<usize>>> {
    if clusters.labels.len() != rows {
        return Err(Error::shape(format!(
            "{} labels for {rows} rows",
            clusters.labels.len()
        )));
    }
    (0..clusters.k)
        .map(|c| {
            let m = clusters.members(c);
            if m.is_empty() {
                Err(Error::EmptyCluster(c))
            } else {
                Ok(m)
            }
        })
        .collect()
}

pub fn temporal_modulation(
    model: &FactorModel,
    clusters: &ClusterAssignment,
) -> Result<TemporalProfile> {
    let (di, _, dk) = model.dims();
    let members = cluster_members(clusters, di)?;
    let profiles = members
        .iter()
        .map(|idx| {
            (0..model.rank)
                .map(|r| {
                    let rows = idx.iter().map(|&i| modulation_row(model, r, i));
                    Series::from_rows(dk, rows)
                })
                .collect()
        })
        .collect();
    Ok(TemporalProfile {
        profiles,
        cluster_sizes: members.iter().map(Vec::len).collect(),
    })
}

/// Row `i` of `lambda_r a_r c_r^T`.
fn modulation_row(model: &FactorModel, r: usize, i: usize) -> Vec<f64> {
    let w = model.lambda[r] * model.a.get(i, r);
    (0..model.c.rows()).map(|k| w * model.c.get(k, r)).collect()
}

/// Mean over all rows of `lambda_r a_r c_r^T`.
pub fn global_modulation_mean(model: &FactorModel, r: usize) -> Vec<f64> {
    let (di, _, dk) = model.dims();
    Series::from_rows(dk, (0..di).map(|i| modulation_row(model, r, i))).mean
}

/// Raw per-cluster feature trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTrajectories {
    /// `series[cluster][feature]`, each of length `K`.
    pub series: Vec<Vec<Series>>,
    pub cluster_sizes: Vec<usize>,
}

/// Mean and standard error of every feature at every time step over the
/// players of each cluster, computed on the data tensor itself.
pub fn cluster_feature_trajectories(
    t: &DenseTensor3,
    clusters: &ClusterAssignment,
) -> Result<FeatureTrajectories> {
    let (di, dj, dk) = t.dims();
    let members = cluster_members(clusters, di)?;
    let series = members
        .iter()
        .map(|idx| {
            (0..dj)
                .map(|j| {
                    let rows = idx
                        .iter()
                        .map(move |&i| (0..dk).map(|k| t.get(i, j, k)).collect());
                    Series::from_rows(dk, rows)
                })
                .collect()
        })
        .collect();
    Ok(FeatureTrajectories {
        series,
        cluster_sizes: members.iter().map(Vec::len).collect(),
    })
}

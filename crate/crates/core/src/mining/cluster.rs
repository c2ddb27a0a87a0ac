//! k-means with k-means++ seeding, silhouettes, and the adjusted Rand index.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub n_init: usize,
    pub max_iter: usize,
    /// Lloyd stops once the relative inertia decrease falls below this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            n_init: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub k: usize,
    pub labels: Vec<usize>,
    pub centroids: DenseMatrix,
    pub inertia: f64,
    /// Mean silhouette; `None` when `k < 2`.
    pub silhouette: Option<f64>,
    pub sample_silhouettes: Vec<f64>,
}

impl ClusterAssignment {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn kmeans(
    points: &DenseMatrix,
    k: usize,
    n_init: usize,
    seed: u64,
) -> Result<ClusterAssignment> {
    kmeans_with(
        points,
        k,
        &KMeansConfig {
            n_init,
            ..KMeansConfig::default()
        },
        seed,
    )
}

/// Best of `cfg.n_init` seeded Lloyd runs by inertia.
pub fn kmeans_with(
    points: &DenseMatrix,
    k: usize,
    cfg: &KMeansConfig,
    seed: u64,
) -> Result<ClusterAssignment> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={n}"
        )));
    }
    if cfg.n_init == 0 || cfg.max_iter == 0 {
        return Err(Error::InvalidArgument(
            "n_init and max_iter must be positive".into(),
        ));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, DenseMatrix, f64)> = None;
    for _ in 0..cfg.n_init {
        let mut rng = ChaCha8Rng::seed_from_u64(master.next_u64());
        let run = lloyd(points, k, cfg, &mut rng)?;
        if best.as_ref().is_none_or(|b| run.2 < b.2) {
            best = Some(run);
        }
    }
    let (labels, centroids, inertia) = best.expect("n_init >= 1");
    let (silhouette, sample_silhouettes) = if k >= 2 {
        let (s, per) = silhouette(points, &labels)?;
        (Some(s), per)
    } else {
        (None, Vec::new())
    };
    Ok(ClusterAssignment {
        k,
        labels,
        centroids,
        inertia,
        silhouette,
        sample_silhouettes,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_rows(points: &DenseMatrix) -> usize {
    let mut rows: Vec<Vec<u64>> = (0..points.rows())
        .map(|i| points.row(i).iter().map(|v| v.to_bits()).collect())
        .collect();
    rows.sort();
    rows.dedup();
    rows.len()
}

fn plus_plus(points: &DenseMatrix, k: usize, rng: &mut impl Rng) -> Result<DenseMatrix> {
    let n = points.rows();
    let d = points.cols();
    let mut centroids = DenseMatrix::zeros(k, d);
    let first = rng.random_range(0..n);
    centroids_set_row(&mut centroids, 0, points.row(first));
    let mut dist: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), points.row(first)))
        .collect();
    for c in 1..k {
        let chosen = match WeightedIndex::new(&dist) {
            Ok(w) => w.sample(rng),
            Err(_) => {
                return Err(Error::EmptyClusterUnrecoverable {
                    k,
                    distinct: distinct_rows(points),
                })
            }
        };
        centroids_set_row(&mut centroids, c, points.row(chosen));
        for (i, di) in dist.iter_mut().enumerate() {
            *di = di.min(sq_dist(points.row(i), points.row(chosen)));
        }
    }
    Ok(centroids)
}

fn centroids_set_row(m: &mut DenseMatrix, r: usize, row: &[f64]) {
    for (c, &v) in row.iter().enumerate() {
        m.set(r, c, v);
    }
}

/// Assigns every point to its nearest centroid (lowest index on ties) and
/// returns the inertia.
fn assign(
    points: &DenseMatrix,
    centroids: &DenseMatrix,
    labels: &mut [usize],
    dists: &mut [f64],
) -> f64 {
    let mut inertia = 0.0;
    for i in 0..points.rows() {
        let p = points.row(i);
        let (best, bd) = (0..centroids.rows())
            .map(|c| (c, sq_dist(p, centroids.row(c))))
            .fold(
                (0, f64::INFINITY),
                |acc, cand| if cand.1 < acc.1 { cand } else { acc },
            );
        labels[i] = best;
        dists[i] = bd;
        inertia += bd;
    }
    inertia
}

fn lloyd(
    points: &DenseMatrix,
    k: usize,
    cfg: &KMeansConfig,
    rng: &mut impl Rng,
) -> Result<(Vec<usize>, DenseMatrix, f64)> {
    let n = points.rows();
    let d = points.cols();
    let mut centroids = plus_plus(points, k, rng)?;
    let mut labels = vec![0; n];
    let mut dists = vec![0.0; n];
    let mut inertia = assign(points, &centroids, &mut labels, &mut dists);
    for _ in 0..cfg.max_iter {
        let mut sums = DenseMatrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (c, &v) in points.row(i).iter().enumerate() {
                let cur = sums.get(labels[i], c);
                sums.set(labels[i], c, cur + v);
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    centroids.set(c, j, sums.get(c, j) / counts[c] as f64);
                }
            }
        }
        fill_empty(
            points,
            k,
            &mut counts,
            &mut labels,
            &mut dists,
            &mut centroids,
        )?;
        let next = assign(points, &centroids, &mut labels, &mut dists);
        let done = inertia - next <= cfg.tol * inertia.max(f64::MIN_POSITIVE);
        inertia = next;
        if done {
            break;
        }
    }
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&l| counts[l] += 1);
    if counts.contains(&0) {
        fill_empty(
            points,
            k,
            &mut counts,
            &mut labels,
            &mut dists,
            &mut centroids,
        )?;
        inertia = dists.iter().sum();
    }
    Ok((labels, centroids, inertia))
}

/// Re-seeds every empty cluster at the point farthest from its centroid,
/// taken from a cluster that can spare it.
fn fill_empty(
    points: &DenseMatrix,
    k: usize,
    counts: &mut [usize],
    labels: &mut [usize],
    dists: &mut [f64],
    centroids: &mut DenseMatrix,
) -> Result<()> {
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let (far, fd) = dists
            .iter()
            .enumerate()
            .filter(|(i, _)| counts[labels[*i]] > 1)
            .fold(
                (usize::MAX, 0.0),
                |acc, (i, &di)| if di > acc.1 { (i, di) } else { acc },
            );
        if far == usize::MAX || fd == 0.0 {
            return Err(Error::EmptyClusterUnrecoverable {
                k,
                distinct: distinct_rows(points),
            });
        }
        counts[labels[far]] -= 1;
        counts[c] = 1;
        labels[far] = c;
        dists[far] = 0.0;
        centroids_set_row(centroids, c, points.row(far));
    }
    Ok(())
}

/// Euclidean silhouette. Singleton clusters score 0.
pub fn silhouette(points: &DenseMatrix, labels: &[usize]) -> Result<(f64, Vec<f64>)> {
    let n = points.rows();
    if labels.len() != n {
        return Err(Error::shape(format!(
            "{} labels for {n} points",
            labels.len()
        )));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::SingleCluster);
    }
    let mut per = vec![0.0; n];
    let mut sums = vec![0.0; k];
    for i in 0..n {
        if sizes[labels[i]] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if i != j {
                sums[labels[j]] += sq_dist(points.row(i), points.row(j)).sqrt();
            }
        }
        let own = labels[i];
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        per[i] = if denom > 0.0 { (b - a) / denom } else { 0.0 };
    }
    let overall = per.iter().sum::<f64>() / n as f64;
    Ok((overall, per))
}

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::shape("labelings differ in length"));
    }
    let n = x.len();
    let kx = x.iter().max().map_or(0, |m| m + 1);
    let ky = y.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; ky]; kx];
    for (&a, &b) in x.iter().zip(y) {
        table[a][b] += 1;
    }
    let pairs = |v: u64| (v * v.saturating_sub(1)) as f64 / 2.0;
    let index: f64 = table.iter().flatten().map(|&v| pairs(v)).sum();
    let rows: f64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let cols: f64 = (0..ky)
        .map(|c| pairs(table.iter().map(|r| r[c]).sum()))
        .sum();
    let total = pairs(n as u64);
    let expected = rows * cols / total;
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Two-cluster 1-D k-means on one factor column; `true` marks the cluster
/// with the higher centroid.
pub fn intra_component_membership(a: &DenseMatrix, component: usize) -> Result<Vec<bool>> {
    if component >= a.cols() {
        return Err(Error::InvalidArgument(format!(
            "component {component} out of range for {} columns",
            a.cols()
        )));
    }
    let col = a.column(component);
    let lo0 = col.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi0 = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo0 == hi0 {
        return Err(Error::ConstantColumn(component));
    }
    let (mut lo, mut hi) = (lo0, hi0);
    let mut members: Vec<bool> = Vec::new();
    for _ in 0..1000 {
        let mid = 0.5 * (lo + hi);
        let next: Vec<bool> = col.iter().map(|&v| v > mid).collect();
        if next == members {
            break;
        }
        members = next;
        let mean = |flag: bool| {
            let (s, c) = col
                .iter()
                .zip(&members)
                .filter(|(_, &m)| m == flag)
                .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
            s / c as f64
        };
        lo = mean(false);
        hi = mean(true);
    }
    Ok(members)
}

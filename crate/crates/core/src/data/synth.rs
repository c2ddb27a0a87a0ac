use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::normalize::normalize_minmax;
use super::record::{Dataset, DatasetOptions, MatchRecord, DEFAULT_ARENA_ID, N_FEATURES};
use crate::cp::FactorModel;
use crate::error::{Error, Result};
use crate::tensor::{frobenius_norm, DenseMatrix, DenseTensor3};

/// Recipe for a synthetic match dataset with a planted CP structure.
///
/// Player group `g` loads mainly on component `g`, whose feature loadings
/// are nonzero exactly on `signatures[g]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_players: usize,
    pub matches: usize,
    pub rank: usize,
    /// Feature indices loading on each component.
    pub signatures: Vec<Vec<usize>>,
    /// Players per group, one group per component.
    pub group_sizes: Vec<usize>,
    /// Gaussian noise standard deviation relative to the tensor's RMS.
    pub noise: f64,
    pub seed: u64,
    /// Added to 0.5 to give each group's per-match win probability.
    pub win_bias: Vec<f64>,
    /// Keep the latent tensor unrounded for the pipeline.
    pub exact: bool,
    /// Count units per latent unit, by feature.
    pub feature_scale: [f64; N_FEATURES],
    /// Upper bound of a player's loading on other groups' components.
    pub cross_membership: f64,
    pub arena_id: i64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_players: 961,
            matches: 100,
            rank: 3,
            signatures: vec![vec![0, 3], vec![2, 3], vec![1, 2, 3]],
            group_sizes: vec![411, 304, 246],
            noise: 0.05,
            seed: 0,
            win_bias: vec![0.0, 0.01, -0.01],
            exact: false,
            feature_scale: [30.0, 15.0, 20.0, 20000.0],
            cross_membership: 0.15,
            arena_id: DEFAULT_ARENA_ID,
        }
    }
}

impl SyntheticSpec {
    /// A single group of `n_players` on one component loading every feature.
    pub fn single_group(n_players: usize, matches: usize, seed: u64) -> Self {
        Self {
            n_players,
            matches,
            rank: 1,
            signatures: vec![(0..N_FEATURES).collect()],
            group_sizes: vec![n_players],
            noise: 0.0,
            seed,
            win_bias: vec![0.0],
            exact: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.rank == 0 || self.n_players == 0 || self.matches == 0 {
            return bad("rank, n_players and matches must be positive".into());
        }
        if self.signatures.len() != self.rank || self.group_sizes.len() != self.rank {
            return bad(format!(
                "{} signatures and {} group sizes for rank {}",
                self.signatures.len(),
                self.group_sizes.len(),
                self.rank
            ));
        }
        if self.group_sizes.iter().sum::<usize>() != self.n_players {
            return bad(format!(
                "group sizes {:?} do not sum to {} players",
                self.group_sizes, self.n_players
            ));
        }
        if self.group_sizes.contains(&0) {
            return bad("every group needs at least one player".into());
        }
        for (r, s) in self.signatures.iter().enumerate() {
            if s.is_empty() || s.iter().any(|&f| f >= N_FEATURES) {
                return bad(format!(
                    "signature {r} must name features in 0..{N_FEATURES}"
                ));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!(
                "noise must be a finite value >= 0, got {}",
                self.noise
            ));
        }
        if !self.win_bias.is_empty() && self.win_bias.len() != self.rank {
            return bad(format!(
                "{} win biases for {} groups",
                self.win_bias.len(),
                self.rank
            ));
        }
        if self
            .win_bias
            .iter()
            .any(|b| !(0.0..=1.0).contains(&(0.5 + b)))
        {
            return bad("0.5 + win bias must lie in [0, 1]".into());
        }
        if self
            .feature_scale
            .iter()
            .any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return bad("feature scales must be positive".into());
        }
        if !(self.cross_membership >= 0.0 && self.cross_membership.is_finite()) {
            return bad("cross membership must be >= 0".into());
        }
        Ok(())
    }

    fn bias(&self, g: usize) -> f64 {
        self.win_bias.get(g).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub spec: SyntheticSpec,
    pub dataset: Dataset,
    /// Planted factors with unit-norm columns, component `g` for group `g`.
    pub truth: FactorModel,
    /// Group of each player in dataset order.
    pub labels: Vec<usize>,
    /// Reconstruction plus clipped noise, before scaling and rounding.
    pub latent: DenseTensor3,
}

impl SyntheticData {
    /// The tensor the pipeline should factor: the latent tensor in exact
    /// mode, the normalized counts otherwise.
    pub fn tensor(&self) -> Result<DenseTensor3> {
        if self.spec.exact {
            Ok(self.latent.clone())
        } else {
            Ok(normalize_minmax(&self.dataset)?.tensor)
        }
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, k, rank) = (spec.n_players, spec.matches, spec.rank);

    let mut labels: Vec<usize> = spec
        .group_sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &s)| std::iter::repeat_n(g, s))
        .collect();
    labels.shuffle(&mut rng);

    let a = DenseMatrix::from_fn(n, rank, |i, r| {
        let u: f64 = rng.random();
        if labels[i] == r {
            1.0 + 0.5 * u
        } else {
            spec.cross_membership * u
        }
    });
    let b = DenseMatrix::from_fn(N_FEATURES, rank, |f, r| {
        if spec.signatures[r].contains(&f) {
            1.0
        } else {
            0.0
        }
    });
    let phases: Vec<f64> = (0..rank)
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect();
    let c = DenseMatrix::from_fn(k, rank, |t, r| {
        let x = t as f64 / k as f64;
        1.0 + 0.3 * (std::f64::consts::TAU * (r + 1) as f64 * x + phases[r]).sin() + 0.1 * x
    });
    let planted = FactorModel::from_factors(vec![1.0; rank], a, b, c)?;
    let mut latent = planted.reconstruct()?;
    if spec.noise > 0.0 {
        add_noise(&mut latent, spec.noise, &mut rng);
    }

    let mut records = Vec::with_capacity(n * k);
    let width = (n - 1).to_string().len();
    for (i, &g) in labels.iter().enumerate() {
        let player_id = format!("p{i:0width$}");
        let p_win = 0.5 + spec.bias(g);
        for t in 0..k {
            let count = |f: usize| (latent.get(i, f, t) * spec.feature_scale[f]).round() as u64;
            records.push(MatchRecord {
                player_id: player_id.clone(),
                match_index: t as u32,
                assists: count(0),
                deaths: count(1),
                kills: count(2),
                gold: count(3),
                winner: rng.random::<f64>() < p_win,
                arena_id: spec.arena_id,
            });
        }
    }
    let dataset = Dataset::from_records(
        records,
        &DatasetOptions {
            arena_id: Some(spec.arena_id),
            matches: k,
        },
    )?;
    Ok(SyntheticData {
        spec: spec.clone(),
        dataset,
        truth: unit_columns(&planted),
        labels,
        latent,
    })
}

/// Adds `N(0, sigma^2)` noise with `sigma = level * rms(t)` and clips at 0.
pub fn add_noise(t: &mut DenseTensor3, level: f64, rng: &mut impl Rng) {
    let (di, dj, dk) = t.dims();
    let rms = frobenius_norm(t) / ((di * dj * dk) as f64).sqrt();
    let sigma = level * rms;
    for i in 0..di {
        for j in 0..dj {
            for k in 0..dk {
                let e: f64 = StandardNormal.sample(rng);
                t.set(i, j, k, (t.get(i, j, k) + sigma * e).max(0.0));
            }
        }
    }
}

/// Moves column norms into `lambda` without reordering components.
fn unit_columns(m: &FactorModel) -> FactorModel {
    let mut out = m.clone();
    for r in 0..m.rank {
        for f in [&mut out.a, &mut out.b, &mut out.c] {
            let col = f.column(r);
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            out.lambda[r] *= norm;
            f.set_column(r, &col.iter().map(|v| v / norm).collect::<Vec<_>>());
        }
    }
    out
}

/// Removes the components along each vector of an orthonormal `basis`.
fn orthogonalize(basis: &[Vec<f64>], v: &mut [f64]) {
    for q in basis {
        let dot: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        for (x, y) in v.iter_mut().zip(q) {
            *x -= dot * y;
        }
    }
}

/// Norm of `v` outside `span(basis)` relative to its own norm; 0 for `v = 0`.
fn span_residual(basis: &[Vec<f64>], v: &[f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let mut e = v.to_vec();
    orthogonalize(basis, &mut e);
    e.iter().map(|x| x * x).sum::<f64>().sqrt() / norm
}

/// Exact low-rank non-negative tensor with sparse-ish random factors.
#[derive(Debug, Clone)]
pub struct Planted {
    pub tensor: DenseTensor3,
    /// Unit-norm factors; `tensor` is their exact reconstruction.
    pub truth: FactorModel,
}

/// Each factor entry is zero with probability `sparsity`, else uniform on
/// `[0.2, 1]`. A column is redrawn while it lies in the span of the earlier
/// columns of its factor (when the factor has room for another direction),
/// so every factor has full column rank up to `min(rows, rank)` and the
/// planted model is essentially unique.
pub fn planted_tensor(
    dims: (usize, usize, usize),
    rank: usize,
    sparsity: f64,
    seed: u64,
) -> Result<Planted> {
    if rank == 0 || dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
        return Err(Error::InvalidArgument(
            "rank and dimensions must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&sparsity) {
        return Err(Error::InvalidArgument(format!(
            "sparsity must lie in [0, 1), got {sparsity}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factor = |rows: usize| {
        let mut m = DenseMatrix::zeros(rows, rank);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for r in 0..rank {
            loop {
                let col: Vec<f64> = (0..rows)
                    .map(|_| {
                        if rng.random::<f64>() < sparsity {
                            0.0
                        } else {
                            rng.random_range(0.2..=1.0)
                        }
                    })
                    .collect();
                let dependent = if r < rows {
                    span_residual(&basis, &col) <= 1e-6
                } else {
                    col.iter().all(|&v| v == 0.0)
                };
                if !dependent {
                    if r < rows {
                        let mut e = col.clone();
                        orthogonalize(&basis, &mut e);
                        let n = e.iter().map(|v| v * v).sum::<f64>().sqrt();
                        basis.push(e.into_iter().map(|v| v / n).collect());
                    }
                    m.set_column(r, &col);
                    break;
                }
            }
        }
        m
    };
    let a = factor(dims.0);
    let b = factor(dims.1);
    let c = factor(dims.2);
    let truth = unit_columns(&FactorModel::from_factors(vec![1.0; rank], a, b, c)?);
    Ok(Planted {
        tensor: truth.reconstruct()?,
        truth,
    })
}

/// `sizes[g]` isotropic Gaussian points around each center.
pub fn gaussian_blobs(
    centers: &[Vec<f64>],
    sizes: &[usize],
    spread: f64,
    seed: u64,
) -> Result<(DenseMatrix, Vec<usize>)> {
    if centers.is_empty() || centers.len() != sizes.len() {
        return Err(Error::InvalidArgument(
            "one size per center required".into(),
        ));
    }
    let dim = centers[0].len();
    if centers.iter().any(|c| c.len() != dim) {
        return Err(Error::shape("centers differ in dimension"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (g, (c, &s)) in centers.iter().zip(sizes).enumerate() {
        for _ in 0..s {
            rows.push(
                c.iter()
                    .map(|&x| {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        x + spread * e
                    })
                    .collect(),
            );
            labels.push(g);
        }
    }
    Ok((DenseMatrix::from_rows(&rows)?, labels))
}

use serde::{Deserialize, Serialize};

use super::record::{Dataset, N_FEATURES};
use crate::error::{Error, Result};
use crate::tensor::DenseTensor3;

/// Which entries share one min/max pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NormScope {
    /// Per feature, across all players and matches.
    #[default]
    Global,
    /// Per feature and player, across that player's matches.
    PerPlayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

/// A feature (for one player under [`NormScope::PerPlayer`]) whose values
/// are all equal; it is mapped to zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantFeature {
    pub feature: usize,
    pub player: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub tensor: DenseTensor3,
    pub scope: NormScope,
    /// `ranges[g][f]` where `g` is 0 for global scope and the player otherwise.
    pub ranges: Vec<Vec<FeatureRange>>,
    pub constant: Vec<ConstantFeature>,
}

impl Normalized {
    fn range(&self, i: usize, j: usize) -> FeatureRange {
        match self.scope {
            NormScope::Global => self.ranges[0][j],
            NormScope::PerPlayer => self.ranges[i][j],
        }
    }

    /// Maps back to the original units. Constant features come back as their
    /// constant value.
    pub fn denormalize(&self) -> DenseTensor3 {
        DenseTensor3::from_fn(self.tensor.dims(), |i, j, k| {
            let r = self.range(i, j);
            r.min + self.tensor.get(i, j, k) * (r.max - r.min)
        })
    }
}

/// Raw counts as an `(I, 4, K)` tensor in dataset player order.
pub fn raw_tensor(d: &Dataset) -> DenseTensor3 {
    DenseTensor3::from_fn((d.n_players(), N_FEATURES, d.matches), |i, j, k| {
        d.player_records(i)[k].feature(j)
    })
}

/// Global min-max normalization of the dataset's features.
pub fn normalize_minmax(d: &Dataset) -> Result<Normalized> {
    normalize_tensor(&raw_tensor(d), NormScope::Global)
}

/// Min-max maps every mode-2 fibre group of `t` into `[0, 1]`.
pub fn normalize_tensor(t: &DenseTensor3, scope: NormScope) -> Result<Normalized> {
    let (di, dj, dk) = t.dims();
    if di == 0 || dj == 0 || dk == 0 {
        return Err(Error::InvalidArgument(
            "cannot normalize an empty tensor".into(),
        ));
    }
    let groups = match scope {
        NormScope::Global => 1,
        NormScope::PerPlayer => di,
    };
    let mut ranges = vec![
        vec![
            FeatureRange {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            };
            dj
        ];
        groups
    ];
    for i in 0..di {
        let g = if groups == 1 { 0 } else { i };
        for (j, r) in ranges[g].iter_mut().enumerate() {
            for k in 0..dk {
                let v = t.get(i, j, k);
                r.min = r.min.min(v);
                r.max = r.max.max(v);
            }
        }
    }
    let mut constant = Vec::new();
    for (g, row) in ranges.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            if r.max == r.min {
                constant.push(ConstantFeature {
                    feature: j,
                    player: (groups > 1).then_some(g),
                });
            }
        }
    }
    if !constant.is_empty() {
        tracing::warn!(count = constant.len(), "constant features mapped to zero");
    }
    let tensor = DenseTensor3::from_fn((di, dj, dk), |i, j, k| {
        let r = ranges[if groups == 1 { 0 } else { i }][j];
        let span = r.max - r.min;
        if span > 0.0 {
            ((t.get(i, j, k) - r.min) / span).clamp(0.0, 1.0)
        } else {
            0.0
        }
    });
    Ok(Normalized {
        tensor,
        scope,
        ranges,
        constant,
    })
}

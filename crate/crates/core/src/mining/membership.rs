use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DenseMatrix;

/// Squared values this close to the last retained one are kept with it.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSignature {
    pub component: usize,
    /// Retained `(feature index, membership value)`, largest first.
    pub retained: Vec<(usize, f64)>,
    /// Set when the column is identically zero.
    pub degenerate: bool,
}

impl ComponentSignature {
    pub fn indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.retained.iter().map(|(i, _)| *i).collect();
        idx.sort_unstable();
        idx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSignature {
    pub fraction: f64,
    pub components: Vec<ComponentSignature>,
}

impl FeatureSignature {
    /// The membership matrix with every non-retained entry zeroed.
    pub fn masked(&self, rows: usize) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rows, self.components.len());
        for sig in &self.components {
            for &(i, v) in &sig.retained {
                out.set(i, sig.component, v);
            }
        }
        out
    }
}

/// Per column, keeps the smallest set of largest entries whose squares reach
/// `fraction` of the column's squared norm.
pub fn feature_membership(b: &DenseMatrix, fraction: f64) -> Result<FeatureSignature> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    if b.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument(
            "membership matrix has negative entries".into(),
        ));
    }
    let components = (0..b.cols())
        .map(|r| column_signature(r, &b.column(r), fraction))
        .collect();
    Ok(FeatureSignature {
        fraction,
        components,
    })
}

fn column_signature(component: usize, col: &[f64], fraction: f64) -> ComponentSignature {
    let mut order: Vec<usize> = (0..col.len()).collect();
    order.sort_by(|&x, &y| {
        (col[y] * col[y])
            .total_cmp(&(col[x] * col[x]))
            .then(x.cmp(&y))
    });
    // Summing in the same order as the prefix keeps fraction = 1 exact.
    let total: f64 = order.iter().map(|&i| col[i] * col[i]).sum();
    if total == 0.0 {
        return ComponentSignature {
            component,
            retained: Vec::new(),
            degenerate: true,
        };
    }
    if fraction >= 1.0 {
        // Tiny entries vanish in the running sum; keep every nonzero one.
        let retained = order
            .iter()
            .filter(|&&i| col[i] != 0.0)
            .map(|&i| (i, col[i]))
            .collect();
        return ComponentSignature {
            component,
            retained,
            degenerate: false,
        };
    }
    let target = fraction * total;
    let mut retained = Vec::new();
    let mut acc = 0.0;
    let mut cut_sq = None;
    for &i in &order {
        let sq = col[i] * col[i];
        match cut_sq {
            None => {
                acc += sq;
                retained.push((i, col[i]));
                if acc >= target {
                    cut_sq = Some(sq);
                }
            }
            Some(last) if (last - sq).abs() <= TIE_TOL => retained.push((i, col[i])),
            Some(_) => break,
        }
    }
    ComponentSignature {
        component,
        retained,
        degenerate: false,
    }
}

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Grid extends this many bandwidths past the data range.
pub const KDE_GRID_PAD: f64 = 4.0;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Silverman's rule of thumb, `0.9 min(sd, IQR / 1.34) n^(-1/5)`, using the
/// standard deviation alone when the IQR is zero.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument("need at least two values".into()));
    }
    let sd = sample_variance(values).sqrt();
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (values.len() as f64).powf(-0.2))
}

/// Gaussian kernel density estimate of `values` evaluated at `grid`.
pub fn kde_gaussian(values: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument("need at least two values".into()));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {h}"
            )))
        }
        None => silverman_bandwidth(values)?,
    };
    let norm = INV_SQRT_2PI / (h * values.len() as f64);
    Ok(grid
        .iter()
        .map(|&x| {
            values
                .iter()
                .map(|&v| {
                    let z = (x - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect())
}

/// Evenly spaced grid covering the data range padded by
/// [`KDE_GRID_PAD`] bandwidths, fine enough (at most `h / 8` spacing, at
/// least `min_points` points) for trapezoid integration.
pub fn kde_grid(values: &[f64], bandwidth: f64, min_points: usize) -> Vec<f64> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min) - KDE_GRID_PAD * bandwidth;
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + KDE_GRID_PAD * bandwidth;
    let needed = ((hi - lo) / (bandwidth / 8.0)).ceil() as usize + 1;
    let n = needed.max(min_points).max(2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Trapezoid rule over a possibly uneven grid.
pub fn trapezoid(grid: &[f64], y: &[f64]) -> f64 {
    grid.windows(2)
        .zip(y.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Two-tailed p-value.
    pub p: f64,
    /// Both samples had zero variance; `t` and `p` are set by convention.
    pub degenerate: bool,
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom and a two-tailed p-value.
pub fn welch_t_test(x: &[f64], y: &[f64]) -> Result<WelchTest> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::InvalidArgument(
            "each sample needs at least two values".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mx, my) = (mean(x), mean(y));
    let (sx, sy) = (sample_variance(x) / nx, sample_variance(y) / ny);
    let se2 = sx + sy;
    if se2 == 0.0 {
        let (t, p) = if mx == my {
            (0.0, 1.0)
        } else {
            ((mx - my).signum() * f64::INFINITY, 0.0)
        };
        return Ok(WelchTest {
            t,
            df: nx + ny - 2.0,
            p,
            degenerate: true,
        });
    }
    let t = (mx - my) / se2.sqrt();
    let df = se2 * se2 / (sx * sx / (nx - 1.0) + sy * sy / (ny - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(WelchTest {
        t,
        df,
        p,
        degenerate: false,
    })
}

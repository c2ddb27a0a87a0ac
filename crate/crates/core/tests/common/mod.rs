//! Brute-force reference implementations used as test oracles. None of
//! these reuse the library's own kernels.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ntf_core::cp::FactorModel;
use ntf_core::tensor::{DenseMatrix, DenseTensor3};
use rand::Rng;

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

pub fn random_tensor(dims: (usize, usize, usize), rng: &mut impl Rng) -> DenseTensor3 {
    DenseTensor3::from_fn(dims, |_, _, _| rng.random::<f64>())
}

/// Unfolding by walking every entry and placing it at its Kolda-Bader
/// position.
pub fn unfold_loops(t: &DenseTensor3, mode: usize) -> Vec<Vec<f64>> {
    let (di, dj, dk) = t.dims();
    let (rows, cols) = match mode {
        1 => (di, dj * dk),
        2 => (dj, di * dk),
        3 => (dk, di * dj),
        _ => panic!("bad mode"),
    };
    let mut m = vec![vec![f64::NAN; cols]; rows];
    for i in 0..di {
        for j in 0..dj {
            for k in 0..dk {
                let v = t.get(i, j, k);
                match mode {
                    1 => m[i][j + k * dj] = v,
                    2 => m[j][i + k * di] = v,
                    _ => m[k][i + j * di] = v,
                }
            }
        }
    }
    m
}

/// Column-wise Kronecker product, column by column.
pub fn khatri_rao_loops(a: &DenseMatrix, b: &DenseMatrix) -> Vec<Vec<f64>> {
    let r = a.cols();
    let mut out = vec![vec![0.0; r]; a.rows() * b.rows()];
    for c in 0..r {
        let kron: Vec<f64> = (0..a.rows())
            .flat_map(|ia| (0..b.rows()).map(move |ib| (ia, ib)))
            .map(|(ia, ib)| a.get(ia, c) * b.get(ib, c))
            .collect();
        for (row, v) in kron.into_iter().enumerate() {
            out[row][c] = v;
        }
    }
    out
}

/// `x_ijk = sum_r lambda_r a_ir b_jr c_kr` by explicit summation.
pub fn reconstruct_loops(model: &FactorModel) -> DenseTensor3 {
    let (di, dj, dk) = model.dims();
    let mut values = Vec::with_capacity(di * dj * dk);
    for i in 0..di {
        for j in 0..dj {
            for k in 0..dk {
                let mut s = 0.0;
                for r in 0..model.rank {
                    s +=
                        model.lambda[r] * model.a.get(i, r) * model.b.get(j, r) * model.c.get(k, r);
                }
                values.push(s);
            }
        }
    }
    DenseTensor3::from_vec((di, dj, dk), values).unwrap()
}

/// Solves `min 0.5 x'Gx - b'x, x >= 0` by trying every passive set and
/// keeping the feasible KKT point with the lowest objective.
pub fn nnls_exhaustive(gram: &DenseMatrix, rhs: &[f64]) -> Vec<f64> {
    let n = gram.rows();
    let g = DMatrix::from_fn(n, n, |r, c| gram.get(r, c));
    let b = DVector::from_column_slice(rhs);
    let objective = |x: &DVector<f64>| 0.5 * x.dot(&(&g * x)) - b.dot(x);
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << n) {
        let passive: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let mut x = DVector::zeros(n);
        if !passive.is_empty() {
            let gp = DMatrix::from_fn(passive.len(), passive.len(), |r, c| {
                g[(passive[r], passive[c])]
            });
            let bp = DVector::from_fn(passive.len(), |r, _| b[passive[r]]);
            let Some(sol) = gp.lu().solve(&bp) else {
                continue;
            };
            if sol.iter().any(|&v| v < -1e-12) {
                continue;
            }
            for (idx, &v) in passive.iter().enumerate() {
                x[v] = sol[idx].max(0.0);
            }
        }
        let grad = &g * &x - &b;
        let scale = 1.0 + b.amax();
        if (0..n).any(|v| mask & (1 << v) == 0 && grad[v] < -1e-10 * scale) {
            continue;
        }
        let f = objective(&x);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, x));
        }
    }
    best.expect("a strictly convex problem has a KKT point")
        .1
        .iter()
        .copied()
        .collect()
}

/// Least-squares Tucker core by solving the full Kronecker system
/// `vec(X) = (C kron B kron A') g` with `A' = A diag(lambda)`.
pub fn core_by_kronecker(t: &DenseTensor3, model: &FactorModel) -> Vec<f64> {
    let (di, dj, dk) = t.dims();
    let r = model.rank;
    let rows = di * dj * dk;
    let cols = r * r * r;
    let mut m = DMatrix::zeros(rows, cols);
    let mut y = DVector::zeros(rows);
    for i in 0..di {
        for j in 0..dj {
            for k in 0..dk {
                let row = (i * dj + j) * dk + k;
                y[row] = t.get(i, j, k);
                for p in 0..r {
                    for q in 0..r {
                        for s in 0..r {
                            let col = (p * r + q) * r + s;
                            m[(row, col)] = model.lambda[p]
                                * model.a.get(i, p)
                                * model.b.get(j, q)
                                * model.c.get(k, s);
                        }
                    }
                }
            }
        }
    }
    let svd = m.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    svd.solve(&y, eps).unwrap().iter().copied().collect()
}

pub fn corcondia_by_kronecker(t: &DenseTensor3, model: &FactorModel) -> f64 {
    let r = model.rank;
    let g = core_by_kronecker(t, model);
    let mut ss = 0.0;
    for p in 0..r {
        for q in 0..r {
            for s in 0..r {
                let ideal = if p == q && q == s { 1.0 } else { 0.0 };
                let d = g[(p * r + q) * r + s] - ideal;
                ss += d * d;
            }
        }
    }
    100.0 * (1.0 - ss / r as f64)
}

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn student_t_pdf(x: f64, df: f64) -> f64 {
    let ln_norm =
        ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_norm - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// Two-tailed tail probability `2 P(T > |t|)` by composite Simpson
/// integration of the density over `[0, |t|]`.
pub fn t_two_tailed_quadrature(t: f64, df: f64) -> f64 {
    let upper = t.abs();
    if upper == 0.0 {
        return 1.0;
    }
    let n = 200_000;
    let h = upper / n as f64;
    let mut s = student_t_pdf(0.0, df) + student_t_pdf(upper, df);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * student_t_pdf(i as f64 * h, df);
    }
    let half_mass = s * h / 3.0;
    (1.0 - 2.0 * half_mass).max(0.0)
}

/// Welch statistic, degrees of freedom and quadrature p-value computed from
/// first principles.
pub fn welch_oracle(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let stats = |v: &[f64]| {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0);
        (n, m, var)
    };
    let (nx, mx, vx) = stats(x);
    let (ny, my, vy) = stats(y);
    let (qx, qy) = (vx / nx, vy / ny);
    let t = (mx - my) / (qx + qy).sqrt();
    let df = (qx + qy).powi(2) / (qx * qx / (nx - 1.0) + qy * qy / (ny - 1.0));
    (t, df, t_two_tailed_quadrature(t, df))
}

/// Best two-group split of 1-D values by exhaustive search over sorted cut
/// points; returns membership of the upper group.
pub fn best_split_1d(values: &[f64]) -> Vec<bool> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sse = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
    };
    let mut best = (f64::INFINITY, 0.0);
    for cut in 1..sorted.len() {
        if sorted[cut] == sorted[cut - 1] {
            continue;
        }
        let cost = sse(&sorted[..cut]) + sse(&sorted[cut..]);
        if cost < best.0 {
            best = (cost, 0.5 * (sorted[cut - 1] + sorted[cut]));
        }
    }
    values.iter().map(|&v| v > best.1).collect()
}

/// Product of per-mode absolute cosines between two rank-one components.
pub fn congruence(x: &FactorModel, rx: usize, y: &FactorModel, ry: usize) -> f64 {
    let cos = |p: &DenseMatrix, q: &DenseMatrix| {
        let (u, v) = (p.column(rx), q.column(ry));
        let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        (dot / (nu * nv)).abs()
    };
    cos(&x.a, &y.a) * cos(&x.b, &y.b) * cos(&x.c, &y.c)
}

/// Random least-squares data `G` (6x4) and `Y` (6 x n_rhs) with Gaussian
/// entries, redrawn until `G` has condition number at most 100.
pub fn well_conditioned_ls(n_rhs: usize, rng: &mut impl Rng) -> (DenseMatrix, DenseMatrix) {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let g = DenseMatrix::from_fn(6, 4, |_, _| StandardNormal.sample(rng));
        let sv = DMatrix::from_row_slice(6, 4, g.values()).singular_values();
        if sv.max() / sv.min() > 100.0 {
            continue;
        }
        let y = DenseMatrix::from_fn(6, n_rhs, |_, _| StandardNormal.sample(rng));
        return (g, y);
    }
}

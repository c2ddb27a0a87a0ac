//! Small dense solves used by the NNLS kernel and the core-consistency
//! diagnostic.

use nalgebra::DMatrix;

use crate::tensor::DenseMatrix;

/// In-place Cholesky factor `L` (lower triangle, row-major `n x n`) of an SPD
/// matrix. Returns `None` on a non-positive pivot.
pub(crate) fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            d -= l[j * n + p] * l[j * n + p];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= l[i * n + p] * l[j * n + p];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky`].
pub(crate) fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * n + p] * b[p];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for p in i + 1..n {
            s -= l[p * n + i] * b[p];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Moore-Penrose pseudoinverse via SVD, discarding singular values below
/// `rel_tol * sigma_max`.
pub fn pseudo_inverse(m: &DenseMatrix, rel_tol: f64) -> DenseMatrix {
    let (rows, cols) = m.shape();
    let a = DMatrix::from_row_slice(rows, cols, m.values());
    let svd = a.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * sigma_max;
    let mut out = DenseMatrix::zeros(cols, rows);
    for (s, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        let inv = 1.0 / sigma;
        for r in 0..cols {
            let vr = v_t[(s, r)] * inv;
            if vr == 0.0 {
                continue;
            }
            for c in 0..rows {
                let cur = out.get(r, c);
                out.set(r, c, cur + vr * u[(c, s)]);
            }
        }
    }
    out
}

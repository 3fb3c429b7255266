//! Dense linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use super::Real;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative singular-value threshold used for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

fn padded(m: &Mat) -> Mat {
    if m.nrows() >= m.ncols() {
        return m.clone();
    }
    let mut p = Mat::zeros(m.ncols(), m.ncols());
    p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    p
}

/// Singular values in decreasing order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// 2-norm condition number; infinite for rank-deficient or non-square input.
pub fn cond(m: &Mat) -> f64 {
    if m.nrows() != m.ncols() || m.is_empty() {
        return f64::INFINITY;
    }
    let s = singular_values(m);
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if lo == 0.0 || !hi.is_finite() {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Orthonormal basis (as columns) of the right nullspace of `m`, using the
/// threshold `rel_tol · σ_max`.
pub fn nullspace(m: &Mat, rel_tol: f64) -> Mat {
    let c = m.ncols();
    if m.nrows() == 0 || m.iter().all(|v| *v == 0.0) {
        return Mat::identity(c, c);
    }
    let svd = padded(m).svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let cols: Vec<Vector> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= rel_tol * smax)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        Mat::zeros(c, 0)
    } else {
        Mat::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space of `m`.
pub fn column_space(m: &Mat, rel_tol: f64) -> Mat {
    if m.ncols() == 0 {
        return Mat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.max();
    let cols: Vec<Vector> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax && smax > 0.0)
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        Mat::zeros(m.nrows(), 0)
    } else {
        Mat::from_columns(&cols)
    }
}

/// Numerical rank with the relative threshold.
pub fn rank(m: &Mat, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(0.0) => 0,
        Some(&smax) => s.iter().filter(|&&v| v > rel_tol * smax).count(),
    }
}

/// Solves `a·x = b` for square `a` by LU with partial pivoting.
pub fn solve(a: &Mat, b: &Mat) -> Option<Mat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return None;
    }
    let x = a.clone().lu().solve(b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    solve(a, &Mat::identity(a.nrows(), a.nrows()))
}

/// Least-squares solution of `a·x ≈ b` via SVD.
pub fn lstsq(a: &Mat, b: &Mat) -> Mat {
    let svd = a.clone().svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    svd.solve(b, eps).expect("u and v_t were computed")
}

/// Moore–Penrose pseudo-inverse.
pub fn pinv(a: &Mat) -> Mat {
    lstsq(a, &Mat::identity(a.nrows(), a.nrows()))
}

/// Horizontal concatenation `[a | b | …]`.
pub fn hstack(blocks: &[&Mat]) -> Mat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// Vertical concatenation.
pub fn vstack(blocks: &[&Mat]) -> Mat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Basis of `span(a) ∩ span(b)` expressed through `a`: returns `c` such
/// that the columns of `a·c` span the intersection.
pub fn intersection_coeffs(a: &Mat, b: &Mat, rel_tol: f64) -> Mat {
    let joint = hstack(&[a, &(-b)]);
    let ns = nullspace(&joint, rel_tol);
    let ca = ns.rows(0, a.ncols()).into_owned();
    // The intersection dimension equals the nullspace dimension when both
    // inputs have full column rank; re-orthonormalize the a-coefficients.
    column_space(&ca, rel_tol)
}

/// Solves `a·x = b` for a square row-major system over any [`Real`]
/// (Gaussian elimination with partial pivoting on the real part).
pub fn solve_t<T: Real>(a: &[T], n: usize, b: &[T], m: usize) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * m);
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i * n + k].re().abs().total_cmp(&a[j * n + k].re().abs()))?;
        if a[p * n + k].re() == 0.0 {
            return None;
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            for c in 0..m {
                b.swap(k * m + c, p * m + c);
            }
        }
        let piv = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            for c in k..n {
                let v = a[k * n + c];
                a[i * n + c] -= f * v;
            }
            for c in 0..m {
                let v = b[k * m + c];
                b[i * m + c] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        for c in 0..m {
            let mut s = b[k * m + c];
            for j in k + 1..n {
                s -= a[k * n + j] * b[j * m + c];
            }
            b[k * m + c] = s / a[k * n + k];
        }
    }
    Some(b)
}

/// Inverse of a row-major square matrix over any [`Real`].
pub fn inverse_t<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut id = vec![T::zero(); n * n];
    for i in 0..n {
        id[i * n + i] = T::one();
    }
    solve_t(a, n, &id, n)
}

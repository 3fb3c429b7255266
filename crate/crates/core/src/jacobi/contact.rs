//! Splitting of a unit-speed Jacobi curve into its contact part and the
//! line spanned by `C − tS`.

use super::transport::{jacobi_frame, OrbitData};
use crate::error::{GeomError, Result};
use crate::fanning::{invariants, FanningInvariants, FrameCurve, FrameTriple, StencilSpec, SymplecticForm};
use crate::finsler::{legendre, spray, MetricSpec, PhasePoint};
use crate::numkit::{
    central_derivative, central_second_derivative, gradient, hstack, inverse, max_abs, nullspace, Mat, Real,
    ScalarField, Stencil, Vector, RANK_TOL,
};

/// Result of [`contact_reduce`] at one instant.
#[derive(Clone, Debug)]
pub struct ContactSplit {
    pub t: f64,
    /// Frame of `ℓ^c(t)`, `2n × (n−1)`, in tangent coordinates at `v0`.
    pub lc: Mat,
    /// `r(t)` as found in the Jacobi curve.
    pub r: Vector,
    /// `C − tS` from the data at `v0`.
    pub r_expected: Vector,
    /// `‖K(t)r(t)‖ / ‖r(t)‖`.
    pub k_residual: f64,
    /// `|W(ℓ^c, r)|` relative to `|W|`.
    pub orth_residual: f64,
    /// Distance of `ℓ^c` from `ker α ∩ TΣ`.
    pub contact_residual: f64,
    /// `K` on `ℓ^c` in the frame `lc`, computed on the full curve.
    pub block_full: Mat,
    /// Same block from the reduced curve in `ker α ∩ TΣ`.
    pub block_reduced: Mat,
    /// Component of `K·ℓ^c` along `r`; zero in exact arithmetic.
    pub r_leak: f64,
}

struct FinslerInX<'a> {
    m: &'a MetricSpec,
    y: &'a [f64],
}

impl ScalarField for FinslerInX<'_> {
    fn eval<T: Real>(&self, x: &[T]) -> T {
        let y: Vec<T> = self.y.iter().map(|&v| T::cst(v)).collect();
        self.m.finsler_t(x, &y)
    }
}

/// Basis of `ker α ∩ TΣ` at `v0`, `α = ℒ(v0)·dx`, `Σ = {F = F(v0)}`.
fn contact_basis(m: &MetricSpec, v0: &PhasePoint) -> Result<Mat> {
    let n = v0.n();
    let l = legendre(m, v0)?;
    let f = m.finsler(v0)?;
    let (_, fx) = gradient(&FinslerInX { m, y: &v0.y }, &v0.x);
    let mut c = Mat::zeros(2, 2 * n);
    for i in 0..n {
        c[(0, i)] = l[i];
        c[(1, i)] = fx[i];
        c[(1, n + i)] = l[i] / f;
    }
    let b = nullspace(&c, RANK_TOL);
    if b.ncols() != 2 * n - 2 {
        return Err(GeomError::RankDeficient);
    }
    Ok(b)
}

/// The contact part of the Jacobi curve as a curve in `ker α ∩ TΣ`, in the
/// orthonormal basis `b`.
struct ContactCurve<'a> {
    orbit: &'a OrbitData,
    e: Mat,
    b: Mat,
    omega: SymplecticForm,
}

impl ContactCurve<'_> {
    /// `Q(t) = iota·(I − y ℒᵀ/F²)·E`, so that `A(t)Q(t)` frames `ℓ^c(t)`.
    fn q(&self, node: &super::OrbitNode) -> Result<Mat> {
        let n = self.orbit.n();
        let l = Vector::from_vec(legendre(&self.orbit.metric, &node.point)?);
        let y = Vector::from_column_slice(&node.point.y);
        let p = Mat::identity(n, n) - &y * l.transpose() / l.dot(&y);
        Ok(&node.iota * p * &self.e)
    }

    fn full_frame(&self, t: f64) -> Result<([Mat; 3], Mat)> {
        let (ft, node) = self.orbit.frame_at(t)?;
        let w = self.orbit.window(t, 2)?;
        let qs = w.iter().map(|nd| self.q(nd)).collect::<Result<Vec<_>>>()?;
        let st = Stencil::new(t, self.orbit.dt, 4)?;
        let qd = central_derivative(&qs, &st)?;
        let qdd = central_second_derivative(&qs, &st)?;
        let q = self.q(&node)?;
        let a = &ft.a * &q;
        let adot = &ft.adot * &q + &ft.a * &qd;
        let addot = &ft.addot * &q + &ft.adot * &qd * 2.0 + &ft.a * &qdd;
        Ok(([a, adot, addot], q))
    }
}

impl FrameCurve for ContactCurve<'_> {
    fn dim(&self) -> usize {
        self.orbit.n() - 1
    }

    fn frame(&self, t: f64) -> Result<FrameTriple> {
        let ([a, adot, addot], _) = self.full_frame(t)?;
        let bt = self.b.transpose();
        FrameTriple::new(&bt * a, &bt * adot, &bt * addot)
    }

    fn omega(&self) -> Option<&SymplecticForm> {
        Some(&self.omega)
    }
}

/// Splits the Jacobi curve of a unit vector at `t` into `ℓ^c(t)` and
/// `span[r(t)]`, and compares `K` on `ℓ^c` with the Jacobi endomorphism of
/// the reduced curve.
pub fn contact_reduce(orbit: &OrbitData, t: f64) -> Result<ContactSplit> {
    let m = &orbit.metric;
    let v0 = &orbit.v0;
    let n = orbit.n();
    let f0 = m.finsler(v0)?;
    if (f0 - 1.0).abs() > 1e-9 {
        return Err(GeomError::NotUnitSpeed(f0));
    }
    let l0 = Mat::from_row_slice(1, n, &legendre(m, v0)?);
    let e = nullspace(&l0, RANK_TOL);
    let b = contact_basis(m, v0)?;
    let omega = SymplecticForm::new(b.transpose() * orbit.omega0.matrix() * &b)?;
    let curve = ContactCurve { orbit, e, b, omega };

    let sample = jacobi_frame(orbit, t)?;
    let full: FanningInvariants = sample.invariants(&orbit.omega0)?;
    let ([ca, ..], q) = curve.full_frame(t)?;
    let qr = &sample.iota * Vector::from_column_slice(&sample.point.y);
    let r = &sample.frame.a * &qr;

    let (dx, dy) = spray(m).eval(&v0.x, &v0.y)?;
    let mut r_expected = Vector::zeros(2 * n);
    for i in 0..n {
        r_expected[i] = -t * dx[i];
        r_expected[n + i] = v0.y[i] - t * dy[i];
    }

    let kl = full.k_ell();
    let w = full.w.clone().expect("Wronskian requested");
    let k_r = &sample.frame.a * (&kl * &qr);
    let k_residual = k_r.norm() / r.norm();
    let orth_residual = (q.transpose() * &w * &qr).amax() / max_abs(&w);
    let proj = Mat::identity(2 * n, 2 * n) - &curve.b * curve.b.transpose();
    let contact_residual = max_abs(&(proj * &ca)) / max_abs(&ca);

    let basis = hstack(&[&q, &Mat::from_column_slice(n, 1, qr.as_slice())]);
    let coeffs = inverse(&basis).ok_or(GeomError::SingularTransform)? * &kl * &q;
    let block_full = coeffs.rows(0, n - 1).into_owned();
    let r_leak = max_abs(&coeffs.rows(n - 1, 1).into_owned());

    let st = StencilSpec { h: orbit.stencil_at(t).h, order: 4 };
    let red = invariants(&curve, t, st)?;
    Ok(ContactSplit {
        t,
        lc: ca,
        r,
        r_expected,
        k_residual,
        orth_residual,
        contact_residual,
        block_full,
        block_reduced: red.k_ell(),
        r_leak,
    })
}

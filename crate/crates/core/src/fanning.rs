//! Invariants of fanning curves in the Grassmannian of n-planes in ℝ²ⁿ.
//!
//! A curve is handled through a [`FrameTriple`] `(A, Ȧ, Ä)` at each
//! instant. All endomorphisms are returned in the ambient standard basis.

use crate::error::{GeomError, Result};
use crate::numkit::{central_derivative, central_second_derivative, cond, hstack, inverse, max_abs, solve, Mat, Stencil};

/// `[A | Ȧ]` is treated as singular beyond this condition number.
pub const FANNING_COND_LIMIT: f64 = 1e10;

/// Relative tolerance on `AᵀΩA` for the Lagrangian test.
pub const LAGRANGIAN_TOL: f64 = 1e-7;

/// A frame of the plane and its first two t-derivatives at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameTriple {
    pub a: Mat,
    pub adot: Mat,
    pub addot: Mat,
}

impl FrameTriple {
    pub fn new(a: Mat, adot: Mat, addot: Mat) -> Result<Self> {
        let (r, n) = a.shape();
        if r != 2 * n || adot.shape() != (r, n) || addot.shape() != (r, n) {
            return Err(GeomError::DimensionMismatch(format!(
                "frame triple shapes {:?}, {:?}, {:?}",
                a.shape(),
                adot.shape(),
                addot.shape()
            )));
        }
        Ok(FrameTriple { a, adot, addot })
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// `[A | Ȧ]`, checked against [`FANNING_COND_LIMIT`].
    pub fn fanning_block(&self) -> Result<Mat> {
        let b = hstack(&[&self.a, &self.adot]);
        let c = cond(&b);
        if c > FANNING_COND_LIMIT || !c.is_finite() {
            return Err(GeomError::NotFanning { cond: c });
        }
        Ok(b)
    }

    /// Right-multiplies every member by `r` (a change of frame at fixed t).
    pub fn reframe(&self, r: &Mat) -> FrameTriple {
        FrameTriple { a: &self.a * r, adot: &self.adot * r, addot: &self.addot * r }
    }
}

/// A constant symplectic form on ℝ²ⁿ, `ω(u, v) = uᵀΩv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    omega: Mat,
}

impl SymplecticForm {
    pub fn new(omega: Mat) -> Result<Self> {
        let (r, c) = omega.shape();
        if r != c || r % 2 != 0 {
            return Err(GeomError::DimensionMismatch(format!("symplectic form of shape {r}x{c}")));
        }
        let scale = max_abs(&omega).max(1.0);
        if max_abs(&(&omega + omega.transpose())) > 1e-10 * scale {
            return Err(GeomError::InvalidMetric("symplectic form is not antisymmetric".into()));
        }
        if cond(&omega) > 1e12 {
            return Err(GeomError::SingularTransform);
        }
        Ok(SymplecticForm { omega })
    }

    /// The canonical form `[[0, I], [-I, 0]]`.
    pub fn standard(n: usize) -> Self {
        SymplecticForm { omega: standard_omega(n) }
    }

    pub fn matrix(&self) -> &Mat {
        &self.omega
    }

    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn pair(&self, u: &Mat, v: &Mat) -> Mat {
        u.transpose() * &self.omega * v
    }
}

pub fn standard_omega(n: usize) -> Mat {
    let mut o = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        o[(i, n + i)] = 1.0;
        o[(n + i, i)] = -1.0;
    }
    o
}

/// Reflection `Ḟ`, horizontal frame and the projectors onto `h` and `ℓ`.
#[derive(Clone, Debug)]
pub struct HorizontalData {
    pub fdot: Mat,
    pub hframe: Mat,
    pub p_ell: Mat,
    pub p_h: Mat,
}

/// Everything known about a fanning curve at one instant.
#[derive(Clone, Debug)]
pub struct FanningInvariants {
    pub t: f64,
    pub frame: FrameTriple,
    pub f: Mat,
    pub fdot: Mat,
    pub fddot: Mat,
    pub hframe: Mat,
    pub p_h: Mat,
    pub p_ell: Mat,
    pub p: Mat,
    pub q: Mat,
    pub pdot: Mat,
    pub schwarzian: Mat,
    pub k: Mat,
    pub w: Option<Mat>,
}

impl FanningInvariants {
    /// Matrix of `K` restricted to the plane, in the basis `A`.
    pub fn k_ell(&self) -> Mat {
        &self.schwarzian * 0.5
    }

    /// Eigenvalues of `K` on the plane, ascending. `WK` is symmetric, so for
    /// a definite Wronskian they come from `L⁻¹(WK)L⁻ᵀ` with `W = LLᵀ`.
    pub fn k_eigenvalues(&self) -> Vec<f64> {
        let k = self.k_ell();
        let chol = self.w.as_ref().and_then(|w| w.clone().cholesky().map(|c| (w * &k, c)));
        let mut ev: Vec<f64> = match chol {
            Some((wk, c)) => {
                let l = c.l();
                let li = l.clone().try_inverse().expect("Cholesky factor is invertible");
                let s = &li * crate::numkit::symmetrize(&wk) * li.transpose();
                s.symmetric_eigenvalues().iter().copied().collect()
            }
            None => k.complex_eigenvalues().iter().map(|z| z.re).collect(),
        };
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `F` with `F·A = 0`, `F·Ȧ = A`.
pub fn fundamental_endomorphism(ft: &FrameTriple) -> Result<Mat> {
    let b = ft.fanning_block()?;
    let n = ft.n();
    let rhs = hstack(&[&Mat::zeros(2 * n, n), &ft.a]);
    // F·B = rhs  ⇔  Bᵀ·Fᵀ = rhsᵀ
    let ft_t = solve(&b.transpose(), &rhs.transpose()).ok_or(GeomError::NotFanning { cond: f64::INFINITY })?;
    Ok(ft_t.transpose())
}

/// `(P, Q)` with `Ä + Ȧ·P + A·Q = 0`.
pub fn pq_coefficients(ft: &FrameTriple) -> Result<(Mat, Mat)> {
    let b = ft.fanning_block()?;
    let n = ft.n();
    let qp = solve(&b, &(-&ft.addot)).ok_or(GeomError::NotFanning { cond: f64::INFINITY })?;
    Ok((qp.rows(n, n).into_owned(), qp.rows(0, n).into_owned()))
}

/// `{𝒜, t} = 2Q − ½P² − Ṗ`.
pub fn schwarzian(ft: &FrameTriple, pdot: &Mat) -> Result<Mat> {
    let (p, q) = pq_coefficients(ft)?;
    check_square(pdot, ft.n())?;
    Ok(q * 2.0 - &p * &p * 0.5 - pdot)
}

fn check_square(m: &Mat, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(GeomError::DimensionMismatch(format!("expected {n}x{n}, got {:?}", m.shape())));
    }
    Ok(())
}

/// Closed-form `Ḟ` (from `Ḟ·A = −A`, `Ḟ·Ȧ = Ȧ + A·P`), horizontal frame
/// `𝓗 = Ȧ + ½A·P` and the projectors `P_h = ½(I + Ḟ)`, `P_ℓ = I − P_h`.
pub fn horizontal_data(ft: &FrameTriple) -> Result<HorizontalData> {
    let b = ft.fanning_block()?;
    let (p, _) = pq_coefficients(ft)?;
    let m = 2 * ft.n();
    let rhs = hstack(&[&(-&ft.a), &(&ft.adot + &ft.a * &p)]);
    let binv = inverse(&b).ok_or(GeomError::NotFanning { cond: f64::INFINITY })?;
    let fdot = rhs * binv;
    let hframe = &ft.adot + &ft.a * &p * 0.5;
    let id = Mat::identity(m, m);
    let p_h = (&id + &fdot) * 0.5;
    let p_ell = id - &p_h;
    Ok(HorizontalData { fdot, hframe, p_ell, p_h })
}

/// `½F̈` in the standard basis, assembled from its block form in `(𝒜, 𝓗)`.
fn half_fddot(ft: &FrameTriple, hframe: &Mat, schw: &Mat) -> Result<Mat> {
    let n = ft.n();
    let b = hstack(&[&ft.a, hframe]);
    let binv = inverse(&b).ok_or(GeomError::NotFanning { cond: f64::INFINITY })?;
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, n), (n, n)).copy_from(&(schw * -0.5));
    m.view_mut((n, 0), (n, n)).copy_from(&(-Mat::identity(n, n)));
    Ok(b * m * binv)
}

/// Jacobi endomorphism `K = ¼F̈²`.
pub fn jacobi_endomorphism(ft: &FrameTriple, pdot: &Mat) -> Result<Mat> {
    let schw = schwarzian(ft, pdot)?;
    let hd = horizontal_data(ft)?;
    let half = half_fddot(ft, &hd.hframe, &schw)?;
    Ok(&half * &half)
}

/// `W = AᵀΩȦ` without symmetrization.
pub fn wronskian_raw(ft: &FrameTriple, omega: &SymplecticForm) -> Result<Mat> {
    if omega.dim() != ft.a.nrows() {
        return Err(GeomError::DimensionMismatch(format!(
            "form on R^{} for planes in R^{}",
            omega.dim(),
            ft.a.nrows()
        )));
    }
    let lag = max_abs(&omega.pair(&ft.a, &ft.a));
    let scale = max_abs(&ft.a).powi(2) * max_abs(omega.matrix());
    if lag > LAGRANGIAN_TOL * scale.max(1.0) {
        return Err(GeomError::NotLagrangian { residual: lag });
    }
    Ok(omega.pair(&ft.a, &ft.adot))
}

/// Symmetrized Wronskian matrix in the basis `A`.
pub fn wronskian(ft: &FrameTriple, omega: &SymplecticForm) -> Result<Mat> {
    let w = wronskian_raw(ft, omega)?;
    Ok((&w + w.transpose()) * 0.5)
}

/// `(A, Ȧ, Ä) ↦ (TA, TȦ, TÄ)`.
pub fn transform(t: &Mat, ft: &FrameTriple) -> Result<FrameTriple> {
    if t.shape() != (ft.a.nrows(), ft.a.nrows()) {
        return Err(GeomError::DimensionMismatch(format!("transform of shape {:?}", t.shape())));
    }
    if cond(t) > 1e12 {
        return Err(GeomError::SingularTransform);
    }
    Ok(FrameTriple { a: t * &ft.a, adot: t * &ft.adot, addot: t * &ft.addot })
}

/// Schwarzian derivative `{s, t}` from `(s, ṡ, s̈, s⃛)`.
pub fn scalar_schwarzian(s: [f64; 4]) -> f64 {
    let r = s[2] / s[1];
    s[3] / s[1] - 1.5 * r * r
}

/// Invariants of `ℓ(s(t))` predicted from those of `ℓ` at `s(t)`.
#[derive(Clone, Debug)]
pub struct ReparametrizedPrediction {
    pub f: Mat,
    pub fdot: Mat,
    pub schwarzian: Mat,
    pub k: Mat,
    pub w: Option<Mat>,
}

/// Transformation law under a change of parameter. `s` holds
/// `(s(t), ṡ, s̈, s⃛)`; `inv` are the invariants of the original curve at
/// `s(t)`, expressed in the frame `A(s)` (which is also the frame of the new
/// curve).
///
/// `F·Ȧ = A` forces the fundamental endomorphism to scale by `1/ṡ`.
pub fn reparametrize(s: [f64; 4], inv: &FanningInvariants) -> Result<ReparametrizedPrediction> {
    let sd = s[1];
    if sd == 0.0 || !sd.is_finite() {
        return Err(GeomError::SingularTransform);
    }
    let n = inv.p.nrows();
    let m = 2 * n;
    let sch = scalar_schwarzian(s);
    Ok(ReparametrizedPrediction {
        f: &inv.f / sd,
        fdot: &inv.fdot - &inv.f * (s[2] / (sd * sd)),
        schwarzian: &inv.schwarzian * (sd * sd) + Mat::identity(n, n) * sch,
        k: &inv.k * (sd * sd) + Mat::identity(m, m) * (0.5 * sch),
        w: inv.w.as_ref().map(|w| w * sd),
    })
}

/// A curve of n-planes in ℝ²ⁿ with access to frames and their derivatives.
pub trait FrameCurve: Send + Sync {
    /// `n`, the plane dimension.
    fn dim(&self) -> usize;
    fn frame(&self, t: f64) -> Result<FrameTriple>;
    /// Frame only; implementors override this when it is cheaper.
    fn plane(&self, t: f64) -> Result<Mat> {
        Ok(self.frame(t)?.a)
    }
    fn omega(&self) -> Option<&SymplecticForm> {
        None
    }
}

/// Stencil settings for `Ṗ` and other t-derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StencilSpec {
    pub h: f64,
    pub order: usize,
}

impl Default for StencilSpec {
    fn default() -> Self {
        StencilSpec { h: 1e-3, order: 4 }
    }
}

/// Full invariant bundle of `curve` at `t`; `Ṗ` comes from a central
/// stencil over `P` at neighbouring instants.
pub fn invariants<C: FrameCurve + ?Sized>(curve: &C, t: f64, st: StencilSpec) -> Result<FanningInvariants> {
    let stencil = Stencil::new(t, st.h, st.order)?;
    let mut ps = Vec::with_capacity(stencil.nodes.len());
    let mut centre = None;
    for (i, &tk) in stencil.nodes.iter().enumerate() {
        let ft = curve.frame(tk)?;
        ps.push(pq_coefficients(&ft)?.0);
        if i == st.order / 2 {
            centre = Some(ft);
        }
    }
    let ft = centre.expect("stencil has a centre node");
    let pdot = central_derivative(&ps, &stencil)?;
    invariants_from(&ft, t, pdot, curve.omega())
}

/// Invariant bundle from a frame triple and a known `Ṗ`.
pub fn invariants_from(ft: &FrameTriple, t: f64, pdot: Mat, omega: Option<&SymplecticForm>) -> Result<FanningInvariants> {
    let f = fundamental_endomorphism(ft)?;
    let (p, q) = pq_coefficients(ft)?;
    let schw = schwarzian(ft, &pdot)?;
    let hd = horizontal_data(ft)?;
    let half = half_fddot(ft, &hd.hframe, &schw)?;
    let k = &half * &half;
    let w = omega.map(|o| wronskian(ft, o)).transpose()?;
    Ok(FanningInvariants {
        t,
        frame: ft.clone(),
        f,
        fdot: hd.fdot,
        fddot: half * 2.0,
        hframe: hd.hframe,
        p_h: hd.p_h,
        p_ell: hd.p_ell,
        p,
        q,
        pdot,
        schwarzian: schw,
        k,
        w,
    })
}

/// Independent estimate of `K` as `¼F̈²` with `F̈` from a second-derivative
/// stencil of `F(t)`.
pub fn k_by_fddot_stencil<C: FrameCurve + ?Sized>(curve: &C, t: f64, st: StencilSpec) -> Result<Mat> {
    let stencil = Stencil::new(t, st.h, st.order)?;
    let fs = stencil
        .nodes
        .iter()
        .map(|&tk| fundamental_endomorphism(&curve.frame(tk)?))
        .collect::<Result<Vec<_>>>()?;
    let fdd = central_second_derivative(&fs, &stencil)?;
    Ok(&fdd * &fdd * 0.25)
}

/// Matrix of the Wronskian of the horizontal curve in the basis
/// `𝓗 = Ȧ + ½AP`, `𝓗ᵀΩ𝓗̇`, with `𝓗̇` from a central stencil.
pub fn horizontal_wronskian<C: FrameCurve + ?Sized>(curve: &C, t: f64, st: StencilSpec) -> Result<Mat> {
    let omega = curve.omega().ok_or_else(|| GeomError::InternalInconsistency("curve has no symplectic form".into()))?;
    let stencil = Stencil::new(t, st.h, st.order)?;
    let hs = stencil
        .nodes
        .iter()
        .map(|&tk| Ok(horizontal_data(&curve.frame(tk)?)?.hframe))
        .collect::<Result<Vec<_>>>()?;
    let hd = central_derivative(&hs, &stencil)?;
    Ok(omega.pair(&hs[st.order / 2], &hd))
}

type FrameFn = dyn Fn(f64) -> Result<FrameTriple> + Send + Sync;
type PlaneFn = dyn Fn(f64) -> Result<Mat> + Send + Sync;
type ParamFn = dyn Fn(f64) -> [f64; 4] + Send + Sync;

/// A curve given by a closed-form frame triple.
pub struct AnalyticCurve {
    n: usize,
    f: Box<FrameFn>,
    omega: Option<SymplecticForm>,
}

impl AnalyticCurve {
    pub fn new(n: usize, f: impl Fn(f64) -> Result<FrameTriple> + Send + Sync + 'static) -> Self {
        AnalyticCurve { n, f: Box::new(f), omega: None }
    }

    pub fn with_omega(mut self, omega: SymplecticForm) -> Self {
        self.omega = Some(omega);
        self
    }
}

impl FrameCurve for AnalyticCurve {
    fn dim(&self) -> usize {
        self.n
    }
    fn frame(&self, t: f64) -> Result<FrameTriple> {
        (self.f)(t)
    }
    fn omega(&self) -> Option<&SymplecticForm> {
        self.omega.as_ref()
    }
}

/// A curve known only through its frames; derivatives come from stencils.
pub struct PlaneCurve {
    n: usize,
    plane: Box<PlaneFn>,
    stencil: StencilSpec,
    omega: Option<SymplecticForm>,
}

impl PlaneCurve {
    pub fn new(
        n: usize,
        stencil: StencilSpec,
        plane: impl Fn(f64) -> Result<Mat> + Send + Sync + 'static,
    ) -> Self {
        PlaneCurve { n, plane: Box::new(plane), stencil, omega: None }
    }

    pub fn with_omega(mut self, omega: SymplecticForm) -> Self {
        self.omega = Some(omega);
        self
    }
}

impl FrameCurve for PlaneCurve {
    fn dim(&self) -> usize {
        self.n
    }
    fn frame(&self, t: f64) -> Result<FrameTriple> {
        let st = Stencil::new(t, self.stencil.h, self.stencil.order)?;
        let samples = st.nodes.iter().map(|&tk| (self.plane)(tk)).collect::<Result<Vec<_>>>()?;
        let a = samples[self.stencil.order / 2].clone();
        let adot = central_derivative(&samples, &st)?;
        let addot = central_second_derivative(&samples, &st)?;
        FrameTriple::new(a, adot, addot)
    }
    fn plane(&self, t: f64) -> Result<Mat> {
        (self.plane)(t)
    }
    fn omega(&self) -> Option<&SymplecticForm> {
        self.omega.as_ref()
    }
}

/// The curve `T·ℓ(t)` for a fixed invertible `T`.
pub struct TransformedCurve<C> {
    pub inner: C,
    pub t: Mat,
    omega: Option<SymplecticForm>,
}

impl<C: FrameCurve> TransformedCurve<C> {
    /// The form carried over is `T⁻ᵀΩT⁻¹`, so `T` is a symplectic map from
    /// the inner curve's space.
    pub fn new(inner: C, t: Mat) -> Result<Self> {
        let omega = match inner.omega() {
            Some(o) => {
                let ti = inverse(&t).ok_or(GeomError::SingularTransform)?;
                Some(SymplecticForm::new(ti.transpose() * o.matrix() * &ti)?)
            }
            None => None,
        };
        Ok(TransformedCurve { inner, t, omega })
    }
}

impl<C: FrameCurve> FrameCurve for TransformedCurve<C> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn frame(&self, t: f64) -> Result<FrameTriple> {
        transform(&self.t, &self.inner.frame(t)?)
    }
    fn plane(&self, t: f64) -> Result<Mat> {
        Ok(&self.t * self.inner.plane(t)?)
    }
    fn omega(&self) -> Option<&SymplecticForm> {
        self.omega.as_ref()
    }
}

/// The curve `ℓ(s(t))`; `s` returns `(s, ṡ, s̈, s⃛)`.
pub struct ReparametrizedCurve<C> {
    pub inner: C,
    s: Box<ParamFn>,
}

impl<C: FrameCurve> ReparametrizedCurve<C> {
    pub fn new(inner: C, s: impl Fn(f64) -> [f64; 4] + Send + Sync + 'static) -> Self {
        ReparametrizedCurve { inner, s: Box::new(s) }
    }

    pub fn affine(inner: C, a: f64, b: f64) -> Self {
        Self::new(inner, move |t| [a * t + b, a, 0.0, 0.0])
    }

    pub fn param(&self, t: f64) -> [f64; 4] {
        (self.s)(t)
    }
}

impl<C: FrameCurve> FrameCurve for ReparametrizedCurve<C> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn frame(&self, t: f64) -> Result<FrameTriple> {
        let s = (self.s)(t);
        let ft = self.inner.frame(s[0])?;
        let addot = &ft.addot * (s[1] * s[1]) + &ft.adot * s[2];
        FrameTriple::new(ft.a, ft.adot * s[1], addot)
    }
    fn plane(&self, t: f64) -> Result<Mat> {
        self.inner.plane((self.s)(t)[0])
    }
    fn omega(&self) -> Option<&SymplecticForm> {
        self.inner.omega()
    }
}

impl<C: FrameCurve + ?Sized> FrameCurve for &C {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn frame(&self, t: f64) -> Result<FrameTriple> {
        (**self).frame(t)
    }
    fn plane(&self, t: f64) -> Result<Mat> {
        (**self).plane(t)
    }
    fn omega(&self) -> Option<&SymplecticForm> {
        (**self).omega()
    }
}

impl<C: FrameCurve + ?Sized> FrameCurve for Box<C> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn frame(&self, t: f64) -> Result<FrameTriple> {
        (**self).frame(t)
    }
    fn plane(&self, t: f64) -> Result<Mat> {
        (**self).plane(t)
    }
    fn omega(&self) -> Option<&SymplecticForm> {
        (**self).omega()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{random_lagrangian_curve, random_symplectic, rng};
    use proptest::prelude::*;

    fn m(r: usize, c: usize, v: &[f64]) -> Mat {
        Mat::from_row_slice(r, c, v)
    }

    fn rotating_line() -> AnalyticCurve {
        AnalyticCurve::new(1, |t| {
            let (s, c) = (f64::sin(t), f64::cos(t));
            FrameTriple::new(m(2, 1, &[c, s]), m(2, 1, &[-s, c]), m(2, 1, &[-c, -s]))
        })
        .with_omega(SymplecticForm::standard(1))
    }

    fn triple(a: &[f64], ad: &[f64], add: &[f64]) -> FrameTriple {
        let n = ((a.len() / 2) as f64).sqrt() as usize;
        FrameTriple::new(m(2 * n, n, a), m(2 * n, n, ad), m(2 * n, n, add)).unwrap()
    }

    #[test]
    fn fundamental_endomorphism_examples() {
        let f = fundamental_endomorphism(&triple(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0])).unwrap();
        assert_eq!(f, m(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        let f = fundamental_endomorphism(&triple(&[0.0, 1.0], &[1.0, 0.0], &[0.0, 0.0])).unwrap();
        assert_eq!(f, m(2, 2, &[0.0, 0.0, 1.0, 0.0]));
        let r = fundamental_endomorphism(&triple(&[1.0, 0.0], &[2.0, 0.0], &[0.0, 0.0]));
        assert!(matches!(r, Err(GeomError::NotFanning { .. })));
    }

    #[test]
    fn pq_examples() {
        let (p, q) = pq_coefficients(&triple(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0])).unwrap();
        assert_eq!((p[(0, 0)], q[(0, 0)]), (0.0, 0.0));
        let (p, q) = pq_coefficients(&triple(&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0])).unwrap();
        assert_eq!((p[(0, 0)], q[(0, 0)]), (0.0, 1.0));
    }

    #[test]
    fn rotating_line_invariants() {
        let c = rotating_line();
        for t in [0.0, 0.4, 2.0] {
            let inv = invariants(&c, t, StencilSpec::default()).unwrap();
            assert!((inv.schwarzian[(0, 0)] - 2.0).abs() < 1e-9);
            assert!((&inv.k - Mat::identity(2, 2)).abs().max() < 1e-9);
            assert!((inv.w.as_ref().unwrap()[(0, 0)] - 1.0).abs() < 1e-14);
        }
        let hd = horizontal_data(&c.frame(0.0).unwrap()).unwrap();
        assert!((hd.hframe - m(2, 1, &[0.0, 1.0])).abs().max() < 1e-15);
        assert!((hd.fdot - m(2, 2, &[-1.0, 0.0, 0.0, 1.0])).abs().max() < 1e-15);
    }

    #[test]
    fn euclidean_jacobi_frame_has_zero_k() {
        let c = AnalyticCurve::new(1, |t| FrameTriple::new(m(2, 1, &[-t, 1.0]), m(2, 1, &[-1.0, 0.0]), Mat::zeros(2, 1)));
        let inv = invariants(&c, 0.7, StencilSpec::default()).unwrap();
        assert_eq!(inv.schwarzian[(0, 0)], 0.0);
        assert!(inv.k.abs().max() < 1e-15);
    }

    #[test]
    fn wronskian_examples() {
        let o = SymplecticForm::standard(1);
        let w = wronskian(&triple(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]), &o).unwrap();
        assert_eq!(w[(0, 0)], 1.0);
        let w = wronskian(&triple(&[1.0, 0.0], &[0.0, -1.0], &[0.0, 0.0]), &o).unwrap();
        assert_eq!(w[(0, 0)], -1.0);
        let o2 = SymplecticForm::standard(2);
        let bad = triple(&[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0], &[0.0; 8], &[0.0; 8]);
        assert!(matches!(wronskian(&bad, &o2), Err(GeomError::NotLagrangian { .. })));
    }

    /// Frame `ḟ^{-1/2}(1, f)` of the line through `(1, f(t))`, which has
    /// `P ≡ 0`. `f` is given by its first four derivatives.
    fn normal_line(t: f64, kind: usize) -> [Mat; 3] {
        // Each choice is written as b(t) = (b0(t), b1(t)) with derivatives.
        let (b, bd, bdd) = match kind {
            0 => ([t.cos(), t.sin()], [-t.sin(), t.cos()], [-t.cos(), -t.sin()]),
            _ => {
                let (e, ei) = ((0.5 * t).exp(), (-0.5 * t).exp());
                ([ei, e], [-0.5 * ei, 0.5 * e], [0.25 * ei, 0.25 * e])
            }
        };
        [m(2, 1, &b), m(2, 1, &bd), m(2, 1, &bdd)]
    }

    #[test]
    fn normal_frame_identities() {
        use crate::samples::random_matrix;
        let mut r = rng(11);
        for trial in 0..10 {
            let tm = Mat::identity(4, 4) + random_matrix(&mut r, 4, 4) * 0.3;
            let rc = Mat::identity(2, 2) + random_matrix(&mut r, 2, 2) * 0.3;
            let kinds = [trial % 2, (trial / 2) % 2];
            let c = AnalyticCurve::new(2, move |t| {
                let l0 = normal_line(t, kinds[0]);
                let l1 = normal_line(t, kinds[1]);
                let mut out = Vec::new();
                for d in 0..3 {
                    // block-diagonal embedding of two lines into R^4 = R^2 ⊕ R^2
                    let mut a = Mat::zeros(4, 2);
                    a[(0, 0)] = l0[d][0];
                    a[(2, 0)] = l0[d][1];
                    a[(1, 1)] = l1[d][0];
                    a[(3, 1)] = l1[d][1];
                    out.push(&tm * a * &rc);
                }
                let [a, ad, add]: [Mat; 3] = out.try_into().unwrap();
                FrameTriple::new(a, ad, add)
            });
            let inv = invariants(&c, 0.3, StencilSpec::default()).unwrap();
            assert!(inv.p.abs().max() < 1e-12);
            assert!((&inv.hframe - &inv.frame.adot).abs().max() < 1e-12);
            let res = &inv.frame.addot + &inv.frame.a * &inv.schwarzian * 0.5;
            assert!(res.abs().max() < 1e-10, "{res}");
        }
    }

    #[test]
    fn horizontal_wronskian_is_w_times_k() {
        let mut r = rng(8);
        for _ in 0..5 {
            let c = random_lagrangian_curve(&mut r, 3);
            let inv = invariants(&c, 0.1, StencilSpec::default()).unwrap();
            let wh = horizontal_wronskian(&c, 0.1, StencilSpec::default()).unwrap();
            let wk = inv.w.as_ref().unwrap() * inv.k_ell();
            assert!(max_abs(&(&wh - &wk)) < 1e-6 * max_abs(&wk).max(1.0));
        }
        // rotating line: h(t) is the line through (−sin t, cos t)·(−1), W_h = W·K = 1
        let wh = horizontal_wronskian(&rotating_line(), 0.4, StencilSpec::default()).unwrap();
        assert!((wh[(0, 0)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn k_eigenvalues_match_the_rotating_line() {
        // the rotating line has K = 1
        let inv = invariants(&rotating_line(), 0.2, StencilSpec::default()).unwrap();
        let ev = inv.k_eigenvalues();
        assert_eq!(ev.len(), 1);
        assert!((ev[0] - 1.0).abs() < 1e-9, "{ev:?}");
        let c = random_lagrangian_curve(&mut rng(5), 3);
        let inv = invariants(&c, 0.0, StencilSpec::default()).unwrap();
        let mut general: Vec<f64> = inv.k_ell().complex_eigenvalues().iter().map(|z| z.re).collect();
        general.sort_by(f64::total_cmp);
        for (a, b) in inv.k_eigenvalues().iter().zip(&general) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0));
        }
    }

    #[test]
    fn dual_path_k_agrees() {
        let mut r = rng(5);
        for _ in 0..5 {
            let c = random_lagrangian_curve(&mut r, 2);
            let inv = invariants(&c, 0.2, StencilSpec::default()).unwrap();
            let k2 = k_by_fddot_stencil(&c, 0.2, StencilSpec { h: 1e-3, order: 6 }).unwrap();
            let scale = max_abs(&inv.k).max(1.0);
            assert!(max_abs(&(&inv.k - k2)) < 1e-6 * scale);
        }
    }

    #[test]
    fn affine_reparametrization_scales_k_by_four() {
        let c = rotating_line();
        let re = ReparametrizedCurve::affine(rotating_line(), 2.0, 0.0);
        let inv = invariants(&re, 0.3, StencilSpec::default()).unwrap();
        let base = invariants(&c, 0.6, StencilSpec::default()).unwrap();
        assert!((&inv.k - &base.k * 4.0).abs().max() < 1e-9);
    }

    #[test]
    fn nonaffine_reparametrization_follows_schwarzian_law() {
        let mut r = rng(8);
        let c = random_lagrangian_curve(&mut r, 2);
        let s = |t: f64| [t + 0.3 * t * t + 0.1 * t * t * t, 1.0 + 0.6 * t + 0.3 * t * t, 0.6 + 0.6 * t, 0.6];
        let re = ReparametrizedCurve::new(random_lagrangian_curve(&mut rng(8), 2), s);
        let t = 0.25;
        let got = invariants(&re, t, StencilSpec::default()).unwrap();
        let base = invariants(&c, s(t)[0], StencilSpec::default()).unwrap();
        let pred = reparametrize(s(t), &base).unwrap();
        let sc = max_abs(&got.k).max(1.0);
        assert!(max_abs(&(&got.k - &pred.k)) < 1e-7 * sc);
        assert!(max_abs(&(&got.f - &pred.f)) < 1e-10 * max_abs(&got.f).max(1.0));
        assert!(max_abs(&(&got.fdot - &pred.fdot)) < 1e-9);
        assert!(max_abs(&(got.w.unwrap() - pred.w.unwrap())) < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn algebraic_identities(seed in 0u64..10_000, t in -0.5f64..0.5) {
            let mut r = rng(seed);
            let c = random_lagrangian_curve(&mut r, 2);
            let inv = invariants(&c, t, StencilSpec::default()).unwrap();
            let ft = &inv.frame;
            let id = Mat::identity(4, 4);
            prop_assert!(max_abs(&(&inv.f * &ft.a)) < 1e-9);
            prop_assert!(max_abs(&(&inv.f * &ft.adot - &ft.a)) < 1e-9);
            prop_assert!(max_abs(&(&inv.f * &inv.f)) < 1e-8);
            prop_assert!(max_abs(&(&inv.fdot * &inv.fdot - &id)) < 1e-8);
            prop_assert!(max_abs(&(&inv.p_h * &inv.p_h - &inv.p_h)) < 1e-8);
            prop_assert!(max_abs(&(&inv.p_ell * &ft.a - &ft.a)) < 1e-8);
            let (p, q) = (&inv.p, &inv.q);
            prop_assert!(max_abs(&(&ft.addot + &ft.adot * p + &ft.a * q)) < 1e-9);
            let o = c.omega().unwrap().matrix();
            prop_assert!(max_abs(&(inv.f.transpose() * o + o * &inv.f)) < 1e-8);
            prop_assert!(max_abs(&(inv.hframe.transpose() * o * &inv.hframe)) < 1e-8);
            let w = inv.w.as_ref().unwrap();
            let wk = w * inv.k_ell();
            prop_assert!(max_abs(&(&wk - wk.transpose())) < 1e-8 * max_abs(&wk).max(1.0));
            let raw = wronskian_raw(ft, c.omega().unwrap()).unwrap();
            prop_assert!(max_abs(&(&raw - raw.transpose())) < 1e-12 * max_abs(&raw).max(1.0));
        }

        #[test]
        fn frame_independence(seed in 0u64..10_000) {
            let mut r = rng(seed);
            let c = random_lagrangian_curve(&mut r, 2);
            let r0 = Mat::identity(2, 2) * 2.0 + crate::samples::random_matrix(&mut r, 2, 2) * 0.3;
            let r1 = crate::samples::random_matrix(&mut r, 2, 2) * 0.5;
            let r2 = crate::samples::random_matrix(&mut r, 2, 2) * 0.5;
            let inner = random_lagrangian_curve(&mut rng(seed), 2);
            let reframed = AnalyticCurve::new(2, move |t| {
                let ft = inner.frame(t)?;
                let rt = &r0 + &r1 * t + &r2 * (t * t);
                let rd = &r1 + &r2 * (2.0 * t);
                let rdd = &r2 * 2.0;
                FrameTriple::new(
                    &ft.a * &rt,
                    &ft.adot * &rt + &ft.a * &rd,
                    &ft.addot * &rt + &ft.adot * &rd * 2.0 + &ft.a * &rdd,
                )
            });
            let a = invariants(&c, 0.1, StencilSpec::default()).unwrap();
            let b = invariants(&reframed, 0.1, StencilSpec::default()).unwrap();
            prop_assert!(max_abs(&(&a.f - &b.f)) < 1e-8 * max_abs(&a.f).max(1.0));
            prop_assert!(max_abs(&(&a.fdot - &b.fdot)) < 1e-8);
            prop_assert!(max_abs(&(&a.k - &b.k)) < 1e-8 * max_abs(&a.k).max(1.0));
        }

        #[test]
        fn symplectic_equivariance(seed in 0u64..10_000) {
            let mut r = rng(seed);
            let c = random_lagrangian_curve(&mut r, 2);
            let t = random_symplectic(&mut r, 2);
            let ti = inverse(&t).unwrap();
            let tc = TransformedCurve::new(random_lagrangian_curve(&mut rng(seed), 2), t.clone()).unwrap();
            let a = invariants(&c, 0.0, StencilSpec::default()).unwrap();
            let b = invariants(&tc, 0.0, StencilSpec::default()).unwrap();
            let fk = &t * &a.k * &ti;
            prop_assert!(max_abs(&(&b.k - fk)) < 1e-8 * max_abs(&b.k).max(1.0));
            prop_assert!(max_abs(&(b.w.unwrap() - a.w.unwrap())) < 1e-9);
        }
    }
}

//! The splitting `ℓ = 𝔥 ⊕ 𝔳` of a fanning curve against a coisotropic
//! subspace, the reduced curve and the O'Neill endomorphism.

use super::linear::{coords_in, CoisotropicSetup};
use crate::error::{GeomError, Result};
use crate::fanning::{horizontal_data, FanningInvariants, FrameCurve, FrameTriple, SymplecticForm};
use crate::numkit::{cond, hstack, inverse, max_abs, nullspace, singular_values, vstack, Mat, Vector, RANK_TOL};

const TRANSVERSAL_TOL: f64 = 1e-8;
const DEGENERACY_COND: f64 = 1e10;

/// Fixed normalizations that pin down the frames of `𝔥(t)` and `𝔳(t)` near
/// a base instant: `R_hᵀ·𝒜_𝔥 = I` and `R_vᵀ·𝒜_𝔳 = I`.
#[derive(Clone, Debug)]
pub struct SplitReference {
    pub r_h: Mat,
    pub r_v: Mat,
}

impl SplitReference {
    /// References taken from the split of `ft` itself.
    pub fn at(setup: &CoisotropicSetup, ft: &FrameTriple) -> Result<Self> {
        check_transversal(setup, &ft.a)?;
        let m = setup.w_omega.transpose() * setup.omega.matrix() * &ft.a;
        let c = nullspace(&m, RANK_TOL);
        if c.ncols() != setup.r {
            return Err(GeomError::InternalInconsistency(format!(
                "intersection of dimension {} where {} was expected",
                c.ncols(),
                setup.r
            )));
        }
        let r_h = &ft.a * &c;
        let w = setup.omega.pair(&ft.a, &ft.adot);
        let d = nullspace(&(c.transpose() * &w), RANK_TOL);
        if d.ncols() != ft.n() - setup.r {
            return Err(GeomError::DegenerateRestriction(cond(&(c.transpose() * &w * &c))));
        }
        Ok(SplitReference { r_h, r_v: &ft.a * d })
    }
}

fn check_transversal(setup: &CoisotropicSetup, a: &Mat) -> Result<()> {
    if setup.w_omega.ncols() == 0 {
        return Ok(());
    }
    let qa = a.clone().qr().q();
    let joint = hstack(&[&qa, &setup.w_omega]);
    let smin = singular_values(&joint).last().copied().unwrap_or(0.0);
    if smin < TRANSVERSAL_TOL {
        return Err(GeomError::TransversalityFailure(smin));
    }
    Ok(())
}

/// `X = M⁻¹·rhs` with first and second derivatives, for `M(t)·X(t) = rhs`.
fn implicit(m: [&Mat; 3], rhs: &Mat) -> Result<[Mat; 3]> {
    let minv = inverse(m[0]).ok_or(GeomError::SingularTransform)?;
    let x = &minv * rhs;
    let xd = -(&minv * m[1] * &x);
    let xdd = -(&minv * (m[2] * &x + m[1] * &xd * 2.0));
    Ok([x, xd, xdd])
}

fn unit_rows(top: usize, bottom: usize) -> Mat {
    let mut m = Mat::zeros(top + bottom, bottom);
    for i in 0..bottom {
        m[(top + i, i)] = 1.0;
    }
    m
}

/// `ℓ(t) = 𝔥(t) ⊕ 𝔳(t)` at one instant, with frames in the coordinates of
/// the ambient space and coefficients in the basis `A` of `ℓ(t)`.
#[derive(Clone, Debug)]
pub struct HVSplit {
    pub frame: FrameTriple,
    /// `𝒜_𝔥 = A·C` with `C`, `Ċ`, `C̈`.
    pub c: [Mat; 3],
    /// `𝒜_𝔳 = A·D` with `D`, `Ḋ`.
    pub d: [Mat; 2],
    pub h_frame: Mat,
    pub h_frame_dot: Mat,
    pub h_frame_ddot: Mat,
    pub v_frame: Mat,
    pub v_frame_dot: Mat,
    /// Symmetrized Wronskian of the full curve in the basis `A`.
    pub w: Mat,
    pub p_h: Mat,
    pub p_v: Mat,
    /// Projector onto the horizontal space of the full curve.
    pub p_hor: Mat,
}

impl HVSplit {
    /// `W` restricted to `𝔥` in the frame `𝒜_𝔥`.
    pub fn w_h(&self) -> Mat {
        self.c[0].transpose() * &self.w * &self.c[0]
    }

    /// `E = [C | D]`, the change of basis from `(𝒜_𝔥, 𝒜_𝔳)` to `A`.
    pub fn e(&self) -> Mat {
        hstack(&[&self.c[0], &self.d[0]])
    }

    /// `max |P_𝔥 + P_𝔳 + P_h − I|` and the idempotency defects.
    pub fn projector_residual(&self) -> f64 {
        let m = self.p_h.nrows();
        let sum = &self.p_h + &self.p_v + &self.p_hor - Mat::identity(m, m);
        [
            max_abs(&sum),
            max_abs(&(&self.p_h * &self.p_h - &self.p_h)),
            max_abs(&(&self.p_v * &self.p_v - &self.p_v)),
            max_abs(&(&self.p_hor * &self.p_hor - &self.p_hor)),
            max_abs(&(&self.p_h * &self.p_v)),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Splits the plane of `ft` into `𝔥 = ℓ ∩ 𝕎` and its `W`-orthogonal
/// complement `𝔳`, using the references to fix the frames.
pub fn hv_split_with(setup: &CoisotropicSetup, ft: &FrameTriple, refs: &SplitReference) -> Result<HVSplit> {
    let n = ft.n();
    let r = setup.r;
    let om = setup.omega.matrix();
    if om.nrows() != ft.a.nrows() {
        return Err(GeomError::DimensionMismatch("setup and frame live in different spaces".into()));
    }
    check_transversal(setup, &ft.a)?;
    let wot = setup.w_omega.transpose() * om;
    let rht = refs.r_h.transpose();
    let m0 = vstack(&[&(&wot * &ft.a), &(&rht * &ft.a)]);
    let m1 = vstack(&[&(&wot * &ft.adot), &(&rht * &ft.adot)]);
    let m2 = vstack(&[&(&wot * &ft.addot), &(&rht * &ft.addot)]);
    let c = implicit([&m0, &m1, &m2], &unit_rows(n - r, r))?;

    let w_raw = setup.omega.pair(&ft.a, &ft.adot);
    let w = (&w_raw + w_raw.transpose()) * 0.5;
    let wh = c[0].transpose() * &w * &c[0];
    let kappa = if r == 0 { 1.0 } else { cond(&wh) };
    if !(kappa < DEGENERACY_COND) {
        return Err(GeomError::DegenerateRestriction(kappa));
    }
    // Ẇ = ȦᵀΩȦ + AᵀΩÄ; the first term vanishes for a Lagrangian curve up
    // to its antisymmetric part.
    let wd_raw = setup.omega.pair(&ft.adot, &ft.adot) + setup.omega.pair(&ft.a, &ft.addot);
    let wd = (&wd_raw + wd_raw.transpose()) * 0.5;
    let rvt = refs.r_v.transpose();
    let mv0 = vstack(&[&(c[0].transpose() * &w), &(&rvt * &ft.a)]);
    let mv1 = vstack(&[&(c[1].transpose() * &w + c[0].transpose() * &wd), &(&rvt * &ft.adot)]);
    let zero = Mat::zeros(n, n);
    let [d, dd, _] = implicit([&mv0, &mv1, &zero], &unit_rows(r, n - r))?;

    let h_frame = &ft.a * &c[0];
    let h_frame_dot = &ft.adot * &c[0] + &ft.a * &c[1];
    let h_frame_ddot = &ft.addot * &c[0] + &ft.adot * &c[1] * 2.0 + &ft.a * &c[2];
    let v_frame = &ft.a * &d;
    let v_frame_dot = &ft.adot * &d + &ft.a * &dd;

    let hor = horizontal_data(ft)?;
    let basis = hstack(&[&h_frame, &v_frame, &hor.hframe]);
    let binv = inverse(&basis).ok_or(GeomError::SingularTransform)?;
    let select = |lo: usize, len: usize| {
        let mut s = Mat::zeros(2 * n, 2 * n);
        for i in lo..lo + len {
            s[(i, i)] = 1.0;
        }
        &basis * s * &binv
    };
    Ok(HVSplit {
        frame: ft.clone(),
        p_h: select(0, r),
        p_v: select(r, n - r),
        p_hor: select(n, n),
        c,
        d: [d, dd],
        h_frame,
        h_frame_dot,
        h_frame_ddot,
        v_frame,
        v_frame_dot,
        w,
    })
}

/// [`hv_split_with`] with references taken at `ft` itself.
pub fn hv_split(setup: &CoisotropicSetup, ft: &FrameTriple) -> Result<HVSplit> {
    let refs = SplitReference::at(setup, ft)?;
    hv_split_with(setup, ft, &refs)
}

/// The O'Neill endomorphism `𝐀` on `ℓ`, defined by `𝐀𝒜_𝔥 = P_𝔳𝒜̇_𝔥` and
/// `𝐀𝒜_𝔳 = −P_𝔥𝒜̇_𝔳`.
#[derive(Clone, Debug)]
pub struct OneillEndomorphism {
    /// Matrix of `𝐀` in the basis `(𝒜_𝔥, 𝒜_𝔳)`.
    pub matrix: Mat,
    /// `W` in the basis `(𝒜_𝔥, 𝒜_𝔳)`.
    pub w_split: Mat,
    /// `max |𝐀ᵀW − W𝐀|` relative to `|W|`.
    pub symmetry_residual: f64,
    /// Largest entry of the diagonal blocks of `𝐀` relative to its size.
    pub block_residual: f64,
    /// Distance of the assembled images from `ℓ`.
    pub plane_residual: f64,
}

pub fn oneill_endomorphism(split: &HVSplit) -> Result<OneillEndomorphism> {
    let r = split.h_frame.ncols();
    let n = split.frame.n();
    let l = hstack(&[&split.h_frame, &split.v_frame]);
    let images = hstack(&[&(&split.p_v * &split.h_frame_dot), &(-(&split.p_h * &split.v_frame_dot))]);
    let (matrix, plane_residual) = if max_abs(&images) == 0.0 {
        (Mat::zeros(n, n), 0.0)
    } else {
        coords_in(&l, &images)
    };
    let e = split.e();
    let w_split = e.transpose() * &split.w * &e;
    let wscale = max_abs(&w_split).max(1e-300);
    let symmetry_residual = max_abs(&(matrix.transpose() * &w_split - &w_split * &matrix)) / wscale;
    let ascale = max_abs(&matrix).max(1.0);
    let hh = max_abs(&matrix.view((0, 0), (r, r)).into_owned());
    let vv = max_abs(&matrix.view((r, r), (n - r, n - r)).into_owned());
    Ok(OneillEndomorphism { matrix, w_split, symmetry_residual, block_residual: hh.max(vv) / ascale, plane_residual })
}

/// A fanning curve reduced by a coisotropic subspace:
/// `ℓ_R(t) = π(ℓ(t) ∩ 𝕎)`, framed by `π𝒜_𝔥(t)`.
pub struct ReducedCurve<C> {
    pub inner: C,
    pub setup: CoisotropicSetup,
    pub refs: SplitReference,
    omega_r: SymplecticForm,
}

impl<C: FrameCurve> ReducedCurve<C> {
    pub fn new(inner: C, setup: CoisotropicSetup, refs: SplitReference) -> Self {
        let omega_r = setup.reduced_omega();
        ReducedCurve { inner, setup, refs, omega_r }
    }

    pub fn split(&self, t: f64) -> Result<HVSplit> {
        hv_split_with(&self.setup, &self.inner.frame(t)?, &self.refs)
    }
}

impl<C: FrameCurve> FrameCurve for ReducedCurve<C> {
    fn dim(&self) -> usize {
        self.setup.r
    }

    fn frame(&self, t: f64) -> Result<FrameTriple> {
        let s = self.split(t)?;
        let pi = &self.setup.pi;
        FrameTriple::new(pi * &s.h_frame, pi * &s.h_frame_dot, pi * &s.h_frame_ddot)
    }

    fn omega(&self) -> Option<&SymplecticForm> {
        Some(&self.omega_r)
    }
}

/// Reduces `curve` by `setup`, with frames normalized at `t0`.
pub fn reduce_curve<C: FrameCurve>(setup: &CoisotropicSetup, curve: C, t0: f64) -> Result<ReducedCurve<C>> {
    if curve.dim() * 2 != setup.omega.dim() {
        return Err(GeomError::DimensionMismatch("curve and setup live in different spaces".into()));
    }
    let refs = SplitReference::at(setup, &curve.frame(t0)?)?;
    Ok(ReducedCurve::new(curve, setup.clone(), refs))
}

/// Both sides of `W_R(K_R ā, ā) = W(Ka, a) + 3W(𝐀a, 𝐀a)` for `a = 𝒜_𝔥·α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneillSides {
    pub lhs: f64,
    pub rhs: f64,
    /// `W(Ka, a)`.
    pub curvature_term: f64,
    /// `3W(𝐀a, 𝐀a)`.
    pub correction: f64,
    /// `W(a, a)`, the common normalization.
    pub norm: f64,
}

pub fn oneill_formula(
    full: &FanningInvariants,
    reduced: &FanningInvariants,
    split: &HVSplit,
    alpha: &[f64],
) -> Result<OneillSides> {
    let r = split.h_frame.ncols();
    let n = split.frame.n();
    if alpha.len() != r {
        return Err(GeomError::DimensionMismatch(format!("alpha of length {} for r = {r}", alpha.len())));
    }
    let w = full.w.clone().ok_or_else(|| GeomError::InternalInconsistency("full Wronskian missing".into()))?;
    let wr = reduced.w.clone().ok_or_else(|| GeomError::InternalInconsistency("reduced Wronskian missing".into()))?;
    let al = Vector::from_column_slice(alpha);
    let a = &split.c[0] * &al;
    let lhs = (reduced.k_ell() * &al).dot(&(&wr * &al));
    let curvature_term = (full.k_ell() * &a).dot(&(&w * &a));
    let oneill = oneill_endomorphism(split)?;
    let mut padded = Vector::zeros(n);
    padded.rows_mut(0, r).copy_from(&al);
    let aa = split.e() * (&oneill.matrix * padded);
    let correction = 3.0 * aa.dot(&(&w * &aa));
    Ok(OneillSides { lhs, rhs: curvature_term + correction, curvature_term, correction, norm: a.dot(&(&w * &a)) })
}

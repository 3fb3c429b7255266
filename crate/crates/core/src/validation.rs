//! The acceptance criteria as runnable checks. The integration suite and
//! `fanning-lab selftest` both drive [`run_all`].

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use rand::Rng;

use crate::deformations::{katok_flags, katok_metric, projective_curvature_rhs, projective_deform, ClosedOneForm};
use crate::error::{GeomError, Result};
use crate::fanning::{
    horizontal_wronskian, invariants, reparametrize, AnalyticCurve, FanningInvariants, FrameTriple, ReparametrizedCurve,
    StencilSpec, SymplecticForm, TransformedCurve,
};
use crate::finsler::{zoo, MetricSpec, OneForm, PhasePoint, Potential};
use crate::jacobi::{contact_reduce, flag_curvature_with, riemann_oracle_for, transport_with, TransportOptions};
use crate::numkit::{inverse, max_abs, Mat};
use crate::reduction::{
    oneill_formula, reduce_curve, submersion_curvature, CoisotropicSetup, Submersion, TangentMethod,
};
use crate::samples::{
    random_matrix, random_point_in_ball, random_symplectic, random_unit_vector, rng, LagrangianCurveData, TestRng,
};

/// Numeric knobs shared by every criterion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub transport: TransportOptions,
    /// Stencil for `Ṗ` on analytic test curves.
    pub stencil: StencilSpec,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { seed: 20_241, transport: TransportOptions::default(), stencil: StencilSpec::default() }
    }
}

impl Settings {
    fn rng(&self, id: usize) -> TestRng {
        rng(self.seed.wrapping_mul(0x9e37_79b9).wrapping_add(id as u64))
    }
}

/// One measured residual against its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(label: &str, measured: f64, tolerance: f64) -> Self {
        Check { label: label.into(), measured, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.measured.is_finite() && self.measured < self.tolerance
    }

    fn ratio(&self) -> f64 {
        if self.measured.is_finite() {
            self.measured / self.tolerance
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub checks: Vec<Check>,
    /// Set when the run aborted with an error.
    pub error: Option<String>,
    pub seconds: f64,
    pub budget: Option<f64>,
}

impl CriterionReport {
    pub fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.seconds < b)
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(Check::passed) && self.within_budget()
    }

    /// The check closest to (or furthest past) its tolerance.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().max_by(|a, b| a.ratio().total_cmp(&b.ratio()))
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {:<28}", self.id, self.name)?;
        match (&self.error, self.worst()) {
            (Some(e), _) => write!(f, " error: {e}")?,
            (None, Some(c)) => write!(f, " {} = {:.3e} (tol {:.0e})", c.label, c.measured, c.tolerance)?,
            (None, None) => write!(f, " no checks")?,
        }
        write!(f, "  {:.2} s", self.seconds)?;
        if let Some(b) = self.budget {
            let over = if self.within_budget() { "" } else { " EXCEEDED" };
            write!(f, " (budget {b} s{over})")?;
        }
        Ok(())
    }
}

type RunFn = fn(&Settings, &mut TestRng) -> Result<Vec<Check>>;

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub budget: Option<f64>,
    run: RunFn,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "flat-euclidean", budget: Some(5.0), run: flat_euclidean },
    Criterion { id: 2, name: "sphere-plus-one", budget: Some(30.0), run: sphere_plus_one },
    Criterion { id: 3, name: "poincare-minus-one", budget: Some(30.0), run: poincare_minus_one },
    Criterion { id: 4, name: "conformal-oracle", budget: None, run: conformal_oracle },
    Criterion { id: 5, name: "wronskian-fundamental-tensor", budget: None, run: wronskian_tensor },
    Criterion { id: 6, name: "transformation-laws", budget: None, run: transformation_laws },
    Criterion { id: 7, name: "horizontal-wronskian", budget: None, run: horizontal_wronskian_identity },
    Criterion { id: 8, name: "contact-reduction", budget: None, run: contact_reduction },
    Criterion { id: 9, name: "oneill-formula", budget: Some(60.0), run: oneill },
    Criterion { id: 10, name: "projective-formula", budget: None, run: projective },
    Criterion { id: 11, name: "katok-constancy", budget: Some(60.0), run: katok_constancy },
    Criterion { id: 12, name: "fanning-algebra", budget: None, run: fanning_algebra },
];

pub fn run_criterion(c: &Criterion, settings: &Settings) -> CriterionReport {
    let start = Instant::now();
    let outcome = (c.run)(settings, &mut settings.rng(c.id));
    let seconds = start.elapsed().as_secs_f64();
    let (checks, error) = match outcome {
        Ok(checks) => (checks, None),
        Err(e) => (vec![], Some(e.to_string())),
    };
    CriterionReport { id: c.id, name: c.name, checks, error, seconds, budget: c.budget }
}

pub fn run_all(settings: &Settings) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|c| run_criterion(c, settings)).collect()
}

/// Maximum that propagates NaN instead of skipping it.
fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

fn rel(a: &Mat, b: &Mat) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1.0)
}

fn point(x: Vec<f64>, y: Vec<f64>) -> Result<PhasePoint> {
    PhasePoint::new(x, y)
}

/// Random flags `(v, u)` with `x` in a ball and `u` well away from `v`.
pub fn random_flags(r: &mut TestRng, n: usize, radius: f64, count: usize) -> Result<Vec<(PhasePoint, Vec<f64>)>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = random_point_in_ball(r, n, radius);
        let y = random_unit_vector(r, n);
        let u = random_unit_vector(r, n);
        let c: f64 = y.iter().zip(&u).map(|(a, b)| a * b).sum();
        if c.abs() < 0.9 {
            out.push((point(x, y)?, u));
        }
    }
    Ok(out)
}

/// A flag in the Hopf total space `(η, ξ₁, ξ₂)` whose vectors are horizontal,
/// `(a, sin²η·c, −cos²η·c)`.
pub fn hopf_flag(eta: f64, v: (f64, f64), w: (f64, f64)) -> Result<(PhasePoint, Vec<f64>)> {
    let (s2, c2) = (eta.sin().powi(2), eta.cos().powi(2));
    let hv = |a: f64, c: f64| vec![a, s2 * c, -c2 * c];
    Ok((point(vec![eta, 0.3, -0.2], hv(v.0, v.1))?, hv(w.0, w.1)))
}

pub fn random_hopf_flags(r: &mut TestRng, count: usize) -> Result<Vec<(PhasePoint, Vec<f64>)>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let eta = r.random_range(0.3..1.25);
        let (a, b) = (random_unit_vector(r, 2), random_unit_vector(r, 2));
        if (a[0] * b[1] - a[1] * b[0]).abs() > 0.3 {
            out.push(hopf_flag(eta, (a[0], a[1]), (b[0], b[1]))?);
        }
    }
    Ok(out)
}

fn unit(m: &MetricSpec, x: Vec<f64>, y: &[f64]) -> Result<PhasePoint> {
    let f = m.finsler_t(&x, y);
    point(x, y.iter().map(|c| c / f).collect())
}

fn constant_curvature(s: &Settings, m: &MetricSpec, flags: &[(PhasePoint, Vec<f64>)], k: f64) -> Result<Vec<Check>> {
    let mut dev = vec![];
    let mut oracle = vec![];
    for (v, u) in flags {
        let kf = flag_curvature_with(m, v, u, s.transport)?;
        dev.push((kf - k).abs());
        oracle.push((kf - riemann_oracle_for(m, &v.x, &v.y, u)?).abs());
    }
    Ok(vec![Check::new(&format!("max|K - ({k})|"), worst(dev), 1e-4), Check::new("max|K - oracle|", worst(oracle), 1e-4)])
}

fn flat_euclidean(s: &Settings, _: &mut TestRng) -> Result<Vec<Check>> {
    let m = zoo::euclidean(2);
    let dir = |a: f64| vec![a.cos(), a.sin()];
    let mut ks = vec![];
    for i in 0..5 {
        let x = vec![-1.0 + 0.5 * i as f64, 0.4 - 0.3 * i as f64];
        for j in 0..5 {
            let v = point(x.clone(), dir(2.0 * PI * j as f64 / 5.0))?;
            for k in 0..8 {
                let u = dir(PI * k as f64 / 4.0 + 0.17);
                ks.push(flag_curvature_with(&m, &v, &u, s.transport)?.abs());
            }
        }
    }
    Ok(vec![Check::new("max|K|", worst(ks), 1e-8)])
}

fn sphere_plus_one(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    constant_curvature(s, &zoo::sphere(1.0)?, &random_flags(r, 2, 1.5, 50)?, 1.0)
}

fn poincare_minus_one(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    constant_curvature(s, &zoo::hyperbolic(), &random_flags(r, 2, 0.8, 50)?, -1.0)
}

fn conformal_oracle(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    let mut errs = vec![];
    for a in [0.2, 0.5] {
        let m = zoo::riemannian_conformal(a, 3)?;
        for (v, u) in random_flags(r, 3, 1.0, 20)? {
            let k = flag_curvature_with(&m, &v, &u, s.transport)?;
            let o = riemann_oracle_for(&m, &v.x, &v.y, &u)?;
            // the curvature vanishes on some planes; below a² · 10⁻² the error is read as absolute
            errs.push((k - o).abs() / o.abs().max(1e-2 * a * a));
        }
    }
    Ok(vec![Check::new("max rel|K - oracle|", worst(errs), 1e-3)])
}

fn wronskian_tensor(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    let metrics = [zoo::sphere(1.0)?, zoo::randers_constant(vec![0.3, -0.2])?];
    let mut devs = vec![];
    for m in &metrics {
        for _ in 0..2 {
            // the orbit covers |t| ≤ 2 plus margins; from near the origin it
            // stays inside the stereographic chart (distance ≤ 2·atan 2)
            let v = unit(m, random_point_in_ball(r, 2, 0.1), &random_unit_vector(r, 2))?;
            let orbit = transport_with(m, &v, 2.0, s.transport)?;
            for i in 0..=20 {
                let (w, g) = orbit.pulled_wronskian(0.1 * i as f64)?;
                devs.push(max_abs(&(w - g)));
            }
        }
    }
    Ok(vec![Check::new("max|W - g|", worst(devs), 1e-6)])
}

fn transformation_laws(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    let w = |inv: &FanningInvariants| inv.w.clone().expect("curve carries a form");
    let (mut sym, mut aff) = (vec![], vec![]);
    for i in 0..20 {
        let n = 1 + i % 3;
        let data = LagrangianCurveData::random(r, n);
        // t ↦ a·t + b with the new curve sampled on the nodes of the old one
        let a = r.random_range(0.5..2.0);
        let b = r.random_range(-0.2..0.2);
        let tr = r.random_range(-0.2..0.2);
        let t0 = a * tr + b;
        let base = invariants(&data.clone().into_curve(), t0, s.stencil)?;

        let tm = random_symplectic(r, n);
        let ti = inverse(&tm).ok_or(GeomError::SingularTransform)?;
        let moved = invariants(&TransformedCurve::new(data.clone().into_curve(), tm.clone())?, t0, s.stencil)?;
        sym.push(worst([
            rel(&moved.k, &(&tm * &base.k * &ti)),
            rel(&moved.f, &(&tm * &base.f * &ti)),
            rel(&w(&moved), &w(&base)),
        ]));

        let st = StencilSpec { h: s.stencil.h / a, ..s.stencil };
        let re = invariants(&ReparametrizedCurve::affine(data.into_curve(), a, b), tr, st)?;
        let pred = reparametrize([t0, a, 0.0, 0.0], &base)?;
        aff.push(worst([
            rel(&re.f, &pred.f),
            rel(&re.fdot, &pred.fdot),
            rel(&re.schwarzian, &pred.schwarzian),
            rel(&re.k, &pred.k),
            rel(&w(&re), pred.w.as_ref().expect("curve carries a form")),
        ]));
    }
    Ok(vec![Check::new("symplectic equivariance", worst(sym), 1e-9), Check::new("affine reparametrization", worst(aff), 1e-9)])
}

fn horizontal_wronskian_identity(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    let mut res = vec![];
    for i in 0..20 {
        let c = LagrangianCurveData::random(r, 1 + i % 3).into_curve();
        let t = r.random_range(-0.5..0.5);
        let inv = invariants(&c, t, s.stencil)?;
        let wk = inv.w.as_ref().expect("curve carries a form") * inv.k_ell();
        res.push(rel(&horizontal_wronskian(&c, t, s.stencil)?, &wk));
    }
    Ok(vec![Check::new("max|W_h - W K|", worst(res), 1e-6)])
}

fn contact_reduction(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    let (mut kr, mut blocks) = (vec![], vec![]);
    for m in [zoo::sphere(1.0)?, katok_metric(0.3)?] {
        let v = unit(&m, random_point_in_ball(r, 2, 0.5), &random_unit_vector(r, 2))?;
        let orbit = transport_with(&m, &v, 1.1, s.transport)?;
        for t in [0.3, 0.7, 1.1] {
            let c = contact_reduce(&orbit, t)?;
            kr.push(c.k_residual);
            blocks.push(max_abs(&(&c.block_full - &c.block_reduced)));
        }
    }
    Ok(vec![Check::new("max|K(C - tS)|/|C - tS|", worst(kr), 1e-5), Check::new("max block deviation", worst(blocks), 1e-5)])
}

/// `span(x₁ … x_n, y₁ … y_m)` moved by a random symplectic map.
fn random_coisotropic(r: &mut TestRng, n: usize, m: usize) -> Result<CoisotropicSetup> {
    let idx: Vec<usize> = (0..n).chain(n..n + m).collect();
    let w = Mat::from_fn(2 * n, idx.len(), |i, j| if i == idx[j] { 1.0 } else { 0.0 });
    CoisotropicSetup::new(SymplecticForm::standard(n), &(random_symplectic(r, n) * w))
}

fn oneill(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    let sub = Submersion::hopf(1.0)?;
    let (mut base, mut total, mut corr) = (vec![], vec![], vec![]);
    for (v, w) in random_hopf_flags(r, 4)? {
        let k = submersion_curvature(&sub, &v, &w, TangentMethod::Analytic)?;
        base.push((k.k_base - 4.0).abs());
        total.push((k.k_total - 1.0).abs());
        corr.push((k.correction - 3.0).abs());
    }
    let mut gap = vec![];
    for (n, m) in [(2, 1), (3, 1), (3, 2), (4, 2), (4, 3)].into_iter().cycle().take(10) {
        let curve = LagrangianCurveData::random(r, n).into_curve();
        let setup = random_coisotropic(r, n, m)?;
        let t = r.random_range(-0.3..0.3);
        let full = invariants(&curve, t, s.stencil)?;
        let red = reduce_curve(&setup, &curve, t)?;
        let split = red.split(t)?;
        let ri = invariants(&red, t, s.stencil)?;
        let alpha = random_unit_vector(r, m);
        let sides = oneill_formula(&full, &ri, &split, &alpha)?;
        gap.push((sides.lhs - sides.rhs).abs() / sides.lhs.abs().max(1.0));
    }
    Ok(vec![
        Check::new("Hopf |K_base - 4|", worst(base), 1e-2),
        Check::new("Hopf |K_total - 1|", worst(total), 1e-2),
        Check::new("Hopf |correction - 3|", worst(corr), 1e-2),
        Check::new("max|lhs - rhs|", worst(gap), 1e-3),
    ])
}

fn projective(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    let sphere = zoo::sphere(1.0)?;
    let theta = ClosedOneForm::new(OneForm::Exact(Potential::StereoCoordinate { index: 0, scale: 0.2 }));
    let f = projective_deform(&sphere, &theta)?;
    let mut errs = vec![];
    for (v, w) in random_flags(r, 2, 1.2, 10)? {
        let rhs = projective_curvature_rhs(&sphere, &theta, &v, &w)?;
        errs.push((flag_curvature_with(&f, &v, &w, s.transport)? - rhs.k_phi_form).abs());
    }
    let flat = zoo::euclidean(2);
    let constant = ClosedOneForm::new(OneForm::Constant(vec![0.3, -0.1]));
    let g = projective_deform(&flat, &constant)?;
    let mut ks = vec![];
    for (v, w) in random_flags(r, 2, 1.0, 5)? {
        let rhs = projective_curvature_rhs(&flat, &constant, &v, &w)?;
        ks.push(worst([flag_curvature_with(&g, &v, &w, s.transport)?.abs(), rhs.k_phi_form.abs()]));
    }
    Ok(vec![Check::new("max|K_direct - K_formula|", worst(errs), 1e-3), Check::new("Euclidean max|K|", worst(ks), 1e-6)])
}

fn katok_constancy(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    let flags = katok_flags(r.random(), 30);
    let mut devs = vec![];
    for eps in [0.1, 0.3] {
        let m = katok_metric(eps)?;
        for (v, u) in &flags {
            devs.push((flag_curvature_with(&m, v, u, s.transport)? - 1.0).abs());
        }
    }
    Ok(vec![Check::new("max|K - 1|", worst(devs), 1e-3)])
}

/// `A(t)·R(t)` for a quadratic change of frame `R`.
fn reframed(data: LagrangianCurveData, r: [Mat; 3]) -> AnalyticCurve {
    let n = data.s[0].nrows();
    AnalyticCurve::new(n, move |t| {
        let ft = data.frame(t);
        let rt = &r[0] + &r[1] * t + &r[2] * (t * t);
        let rd = &r[1] + &r[2] * (2.0 * t);
        let rdd = &r[2] * 2.0;
        FrameTriple::new(&ft.a * &rt, &ft.adot * &rt + &ft.a * &rd, &ft.addot * &rt + &ft.adot * &rd * 2.0 + &ft.a * rdd)
    })
}

fn fanning_algebra(s: &Settings, r: &mut TestRng) -> Result<Vec<Check>> {
    let (mut nil, mut refl, mut proj, mut frame, mut sym) = (vec![], vec![], vec![], vec![], vec![]);
    for i in 0..50 {
        let n = 1 + i % 3;
        let data = LagrangianCurveData::random(r, n);
        let t = r.random_range(-0.5..0.5);
        let c = data.clone().into_curve();
        let inv = invariants(&c, t, s.stencil)?;
        let id = Mat::identity(2 * n, 2 * n);
        let scale = max_abs(&inv.f).max(1.0);
        nil.push(max_abs(&(&inv.f * &inv.f)) / (scale * scale));
        refl.push(max_abs(&(&inv.fdot * &inv.fdot - &id)));
        proj.push(worst([
            max_abs(&(&inv.p_h * &inv.p_h - &inv.p_h)),
            max_abs(&(&inv.p_ell * &inv.p_ell - &inv.p_ell)),
            max_abs(&(&inv.p_h + &inv.p_ell - &id)),
        ]));
        let r0 = Mat::identity(n, n) * 2.0 + random_matrix(r, n, n) * 0.3;
        let other = invariants(&reframed(data, [r0, random_matrix(r, n, n) * 0.5, random_matrix(r, n, n) * 0.5]), t, s.stencil)?;
        frame.push(worst([rel(&other.f, &inv.f), rel(&other.fdot, &inv.fdot), rel(&other.k, &inv.k)]));
        let wk = inv.w.as_ref().expect("curve carries a form") * inv.k_ell();
        sym.push(max_abs(&(&wk - wk.transpose())) / max_abs(&wk).max(1.0));
    }
    Ok(vec![
        Check::new("max|F^2|", worst(nil), 1e-8),
        Check::new("max|Fdot^2 - I|", worst(refl), 1e-8),
        Check::new("projector residual", worst(proj), 1e-8),
        Check::new("frame dependence", worst(frame), 1e-8),
        Check::new("W-asymmetry of K", worst(sym), 1e-8),
    ])
}

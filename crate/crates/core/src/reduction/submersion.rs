//! Curvature of the base of a submersion through the reduced Jacobi curve.

use super::linear::{coords_in, CoisotropicSetup};
use super::split::{oneill_endomorphism, oneill_formula, ReducedCurve, SplitReference};
use crate::error::{GeomError, Result};
use crate::fanning::invariants;
use crate::finsler::{dual_legendre_t, fundamental_tensor, zoo, Energy, MetricSpec, PhasePoint};
use crate::jacobi::{canonicalize_flag, flag_curvature, jacobi_frame, transport};
use crate::numkit::{fiber_gradient_t, inverse, max_abs, nullspace, column_space, Dual, Mat, Real, Vector, RANK_TOL};

/// The map `f: M₁ → M₂` in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum SubmersionMap {
    /// `(x₁, …, x_n) ↦ (x₁, …, x_m)`.
    Projection { total: usize, base: usize },
    /// Hopf coordinates `(η, ξ₁, ξ₂) ↦ (2η, ξ₁ − ξ₂)` onto polar coordinates.
    Hopf,
}

impl SubmersionMap {
    pub fn total_dim(&self) -> usize {
        match self {
            SubmersionMap::Projection { total, .. } => *total,
            SubmersionMap::Hopf => 3,
        }
    }

    pub fn base_dim(&self) -> usize {
        match self {
            SubmersionMap::Projection { base, .. } => *base,
            SubmersionMap::Hopf => 2,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SubmersionMap::Projection { base, .. } => x[..*base].to_vec(),
            SubmersionMap::Hopf => vec![2.0 * x[0], x[1] - x[2]],
        }
    }

    /// `df` at `x`, `m × n`.
    pub fn jacobian(&self, _x: &[f64]) -> Mat {
        match self {
            SubmersionMap::Projection { total, base } => Mat::identity(*base, *total),
            SubmersionMap::Hopf => Mat::from_row_slice(2, 3, &[2.0, 0.0, 0.0, 0.0, 1.0, -1.0]),
        }
    }

    /// A basis of `ker df` at `x`, as vector fields over any `T`.
    pub fn vertical_fields<T: Real>(&self, _x: &[T]) -> Vec<Vec<T>> {
        match self {
            SubmersionMap::Projection { total, base } => (*base..*total)
                .map(|j| (0..*total).map(|i| T::cst(if i == j { 1.0 } else { 0.0 })).collect())
                .collect(),
            SubmersionMap::Hopf => vec![vec![T::zero(), T::one(), T::one()]],
        }
    }
}

/// A submersion `f: (M₁, F₁) → (M₂, F₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Submersion {
    pub total: MetricSpec,
    pub base: MetricSpec,
    pub map: SubmersionMap,
}

impl Submersion {
    pub fn new(total: MetricSpec, base: MetricSpec, map: SubmersionMap) -> Result<Self> {
        if total.n != map.total_dim() || base.n != map.base_dim() {
            return Err(GeomError::DimensionMismatch(format!(
                "map R^{} -> R^{} between charts of dimension {} and {}",
                map.total_dim(),
                map.base_dim(),
                total.n,
                base.n
            )));
        }
        Ok(Submersion { total, base, map })
    }

    /// `S³(R) → S²(R/2)`.
    pub fn hopf(radius: f64) -> Result<Self> {
        Self::new(zoo::hopf_total(radius)?, zoo::s2_polar(radius / 2.0)?, SubmersionMap::Hopf)
    }

    /// Euclidean `ℝⁿ → ℝᵐ`.
    pub fn projection(total: usize, base: usize) -> Result<Self> {
        if base == 0 || base >= total {
            return Err(GeomError::DimensionMismatch(format!("projection R^{total} -> R^{base}")));
        }
        Self::new(zoo::euclidean(total), zoo::euclidean(base), SubmersionMap::Projection { total, base })
    }

    /// `f_*v`.
    pub fn push(&self, v: &PhasePoint) -> Result<PhasePoint> {
        let y = self.map.jacobian(&v.x) * Vector::from_column_slice(&v.y);
        PhasePoint::new(self.map.apply(&v.x), y.iter().copied().collect())
    }

    /// `|F₁(v) − F₂(f_*v)|`.
    pub fn horizontality_defect(&self, v: &PhasePoint) -> Result<f64> {
        Ok((self.total.finsler(v)? - self.base.finsler(&self.push(v)?)?).abs())
    }

    /// Riemannian horizontal lift `y = g⁻¹dfᵀ(df·g⁻¹·dfᵀ)⁻¹u` of `u ∈ T_{f(x)}M₂`.
    pub fn horizontal_lift(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let chart = self
            .total
            .riemannian_chart()
            .ok_or_else(|| GeomError::InvalidMetric("horizontal lifts need a Riemannian total space".into()))?;
        let ginv = inverse(&chart.metric(x)).ok_or(GeomError::SingularTransform)?;
        let df = self.map.jacobian(x);
        let gram = &df * &ginv * df.transpose();
        let k = inverse(&gram).ok_or(GeomError::SingularTransform)?;
        let y = ginv * df.transpose() * k * Vector::from_column_slice(u);
        Ok(y.iter().copied().collect())
    }
}

/// How `T_v𝒩` is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TangentMethod {
    /// Kernel of the differentials of `ℒ(v)·V_j`, `V_j` spanning `ker df`.
    #[default]
    Analytic,
    /// Finite differences of `(x, u) ↦ (x, lift(x, u))`; Riemannian only.
    ConeLinearization,
}

fn legendre_t<T: Real>(m: &MetricSpec, x: &[T], y: &[T]) -> Option<Vec<T>> {
    match m.comet() {
        Some(cm) => dual_legendre_t(cm, x, y),
        None => Some(fiber_gradient_t(&Energy(m), x, y)),
    }
}

/// Basis of `T_v𝒩`, `𝒩` the union of the horizontal cones, in the
/// coordinates `(δx, δy)`.
pub fn horizontal_tangent(sub: &Submersion, v: &PhasePoint, method: TangentMethod) -> Result<Mat> {
    let n = v.n();
    let m = sub.map.base_dim();
    let basis = match method {
        TangentMethod::Analytic => {
            let z = v.state();
            let k = n - m;
            let mut grad = Mat::zeros(k, 2 * n);
            for s in 0..2 * n {
                let zd: Vec<Dual<f64>> =
                    z.iter().enumerate().map(|(i, &c)| Dual::new(c, if i == s { 1.0 } else { 0.0 })).collect();
                let (x, y) = zd.split_at(n);
                let l = legendre_t(&sub.total, x, y)
                    .ok_or_else(|| GeomError::NonFiniteValue("Legendre transform".into()))?;
                for (j, vf) in sub.map.vertical_fields(x).iter().enumerate() {
                    let phi = l.iter().zip(vf).fold(Dual::constant(0.0), |acc, (a, b)| acc + *a * *b);
                    grad[(j, s)] = phi.d;
                }
            }
            if grad.iter().any(|v| !v.is_finite()) {
                return Err(GeomError::NonFiniteValue("horizontal-cone constraints".into()));
            }
            nullspace(&grad, RANK_TOL)
        }
        TangentMethod::ConeLinearization => {
            let u0: Vec<f64> = (sub.map.jacobian(&v.x) * Vector::from_column_slice(&v.y)).iter().copied().collect();
            let h = 1e-5;
            let mut cols = Mat::zeros(2 * n, n + m);
            for p in 0..n + m {
                let at = |s: f64| -> Result<Vec<f64>> {
                    let mut x = v.x.clone();
                    let mut u = u0.clone();
                    if p < n {
                        x[p] += s * h;
                    } else {
                        u[p - n] += s * h;
                    }
                    let y = sub.horizontal_lift(&x, &u)?;
                    Ok(x.into_iter().chain(y).collect())
                };
                let (plus, minus) = (at(1.0)?, at(-1.0)?);
                for i in 0..2 * n {
                    cols[(i, p)] = (plus[i] - minus[i]) / (2.0 * h);
                }
            }
            column_space(&cols, RANK_TOL)
        }
    };
    if basis.ncols() != n + m {
        return Err(GeomError::RankDeficient);
    }
    Ok(basis)
}

/// Flag curvatures on both sides of a submersion.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmersionCurvature {
    /// `K_{F₂}(f_*v, f_*Π)` from the reduced Jacobi curve.
    pub k_base: f64,
    /// `K_{F₁}(v, Π)`.
    pub k_total: f64,
    /// `3W(𝐀a, 𝐀a)/W(a, a)`.
    pub correction: f64,
    /// `K_{F₂}` computed directly on the base.
    pub k_base_direct: f64,
    /// `|W_R − W|_𝔥|` relative to `|W_R|`.
    pub restriction_residual: f64,
    /// W-symmetry residual of `𝐀`.
    pub symmetry_residual: f64,
}

/// Flag curvature of the base along `f_*v`, `f_*w` via reduction, with the
/// total-space curvature and the O'Neill correction.
pub fn submersion_curvature(
    sub: &Submersion,
    v: &PhasePoint,
    w: &[f64],
    method: TangentMethod,
) -> Result<SubmersionCurvature> {
    let n = sub.total.n;
    if v.n() != n || w.len() != n {
        return Err(GeomError::DimensionMismatch(format!("flag of dimension {} in a chart of dimension {n}", w.len())));
    }
    let f1 = sub.total.finsler(v)?;
    let defect = sub.horizontality_defect(v)?;
    if defect > 1e-9 * f1.max(1.0) {
        return Err(GeomError::HorizontalityViolation(defect));
    }
    let v = PhasePoint::new(v.x.clone(), v.y.iter().map(|c| c / f1).collect())?;
    let g = fundamental_tensor(&sub.total, &v)?;
    let w = canonicalize_flag(&g, &v.y, w)?;

    let tn = horizontal_tangent(sub, &v, method)?;
    let orbit = transport(&sub.total, &v, 0.0)?;
    let sample = jacobi_frame(&orbit, 0.0)?;
    let full = sample.invariants(&orbit.omega0)?;
    let setup = CoisotropicSetup::new(orbit.omega0.clone(), &tn)?;
    let refs = SplitReference::at(&setup, &sample.frame)?;
    let reduced = ReducedCurve::new(&orbit, setup, refs);
    let split = reduced.split(0.0)?;
    let red = invariants(&reduced, 0.0, orbit.stencil_at(0.0))?;

    let c = &sample.iota * Vector::from_column_slice(&w);
    let (alpha, res) = coords_in(&split.c[0], &Mat::from_column_slice(n, 1, c.as_slice()));
    if res > 1e-6 {
        return Err(GeomError::HorizontalityViolation(res));
    }
    let sides = oneill_formula(&full, &red, &split, alpha.as_slice())?;
    let wr = red.w.clone().expect("reduced Wronskian requested");
    let al = alpha.column(0).into_owned();
    let wr_aa = al.dot(&(&wr * &al));
    let restriction_residual = max_abs(&(&wr - split.w_h())) / max_abs(&wr);
    let symmetry_residual = oneill_endomorphism(&split)?.symmetry_residual;

    let pushed = sub.push(&v)?;
    let wb: Vec<f64> = (sub.map.jacobian(&v.x) * Vector::from_column_slice(&w)).iter().copied().collect();
    let k_base_direct = flag_curvature(&sub.base, &pushed, &wb)?;
    Ok(SubmersionCurvature {
        k_base: sides.lhs / wr_aa,
        k_total: sides.curvature_term / sides.norm,
        correction: sides.correction / sides.norm,
        k_base_direct,
        restriction_residual,
        symmetry_residual,
    })
}

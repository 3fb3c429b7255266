use super::fields::{sum_sq, OneForm, VectorField};
use crate::error::{GeomError, Result};
use crate::numkit::{fiber_gradient_t, fiber_hessian_t, solve, Mat, PhaseField, Real};

/// Diagonal Riemannian metrics in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum RiemannianChart {
    Euclidean,
    /// Sphere of the given radius in the stereographic chart,
    /// `g = 4R²/(1+|x|²)²·δ`.
    Stereographic { radius: f64 },
    /// Poincaré ball, `g = 4/(1−|x|²)²·δ`.
    Poincare,
    /// `g = e^{2a·x₁}·δ`.
    Exponential { a: f64 },
    /// Round 3-sphere of radius `R` in Hopf coordinates `(η, ξ₁, ξ₂)`,
    /// `g = R²·diag(1, cos²η, sin²η)`.
    HopfTotal { radius: f64 },
    /// Round 2-sphere of radius `r` in polar coordinates `(θ, φ)`,
    /// `g = r²·diag(1, sin²θ)`.
    S2Polar { radius: f64 },
}

impl RiemannianChart {
    /// Diagonal entries of `g(x)`.
    pub fn diag<T: Real>(&self, x: &[T]) -> Vec<T> {
        let n = x.len();
        match self {
            RiemannianChart::Euclidean => vec![T::one(); n],
            RiemannianChart::Stereographic { radius } => {
                let q = sum_sq(x) + 1.0;
                vec![(q * q).recip() * (4.0 * radius * radius); n]
            }
            RiemannianChart::Poincare => {
                let q = T::one() - sum_sq(x);
                vec![(q * q).recip() * 4.0; n]
            }
            RiemannianChart::Exponential { a } => vec![(x[0] * (2.0 * a)).exp(); n],
            RiemannianChart::HopfTotal { radius } => {
                let r2 = radius * radius;
                let (c, s) = (x[0].cos(), x[0].sin());
                vec![T::cst(r2), c * c * r2, s * s * r2]
            }
            RiemannianChart::S2Polar { radius } => {
                let r2 = radius * radius;
                let s = x[0].sin();
                vec![T::cst(r2), s * s * r2]
            }
        }
    }

    pub fn metric(&self, x: &[f64]) -> Mat {
        Mat::from_diagonal(&nalgebra::DVector::from_vec(self.diag(x)))
    }

    /// Chart dimension when it is fixed by the family.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            RiemannianChart::HopfTotal { .. } => Some(3),
            RiemannianChart::S2Polar { .. } => Some(2),
            _ => None,
        }
    }

    fn norm<T: Real>(&self, x: &[T], y: &[T]) -> T {
        let g = self.diag(x);
        g.iter().zip(y).fold(T::zero(), |acc, (gi, yi)| acc + *gi * *yi * *yi).sqrt()
    }

    fn conorm<T: Real>(&self, x: &[T], xi: &[T]) -> T {
        let g = self.diag(x);
        g.iter().zip(xi).fold(T::zero(), |acc, (gi, zi)| acc + *zi * *zi / *gi).sqrt()
    }
}

/// A co-metric (a Minkowski norm on covectors) in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum CoMetric {
    /// `F*(x, ξ) = |ξ|_{g⁻¹} + ξ(V)`.
    RiemannianWind { alpha: RiemannianChart, wind: VectorField },
}

impl CoMetric {
    pub fn eval<T: Real>(&self, x: &[T], xi: &[T]) -> T {
        match self {
            CoMetric::RiemannianWind { alpha, wind } => {
                let v = wind.eval(x);
                let lin = xi.iter().zip(&v).fold(T::zero(), |acc, (a, b)| acc + *a * *b);
                alpha.conorm(x, xi) + lin
            }
        }
    }

    /// Covector used to start the Newton solve for `ℒ_F(y)`.
    pub fn warm_start(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match self {
            CoMetric::RiemannianWind { alpha, .. } => {
                let g = alpha.diag(x);
                g.iter().zip(y).map(|(gi, yi)| gi * yi).collect()
            }
        }
    }
}

/// `H(x, ξ) = ½F*(x, ξ)²` as a fiber field.
pub struct Hamiltonian<'a>(pub &'a CoMetric);

impl PhaseField for Hamiltonian<'_> {
    fn eval<T: Real>(&self, x: &[T], xi: &[T]) -> T {
        self.0.eval(x, xi).sq() * 0.5
    }
}

/// The family of a metric, each member evaluable over any [`Real`].
#[derive(Clone, Debug, PartialEq)]
pub enum MetricFamily {
    Riemannian(RiemannianChart),
    /// `F = F₀ + β` for a base metric `F₀`.
    Randers { base: Box<MetricFamily>, beta: OneForm },
    /// `F = (F*)*`, defined through a co-metric.
    Dual(CoMetric),
}

/// Newton settings of the dual-metric solve.
pub const DUAL_MAX_ITER: usize = 50;
pub const DUAL_TOL: f64 = 1e-12;

impl MetricFamily {
    pub fn finsler<T: Real>(&self, x: &[T], y: &[T]) -> T {
        match self {
            MetricFamily::Riemannian(c) => c.norm(x, y),
            MetricFamily::Randers { base, beta } => base.finsler(x, y) + beta.apply(x, y),
            MetricFamily::Dual(cm) => dual_eval(cm, x, y),
        }
    }

    pub fn is_riemannian(&self) -> bool {
        matches!(self, MetricFamily::Riemannian(_))
    }
}

/// Solves `∂_ξH(x, ξ) = y` in `f64` with damped Newton steps.
pub fn dual_legendre(cm: &CoMetric, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = y.len();
    let h = Hamiltonian(cm);
    let fail = || GeomError::NewtonDivergence { x: x.to_vec(), v: y.to_vec() };
    let resid = |xi: &[f64]| -> Vec<f64> {
        let g = fiber_gradient_t(&h, x, xi);
        g.iter().zip(y).map(|(a, b)| a - b).collect()
    };
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = norm(y).max(1.0);
    let mut xi = cm.warm_start(x, y);
    let mut r = resid(&xi);
    let mut rn = norm(&r);
    for _ in 0..DUAL_MAX_ITER {
        if !rn.is_finite() {
            return Err(fail());
        }
        if rn <= DUAL_TOL * scale {
            return Ok(xi);
        }
        let hess = Mat::from_row_slice(n, n, &fiber_hessian_t(&h, x, &xi));
        let step = solve(&hess, &Mat::from_column_slice(n, 1, &r)).ok_or_else(fail)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = (0..n).map(|i| xi[i] - lambda * step[i]).collect();
            let rt = resid(&trial);
            let rtn = norm(&rt);
            if rtn.is_finite() && rtn < rn {
                xi = trial;
                r = rt;
                rn = rtn;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                // No further decrease is possible; accept if already at
                // rounding level.
                if rn <= 1e3 * DUAL_TOL * scale {
                    return Ok(xi);
                }
                return Err(fail());
            }
        }
    }
    if rn <= 1e3 * DUAL_TOL * scale {
        Ok(xi)
    } else {
        Err(fail())
    }
}

/// Number of Newton refinements needed in `T` arithmetic so that all
/// derivatives carried by `T` are exact (quadratic convergence doubles the
/// number of correct orders at each step).
fn lift_steps<T: Real>() -> usize {
    let d = T::depth();
    let mut k = 0;
    while (1usize << k) < d + 1 {
        k += 1;
    }
    k
}

/// `ℒ_F(y)` for a dual metric, over any `T`.
pub fn dual_legendre_t<T: Real>(cm: &CoMetric, x: &[T], y: &[T]) -> Option<Vec<T>> {
    let n = y.len();
    let xr: Vec<f64> = x.iter().map(|v| v.re()).collect();
    let yr: Vec<f64> = y.iter().map(|v| v.re()).collect();
    let xi0 = dual_legendre(cm, &xr, &yr).ok()?;
    let mut xi: Vec<T> = xi0.iter().map(|&v| T::cst(v)).collect();
    let h = Hamiltonian(cm);
    for _ in 0..lift_steps::<T>() {
        let g = fiber_gradient_t(&h, x, &xi);
        let hess = fiber_hessian_t(&h, x, &xi);
        let r: Vec<T> = g.iter().zip(y).map(|(a, b)| *a - *b).collect();
        let step = crate::numkit::solve_t(&hess, n, &r, 1)?;
        for i in 0..n {
            xi[i] -= step[i];
        }
    }
    Some(xi)
}

fn dual_eval<T: Real>(cm: &CoMetric, x: &[T], y: &[T]) -> T {
    if y.iter().all(|v| v.re() == 0.0) {
        return T::cst(f64::NAN);
    }
    match dual_legendre_t(cm, x, y) {
        Some(xi) => cm.eval(x, &xi),
        None => T::cst(f64::NAN),
    }
}

/// Validity region of a chart: an axis-aligned box, optionally intersected
/// with a centred ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub max_radius: Option<f64>,
}

impl Domain {
    pub fn cube(n: usize, half: f64) -> Self {
        Domain { lo: vec![-half; n], hi: vec![half; n], max_radius: None }
    }

    pub fn ball(n: usize, radius: f64) -> Self {
        Domain { lo: vec![-radius; n], hi: vec![radius; n], max_radius: Some(radius) }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v > *l && *v < *h)
            && self.max_radius.is_none_or(|r| x.iter().map(|v| v * v).sum::<f64>() < r * r)
    }

    /// Grid points `k^n` (interior, equally spaced) that lie in the domain.
    pub fn grid(&self, k: usize) -> Vec<Vec<f64>> {
        let n = self.lo.len();
        let mut out = Vec::new();
        let total = k.pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut x = vec![0.0; n];
            for (i, xi) in x.iter_mut().enumerate() {
                let j = rem % k;
                rem /= k;
                let frac = (j as f64 + 0.5) / k as f64;
                *xi = self.lo[i] + frac * (self.hi[i] - self.lo[i]);
            }
            if self.contains(&x) {
                out.push(x);
            }
        }
        out
    }
}

/// A Finsler metric on a coordinate chart.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    pub n: usize,
    pub family: MetricFamily,
    pub domain: Domain,
}

/// A point `(x, y)` of the slit tangent bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(GeomError::DimensionMismatch(format!("x has {} entries, y has {}", x.len(), y.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(GeomError::NonFiniteValue("phase point".into()));
        }
        if y.iter().all(|v| *v == 0.0) {
            return Err(GeomError::InvalidMetric("phase point on the zero section".into()));
        }
        Ok(PhasePoint { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `(x, y)` concatenated.
    pub fn state(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }
}

/// `E = ½F²` as a fiber field.
pub struct Energy<'a>(pub &'a MetricSpec);

impl PhaseField for Energy<'_> {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T {
        self.0.family.finsler(x, y).sq() * 0.5
    }
}

impl MetricSpec {
    pub fn new(n: usize, family: MetricFamily, domain: Domain) -> Result<Self> {
        if domain.lo.len() != n || domain.hi.len() != n {
            return Err(GeomError::DimensionMismatch(format!("domain of dimension {} for n = {n}", domain.lo.len())));
        }
        let m = MetricSpec { n, family, domain };
        m.check_dims()?;
        Ok(m)
    }

    fn check_dims(&self) -> Result<()> {
        fn walk(f: &MetricFamily, n: usize) -> Result<()> {
            let fixed = match f {
                MetricFamily::Riemannian(c) => c.fixed_dim(),
                MetricFamily::Randers { base, beta } => {
                    beta.check_dim(n)?;
                    return walk(base, n);
                }
                MetricFamily::Dual(CoMetric::RiemannianWind { alpha, wind }) => {
                    if let VectorField::Constant(c) = wind {
                        if c.len() != n {
                            return Err(GeomError::DimensionMismatch(format!("vector field with {} entries", c.len())));
                        }
                    }
                    alpha.fixed_dim()
                }
            };
            match fixed {
                Some(d) if d != n => Err(GeomError::DimensionMismatch(format!("chart of dimension {d} for n = {n}"))),
                _ => Ok(()),
            }
        }
        walk(&self.family, self.n)
    }

    pub fn finsler_t<T: Real>(&self, x: &[T], y: &[T]) -> T {
        self.family.finsler(x, y)
    }

    pub fn finsler(&self, p: &PhasePoint) -> Result<f64> {
        let f = self.family.finsler(&p.x, &p.y);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(self.nonfinite_error(p))
        }
    }

    fn nonfinite_error(&self, p: &PhasePoint) -> GeomError {
        match &self.family {
            MetricFamily::Dual(_) => GeomError::NewtonDivergence { x: p.x.clone(), v: p.y.clone() },
            _ => GeomError::NonFiniteValue("Finsler function".into()),
        }
    }

    /// The co-metric, when the metric is defined through one.
    pub fn comet(&self) -> Option<&CoMetric> {
        match &self.family {
            MetricFamily::Dual(c) => Some(c),
            _ => None,
        }
    }

    /// The Riemannian chart, for Riemannian metrics.
    pub fn riemannian_chart(&self) -> Option<&RiemannianChart> {
        match &self.family {
            MetricFamily::Riemannian(c) => Some(c),
            _ => None,
        }
    }
}

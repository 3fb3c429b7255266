//! Named metrics with fixed chart domains.

use std::f64::consts::PI;

use super::fields::{OneForm, VectorField};
use super::metric::{CoMetric, Domain, MetricFamily, MetricSpec, RiemannianChart};
use crate::error::{GeomError, Result};

pub fn euclidean(n: usize) -> MetricSpec {
    MetricSpec { n, family: MetricFamily::Riemannian(RiemannianChart::Euclidean), domain: Domain::cube(n, 50.0) }
}

/// Round sphere of the given radius in the stereographic chart.
pub fn sphere(radius: f64) -> Result<MetricSpec> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GeomError::InvalidMetric(format!("sphere radius {radius}")));
    }
    MetricSpec::new(2, MetricFamily::Riemannian(RiemannianChart::Stereographic { radius }), Domain::ball(2, 4.0))
}

/// Poincaré disk (curvature −1).
pub fn hyperbolic() -> MetricSpec {
    MetricSpec { n: 2, family: MetricFamily::Riemannian(RiemannianChart::Poincare), domain: Domain::ball(2, 0.97) }
}

/// Conformally flat `e^{2a·x₁}·δ` on a cube in ℝⁿ.
pub fn riemannian_conformal(a: f64, n: usize) -> Result<MetricSpec> {
    if n < 2 || !a.is_finite() {
        return Err(GeomError::InvalidMetric(format!("conformal family needs n >= 2 and finite a (n = {n}, a = {a})")));
    }
    MetricSpec::new(n, MetricFamily::Riemannian(RiemannianChart::Exponential { a }), Domain::cube(n, 3.0))
}

/// Minkowski metric `|y| + β·y` with constant `β`, `|β| < 1`.
pub fn randers_constant(beta: Vec<f64>) -> Result<MetricSpec> {
    let n = beta.len();
    let norm = beta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm >= 1.0 {
        return Err(GeomError::SmallnessViolation(format!("|beta| = {norm} >= 1")));
    }
    MetricSpec::new(
        n,
        MetricFamily::Randers {
            base: Box::new(MetricFamily::Riemannian(RiemannianChart::Euclidean)),
            beta: OneForm::Constant(beta),
        },
        Domain::cube(n, 50.0),
    )
}

/// Katok perturbation of the unit sphere: co-metric `F₀* + ξ(V)` with `V`
/// the rotation field scaled by `ε`.
pub fn katok(epsilon: f64) -> Result<MetricSpec> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(GeomError::SmallnessViolation(format!("epsilon = {epsilon} not in [0, 1)")));
    }
    MetricSpec::new(
        2,
        MetricFamily::Dual(CoMetric::RiemannianWind {
            alpha: RiemannianChart::Stereographic { radius: 1.0 },
            wind: VectorField::Rotation { scale: epsilon },
        }),
        Domain::ball(2, 4.0),
    )
}

/// 3-sphere of radius `R` in Hopf coordinates `(η, ξ₁, ξ₂)`.
pub fn hopf_total(radius: f64) -> Result<MetricSpec> {
    MetricSpec::new(
        3,
        MetricFamily::Riemannian(RiemannianChart::HopfTotal { radius }),
        Domain { lo: vec![0.02, -50.0, -50.0], hi: vec![PI / 2.0 - 0.02, 50.0, 50.0], max_radius: None },
    )
}

/// 2-sphere of radius `r` in polar coordinates.
pub fn s2_polar(radius: f64) -> Result<MetricSpec> {
    MetricSpec::new(
        2,
        MetricFamily::Riemannian(RiemannianChart::S2Polar { radius }),
        Domain { lo: vec![0.02, -50.0], hi: vec![PI - 0.02, 50.0], max_radius: None },
    )
}

/// Short description of every named metric, for the CLI.
pub const ZOO: &[(&str, &str)] = &[
    ("euclidean", "flat metric on R^n; params: n (default 2)"),
    ("sphere", "round sphere in the stereographic chart; params: radius (default 1)"),
    ("hyperbolic", "Poincare disk, curvature -1"),
    ("riemannian-conformal", "exp(2a x1) * delta; params: a (default 0.2), n (default 3)"),
    ("randers", "Euclidean norm plus a constant one-form; params: beta (array, |beta| < 1)"),
    ("katok", "Katok perturbation of the unit sphere by a rotation field; params: epsilon in [0, 1)"),
    ("hopf-total", "3-sphere in Hopf coordinates (eta, xi1, xi2); params: radius (default 1)"),
    ("s2-polar", "2-sphere in polar coordinates; params: radius (default 1)"),
];

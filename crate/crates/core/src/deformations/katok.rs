use crate::error::{GeomError, Result};
use crate::finsler::{zoo, Domain, MetricSpec, PhasePoint, RiemannianChart, VectorField};
use crate::jacobi::flag_curvature;
use crate::numkit::{Dual, Mat};
use crate::samples::{random_point_in_ball, random_unit_vector, rng};

/// A vector field on a Riemannian chart, meant to be Killing.
#[derive(Clone, Debug, PartialEq)]
pub struct KillingField {
    pub field: VectorField,
    pub chart: RiemannianChart,
}

impl KillingField {
    /// `max |(ℒ_V g)ᵢⱼ|` at `x`, with `∂g` by fourth-order differences and
    /// `∂V` by forward-mode differentiation.
    pub fn killing_residual(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let h = 1e-3;
        let g = self.chart.metric(x);
        let v = self.field.eval(x);
        let dg: Vec<Mat> = (0..n)
            .map(|k| {
                let at = |s: f64| {
                    let mut p = x.to_vec();
                    p[k] += s * h;
                    self.chart.metric(&p)
                };
                (at(-2.0) - at(-1.0) * 8.0 + at(1.0) * 8.0 - at(2.0)) / (12.0 * h)
            })
            .collect();
        // dv[(k, i)] = ∂ᵢVᵏ
        let mut dv = Mat::zeros(n, n);
        for i in 0..n {
            let xd: Vec<Dual<f64>> = x.iter().enumerate().map(|(k, &c)| Dual::new(c, if k == i { 1.0 } else { 0.0 })).collect();
            for (k, c) in self.field.eval(&xd).iter().enumerate() {
                dv[(k, i)] = c.d;
            }
        }
        let lie = Mat::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[k] * dg[k][(i, j)] + g[(k, j)] * dv[(k, i)] + g[(i, k)] * dv[(k, j)]).sum::<f64>()
        });
        lie.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// `|V_x|_g`.
    pub fn norm(&self, x: &[f64]) -> f64 {
        let g = self.chart.diag(x);
        self.field.eval(x).iter().zip(&g).map(|(v, gi)| gi * v * v).sum::<f64>().sqrt()
    }
}

/// `ε` times the rotation about the polar axis, in the stereographic chart
/// of the unit sphere.
pub fn katok_killing_field(epsilon: f64) -> KillingField {
    KillingField { field: VectorField::Rotation { scale: epsilon }, chart: RiemannianChart::Stereographic { radius: 1.0 } }
}

/// Katok perturbation `F̂* = F* + ξ(V)` of the unit sphere.
pub fn katok_metric(epsilon: f64) -> Result<MetricSpec> {
    let kf = katok_killing_field(epsilon);
    for x in Domain::ball(2, 4.0).grid(21) {
        let s = kf.norm(&x);
        if !(s < 1.0) {
            return Err(GeomError::SmallnessViolation(format!("F(V) = {s:.4} at x = {x:?}")));
        }
    }
    zoo::katok(epsilon)
}

/// Closed-form Zermelo expression for the Katok metric, used as a
/// cross-check of the numerical dual.
pub fn katok_zermelo(epsilon: f64, x: &[f64], y: &[f64]) -> f64 {
    let kf = katok_killing_field(epsilon);
    let g = kf.chart.diag(x);
    let v = kf.field.eval(x);
    let ip = |a: &[f64], b: &[f64]| (0..a.len()).map(|i| g[i] * a[i] * b[i]).sum::<f64>();
    let (vy, vv, yy) = (ip(&v, y), ip(&v, &v), ip(y, y));
    (-vy + (vy * vy + (1.0 - vv) * yy).sqrt()) / (1.0 - vv)
}

/// Seeded flags `(v, u)` in the stereographic disk of radius 1.5.
pub fn katok_flags(seed: u64, count: usize) -> Vec<(PhasePoint, Vec<f64>)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let x = random_point_in_ball(&mut r, 2, 1.5);
            let y = random_unit_vector(&mut r, 2);
            let u = vec![-y[1], y[0]];
            (PhasePoint::new(x, y).expect("finite sample"), u)
        })
        .collect()
}

/// `max |K_F̂ − 1|` over the flags.
pub fn katok_curvature_check(epsilon: f64, flags: &[(PhasePoint, Vec<f64>)]) -> Result<f64> {
    let m = katok_metric(epsilon)?;
    flags.iter().try_fold(0.0_f64, |acc, (v, u)| Ok(acc.max((flag_curvature(&m, v, u)? - 1.0).abs())))
}

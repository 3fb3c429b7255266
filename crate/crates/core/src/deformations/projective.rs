use crate::error::{GeomError, Result};
use crate::finsler::{
    fundamental_tensor, legendre, legendre_inverse, spray, spray_coefficients, MetricFamily, MetricSpec, OneForm,
    PhasePoint,
};
use crate::jacobi::{canonicalize_flag, flag_curvature};
use crate::numkit::{inverse, rk_integrate, Dual, Dual3, Mat, Real, Vector};

/// A closed one-form `θ` together with a primitive `h`, `dh = θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedOneForm {
    pub theta: OneForm,
}

impl ClosedOneForm {
    pub fn new(theta: OneForm) -> Self {
        ClosedOneForm { theta }
    }

    pub fn zero(n: usize) -> Self {
        ClosedOneForm { theta: OneForm::Constant(vec![0.0; n]) }
    }

    /// `h(x)`.
    pub fn primitive<T: Real>(&self, x: &[T]) -> T {
        match self.theta.potential() {
            Some(p) => p.value(x),
            None => T::cst(f64::NAN),
        }
    }

    /// `max |∂ᵢθⱼ − ∂ⱼθᵢ|` at `x`.
    pub fn closedness_residual(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut jac = Mat::zeros(n, n);
        for i in 0..n {
            let xd: Vec<Dual<f64>> = x.iter().enumerate().map(|(k, &v)| Dual::new(v, if k == i { 1.0 } else { 0.0 })).collect();
            for (j, t) in self.theta.eval(&xd).iter().enumerate() {
                jac[(j, i)] = t.d;
            }
        }
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (jac[(i, j)] - jac[(j, i)]).abs()).fold(0.0, f64::max)
    }

    /// `F₀*(θ_x)`.
    pub fn dual_norm(&self, f0: &MetricSpec, x: &[f64]) -> Result<f64> {
        let th = self.theta.eval(x);
        if th.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        let y = legendre_inverse(f0, x, &th)?;
        f0.finsler(&PhasePoint::new(x.to_vec(), y)?)
    }

    /// Closedness and `F₀*(θ) < 1` on the domain grid of `f0`.
    pub fn check(&self, f0: &MetricSpec) -> Result<()> {
        self.theta.check_dim(f0.n)?;
        for x in f0.domain.grid(7) {
            let res = self.closedness_residual(&x);
            if res > 1e-10 {
                return Err(GeomError::InvalidMetric(format!("one-form is not closed at {x:?} (residual {res:.3e})")));
            }
            let s = self.dual_norm(f0, &x)?;
            if s >= 1.0 {
                return Err(GeomError::SmallnessViolation(format!("F0*(theta) = {s:.4} at x = {x:?}")));
            }
        }
        Ok(())
    }
}

/// `F = F₀ + θ`.
pub fn projective_deform(f0: &MetricSpec, theta: &ClosedOneForm) -> Result<MetricSpec> {
    theta.check(f0)?;
    if theta.theta.is_zero() {
        return Ok(f0.clone());
    }
    MetricSpec::new(
        f0.n,
        MetricFamily::Randers { base: Box::new(f0.family.clone()), beta: theta.theta.clone() },
        f0.domain.clone(),
    )
}

/// `Ψ(v) = ℒ_{F₀}⁻¹(ℒ_F(v) − θ)`.
pub fn psi_map(f0: &MetricSpec, f: &MetricSpec, theta: &ClosedOneForm, v: &PhasePoint) -> Result<PhasePoint> {
    let l = legendre(f, v)?;
    let th = theta.theta.eval(&v.x);
    let xi: Vec<f64> = l.iter().zip(&th).map(|(a, b)| a - b).collect();
    PhasePoint::new(v.x.clone(), legendre_inverse(f0, &v.x, &xi)?)
}

/// Both sides of the curvature relation for `F = F₀ + θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveRhs {
    /// `v` scaled to `F(v) = 1`.
    pub v: PhasePoint,
    /// `w` made `g_F(v)`-orthogonal to `v`.
    pub w: Vec<f64>,
    pub u: PhasePoint,
    pub w_tilde: Vec<f64>,
    /// `K_{F₀}(u, span[u, w̃])`.
    pub k_f0: f64,
    pub phi: f64,
    /// `S_{F₀}(φ)(u)`.
    pub s_phi: f64,
    /// `S_{F₀}(S_{F₀}(φ))(u)`.
    pub ss_phi: f64,
    /// `φ²K₀ − ½[½S(φ)² − φS(S(φ))]`.
    pub k_phi_form: f64,
    /// `(K₀ − ½{f, t})/ḟ²` with `f(t) = t + h(γ_u(t))`.
    pub k_f_form: f64,
}

/// Jets of `γ_u` at `t = 0`: `γ` to third order, `γ̇` to second order (its
/// third derivative is left at zero).
fn geodesic_jet(f0: &MetricSpec, u: &PhasePoint) -> Result<(Vec<Dual3>, Vec<Dual3>)> {
    let fail = || GeomError::NonFiniteValue("geodesic jet".into());
    let g = spray_coefficients(f0, &u.x, &u.y).ok_or_else(fail)?;
    let acc: Vec<f64> = g.iter().map(|v| -2.0 * v).collect();
    let xd: Vec<Dual<f64>> = u.x.iter().zip(&u.y).map(|(&x, &y)| Dual::new(x, y)).collect();
    let yd: Vec<Dual<f64>> = u.y.iter().zip(&acc).map(|(&y, &a)| Dual::new(y, a)).collect();
    let gd = spray_coefficients(f0, &xd, &yd).ok_or_else(fail)?;
    let jerk: Vec<f64> = gd.iter().map(|v| -2.0 * v.d).collect();
    let n = u.n();
    let x = (0..n).map(|i| Dual3::new(u.x[i], u.y[i], acc[i], jerk[i])).collect();
    let y = (0..n).map(|i| Dual3::new(u.y[i], acc[i], jerk[i], 0.0)).collect();
    Ok((x, y))
}

/// `K_F(v, span[v, w])` predicted from `F₀` data at `u = Ψ(v)`.
pub fn projective_curvature_rhs(f0: &MetricSpec, theta: &ClosedOneForm, v: &PhasePoint, w: &[f64]) -> Result<ProjectiveRhs> {
    let f = projective_deform(f0, theta)?;
    let fv = f.finsler(v)?;
    let v = PhasePoint::new(v.x.clone(), v.y.iter().map(|c| c / fv).collect())?;
    let gf = fundamental_tensor(&f, &v)?;
    let w = canonicalize_flag(&gf, &v.y, w)?;
    let u = psi_map(f0, &f, theta, &v)?;
    let g0 = fundamental_tensor(f0, &u)?;
    let wt = inverse(&g0).ok_or(GeomError::SingularTransform)? * &gf * Vector::from_column_slice(&w);
    let w_tilde: Vec<f64> = wt.iter().copied().collect();
    let k_f0 = flag_curvature(f0, &u, &w_tilde)?;

    let (xj, yj) = geodesic_jet(f0, &u)?;
    let psi = theta.theta.apply(&xj, &yj);
    let phi_j = (psi + 1.0).recip();
    let (phi, s_phi, ss_phi) = (phi_j.value, phi_j.d1, phi_j.d2);
    let k_phi_form = phi * phi * k_f0 - 0.5 * (0.5 * s_phi * s_phi - phi * ss_phi);

    let fj = Dual3::variable(0.0) + theta.primitive(&xj);
    let schw = fj.d3 / fj.d1 - 1.5 * (fj.d2 / fj.d1).powi(2);
    let k_f_form = (k_f0 - 0.5 * schw) / (fj.d1 * fj.d1);
    for (name, val) in [("phi-form", k_phi_form), ("f-form", k_f_form)] {
        if !val.is_finite() {
            return Err(GeomError::NonFiniteValue(name.into()));
        }
    }
    Ok(ProjectiveRhs { v, w, u, w_tilde, k_f0, phi, s_phi, ss_phi, k_phi_form, k_f_form })
}

fn spray_vec(m: &MetricSpec, z: &[f64]) -> Result<Vec<f64>> {
    let n = z.len() / 2;
    let (dx, dy) = spray(m).eval(&z[..n], &z[n..])?;
    Ok(dx.into_iter().chain(dy).collect())
}

/// `|dΨ(v)·S_F(v) − φ(Ψv)·S_{F₀}(Ψv)|` relative to the right side.
pub fn psi_spray_residual(f0: &MetricSpec, theta: &ClosedOneForm, v: &PhasePoint) -> Result<f64> {
    let f = projective_deform(f0, theta)?;
    let fv = f.finsler(v)?;
    let v = PhasePoint::new(v.x.clone(), v.y.iter().map(|c| c / fv).collect())?;
    let n = v.n();
    let z = v.state();
    let s = spray_vec(&f, &z)?;
    let h = 1e-4;
    let at = |k: f64| -> Result<Vec<f64>> {
        let zk: Vec<f64> = z.iter().zip(&s).map(|(a, b)| a + k * h * b).collect();
        let p = PhasePoint::new(zk[..n].to_vec(), zk[n..].to_vec())?;
        Ok(psi_map(f0, &f, theta, &p)?.state())
    };
    let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
    let lhs: Vec<f64> = (0..2 * n).map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h)).collect();
    let u = psi_map(f0, &f, theta, &v)?;
    let phi = 1.0 / (1.0 + theta.theta.apply(&u.x, &u.y));
    let rhs: Vec<f64> = spray_vec(f0, &u.state())?.iter().map(|c| phi * c).collect();
    let diff = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm = rhs.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(diff / norm)
}

/// `|F₀*(ξ − θ) − 1|` for the unit covector `ξ = ℒ_F(v)`, `F(v) = 1`.
pub fn cosphere_residual(f0: &MetricSpec, theta: &ClosedOneForm, v: &PhasePoint) -> Result<f64> {
    let f = projective_deform(f0, theta)?;
    let fv = f.finsler(v)?;
    let v = PhasePoint::new(v.x.clone(), v.y.iter().map(|c| c / fv).collect())?;
    let u = psi_map(f0, &f, theta, &v)?;
    Ok((f0.finsler(&u)? - 1.0).abs())
}

fn geodesic_trace(m: &MetricSpec, v: &PhasePoint, t_max: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
    let n = v.n();
    let orbit = rk_integrate(|_, z| spray_vec(m, z), &v.state(), 0.0, t_max, steps)?;
    Ok(orbit.into_iter().map(|(_, z)| z[..n].to_vec()).collect())
}

/// Cumulative chord length along a polyline.
fn chord_lengths(p: &[Vec<f64>]) -> Vec<f64> {
    let mut s = vec![0.0];
    for w in p.windows(2) {
        let d = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        s.push(s.last().copied().unwrap_or(0.0) + d);
    }
    s
}

fn point_at(p: &[Vec<f64>], s: &[f64], target: f64) -> Vec<f64> {
    let k = s.partition_point(|&v| v < target).clamp(1, s.len() - 1);
    let lam = ((target - s[k - 1]) / (s[k] - s[k - 1]).max(1e-300)).clamp(0.0, 1.0);
    p[k - 1].iter().zip(&p[k]).map(|(a, b)| a + lam * (b - a)).collect()
}

/// Largest chart distance between the `F`- and `F₀`-geodesics leaving `v`,
/// matched by chart arc length, over `F₀`-time `t_max`.
pub fn trace_deviation(f0: &MetricSpec, theta: &ClosedOneForm, v: &PhasePoint, t_max: f64) -> Result<f64> {
    let f = projective_deform(f0, theta)?;
    let steps = (4000.0 * t_max.abs()).ceil().max(1.0) as usize;
    let a = geodesic_trace(f0, v, t_max, steps)?;
    let b = geodesic_trace(&f, v, t_max * f0.finsler(v)? / f.finsler(v)?, steps)?;
    let (sa, sb) = (chord_lengths(&a), chord_lengths(&b));
    let total = sa.last().copied().unwrap_or(0.0).min(sb.last().copied().unwrap_or(0.0));
    let k = 200;
    let mut worst: f64 = 0.0;
    for i in 0..=k {
        let s = total * i as f64 / k as f64;
        let (pa, pb) = (point_at(&a, &sa, s), point_at(&b, &sb, s));
        worst = worst.max(pa.iter().zip(&pb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt());
    }
    Ok(worst)
}

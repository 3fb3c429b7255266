use super::metric::{dual_legendre, CoMetric, Energy, Hamiltonian, MetricFamily, MetricSpec, PhasePoint};
use crate::error::{GeomError, Result};
use crate::numkit::{
    fiber_gradient_t, fiber_hessian_t, gradient, hessian, inverse, solve, solve_t, Dual, Mat, PhaseField, Real, ScalarField,
};

fn finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFiniteValue(what.into()))
    }
}

fn check_pd(g: &Mat, p: &PhasePoint) -> Result<()> {
    if g.clone().cholesky().is_none() {
        return Err(GeomError::NotPositiveDefinite(format!("g_F at x = {:?}, y = {:?}", p.x, p.y)));
    }
    Ok(())
}

/// Fundamental tensor `g_F(v)`, the fiber Hessian of `½F²`.
pub fn fundamental_tensor(m: &MetricSpec, p: &PhasePoint) -> Result<Mat> {
    let n = p.n();
    let g = match m.comet() {
        Some(cm) => {
            let xi = dual_legendre(cm, &p.x, &p.y)?;
            let hxx = Mat::from_row_slice(n, n, &fiber_hessian_t(&Hamiltonian(cm), &p.x, &xi));
            inverse(&hxx).ok_or_else(|| GeomError::NotPositiveDefinite("singular co-metric Hessian".into()))?
        }
        None => Mat::from_row_slice(n, n, &fiber_hessian_t(&Energy(m), &p.x, &p.y)),
    };
    finite(g.as_slice(), "fundamental tensor")?;
    let g = (&g + g.transpose()) * 0.5;
    check_pd(&g, p)?;
    Ok(g)
}

/// Legendre transform `ℒ_F(v) = g_F(v)(v, ·)`.
pub fn legendre(m: &MetricSpec, p: &PhasePoint) -> Result<Vec<f64>> {
    let xi = match m.comet() {
        Some(cm) => dual_legendre(cm, &p.x, &p.y)?,
        None => fiber_gradient_t(&Energy(m), &p.x, &p.y),
    };
    finite(&xi, "Legendre transform")?;
    Ok(xi)
}

/// `ℒ_F⁻¹(ξ)` at the base point `x`.
pub fn legendre_inverse(m: &MetricSpec, x: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if let Some(cm) = m.comet() {
        let y = fiber_gradient_t(&Hamiltonian(cm), x, xi);
        finite(&y, "inverse Legendre transform")?;
        return Ok(y);
    }
    let fail = || GeomError::NewtonDivergence { x: x.to_vec(), v: xi.to_vec() };
    let e = Energy(m);
    let mut y = riemannian_guess(&m.family, x, xi);
    for _ in 0..60 {
        let l = fiber_gradient_t(&e, x, &y);
        let r: Vec<f64> = (0..n).map(|i| l[i] - xi[i]).collect();
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !rn.is_finite() {
            return Err(fail());
        }
        if rn <= 1e-13 * xi.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0) {
            return Ok(y);
        }
        let g = Mat::from_row_slice(n, n, &fiber_hessian_t(&e, x, &y));
        let step = solve(&g, &Mat::from_column_slice(n, 1, &r)).ok_or_else(fail)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = (0..n).map(|i| y[i] - lambda * step[i]).collect();
            let lt = fiber_gradient_t(&e, x, &trial);
            let rt = (0..n).map(|i| (lt[i] - xi[i]).powi(2)).sum::<f64>().sqrt();
            if rt.is_finite() && rt < rn {
                y = trial;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return Ok(y);
            }
        }
    }
    Err(fail())
}

fn riemannian_guess(f: &MetricFamily, x: &[f64], xi: &[f64]) -> Vec<f64> {
    match f {
        MetricFamily::Riemannian(c) => c.diag(x).iter().zip(xi).map(|(g, v)| v / g).collect(),
        MetricFamily::Randers { base, .. } => riemannian_guess(base, x, xi),
        MetricFamily::Dual(_) => xi.to_vec(),
    }
}

/// Geodesic spray coefficients `Gⁱ = ½gⁱˡ(E_{yˡxᵏ}yᵏ − E_{xˡ})`, `E = ½F²`,
/// over any `T`.
pub fn spray_coefficients<T: Real>(m: &MetricSpec, x: &[T], y: &[T]) -> Option<Vec<T>> {
    let n = x.len();
    let e = Energy(m);
    let g = fiber_hessian_t(&e, x, y);
    let mut rhs = vec![T::zero(); n];
    // E_{y_l x_k} y^k: derivative of E(x + s·y, y + r·e_l) in s and r.
    let xs: Vec<Dual<Dual<T>>> = (0..n).map(|k| Dual::new(Dual::constant(x[k]), Dual::constant(y[k]))).collect();
    let mut yr: Vec<Dual<Dual<T>>> = y.iter().map(|&v| Dual::constant(Dual::constant(v))).collect();
    let mut xd: Vec<Dual<T>> = x.iter().map(|&v| Dual::constant(v)).collect();
    let yd: Vec<Dual<T>> = y.iter().map(|&v| Dual::constant(v)).collect();
    for l in 0..n {
        yr[l].v.d = T::one();
        let mixed = e.eval(&xs, &yr).d.d;
        yr[l].v.d = T::zero();
        xd[l].d = T::one();
        let ex = e.eval(&xd, &yd).d;
        xd[l].d = T::zero();
        rhs[l] = mixed - ex;
    }
    let sol = solve_t(&g, n, &rhs, 1)?;
    Some(sol.into_iter().map(|v| v * 0.5).collect())
}

/// The geodesic spray `S = yⁱ∂ₓᵢ − 2Gⁱ∂_yᵢ` of a metric.
#[derive(Clone, Copy, Debug)]
pub struct SprayField<'a> {
    pub metric: &'a MetricSpec,
}

pub fn spray(m: &MetricSpec) -> SprayField<'_> {
    SprayField { metric: m }
}

impl SprayField<'_> {
    pub fn g_coeffs(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let g = spray_coefficients(self.metric, x, y)
            .ok_or_else(|| GeomError::NotPositiveDefinite(format!("singular g_F at x = {x:?}")))?;
        finite(&g, "spray coefficients")?;
        Ok(g)
    }

    /// `(ẋ, ẏ) = (y, −2G(x, y))`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.g_coeffs(x, y)?;
        Ok((y.to_vec(), g.iter().map(|v| -2.0 * v).collect()))
    }
}

fn spray_vector_t<T: Real>(m: &MetricSpec, z: &[T]) -> Option<Vec<T>> {
    let n = z.len() / 2;
    let (x, y) = z.split_at(n);
    let g = spray_coefficients(m, x, y)?;
    Some(y.iter().copied().chain(g.into_iter().map(|v| v * -2.0)).collect())
}

/// Value and Jacobian of the spray vector field at `z = (x, y)`.
pub fn spray_flow_jacobian(m: &MetricSpec, z: &[f64]) -> Result<(Vec<f64>, Mat)> {
    let d = z.len();
    let mut zd: Vec<Dual<f64>> = z.iter().map(|&v| Dual::constant(v)).collect();
    let mut value = Vec::new();
    let mut jac = Mat::zeros(d, d);
    let err = || GeomError::NotPositiveDefinite(format!("singular g_F at z = {z:?}"));
    for j in 0..d {
        zd[j].d = 1.0;
        let r = spray_vector_t(m, &zd).ok_or_else(err)?;
        zd[j].d = 0.0;
        for i in 0..d {
            jac[(i, j)] = r[i].d;
        }
        if j == 0 {
            value = r.iter().map(|v| v.v).collect();
        }
    }
    finite(&value, "spray")?;
    finite(jac.as_slice(), "spray Jacobian")?;
    Ok((value, jac))
}

struct HamiltonianOnPhase<'a>(&'a CoMetric);

impl ScalarField for HamiltonianOnPhase<'_> {
    fn eval<T: Real>(&self, z: &[T]) -> T {
        let n = z.len() / 2;
        Hamiltonian(self.0).eval(&z[..n], &z[n..])
    }
}

/// Value and Jacobian of the Hamiltonian field `(H_ξ, −H_x)` of
/// `H = ½F*²` at `z = (x, ξ)`.
pub fn hamiltonian_flow_jacobian(cm: &CoMetric, z: &[f64]) -> Result<(Vec<f64>, Mat)> {
    let d = z.len();
    let n = d / 2;
    let hf = HamiltonianOnPhase(cm);
    let (_, g) = gradient(&hf, z);
    let h = Mat::from_row_slice(d, d, &hessian(&hf, z));
    let value: Vec<f64> = (0..n).map(|i| g[n + i]).chain((0..n).map(|i| -g[i])).collect();
    let mut jac = Mat::zeros(d, d);
    for i in 0..n {
        for j in 0..d {
            jac[(i, j)] = h[(n + i, j)];
            jac[(n + i, j)] = -h[(i, j)];
        }
    }
    finite(&value, "Hamiltonian field")?;
    finite(jac.as_slice(), "Hamiltonian Jacobian")?;
    Ok((value, jac))
}

/// `∂ξ_a/∂x^b` for `ξ = ℒ_F(x, y)`, row-major.
fn legendre_x_jacobian(m: &MetricSpec, x: &[f64], y: &[f64]) -> Mat {
    let n = x.len();
    let e = Energy(m);
    let mut xs: Vec<Dual<Dual<f64>>> = x.iter().map(|&v| Dual::constant(Dual::constant(v))).collect();
    let mut ys: Vec<Dual<Dual<f64>>> = y.iter().map(|&v| Dual::constant(Dual::constant(v))).collect();
    let mut j = Mat::zeros(n, n);
    for a in 0..n {
        ys[a].v.d = 1.0;
        for b in 0..n {
            xs[b].d.v = 1.0;
            j[(a, b)] = e.eval(&xs, &ys).d.d;
            xs[b].d.v = 0.0;
        }
        ys[a].v.d = 0.0;
    }
    j
}

/// Matrix of `ω_F = ℒ_F*(Σ dxⁱ∧dξᵢ)` in the basis `(∂x, ∂y)`:
/// `[[∂ξ_a/∂x^b − ∂ξ_b/∂x^a, g], [−g, 0]]`.
pub fn omega_matrix(m: &MetricSpec, p: &PhasePoint) -> Result<Mat> {
    let n = p.n();
    let (jx, g) = match m.comet() {
        Some(cm) => {
            // ξ(x, y) is implicit: H_ξ(x, ξ) = y, so ∂ξ/∂x = −H_ξξ⁻¹H_ξx.
            let xi = dual_legendre(cm, &p.x, &p.y)?;
            let z: Vec<f64> = p.x.iter().chain(&xi).copied().collect();
            let h = Mat::from_row_slice(2 * n, 2 * n, &hessian(&HamiltonianOnPhase(cm), &z));
            let hxixi = h.view((n, n), (n, n)).into_owned();
            let hxix = h.view((n, 0), (n, n)).into_owned();
            let hinv = inverse(&hxixi).ok_or_else(|| GeomError::NotPositiveDefinite("co-metric Hessian".into()))?;
            (-(&hinv * hxix), hinv)
        }
        None => (legendre_x_jacobian(m, &p.x, &p.y), fundamental_tensor(m, p)?),
    };
    let mut o = Mat::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            o[(a, b)] = jx[(a, b)] - jx[(b, a)];
            o[(a, n + b)] = g[(a, b)];
            o[(n + a, b)] = -g[(a, b)];
        }
    }
    finite(o.as_slice(), "omega matrix")?;
    Ok(o)
}

/// Metric `F = (F*)*` defined by a co-metric; `F` is evaluated by Newton
/// iteration on `∂_ξ(½F*²)(x, ξ) = y`.
pub fn dual_metric(costar: CoMetric, n: usize, domain: super::Domain) -> Result<MetricSpec> {
    MetricSpec::new(n, MetricFamily::Dual(costar), domain)
}

/// Samples the domain on a `5ⁿ` grid and checks finiteness, positivity,
/// positive homogeneity and positive definiteness of `g_F`. Randers data
/// over a Riemannian base is additionally checked for `|β|_{g⁻¹} < 1`.
pub fn validate(m: &MetricSpec) -> Result<()> {
    let n = m.n;
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        dirs.push(e.clone());
        e[i] = -1.0;
        dirs.push(e);
    }
    dirs.push(vec![1.0; n]);
    dirs.push((0..n).map(|i| if i % 2 == 0 { 0.7 } else { -1.3 }).collect());
    for x in m.domain.grid(5) {
        if let MetricFamily::Randers { base, beta } = &m.family {
            if let MetricFamily::Riemannian(c) = base.as_ref() {
                let g = c.diag(&x);
                let b = beta.eval(&x);
                let s: f64 = b.iter().zip(&g).map(|(bi, gi)| bi * bi / gi).sum();
                if s >= 1.0 {
                    return Err(GeomError::NotPositiveDefinite(format!("|beta| = {:.4} >= 1 at x = {x:?}", s.sqrt())));
                }
            }
        }
        if let MetricFamily::Dual(CoMetric::RiemannianWind { alpha, wind }) = &m.family {
            let g = alpha.diag(&x);
            let v = wind.eval(&x);
            let s: f64 = v.iter().zip(&g).map(|(vi, gi)| vi * vi * gi).sum();
            if s >= 1.0 {
                return Err(GeomError::NotPositiveDefinite(format!("|V| = {:.4} >= 1 at x = {x:?}", s.sqrt())));
            }
        }
        for y in &dirs {
            let p = PhasePoint::new(x.clone(), y.clone())?;
            let f = m.finsler(&p)?;
            if f <= 0.0 {
                return Err(GeomError::NotPositiveDefinite(format!("F = {f} at x = {x:?}")));
            }
            let y2: Vec<f64> = y.iter().map(|v| 2.5 * v).collect();
            let f2 = m.finsler(&PhasePoint::new(x.clone(), y2)?)?;
            if (f2 - 2.5 * f).abs() > 1e-10 * f.max(1.0) {
                return Err(GeomError::InvalidMetric(format!("F is not positively homogeneous at x = {x:?}")));
            }
            fundamental_tensor(m, &p)?;
        }
    }
    Ok(())
}

//! Flag curvature from the Jacobi curve, and a Christoffel-based oracle for
//! Riemannian charts.

use super::transport::{jacobi_frame, transport_with, OrbitData, TransportOptions};
use crate::error::{GeomError, Result};
use crate::finsler::{fundamental_tensor, MetricSpec, PhasePoint};
use crate::numkit::{inverse, Mat, Vector};

/// `u − (g(v,u)/g(v,v))·v` in the inner product `g`.
pub fn canonicalize_flag(g: &Mat, v: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let vv = Vector::from_column_slice(v);
    let uv = Vector::from_column_slice(u);
    let gvv = vv.dot(&(g * &vv));
    let gvu = vv.dot(&(g * &uv));
    let perp = &uv - &vv * (gvu / gvv);
    let nu = uv.dot(&(g * &uv)).sqrt();
    let np = perp.dot(&(g * &perp)).sqrt();
    if !(np > 1e-9 * nu) {
        return Err(GeomError::DegenerateFlag);
    }
    Ok(perp.iter().copied().collect())
}

/// Flag curvature of the flag with pole `v` and transverse edge `u`.
pub fn flag_curvature(metric: &MetricSpec, v: &PhasePoint, u: &[f64]) -> Result<f64> {
    flag_curvature_with(metric, v, u, TransportOptions::default())
}

pub fn flag_curvature_with(metric: &MetricSpec, v: &PhasePoint, u: &[f64], opts: TransportOptions) -> Result<f64> {
    if u.len() != v.n() {
        return Err(GeomError::DimensionMismatch(format!("u of dimension {} for n = {}", u.len(), v.n())));
    }
    let orbit = transport_with(metric, v, 0.0, opts)?;
    flag_curvature_at(&orbit, 0.0, u)
}

/// Flag curvature at `γ̇(t)` of the orbit, with `u ∈ T_{γ(t)}M`, read off the
/// Jacobi curve based at the orbit's initial vector.
pub fn flag_curvature_at(orbit: &OrbitData, t: f64, u: &[f64]) -> Result<f64> {
    let s = jacobi_frame(orbit, t)?;
    let inv = s.invariants(&orbit.omega0)?;
    let g = fundamental_tensor(&orbit.metric, &s.point)?;
    let up = canonicalize_flag(&g, &s.point.y, u)?;
    let c = &s.iota * Vector::from_column_slice(&up);
    let w = inv.w.clone().expect("Wronskian requested");
    let kc = inv.k_ell() * &c;
    let y = Vector::from_column_slice(&s.point.y);
    let f2 = y.dot(&(&g * &y));
    let num = kc.dot(&(&w * &c));
    let den = f2 * c.dot(&(&w * &c));
    let k = num / den;
    if !k.is_finite() {
        return Err(GeomError::NonFiniteValue("flag curvature".into()));
    }
    Ok(k)
}

const FD_H: f64 = 1e-3;

fn d4<F: Fn(&[f64]) -> Mat>(f: &F, x: &[f64], k: usize) -> Mat {
    let at = |s: f64| {
        let mut p = x.to_vec();
        p[k] += s * FD_H;
        f(&p)
    };
    (at(-2.0) - at(-1.0) * 8.0 + at(1.0) * 8.0 - at(2.0)) / (12.0 * FD_H)
}

/// Christoffel symbols `Γⁱ_{jk}` (stored as `gam[i][(j, k)]`) of the metric
/// field `g` at `x`, from fourth-order central differences.
pub fn christoffel<F: Fn(&[f64]) -> Mat>(g: &F, x: &[f64]) -> Result<Vec<Mat>> {
    let n = x.len();
    let dg: Vec<Mat> = (0..n).map(|k| d4(g, x, k)).collect();
    let ginv = inverse(&g(x)).ok_or_else(|| GeomError::NotPositiveDefinite(format!("metric at {x:?}")))?;
    let gam: Vec<Mat> = (0..n)
        .map(|i| {
            Mat::from_fn(n, n, |j, k| {
                (0..n).map(|l| 0.5 * ginv[(i, l)] * (dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)])).sum()
            })
        })
        .collect();
    if gam.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
        return Err(GeomError::NonFiniteValue("Christoffel symbols".into()));
    }
    Ok(gam)
}

/// Sectional curvature of `span(v, u)` for the Riemannian metric field `g`,
/// through the Riemann tensor assembled from nested finite differences.
pub fn riemann_oracle<F: Fn(&[f64]) -> Mat>(g: &F, x: &[f64], v: &[f64], u: &[f64]) -> Result<f64> {
    let n = x.len();
    if v.len() != n || u.len() != n {
        return Err(GeomError::DimensionMismatch("oracle vectors".into()));
    }
    let gam = christoffel(g, x)?;
    // ∂_k Γⁱ_{jl}, indexed dgam[k][i][(j, l)]
    let dgam: Vec<Vec<Mat>> = (0..n)
        .map(|k| {
            let at = |s: f64| {
                let mut p = x.to_vec();
                p[k] += s * FD_H;
                christoffel(g, &p)
            };
            let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
            Ok((0..n).map(|i| (&m2[i] - &m1[i] * 8.0 + &p1[i] * 8.0 - &p2[i]) / (12.0 * FD_H)).collect())
        })
        .collect::<Result<_>>()?;
    // R(u, v)v = Rⁱ_{jkl} v^j u^k v^l with
    // Rⁱ_{jkl} = ∂_kΓⁱ_{lj} − ∂_lΓⁱ_{kj} + Γⁱ_{km}Γᵐ_{lj} − Γⁱ_{lm}Γᵐ_{kj}
    let mut ruvv = vec![0.0; n];
    for (i, r) in ruvv.iter_mut().enumerate() {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut rijkl = dgam[k][i][(l, j)] - dgam[l][i][(k, j)];
                    for m in 0..n {
                        rijkl += gam[i][(k, m)] * gam[m][(l, j)] - gam[i][(l, m)] * gam[m][(k, j)];
                    }
                    *r += rijkl * v[j] * u[k] * v[l];
                }
            }
        }
    }
    let gx = g(x);
    let ip = |a: &[f64], b: &[f64]| Vector::from_column_slice(a).dot(&(&gx * Vector::from_column_slice(b)));
    let den = ip(u, u) * ip(v, v) - ip(u, v).powi(2);
    if !(den > 0.0) {
        return Err(GeomError::DegenerateFlag);
    }
    let k = ip(&ruvv, u) / den;
    if !k.is_finite() {
        return Err(GeomError::NonFiniteValue("sectional curvature".into()));
    }
    Ok(k)
}

/// [`riemann_oracle`] on the chart metric of a Riemannian [`MetricSpec`].
pub fn riemann_oracle_for(metric: &MetricSpec, x: &[f64], v: &[f64], u: &[f64]) -> Result<f64> {
    let chart = metric
        .riemannian_chart()
        .ok_or_else(|| GeomError::InvalidMetric("the Riemann oracle needs a Riemannian chart".into()))?;
    riemann_oracle(&|p: &[f64]| chart.metric(p), x, v, u)
}

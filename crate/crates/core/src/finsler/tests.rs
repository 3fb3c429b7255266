use super::*;
use crate::numkit::{max_abs, rk_integrate, Mat};
use crate::samples::{random_point_in_ball, random_unit_vector, rng};
use proptest::prelude::*;

fn pp(x: &[f64], y: &[f64]) -> PhasePoint {
    PhasePoint::new(x.to_vec(), y.to_vec()).unwrap()
}

fn randers_euclid(b: &[f64]) -> MetricSpec {
    zoo::randers_constant(b.to_vec()).unwrap()
}

/// Closed-form fundamental tensor of `|y| + b·y`.
fn randers_g_closed(b: &[f64], y: &[f64]) -> Mat {
    let n = y.len();
    let a = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let f = a + b.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    Mat::from_fn(n, n, |i, j| {
        let yi = y[i] / a;
        let yj = y[j] / a;
        let delta = if i == j { 1.0 } else { 0.0 };
        f / a * (delta - yi * yj) + (yi + b[i]) * (yj + b[j])
    })
}

#[test]
fn euclidean_and_riemannian_tensors() {
    let g = fundamental_tensor(&zoo::euclidean(3), &pp(&[0.1, 0.2, 0.3], &[1.0, -2.0, 0.5])).unwrap();
    assert!(max_abs(&(g - Mat::identity(3, 3))) < 1e-14);
    let m = zoo::hyperbolic();
    let x = [0.3, -0.2];
    let g = fundamental_tensor(&m, &pp(&x, &[0.4, 1.0])).unwrap();
    let expect = RiemannianChart::Poincare.metric(&x);
    assert!(max_abs(&(g - expect)) < 1e-12);
}

#[test]
fn randers_tensor_matches_closed_form() {
    let g = fundamental_tensor(&randers_euclid(&[0.5, 0.0]), &pp(&[0.0, 0.0], &[1.0, 0.0])).unwrap();
    assert!(max_abs(&(&g - Mat::from_row_slice(2, 2, &[2.25, 0.0, 0.0, 1.5]))) < 1e-12);
    let mut r = rng(3);
    for _ in 0..20 {
        let b: Vec<f64> = random_unit_vector(&mut r, 3).iter().map(|v| 0.6 * v).collect();
        let y = random_unit_vector(&mut r, 3);
        let g = fundamental_tensor(&randers_euclid(&b), &pp(&[0.0; 3], &y)).unwrap();
        assert!(max_abs(&(g - randers_g_closed(&b, &y))) < 1e-10);
    }
}

#[test]
fn legendre_examples() {
    let xi = legendre(&zoo::euclidean(2), &pp(&[0.0, 0.0], &[3.0, 4.0])).unwrap();
    assert_eq!(xi, vec![3.0, 4.0]);
    let m = zoo::sphere(1.0).unwrap();
    let x = [0.4, 0.1];
    let xi = legendre(&m, &pp(&x, &[1.0, 2.0])).unwrap();
    let g = RiemannianChart::Stereographic { radius: 1.0 }.diag(&x);
    assert!((xi[0] - g[0]).abs() < 1e-14 && (xi[1] - 2.0 * g[1]).abs() < 1e-14);
}

#[test]
fn spray_vanishes_for_euclidean() {
    let m = zoo::euclidean(3);
    let s = spray(&m);
    let g = s.g_coeffs(&[0.5, 0.1, -1.0], &[1.0, 2.0, 3.0]).unwrap();
    assert!(g.iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn sphere_geodesic_conserves_speed_and_follows_great_circle() {
    let m = zoo::sphere(1.0).unwrap();
    let s = spray(&m);
    let out = rk_integrate(
        |_, z| {
            let (dx, dy) = s.eval(&z[..2], &z[2..])?;
            Ok([dx, dy].concat())
        },
        &[0.0, 0.0, 0.5, 0.0],
        0.0,
        2.0,
        4000,
    )
    .unwrap();
    let f0 = m.finsler(&pp(&[0.0, 0.0], &[0.5, 0.0])).unwrap();
    assert!((f0 - 1.0).abs() < 1e-15);
    for (_, z) in &out {
        let f = m.finsler(&pp(&z[..2], &z[2..])).unwrap();
        assert!((f - f0).abs() < 1e-8);
        // The great circle through the chart origin in direction e₁ is the x₁-axis.
        assert!(z[1].abs() < 1e-12 && z[3].abs() < 1e-12);
    }
    // Arc length 2 from the south pole: x₁ = tan(1).
    let last = &out.last().unwrap().1;
    assert!((last[0] - 1.0_f64.tan()).abs() < 1e-7);
}

/// Christoffel symbols of a diagonal chart by central differences.
fn christoffel_fd(c: &RiemannianChart, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = x.len();
    let h = 1e-5;
    let dg = |k: usize| -> Mat {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        (c.metric(&xp) - c.metric(&xm)) / (2.0 * h)
    };
    let d: Vec<Mat> = (0..n).map(dg).collect();
    let ginv = c.metric(x).try_inverse().unwrap();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            (0..n)
                                .map(|l| 0.5 * ginv[(i, l)] * (d[j][(l, k)] + d[k][(l, j)] - d[l][(j, k)]))
                                .sum()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

#[test]
fn riemannian_spray_matches_christoffel_oracle() {
    let charts = [
        (RiemannianChart::Stereographic { radius: 1.3 }, vec![0.3, -0.5]),
        (RiemannianChart::Poincare, vec![0.2, 0.4]),
        (RiemannianChart::Exponential { a: 0.5 }, vec![0.3, -0.1, 0.7]),
        (RiemannianChart::HopfTotal { radius: 1.0 }, vec![0.6, 0.2, -0.4]),
    ];
    for (c, x) in charts {
        let n = x.len();
        let m = MetricSpec::new(n, MetricFamily::Riemannian(c.clone()), Domain::cube(n, 10.0)).unwrap();
        let y: Vec<f64> = (0..n).map(|i| 1.0 - 0.4 * i as f64).collect();
        let g = spray(&m).g_coeffs(&x, &y).unwrap();
        let gam = christoffel_fd(&c, &x);
        for i in 0..n {
            let mut e = 0.0;
            for j in 0..n {
                for k in 0..n {
                    e += 0.5 * gam[i][j][k] * y[j] * y[k];
                }
            }
            assert!((g[i] - e).abs() < 1e-6, "{c:?}: G[{i}] = {} vs {e}", g[i]);
        }
    }
}

#[test]
fn omega_examples() {
    let o = omega_matrix(&zoo::euclidean(2), &pp(&[1.0, 2.0], &[0.3, 0.4])).unwrap();
    assert_eq!(o, crate::fanning::standard_omega(2));
    // Poincaré metric has dg/dx = 0 at the origin.
    let m = zoo::hyperbolic();
    let o = omega_matrix(&m, &pp(&[0.0, 0.0], &[0.3, 0.4])).unwrap();
    let g = Mat::identity(2, 2) * 4.0;
    let mut expect = Mat::zeros(4, 4);
    expect.view_mut((0, 2), (2, 2)).copy_from(&g);
    expect.view_mut((2, 0), (2, 2)).copy_from(&(-g));
    assert!(max_abs(&(o - expect)) < 1e-13);
}

/// `ω_F` assembled from finite differences of `ℒ_F`.
fn omega_fd(m: &MetricSpec, x: &[f64], y: &[f64]) -> Mat {
    let n = x.len();
    let h = 1e-5;
    let mut jx = Mat::zeros(n, n);
    for b in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[b] += h;
        xm[b] -= h;
        let lp = legendre(m, &pp(&xp, y)).unwrap();
        let lm = legendre(m, &pp(&xm, y)).unwrap();
        for a in 0..n {
            jx[(a, b)] = (lp[a] - lm[a]) / (2.0 * h);
        }
    }
    let g = fundamental_tensor(m, &pp(x, y)).unwrap();
    let mut o = Mat::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            o[(a, b)] = jx[(a, b)] - jx[(b, a)];
            o[(a, n + b)] = g[(a, b)];
            o[(n + a, b)] = -g[(a, b)];
        }
    }
    o
}

fn metric_samples() -> Vec<MetricSpec> {
    let sphere = zoo::sphere(1.0).unwrap();
    let proj = MetricSpec::new(
        2,
        MetricFamily::Randers {
            base: Box::new(sphere.family.clone()),
            beta: OneForm::Exact(Potential::StereoCoordinate { index: 0, scale: 0.2 }),
        },
        sphere.domain.clone(),
    )
    .unwrap();
    vec![
        sphere,
        zoo::hyperbolic(),
        zoo::riemannian_conformal(0.5, 3).unwrap(),
        zoo::randers_constant(vec![0.3, -0.2]).unwrap(),
        proj,
        zoo::katok(0.3).unwrap(),
    ]
}

#[test]
fn omega_properties_on_metric_zoo() {
    let mut r = rng(17);
    for m in metric_samples() {
        for _ in 0..4 {
            let x = random_point_in_ball(&mut r, m.n, 0.6);
            let y = random_unit_vector(&mut r, m.n);
            let o = omega_matrix(&m, &pp(&x, &y)).unwrap();
            assert!(max_abs(&(&o + o.transpose())) < 1e-14);
            assert!(crate::numkit::cond(&o) < 1e8);
            let n = m.n;
            let vert = o.view((n, n), (n, n));
            assert!(vert.iter().all(|v| *v == 0.0));
            let fd = omega_fd(&m, &x, &y);
            assert!(max_abs(&(&o - &fd)) < 1e-8 * max_abs(&o).max(1.0), "{:?}\n{o}\n{fd}", m.family);
        }
    }
}

#[test]
fn euler_homogeneity_and_legendre_derivative() {
    let mut r = rng(23);
    for m in metric_samples() {
        for _ in 0..4 {
            let x = random_point_in_ball(&mut r, m.n, 0.6);
            let y = random_unit_vector(&mut r, m.n);
            let p = pp(&x, &y);
            let g = fundamental_tensor(&m, &p).unwrap();
            let f = m.finsler(&p).unwrap();
            let yv = Mat::from_column_slice(m.n, 1, &y);
            let gyy = (yv.transpose() * &g * &yv)[(0, 0)];
            assert!((gyy - f * f).abs() < 1e-10);
            let xi = legendre(&m, &p).unwrap();
            let xy: f64 = xi.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert!((xy - f * f).abs() < 1e-10);
            // dℒ/dy by central differences against g_F
            let h = 1e-5;
            for j in 0..m.n {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[j] += h;
                ym[j] -= h;
                let lp = legendre(&m, &pp(&x, &yp)).unwrap();
                let lm = legendre(&m, &pp(&x, &ym)).unwrap();
                for i in 0..m.n {
                    assert!(((lp[i] - lm[i]) / (2.0 * h) - g[(i, j)]).abs() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn self_dual_euclidean_comet() {
    let m = dual_metric(
        CoMetric::RiemannianWind { alpha: RiemannianChart::Euclidean, wind: VectorField::Constant(vec![0.0, 0.0]) },
        2,
        Domain::cube(2, 5.0),
    )
    .unwrap();
    let mut r = rng(1);
    for _ in 0..10 {
        let y: Vec<f64> = random_unit_vector(&mut r, 2).iter().map(|v| v * 1.7).collect();
        let f = m.finsler(&pp(&[0.1, 0.2], &y)).unwrap();
        assert!((f - 1.7).abs() < 1e-10);
    }
}

/// Zermelo closed form of the dual of `|ξ|_{g⁻¹} + ξ(V)`.
fn zermelo(g: &[f64], v: &[f64], y: &[f64]) -> f64 {
    let vy: f64 = (0..y.len()).map(|i| g[i] * v[i] * y[i]).sum();
    let vv: f64 = (0..y.len()).map(|i| g[i] * v[i] * v[i]).sum();
    let yy: f64 = (0..y.len()).map(|i| g[i] * y[i] * y[i]).sum();
    (-vy + (vy * vy + (1.0 - vv) * yy).sqrt()) / (1.0 - vv)
}

/// `sup_v ξ(v)/F(v)` by a dense angular scan refined with golden sections.
fn numeric_dual_2d(m: &MetricSpec, x: &[f64], xi: &[f64]) -> f64 {
    let ratio = |a: f64| {
        let v = [a.cos(), a.sin()];
        (xi[0] * v[0] + xi[1] * v[1]) / m.finsler(&pp(x, &v)).unwrap()
    };
    let k = 720;
    let step = std::f64::consts::TAU / k as f64;
    let best = (0..k).map(|i| i as f64 * step).max_by(|a, b| ratio(*a).total_cmp(&ratio(*b))).unwrap();
    let (mut lo, mut hi) = (best - step, best + step);
    let gr = (5.0_f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = hi - gr * (hi - lo);
        let d = lo + gr * (hi - lo);
        if ratio(c) > ratio(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    ratio(0.5 * (lo + hi))
}

#[test]
fn katok_metric_matches_zermelo_and_double_dual() {
    let m = zoo::katok(0.3).unwrap();
    let cm = m.comet().unwrap().clone();
    let mut r = rng(9);
    for _ in 0..10 {
        let x = random_point_in_ball(&mut r, 2, 1.2);
        let y = random_unit_vector(&mut r, 2);
        let f = m.finsler(&pp(&x, &y)).unwrap();
        let g = RiemannianChart::Stereographic { radius: 1.0 }.diag(&x);
        let v = VectorField::Rotation { scale: 0.3 }.eval(&x);
        assert!((f - zermelo(&g, &v, &y)).abs() < 1e-10);
        let xi = random_unit_vector(&mut r, 2);
        let back = numeric_dual_2d(&m, &x, &xi);
        assert!((back - cm.eval(&x, &xi)).abs() < 1e-8);
    }
}

#[test]
fn katok_epsilon_zero_is_the_sphere_and_positive_epsilon_is_irreversible() {
    let k0 = zoo::katok(0.0).unwrap();
    let s = zoo::sphere(1.0).unwrap();
    let k3 = zoo::katok(0.3).unwrap();
    let x = [0.5, -0.3];
    let y = [0.2, 0.9];
    let a = k0.finsler(&pp(&x, &y)).unwrap();
    let b = s.finsler(&pp(&x, &y)).unwrap();
    assert!((a - b).abs() < 1e-10);
    let fwd = k3.finsler(&pp(&x, &y)).unwrap();
    let bwd = k3.finsler(&pp(&x, &[-0.2, -0.9])).unwrap();
    assert!((fwd - bwd).abs() > 0.01);
}

#[test]
fn hamiltonian_field_is_the_legendre_image_of_the_spray() {
    let m = zoo::katok(0.3).unwrap();
    let cm = m.comet().unwrap();
    let x = [0.4, 0.2];
    let y = [0.6, -0.8];
    let xi = dual_legendre(cm, &x, &y).unwrap();
    let z: Vec<f64> = x.iter().chain(&xi).copied().collect();
    let (xc, _) = hamiltonian_flow_jacobian(cm, &z).unwrap();
    // ẋ = H_ξ = y
    assert!((xc[0] - y[0]).abs() < 1e-10 && (xc[1] - y[1]).abs() < 1e-10);
    // The tangent spray of the dual metric, through lifted Newton steps,
    // agrees with the Hamiltonian field mapped through dℒ.
    let g_sp = spray(&m).g_coeffs(&x, &y).unwrap();
    let g = fundamental_tensor(&m, &pp(&x, &y)).unwrap();
    let o = omega_matrix(&m, &pp(&x, &y)).unwrap();
    // ξ̇ = (∂ξ/∂x)·ẋ + g·ẏ, and ∂ξ/∂x is recovered from the xx block only up
    // to its symmetric part, so compare through the Legendre map directly.
    let _ = o;
    let h = 1e-6;
    let xp: Vec<f64> = (0..2).map(|i| x[i] + h * y[i]).collect();
    let yp: Vec<f64> = (0..2).map(|i| y[i] - 2.0 * h * g_sp[i]).collect();
    let xm: Vec<f64> = (0..2).map(|i| x[i] - h * y[i]).collect();
    let ym: Vec<f64> = (0..2).map(|i| y[i] + 2.0 * h * g_sp[i]).collect();
    let lp = dual_legendre(cm, &xp, &yp).unwrap();
    let lm = dual_legendre(cm, &xm, &ym).unwrap();
    for i in 0..2 {
        let xidot = (lp[i] - lm[i]) / (2.0 * h);
        assert!((xidot - xc[2 + i]).abs() < 1e-6, "{xidot} vs {}", xc[2 + i]);
    }
    assert!(g.clone().cholesky().is_some());
}

#[test]
fn invalid_randers_is_rejected() {
    let bad = MetricSpec::new(
        2,
        MetricFamily::Randers {
            base: Box::new(MetricFamily::Riemannian(RiemannianChart::Euclidean)),
            beta: OneForm::Constant(vec![1.5, 0.0]),
        },
        Domain::cube(2, 1.0),
    )
    .unwrap();
    assert!(matches!(validate(&bad), Err(GeomError::NotPositiveDefinite(_))));
    assert!(zoo::randers_constant(vec![1.2, 0.0]).is_err());
    validate(&zoo::sphere(1.0).unwrap()).unwrap();
    validate(&zoo::katok(0.3).unwrap()).unwrap();
}

#[test]
fn out_of_range_katok_is_rejected() {
    assert!(matches!(zoo::katok(1.0), Err(GeomError::SmallnessViolation(_))));
}

use crate::error::GeomError;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn legendre_is_positively_homogeneous(seed in 0u64..1000, lambda in 0.1f64..5.0) {
        let mut r = rng(seed);
        for m in [zoo::sphere(1.0).unwrap(), zoo::randers_constant(vec![0.2, 0.4]).unwrap()] {
            let x = random_point_in_ball(&mut r, 2, 0.8);
            let y = random_unit_vector(&mut r, 2);
            let l1 = legendre(&m, &pp(&x, &y)).unwrap();
            let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            let l2 = legendre(&m, &pp(&x, &ys)).unwrap();
            for i in 0..2 {
                prop_assert!((l2[i] - lambda * l1[i]).abs() < 1e-12 * lambda.max(1.0));
            }
        }
    }

    #[test]
    fn spray_is_two_homogeneous(seed in 0u64..1000, lambda in 0.1f64..5.0) {
        let mut r = rng(seed);
        let m = zoo::randers_constant(vec![0.1, -0.3]).unwrap();
        let sph = zoo::sphere(1.0).unwrap();
        for m in [&m, &sph] {
            let x = random_point_in_ball(&mut r, 2, 0.8);
            let y = random_unit_vector(&mut r, 2);
            let g1 = spray(m).g_coeffs(&x, &y).unwrap();
            let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            let g2 = spray(m).g_coeffs(&x, &ys).unwrap();
            for i in 0..2 {
                prop_assert!((g2[i] - lambda * lambda * g1[i]).abs() < 1e-11 * lambda.powi(2).max(1.0));
            }
        }
    }

    #[test]
    fn finsler_is_positively_homogeneous(seed in 0u64..1000, lambda in 0.1f64..5.0) {
        let mut r = rng(seed);
        for m in metric_samples() {
            let x = random_point_in_ball(&mut r, m.n, 0.6);
            let y = random_unit_vector(&mut r, m.n);
            let f1 = m.finsler(&pp(&x, &y)).unwrap();
            let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            let f2 = m.finsler(&pp(&x, &ys)).unwrap();
            prop_assert!((f2 - lambda * f1).abs() < 1e-11 * lambda.max(1.0));
        }
    }
}

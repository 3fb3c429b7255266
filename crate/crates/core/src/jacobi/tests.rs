use super::*;
use crate::error::GeomError;
use crate::fanning::{invariants, wronskian, FrameCurve};
use crate::finsler::{fundamental_tensor, zoo, MetricSpec, PhasePoint, RiemannianChart};
use crate::numkit::{max_abs, Mat};
use crate::samples::{random_point_in_ball, random_unit_vector, rng};

fn pp(x: &[f64], y: &[f64]) -> PhasePoint {
    PhasePoint::new(x.to_vec(), y.to_vec()).unwrap()
}

fn unit(m: &MetricSpec, x: &[f64], y: &[f64]) -> PhasePoint {
    let f = m.finsler(&pp(x, y)).unwrap();
    pp(x, &y.iter().map(|v| v / f).collect::<Vec<_>>())
}

fn block(n: usize, t: f64) -> Mat {
    let mut m = Mat::identity(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = t;
    }
    m
}

#[test]
fn euclidean_transport_is_a_shear() {
    let m = zoo::euclidean(2);
    let orbit = transport(&m, &pp(&[0.1, 0.2], &[1.0, -0.5]), 1.0).unwrap();
    for nd in orbit.nodes().iter().step_by(97) {
        assert!(max_abs(&(&nd.transport - block(2, nd.t))) < 1e-12);
        let mut a = Mat::zeros(4, 2);
        for i in 0..2 {
            a[(i, i)] = -nd.t;
            a[(2 + i, i)] = 1.0;
        }
        assert!(max_abs(&(&nd.a - a)) < 1e-12);
    }
    // M(t + s) = M(t)·M(s) for the shear flow
    let (ma, mb) = (orbit.node_at(0.3).unwrap().transport, orbit.node_at(0.5).unwrap().transport);
    let mab = orbit.node_at(0.8).unwrap().transport;
    assert!(max_abs(&(mab - ma * mb)) < 1e-12);
}

#[test]
fn off_grid_instants_are_reintegrated() {
    let m = zoo::euclidean(2);
    let orbit = transport(&m, &pp(&[0.0, 0.0], &[1.0, 0.0]), 1.0).unwrap();
    let t = 0.123_456_7;
    let nd = orbit.node_at(t).unwrap();
    assert!((nd.t - t).abs() < 1e-15);
    assert!((nd.point.x[0] - t).abs() < 1e-12);
    assert!((nd.a[(0, 0)] + t).abs() < 1e-12);
    // on the sphere the re-integrated node sits between its grid neighbours
    let s = zoo::sphere(1.0).unwrap();
    let orbit = transport(&s, &pp(&[0.2, 0.1], &[0.3, 0.4]), 0.5).unwrap();
    let k = orbit.node_at(0.3).unwrap();
    let off = orbit.node_at(0.3 + 1e-4).unwrap();
    assert!(max_abs(&(&off.a - &k.a)) < 1e-3 && max_abs(&(&off.a - &k.a)) > 0.0);
    let ft_on = orbit.frame(0.3).unwrap();
    let ft_off = orbit.frame(0.3 + 1e-7).unwrap();
    assert!(max_abs(&(&ft_on.addot - &ft_off.addot)) < 1e-5);
}

#[test]
fn window_outside_orbit_is_rejected() {
    let orbit = transport(&zoo::euclidean(2), &pp(&[0.0, 0.0], &[1.0, 0.0]), 0.1).unwrap();
    assert!(matches!(orbit.frame(5.0), Err(GeomError::OutOfRange(_))));
}

#[test]
fn leaving_the_chart_is_reported() {
    let m = zoo::hyperbolic();
    let r = transport(&m, &pp(&[0.5, 0.0], &[1.0, 0.0]), 3.0);
    assert!(matches!(r, Err(GeomError::OutOfChart(t)) if t > 0.0));
}

#[test]
fn sphere_transport_is_symplectic() {
    let m = zoo::sphere(1.0).unwrap();
    let orbit = transport(&m, &unit(&m, &[0.3, -0.2], &[0.6, 0.8]), 2.0).unwrap();
    let drift = orbit.symplectic_drift(40).unwrap();
    assert!(drift < 1e-7, "drift {drift:e}");
    let a0 = orbit.node_at(0.0).unwrap().a;
    let v = crate::numkit::vstack(&[&Mat::zeros(2, 2), &Mat::identity(2, 2)]);
    assert_eq!(a0, v);
}

#[test]
fn wronskian_equals_fundamental_tensor_along_orbits() {
    let sphere = zoo::sphere(1.0).unwrap();
    let randers = zoo::randers_constant(vec![0.3, -0.2]).unwrap();
    let katok = zoo::katok(0.3).unwrap();
    for m in [&sphere, &randers, &katok] {
        let orbit = transport(m, &unit(m, &[0.2, 0.1], &[0.6, 0.8]), 2.0).unwrap();
        for t in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0] {
            let (w, g) = orbit.pulled_wronskian(t).unwrap();
            assert!(max_abs(&(&w - &g)) < 1e-6, "{:?} t = {t}: {w} vs {g}", m.family);
        }
    }
}

#[test]
fn wronskian_at_zero_is_the_fundamental_tensor() {
    let m = zoo::sphere(1.0).unwrap();
    let v = pp(&[0.4, 0.3], &[1.0, 0.2]);
    let orbit = transport(&m, &v, 0.0).unwrap();
    let ft = orbit.frame(0.0).unwrap();
    let w = wronskian(&ft, &orbit.omega0).unwrap();
    let g = fundamental_tensor(&m, &v).unwrap();
    assert!(max_abs(&(w - g)) < 1e-8);
}

#[test]
fn constant_curvature_examples() {
    let mut r = rng(5);
    let cases = [(zoo::euclidean(2), 0.0, 1e-8), (zoo::sphere(1.0).unwrap(), 1.0, 1e-4), (zoo::hyperbolic(), -1.0, 1e-4)];
    for (m, k, tol) in cases {
        for _ in 0..3 {
            let x = random_point_in_ball(&mut r, 2, 0.7);
            let v = pp(&x, &random_unit_vector(&mut r, 2));
            let u = random_unit_vector(&mut r, 2);
            let kf = flag_curvature(&m, &v, &u).unwrap();
            assert!((kf - k).abs() < tol, "{:?}: {kf}", m.family);
        }
    }
}

#[test]
fn three_dimensional_sphere_chart() {
    let m = zoo::hopf_total(1.0).unwrap();
    let v = pp(&[0.7, 0.1, -0.3], &[0.3, 0.5, -0.2]);
    let k = flag_curvature(&m, &v, &[0.1, -0.4, 0.9]).unwrap();
    assert!((k - 1.0).abs() < 1e-4);
}

#[test]
fn flag_curvature_depends_only_on_the_flag() {
    let m = zoo::randers_constant(vec![0.2, 0.1, -0.3]).unwrap();
    let m = MetricSpec::new(
        3,
        crate::finsler::MetricFamily::Randers {
            base: Box::new(crate::finsler::MetricFamily::Riemannian(RiemannianChart::Exponential { a: 0.5 })),
            beta: crate::finsler::OneForm::Constant(vec![0.2, 0.1, -0.3]),
        },
        m.domain.clone(),
    )
    .unwrap();
    let x = [0.1, 0.2, -0.1];
    let y = [0.5, -0.3, 0.8];
    let u = [0.2, 0.9, 0.1];
    let k0 = flag_curvature(&m, &pp(&x, &y), &u).unwrap();
    assert!(k0.abs() > 1e-3);
    let mut ks = vec![];
    for (lam, mu, s) in [(2.0, 0.0, 1.0), (-0.5, 0.0, 1.0), (1.0, 0.7, 1.0), (1.0, -3.0, 1.0), (1.0, 0.0, 2.5), (3.0, 1.0, 0.4)] {
        let us: Vec<f64> = (0..3).map(|i| lam * u[i] + mu * y[i]).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * s).collect();
        ks.push(flag_curvature(&m, &pp(&x, &ys), &us).unwrap());
    }
    for k in ks {
        assert!((k - k0).abs() < 1e-6 * k0.abs(), "{k} vs {k0}");
    }
    assert!(matches!(flag_curvature(&m, &pp(&x, &y), &[1.0, -0.6, 1.6]), Err(GeomError::DegenerateFlag)));
}

#[test]
fn riemann_oracle_examples() {
    let flat = |_: &[f64]| Mat::identity(3, 3);
    assert!(riemann_oracle(&flat, &[0.1, 0.2, 0.3], &[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]).unwrap().abs() < 1e-12);
    let s = zoo::sphere(1.0).unwrap();
    let mut ks = vec![];
    for x in [[0.0, 0.0], [0.5, -0.3], [1.2, 0.4], [-0.8, 1.1]] {
        ks.push(riemann_oracle_for(&s, &x, &[1.0, 0.3], &[-0.2, 1.0]).unwrap());
    }
    let spread = ks.iter().fold(0.0f64, |a, k| a.max((k - 1.0).abs()));
    assert!(spread < 1e-6, "{ks:?}");
    let h = riemann_oracle_for(&zoo::hyperbolic(), &[0.3, 0.1], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    assert!((h + 1.0).abs() < 1e-6);
}

/// Sectional curvature of `e^{2a x₁}δ` on the plane with Euclidean-orthonormal
/// basis `(p, q)`: `−a²e^{−2a x₁}(1 − p₁² − q₁²)`.
fn conformal_closed_form(a: f64, x: &[f64], v: &[f64], u: &[f64]) -> f64 {
    let n = |w: &[f64]| w.iter().map(|c| c * c).sum::<f64>().sqrt();
    let p: Vec<f64> = v.iter().map(|c| c / n(v)).collect();
    let d: f64 = p.iter().zip(u).map(|(a, b)| a * b).sum();
    let q0: Vec<f64> = u.iter().zip(&p).map(|(a, b)| a - d * b).collect();
    let q: Vec<f64> = q0.iter().map(|c| c / n(&q0)).collect();
    -a * a * (-2.0 * a * x[0]).exp() * (1.0 - p[0] * p[0] - q[0] * q[0])
}

#[test]
fn conformal_family_matches_closed_form_and_oracle() {
    let mut r = rng(11);
    for a in [0.2, 0.5] {
        let m = zoo::riemannian_conformal(a, 3).unwrap();
        for _ in 0..4 {
            let x = random_point_in_ball(&mut r, 3, 1.0);
            let v = random_unit_vector(&mut r, 3);
            let u = random_unit_vector(&mut r, 3);
            let closed = conformal_closed_form(a, &x, &v, &u);
            let oracle = riemann_oracle_for(&m, &x, &v, &u).unwrap();
            assert!((closed - oracle).abs() < 1e-7, "{closed} vs {oracle}");
            let k = flag_curvature(&m, &pp(&x, &v), &u).unwrap();
            assert!((k - oracle).abs() < 1e-3 * oracle.abs().max(0.1), "{k} vs {oracle}");
        }
    }
}

#[test]
fn sphere_curvature_is_constant_along_the_orbit() {
    let m = zoo::sphere(1.0).unwrap();
    let orbit = transport(&m, &unit(&m, &[0.1, 0.3], &[1.0, 0.4]), 1.2).unwrap();
    for t in [0.0, 0.4, 0.8, 1.2] {
        let k = flag_curvature_at(&orbit, t, &[0.3, -1.0]).unwrap();
        assert!((k - 1.0).abs() < 1e-4, "t = {t}: {k}");
    }
}

#[test]
fn tangent_and_cotangent_routes_agree() {
    let m = zoo::katok(0.3).unwrap();
    let v = pp(&[0.2, -0.1], &[0.5, 0.7]);
    let u = [1.0, 0.2];
    let tan = transport_with(&m, &v, 0.0, TransportOptions { route: Some(Route::Tangent), ..Default::default() }).unwrap();
    let cot = transport(&m, &v, 0.0).unwrap();
    assert_eq!(cot.route, Route::Cotangent);
    let kt = flag_curvature_at(&tan, 0.0, &u).unwrap();
    let kc = flag_curvature_at(&cot, 0.0, &u).unwrap();
    assert!((kt - kc).abs() < 1e-6, "{kt} vs {kc}");
    assert!((kc - 1.0).abs() < 1e-4);
    // the same plane at t = 0 on both routes
    let pt = tan.node_at(0.0).unwrap().a;
    let pc = cot.node_at(0.0).unwrap().a;
    assert!(crate::numkit::rank(&crate::numkit::hstack(&[&pt, &pc]), 1e-9) == 2);
}

#[test]
fn stencil_and_analytic_k_agree_on_jacobi_curves() {
    let m = zoo::hyperbolic();
    let orbit = transport(&m, &unit(&m, &[0.1, 0.2], &[0.3, 1.0]), 0.5).unwrap();
    let inv = invariants(&orbit, 0.5, orbit.stencil_at(0.5)).unwrap();
    let k2 = crate::fanning::k_by_fddot_stencil(&orbit, 0.5, orbit.stencil_at(0.5)).unwrap();
    assert!(max_abs(&(&inv.k - &k2)) < 1e-4 * max_abs(&inv.k));
}

#[test]
fn contact_split_at_zero() {
    let m = zoo::sphere(1.0).unwrap();
    let v = unit(&m, &[0.3, 0.1], &[0.2, 1.0]);
    let orbit = transport(&m, &v, 0.0).unwrap();
    let c = contact_reduce(&orbit, 0.0).unwrap();
    let mut expect = crate::numkit::Vector::zeros(4);
    expect[2] = v.y[0];
    expect[3] = v.y[1];
    assert!((&c.r - &expect).amax() < 1e-14);
    assert_eq!(c.lc.shape(), (4, 1));
    assert!(matches!(contact_reduce(&transport(&m, &pp(&[0.0, 0.0], &[1.0, 1.0]), 0.0).unwrap(), 0.0), Err(GeomError::NotUnitSpeed(_))));
}

#[test]
fn euclidean_contact_split_is_exact() {
    let m = zoo::euclidean(3);
    let orbit = transport(&m, &pp(&[0.0, 0.0, 0.0], &[0.6, 0.8, 0.0]), 1.0).unwrap();
    let c = contact_reduce(&orbit, 0.7).unwrap();
    assert_eq!(c.k_residual, 0.0);
    assert!((&c.r - &c.r_expected).amax() < 1e-12);
    assert_eq!(c.block_full.shape(), (2, 2));
    assert!(max_abs(&c.block_reduced) < 1e-9);
}

#[test]
fn contact_identities_on_sphere_and_katok() {
    let sphere = zoo::sphere(1.0).unwrap();
    let katok = zoo::katok(0.3).unwrap();
    for m in [&sphere, &katok] {
        let orbit = transport(m, &unit(m, &[0.2, -0.1], &[0.6, 0.8]), 1.1).unwrap();
        for t in [0.3, 0.7, 1.1] {
            let c = contact_reduce(&orbit, t).unwrap();
            assert!(c.k_residual < 1e-5, "{t}: {}", c.k_residual);
            assert!((&c.r - &c.r_expected).amax() < 1e-8 * c.r.amax());
            assert!(c.orth_residual < 1e-8);
            assert!(c.contact_residual < 1e-8);
            assert!(c.r_leak < 1e-5);
            assert!(max_abs(&(&c.block_full - &c.block_reduced)) < 1e-5, "{} vs {}", c.block_full, c.block_reduced);
        }
    }
}

#[test]
fn contact_blocks_in_three_dimensions() {
    let m = MetricSpec::new(
        3,
        crate::finsler::MetricFamily::Randers {
            base: Box::new(crate::finsler::MetricFamily::Riemannian(RiemannianChart::HopfTotal { radius: 1.0 })),
            beta: crate::finsler::OneForm::Constant(vec![0.2, -0.1, 0.3]),
        },
        zoo::hopf_total(1.0).unwrap().domain,
    )
    .unwrap();
    let orbit = transport(&m, &unit(&m, &[0.7, 0.2, -0.4], &[0.3, 0.9, -0.5]), 0.7).unwrap();
    let c = contact_reduce(&orbit, 0.7).unwrap();
    assert_eq!(c.block_full.shape(), (2, 2));
    assert!(c.k_residual < 1e-5);
    assert!(max_abs(&(&c.block_full - &c.block_reduced)) < 1e-5, "{} vs {}", c.block_full, c.block_reduced);
}

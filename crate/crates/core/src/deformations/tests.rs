use proptest::prelude::*;

use super::*;
use crate::error::GeomError;
use crate::finsler::{spray, zoo, MetricSpec, OneForm, PhasePoint, Potential, VectorField};
use crate::jacobi::flag_curvature;
use crate::numkit::{rk_integrate, scalar_derivative, Stencil};
use crate::samples::{random_point_in_ball, random_unit_vector, rng};

fn pp(x: &[f64], y: &[f64]) -> PhasePoint {
    PhasePoint::new(x.to_vec(), y.to_vec()).unwrap()
}

fn stereo_theta(scale: f64) -> ClosedOneForm {
    ClosedOneForm::new(OneForm::Exact(Potential::StereoCoordinate { index: 0, scale }))
}

fn sphere_flags(seed: u64, count: usize) -> Vec<(PhasePoint, Vec<f64>)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let x = random_point_in_ball(&mut r, 2, 1.2);
            let y = random_unit_vector(&mut r, 2);
            let w = random_unit_vector(&mut r, 2);
            (pp(&x, &y), w)
        })
        .collect()
}

#[test]
fn zero_form_changes_nothing() {
    let s = zoo::sphere(1.0).unwrap();
    let th = ClosedOneForm::zero(2);
    assert_eq!(projective_deform(&s, &th).unwrap(), s);
    let rhs = projective_curvature_rhs(&s, &th, &pp(&[0.3, -0.1], &[0.2, 0.5]), &[1.0, 0.0]).unwrap();
    assert!((rhs.phi - 1.0).abs() < 1e-15 && rhs.s_phi.abs() < 1e-15 && rhs.ss_phi.abs() < 1e-15);
    assert!((rhs.k_phi_form - rhs.k_f0).abs() < 1e-12);
    assert!((rhs.k_f0 - 1.0).abs() < 1e-4);
}

#[test]
fn constant_form_on_euclidean_space_is_flat() {
    let e = zoo::euclidean(2);
    let th = ClosedOneForm::new(OneForm::Constant(vec![0.3, 0.0]));
    let f = projective_deform(&e, &th).unwrap();
    for (v, w) in sphere_flags(1, 5) {
        let rhs = projective_curvature_rhs(&e, &th, &v, &w).unwrap();
        assert!(rhs.k_phi_form.abs() < 1e-8 && rhs.k_f_form.abs() < 1e-8, "{rhs:?}");
        assert!(flag_curvature(&f, &v, &w).unwrap().abs() < 1e-8);
    }
}

#[test]
fn large_forms_are_rejected() {
    let e = zoo::euclidean(2);
    let th = ClosedOneForm::new(OneForm::Constant(vec![1.2, 0.0]));
    assert!(matches!(projective_deform(&e, &th), Err(GeomError::SmallnessViolation(_))));
    let th = ClosedOneForm::new(OneForm::Constant(vec![0.1, 0.0, 0.0]));
    assert!(matches!(projective_deform(&e, &th), Err(GeomError::DimensionMismatch(_))));
    let th = ClosedOneForm::new(OneForm::Exact(Potential::StereoCoordinate { index: 2, scale: 0.1 }));
    assert!(matches!(projective_deform(&e, &th), Err(GeomError::DimensionMismatch(_))));
}

#[test]
fn sphere_deformation_is_valid() {
    let s = zoo::sphere(1.0).unwrap();
    let th = stereo_theta(0.2);
    th.check(&s).unwrap();
    for x in s.domain.grid(5) {
        assert!(th.closedness_residual(&x) < 1e-12);
        assert!(th.dual_norm(&s, &x).unwrap() <= 0.2 + 1e-12);
    }
}

#[test]
fn curvature_formula_matches_direct_computation() {
    let s = zoo::sphere(1.0).unwrap();
    let th = stereo_theta(0.2);
    let f = projective_deform(&s, &th).unwrap();
    let mut spread: f64 = 0.0;
    for (v, w) in sphere_flags(7, 10) {
        let rhs = projective_curvature_rhs(&s, &th, &v, &w).unwrap();
        let direct = flag_curvature(&f, &v, &w).unwrap();
        assert!((direct - rhs.k_phi_form).abs() < 1e-3, "direct {direct} formula {}", rhs.k_phi_form);
        assert!((rhs.k_phi_form - rhs.k_f_form).abs() < 1e-8);
        spread = spread.max((direct - 1.0).abs());
    }
    // the deformation really changes the curvature
    assert!(spread > 1e-2);
}

#[test]
fn spray_derivatives_of_phi_match_a_stencil() {
    let s = zoo::sphere(1.0).unwrap();
    let th = stereo_theta(0.25);
    for (v, w) in sphere_flags(11, 3) {
        let rhs = projective_curvature_rhs(&s, &th, &v, &w).unwrap();
        let h = 1e-2;
        let phi_at = |t: f64| {
            if t == 0.0 {
                return th.theta.apply(&rhs.u.x, &rhs.u.y);
            }
            let orbit = rk_integrate(
                |_, z| {
                    let (dx, dy) = spray(&s).eval(&z[..2], &z[2..])?;
                    Ok(dx.into_iter().chain(dy).collect())
                },
                &rhs.u.state(),
                0.0,
                t,
                200,
            )
            .unwrap();
            let z = &orbit.last().unwrap().1;
            th.theta.apply(&z[..2], &z[2..])
        };
        let st = Stencil::new(0.0, h, 4).unwrap();
        let phis: Vec<f64> = st.nodes.iter().map(|&t| 1.0 / (1.0 + phi_at(t))).collect();
        let d1 = scalar_derivative(&phis, &st, false).unwrap();
        let d2 = scalar_derivative(&phis, &st, true).unwrap();
        assert!((d1 - rhs.s_phi).abs() < 1e-6, "{d1} vs {}", rhs.s_phi);
        assert!((d2 - rhs.ss_phi).abs() < 1e-5, "{d2} vs {}", rhs.ss_phi);
    }
}

#[test]
fn psi_carries_the_spray_to_a_multiple_of_the_spray() {
    let s = zoo::sphere(1.0).unwrap();
    let th = stereo_theta(0.2);
    for (v, _) in sphere_flags(3, 8) {
        assert!(psi_spray_residual(&s, &th, &v).unwrap() < 1e-6);
        assert!(cosphere_residual(&s, &th, &v).unwrap() < 1e-8);
    }
}

#[test]
fn deformed_geodesics_trace_the_same_curves() {
    let s = zoo::sphere(1.0).unwrap();
    let th = stereo_theta(0.2);
    for (v, _) in sphere_flags(5, 10) {
        let d = trace_deviation(&s, &th, &v, 1.0).unwrap();
        assert!(d < 1e-5, "deviation {d}");
    }
    // the comparison is not vacuous: the Katok metric bends the traces
    let other = zoo::katok(0.2).unwrap();
    let v = pp(&[0.4, 0.1], &[0.3, 0.8]);
    let a = trace_deviation(&s, &ClosedOneForm::zero(2), &v, 1.0).unwrap();
    assert!(a < 1e-12);
    assert!(trace_deviation_between(&s, &other, &v) > 1e-3);
}

fn trace_deviation_between(a: &MetricSpec, b: &MetricSpec, v: &PhasePoint) -> f64 {
    let end = |m: &MetricSpec| {
        let f = m.finsler(v).unwrap();
        let orbit = rk_integrate(
            |_, z| {
                let (dx, dy) = spray(m).eval(&z[..2], &z[2..])?;
                Ok(dx.into_iter().chain(dy).collect())
            },
            &v.state(),
            0.0,
            1.0 / f,
            2000,
        )
        .unwrap();
        orbit.last().unwrap().1.clone()
    };
    let (p, q) = (end(a), end(b));
    // compare directions of the endpoint displacement
    let dp = [p[0] - v.x[0], p[1] - v.x[1]];
    let dq = [q[0] - v.x[0], q[1] - v.x[1]];
    let cross = dp[0] * dq[1] - dp[1] * dq[0];
    cross.abs() / (dp[0].hypot(dp[1]) * dq[0].hypot(dq[1]))
}

#[test]
fn rotation_is_killing_and_translation_is_not() {
    let k = katok_killing_field(0.3);
    let mut r = rng(2);
    for _ in 0..10 {
        let x = random_point_in_ball(&mut r, 2, 2.0);
        assert!(k.killing_residual(&x) < 1e-8);
        assert!(k.norm(&x) <= 0.3 + 1e-12);
    }
    let t = KillingField { field: VectorField::Constant(vec![0.3, 0.0]), chart: k.chart.clone() };
    assert!(t.killing_residual(&[0.5, 0.2]) > 1e-2);
}

#[test]
fn katok_metric_basics() {
    let k0 = katok_metric(0.0).unwrap();
    let s = zoo::sphere(1.0).unwrap();
    let k3 = katok_metric(0.3).unwrap();
    let mut r = rng(4);
    for _ in 0..10 {
        let x = random_point_in_ball(&mut r, 2, 1.5);
        let y = random_unit_vector(&mut r, 2);
        let v = pp(&x, &y);
        assert!((k0.finsler(&v).unwrap() - s.finsler(&v).unwrap()).abs() < 1e-10);
        assert!((k3.finsler(&v).unwrap() - katok_zermelo(0.3, &x, &y)).abs() < 1e-10);
    }
    let (x, y) = ([0.5, -0.3], [0.2, 0.9]);
    let fwd = k3.finsler(&pp(&x, &y)).unwrap();
    let bwd = k3.finsler(&pp(&x, &[-y[0], -y[1]])).unwrap();
    assert!((fwd - bwd).abs() > 1e-2);
    assert!(matches!(katok_metric(1.0), Err(GeomError::SmallnessViolation(_))));
}

#[test]
fn katok_curvature_stays_one() {
    let flags = katok_flags(17, 10);
    assert!(katok_curvature_check(0.0, &flags).unwrap() < 1e-4);
    assert!(katok_curvature_check(0.1, &flags).unwrap() < 1e-3);
    assert!(katok_curvature_check(0.3, &flags).unwrap() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn both_forms_of_the_formula_agree(scale in -0.3f64..0.3, seed in 0u64..1000) {
        let s = zoo::sphere(1.0).unwrap();
        let (v, w) = sphere_flags(seed, 1).pop().unwrap();
        let rhs = projective_curvature_rhs(&s, &stereo_theta(scale), &v, &w).unwrap();
        prop_assert!((rhs.k_phi_form - rhs.k_f_form).abs() < 1e-8);
    }
}

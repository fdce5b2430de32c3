mod common;

use proptest::prelude::*;
use rotspec::geometry::{
    curvature_bundle, curvature_bundle_with, f_derivatives, fgh, theta_prime, ProfileState,
    RotationParams,
};

/// Random states strictly inside the disk, away from the axis and the rim.
fn disk_state() -> impl Strategy<Value = ProfileState> {
    (
        0.02f64..0.97,
        0.05f64..std::f64::consts::PI - 0.05,
        -10.0f64..10.0,
    )
        .prop_map(|(r, phi, theta)| ProfileState::new(r * phi.cos(), r * phi.sin(), theta))
}

fn params() -> impl Strategy<Value = RotationParams> {
    (1u32..6, 1u32..6).prop_map(|(k, l)| RotationParams::new(k, l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn principal_curvatures_sum_to_mean_curvature(s in disk_state(), p in params()) {
        if let Ok(b) = curvature_bundle(&s, &p) {
            let sum = p.k() as f64 * b.lambda0 + p.l() as f64 * b.lambda_mid + b.lambda_last;
            let scale = 1.0f64.max(sum.abs()).max(b.n_h.abs());
            prop_assert!((sum - b.n_h).abs() / scale < 1e-12);
        }
    }

    #[test]
    fn treadmill_coordinates_preserve_radius(s in disk_state()) {
        let (xi1, xi2) = s.treadmill();
        prop_assert!((xi1 * xi1 + xi2 * xi2 - s.f1 * s.f1 - s.f2 * s.f2).abs() < 1e-12);
    }

    #[test]
    fn arclength_factor_identity(s in disk_state(), p in params()) {
        if let (Ok((f, g, _)), Ok(k)) = (fgh(&s), theta_prime(&s, &p)) {
            let d = f_derivatives(&s, k).unwrap();
            prop_assert!((d.one_plus_fp2 * f * f + g * g - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_norm_is_sum_of_squares(s in disk_state(), p in params()) {
        if let Ok(b) = curvature_bundle(&s, &p) {
            let direct = p.k() as f64 * b.lambda0.powi(2)
                + p.l() as f64 * b.lambda_mid.powi(2)
                + b.lambda_last.powi(2);
            prop_assert!((direct - b.shape_norm_sq).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn single_circle_factor_matches_kappa_form(s in disk_state(), k in 1u32..8) {
        // with l = 1: nH = (n g + κ1 + κ2)/h − κ1 (f f')²/h³, κ1 = θ', κ2 = −cos θ / f2
        let p = RotationParams::new(k, 1).unwrap();
        if let Ok(b) = curvature_bundle(&s, &p) {
            let kappa1 = b.k_curv;
            let kappa2 = -s.theta.cos() / s.f2;
            let ffp = -b.xi1;
            let alt = (p.n() as f64 * b.g + kappa1 + kappa2) / b.h
                - kappa1 * ffp * ffp / b.h.powi(3);
            prop_assert!((alt - b.n_h).abs() <= 1e-12 * b.n_h.abs().max(1.0));
        }
    }

    #[test]
    fn minimality_ode_makes_mean_curvature_vanish(s in disk_state(), p in params()) {
        if let Ok(b) = curvature_bundle(&s, &p) {
            // size of the terms that cancel
            let scale = (p.n() as f64 * b.g.abs() + p.l() as f64 * b.kappa1.abs() + b.k_curv.abs()) / b.h
                + b.k_curv.abs() * b.xi1 * b.xi1 / b.h.powi(3);
            prop_assert!(b.n_h.abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn curvature_with_arbitrary_turning_rate(s in disk_state(), kc in -50.0f64..50.0) {
        // nH is affine in the turning rate with slope (1 − ξ1²/h²)/h
        let p = RotationParams::new(3, 1).unwrap();
        if let (Ok(b0), Ok(b1)) = (curvature_bundle_with(&s, &p, 0.0), curvature_bundle_with(&s, &p, kc)) {
            let slope = (1.0 - b0.xi1 * b0.xi1 / (b0.h * b0.h)) / b0.h;
            let expect = b0.n_h + kc * slope;
            prop_assert!((b1.n_h - expect).abs() <= 1e-9 * b1.n_h.abs().max(1.0).max(kc.abs() * slope.abs()));
        }
    }
}

#[test]
fn shape_norm_closed_form_for_five_dimensional_case() {
    // n = 5, k = 3, l = 1, with θ' from the minimality equation
    let p = common::example1();
    for node in p.half_trajectory.nodes() {
        let s = ProfileState::from_slice(&node.state);
        let b = curvature_bundle(&s, &p.params).unwrap();
        let (f1, f2, t) = (s.f1, s.f2, s.theta);
        let num = -20.0 * f1 * f1 * f2 * f2 * t.sin().powi(2)
            + 5.0 * f1 * f2 * (4.0 * f2 * f2 - 1.0) * (2.0 * t).sin()
            - 2.0 * (10.0 * f2.powi(4) - 5.0 * f2 * f2 + 1.0) * t.cos().powi(2);
        let den = f2 * f2 * (b.g - 1.0) * (b.g + 1.0);
        let closed = num / den;
        assert!(
            (closed - b.shape_norm_sq).abs() <= 1e-9 * b.shape_norm_sq.max(1.0),
            "u = {}: {closed} vs {}",
            node.u,
            b.shape_norm_sq
        );
    }
}

#[test]
fn f_derivatives_match_differences_of_dense_output() {
    let p = common::example1();
    let h = 1e-5;
    let f_at = |u: f64| {
        let s = p.state_at(u).unwrap();
        fgh(&s).unwrap().0
    };
    let fprime_at = |u: f64| {
        let s = p.state_at(u).unwrap();
        let k = theta_prime(&s, &p.params).unwrap();
        f_derivatives(&s, k).unwrap().fprime
    };
    let mut worst = 0.0f64;
    for t in 1..200 {
        let u = p.period * t as f64 / 200.0;
        let s = p.state_at(u).unwrap();
        let k = theta_prime(&s, &p.params).unwrap();
        let d = f_derivatives(&s, k).unwrap();
        let fd1 = (f_at(u + h) - f_at(u - h)) / (2.0 * h);
        let fd2 = (fprime_at(u + h) - fprime_at(u - h)) / (2.0 * h);
        worst = worst
            .max((fd1 - d.fprime).abs())
            .max((fd2 - d.fsecond).abs());
    }
    assert!(worst < 1e-5, "worst finite-difference gap {worst:e}");
}

#[test]
fn symmetric_start_point() {
    let p = RotationParams::new(3, 1).unwrap();
    let a = 0.14971329;
    let s = ProfileState::new(0.0, a, 0.0);
    let (f, g, h) = fgh(&s).unwrap();
    assert!((g - a).abs() < 1e-15);
    assert!((f - (1.0 - a * a).sqrt()).abs() < 1e-15);
    assert!((h - f).abs() < 1e-15);
    let k = theta_prime(&s, &p).unwrap();
    assert!((k - (1.0 - 5.0 * a * a) / a).abs() < 1e-12);
    assert_eq!(f_derivatives(&s, k).unwrap().fprime, 0.0);
}

mod common;

use rotspec::geometry::{fgh, theta_prime, ProfileState, RotationParams};
use rotspec::ivp::IntegratorConfig;
use rotspec::profile::PeriodicProfile;
use rotspec::spectrum::{
    analytic_eigenfunction_residual, assemble_spectrum, coefficients, discriminant,
    scan_and_refine, sphere_eigen, AnalyticEigenfunction, ModeIndex, OperatorKind, ScanSettings,
};

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn delta(p: &PeriodicProfile, i: u32, j: u32, kind: OperatorKind, lambda: f64) -> f64 {
    let mode = ModeIndex::new(i, j, &p.params);
    discriminant(p, &mode, kind, lambda, &cfg()).unwrap().delta0
}

/// Harmonic polynomials of degree `i` in `dim + 1` variables, by counting monomials.
fn harmonic_dimension(i: u32, dim: u32) -> u64 {
    fn monomials(deg: i64, vars: u32) -> u64 {
        if deg < 0 {
            return 0;
        }
        if vars == 1 {
            return 1;
        }
        (0..=deg).map(|d| monomials(deg - d, vars - 1)).sum()
    }
    monomials(i as i64, dim + 1) - monomials(i as i64 - 2, dim + 1)
}

#[test]
fn sphere_multiplicities_count_harmonic_polynomials() {
    for dim in 1..6 {
        for i in 0..7 {
            let (value, mult) = sphere_eigen(i, dim);
            assert_eq!(mult, harmonic_dimension(i, dim), "level {i} on S^{dim}");
            assert_eq!(value, (i * (dim + i - 1)) as f64);
        }
    }
}

#[test]
fn discriminant_reference_samples() {
    let p = common::example1();
    let d00 = delta(p, 0, 0, OperatorKind::Laplace, 11.975);
    let d10 = delta(p, 1, 0, OperatorKind::Laplace, 0.0);
    assert!((d00 - 1.1755).abs() < 5e-3, "{d00}");
    assert!((d10 + 273.76).abs() < 1.0, "{d10}");
}

#[test]
fn constants_and_coordinates_are_periodic_solutions() {
    let p = common::example1();
    assert!(delta(p, 0, 0, OperatorKind::Laplace, 0.0).abs() < 1e-6);
    for (i, j) in [(0, 0), (1, 0), (0, 1)] {
        let mode = ModeIndex::new(i, j, &p.params);
        let d = discriminant(p, &mode, OperatorKind::Laplace, 5.0, &cfg()).unwrap();
        assert!(d.delta0.abs() < 1e-6, "mode ({i},{j}): {}", d.delta0);
        assert_eq!(d.monodromy.kernel_dim(), 1);
    }
}

#[test]
fn analytic_eigenfunctions_on_both_examples() {
    for p in [common::example1(), common::example2()] {
        for which in AnalyticEigenfunction::ALL {
            let r = analytic_eigenfunction_residual(p, which).unwrap();
            assert!(r < 1e-6, "{}: {r:e}", which.name());
        }
    }
}

#[test]
fn first_order_coefficient_for_single_circle_factor() {
    let p = common::example1();
    let n = p.params.n() as f64;
    let mode = ModeIndex::new(2, 1, &p.params);
    for t in 0..100 {
        let s = p.state_at(p.period * t as f64 / 100.0).unwrap();
        let (pc, _) = coefficients(&mode, OperatorKind::Jacobi, -3.0, &s, &p.params).unwrap();
        let (f, g, _) = fgh(&s).unwrap();
        let one_plus_fp2 = (1.0 - g * g) / (f * f);
        let (sn, cs) = s.theta.sin_cos();
        let closed = one_plus_fp2 * (-n * (s.f1 * cs + s.f2 * sn) + sn / s.f2);
        assert!((pc - closed).abs() < 1e-9);
    }
}

// --- Jacobi eigenfunctions from the ambient geometry ---------------------------------

/// Unit normal of the profile inside the sphere, as components along
/// `(f, f2, f1)`, followed by the point itself.
fn normal_and_point(s: &ProfileState) -> [f64; 6] {
    let f = (1.0 - s.f1 * s.f1 - s.f2 * s.f2).sqrt();
    let xi1 = s.f1 * s.theta.cos() + s.f2 * s.theta.sin();
    let t = [-xi1 / f, s.theta.sin(), s.theta.cos()];
    let x = [f, s.f2, s.f1];
    let c = [
        x[1] * t[2] - x[2] * t[1],
        x[2] * t[0] - x[0] * t[2],
        x[0] * t[1] - x[1] * t[0],
    ];
    let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    [c[0] / norm, c[1] / norm, c[2] / norm, f, s.f2, s.f1]
}

type Field = fn(&[f64; 6]) -> f64;

fn flow(s: &ProfileState, params: &RotationParams) -> [f64; 3] {
    [
        s.theta.cos(),
        s.theta.sin(),
        theta_prime(s, params).unwrap(),
    ]
}

fn shifted(s: &ProfileState, v: &[f64; 3], e: f64) -> ProfileState {
    ProfileState::new(s.f1 + e * v[0], s.f2 + e * v[1], s.theta + e * v[2])
}

/// Derivatives along the profile flow by central differences in state space.
fn along_flow(field: Field, s: &ProfileState, params: &RotationParams, e: f64) -> (f64, f64, f64) {
    let z = |s: &ProfileState| field(&normal_and_point(s));
    let d1 = |s: &ProfileState| {
        let v = flow(s, params);
        (z(&shifted(s, &v, e)) - z(&shifted(s, &v, -e))) / (2.0 * e)
    };
    let v = flow(s, params);
    let d2 = (d1(&shifted(s, &v, e)) - d1(&shifted(s, &v, -e))) / (2.0 * e);
    (z(s), d1(s), d2)
}

fn jacobi_residual(p: &PeriodicProfile, field: Field, i: u32, j: u32, lambda: f64) -> f64 {
    let mode = ModeIndex::new(i, j, &p.params);
    let mut worst = 0.0f64;
    for t in 0..120 {
        let s = p.state_at(p.period * (t as f64 + 0.5) / 120.0).unwrap();
        let (pc, qc) = coefficients(&mode, OperatorKind::Jacobi, lambda, &s, &p.params).unwrap();
        let residual = |e: f64| {
            let (z, dz, ddz) = along_flow(field, &s, &p.params, e);
            ddz + pc * dz + qc * z
        };
        // Richardson: the central differences carry an O(e²) error
        let extrapolated = (4.0 * residual(5e-4) - residual(1e-3)) / 3.0;
        worst = worst.max(extrapolated.abs());
    }
    worst
}

#[test]
fn normal_components_solve_jacobi_at_minus_n() {
    for p in [common::example1(), common::example2()] {
        let n = p.params.n() as f64;
        let cases: [(&str, Field, u32, u32); 3] = [
            ("first sphere", |v| v[0], 1, 0),
            ("second sphere", |v| v[1], 0, 1),
            ("axis", |v| v[2], 0, 0),
        ];
        for (name, field, i, j) in cases {
            let r = jacobi_residual(p, field, i, j, -n);
            assert!(r < 1e-6, "{name}: {r:e}");
        }
    }
}

#[test]
fn rotation_fields_solve_jacobi_at_zero() {
    for p in [common::example1(), common::example2()] {
        let cases: [(&str, Field, u32, u32); 3] = [
            ("first sphere and axis", |v| v[0] * v[5] - v[2] * v[3], 1, 0),
            (
                "second sphere and axis",
                |v| v[1] * v[5] - v[2] * v[4],
                0,
                1,
            ),
            ("both spheres", |v| v[0] * v[4] - v[1] * v[3], 1, 1),
        ];
        for (name, field, i, j) in cases {
            let r = jacobi_residual(p, field, i, j, 0.0);
            assert!(r < 1e-6, "{name}: {r:e}");
        }
    }
}

#[test]
fn wrong_eigenvalue_is_detected_by_the_oracle() {
    let p = common::example1();
    let r = jacobi_residual(p, |v| v[0], 1, 0, -4.9);
    assert!(r > 1e-2);
}

// --- scanning ------------------------------------------------------------------------

#[test]
fn laplace_spectrum_of_five_dimensional_example() {
    let p = common::example1();
    let settings = ScanSettings::new((0.0, 12.0), 0.025, cfg());
    let report = assemble_spectrum(p, OperatorKind::Laplace, &settings).unwrap();
    let got: Vec<(f64, u64)> = report
        .groups
        .iter()
        .map(|g| (g.lambda, g.multiplicity))
        .collect();
    let expect = [
        (0.0, 1),
        (5.0, 7),
        (9.5961595, 2),
        (10.073635, 4),
        (10.658388, 1),
        (11.815175, 8),
    ];
    assert_eq!(got.len(), expect.len(), "{got:?}");
    for ((l, m), (el, em)) in got.iter().zip(expect) {
        assert!((l - el).abs() < 1e-5, "{l} vs {el}");
        assert_eq!(*m, em);
    }
    assert!(report.candidates.is_empty());
    assert!(report.pruned.iter().all(|w| w.consistent()));
}

#[test]
fn scans_are_deterministic() {
    let p = common::example1();
    let settings = ScanSettings::new((4.0, 6.0), 0.05, cfg());
    let mode = ModeIndex::new(0, 1, &p.params);
    let a = scan_and_refine(p, &mode, OperatorKind::Laplace, &settings).unwrap();
    let b = scan_and_refine(p, &mode, OperatorKind::Laplace, &settings).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.roots.len(), 1);
    assert!((a.roots[0].lambda - 5.0).abs() < 1e-6);
}

#[test]
fn root_at_lower_range_end_is_found() {
    let p = common::example1();
    let settings = ScanSettings::new((0.0, 1.0), 0.025, cfg());
    let mode = ModeIndex::new(0, 0, &p.params);
    let scan = scan_and_refine(p, &mode, OperatorKind::Laplace, &settings).unwrap();
    assert_eq!(scan.roots.len(), 1);
    assert!(scan.roots[0].lambda.abs() < 1e-7);
}

#[test]
fn rescaling_keeps_growing_solutions_finite() {
    let p = common::example1();
    let mode = ModeIndex::new(0, 0, &p.params);
    let d = discriminant(p, &mode, OperatorKind::Jacobi, -2.0e5, &cfg()).unwrap();
    let m = d.monodromy;
    let largest = [m.z1_t, m.z2_t, m.dz1_t, m.dz2_t]
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    // unscaled, the monodromy entries would overflow a double
    assert!(m.log_scale + largest.ln() > f64::MAX.ln());
    assert!(d.delta0.is_finite());
    // far below the spectrum the discriminant is negative
    assert!(d.delta0 < 0.0);
    assert!(d.monodromy.abel_defect() < 1e-6);
}

#[test]
fn abel_identity_at_sampled_spectral_parameters() {
    for p in [common::example1(), common::example2()] {
        for (kind, lambdas) in [
            (OperatorKind::Laplace, [0.3, 2.7, 5.5, 8.1, 11.9]),
            (OperatorKind::Jacobi, [-55.0, -31.0, -12.5, -0.7, 0.9]),
        ] {
            for (t, lambda) in lambdas.into_iter().enumerate() {
                let mode = ModeIndex::new(t as u32 % 3, (t as u32 + 1) % 2, &p.params);
                let d = discriminant(p, &mode, kind, lambda, &cfg()).unwrap();
                assert!(d.monodromy.abel_defect() < 1e-6, "{kind} {lambda}");
            }
        }
    }
}

#[test]
fn invalid_scan_settings() {
    let p = common::example1();
    let mode = ModeIndex::new(0, 0, &p.params);
    for settings in [
        ScanSettings::new((1.0, 0.0), 0.025, cfg()),
        ScanSettings::new((0.0, 1.0), 0.0, cfg()),
        ScanSettings::new((0.0, f64::INFINITY), 0.025, cfg()),
    ] {
        assert!(scan_and_refine(p, &mode, OperatorKind::Laplace, &settings).is_err());
    }
}

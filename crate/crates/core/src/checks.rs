//! Invariant suite for a converged profile: algebraic identities, integration
//! consistency and spectral sanity checks, one measured value per check.

use std::f64::consts::PI;
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::geometry::{self, DomainError, ProfileState, RotationParams};
use crate::ivp::{self, IntegratorConfig, OdeSystem};
use crate::profile::{PeriodicProfile, ProfileSystem};
use crate::spectrum::{self, AnalyticEigenfunction, ModeIndex, OperatorKind};

pub const TRACE_TOL: f64 = 1e-12;
pub const TREADMILL_TOL: f64 = 1e-12;
pub const MINIMALITY_TOL: f64 = 1e-8;
pub const REFLECTION_TOL: f64 = 1e-8;
pub const CLOSURE_TOL: f64 = 1e-6;
pub const ABEL_TOL: f64 = 1e-6;
pub const FD_TOL: f64 = 1e-5;
pub const EIGENFUNCTION_TOL: f64 = 1e-6;
pub const DELTA_AT_ZERO_TOL: f64 = 1e-6;
pub const COEFFICIENT_TOL: f64 = 1e-9;

const FD_STEP: f64 = 1e-5;
const SEED: u64 = 0x5eed_cafe;
const REFLECTION_SAMPLES: usize = 20;
const FD_SAMPLES: usize = 50;
const ABEL_SAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
}

impl CheckLine {
    fn new(name: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            name,
            value,
            threshold,
        }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.threshold
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} value={:.3e} threshold={:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckSuite {
    pub lines: Vec<CheckLine>,
}

impl CheckSuite {
    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(CheckLine::passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckLine> {
        self.lines.iter().find(|l| l.name == name)
    }
}

/// The profile ODE with time reversed, for flying to negative `u`.
struct Reversed(ProfileSystem);

impl OdeSystem for Reversed {
    fn dimension(&self) -> usize {
        3
    }

    fn rhs(&self, u: f64, y: &[f64], d: &mut [f64]) -> Result<(), DomainError> {
        self.0.rhs(-u, y, d)?;
        for v in d.iter_mut() {
            *v = -*v;
        }
        Ok(())
    }
}

// failures inside a check surface as an infinite measured value
fn or_inf<E>(r: Result<f64, E>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

/// States used for the pointwise identities: the trajectory nodes plus a
/// fixed polar grid over the open disk.
fn sample_states(profile: &PeriodicProfile) -> Vec<ProfileState> {
    let mut states: Vec<ProfileState> = profile
        .half_trajectory
        .nodes()
        .iter()
        .map(|n| ProfileState::from_slice(&n.state))
        .collect();
    for ir in 1..10 {
        let r = 0.95 * ir as f64 / 10.0;
        for ip in 0..12 {
            let phi = 2.0 * PI * (ip as f64 + 0.25) / 12.0;
            let (f1, f2) = (r * phi.cos(), r * phi.sin().abs().max(0.05));
            for it in 0..8 {
                let theta = 2.0 * PI * (it as f64 + 0.1) / 8.0;
                states.push(ProfileState::new(f1, f2, theta));
            }
        }
    }
    states
}

fn identity_checks(profile: &PeriodicProfile) -> (f64, f64) {
    let params = profile.params;
    let (k, l) = (params.k() as f64, params.l() as f64);
    let mut trace = 0.0f64;
    let mut radius = 0.0f64;
    for s in sample_states(profile) {
        if s.f1 * s.f1 + s.f2 * s.f2 >= 1.0 {
            continue;
        }
        let Ok(b) = geometry::curvature_bundle(&s, &params) else {
            continue;
        };
        let sum = k * b.lambda0 + l * b.lambda_mid + b.lambda_last;
        let scale = 1.0f64.max(b.n_h.abs()).max(sum.abs());
        trace = trace.max((sum - b.n_h).abs() / scale);
        let (xi1, xi2) = s.treadmill();
        radius = radius.max((xi1 * xi1 + xi2 * xi2 - s.f1 * s.f1 - s.f2 * s.f2).abs());
    }
    (trace, radius)
}

fn reflection_defect(profile: &PeriodicProfile, config: &IntegratorConfig) -> Result<f64, String> {
    let system = Reversed(ProfileSystem {
        params: profile.params,
    });
    let half = 0.5 * profile.period;
    let back = ivp::integrate(&system, 0.0, &profile.initial_state(), half, config)
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for t in 1..=REFLECTION_SAMPLES {
        let u = half * t as f64 / REFLECTION_SAMPLES as f64;
        let b = back.eval(u).ok_or("outside backward flight")?;
        let fwd = profile
            .half_trajectory
            .eval(u)
            .ok_or("outside forward flight")?;
        worst = worst
            .max((b[0] + fwd[0]).abs())
            .max((b[1] - fwd[1]).abs())
            .max((b[2] + fwd[2]).abs());
    }
    Ok(worst)
}

/// Extra rising crossings of `θ = π` strictly inside the half period.
fn extra_crossings(profile: &PeriodicProfile) -> f64 {
    let nodes = profile.half_trajectory.nodes();
    nodes
        .windows(2)
        .take(nodes.len().saturating_sub(2))
        .filter(|w| w[0].state[2] < PI && w[1].state[2] >= PI)
        .count() as f64
}

fn f_of(y: &[f64]) -> f64 {
    (1.0 - y[0] * y[0] - y[1] * y[1]).sqrt()
}

/// Central differences of `f` and `f'` along short forward/backward flights,
/// against the closed forms.
fn fd_defect(profile: &PeriodicProfile, config: &IntegratorConfig) -> Result<f64, String> {
    let params = profile.params;
    let fwd = ProfileSystem { params };
    let bwd = Reversed(ProfileSystem { params });
    let fprime = |y: &[f64]| -> Result<f64, String> {
        let s = ProfileState::from_slice(y);
        let k = geometry::theta_prime(&s, &params).map_err(|e| e.to_string())?;
        Ok(geometry::f_derivatives(&s, k)
            .map_err(|e| e.to_string())?
            .fprime)
    };
    let mut worst = 0.0f64;
    for t in 0..=FD_SAMPLES {
        let u = profile.period * t as f64 / FD_SAMPLES as f64;
        let s = profile.state_at(u).ok_or("outside profile")?;
        let y0 = [s.f1, s.f2, s.theta];
        let yp =
            ivp::integrate_endpoint(&fwd, 0.0, &y0, FD_STEP, config).map_err(|e| e.to_string())?;
        let ym =
            ivp::integrate_endpoint(&bwd, 0.0, &y0, FD_STEP, config).map_err(|e| e.to_string())?;
        let k = geometry::theta_prime(&s, &params).map_err(|e| e.to_string())?;
        let d = geometry::f_derivatives(&s, k).map_err(|e| e.to_string())?;
        let fd1 = (f_of(&yp) - f_of(&ym)) / (2.0 * FD_STEP);
        let fd2 = (fprime(&yp)? - fprime(&ym)?) / (2.0 * FD_STEP);
        worst = worst
            .max((fd1 - d.fprime).abs())
            .max((fd2 - d.fsecond).abs());
    }
    Ok(worst)
}

fn abel_defect(
    profile: &PeriodicProfile,
    kind: OperatorKind,
    rng: &mut StdRng,
    config: &IntegratorConfig,
) -> Result<f64, String> {
    let (lo, hi) = kind.default_range();
    let mut worst = 0.0f64;
    for _ in 0..ABEL_SAMPLES {
        let lambda = rng.gen_range(lo..hi);
        let mode = ModeIndex::new(rng.gen_range(0..3), rng.gen_range(0..3), &profile.params);
        let d = spectrum::discriminant(profile, &mode, kind, lambda, config)
            .map_err(|e| e.to_string())?;
        worst = worst.max(d.monodromy.abel_defect());
    }
    Ok(worst)
}

/// For `l = 1` the first-order coefficient collapses to
/// `(1 + f'^2)(-n (f1 cos θ + f2 sin θ) + sin θ / f2)`; largest deviation along the profile.
pub fn first_order_coefficient_defect(profile: &PeriodicProfile) -> Result<f64, DomainError> {
    let params: RotationParams = profile.params;
    let mode = ModeIndex::new(0, 0, &params);
    let n = params.n() as f64;
    let mut worst = 0.0f64;
    for node in profile.half_trajectory.nodes() {
        let s = ProfileState::from_slice(&node.state);
        let (p, _) = spectrum::coefficients(&mode, OperatorKind::Laplace, 0.0, &s, &params)?;
        let k = geometry::theta_prime(&s, &params)?;
        let d = geometry::f_derivatives(&s, k)?;
        let (sn, cs) = s.theta.sin_cos();
        let closed = d.one_plus_fp2 * (-n * (s.f1 * cs + s.f2 * sn) + sn / s.f2);
        worst = worst.max((p - closed).abs());
    }
    Ok(worst)
}

/// Runs every check on `profile`. Checks that cannot be evaluated report an
/// infinite value and therefore fail.
pub fn run_checks(profile: &PeriodicProfile, config: &IntegratorConfig) -> CheckSuite {
    let mut lines = Vec::new();
    let (trace, radius) = identity_checks(profile);
    lines.push(CheckLine::new("trace_identity", trace, TRACE_TOL));
    lines.push(CheckLine::new("treadmill_radius", radius, TREADMILL_TOL));
    lines.push(CheckLine::new(
        "minimality_residual",
        profile.minimality_residual,
        MINIMALITY_TOL,
    ));
    lines.push(CheckLine::new(
        "reflection_symmetry",
        or_inf(reflection_defect(profile, config)),
        REFLECTION_TOL,
    ));
    lines.push(CheckLine::new(
        "full_period_closure",
        or_inf(profile.full_period_closure(config)),
        CLOSURE_TOL,
    ));
    lines.push(CheckLine::new(
        "period_minimality",
        extra_crossings(profile),
        0.0,
    ));
    lines.push(CheckLine::new(
        "f_derivatives_fd",
        or_inf(fd_defect(profile, config)),
        FD_TOL,
    ));
    let mut rng = StdRng::seed_from_u64(SEED);
    for (name, kind) in [
        ("abel_identity_laplace", OperatorKind::Laplace),
        ("abel_identity_jacobi", OperatorKind::Jacobi),
    ] {
        lines.push(CheckLine::new(
            name,
            or_inf(abel_defect(profile, kind, &mut rng, config)),
            ABEL_TOL,
        ));
    }
    for which in AnalyticEigenfunction::ALL {
        let name = match which {
            AnalyticEigenfunction::Constant => "eigenfunction_constant",
            AnalyticEigenfunction::F1Mode00 => "eigenfunction_f1",
            AnalyticEigenfunction::FMode10 => "eigenfunction_f",
            AnalyticEigenfunction::F2Mode01 => "eigenfunction_f2",
        };
        lines.push(CheckLine::new(
            name,
            or_inf(spectrum::analytic_eigenfunction_residual(profile, which)),
            EIGENFUNCTION_TOL,
        ));
    }
    let mode00 = ModeIndex::new(0, 0, &profile.params);
    lines.push(CheckLine::new(
        "delta00_at_zero",
        or_inf(
            spectrum::discriminant(profile, &mode00, OperatorKind::Laplace, 0.0, config)
                .map(|d| d.delta0.abs()),
        ),
        DELTA_AT_ZERO_TOL,
    ));
    if profile.params.l() == 1 {
        lines.push(CheckLine::new(
            "first_order_coefficient",
            or_inf(first_order_coefficient_defect(profile)),
            COEFFICIENT_TOL,
        ));
    }
    CheckSuite { lines }
}

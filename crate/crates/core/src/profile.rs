//! Closed profile curves by shooting on the starting radius `a0`.
//!
//! Starting from `(f1, f2, θ) = (0, a0, 0)` the profile is symmetric under
//! `(f1, f2, θ)(t) -> (-f1, f2, -θ)(-t)`, so it closes after one period `T`
//! as soon as the half flight that ends at `θ = π` also ends on the `f2` axis
//! (`f1(T/2) = 0`). The shooting residual is therefore the signed `f1(T/2)`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{self, DomainError, ParamsError, ProfileState, RotationParams};
use crate::ivp::{self, Direction, IntegratorConfig, IvpError, OdeSystem, Trajectory};

/// Integration horizon for one half flight.
pub const HALF_FLIGHT_U_MAX: f64 = 50.0;
/// Target `|f1(T/2)|` for a converged profile.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Profiles whose `|f2(T/2) - a0|` exceeds this are flagged.
pub const F2_CLOSURE_FLAG: f64 = 1e-6;
const MAX_ITERATIONS: usize = 200;
const BRACKET_SAMPLES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("a0 = {a0} is outside (0, {limit})")]
    InvalidStart { a0: f64, limit: f64 },
    #[error("theta never reaches pi before u = {u_max} (a0 = {a0})")]
    EventNotFound { a0: f64, u_max: f64 },
    #[error("trajectory from a0 = {a0} left the domain: {source}")]
    DomainGuard { a0: f64, source: IvpError },
    #[error("a0 = {a0} is outside the oscillating regime: {reason}")]
    LargeResidual { a0: f64, reason: String },
    #[error("no sign change of the shooting residual on [{low}, {high}]")]
    NoSignChange { low: f64, high: f64 },
    #[error("shooting did not converge after {iterations} iterations (|f1(T/2)| = {residual})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Integration(IvpError),
}

/// The profile ODE `f1' = cos θ`, `f2' = sin θ`, `θ' = K(f1, f2, θ)`.
#[derive(Debug, Clone, Copy)]
pub struct ProfileSystem {
    pub params: RotationParams,
}

impl OdeSystem for ProfileSystem {
    fn dimension(&self) -> usize {
        3
    }

    fn rhs(&self, _u: f64, state: &[f64], deriv: &mut [f64]) -> Result<(), DomainError> {
        let s = ProfileState::from_slice(state);
        let k = geometry::theta_prime(&s, &self.params)?;
        let (sn, cs) = s.theta.sin_cos();
        deriv[0] = cs;
        deriv[1] = sn;
        deriv[2] = k;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HalfFlight {
    pub t_half: f64,
    pub end_state: ProfileState,
    pub trajectory: Trajectory,
}

fn check_start(params: &RotationParams, a0: f64) -> Result<(), ProfileError> {
    let limit = params.equilibrium_radius();
    if !(a0 > 0.0 && a0 < limit) {
        return Err(ProfileError::InvalidStart { a0, limit });
    }
    Ok(())
}

/// Flies from `(0, a0, 0)` to the first rising crossing of `θ = π`.
pub fn half_flight(
    params: &RotationParams,
    a0: f64,
    config: &IntegratorConfig,
) -> Result<HalfFlight, ProfileError> {
    check_start(params, a0)?;
    let system = ProfileSystem { params: *params };
    let hit = ivp::integrate_until(
        &system,
        0.0,
        &[0.0, a0, 0.0],
        |y| y[2] - PI,
        Direction::Rising,
        HALF_FLIGHT_U_MAX,
        config,
    )
    .map_err(|e| match e {
        IvpError::EventNotFound { u_max } => ProfileError::EventNotFound { a0, u_max },
        e @ (IvpError::DomainGuard { .. }
        | IvpError::NonFiniteDerivative { .. }
        | IvpError::StepUnderflow { .. }) => ProfileError::DomainGuard { a0, source: e },
        e => ProfileError::Integration(e),
    })?;
    Ok(HalfFlight {
        t_half: hit.u,
        end_state: ProfileState::from_slice(&hit.state),
        trajectory: hit.trajectory,
    })
}

/// Profile from a prescribed `a0`, without shooting: the half flight still ends at
/// `θ = π`, but `f1(T/2)` is whatever that start produces.
pub fn profile_at(
    params: &RotationParams,
    a0: f64,
    config: &IntegratorConfig,
) -> Result<PeriodicProfile, ProfileError> {
    let flight = half_flight(params, a0, config)?;
    finish(*params, a0, flight, 1)
}

/// Signed `f1(T/2)`; starts that never close a half loop map to [`ProfileError::LargeResidual`].
pub fn shooting_residual(
    params: &RotationParams,
    a0: f64,
    config: &IntegratorConfig,
) -> Result<f64, ProfileError> {
    match half_flight(params, a0, config) {
        Ok(flight) => Ok(flight.end_state.f1),
        Err(e @ (ProfileError::EventNotFound { .. } | ProfileError::DomainGuard { .. })) => {
            Err(ProfileError::LargeResidual {
                a0,
                reason: e.to_string(),
            })
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingProblem {
    pub params: RotationParams,
    pub bracket: (f64, f64),
    pub integrator: IntegratorConfig,
}

impl ShootingProblem {
    pub fn new(params: RotationParams, bracket: (f64, f64), integrator: IntegratorConfig) -> Self {
        Self {
            params,
            bracket,
            integrator,
        }
    }

    /// Uses [`find_bracket`] over the default search window.
    pub fn with_default_bracket(
        params: RotationParams,
        integrator: IntegratorConfig,
    ) -> Result<Self, ProfileError> {
        let bracket = find_bracket(&params, default_window(&params), &integrator)?;
        Ok(Self::new(params, bracket, integrator))
    }
}

/// Search window for `a0`, as fractions of the equilibrium radius `sqrt(l/n)`.
pub const DEFAULT_WINDOW: (f64, f64) = (0.05, 0.95);

pub fn default_window(params: &RotationParams) -> (f64, f64) {
    let eq = params.equilibrium_radius();
    (DEFAULT_WINDOW.0 * eq, DEFAULT_WINDOW.1 * eq)
}

/// Samples the residual on a uniform grid over `window` and returns the first
/// sub-interval whose endpoints give residuals of opposite sign.
///
/// Grid points outside the oscillating regime are skipped.
pub fn find_bracket(
    params: &RotationParams,
    window: (f64, f64),
    config: &IntegratorConfig,
) -> Result<(f64, f64), ProfileError> {
    let (lo, hi) = window;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=BRACKET_SAMPLES {
        let a = lo + (hi - lo) * i as f64 / BRACKET_SAMPLES as f64;
        let r = match shooting_residual(params, a, config) {
            Ok(r) => r,
            Err(ProfileError::LargeResidual { .. }) => {
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((pa, pr)) = prev {
            if pr == 0.0 {
                return Ok((pa, pa));
            }
            if (pr < 0.0) != (r < 0.0) || r == 0.0 {
                return Ok((pa, a));
            }
        }
        prev = Some((a, r));
    }
    Err(ProfileError::NoSignChange { low: lo, high: hi })
}

/// A closed profile curve and its closure diagnostics.
#[derive(Debug, Clone)]
pub struct PeriodicProfile {
    pub params: RotationParams,
    pub a0: f64,
    pub period: f64,
    pub half_trajectory: Trajectory,
    pub residual_f1: f64,
    pub residual_f2: f64,
    pub residual_theta: f64,
    /// Largest `|nH|` over the nodes of the half trajectory.
    pub minimality_residual: f64,
    /// Number of residual evaluations (half flights) the solve used.
    pub flights: usize,
}

impl PeriodicProfile {
    pub fn initial_state(&self) -> [f64; 3] {
        [0.0, self.a0, 0.0]
    }

    pub fn f2_closure_flagged(&self) -> bool {
        self.residual_f2 > F2_CLOSURE_FLAG
    }

    /// Integrates the profile ODE over one full period `[0, T]`.
    pub fn full_period(&self, config: &IntegratorConfig) -> Result<Trajectory, IvpError> {
        let system = ProfileSystem {
            params: self.params,
        };
        ivp::integrate(&system, 0.0, &self.initial_state(), self.period, config)
    }

    /// Largest deviation of the state after one full period from the initial state,
    /// with θ compared against `θ(0) + 2π`.
    pub fn full_period_closure(&self, config: &IntegratorConfig) -> Result<f64, IvpError> {
        let system = ProfileSystem {
            params: self.params,
        };
        let end =
            ivp::integrate_endpoint(&system, 0.0, &self.initial_state(), self.period, config)?;
        Ok(end[0]
            .abs()
            .max((end[1] - self.a0).abs())
            .max((end[2] - 2.0 * PI).abs()))
    }

    /// Profile state at any `u`, from the half trajectory via the reflection
    /// symmetry and `T`-periodicity (θ advances by 2π per period).
    pub fn state_at(&self, u: f64) -> Option<ProfileState> {
        if !u.is_finite() {
            return None;
        }
        let turns = (u / self.period).round();
        let local = (u - turns * self.period).clamp(-0.5 * self.period, 0.5 * self.period);
        let y = self.half_trajectory.eval(local.abs())?;
        let s = ProfileState::from_slice(&y);
        let s = if local < 0.0 {
            ProfileState::new(-s.f1, s.f2, -s.theta)
        } else {
            s
        };
        Some(ProfileState::new(s.f1, s.f2, s.theta + 2.0 * PI * turns))
    }
}

fn finish(
    params: RotationParams,
    a0: f64,
    flight: HalfFlight,
    flights: usize,
) -> Result<PeriodicProfile, ProfileError> {
    let mut minimality = 0.0f64;
    for node in flight.trajectory.nodes() {
        let s = ProfileState::from_slice(&node.state);
        let b = geometry::curvature_bundle_with(&s, &params, node.derivative[2]).map_err(|e| {
            ProfileError::DomainGuard {
                a0,
                source: IvpError::DomainGuard {
                    u: node.u,
                    source: e,
                },
            }
        })?;
        minimality = minimality.max(b.n_h.abs());
    }
    Ok(PeriodicProfile {
        params,
        a0,
        period: 2.0 * flight.t_half,
        residual_f1: flight.end_state.f1.abs(),
        residual_f2: (flight.end_state.f2 - a0).abs(),
        residual_theta: (flight.end_state.theta - PI).abs(),
        half_trajectory: flight.trajectory,
        minimality_residual: minimality,
        flights,
    })
}

/// Solves for the closing `a0` inside the problem's bracket.
///
/// Bisection shrinks the bracket first; safeguarded secant steps then drive
/// `|f1(T/2)|` below [`RESIDUAL_TOL`].
pub fn solve_periodic(problem: &ShootingProblem) -> Result<PeriodicProfile, ProfileError> {
    let params = problem.params;
    let cfg = &problem.integrator;
    let (mut lo, mut hi) = problem.bracket;
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut flights = 0usize;
    let mut eval = |a: f64| -> Result<f64, ProfileError> {
        flights += 1;
        shooting_residual(&params, a, cfg)
    };
    let mut rlo = eval(lo)?;
    if lo == hi {
        if rlo.abs() < RESIDUAL_TOL {
            let flight = half_flight(&params, lo, cfg)?;
            return finish(params, lo, flight, flights + 1);
        }
        return Err(ProfileError::NoSignChange { low: lo, high: hi });
    }
    let mut rhi = eval(hi)?;
    if (rlo < 0.0) == (rhi < 0.0) && rlo != 0.0 && rhi != 0.0 {
        return Err(ProfileError::NoSignChange { low: lo, high: hi });
    }

    let mut best = if rlo.abs() < rhi.abs() {
        (lo, rlo)
    } else {
        (hi, rhi)
    };
    let mut iterations = 0usize;
    while best.1.abs() >= RESIDUAL_TOL {
        if iterations >= MAX_ITERATIONS {
            return Err(ProfileError::NonConvergence {
                iterations,
                residual: best.1.abs(),
            });
        }
        iterations += 1;
        let width = hi - lo;
        let mid = 0.5 * (lo + hi);
        // secant from the bracket ends once it is narrow, bisection otherwise
        let candidate = if width < 1e-4 * hi.abs() {
            let s = lo - rlo * (hi - lo) / (rhi - rlo);
            if s > lo && s < hi {
                s
            } else {
                mid
            }
        } else {
            mid
        };
        let a = if candidate > lo && candidate < hi {
            candidate
        } else {
            mid
        };
        if !(a > lo && a < hi) {
            // bracket exhausted at machine precision
            break;
        }
        let r = eval(a)?;
        if r.abs() < best.1.abs() {
            best = (a, r);
        }
        if (r < 0.0) == (rlo < 0.0) {
            lo = a;
            rlo = r;
        } else {
            hi = a;
            rhi = r;
        }
    }
    if best.1.abs() >= RESIDUAL_TOL {
        return Err(ProfileError::NonConvergence {
            iterations,
            residual: best.1.abs(),
        });
    }
    let flight = half_flight(&params, best.0, cfg)?;
    finish(params, best.0, flight, flights + 1)
}

/// Outcome of a continuation sweep over `n` at fixed `l`.
#[derive(Debug, Clone)]
pub struct TableSweep {
    pub l: u32,
    pub profiles: Vec<PeriodicProfile>,
    pub failures: Vec<(u32, ProfileError)>,
}

/// Solves one profile per `n` in `n_range` (inclusive), continuing `a0` from the
/// previous `n` scaled by the ratio of equilibrium radii. Failing `n` are recorded
/// and skipped.
pub fn table_sweep(
    l: u32,
    n_range: (u32, u32),
    config: &IntegratorConfig,
) -> Result<TableSweep, ProfileError> {
    let (n_from, n_to) = n_range;
    if n_from < l + 2 || n_to < n_from || n_to > 200 {
        return Err(ProfileError::Params(ParamsError(format!(
            "n range [{n_from}, {n_to}] invalid for l = {l}"
        ))));
    }
    let mut profiles: Vec<PeriodicProfile> = Vec::new();
    let mut failures = Vec::new();
    for n in n_from..=n_to {
        let params = RotationParams::from_n_l(n, l)?;
        let guess = profiles
            .last()
            .map(|p| p.a0 / p.params.equilibrium_radius() * params.equilibrium_radius());
        match solve_continued(params, guess, config) {
            Ok(p) => profiles.push(p),
            Err(e) => failures.push((n, e)),
        }
    }
    Ok(TableSweep {
        l,
        profiles,
        failures,
    })
}

fn solve_continued(
    params: RotationParams,
    guess: Option<f64>,
    config: &IntegratorConfig,
) -> Result<PeriodicProfile, ProfileError> {
    if let Some(center) = guess {
        let limit = params.equilibrium_radius();
        for rel in [0.02, 0.05, 0.1] {
            let lo = center * (1.0 - rel);
            let hi = (center * (1.0 + rel)).min(0.999 * limit);
            let bracketed = match (
                shooting_residual(&params, lo, config),
                shooting_residual(&params, hi, config),
            ) {
                (Ok(a), Ok(b)) => (a < 0.0) != (b < 0.0),
                _ => false,
            };
            if bracketed {
                if let Ok(p) = solve_periodic(&ShootingProblem::new(params, (lo, hi), *config)) {
                    return Ok(p);
                }
            }
        }
    }
    solve_periodic(&ShootingProblem::with_default_bracket(params, *config)?)
}

//! Laplace and Jacobi spectra of the hypersurface generated by a closed profile.
//!
//! Separation of variables reduces both operators to a family of periodic
//! second-order ODEs indexed by a mode `(i, j)`: the spherical-harmonic levels
//! on `S^k` and `S^l`. In normalized form each reads
//!
//! ```text
//! z'' + P(u) z' + Q(u; λ) z = 0,
//! ```
//!
//! and `λ` is an eigenvalue exactly when this equation has a nonzero `T`-periodic
//! solution, i.e. when the Floquet discriminant
//! `δ0(λ) = 1 + W(T) - (z1(T) + z2'(T)) = det(M - I)` vanishes, `M` being the
//! monodromy matrix of the canonical pair `(z1, z2)`.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{self, DomainError, ProfileState, RotationParams};
use crate::ivp::{self, IntegratorConfig, IvpError, OdeSystem};
use crate::profile::PeriodicProfile;

/// Default λ grid spacing for discriminant scans.
pub const DEFAULT_STEP: f64 = 0.025;
/// Bisection stops once the bracket is narrower than this.
pub const ROOT_WIDTH: f64 = 1e-7;
/// Eigenvalues from different modes closer than this are grouped together.
pub const GROUP_TOL: f64 = 1e-3;
/// `|λ| <= ZERO_BAND` counts towards the nullity.
pub const ZERO_BAND: f64 = 1e-4;
/// Relative singular-value threshold deciding the periodic-solution count at a root.
pub const KERNEL_REL_TOL: f64 = 1e-5;
/// A grid-local minimum of `|δ0|` below this is refined as a possible tangential root.
pub const TANGENT_CANDIDATE: f64 = 1e-3;
/// A tangential root is accepted when `|δ0|` can be pushed below this.
pub const TANGENT_ACCEPT: f64 = 1e-8;
/// Grid-local minima of `|δ0|` below this trigger a finer local grid.
pub const REFINE_TRIGGER: f64 = 0.05;
/// Finer local grids use `step / REFINE_FACTOR`.
pub const REFINE_FACTOR: usize = 5;
/// Jacobi scans default to this range.
pub const JACOBI_DEFAULT_RANGE: (f64, f64) = (-60.0, 1.0);
/// Laplace scans default to this range.
pub const LAPLACE_DEFAULT_RANGE: (f64, f64) = (0.0, 12.0);
const DEDUP_TOL: f64 = 1e-6;
const WITNESS_SAMPLES: usize = 10;
const MAX_DIAGONAL: u32 = 64;
// solutions are rescaled at segment boundaries once they exceed this
const RESCALE_THRESHOLD: f64 = 1e64;
const SEGMENTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("integration failed for mode ({i},{j}) at lambda = {lambda}: {source}")]
    Integration {
        i: u32,
        j: u32,
        lambda: f64,
        source: IvpError,
    },
    #[error("invalid scan settings: {0}")]
    InvalidSettings(String),
}

/// Eigenvalue `level (dim + level - 1)` of the Laplacian on the unit `S^dim`, with its multiplicity.
pub fn sphere_eigen(level: u32, dim: u32) -> (f64, u64) {
    let value = level as f64 * (dim as f64 + level as f64 - 1.0);
    let multiplicity = match level {
        0 => 1,
        1 => dim as u64 + 1,
        _ => binomial(dim + level, level) - binomial(dim + level - 2, level - 2),
    };
    (value, multiplicity)
}

fn binomial(n: u32, k: u32) -> u64 {
    let k = k.min(n - k) as u128;
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc * (n as u128 - t) / (t + 1);
    }
    acc as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Laplace,
    Jacobi,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Laplace => "laplace",
            OperatorKind::Jacobi => "jacobi",
        }
    }

    pub fn default_range(&self) -> (f64, f64) {
        match self {
            OperatorKind::Laplace => LAPLACE_DEFAULT_RANGE,
            OperatorKind::Jacobi => JACOBI_DEFAULT_RANGE,
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "laplace" => Ok(OperatorKind::Laplace),
            "jacobi" => Ok(OperatorKind::Jacobi),
            other => Err(format!(
                "unknown operator `{other}` (expected laplace or jacobi)"
            )),
        }
    }
}

/// A separated mode: harmonic level `i` on `S^k` and `j` on `S^l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIndex {
    pub i: u32,
    pub j: u32,
    pub alpha: f64,
    pub beta: f64,
    pub mult_k: u64,
    pub mult_l: u64,
}

impl ModeIndex {
    pub fn new(i: u32, j: u32, params: &RotationParams) -> Self {
        let (alpha, mult_k) = sphere_eigen(i, params.k());
        let (beta, mult_l) = sphere_eigen(j, params.l());
        Self {
            i,
            j,
            alpha,
            beta,
            mult_k,
            mult_l,
        }
    }

    /// Number of eigenfunctions on the hypersurface per periodic solution of this mode.
    pub fn harmonic_multiplicity(&self) -> u64 {
        self.mult_k * self.mult_l
    }

    /// Componentwise order: `self` lies at or above `other` in both indices.
    pub fn dominates(&self, other: &ModeIndex) -> bool {
        self.i >= other.i && self.j >= other.j
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// `(P, Q)` of the normalized mode equation `z'' + P z' + Q z = 0` at a profile state,
/// with `θ'` from the minimality equation.
pub fn coefficients(
    mode: &ModeIndex,
    kind: OperatorKind,
    lambda: f64,
    state: &ProfileState,
    params: &RotationParams,
) -> Result<(f64, f64), DomainError> {
    let k_curv = geometry::theta_prime(state, params)?;
    coefficients_with(mode, kind, lambda, state, params, k_curv)
}

fn coefficients_with(
    mode: &ModeIndex,
    kind: OperatorKind,
    lambda: f64,
    state: &ProfileState,
    params: &RotationParams,
    k_curv: f64,
) -> Result<(f64, f64), DomainError> {
    let d = geometry::f_derivatives(state, k_curv)?;
    let f = (1.0 - state.f1 * state.f1 - state.f2 * state.f2).sqrt();
    let p = params.k() as f64 * d.fprime / f + params.l() as f64 * state.theta.sin() / state.f2
        - d.fprime * d.fsecond / d.one_plus_fp2;
    let mut c = lambda - mode.alpha / (f * f) - mode.beta / (state.f2 * state.f2);
    if kind == OperatorKind::Jacobi {
        let b = geometry::curvature_bundle_with(state, params, k_curv)?;
        c += params.n() as f64 + b.shape_norm_sq;
    }
    Ok((p, d.one_plus_fp2 * c))
}

/// Profile ODE coupled with the canonical solution pair of one mode equation:
/// state `(f1, f2, θ, z1, z1', z2, z2', ∫P)`.
#[derive(Debug, Clone, Copy)]
pub struct ExtendedSystem {
    pub params: RotationParams,
    pub mode: ModeIndex,
    pub kind: OperatorKind,
    pub lambda: f64,
}

impl OdeSystem for ExtendedSystem {
    fn dimension(&self) -> usize {
        8
    }

    fn rhs(&self, _u: f64, y: &[f64], d: &mut [f64]) -> Result<(), DomainError> {
        let s = ProfileState::from_slice(y);
        let k_curv = geometry::theta_prime(&s, &self.params)?;
        let (p, q) =
            coefficients_with(&self.mode, self.kind, self.lambda, &s, &self.params, k_curv)?;
        let (sn, cs) = s.theta.sin_cos();
        d[0] = cs;
        d[1] = sn;
        d[2] = k_curv;
        d[3] = y[4];
        d[4] = -p * y[4] - q * y[3];
        d[5] = y[6];
        d[6] = -p * y[6] - q * y[5];
        d[7] = p;
        Ok(())
    }
}

/// Period map data of the canonical pair `z1 (1, 0)`, `z2 (0, 1)`.
///
/// When the solutions had to be rescaled during the flight, the four entries
/// are the true values times `exp(-log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyMatrix {
    pub z1_t: f64,
    pub z2_t: f64,
    pub dz1_t: f64,
    pub dz2_t: f64,
    pub wronskian_t: f64,
    /// `exp(-∫_0^T P du)`, the Wronskian Abel's identity predicts (unscaled).
    pub abel_prediction: f64,
    pub log_scale: f64,
}

impl MonodromyMatrix {
    pub fn trace(&self) -> f64 {
        self.z1_t + self.dz2_t
    }

    /// `|W(T) - exp(-∫P)|` relative to `max(1, |z1 z2'| + |z2 z1'|)`.
    ///
    /// `W(T)` is a difference of two products; once the solutions grow, its
    /// rounding error scales with those products, not with `W` itself. For
    /// bounded solutions this is the absolute defect.
    pub fn abel_defect(&self) -> f64 {
        let scaled_prediction = self.abel_prediction * (-2.0 * self.log_scale).exp();
        let products = (self.z1_t * self.dz2_t).abs() + (self.z2_t * self.dz1_t).abs();
        (self.wronskian_t - scaled_prediction).abs()
            / products.max(scaled_prediction.abs()).max(1.0)
    }

    /// Singular values of `M - I`, largest first (scaled entries when `log_scale > 0`).
    pub fn shifted_singular_values(&self) -> (f64, f64) {
        let shift = (-self.log_scale).exp();
        singular_values_2x2(self.z1_t - shift, self.z2_t, self.dz1_t, self.dz2_t - shift)
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.z1_t.powi(2) + self.z2_t.powi(2) + self.dz1_t.powi(2) + self.dz2_t.powi(2)).sqrt()
    }

    /// Dimension of the space of `T`-periodic solutions, judged from `M - I`.
    pub fn kernel_dim(&self) -> u32 {
        let (smax, smin) = self.shifted_singular_values();
        let thr = KERNEL_REL_TOL * self.frobenius_norm().max(1.0);
        if smax < thr {
            2
        } else if smin < thr {
            1
        } else {
            0
        }
    }
}

fn singular_values_2x2(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let s1 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (s1 * s1 - 4.0 * det * det).max(0.0).sqrt();
    let big = ((s1 + disc) / 2.0).sqrt();
    let small = if big > 0.0 { det.abs() / big } else { 0.0 };
    (big, small)
}

/// `δ0(λ)` and the monodromy data behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discriminant {
    pub lambda: f64,
    /// `δ0` in the scale of `monodromy` (true value times `exp(-2 log_scale)`).
    pub delta0: f64,
    pub monodromy: MonodromyMatrix,
}

/// Evaluates the Floquet discriminant of mode `mode` at `lambda`.
///
/// The profile and the canonical pair are integrated together over `[0, T]`
/// from `(0, a0, 0, 1, 0, 0, 1, 0)`.
pub fn discriminant(
    profile: &PeriodicProfile,
    mode: &ModeIndex,
    kind: OperatorKind,
    lambda: f64,
    config: &IntegratorConfig,
) -> Result<Discriminant, SpectrumError> {
    let system = ExtendedSystem {
        params: profile.params,
        mode: *mode,
        kind,
        lambda,
    };
    let wrap = |source: IvpError| SpectrumError::Integration {
        i: mode.i,
        j: mode.j,
        lambda,
        source,
    };
    let mut y = vec![0.0, profile.a0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0];
    let mut log_scale = 0.0f64;
    let t = profile.period;
    for seg in 0..SEGMENTS {
        let u0 = t * seg as f64 / SEGMENTS as f64;
        let u1 = if seg + 1 == SEGMENTS {
            t
        } else {
            t * (seg + 1) as f64 / SEGMENTS as f64
        };
        y = ivp::integrate_endpoint(&system, u0, &y, u1, config).map_err(wrap)?;
        let big = y[3..7].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if big > RESCALE_THRESHOLD {
            for v in &mut y[3..7] {
                *v /= big;
            }
            log_scale += big.ln();
        }
    }
    let (z1, dz1, z2, dz2) = (y[3], y[4], y[5], y[6]);
    let wronskian_t = z1 * dz2 - z2 * dz1;
    let monodromy = MonodromyMatrix {
        z1_t: z1,
        z2_t: z2,
        dz1_t: dz1,
        dz2_t: dz2,
        wronskian_t,
        abel_prediction: (-y[7]).exp(),
        log_scale,
    };
    let delta0 = if log_scale == 0.0 {
        1.0 + wronskian_t - (z1 + dz2)
    } else {
        (-2.0 * log_scale).exp() + wronskian_t - (z1 + dz2) * (-log_scale).exp()
    };
    Ok(Discriminant {
        lambda,
        delta0,
        monodromy,
    })
}

/// One eigenvalue of one mode equation and what it contributes on the hypersurface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenRecord {
    pub lambda: f64,
    pub mode: ModeIndex,
    /// Periodic solutions at this root (1 or 2).
    pub kernel_dim: u32,
    pub ode_multiplicity: u32,
    pub total_multiplicity: u64,
    /// Found as a touching zero of `δ0` rather than a sign change.
    pub tangential: bool,
    pub residual: f64,
}

/// A grid feature that looked like a root but could not be confirmed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub lambda: f64,
    pub mode: ModeIndex,
    pub abs_delta0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeScan {
    pub mode: ModeIndex,
    pub kind: OperatorKind,
    pub range: (f64, f64),
    pub step: f64,
    pub samples: Vec<Discriminant>,
    pub roots: Vec<EigenRecord>,
    pub candidates: Vec<Candidate>,
    /// Grid intervals that were resampled at `step / REFINE_FACTOR`.
    pub refined_intervals: usize,
}

impl ModeScan {
    pub fn first_root(&self) -> Option<f64> {
        self.roots.first().map(|r| r.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub range: (f64, f64),
    pub step: f64,
    pub integrator: IntegratorConfig,
}

impl ScanSettings {
    pub fn new(range: (f64, f64), step: f64, integrator: IntegratorConfig) -> Self {
        Self {
            range,
            step,
            integrator,
        }
    }

    pub fn for_operator(kind: OperatorKind) -> Self {
        Self::new(
            kind.default_range(),
            DEFAULT_STEP,
            IntegratorConfig::default(),
        )
    }

    fn validate(&self) -> Result<(), SpectrumError> {
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SpectrumError::InvalidSettings(format!(
                "bad range [{lo}, {hi}]"
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(SpectrumError::InvalidSettings(format!(
                "bad step {}",
                self.step
            )));
        }
        self.integrator
            .validate()
            .map_err(|e| SpectrumError::InvalidSettings(e.to_string()))
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step - 1e-9).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| if i == n { hi } else { lo + step * i as f64 })
        .collect()
}

fn sample_all(
    profile: &PeriodicProfile,
    mode: &ModeIndex,
    kind: OperatorKind,
    lambdas: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<Discriminant>, SpectrumError> {
    lambdas
        .par_iter()
        .map(|&l| discriminant(profile, mode, kind, l, config))
        .collect()
}

fn sign_change(a: f64, b: f64) -> bool {
    (a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0)
}

type Evaluator<'a> = dyn Fn(f64) -> Result<Discriminant, SpectrumError> + Sync + 'a;

/// Root finding on one mode's discriminant, independent of where `δ0` comes from.
struct Scanner<'a> {
    mode: ModeIndex,
    eval: &'a Evaluator<'a>,
}

impl Scanner<'_> {
    fn eval(&self, lambda: f64) -> Result<Discriminant, SpectrumError> {
        (self.eval)(lambda)
    }

    fn sample(&self, lambdas: &[f64]) -> Result<Vec<Discriminant>, SpectrumError> {
        lambdas.par_iter().map(|&l| self.eval(l)).collect()
    }

    fn record(&self, d: &Discriminant, tangential: bool) -> EigenRecord {
        let kernel_dim = d.monodromy.kernel_dim().max(1);
        EigenRecord {
            lambda: d.lambda,
            mode: self.mode,
            kernel_dim,
            ode_multiplicity: kernel_dim,
            total_multiplicity: kernel_dim as u64 * self.mode.harmonic_multiplicity(),
            tangential,
            residual: d.delta0.abs(),
        }
    }

    fn bisect(&self, a: &Discriminant, b: &Discriminant) -> Result<EigenRecord, SpectrumError> {
        if a.delta0 == 0.0 {
            return Ok(self.record(a, false));
        }
        if b.delta0 == 0.0 {
            return Ok(self.record(b, false));
        }
        let (mut lo, mut hi) = (*a, *b);
        while hi.lambda - lo.lambda >= ROOT_WIDTH {
            let mid = self.eval(0.5 * (lo.lambda + hi.lambda))?;
            if mid.delta0 == 0.0 {
                return Ok(self.record(&mid, false));
            }
            if (mid.delta0 < 0.0) == (lo.delta0 < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mid = self.eval(0.5 * (lo.lambda + hi.lambda))?;
        Ok(self.record(&mid, false))
    }

    /// Golden-section minimization of `|δ0|` on `[lo, hi]`.
    fn golden(&self, lo: f64, hi: f64) -> Result<Discriminant, SpectrumError> {
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let mut fc = self.eval(c)?;
        let mut fd = self.eval(d)?;
        let mut best = if fc.delta0.abs() < fd.delta0.abs() {
            fc
        } else {
            fd
        };
        while b - a > ROOT_WIDTH * 0.1 {
            if fc.delta0.abs() < fd.delta0.abs() {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = self.eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = self.eval(d)?;
            }
            for cand in [fc, fd] {
                if cand.delta0.abs() < best.delta0.abs() {
                    best = cand;
                }
            }
            if best.delta0.abs() < TANGENT_ACCEPT * 1e-3 {
                break;
            }
        }
        Ok(best)
    }

    /// Tangential root near the grid minimum: golden section, then accept or flag.
    fn touch(
        &self,
        lo: f64,
        hi: f64,
        at_grid: &Discriminant,
        roots: &mut Vec<EigenRecord>,
        candidates: &mut Vec<Candidate>,
    ) -> Result<(), SpectrumError> {
        let mut best = self.golden(lo, hi)?;
        if at_grid.delta0.abs() < best.delta0.abs() {
            best = *at_grid;
        }
        if best.delta0.abs() < TANGENT_ACCEPT {
            roots.push(self.record(&best, true));
        } else {
            candidates.push(Candidate {
                lambda: best.lambda,
                mode: self.mode,
                abs_delta0: best.delta0.abs(),
            });
        }
        Ok(())
    }

    /// Roots from sign changes on a sampled grid, plus tangential candidates at local minima.
    fn roots_on(
        &self,
        samples: &[Discriminant],
        step: f64,
        allow_refine: bool,
        roots: &mut Vec<EigenRecord>,
        candidates: &mut Vec<Candidate>,
        refined: &mut usize,
    ) -> Result<(), SpectrumError> {
        let n = samples.len();
        let brackets: Vec<(Discriminant, Discriminant)> = samples
            .windows(2)
            .filter(|w| sign_change(w[0].delta0, w[1].delta0))
            .map(|w| (w[0], w[1]))
            .collect();
        let found: Vec<EigenRecord> = brackets
            .par_iter()
            .map(|(a, b)| self.bisect(a, b))
            .collect::<Result<_, _>>()?;
        roots.extend(found);

        let abs = |i: usize| samples[i].delta0.abs();
        let changes = |i: usize| -> bool {
            // sign change on an interval adjacent to sample i
            (i > 0 && sign_change(samples[i - 1].delta0, samples[i].delta0))
                || (i + 1 < n && sign_change(samples[i].delta0, samples[i + 1].delta0))
        };
        for i in 0..n {
            if changes(i) {
                continue;
            }
            let left_ok = i == 0 || abs(i) <= abs(i - 1);
            let right_ok = i + 1 == n || abs(i) <= abs(i + 1);
            if !(left_ok && right_ok) || n < 2 {
                continue;
            }
            let lo = samples[i.saturating_sub(1)].lambda;
            let hi = samples[(i + 1).min(n - 1)].lambda;
            let interior = i > 0 && i + 1 < n;
            if allow_refine && interior && abs(i) < REFINE_TRIGGER {
                *refined += 1;
                let fine = self.resample(lo, hi, step)?;
                self.roots_on(
                    &fine,
                    step / REFINE_FACTOR as f64,
                    false,
                    roots,
                    candidates,
                    refined,
                )?;
            } else if abs(i) < TANGENT_CANDIDATE {
                self.touch(lo, hi, &samples[i], roots, candidates)?;
            }
        }

        if allow_refine {
            // a jump far larger than its neighbours can hide two crossings
            for i in 1..n.saturating_sub(2) {
                let d = samples[i + 1].delta0 - samples[i].delta0;
                let left = samples[i].delta0 - samples[i - 1].delta0;
                let right = samples[i + 2].delta0 - samples[i + 1].delta0;
                if sign_change(samples[i].delta0, samples[i + 1].delta0) {
                    continue;
                }
                if d.abs() > 10.0 * left.abs().max(right.abs()) && d.abs() > 1e-12 {
                    *refined += 1;
                    let fine = self.resample(samples[i].lambda, samples[i + 1].lambda, step)?;
                    self.roots_on(
                        &fine,
                        step / REFINE_FACTOR as f64,
                        false,
                        roots,
                        candidates,
                        refined,
                    )?;
                }
            }
        }
        Ok(())
    }

    fn resample(&self, lo: f64, hi: f64, step: f64) -> Result<Vec<Discriminant>, SpectrumError> {
        self.sample(&grid(lo, hi, step / REFINE_FACTOR as f64))
    }
}

fn dedup_roots(mut roots: Vec<EigenRecord>) -> Vec<EigenRecord> {
    roots.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap_or(Ordering::Equal));
    let mut out: Vec<EigenRecord> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last_mut() {
            Some(prev) if (r.lambda - prev.lambda).abs() < DEDUP_TOL => {
                // two hits on the same root: keep the better resolved one, but never lose a
                // second periodic solution
                let kernel_dim = prev.kernel_dim.max(r.kernel_dim);
                if r.residual < prev.residual {
                    *prev = r;
                }
                prev.kernel_dim = kernel_dim;
                prev.ode_multiplicity = kernel_dim;
                prev.total_multiplicity = kernel_dim as u64 * prev.mode.harmonic_multiplicity();
            }
            _ => out.push(r),
        }
    }
    out
}

/// Samples `δ0` for one mode on a uniform grid over the settings' range and
/// resolves every root.
///
/// Sign changes are bisected to [`ROOT_WIDTH`]. Near-zero local minima of
/// `|δ0|` without a sign change are resampled on a finer grid and, if still
/// unresolved, minimized by golden section; a minimum below [`TANGENT_ACCEPT`]
/// becomes a tangential root, anything else is kept as a flagged candidate.
pub fn scan_and_refine(
    profile: &PeriodicProfile,
    mode: &ModeIndex,
    kind: OperatorKind,
    settings: &ScanSettings,
) -> Result<ModeScan, SpectrumError> {
    settings.validate()?;
    let eval = |lambda: f64| discriminant(profile, mode, kind, lambda, &settings.integrator);
    let scan = scan_with(*mode, &eval, settings.range, settings.step)?;
    Ok(ModeScan {
        kind,
        range: settings.range,
        ..scan
    })
}

/// The scanning procedure of [`scan_and_refine`] for any discriminant source.
fn scan_with(
    mode: ModeIndex,
    eval: &Evaluator<'_>,
    range: (f64, f64),
    step: f64,
) -> Result<ModeScan, SpectrumError> {
    let scanner = Scanner { mode, eval };
    let samples = scanner.sample(&grid(range.0, range.1, step))?;
    let mut roots = Vec::new();
    let mut candidates = Vec::new();
    let mut refined = 0;
    scanner.roots_on(
        &samples,
        step,
        true,
        &mut roots,
        &mut candidates,
        &mut refined,
    )?;
    let roots = dedup_roots(roots);
    candidates.retain(|c| {
        roots
            .iter()
            .all(|r| (r.lambda - c.lambda).abs() > GROUP_TOL)
    });
    candidates.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap_or(Ordering::Equal));
    Ok(ModeScan {
        mode,
        kind: OperatorKind::Laplace,
        range,
        step,
        samples,
        roots,
        candidates,
        refined_intervals: refined,
    })
}

/// Eigenvalues from all modes that agree within [`GROUP_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroup {
    pub lambda: f64,
    pub members: Vec<EigenRecord>,
    pub multiplicity: u64,
}

/// Evidence that a mode has no eigenvalue in the scanned range.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneWitness {
    pub mode: ModeIndex,
    /// `(λ, δ0)` at evenly spaced points of the range, ceiling included.
    pub samples: Vec<(f64, f64)>,
}

impl PruneWitness {
    /// Below the first periodic eigenvalue `δ0 < 0`; a witness is consistent when every sample is.
    pub fn consistent(&self) -> bool {
        self.samples.iter().all(|&(_, d)| d < 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub operator: OperatorKind,
    pub params: RotationParams,
    pub a0: f64,
    pub period: f64,
    pub settings: ScanSettings,
    pub groups: Vec<EigenGroup>,
    pub scans: Vec<ModeScan>,
    /// Modes never scanned because they dominate a pruned mode.
    pub skipped: Vec<ModeIndex>,
    pub pruned: Vec<PruneWitness>,
    pub candidates: Vec<Candidate>,
    /// Jacobi only.
    pub stability_index: Option<u64>,
    /// Jacobi only.
    pub nullity: Option<u64>,
}

impl SpectrumReport {
    pub fn records(&self) -> impl Iterator<Item = &EigenRecord> {
        self.groups.iter().flat_map(|g| g.members.iter())
    }

    pub fn scan(&self, i: u32, j: u32) -> Option<&ModeScan> {
        self.scans.iter().find(|s| s.mode.i == i && s.mode.j == j)
    }

    /// Counts every record strictly below `ZERO_BAND`.
    pub fn count_below_zero_band(&self) -> u64 {
        self.records()
            .filter(|r| r.lambda <= ZERO_BAND)
            .map(|r| r.total_multiplicity)
            .sum()
    }

    /// Checks that first roots never decrease when both mode indices grow.
    /// Returns the offending pairs.
    pub fn first_root_violations(&self) -> Vec<(ModeIndex, ModeIndex)> {
        let firsts: Vec<(ModeIndex, f64)> = self
            .scans
            .iter()
            .filter_map(|s| s.first_root().map(|r| (s.mode, r)))
            .collect();
        let mut bad = Vec::new();
        for (m, r) in &firsts {
            for (m2, r2) in &firsts {
                if m2 != m && m2.dominates(m) && *r2 < *r - GROUP_TOL {
                    bad.push((*m, *m2));
                }
            }
        }
        bad
    }
}

/// Groups records across modes; members within a group lie within [`GROUP_TOL`] of its lowest one.
pub fn group_records(mut records: Vec<EigenRecord>) -> Vec<EigenGroup> {
    records.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .unwrap_or(Ordering::Equal)
            .then(a.mode.i.cmp(&b.mode.i))
            .then(a.mode.j.cmp(&b.mode.j))
    });
    let mut groups: Vec<EigenGroup> = Vec::new();
    for r in records {
        match groups.last_mut() {
            Some(g) if r.lambda - g.members[0].lambda < GROUP_TOL => g.members.push(r),
            _ => groups.push(EigenGroup {
                lambda: r.lambda,
                members: vec![r],
                multiplicity: 0,
            }),
        }
    }
    for g in &mut groups {
        g.multiplicity = g.members.iter().map(|m| m.total_multiplicity).sum();
        g.lambda = g.members.iter().map(|m| m.lambda).sum::<f64>() / g.members.len() as f64;
        g.members.sort_by_key(|m| (m.mode.i, m.mode.j));
    }
    groups
}

fn witness(
    profile: &PeriodicProfile,
    mode: &ModeIndex,
    kind: OperatorKind,
    settings: &ScanSettings,
) -> Result<PruneWitness, SpectrumError> {
    let (lo, hi) = settings.range;
    let lambdas: Vec<f64> = (1..=WITNESS_SAMPLES)
        .map(|t| lo + (hi - lo) * t as f64 / WITNESS_SAMPLES as f64)
        .collect();
    let samples = sample_all(profile, mode, kind, &lambdas, &settings.integrator)?
        .into_iter()
        .map(|d| (d.lambda, d.delta0))
        .collect();
    Ok(PruneWitness {
        mode: *mode,
        samples,
    })
}

/// Full spectrum of `kind` inside `settings.range`.
///
/// Modes are visited by increasing `i + j`. A mode with no root in range is
/// pruned, together with every mode dominating it componentwise: the mode
/// operators increase with both indices, so their first eigenvalues do too.
/// Enumeration stops at the first diagonal with nothing left to scan.
pub fn assemble_spectrum(
    profile: &PeriodicProfile,
    kind: OperatorKind,
    settings: &ScanSettings,
) -> Result<SpectrumReport, SpectrumError> {
    settings.validate()?;
    let params = profile.params;
    let mut scans: Vec<ModeScan> = Vec::new();
    let mut pruned: Vec<PruneWitness> = Vec::new();
    let mut skipped: Vec<ModeIndex> = Vec::new();
    for diag in 0..=MAX_DIAGONAL {
        let mut to_scan = Vec::new();
        for i in (0..=diag).rev() {
            let mode = ModeIndex::new(i, diag - i, &params);
            if pruned.iter().any(|w| mode.dominates(&w.mode)) {
                skipped.push(mode);
            } else {
                to_scan.push(mode);
            }
        }
        if to_scan.is_empty() {
            break;
        }
        let results: Vec<ModeScan> = to_scan
            .par_iter()
            .map(|m| scan_and_refine(profile, m, kind, settings))
            .collect::<Result<_, _>>()?;
        for scan in results {
            if scan.roots.is_empty() {
                pruned.push(witness(profile, &scan.mode, kind, settings)?);
            }
            scans.push(scan);
        }
    }
    let records: Vec<EigenRecord> = scans.iter().flat_map(|s| s.roots.iter().copied()).collect();
    let candidates: Vec<Candidate> = scans
        .iter()
        .flat_map(|s| s.candidates.iter().copied())
        .collect();
    let groups = group_records(records);
    let (stability_index, nullity) = match kind {
        OperatorKind::Jacobi => {
            let index = groups
                .iter()
                .flat_map(|g| g.members.iter())
                .filter(|r| r.lambda < -ZERO_BAND)
                .map(|r| r.total_multiplicity)
                .sum();
            let null = groups
                .iter()
                .flat_map(|g| g.members.iter())
                .filter(|r| r.lambda.abs() <= ZERO_BAND)
                .map(|r| r.total_multiplicity)
                .sum();
            (Some(index), Some(null))
        }
        OperatorKind::Laplace => (None, None),
    };
    Ok(SpectrumReport {
        operator: kind,
        params,
        a0: profile.a0,
        period: profile.period,
        settings: *settings,
        groups,
        scans,
        skipped,
        pruned,
        candidates,
        stability_index,
        nullity,
    })
}

/// Outcome of re-scanning a pruned mode on a finer grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditResult {
    pub mode: ModeIndex,
    pub step: f64,
    /// Roots at or below the range ceiling; empty when the pruning holds.
    pub roots: Vec<EigenRecord>,
    pub witness_consistent: bool,
}

impl AuditResult {
    pub fn passed(&self) -> bool {
        self.roots.is_empty() && self.witness_consistent
    }
}

/// Re-scans every pruned frontier mode of `report` at `step / REFINE_FACTOR`.
pub fn audit_pruned(
    profile: &PeriodicProfile,
    report: &SpectrumReport,
) -> Result<Vec<AuditResult>, SpectrumError> {
    let fine = ScanSettings {
        step: report.settings.step / REFINE_FACTOR as f64,
        ..report.settings
    };
    report
        .pruned
        .par_iter()
        .map(|w| {
            let scan = scan_and_refine(profile, &w.mode, report.operator, &fine)?;
            Ok(AuditResult {
                mode: w.mode,
                step: fine.step,
                roots: scan
                    .roots
                    .into_iter()
                    .filter(|r| r.lambda <= fine.range.1)
                    .collect(),
                witness_consistent: w.consistent(),
            })
        })
        .collect()
}

/// Closed-form eigenfunctions of the mode equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticEigenfunction {
    /// `1` in mode (0,0) at λ = 0.
    Constant,
    /// `f1` in mode (0,0) at λ = n.
    F1Mode00,
    /// `f` in mode (1,0) at λ = n.
    FMode10,
    /// `f2` in mode (0,1) at λ = n.
    F2Mode01,
}

impl AnalyticEigenfunction {
    pub const ALL: [AnalyticEigenfunction; 4] = [
        AnalyticEigenfunction::Constant,
        AnalyticEigenfunction::F1Mode00,
        AnalyticEigenfunction::FMode10,
        AnalyticEigenfunction::F2Mode01,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticEigenfunction::Constant => "constant",
            AnalyticEigenfunction::F1Mode00 => "f1_mode00",
            AnalyticEigenfunction::FMode10 => "f_mode10",
            AnalyticEigenfunction::F2Mode01 => "f2_mode01",
        }
    }

    pub fn mode_levels(&self) -> (u32, u32) {
        match self {
            AnalyticEigenfunction::Constant | AnalyticEigenfunction::F1Mode00 => (0, 0),
            AnalyticEigenfunction::FMode10 => (1, 0),
            AnalyticEigenfunction::F2Mode01 => (0, 1),
        }
    }

    pub fn eigenvalue(&self, params: &RotationParams) -> f64 {
        match self {
            AnalyticEigenfunction::Constant => 0.0,
            _ => params.n() as f64,
        }
    }
}

/// Largest `|z'' + P z' + Q z|` of a closed-form Laplace eigenfunction over the
/// nodes of the profile's half trajectory (the other half follows by symmetry).
pub fn analytic_eigenfunction_residual(
    profile: &PeriodicProfile,
    which: AnalyticEigenfunction,
) -> Result<f64, DomainError> {
    let params = profile.params;
    let (i, j) = which.mode_levels();
    let mode = ModeIndex::new(i, j, &params);
    let lambda = which.eigenvalue(&params);
    let mut worst = 0.0f64;
    for node in profile.half_trajectory.nodes() {
        let s = ProfileState::from_slice(&node.state);
        let k_curv = geometry::theta_prime(&s, &params)?;
        let (p, q) = coefficients_with(&mode, OperatorKind::Laplace, lambda, &s, &params, k_curv)?;
        let (sn, cs) = s.theta.sin_cos();
        let (z, dz, ddz) = match which {
            AnalyticEigenfunction::Constant => (1.0, 0.0, 0.0),
            AnalyticEigenfunction::F1Mode00 => (s.f1, cs, -k_curv * sn),
            AnalyticEigenfunction::F2Mode01 => (s.f2, sn, k_curv * cs),
            AnalyticEigenfunction::FMode10 => {
                let d = geometry::f_derivatives(&s, k_curv)?;
                let f = (1.0 - s.f1 * s.f1 - s.f2 * s.f2).sqrt();
                (f, d.fprime, d.fsecond)
            }
        };
        worst = worst.max((ddz + p * dz + q * z).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_eigen_values() {
        assert_eq!(sphere_eigen(1, 3), (3.0, 4));
        assert_eq!(sphere_eigen(3, 3), (15.0, 16));
        assert_eq!(sphere_eigen(4, 3), (24.0, 25));
        assert_eq!(sphere_eigen(2, 3), (8.0, 9));
        for dim in 1..6 {
            assert_eq!(sphere_eigen(0, dim), (0.0, 1));
        }
        // circle: 1, 2, 2, 2, ...
        assert_eq!(sphere_eigen(1, 1), (1.0, 2));
        assert_eq!(sphere_eigen(5, 1), (25.0, 2));
        // S^2: 2i + 1
        assert_eq!(sphere_eigen(3, 2), (12.0, 7));
    }

    #[test]
    fn singular_values() {
        let (a, b) = singular_values_2x2(3.0, 0.0, 0.0, -2.0);
        assert!((a - 3.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
        let (a, b) = singular_values_2x2(1.0, 1.0, 1.0, 1.0);
        assert!((a - 2.0).abs() < 1e-14 && b.abs() < 1e-14);
    }

    #[test]
    fn grid_endpoints() {
        let g = grid(0.0, 12.0, 0.025);
        assert_eq!(g.len(), 481);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 12.0);
        assert!((g[200] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn grouping_merges_close_roots() {
        let params = RotationParams::new(3, 1).unwrap();
        let rec = |lambda: f64, i, j| {
            let mode = ModeIndex::new(i, j, &params);
            EigenRecord {
                lambda,
                mode,
                kernel_dim: 1,
                ode_multiplicity: 1,
                total_multiplicity: mode.harmonic_multiplicity(),
                tangential: false,
                residual: 0.0,
            }
        };
        let groups = group_records(vec![
            rec(5.0000001, 1, 0),
            rec(4.9999999, 0, 0),
            rec(5.0000002, 0, 1),
            rec(9.5961595, 0, 1),
        ]);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].multiplicity, 7);
        assert_eq!(groups[1].multiplicity, 2);
    }

    /// A discriminant built straight from a monodromy matrix.
    fn synthetic(lambda: f64, m: [[f64; 2]; 2]) -> Result<Discriminant, SpectrumError> {
        let w = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        Ok(Discriminant {
            lambda,
            delta0: 1.0 + w - (m[0][0] + m[1][1]),
            monodromy: MonodromyMatrix {
                z1_t: m[0][0],
                z2_t: m[0][1],
                dz1_t: m[1][0],
                dz2_t: m[1][1],
                wronskian_t: w,
                abel_prediction: w,
                log_scale: 0.0,
            },
        })
    }

    fn mode() -> ModeIndex {
        ModeIndex::new(1, 0, &RotationParams::new(3, 1).unwrap())
    }

    const C: f64 = 1.01234;

    #[test]
    fn coexistence_root_is_tangential_and_double() {
        let eval = |l: f64| synthetic(l, [[1.0 + (l - C), 0.0], [0.0, 1.0 + (l - C)]]);
        let scan = scan_with(mode(), &eval, (0.0, 2.0), DEFAULT_STEP).unwrap();
        assert_eq!(scan.roots.len(), 1, "{:?}", scan.roots);
        let r = scan.roots[0];
        assert!(r.tangential);
        assert_eq!(r.kernel_dim, 2);
        assert_eq!(r.total_multiplicity, 8);
        assert!((r.lambda - C).abs() < 1e-4);
        assert!(scan.refined_intervals >= 1);
    }

    #[test]
    fn near_miss_becomes_candidate() {
        let eps = 1e-2;
        let eval = |l: f64| synthetic(l, [[1.0 + (l - C), eps], [-eps, 1.0 + (l - C)]]);
        let scan = scan_with(mode(), &eval, (0.0, 2.0), DEFAULT_STEP).unwrap();
        assert!(scan.roots.is_empty());
        assert_eq!(scan.candidates.len(), 1);
        assert!((scan.candidates[0].abs_delta0 - eps * eps).abs() < 1e-6);
    }

    #[test]
    fn simple_root_has_one_periodic_solution() {
        let eval = |l: f64| synthetic(l, [[1.0 + (l - C), 0.0], [0.0, 2.0]]);
        let scan = scan_with(mode(), &eval, (0.0, 2.0), DEFAULT_STEP).unwrap();
        assert_eq!(scan.roots.len(), 1);
        assert!(!scan.roots[0].tangential);
        assert_eq!(scan.roots[0].kernel_dim, 1);
        assert!((scan.roots[0].lambda - C).abs() < ROOT_WIDTH);
    }

    #[test]
    fn close_pair_inside_one_cell_is_resolved() {
        let a = 0.004;
        let eval = |l: f64| synthetic(l, [[1.0 + (l - C) - a, 0.0], [0.0, 1.0 + (l - C) + a]]);
        let scan = scan_with(mode(), &eval, (0.0, 2.0), DEFAULT_STEP).unwrap();
        let found: Vec<f64> = scan.roots.iter().map(|r| r.lambda).collect();
        assert_eq!(found.len(), 2, "{found:?}");
        assert!((found[0] - (C - a)).abs() < ROOT_WIDTH);
        assert!((found[1] - (C + a)).abs() < ROOT_WIDTH);
    }

    #[test]
    fn dedup_keeps_larger_kernel() {
        let params = RotationParams::new(3, 1).unwrap();
        let mode = ModeIndex::new(0, 0, &params);
        let r = |lambda, kernel_dim, residual| EigenRecord {
            lambda,
            mode,
            kernel_dim,
            ode_multiplicity: kernel_dim,
            total_multiplicity: kernel_dim as u64,
            tangential: false,
            residual,
        };
        let out = dedup_roots(vec![
            r(1.0, 1, 1e-9),
            r(1.0 + 1e-8, 2, 1e-7),
            r(2.0, 1, 0.0),
        ]);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].kernel_dim, 2);
        assert_eq!(out[0].residual, 1e-9);
    }
}

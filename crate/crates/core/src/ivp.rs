//! Adaptive explicit Runge-Kutta integration with dense output and event location.
//!
//! The stepper is the Dormand-Prince 5(4) pair with the 4th-order continuous
//! extension from Hairer, Norsett & Wanner. Every accepted step stores the
//! node `(u, state, derivative)` plus one coefficient vector, which is enough
//! to evaluate the interpolant anywhere on the step.

use thiserror::Error;

use crate::geometry::DomainError;

/// A first-order system `y' = F(u, y)`.
pub trait OdeSystem {
    fn dimension(&self) -> usize;

    /// Writes `F(u, state)` into `deriv`. Both slices have length `dimension()`.
    fn rhs(&self, u: f64, state: &[f64], deriv: &mut [f64]) -> Result<(), DomainError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1e-2,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IvpError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite()
            && self.max_step.is_finite()
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(IvpError::InvalidInput(format!(
                "bad integrator config {self:?}"
            )))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IvpError {
    #[error("step limit of {steps} exceeded at u = {u}")]
    StepLimitExceeded { u: f64, steps: usize },
    #[error("non-finite derivative at u = {u}")]
    NonFiniteDerivative { u: f64 },
    #[error("step size underflow at u = {u}")]
    StepUnderflow { u: f64 },
    #[error("domain guard at u = {u}: {source}")]
    DomainGuard { u: f64, source: DomainError },
    #[error("event not found before u = {u_max}")]
    EventNotFound { u_max: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Which zero crossings of an event function count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
    Any,
}

impl Direction {
    fn crosses(self, before: f64, after: f64) -> bool {
        match self {
            Direction::Rising => before < 0.0 && after >= 0.0,
            Direction::Falling => before > 0.0 && after <= 0.0,
            Direction::Any => (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub u: f64,
    pub state: Vec<f64>,
    pub derivative: Vec<f64>,
}

/// Accepted steps of one integration, with a continuous extension on each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    nodes: Vec<Node>,
    // dense[i] holds the Dormand-Prince `h * sum d_j k_j` vector for [nodes[i], nodes[i+1]]
    dense: Vec<Vec<f64>>,
}

impl Trajectory {
    pub const INTERPOLATION_ORDER: usize = 4;

    fn new(u0: f64, state0: Vec<f64>, deriv0: Vec<f64>) -> Self {
        Self {
            nodes: vec![Node {
                u: u0,
                state: state0,
                derivative: deriv0,
            }],
            dense: Vec::new(),
        }
    }

    fn push(&mut self, step: &AcceptedStep<'_>) {
        self.nodes.push(Node {
            u: step.u1,
            state: step.y1.to_vec(),
            derivative: step.f1.to_vec(),
        });
        self.dense.push(step.dcoef.to_vec());
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn interpolation_order(&self) -> usize {
        Self::INTERPOLATION_ORDER
    }

    pub fn dimension(&self) -> usize {
        self.nodes[0].state.len()
    }

    pub fn start(&self) -> f64 {
        self.nodes[0].u
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].u
    }

    pub fn last(&self) -> &Node {
        &self.nodes[self.nodes.len() - 1]
    }

    /// Dense evaluation on `[start, end]`. Returns `None` outside that range.
    pub fn eval(&self, u: f64) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dimension()];
        self.eval_into(u, &mut out).then_some(out)
    }

    pub fn eval_into(&self, u: f64, out: &mut [f64]) -> bool {
        if !(u >= self.start() && u <= self.end()) {
            return false;
        }
        // first node with node.u > u
        let idx = self.nodes.partition_point(|n| n.u <= u);
        if idx > 0 && self.nodes[idx - 1].u == u {
            out.copy_from_slice(&self.nodes[idx - 1].state);
            return true;
        }
        let seg = idx.clamp(1, self.nodes.len() - 1) - 1;
        let a = &self.nodes[seg];
        let b = &self.nodes[seg + 1];
        dense_eval(a, b, &self.dense[seg], u, out);
        true
    }
}

fn dense_eval(a: &Node, b: &Node, dcoef: &[f64], u: f64, out: &mut [f64]) {
    let h = b.u - a.u;
    let s = (u - a.u) / h;
    let s1 = 1.0 - s;
    for i in 0..out.len() {
        let ydiff = b.state[i] - a.state[i];
        let bspl = h * a.derivative[i] - ydiff;
        let r4 = ydiff - h * b.derivative[i] - bspl;
        out[i] = a.state[i] + s * (ydiff + s1 * (bspl + s * (r4 + s1 * dcoef[i])));
    }
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct AcceptedStep<'a> {
    u1: f64,
    y1: &'a [f64],
    f1: &'a [f64],
    dcoef: &'a [f64],
}

enum Control {
    Continue,
    Stop,
}

/// End state, end derivative and dense-output coefficients of one step.
type StepOutput = (Vec<f64>, Vec<f64>, Vec<f64>);

struct Stepper<'s, S: OdeSystem + ?Sized> {
    system: &'s S,
    config: IntegratorConfig,
    dim: usize,
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    dcoef: Vec<f64>,
}

impl<'s, S: OdeSystem + ?Sized> Stepper<'s, S> {
    fn new(system: &'s S, config: IntegratorConfig) -> Self {
        let dim = system.dimension();
        Self {
            system,
            config,
            dim,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            ytmp: vec![0.0; dim],
            ynew: vec![0.0; dim],
            dcoef: vec![0.0; dim],
        }
    }

    fn eval(&self, u: f64, y: &[f64], out: &mut [f64]) -> Result<(), IvpError> {
        self.system
            .rhs(u, y, out)
            .map_err(|source| IvpError::DomainGuard { u, source })?;
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(IvpError::NonFiniteDerivative { u })
        }
    }

    /// One trial step from `(u, y)` with `k[0] = F(u, y)` already set.
    /// Fills `ynew`, `k[6] = F(u+h, ynew)`, and `dcoef`; returns the scaled error norm.
    fn trial(&mut self, u: f64, y: &[f64], h: f64) -> Result<f64, IvpError> {
        let n = self.dim;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let yt = &mut self.ytmp;
        let sys = self.system;
        let ev = |uu: f64, yy: &[f64], out: &mut [f64]| -> Result<(), IvpError> {
            sys.rhs(uu, yy, out)
                .map_err(|source| IvpError::DomainGuard { u: uu, source })?;
            if out.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(IvpError::NonFiniteDerivative { u: uu })
            }
        };
        for i in 0..n {
            yt[i] = y[i] + h * A21 * k1[i];
        }
        ev(u + C2 * h, yt, k2)?;
        for i in 0..n {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        ev(u + C3 * h, yt, k3)?;
        for i in 0..n {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        ev(u + C4 * h, yt, k4)?;
        for i in 0..n {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        ev(u + C5 * h, yt, k5)?;
        for i in 0..n {
            yt[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        ev(u + h, yt, k6)?;
        let yn = &mut self.ynew;
        for i in 0..n {
            yn[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        ev(u + h, yn, k7)?;

        let mut acc = 0.0;
        for i in 0..n {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.config.abs_tol + self.config.rel_tol * y[i].abs().max(yn[i].abs());
            acc += (e / sc) * (e / sc);
            self.dcoef[i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Ok((acc / n as f64).sqrt())
    }

    fn initial_step(&mut self, u: f64, y: &[f64], span: f64) -> Result<f64, IvpError> {
        let n = self.dim as f64;
        let cfg = self.config;
        let sc = |v: f64| cfg.abs_tol + cfg.rel_tol * v.abs();
        let d0 = (y.iter().map(|v| (v / sc(*v)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (y
            .iter()
            .zip(&self.k[0])
            .map(|(v, f)| (f / sc(*v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(cfg.max_step).min(span);
        for ((t, yi), ki) in self.ytmp.iter_mut().zip(y).zip(&self.k[0]) {
            *t = yi + h0 * ki;
        }
        let mut f1 = vec![0.0; self.dim];
        let ytmp = self.ytmp.clone();
        self.eval(u + h0, &ytmp, &mut f1)?;
        let d2 = (y
            .iter()
            .zip(f1.iter().zip(&self.k[0]))
            .map(|(v, (a, b))| ((a - b) / sc(*v)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(1.0 / 5.0)
        };
        Ok((100.0 * h0).min(h1).min(cfg.max_step).min(span))
    }

    /// Integrates from `(u0, y0)` towards `u_end`, calling `observe` after each accepted step.
    fn drive<F>(
        &mut self,
        u0: f64,
        y0: &[f64],
        u_end: f64,
        mut observe: F,
    ) -> Result<(f64, Vec<f64>), IvpError>
    where
        F: FnMut(f64, &[f64], &AcceptedStep<'_>) -> Result<Control, IvpError>,
    {
        let mut u = u0;
        let mut y = y0.to_vec();
        let mut k0 = std::mem::take(&mut self.k[0]);
        self.eval(u, &y, &mut k0)?;
        self.k[0] = k0;
        let mut h = self.initial_step(u, &y, u_end - u0)?;
        let mut steps = 0usize;
        let mut last_rejected = false;
        while u < u_end {
            if steps >= self.config.max_steps {
                return Err(IvpError::StepLimitExceeded { u, steps });
            }
            steps += 1;
            let mut last = false;
            if u + h >= u_end || u + 1.01 * h >= u_end {
                h = u_end - u;
                last = true;
            }
            if h <= 16.0 * f64::EPSILON * u.abs().max(1.0) {
                return Err(IvpError::StepUnderflow { u });
            }
            let err = match self.trial(u, &y, h) {
                Ok(err) => err,
                Err(IvpError::DomainGuard { .. }) | Err(IvpError::NonFiniteDerivative { .. })
                    if h > 1e-10 =>
                {
                    // a trial stage left the domain; retry with a shorter step
                    h *= 0.25;
                    last_rejected = true;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if err <= 1.0 {
                let u_new = if last { u_end } else { u + h };
                let control = {
                    let step = AcceptedStep {
                        u1: u_new,
                        y1: &self.ynew,
                        f1: &self.k[6],
                        dcoef: &self.dcoef,
                    };
                    observe(u, &y, &step)?
                };
                u = u_new;
                std::mem::swap(&mut y, &mut self.ynew);
                // FSAL
                let (first, rest) = self.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                if let Control::Stop = control {
                    return Ok((u, y));
                }
                let fac = if err == 0.0 {
                    10.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
                };
                let fac = if last_rejected { fac.min(1.0) } else { fac };
                h = (h * fac).min(self.config.max_step);
                last_rejected = false;
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                last_rejected = true;
            }
        }
        Ok((u, y))
    }

    /// A single untimed step of size `h` from an accepted node; used for event polishing.
    fn exact_step(
        &mut self,
        u: f64,
        y: &[f64],
        fy: &[f64],
        h: f64,
    ) -> Result<StepOutput, IvpError> {
        self.k[0].copy_from_slice(fy);
        self.trial(u, y, h)?;
        Ok((self.ynew.clone(), self.k[6].clone(), self.dcoef.clone()))
    }
}

fn check_inputs(
    dim: usize,
    u0: f64,
    state0: &[f64],
    u1: f64,
    config: &IntegratorConfig,
) -> Result<(), IvpError> {
    config.validate()?;
    if state0.len() != dim {
        return Err(IvpError::InvalidInput(format!(
            "initial state has length {} but system dimension is {dim}",
            state0.len()
        )));
    }
    if !state0.iter().all(|v| v.is_finite()) {
        return Err(IvpError::InvalidInput("non-finite initial state".into()));
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(u1 > u0) || !u0.is_finite() || !u1.is_finite() {
        return Err(IvpError::InvalidInput(format!(
            "need u1 > u0, got [{u0}, {u1}]"
        )));
    }
    Ok(())
}

/// Integrates `system` on `[u0, u1]` and keeps the dense trajectory.
pub fn integrate<S: OdeSystem + ?Sized>(
    system: &S,
    u0: f64,
    state0: &[f64],
    u1: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory, IvpError> {
    check_inputs(system.dimension(), u0, state0, u1, config)?;
    let mut stepper = Stepper::new(system, *config);
    let mut deriv0 = vec![0.0; system.dimension()];
    stepper.eval(u0, state0, &mut deriv0)?;
    let mut traj = Trajectory::new(u0, state0.to_vec(), deriv0);
    stepper.drive(u0, state0, u1, |_, _, step| {
        traj.push(step);
        Ok(Control::Continue)
    })?;
    Ok(traj)
}

/// Integrates on `[u0, u1]` and returns only the final state.
pub fn integrate_endpoint<S: OdeSystem + ?Sized>(
    system: &S,
    u0: f64,
    state0: &[f64],
    u1: f64,
    config: &IntegratorConfig,
) -> Result<Vec<f64>, IvpError> {
    check_inputs(system.dimension(), u0, state0, u1, config)?;
    let mut stepper = Stepper::new(system, *config);
    let (_, y) = stepper.drive(u0, state0, u1, |_, _, _| Ok(Control::Continue))?;
    Ok(y)
}

/// Like [`integrate_endpoint`], but calls `observe(u, state)` at every accepted node
/// (including the initial one).
pub fn integrate_observed<S, F>(
    system: &S,
    u0: f64,
    state0: &[f64],
    u1: f64,
    config: &IntegratorConfig,
    mut observe: F,
) -> Result<Vec<f64>, IvpError>
where
    S: OdeSystem + ?Sized,
    F: FnMut(f64, &[f64]),
{
    check_inputs(system.dimension(), u0, state0, u1, config)?;
    let mut stepper = Stepper::new(system, *config);
    observe(u0, state0);
    let (_, y) = stepper.drive(u0, state0, u1, |_, _, step| {
        observe(step.u1, step.y1);
        Ok(Control::Continue)
    })?;
    Ok(y)
}

#[derive(Debug, Clone)]
pub struct EventHit {
    pub u: f64,
    pub state: Vec<f64>,
    pub trajectory: Trajectory,
}

/// |event| below which a located crossing is accepted.
pub const EVENT_TOL: f64 = 1e-12;
// an event function this close to zero at the start does not arm detection
const ARM_THRESHOLD: f64 = 1e-10;

/// Integrates until the first crossing of `event` in `direction`, or fails at `u_max`.
///
/// The crossing is bracketed on the dense output and then polished with true
/// Runge-Kutta steps from the last accepted node, so the returned state is an
/// integrator state rather than an interpolated one. The trajectory ends at the event.
pub fn integrate_until<S, E>(
    system: &S,
    u0: f64,
    state0: &[f64],
    event: E,
    direction: Direction,
    u_max: f64,
    config: &IntegratorConfig,
) -> Result<EventHit, IvpError>
where
    S: OdeSystem + ?Sized,
    E: Fn(&[f64]) -> f64,
{
    check_inputs(system.dimension(), u0, state0, u_max, config)?;
    let mut stepper = Stepper::new(system, *config);
    let dim = system.dimension();
    let mut deriv0 = vec![0.0; dim];
    stepper.eval(u0, state0, &mut deriv0)?;
    let mut traj = Trajectory::new(u0, state0.to_vec(), deriv0);

    let g0 = event(state0);
    let mut armed = g0.abs() > ARM_THRESHOLD;
    let mut g_prev = g0;
    // (node a, state at a, node b, dense coefficients, g_a, g_b) of the crossing step
    let mut crossing: Option<(Node, Node, Vec<f64>, f64, f64)> = None;

    stepper.drive(u0, state0, u_max, |_, _, step| {
        let g_b = event(step.y1);
        if !armed {
            if g_b.abs() > ARM_THRESHOLD {
                armed = true;
                g_prev = g_b;
            }
            traj.push(step);
            return Ok(Control::Continue);
        }
        if !direction.crosses(g_prev, g_b) {
            g_prev = g_b;
            traj.push(step);
            return Ok(Control::Continue);
        }
        let b = Node {
            u: step.u1,
            state: step.y1.to_vec(),
            derivative: step.f1.to_vec(),
        };
        crossing = Some((traj.last().clone(), b, step.dcoef.to_vec(), g_prev, g_b));
        Ok(Control::Stop)
    })?;

    let hit = match crossing {
        Some((a, b, dcoef, g_a, g_b)) => {
            let u_star = locate_on_interpolant(&a, &b, &dcoef, &event, g_a, g_b);
            Some(polish(&mut stepper, &a, &event, u_star, g_a, g_b, b.u)?)
        }
        None => None,
    };

    match hit {
        Some((u, state, deriv, dcoef)) => {
            traj.nodes.push(Node {
                u,
                state: state.clone(),
                derivative: deriv,
            });
            traj.dense.push(dcoef);
            Ok(EventHit {
                u,
                state,
                trajectory: traj,
            })
        }
        None => Err(IvpError::EventNotFound { u_max }),
    }
}

fn locate_on_interpolant<E: Fn(&[f64]) -> f64>(
    a: &Node,
    b: &Node,
    dcoef: &[f64],
    event: &E,
    g_a: f64,
    g_b: f64,
) -> f64 {
    let mut buf = vec![0.0; a.state.len()];
    let (mut lo, mut hi) = (a.u, b.u);
    let (mut glo, mut ghi) = (g_a, g_b);
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        dense_eval(a, b, dcoef, mid, &mut buf);
        let gm = event(&buf);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    if (ghi - glo).abs() > 0.0 {
        lo - glo * (hi - lo) / (ghi - glo)
    } else {
        0.5 * (lo + hi)
    }
}

type Polished = (f64, Vec<f64>, Vec<f64>, Vec<f64>);

#[allow(clippy::too_many_arguments)]
fn polish<S: OdeSystem + ?Sized, E: Fn(&[f64]) -> f64>(
    st: &mut Stepper<'_, S>,
    a: &Node,
    event: &E,
    u_guess: f64,
    g_a: f64,
    g_b: f64,
    u_b: f64,
) -> Result<Polished, IvpError> {
    let mut step_to = |u: f64| -> Result<(f64, Polished), IvpError> {
        let (y, f, d) = st.exact_step(a.u, &a.state, &a.derivative, u - a.u)?;
        Ok((event(&y), (u, y, f, d)))
    };
    // bracket on true steps
    let (mut lo, mut glo) = (a.u, g_a);
    let (mut hi, mut ghi) = (u_b, g_b);
    let mut best: Option<(f64, Polished)> = None;
    let mut u = u_guess.clamp(lo, hi);
    for iter in 0..60 {
        if u <= lo || u >= hi {
            u = 0.5 * (lo + hi);
        }
        let (g, res) = step_to(u)?;
        let better = best.as_ref().is_none_or(|(bg, _)| g.abs() < bg.abs());
        if better {
            best = Some((g, res));
        }
        if g.abs() < 0.01 * EVENT_TOL || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        if (g < 0.0) == (glo < 0.0) {
            lo = u;
            glo = g;
        } else {
            hi = u;
            ghi = g;
        }
        // secant (regula falsi) inside the bracket, bisection every few rounds
        u = if iter % 4 == 3 {
            0.5 * (lo + hi)
        } else {
            lo - glo * (hi - lo) / (ghi - glo)
        };
    }
    Ok(best.expect("at least one polishing step").1)
}

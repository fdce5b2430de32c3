//! Closed-form geometry of the profile curve `(f1, f2)` and of the hypersurface
//! it generates in `S^{n+1}` by rotating with `S^k x S^l`.
//!
//! The curve is parametrized by arc length with tangent `(cos θ, sin θ)`.
//! Notation used throughout:
//!
//! * `f  = sqrt(1 - f1² - f2²)`, the radius of the `S^k` factor,
//! * `g  = f2 cos θ - f1 sin θ`, the support function (normal treadmill coordinate),
//! * `h  = sqrt(1 - g²)`,
//! * `ξ1 = f1 cos θ + f2 sin θ`, the tangential treadmill coordinate,
//! * `K  = θ'`, forced by the minimality equation.

use thiserror::Error;

/// States closer than this to the unit circle or to the rotation axis are rejected.
pub const DOMAIN_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum DomainError {
    #[error("state leaves the open unit disk (f1² + f2² = {radius_sq})")]
    OutsideDisk { radius_sq: f64 },
    #[error("state touches the rotation axis (f2 = {f2})")]
    NearAxis { f2: f64 },
    #[error("support function out of range (g = {g})")]
    SupportOutOfRange { g: f64 },
    #[error("non-finite state component")]
    NonFinite,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rotation parameters: {0}")]
pub struct ParamsError(pub String);

/// The factors `S^k x S^l` and hypersurface dimension `n = k + l + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RotationParams {
    k: u32,
    l: u32,
}

impl RotationParams {
    pub fn new(k: u32, l: u32) -> Result<Self, ParamsError> {
        if k == 0 || l == 0 {
            return Err(ParamsError(format!(
                "need k >= 1 and l >= 1, got k={k}, l={l}"
            )));
        }
        Ok(Self { k, l })
    }

    pub fn from_n_l(n: u32, l: u32) -> Result<Self, ParamsError> {
        if n < l + 2 {
            return Err(ParamsError(format!("n={n} too small for l={l}")));
        }
        Self::new(n - l - 1, l)
    }

    /// Builds the triple from any two of `(n, k, l)`, checking consistency if all three are given.
    pub fn from_any(n: Option<u32>, k: Option<u32>, l: Option<u32>) -> Result<Self, ParamsError> {
        match (n, k, l) {
            (Some(n), Some(k), Some(l)) => {
                if n != k + l + 1 {
                    return Err(ParamsError(format!("n={n} != k+l+1 = {}", k + l + 1)));
                }
                Self::new(k, l)
            }
            (None, Some(k), Some(l)) => Self::new(k, l),
            (Some(n), None, Some(l)) => Self::from_n_l(n, l),
            (Some(n), Some(k), None) => {
                if n < k + 2 {
                    return Err(ParamsError(format!("n={n} too small for k={k}")));
                }
                Self::new(k, n - k - 1)
            }
            _ => Err(ParamsError("give at least two of n, k, l".into())),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn n(&self) -> u32 {
        self.k + self.l + 1
    }

    /// Radius of the Clifford equilibrium `f2 = sqrt(l/n)`.
    pub fn equilibrium_radius(&self) -> f64 {
        (self.l as f64 / self.n() as f64).sqrt()
    }
}

/// One point of the arc-length parametrized profile curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState {
    pub f1: f64,
    pub f2: f64,
    pub theta: f64,
}

impl ProfileState {
    pub fn new(f1: f64, f2: f64, theta: f64) -> Self {
        Self { f1, f2, theta }
    }

    /// Reads the first three components `(f1, f2, θ)` of an ODE state vector.
    pub fn from_slice(state: &[f64]) -> Self {
        Self {
            f1: state[0],
            f2: state[1],
            theta: state[2],
        }
    }

    pub fn check(&self) -> Result<(), DomainError> {
        if !(self.f1.is_finite() && self.f2.is_finite() && self.theta.is_finite()) {
            return Err(DomainError::NonFinite);
        }
        let radius_sq = self.f1 * self.f1 + self.f2 * self.f2;
        if radius_sq >= 1.0 - DOMAIN_EPS {
            return Err(DomainError::OutsideDisk { radius_sq });
        }
        if self.f2 <= DOMAIN_EPS {
            return Err(DomainError::NearAxis { f2: self.f2 });
        }
        Ok(())
    }

    /// Treadmill-sled coordinates `(ξ1, ξ2)`; `ξ2` is the support function `g`.
    pub fn treadmill(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (self.f1 * c + self.f2 * s, self.f2 * c - self.f1 * s)
    }
}

/// Every pointwise geometric quantity of the generated hypersurface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureBundle {
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub xi1: f64,
    /// `θ'` from the minimality equation.
    pub k_curv: f64,
    /// `-cos θ / f2`, the curvature of the `S^l` directions of the rotated profile.
    pub kappa1: f64,
    /// Principal curvature along `S^k` (multiplicity k).
    pub lambda0: f64,
    /// Principal curvature along `S^l` (multiplicity l).
    pub lambda_mid: f64,
    /// Principal curvature along the profile direction.
    pub lambda_last: f64,
    pub shape_norm_sq: f64,
    /// Trace of the shape operator, `n H`.
    pub n_h: f64,
}

/// `(f, g, h)` at a state.
pub fn fgh(state: &ProfileState) -> Result<(f64, f64, f64), DomainError> {
    state.check()?;
    let (s, c) = state.theta.sin_cos();
    let f = (1.0 - state.f1 * state.f1 - state.f2 * state.f2).sqrt();
    let g = state.f2 * c - state.f1 * s;
    if g.abs() >= 1.0 {
        return Err(DomainError::SupportOutOfRange { g });
    }
    Ok((f, g, (1.0 - g * g).sqrt()))
}

/// `θ' = K` making the generated hypersurface minimal.
pub fn theta_prime(state: &ProfileState, params: &RotationParams) -> Result<f64, DomainError> {
    state.check()?;
    let n = params.n() as f64;
    let l = params.l() as f64;
    let ProfileState { f1, f2, theta } = *state;
    let (s, c) = theta.sin_cos();
    let gap = f1 * s - f2 * c;
    let denom = f2 * (1.0 - f1 * f1 - f2 * f2);
    if denom <= 0.0 {
        return Err(DomainError::OutsideDisk {
            radius_sq: f1 * f1 + f2 * f2,
        });
    }
    Ok(((l - n * f2 * f2) * c + f1 * f2 * n * s) * (1.0 - gap * gap) / denom)
}

/// Curvature quantities at a state, with `θ'` taken from the minimality equation.
pub fn curvature_bundle(
    state: &ProfileState,
    params: &RotationParams,
) -> Result<CurvatureBundle, DomainError> {
    let k_curv = theta_prime(state, params)?;
    curvature_bundle_with(state, params, k_curv)
}

/// Curvature quantities for a curve whose actual `θ'` is `k_curv`.
///
/// With `k_curv` from [`theta_prime`] the result has `n_h = 0` up to rounding.
pub fn curvature_bundle_with(
    state: &ProfileState,
    params: &RotationParams,
    k_curv: f64,
) -> Result<CurvatureBundle, DomainError> {
    let (f, g, h) = fgh(state)?;
    let (xi1, _) = state.treadmill();
    let kf = params.k() as f64;
    let lf = params.l() as f64;
    let nf = params.n() as f64;
    let kappa1 = -state.theta.cos() / state.f2;
    let h3 = h * h * h;
    // (f f')² = ξ1²
    let normal_corr = k_curv * xi1 * xi1 / h3;
    let lambda0 = g / h;
    let lambda_mid = (g + kappa1) / h;
    let lambda_last = (g + k_curv) / h - normal_corr;
    let shape_norm_sq =
        kf * lambda0 * lambda0 + lf * lambda_mid * lambda_mid + lambda_last * lambda_last;
    let n_h = (nf * g + lf * kappa1 + k_curv) / h - normal_corr;
    Ok(CurvatureBundle {
        f,
        g,
        h,
        xi1,
        k_curv,
        kappa1,
        lambda0,
        lambda_mid,
        lambda_last,
        shape_norm_sq,
        n_h,
    })
}

/// Derivatives of `f = sqrt(1 - f1² - f2²)` along the arc-length parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDerivatives {
    pub fprime: f64,
    pub fsecond: f64,
    /// `1 + f'²`, the `u`-component of the induced metric.
    pub one_plus_fp2: f64,
}

/// `f'`, `f''` and `1 + f'²` for a curve with `θ' = k_curv`.
///
/// Uses `f' = -ξ1/f` and `ξ1' = 1 + ξ2 θ'`, which give
/// `f'' = -((1 - g²) + g K f²) / f³` and `1 + f'² = (1 - g²) / f²`.
pub fn f_derivatives(state: &ProfileState, k_curv: f64) -> Result<FDerivatives, DomainError> {
    let (f, g, _) = fgh(state)?;
    let (xi1, _) = state.treadmill();
    let f2sq = f * f;
    let one_minus_g2 = 1.0 - g * g;
    Ok(FDerivatives {
        fprime: -xi1 / f,
        fsecond: -(one_minus_g2 + g * k_curv * f2sq) / (f2sq * f),
        one_plus_fp2: one_minus_g2 / f2sq,
    })
}

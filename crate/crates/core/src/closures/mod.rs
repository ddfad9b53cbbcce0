//! Physical origins of a switch: three smooth models whose outputs tend to
//! `sign(h)` as a small parameter `ε` vanishes. They serve as oracles for
//! the shape of a realistic switching transition.
//!
//! * relaxation: `εẏ = (1 − y²)h − εy`
//! * heat: steady state of `h y_h + ε y_hh = 0` with `y(±∞) = ±1`
//! * Gaussian Stokes: `y(h) = √(2/π) ∫_{−∞}^{h/ε} e^{−κ²/2} cos(ρκ) dκ`

mod quad;

use core::f64::consts::{FRAC_2_PI, PI};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ClosureError {
    #[error("eps must be positive and finite, got {0}")]
    Eps(f64),
    #[error("rho must be non-negative and finite, got {0}")]
    Rho(f64),
    #[error("the asymptote is undefined at h = 0")]
    AtSwitch,
    #[error("initial value {y0} lies outside the basin of the relaxation flow")]
    Domain { y0: f64 },
}

fn check_eps(eps: f64) -> Result<(), ClosureError> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(ClosureError::Eps(eps))
    }
}

fn check_rho(rho: f64) -> Result<(), ClosureError> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(ClosureError::Rho(rho))
    }
}

/// Attracting equilibrium of the relaxation model at fixed `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxationState {
    pub y_star: f64,
    /// `∂ẏ/∂y` at `y_star`; always negative.
    pub dydot_dy: f64,
    /// Set when `h = 0`, where `y_star = 0` is the symmetric limit.
    pub at_switch: bool,
}

/// `y* = −ε/2h + sign(h)√(1 + (ε/2h)²)` and its linear rate.
pub fn relaxation_steady_state(eps: f64, h: f64) -> Result<RelaxationState, ClosureError> {
    check_eps(eps)?;
    if h == 0.0 {
        return Ok(RelaxationState { y_star: 0.0, dydot_dy: -1.0, at_switch: true });
    }
    let q = eps / (2.0 * h);
    let root = libm::hypot(1.0, q);
    // rationalized to avoid cancellation when |h| ≫ ε
    let y_star = libm::copysign(1.0, h) / (root + q.abs());
    let dydot_dy = -libm::hypot(1.0, 2.0 * h / eps);
    Ok(RelaxationState { y_star, dydot_dy, at_switch: false })
}

/// Closed-form solution of the relaxation ODE from `y(0) = y0`; exact at
/// `t = 0`.
pub fn relaxation_transient(eps: f64, h: f64, y0: f64, t: f64) -> Result<f64, ClosureError> {
    check_eps(eps)?;
    if t == 0.0 {
        return Ok(y0);
    }
    if h == 0.0 {
        return Ok(y0 * libm::exp(-t));
    }
    let q = eps / (2.0 * h);
    let alpha = libm::hypot(1.0, q);
    let z = (q + y0) / alpha;
    if !(z.abs() < 1.0) {
        return Err(ClosureError::Domain { y0 });
    }
    Ok(-q + alpha * libm::tanh(alpha * t * h / eps + libm::atanh(z)))
}

/// `Erf(h/√(2ε))`.
pub fn heat_steady_state(eps: f64, h: f64) -> Result<f64, ClosureError> {
    check_eps(eps)?;
    Ok(libm::erf(h / libm::sqrt(2.0 * eps)))
}

/// Quadrature result and its normalization `ȳ = e^{ρ²/2} y − 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesValue {
    pub y: f64,
    pub y_bar: f64,
}

/// Absolute tolerance of the Stokes quadrature.
pub const STOKES_TOL: f64 = 1e-13;

// e^{−κ²/2} underflows to zero beyond this
const GAUSS_CUTOFF: f64 = 40.0;

/// Lower truncation of the Stokes integral.
pub fn stokes_truncation(u: f64) -> f64 {
    (u.abs() + 10.0).max(10.0)
}

/// Gaussian oscillatory integral at `u = h/ε`.
pub fn stokes_integral(eps: f64, rho: f64, h: f64) -> Result<StokesValue, ClosureError> {
    check_eps(eps)?;
    check_rho(rho)?;
    let u = h / eps;
    let upper = u.min(GAUSS_CUTOFF);
    let lower = -stokes_truncation(upper).min(GAUSS_CUTOFF);
    let y = if upper <= lower {
        0.0
    } else {
        let integrand = |k: f64| libm::exp(-0.5 * k * k) * libm::cos(rho * k);
        libm::sqrt(FRAC_2_PI) * quad::adaptive_simpson(integrand, lower, upper, STOKES_TOL)
    };
    Ok(StokesValue { y, y_bar: libm::exp(0.5 * rho * rho) * y - 1.0 })
}

/// Two-term large-`|h|/ε` expansion: the switched constant
/// `e^{−ρ²/2}(1 + sign h)` minus the endpoint contribution.
pub fn stokes_switch_asymptote(eps: f64, rho: f64, h: f64) -> Result<f64, ClosureError> {
    check_eps(eps)?;
    check_rho(rho)?;
    if h == 0.0 {
        return Err(ClosureError::AtSwitch);
    }
    let u = h / eps;
    let switched = libm::exp(-0.5 * rho * rho) * (1.0 + libm::copysign(1.0, h));
    let tail = libm::sqrt(FRAC_2_PI) * libm::exp(-0.5 * u * u) * libm::cos(rho * u) / u;
    Ok(switched - tail)
}

/// Location `επ/2ρ` of the positive-side extremum of `ȳ`; exact, since
/// `dȳ/du ∝ e^{−u²/2} cos(ρu)`.
pub fn stokes_peak_location(eps: f64, rho: f64) -> f64 {
    eps * PI / (2.0 * rho)
}

/// Approximate peak height `1 + √(2/π)(4ρ³/π²)e^{−π²/8ρ²}`.
pub fn stokes_peak_height_estimate(rho: f64) -> f64 {
    1.0 + libm::sqrt(FRAC_2_PI) * 4.0 * rho * rho * rho / (PI * PI) * libm::exp(-PI * PI / (8.0 * rho * rho))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosureKind {
    RelaxationOde,
    HeatSteadyState,
    GaussianStokes { rho: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosureModel {
    pub kind: ClosureKind,
    pub eps: f64,
}

impl ClosureModel {
    pub fn new(kind: ClosureKind, eps: f64) -> Result<Self, ClosureError> {
        check_eps(eps)?;
        if let ClosureKind::GaussianStokes { rho } = kind {
            check_rho(rho)?;
        }
        Ok(ClosureModel { kind, eps })
    }

    /// The switch value, normalized so that it tends to `sign(h)`.
    pub fn switch_value(&self, h: f64) -> Result<f64, ClosureError> {
        match self.kind {
            ClosureKind::RelaxationOde => relaxation_steady_state(self.eps, h).map(|s| s.y_star),
            ClosureKind::HeatSteadyState => heat_steady_state(self.eps, h),
            ClosureKind::GaussianStokes { rho } => stokes_integral(self.eps, rho, h).map(|s| s.y_bar),
        }
    }
}

//! Sigmoid-regularized reference integrators.
//!
//! The switching multiplier is replaced by `λ = Λ(h(x)/ε)` and the
//! resulting smooth (and stiff) system is stepped with explicit Euler, or
//! with Euler–Maruyama when additive noise is switched on. Both are
//! deliberately low order: the behaviour they are meant to reproduce is
//! itself sensitive to the scheme and step.

mod sigmoid;
mod washout;

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::expr::ExprError;
use crate::integrate::{Mode, Sample, Trajectory};
use crate::model::SwitchedSystem;

pub use sigmoid::{sigmoid_eval, tail_error, Sigmoid, SigmoidError, SigmoidKind};
pub use washout::{r_eps, washout_curve, wilson_interval, StickRule, WashoutConfig, WashoutPoint};

/// Default cap on emitted samples per run.
pub const MAX_OUTPUT_SAMPLES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    /// Diffusion amplitude per component.
    pub kappa: f64,
    pub seed: u64,
    pub substep: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RegularizeError {
    #[error("step must be positive and finite, got {0}")]
    Step(f64),
    #[error("noise amplitude must be non-negative, got {0}")]
    Kappa(f64),
    #[error("time span must be increasing")]
    Span,
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("no layer transit with index {0}")]
    NotATransit(usize),
    #[error("system shows no hidden sliding at the probe point")]
    NoHiddenSliding,
    #[error(transparent)]
    Sigmoid(#[from] SigmoidError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Standard normal deviates by Box–Muller from a seeded ChaCha8 stream.
#[derive(Clone, Debug)]
pub struct Gaussian {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new(seed: u64) -> Self {
        Gaussian { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Uniform on `(0, 1]`, 53 random bits.
    fn uniform(&mut self) -> f64 {
        1.0 - (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = libm::sqrt(-2.0 * libm::log(self.uniform()));
        let theta = core::f64::consts::TAU * self.uniform();
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

fn check_span(t_span: (f64, f64), step: f64) -> Result<usize, RegularizeError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(RegularizeError::Step(step));
    }
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(RegularizeError::Span);
    }
    // tolerate round-off in spans that are whole multiples of the step
    let n = (t1 - t0) / step;
    Ok(libm::ceil(n - 1e-9 * n.max(1.0)) as usize)
}

fn mode_of(h: f64, eps: f64) -> Mode {
    if h.abs() <= eps {
        Mode::InLayerTransit
    } else {
        Mode::free(h)
    }
}

/// Shared Euler / Euler–Maruyama loop; `noise = None` is the smooth engine.
fn euler_run(
    sys: &SwitchedSystem,
    x0: &[f64],
    t_span: (f64, f64),
    sig: &Sigmoid,
    step: f64,
    stride: Option<usize>,
    mut noise: Option<(&mut Gaussian, f64)>,
) -> Result<Trajectory, RegularizeError> {
    let steps = check_span(t_span, step)?;
    let stride = stride.unwrap_or_else(|| steps.div_ceil(MAX_OUTPUT_SAMPLES)).max(1);
    let (t0, t1) = t_span;
    let n = sys.dim();
    let mut x = x0.to_vec();
    let mut f = vec![0.0; n];
    let mut traj = Trajectory::new();
    traj.samples.reserve(steps / stride + 2);

    let mut t = t0;
    for k in 0..steps {
        let hv = sys.switching(&x)?;
        let lam = sig.eval(hv);
        if k % stride == 0 {
            traj.push(Sample { t, x: x.clone(), lam, mode: mode_of(hv, sig.eps) });
        }
        let t_next = if k + 1 == steps { t1 } else { t0 + (k + 1) as f64 * step };
        let dt = t_next - t;
        sys.assemble_into(&x, t, lam, &mut f)?;
        for (xi, fi) in x.iter_mut().zip(&f) {
            *xi += dt * fi;
        }
        if let Some((g, kappa)) = noise.as_mut() {
            let amp = *kappa * libm::sqrt(dt);
            for xi in x.iter_mut() {
                *xi += amp * g.sample();
            }
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(RegularizeError::NonFinite { t: t_next });
        }
        t = t_next;
    }
    let hv = sys.switching(&x)?;
    traj.push(Sample { t, x, lam: sig.eval(hv), mode: mode_of(hv, sig.eps) });
    Ok(traj)
}

/// Explicit Euler on `ẋ = f(x, t; Λ(h(x)/ε))` with `t_k = t0 + k·step`.
/// Every `stride`-th sample is kept (default: at most a million samples).
pub fn smooth_simulate(
    sys: &SwitchedSystem,
    x0: &[f64],
    t_span: (f64, f64),
    sig: &Sigmoid,
    step: f64,
    stride: Option<usize>,
) -> Result<Trajectory, RegularizeError> {
    euler_run(sys, x0, t_span, sig, step, stride, None)
}

/// Euler–Maruyama with independent Gaussian increments of standard
/// deviation `κ√dt` per component. With `κ = 0` no random numbers are
/// drawn and the result equals [`smooth_simulate`] bit for bit.
pub fn stochastic_simulate(
    sys: &SwitchedSystem,
    x0: &[f64],
    t_span: (f64, f64),
    sig: &Sigmoid,
    noise: &NoiseConfig,
    stride: Option<usize>,
) -> Result<Trajectory, RegularizeError> {
    if !(noise.kappa >= 0.0 && noise.kappa.is_finite()) {
        return Err(RegularizeError::Kappa(noise.kappa));
    }
    if noise.kappa == 0.0 {
        return euler_run(sys, x0, t_span, sig, noise.substep, stride, None);
    }
    let mut g = Gaussian::new(noise.seed);
    euler_run(sys, x0, t_span, sig, noise.substep, stride, Some((&mut g, noise.kappa)))
}

/// A maximal run of consecutive in-layer samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transit {
    /// Index of the first in-layer sample.
    pub first: usize,
    /// Index of the last in-layer sample.
    pub last: usize,
    pub t_enter: f64,
    /// Time of the first sample after the run (or of the last sample).
    pub t_exit: f64,
}

impl Transit {
    pub fn duration(&self) -> f64 {
        self.t_exit - self.t_enter
    }
}

/// All layer transits of a regularized trajectory, in time order.
pub fn transits(traj: &Trajectory) -> Vec<Transit> {
    let s = &traj.samples;
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        if s[i].mode != Mode::InLayerTransit {
            i += 1;
            continue;
        }
        let first = i;
        while i + 1 < s.len() && s[i + 1].mode == Mode::InLayerTransit {
            i += 1;
        }
        let t_exit = s.get(i + 1).map_or(s[i].t, |n| n.t);
        out.push(Transit { first, last: i, t_enter: s[first].t, t_exit });
        i += 1;
    }
    out
}

/// The `(δt, λ)` curve of transit `index`, with `δt` measured from entry.
pub fn layer_transit_profile(traj: &Trajectory, index: usize) -> Result<Vec<(f64, f64)>, RegularizeError> {
    let tr = *transits(traj).get(index).ok_or(RegularizeError::NotATransit(index))?;
    Ok(traj.samples[tr.first..=tr.last].iter().map(|s| (s.t - tr.t_enter, s.lam)).collect())
}

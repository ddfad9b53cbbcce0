//! Monte Carlo estimate of how noise washes out hidden sliding.
//!
//! Each run is an Euler–Maruyama path of the regularized system. A run
//! *sticks* when it dwells continuously inside `|h| < band·ε` for longer
//! than `dwell·ε`; it is counted as crossing once it leaves the band on the
//! side opposite to the one it entered from.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_span, Gaussian, RegularizeError, Sigmoid};
use crate::layer::{self, Stability};
use crate::model::SwitchedSystem;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StickRule {
    /// Half-width of the band around the surface, in units of ε.
    pub band: f64,
    /// Dwell time that counts as sticking, in units of ε.
    pub dwell: f64,
}

impl Default for StickRule {
    fn default() -> Self {
        StickRule { band: 5.0, dwell: 100.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WashoutConfig {
    pub runs: usize,
    pub horizon: f64,
    pub substep: f64,
    /// Run `i` of every κ uses seed `seed + i`.
    pub seed: u64,
    pub rule: StickRule,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WashoutPoint {
    pub kappa: f64,
    pub sticks: usize,
    pub runs: usize,
    pub fraction: f64,
    /// Wilson 95% interval for the stick probability.
    pub ci: (f64, f64),
}

/// Noise scale `√(−ε/ln ε)` at which a well of depth `O(ε)` is expected
/// to empty; reported for reference only.
pub fn r_eps(eps: f64) -> f64 {
    libm::sqrt(-eps / libm::log(eps))
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

impl WashoutPoint {
    /// True when the sequence never increases by more than the intervals
    /// allow: each rise must leave the two intervals overlapping.
    pub fn monotone_within_ci(points: &[WashoutPoint]) -> bool {
        points.windows(2).all(|w| w[1].fraction <= w[0].fraction || w[1].ci.0 <= w[0].ci.1)
    }
}

fn side(v: f64) -> f64 {
    crate::expr::scalar::sign3(v)
}

#[allow(clippy::too_many_arguments)]
fn sticks(
    sys: &SwitchedSystem,
    x0: &[f64],
    sig: &Sigmoid,
    kappa: f64,
    seed: u64,
    steps: usize,
    dt: f64,
    rule: &StickRule,
) -> Result<bool, RegularizeError> {
    let band = rule.band * sig.eps;
    let dwell = rule.dwell * sig.eps;
    let mut g = Gaussian::new(seed);
    let mut x = x0.to_vec();
    let mut f = vec![0.0; x.len()];
    let amp = kappa * libm::sqrt(dt);
    let mut outside = side(sys.switching(&x)?);
    let mut entered: Option<(f64, usize)> = None;
    for k in 0..steps {
        let hv = sys.switching(&x)?;
        if hv.abs() < band {
            match entered {
                None => entered = Some((outside, k)),
                Some((_, k_in)) if (k - k_in) as f64 * dt > dwell => return Ok(true),
                _ => {}
            }
        } else {
            let s = side(hv);
            if let Some((from, _)) = entered.take() {
                if from != 0.0 && s != from {
                    return Ok(false);
                }
            }
            outside = s;
        }
        sys.assemble_into(&x, k as f64 * dt, sig.eval(hv), &mut f)?;
        for (xi, fi) in x.iter_mut().zip(&f) {
            *xi += dt * fi;
        }
        if kappa > 0.0 {
            for xi in x.iter_mut() {
                *xi += amp * g.sample();
            }
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(RegularizeError::NonFinite { t: (k + 1) as f64 * dt });
        }
    }
    Ok(false)
}

/// Stick fraction against noise amplitude. The system must have an
/// attracting sliding root at the surface point below `x0` that its
/// hidden-term-free reduction lacks.
pub fn washout_curve(
    sys: &SwitchedSystem,
    x0: &[f64],
    sig: &Sigmoid,
    kappas: &[f64],
    cfg: &WashoutConfig,
) -> Result<Vec<WashoutPoint>, RegularizeError> {
    let steps = check_span((0.0, cfg.horizon), cfg.substep)?;
    let dt = cfg.horizon / steps as f64;

    let mut probe = x0.to_vec();
    sys.project_to_surface(&mut probe)?;
    let hidden = layer::find_sliding_roots(sys, &probe, 0.0)?
        .iter()
        .any(|r| r.stability == Stability::Attracting);
    let linear = layer::filippov_root(sys, &probe, 0.0)?.is_some();
    if !hidden || linear {
        return Err(RegularizeError::NoHiddenSliding);
    }

    kappas
        .iter()
        .map(|&kappa| {
            if !(kappa >= 0.0 && kappa.is_finite()) {
                return Err(RegularizeError::Kappa(kappa));
            }
            let mut count = 0;
            for i in 0..cfg.runs {
                let seed = cfg.seed.wrapping_add(i as u64);
                if sticks(sys, x0, sig, kappa, seed, steps, dt, &cfg.rule)? {
                    count += 1;
                }
            }
            let fraction = if cfg.runs == 0 { 0.0 } else { count as f64 / cfg.runs as f64 };
            Ok(WashoutPoint { kappa, sticks: count, runs: cfg.runs, fraction, ci: wilson_interval(count, cfg.runs, 1.96) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 200, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.03);
        let (lo, hi) = wilson_interval(100, 200, 1.96);
        assert!((lo - 0.4314).abs() < 1e-3 && (hi - 0.5686).abs() < 1e-3, "{lo} {hi}");
    }

    #[test]
    fn r_eps_reference() {
        assert!((r_eps(1e-3) - 0.012).abs() < 5e-4);
    }

    #[test]
    fn requires_hidden_sliding() {
        let sys = SwitchedSystem::combined(2, "x1", &["1", "-lam"]).unwrap();
        let cfg = WashoutConfig { runs: 2, horizon: 0.1, substep: 1e-4, seed: 1, rule: StickRule::default() };
        let err = washout_curve(&sys, &[-0.01, 0.0], &Sigmoid::tanh(1e-3), &[0.0], &cfg).unwrap_err();
        assert_eq!(err, RegularizeError::NoHiddenSliding);
    }

    #[test]
    fn deterministic_sliding_sticks_and_strong_noise_washes_out() {
        let sys = SwitchedSystem::combined(2, "x1", &["2*lam^2 - 1", "-lam"]).unwrap();
        let cfg = WashoutConfig { runs: 20, horizon: 1.0, substep: 1e-5, seed: 5, rule: StickRule::default() };
        let pts = washout_curve(&sys, &[-0.01, 0.0], &Sigmoid::tanh(1e-3), &[0.0, 1.0], &cfg).unwrap();
        assert_eq!(pts[0].fraction, 1.0);
        assert_eq!(pts[1].fraction, 0.0);
        assert!(WashoutPoint::monotone_within_ci(&pts));
    }
}

//! Switching-layer analysis at a surface point.
//!
//! On `h(x) = 0` the multiplier obeys the fast subsystem `λ' = f₁(x, t; λ)`
//! with `f₁ = f·∇h`. Its zeros form the sliding manifold; where
//! `∂f₁/∂λ = 0` the manifold folds and normal hyperbolicity is lost.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::ExprError;
use crate::model::SwitchedSystem;

/// Uniform λ samples used to bracket roots.
pub const ROOT_GRID: usize = 257;
/// Roots are refined until `|f₁| ≤ ROOT_TOL_REL·scale`.
pub const ROOT_TOL_REL: f64 = 1e-12;
/// Roots closer than this are merged.
pub const ROOT_DEDUP: f64 = 1e-9;
/// `|∂f₁/∂λ| ≤ DEGENERACY_REL·scale` marks a point of the fold set.
pub const DEGENERACY_REL: f64 = 1e-8;
/// Drift flags a fold once `|∂f₁/∂λ|` drops below this fraction of scale.
pub const FOLD_WARN_REL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Attracting,
    Repelling,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlidingRoot {
    pub lam_star: f64,
    pub stability: Stability,
    pub df1_dlam: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PassageDecision {
    /// The fast flow traverses the whole layer and leaves on `exit_side`.
    Crossing { exit_side: f64 },
    Sliding { root: SlidingRoot },
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlideExit {
    BoundaryPlus,
    BoundaryMinus,
    Fold,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LayerError {
    #[error("flow is not incident from side {entry_side} (f1 = {f1:e})")]
    NotIncident { entry_side: f64, f1: f64 },
    #[error("stale sliding root: |f1(lam*)| = {residual:e}")]
    StaleRoot { residual: f64 },
    #[error("sliding root is degenerate (df1/dlam = {df1_dlam:e})")]
    DegenerateRoot { df1_dlam: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Magnitude reference for the layer tolerances at `(x, t)`:
/// `|∇h|·(1 + max |f|)` over `λ ∈ {-1, 0, 1}`.
pub fn layer_scale(sys: &SwitchedSystem, x: &[f64], t: f64) -> Result<f64, ExprError> {
    let grad = sys.grad_h(x)?;
    let gn = libm::sqrt(grad.iter().map(|g| g * g).sum::<f64>());
    let mut fmax: f64 = 0.0;
    let mut f = vec![0.0; sys.dim()];
    for lam in [-1.0, 0.0, 1.0] {
        sys.assemble_into(x, t, lam, &mut f)?;
        fmax = fmax.max(libm::sqrt(f.iter().map(|v| v * v).sum::<f64>()));
    }
    Ok(gn.max(1e-300) * (1.0 + fmax))
}

fn classify(df: f64, scale: f64) -> Stability {
    let thr = DEGENERACY_REL * scale;
    if df < -thr {
        Stability::Attracting
    } else if df > thr {
        Stability::Repelling
    } else {
        Stability::Degenerate
    }
}

/// Scalar function of λ with its derivative.
trait LamFn {
    fn eval(&self, lam: f64) -> Result<(f64, f64), ExprError>;
}

struct Normal<'a> {
    sys: &'a SwitchedSystem,
    x: &'a [f64],
    t: f64,
    grad: Vec<f64>,
}

impl LamFn for Normal<'_> {
    fn eval(&self, lam: f64) -> Result<(f64, f64), ExprError> {
        self.sys.normal_lam_slope_with(self.x, self.t, lam, &self.grad)
    }
}

/// Hybrid bisection/secant (Illinois) on a bracket with `fa·fb < 0`.
fn refine<F: LamFn>(f: &F, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, tol: f64) -> Result<f64, ExprError> {
    let mut side = 0i8;
    for it in 0..200 {
        // alternate a false-position step with plain bisection for robustness
        let mut m = if it % 3 == 2 { 0.5 * (a + b) } else { (a * fb - b * fa) / (fb - fa) };
        if !(m > a.min(b) && m < a.max(b)) {
            m = 0.5 * (a + b);
        }
        let (fm, _) = f.eval(m)?;
        // the residual test alone is loose near shallow roots, so the
        // bracket must also be tight
        let width = (b - a).abs();
        if fm == 0.0 || width <= 4.0 * f64::EPSILON * (1.0 + m.abs()) || (fm.abs() <= tol && width <= 1e-12) {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = m;
            fb = fm;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bisects on the slope to locate an interior extremum; `da·db < 0`.
fn extremum<F: LamFn>(f: &F, mut a: f64, mut da: f64, mut b: f64) -> Result<(f64, f64), ExprError> {
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        let (_, dm) = f.eval(m)?;
        if dm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if (dm < 0.0) == (da < 0.0) {
            a = m;
            da = dm;
        } else {
            b = m;
        }
    }
    let m = 0.5 * (a + b);
    Ok((m, f.eval(m)?.0))
}

#[derive(Clone, Copy)]
struct Node {
    lam: f64,
    f: f64,
    d: f64,
}

fn roots_in<F: LamFn>(f: &F, a: Node, b: Node, tol: f64, depth: u32, out: &mut Vec<f64>) -> Result<(), ExprError> {
    if a.f == 0.0 {
        out.push(a.lam);
    }
    if a.f * b.f < 0.0 {
        // with opposite slopes at both ends the interval may hide a root pair
        // around an interior extremum; otherwise a single bracket suffices
        if depth < 8 && a.d * b.d < 0.0 {
            let (m, fm) = extremum(f, a.lam, a.d, b.lam)?;
            let fm = if fm.abs() <= tol { 0.0 } else { fm };
            if m > a.lam && m < b.lam {
                let mid = Node { lam: m, f: fm, d: 0.0 };
                roots_in(f, a, Node { f: fm, ..mid }, tol, depth + 1, out)?;
                return roots_in(f, mid, b, tol, depth + 1, out);
            }
        }
        out.push(refine(f, a.lam, a.f, b.lam, b.f, tol)?);
        return Ok(());
    }
    if a.f != 0.0 && b.f != 0.0 && a.d * b.d < 0.0 && depth < 8 {
        // no sign change at the ends but an extremum inside: it may dip
        // through zero (two close roots) or touch it (tangency)
        let (m, fm) = extremum(f, a.lam, a.d, b.lam)?;
        if !(m > a.lam && m < b.lam) {
            return Ok(());
        }
        if fm.abs() <= tol {
            out.push(m);
        } else if (fm < 0.0) != (a.f < 0.0) {
            let mid = Node { lam: m, f: fm, d: 0.0 };
            roots_in(f, a, mid, tol, depth + 1, out)?;
            roots_in(f, mid, b, tol, depth + 1, out)?;
        }
    }
    Ok(())
}

fn find_roots<F: LamFn>(f: &F, scale: f64) -> Result<Vec<SlidingRoot>, ExprError> {
    let tol = ROOT_TOL_REL * scale;
    let nodes = (0..ROOT_GRID)
        .map(|i| {
            let lam = if i + 1 == ROOT_GRID { 1.0 } else { -1.0 + 2.0 * i as f64 / (ROOT_GRID - 1) as f64 };
            let (v, d) = f.eval(lam)?;
            Ok(Node { lam, f: if v.abs() <= tol { 0.0 } else { v }, d })
        })
        .collect::<Result<Vec<_>, ExprError>>()?;

    let mut raw = Vec::new();
    for w in nodes.windows(2) {
        roots_in(f, w[0], w[1], tol, 0, &mut raw)?;
    }
    let last = nodes[ROOT_GRID - 1];
    if last.f == 0.0 {
        raw.push(last.lam);
    }
    raw.sort_by(|a, b| a.total_cmp(b));
    raw.dedup_by(|b, a| (*b - *a).abs() <= ROOT_DEDUP);

    raw.into_iter()
        .map(|lam| {
            let (_, d) = f.eval(lam)?;
            Ok(SlidingRoot { lam_star: lam, stability: classify(d, scale), df1_dlam: d })
        })
        .collect()
}

/// All isolated zeros of `λ ↦ f₁(x, t; λ)` on `[-1, 1]`, ascending.
pub fn find_sliding_roots(sys: &SwitchedSystem, x: &[f64], t: f64) -> Result<Vec<SlidingRoot>, ExprError> {
    let scale = layer_scale(sys, x, t)?;
    let f = Normal { sys, x, t, grad: sys.grad_h(x)? };
    find_roots(&f, scale)
}

/// The sliding root of the linear (hidden-term-free) combination, if the
/// one-sided normal components have opposite signs.
pub fn filippov_root(sys: &SwitchedSystem, x: &[f64], t: f64) -> Result<Option<SlidingRoot>, ExprError> {
    let p = sys.normal_component(x, t, 1.0)?;
    let m = sys.normal_component(x, t, -1.0)?;
    if p * m >= 0.0 {
        return Ok(None);
    }
    let lam_star = (p + m) / (m - p);
    let d = 0.5 * (p - m);
    let scale = layer_scale(sys, x, t)?;
    Ok(Some(SlidingRoot { lam_star, stability: classify(d, scale), df1_dlam: d }))
}

/// Traces the fast subsystem from `λ = entry_side` in its direction of
/// travel and reports whether it is captured by a sliding root.
pub fn decide_passage(
    sys: &SwitchedSystem,
    x: &[f64],
    t: f64,
    entry_side: f64,
) -> Result<PassageDecision, LayerError> {
    let scale = layer_scale(sys, x, t)?;
    let f1 = sys.normal_component(x, t, entry_side)?;
    if f1.abs() <= ROOT_TOL_REL * scale * 1e3 {
        return Ok(PassageDecision::Degenerate);
    }
    if f1 * entry_side > 0.0 {
        return Err(LayerError::NotIncident { entry_side, f1 });
    }
    let roots = find_sliding_roots(sys, x, t)?;
    Ok(trace(&roots, entry_side, -entry_side, None))
}

/// Fast-flow tracing from `start` moving in `dir`, ignoring roots within
/// `skip` of the start.
fn trace(roots: &[SlidingRoot], start: f64, dir: f64, skip: Option<f64>) -> PassageDecision {
    let ahead = |r: &&SlidingRoot| {
        let gap = (r.lam_star - start) * dir;
        match skip {
            Some(s) => gap > s,
            None => gap >= 0.0,
        }
    };
    let first = if dir < 0.0 {
        roots.iter().rev().find(ahead)
    } else {
        roots.iter().find(ahead)
    };
    match first {
        None => PassageDecision::Crossing { exit_side: dir },
        Some(r) if r.stability == Stability::Attracting => PassageDecision::Sliding { root: *r },
        // a repelling root ahead cannot be reached by a flow heading into it
        // from the entry side; only degenerate (touching) roots stop it
        Some(_) => PassageDecision::Degenerate,
    }
}

/// Where the fast flow goes after the sliding root at `lam_fold` has been
/// lost. `dir` is the direction λ* was drifting: the attracting root meets
/// its repelling partner on that side, and once the pair annihilates `f₁`
/// has the sign of `dir` around the fold, so the fast flow carries on that
/// way. Roots within a small gap of the fold (the dying pair) are skipped.
pub fn decide_after_fold(
    sys: &SwitchedSystem,
    x: &[f64],
    t: f64,
    lam_fold: f64,
    dir: f64,
) -> Result<PassageDecision, LayerError> {
    const GAP: f64 = 1e-3;
    let roots = find_sliding_roots(sys, x, t)?;
    Ok(trace(&roots, lam_fold, dir.signum(), Some(GAP)))
}

/// Velocity on the surface with the normal component projected out,
/// `f − (f₁/|∇h|²)∇h` at `λ*`.
pub fn sliding_field(
    sys: &SwitchedSystem,
    x: &[f64],
    t: f64,
    root: &SlidingRoot,
) -> Result<Vec<f64>, LayerError> {
    let mut v = vec![0.0; sys.dim()];
    let mut grad = vec![0.0; sys.dim()];
    sliding_field_into(sys, x, t, root.lam_star, &mut v, &mut grad)?;
    let f1: f64 = sys.normal_component(x, t, root.lam_star)?;
    let scale = layer_scale(sys, x, t)?;
    if f1.abs() > 1e-8 * scale {
        return Err(LayerError::StaleRoot { residual: f1.abs() });
    }
    Ok(v)
}

/// Allocation-free projection used by the integrator; no staleness check.
pub(crate) fn sliding_field_into(
    sys: &SwitchedSystem,
    x: &[f64],
    t: f64,
    lam: f64,
    v: &mut [f64],
    grad: &mut [f64],
) -> Result<(), ExprError> {
    sys.assemble_into(x, t, lam, v)?;
    sys.grad_h_into(x, grad)?;
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    let f1: f64 = v.iter().zip(grad.iter()).map(|(a, b)| a * b).sum();
    if g2 > 0.0 {
        for (vi, gi) in v.iter_mut().zip(grad.iter()) {
            *vi -= f1 / g2 * gi;
        }
    }
    Ok(())
}

/// Rate of change of `λ*` along the sliding flow and any imminent exit.
pub fn sliding_drift(
    sys: &SwitchedSystem,
    x: &[f64],
    t: f64,
    root: &SlidingRoot,
) -> Result<(f64, Option<SlideExit>), LayerError> {
    let scale = layer_scale(sys, x, t)?;
    let (_, slope) = sys.normal_lam_slope(x, t, root.lam_star)?;
    if slope.abs() <= DEGENERACY_REL * scale {
        return Err(LayerError::DegenerateRoot { df1_dlam: slope });
    }
    let v = sliding_field(sys, x, t, root)?;
    let (_, df) = sys.normal_directional(x, t, root.lam_star, &v, 1.0)?;
    let rate = -df / slope;
    let exit = if slope.abs() <= FOLD_WARN_REL * scale {
        Some(SlideExit::Fold)
    } else if root.lam_star >= 1.0 - ROOT_DEDUP && rate > 0.0 {
        Some(SlideExit::BoundaryPlus)
    } else if root.lam_star <= -1.0 + ROOT_DEDUP && rate < 0.0 {
        Some(SlideExit::BoundaryMinus)
    } else {
        None
    };
    Ok((rate, exit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::SQRT_2;

    fn sys(f: &[&str]) -> SwitchedSystem {
        SwitchedSystem::combined(f.len(), "x1", f).unwrap()
    }

    #[test]
    fn example_roots() {
        let r = find_sliding_roots(&sys(&["-lam", "2*lam^2 - 1"]), &[0.0, 0.0], 0.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].lam_star.abs() < 1e-12);
        assert_eq!(r[0].stability, Stability::Attracting);
        assert_eq!(r[0].df1_dlam, -1.0);

        let r = find_sliding_roots(&sys(&["2*lam^2 - 1", "-lam"]), &[0.0, 0.0], 0.0).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].lam_star + 1.0 / SQRT_2).abs() < 1e-12);
        assert!((r[1].lam_star - 1.0 / SQRT_2).abs() < 1e-12);
        assert_eq!(r[0].stability, Stability::Attracting);
        assert_eq!(r[1].stability, Stability::Repelling);

        assert!(find_sliding_roots(&sys(&["1", "-lam"]), &[0.0, 0.0], 0.0).unwrap().is_empty());
    }

    #[test]
    fn close_root_pair_inside_one_grid_cell() {
        // roots at 0.3 and 0.3 + 1e-4, both inside a single grid interval
        let s = sys(&["(lam - 0.3)*(lam - 0.3001)"]);
        let r = find_sliding_roots(&s, &[0.0], 0.0).unwrap();
        assert_eq!(r.len(), 2, "{r:?}");
        assert!((r[0].lam_star - 0.3).abs() < 1e-10);
        assert!((r[1].lam_star - 0.3001).abs() < 1e-10);
    }

    #[test]
    fn roots_at_the_interval_ends() {
        let s = sys(&["lam^2 - 1"]);
        let r = find_sliding_roots(&s, &[0.0], 0.0).unwrap();
        let l: Vec<f64> = r.iter().map(|r| r.lam_star).collect();
        assert_eq!(l, vec![-1.0, 1.0]);
    }

    #[test]
    fn filippov_root_examples() {
        let s = SwitchedSystem::split(1, "x1", &["-1"], &["1"], &["0"]).unwrap();
        assert_eq!(filippov_root(&s, &[0.0], 0.0).unwrap().unwrap().lam_star, 0.0);
        let s = SwitchedSystem::split(1, "x1", &["1"], &["1"], &["0"]).unwrap();
        assert!(filippov_root(&s, &[0.0], 0.0).unwrap().is_none());
        let s = SwitchedSystem::split(1, "x1", &["-1"], &["3"], &["0"]).unwrap();
        assert_eq!(filippov_root(&s, &[0.0], 0.0).unwrap().unwrap().lam_star, 0.5);
    }

    #[test]
    fn passage_examples() {
        let d = decide_passage(&sys(&["-lam", "2*lam^2 - 1"]), &[0.0, 0.0], 0.0, 1.0).unwrap();
        assert!(matches!(d, PassageDecision::Sliding { root } if root.lam_star.abs() < 1e-12));

        let d = decide_passage(&sys(&["1", "-lam"]), &[0.0, 0.0], 0.0, -1.0).unwrap();
        assert_eq!(d, PassageDecision::Crossing { exit_side: 1.0 });

        let d = decide_passage(&sys(&["2*lam^2 - 1", "-lam"]), &[0.0, 0.0], 0.0, -1.0).unwrap();
        match d {
            PassageDecision::Sliding { root } => assert!((root.lam_star + 1.0 / SQRT_2).abs() < 1e-12),
            other => panic!("{other:?}"),
        }

        let err = decide_passage(&sys(&["1", "-lam"]), &[0.0, 0.0], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, LayerError::NotIncident { .. }));
    }

    #[test]
    fn tangent_entry_is_degenerate() {
        let d = decide_passage(&sys(&["lam - 1"]), &[0.0], 0.0, 1.0).unwrap();
        assert_eq!(d, PassageDecision::Degenerate);
    }

    #[test]
    fn sliding_fields() {
        let cases: [(&[&str], f64, f64); 3] = [
            (&["-lam", "2*lam^2 - 1"], 0.0, -1.0),
            (&["-lam", "1"], 0.0, 1.0),
            (&["2*lam^2 - 1", "-lam"], -1.0 / SQRT_2, 1.0 / SQRT_2),
        ];
        for (f, lam, vx2) in cases {
            let s = sys(f);
            let root = find_sliding_roots(&s, &[0.0, 0.0], 0.0)
                .unwrap()
                .into_iter()
                .find(|r| (r.lam_star - lam).abs() < 1e-9)
                .unwrap();
            let v = sliding_field(&s, &[0.0, 0.0], 0.0, &root).unwrap();
            assert!(v[0].abs() < 1e-15);
            assert!((v[1] - vx2).abs() < 1e-12, "{f:?}: {v:?}");
        }
    }

    #[test]
    fn stale_root_is_rejected() {
        let s = sys(&["-lam", "1"]);
        let root = SlidingRoot { lam_star: 0.5, stability: Stability::Attracting, df1_dlam: -1.0 };
        assert!(matches!(sliding_field(&s, &[0.0, 0.0], 0.0, &root), Err(LayerError::StaleRoot { .. })));
    }

    #[test]
    fn drift_examples() {
        let s = sys(&["-lam", "2*lam^2 - 1"]);
        let root = find_sliding_roots(&s, &[0.0, 3.0], 0.0).unwrap()[0];
        assert_eq!(sliding_drift(&s, &[0.0, 3.0], 0.0, &root).unwrap(), (0.0, None));

        // on x2/10 + lam - 2 lam^3 = 0 with x2' = -lam:
        // dlam/dt = lam / (10 (1 - 6 lam^2))
        let vdp = sys(&["x2/10 + lam - 2*lam^3", "-lam"]);
        let lam: f64 = 0.2;
        let x2 = -10.0 * (lam - 2.0 * lam * lam * lam);
        let root = find_sliding_roots(&vdp, &[0.0, x2], 0.0)
            .unwrap()
            .into_iter()
            .find(|r| (r.lam_star - lam).abs() < 1e-9)
            .unwrap();
        let (rate, exit) = sliding_drift(&vdp, &[0.0, x2], 0.0, &root).unwrap();
        let expect = lam / (10.0 * (1.0 - 6.0 * lam * lam));
        assert!((rate - expect).abs() < 1e-12, "{rate} vs {expect}");
        assert_eq!(exit, None);

        let lf = 1.0 / libm::sqrt(6.0) - 1e-8;
        let x2 = -10.0 * (lf - 2.0 * lf * lf * lf);
        let root = SlidingRoot { lam_star: lf, stability: Stability::Attracting, df1_dlam: 0.0 };
        let (_, exit) = sliding_drift(&vdp, &[0.0, x2], 0.0, &root).unwrap();
        assert_eq!(exit, Some(SlideExit::Fold));
    }

    #[test]
    fn time_dependent_layer_drifts() {
        // forced oscillator layer: f1 = x2 at the surface plus a λ-dependent
        // sine forcing in x2; the root moves because ∂f1/∂t ≠ 0
        let s = sys(&["x2 - lam", "-0.01*x1 - lam + sin((1 + lam/2)*pi*t)"]);
        let (x, t) = ([0.0, 0.3], 0.7);
        let root = find_sliding_roots(&s, &x, t).unwrap()[0];
        let (rate, _) = sliding_drift(&s, &x, t, &root).unwrap();
        assert!(rate.abs() > 1e-3, "{rate}");
    }

    #[test]
    fn fold_continuation_jumps_to_lower_branch() {
        let vdp = sys(&["x2/10 + lam - 2*lam^3", "-lam"]);
        let lf = 1.0 / libm::sqrt(6.0);
        let x2 = -10.0 * (lf - 2.0 * lf * lf * lf);
        let d = decide_after_fold(&vdp, &[0.0, x2], 0.0, lf, -1.0).unwrap();
        match d {
            PassageDecision::Sliding { root } => {
                assert!((root.lam_star + 2.0 / libm::sqrt(6.0)).abs() < 1e-7, "{root:?}")
            }
            other => panic!("{other:?}"),
        }
    }
}

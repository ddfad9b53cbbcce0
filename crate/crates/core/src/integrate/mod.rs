//! Event-driven integration of the piecewise-smooth system.
//!
//! Off the surface the one-sided field `f(x, t; ±1)` is integrated and the
//! sign of `h` is monitored. At a hit the layer analysis decides between
//! crossing and sliding; sliding is integrated as an index-1 problem with
//! `λ*` re-solved by Newton at every stage and `x` projected back onto
//! `h = 0` after every step.

mod rk;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::ExprError;
use crate::layer::{self, LayerError, PassageDecision, SlidingRoot, DEGENERACY_REL};
use crate::model::SwitchedSystem;
use rk::Workspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4; initial and maximum step for RK45.
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Event location stops once `|h| ≤ event_tol`.
    pub event_tol: f64,
    pub max_events: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45Adaptive,
            step: 0.01,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            event_tol: 1e-10,
            max_events: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrateError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.step) && ok(self.rel_tol) && ok(self.abs_tol) && ok(self.event_tol)) {
            return Err(IntegrateError::Config("steps and tolerances must be positive and finite"));
        }
        if self.max_events == 0 {
            return Err(IntegrateError::Config("max_events must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    FreePlus,
    FreeMinus,
    Sliding,
    InLayerTransit,
}

impl Mode {
    pub fn free(side: f64) -> Mode {
        if side > 0.0 {
            Mode::FreePlus
        } else {
            Mode::FreeMinus
        }
    }

    /// Short label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Mode::FreePlus => "free+",
            Mode::FreeMinus => "free-",
            Mode::Sliding => "sliding",
            Mode::InLayerTransit => "transit",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    SurfaceHit,
    CrossExit,
    SlideStart,
    SlideEndBoundary,
    SlideEndFold,
    DegenerateHalt,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::SurfaceHit => "surface_hit",
            EventKind::CrossExit => "cross_exit",
            EventKind::SlideStart => "slide_start",
            EventKind::SlideEndBoundary => "slide_end_boundary",
            EventKind::SlideEndFold => "slide_end_fold",
            EventKind::DegenerateHalt => "degenerate_halt",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub lam: f64,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn new() -> Self {
        Trajectory::default()
    }

    /// Appends a sample; a sample at the time of the last one replaces it.
    pub fn push(&mut self, s: Sample) {
        if let Some(last) = self.samples.last_mut() {
            debug_assert!(s.t >= last.t, "samples must be time-ordered");
            if s.t == last.t {
                *last = s;
                return;
            }
        }
        self.samples.push(s);
    }

    pub fn event(&mut self, t: f64, kind: EventKind) {
        self.events.push(Event { t, kind });
    }

    pub fn extend(&mut self, other: Trajectory) {
        for s in other.samples {
            self.push(s);
        }
        self.events.extend(other.events);
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Modes in order of appearance with consecutive repeats collapsed.
    pub fn mode_sequence(&self) -> Vec<Mode> {
        let mut out: Vec<Mode> = Vec::new();
        for s in &self.samples {
            if out.last() != Some(&s.mode) {
                out.push(s.mode);
            }
        }
        out
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

/// Located surface point at the end of a free segment.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceHit {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlideEnd {
    BoundaryPlus,
    BoundaryMinus,
    Fold,
    Horizon,
    /// Newton lost `λ*` away from a fold or boundary.
    Lost,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    Config(&'static str),
    #[error("initial state is not on side {side} (h = {h:e})")]
    WrongSide { side: f64, h: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Layer(#[from] LayerError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// End of the time interval, with round-off snapping.
fn remaining(t: f64, t_end: f64) -> f64 {
    let r = t_end - t;
    if r <= 1e-14 * (1.0 + t_end.abs()) {
        0.0
    } else {
        r
    }
}

/// Takes one accepted step of at most `h_try` and returns `(h_used, h_next)`.
/// RK4 always uses `h_try`; RK45 shrinks it until the error test passes.
fn controlled_step<E2, F>(
    ws: &mut Workspace,
    cfg: &IntegratorConfig,
    f: &mut F,
    t: f64,
    x: &[f64],
    h_try: f64,
    out: &mut [f64],
) -> Result<Result<(f64, f64), E2>, IntegrateError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E2>,
{
    match cfg.method {
        Method::Rk4Fixed => Ok(ws.rk4(f, t, x, h_try, out).map(|()| (h_try, cfg.step))),
        Method::Rk45Adaptive => {
            let mut h = h_try;
            loop {
                if let Err(e) = ws.dopri(f, t, x, h, out) {
                    return Ok(Err(e));
                }
                let err = rk::error_norm(x, out, &ws.err, cfg.rel_tol, cfg.abs_tol);
                if err <= 1.0 && finite(out) {
                    let next = (h * rk::step_factor(err)).min(cfg.step);
                    return Ok(Ok((h, next)));
                }
                h *= if err.is_finite() { rk::step_factor(err).min(0.9) } else { 0.2 };
                if h < 1e-14 * (1.0 + t.abs()) {
                    return Err(IntegrateError::StepUnderflow { t });
                }
            }
        }
    }
}

/// Flow of `ẋ = f(x, t; side)` from `(t0, x0)` until `h` changes sign or
/// `t_end` is reached. The returned hit lies on the starting side with
/// `|h| ≤ event_tol`.
pub fn integrate_free(
    sys: &SwitchedSystem,
    x0: &[f64],
    t0: f64,
    t_end: f64,
    side: f64,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory, Option<SurfaceHit>), IntegrateError> {
    cfg.validate()?;
    let h0 = sys.switching(x0)?;
    if h0 * side <= 0.0 {
        return Err(IntegrateError::WrongSide { side, h: h0 });
    }
    let n = sys.dim();
    let mode = Mode::free(side);
    let mut f = |t: f64, x: &[f64], out: &mut [f64]| sys.assemble_into(x, t, side, out);
    let mut ws = Workspace::new(n);
    let mut traj = Trajectory::new();
    let (mut t, mut x) = (t0, x0.to_vec());
    let mut xn = vec![0.0; n];
    let mut h_next = cfg.step;
    traj.push(Sample { t, x: x.clone(), lam: side, mode });

    loop {
        let rem = remaining(t, t_end);
        if rem == 0.0 {
            return Ok((traj, None));
        }
        let h_try = h_next.min(rem);
        let (h, next) = controlled_step(&mut ws, cfg, &mut f, t, &x, h_try, &mut xn)??;
        h_next = next;
        if !finite(&xn) {
            return Err(IntegrateError::NonFinite { t: t + h });
        }
        let hv = sys.switching(&xn)?;
        if hv * side <= 0.0 {
            let (tau, xs) = locate_crossing(sys, &mut ws, cfg.method, &mut f, t, &x, h, side, cfg.event_tol)?;
            let hit = SurfaceHit { t: t + tau, x: xs };
            traj.push(Sample { t: hit.t, x: hit.x.clone(), lam: side, mode });
            return Ok((traj, Some(hit)));
        }
        t = if h == rem || remaining(t + h, t_end) == 0.0 { t_end } else { t + h };
        core::mem::swap(&mut x, &mut xn);
        traj.push(Sample { t, x: x.clone(), lam: side, mode });
    }
}

/// Bisects the step length on the sign of `h`, then polishes by secant.
/// Keeps the bracket end on the starting side and returns it.
#[allow(clippy::too_many_arguments)]
fn locate_crossing<F>(
    sys: &SwitchedSystem,
    ws: &mut Workspace,
    method: Method,
    f: &mut F,
    t: f64,
    x: &[f64],
    h: f64,
    side: f64,
    tol: f64,
) -> Result<(f64, Vec<f64>), IntegrateError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), ExprError>,
{
    let mut xs = vec![0.0; x.len()];
    let (mut lo, mut glo) = (0.0, sys.switching(x)?);
    let mut x_lo = x.to_vec();
    let (mut hi, mut ghi) = (h, f64::NAN);
    let mut probe = |tau: f64, xs: &mut Vec<f64>, ws: &mut Workspace| -> Result<f64, IntegrateError> {
        ws.step(method, f, t, x, tau, xs)?;
        Ok(sys.switching(xs)?)
    };
    let mut it = 0;
    while glo.abs() > tol && it < 30 {
        let mid = 0.5 * (lo + hi);
        let g = probe(mid, &mut xs, ws)?;
        if g * side > 0.0 {
            lo = mid;
            glo = g;
            x_lo.copy_from_slice(&xs);
        } else {
            hi = mid;
            ghi = g;
        }
        it += 1;
    }
    if ghi.is_nan() {
        ghi = probe(hi, &mut xs, ws)?;
    }
    let mut polish = 0;
    while glo.abs() > tol && polish < 20 && ghi != glo {
        let mut m = lo + (hi - lo) * glo / (glo - ghi);
        if !(m > lo && m < hi) {
            m = 0.5 * (lo + hi);
        }
        let g = probe(m, &mut xs, ws)?;
        if g * side > 0.0 {
            lo = m;
            glo = g;
            x_lo.copy_from_slice(&xs);
        } else {
            hi = m;
            ghi = g;
        }
        polish += 1;
    }
    Ok((lo, x_lo))
}

/// Newton solve of `f₁(x, t; λ) = 0` from `guess`. Returns `None` when the
/// branch is lost: no convergence, a jump of more than `MAX_JUMP`, or a
/// slope that changed sign or became degenerate.
fn solve_lam(
    sys: &SwitchedSystem,
    x: &[f64],
    t: f64,
    guess: f64,
    slope_sign: f64,
    scale: f64,
) -> Result<Option<(f64, f64)>, ExprError> {
    const MAX_JUMP: f64 = 0.1;
    let thr = DEGENERACY_REL * scale;
    let mut lam = guess;
    // near a fold the root is almost double and Newton converges only
    // linearly at first, hence the generous iteration cap
    for _ in 0..80 {
        let (f1, d) = sys.normal_lam_slope(x, t, lam)?;
        if d * slope_sign <= thr || !f1.is_finite() {
            return Ok(None);
        }
        let dl = f1 / d;
        lam -= dl;
        if (lam - guess).abs() > MAX_JUMP {
            return Ok(None);
        }
        if dl.abs() <= 1e-15 * (1.0 + lam.abs()) || f1.abs() <= 1e-14 * scale {
            let (f1, d) = sys.normal_lam_slope(x, t, lam)?;
            if d * slope_sign <= thr {
                return Ok(None);
            }
            // one more correction keeps the residual at round-off level
            let lam = lam - f1 / d;
            return Ok(Some((lam, d)));
        }
    }
    Ok(None)
}

enum Stage {
    Expr(ExprError),
    Lost,
}

impl From<ExprError> for Stage {
    fn from(e: ExprError) -> Self {
        Stage::Expr(e)
    }
}

/// Outcome of a trial sliding step.
enum Trial {
    /// Stayed on the branch with `λ* ∈ [-1, 1]`.
    Good { lam: f64 },
    Beyond { lam: f64 },
    Lost,
}

struct SlideStepper<'a> {
    sys: &'a SwitchedSystem,
    cfg: &'a IntegratorConfig,
    ws: Workspace,
    grad: Vec<f64>,
    slope_sign: f64,
}

impl SlideStepper<'_> {
    fn rhs_with<'s>(
        sys: &'s SwitchedSystem,
        grad: &'s mut [f64],
        seed: f64,
        slope_sign: f64,
        scale: f64,
    ) -> impl FnMut(f64, &[f64], &mut [f64]) -> Result<(), Stage> + 's {
        move |t, x, out| {
            let (lam, _) = solve_lam(sys, x, t, seed, slope_sign, scale)?.ok_or(Stage::Lost)?;
            layer::sliding_field_into(sys, x, t, lam, out, grad)?;
            Ok(())
        }
    }

    /// Finishes a step: projects onto the surface and re-solves `λ*`.
    fn settle(&self, t: f64, x: &mut [f64], seed: f64, scale: f64) -> Result<Trial, IntegrateError> {
        self.sys.project_to_surface(x)?;
        Ok(match solve_lam(self.sys, x, t, seed, self.slope_sign, scale)? {
            Some((lam, _)) if (-1.0..=1.0).contains(&lam) => Trial::Good { lam },
            Some((lam, _)) => Trial::Beyond { lam },
            None => Trial::Lost,
        })
    }

    /// Trial step of length `tau`. With `euler` set, a single explicit
    /// Euler stage is used, which never samples the field beyond the end
    /// point and so can approach a fold arbitrarily closely.
    #[allow(clippy::too_many_arguments)]
    fn trial(
        &mut self,
        t: f64,
        x: &[f64],
        lam: f64,
        tau: f64,
        scale: f64,
        euler: bool,
        out: &mut [f64],
    ) -> Result<Trial, IntegrateError> {
        let stepped = {
            let mut f = Self::rhs_with(self.sys, &mut self.grad, lam, self.slope_sign, scale);
            if euler {
                f(t, x, out).map(|()| {
                    for (o, xi) in out.iter_mut().zip(x) {
                        *o = xi + tau * *o;
                    }
                })
            } else {
                self.ws.step(self.cfg.method, &mut f, t, x, tau, out)
            }
        };
        match stepped {
            Ok(()) => {}
            Err(Stage::Lost) => return Ok(Trial::Lost),
            Err(Stage::Expr(e)) => return Err(e.into()),
        }
        if !finite(out) {
            return Ok(Trial::Lost);
        }
        self.settle(t + tau, out, lam, scale)
    }
}

/// Sliding flow from a valid root at `(t0, x0)` until `λ*` leaves
/// `[-1, 1]`, the branch folds, or `t_end` is reached.
pub fn integrate_sliding(
    sys: &SwitchedSystem,
    x0: &[f64],
    t0: f64,
    t_end: f64,
    root0: &SlidingRoot,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory, SlideEnd), IntegrateError> {
    cfg.validate()?;
    let n = sys.dim();
    let mut x = x0.to_vec();
    let mut t = t0;
    let scale0 = layer::layer_scale(sys, &x, t)?;
    let (f1, d) = sys.normal_lam_slope(&x, t, root0.lam_star)?;
    if d.abs() <= DEGENERACY_REL * scale0 {
        return Err(LayerError::DegenerateRoot { df1_dlam: d }.into());
    }
    if f1.abs() > 1e-8 * scale0 {
        return Err(LayerError::StaleRoot { residual: f1.abs() }.into());
    }
    let mut st = SlideStepper { sys, cfg, ws: Workspace::new(n), grad: vec![0.0; n], slope_sign: d.signum() };
    let mut lam = match solve_lam(sys, &x, t, root0.lam_star, st.slope_sign, scale0)? {
        Some((l, _)) => l.clamp(-1.0, 1.0),
        None => root0.lam_star,
    };

    let mut traj = Trajectory::new();
    traj.push(Sample { t, x: x.clone(), lam, mode: Mode::Sliding });
    let mut xn = vec![0.0; n];
    let mut h_next = cfg.step;

    loop {
        let rem = remaining(t, t_end);
        if rem == 0.0 {
            return Ok((traj, SlideEnd::Horizon));
        }
        let scale = layer::layer_scale(sys, &x, t)?;
        let h_try = h_next.min(rem);
        let step = {
            let mut f = SlideStepper::rhs_with(sys, &mut st.grad, lam, st.slope_sign, scale);
            controlled_step(&mut st.ws, cfg, &mut f, t, &x, h_try, &mut xn)?
        };
        let outcome = match step {
            Ok((h, next)) => {
                h_next = next;
                if finite(&xn) {
                    (h, st.settle(t + h, &mut xn, lam, scale)?)
                } else {
                    (h, Trial::Lost)
                }
            }
            Err(Stage::Lost) => (h_try, Trial::Lost),
            Err(Stage::Expr(e)) => return Err(e.into()),
        };
        match outcome {
            (h, Trial::Good { lam: l }) => {
                t = if h == rem || remaining(t + h, t_end) == 0.0 { t_end } else { t + h };
                core::mem::swap(&mut x, &mut xn);
                lam = l;
                traj.push(Sample { t, x: x.clone(), lam, mode: Mode::Sliding });
            }
            (h, bad) => {
                // the branch ends inside this step: bisect the step length,
                // first with the configured scheme, then with Euler from the
                // last good point since intermediate stages may overshoot
                let (mut lo, mut hi) = (0.0, h);
                let mut x_lo = x.clone();
                let mut lam_lo = lam;
                let mut last_bad = bad;
                let tol = 1e-13 * (1.0 + t.abs());
                for euler in [false, true] {
                    let (t_base, x_base, lam_base) = (t + lo, x_lo.clone(), lam_lo);
                    let (mut a, mut b) = (0.0, hi - lo);
                    if euler {
                        b = h;
                    }
                    let mut it = 0;
                    while b - a > tol && it < 64 {
                        let mid = 0.5 * (a + b);
                        match st.trial(t_base, &x_base, lam_base, mid, scale, euler, &mut xn)? {
                            Trial::Good { lam: l } => {
                                a = mid;
                                lam_lo = l;
                                x_lo.copy_from_slice(&xn);
                            }
                            other => {
                                b = mid;
                                last_bad = other;
                            }
                        }
                        it += 1;
                    }
                    hi = lo + b;
                    lo += a;
                }
                let t_exit = t + lo;
                traj.push(Sample { t: t_exit, x: x_lo.clone(), lam: lam_lo, mode: Mode::Sliding });
                let end = match last_bad {
                    Trial::Beyond { lam: l } if l > 1.0 => SlideEnd::BoundaryPlus,
                    Trial::Beyond { .. } => SlideEnd::BoundaryMinus,
                    _ => {
                        let sc = layer::layer_scale(sys, &x_lo, t_exit)?;
                        let (_, d) = sys.normal_lam_slope(&x_lo, t_exit, lam_lo)?;
                        if d.abs() <= FOLD_DECLARE_REL * sc {
                            SlideEnd::Fold
                        } else {
                            SlideEnd::Lost
                        }
                    }
                };
                return Ok((traj, end));
            }
        }
    }
}

/// Root loss with `|∂f₁/∂λ|` below this fraction of scale counts as a fold.
const FOLD_DECLARE_REL: f64 = 1e-3;

/// Steps off the surface into `side` with the one-sided field until
/// `side·h > event_tol`. `None` if the flow turns back to the surface.
fn depart(
    sys: &SwitchedSystem,
    x: &[f64],
    t: f64,
    side: f64,
    cfg: &IntegratorConfig,
) -> Result<Option<(f64, Vec<f64>)>, IntegrateError> {
    let n = sys.dim();
    let mut ws = Workspace::new(n);
    let mut f = |t: f64, x: &[f64], out: &mut [f64]| sys.assemble_into(x, t, side, out);
    let f1 = sys.normal_component(x, t, side)?;
    let mut tau = if f1 * side > 0.0 { 2.0 * cfg.event_tol / f1.abs() } else { 1e-8 };
    tau = tau.max(4.0 * f64::EPSILON * (1.0 + t.abs()));
    let mut out = vec![0.0; n];
    for _ in 0..60 {
        ws.rk4(&mut f, t, x, tau, &mut out)?;
        let hv = sys.switching(&out)? * side;
        if hv > cfg.event_tol {
            return Ok(Some((t + tau, out)));
        }
        if hv < -cfg.event_tol || tau > cfg.step {
            return Ok(None);
        }
        tau *= 2.0;
    }
    Ok(None)
}

/// Full piecewise-smooth simulation over `[t0, t1]`.
pub fn simulate(
    sys: &SwitchedSystem,
    x0: &[f64],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    let (t0, t1) = t_span;
    let mut traj = Trajectory::new();

    enum Next {
        Free { t: f64, x: Vec<f64>, side: f64 },
        Slide { t: f64, x: Vec<f64>, root: SlidingRoot },
        Decide { t: f64, x: Vec<f64>, decision: PassageDecision },
        Halt,
    }

    let h0 = sys.switching(x0)?;
    let mut next = if h0.abs() > sys.surface_tolerance(x0) {
        Next::Free { t: t0, x: x0.to_vec(), side: h0.signum() }
    } else {
        let p = sys.normal_component(x0, t0, 1.0)?;
        let m = sys.normal_component(x0, t0, -1.0)?;
        let decision = if p > 0.0 && m > 0.0 {
            PassageDecision::Crossing { exit_side: 1.0 }
        } else if p < 0.0 && m < 0.0 {
            PassageDecision::Crossing { exit_side: -1.0 }
        } else if p < 0.0 && m > 0.0 {
            layer::decide_passage(sys, x0, t0, 1.0)?
        } else {
            PassageDecision::Degenerate
        };
        Next::Decide { t: t0, x: x0.to_vec(), decision }
    };

    loop {
        if traj.events.len() >= cfg.max_events {
            return Ok(traj);
        }
        next = match next {
            Next::Halt => return Ok(traj),
            Next::Free { t, x, side } => {
                let (seg, hit) = integrate_free(sys, &x, t, t1, side, cfg)?;
                traj.extend(seg);
                match hit {
                    None => Next::Halt,
                    Some(hit) => {
                        traj.event(hit.t, EventKind::SurfaceHit);
                        let decision = layer::decide_passage(sys, &hit.x, hit.t, side)?;
                        Next::Decide { t: hit.t, x: hit.x, decision }
                    }
                }
            }
            Next::Decide { t, mut x, decision } => match decision {
                PassageDecision::Crossing { exit_side } => {
                    traj.event(t, EventKind::CrossExit);
                    match depart(sys, &x, t, exit_side, cfg)? {
                        Some((t, x)) => Next::Free { t, x, side: exit_side },
                        None => {
                            traj.event(t, EventKind::DegenerateHalt);
                            Next::Halt
                        }
                    }
                }
                PassageDecision::Sliding { root } => {
                    sys.project_to_surface(&mut x)?;
                    traj.event(t, EventKind::SlideStart);
                    Next::Slide { t, x, root }
                }
                PassageDecision::Degenerate => {
                    traj.event(t, EventKind::DegenerateHalt);
                    Next::Halt
                }
            },
            Next::Slide { t, x, root } => {
                let (seg, end) = integrate_sliding(sys, &x, t, t1, &root, cfg)?;
                let prev_lam = seg.samples.iter().rev().nth(1).map(|s| s.lam);
                traj.extend(seg);
                let last = traj.last().expect("sliding segment has samples").clone();
                match end {
                    SlideEnd::Horizon => Next::Halt,
                    SlideEnd::BoundaryPlus | SlideEnd::BoundaryMinus => {
                        traj.event(last.t, EventKind::SlideEndBoundary);
                        let side = if end == SlideEnd::BoundaryPlus { 1.0 } else { -1.0 };
                        match depart(sys, &last.x, last.t, side, cfg)? {
                            Some((t, x)) => Next::Free { t, x, side },
                            None => {
                                traj.event(last.t, EventKind::DegenerateHalt);
                                Next::Halt
                            }
                        }
                    }
                    SlideEnd::Fold => {
                        traj.event(last.t, EventKind::SlideEndFold);
                        let dir = match prev_lam {
                            Some(p) if p != last.lam => (last.lam - p).signum(),
                            _ => -last.lam.signum(),
                        };
                        let decision = layer::decide_after_fold(sys, &last.x, last.t, last.lam, dir)?;
                        Next::Decide { t: last.t, x: last.x, decision }
                    }
                    SlideEnd::Lost => {
                        traj.event(last.t, EventKind::DegenerateHalt);
                        Next::Halt
                    }
                }
            }
        };
    }
}

//! Command-line front end for `switchlayer`.
//!
//! Exit codes: 0 on success, 1 for usage and input errors, 2 when an
//! engine or analysis fails on valid input.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use switchlayer::integrate::{self, IntegrateError, IntegratorConfig, Trajectory};
use switchlayer::layer::{self, SlidingRoot, Stability};
use switchlayer::regularize::{
    self, r_eps, NoiseConfig, RegularizeError, Sigmoid, SigmoidKind, StickRule, WashoutConfig,
};
use switchlayer::scenarios::{self, ScenarioError, SmoothDefaults};
use switchlayer::SwitchedSystem;

pub use config::{parse_config, serialize_config, Config, ConfigError};

/// Sup-norm gap that counts as two step sizes having diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Failure(_) => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        match e {
            IntegrateError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<RegularizeError> for CliError {
    fn from(e: RegularizeError) -> Self {
        match e {
            RegularizeError::Step(_)
            | RegularizeError::Kappa(_)
            | RegularizeError::Span
            | RegularizeError::Sigmoid(_)
            | RegularizeError::NoHiddenSliding => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "switchlayer", version, about = "Simulate and analyse switching layers of piecewise-smooth systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one trajectory.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sliding roots and their stability at a surface point.
    AnalyzeLayer {
        #[command(flatten)]
        source: Source,
        /// State on the surface, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noise washout curve (`--kappas`) or step-size comparison (`--steps`).
    Sweep {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, value_delimiter = ',')]
        kappas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        steps: Option<Vec<f64>>,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Built-in scenario names.
    ListScenarios,
    /// Print f+, f- and the hidden term g of a system.
    Decompose {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Engine {
    Pws,
    Smooth,
    Stochastic,
}

impl Engine {
    fn name(self) -> &'static str {
        match self {
            Engine::Pws => "pws",
            Engine::Smooth => "smooth",
            Engine::Stochastic => "stochastic",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SigmoidArg {
    Tanh,
    Arctan,
    Hill,
    Alg,
    Bump,
}

impl SigmoidArg {
    fn kind(self) -> SigmoidKind {
        match self {
            SigmoidArg::Tanh => SigmoidKind::Tanh,
            SigmoidArg::Arctan => SigmoidKind::Arctan,
            // the threshold cancels out of the regularized switch
            SigmoidArg::Hill => SigmoidKind::Hill { theta: 1.0 },
            SigmoidArg::Alg => SigmoidKind::AlgebraicSqrt,
            SigmoidArg::Bump => SigmoidKind::NonAnalyticBump,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct EngineArgs {
    #[arg(long, value_enum, default_value_t = Engine::Pws)]
    engine: Engine,
    #[arg(long)]
    eps: Option<f64>,
    /// Fixed Euler step (smooth, stochastic) or initial step (pws).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long, value_enum, default_value_t = SigmoidArg::Tanh)]
    sigmoid: SigmoidArg,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep every n-th sample.
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args, Debug)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

struct Loaded {
    label: String,
    system: SwitchedSystem,
    x0: Vec<f64>,
    t_span: (f64, f64),
    smooth: Option<SmoothDefaults>,
}

fn load(source: &Source) -> Result<Loaded, CliError> {
    if let Some(name) = &source.scenario {
        let s = scenarios::scenario(name).map_err(|e| match e {
            ScenarioError::Unknown(_) => usage(format!("{e}; see `list-scenarios`")),
            ScenarioError::Model(m) => CliError::Failure(m.to_string()),
        })?;
        return Ok(Loaded { label: name.clone(), system: s.system, x0: s.x0, t_span: s.t_span, smooth: Some(s.smooth) });
    }
    let path = source.config.as_ref().expect("clap enforces one source");
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let c = parse_config(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(Loaded { label: path.display().to_string(), system: c.system, x0: c.x0, t_span: c.t_span, smooth: None })
}

fn span(l: &Loaded, t_end: Option<f64>) -> Result<(f64, f64), CliError> {
    let t1 = t_end.unwrap_or(l.t_span.1);
    if !(t1.is_finite() && t1 > l.t_span.0) {
        return Err(usage(format!("--t-end must exceed the start time {}", l.t_span.0)));
    }
    Ok((l.t_span.0, t1))
}

struct Regularization {
    sig: Sigmoid,
    step: f64,
}

fn regularization(l: &Loaded, e: &EngineArgs) -> Result<Regularization, CliError> {
    let name = e.engine.name();
    let eps = e.eps.or(l.smooth.map(|d| d.eps)).ok_or_else(|| usage(format!("the {name} engine needs --eps")))?;
    let step = e.step.or(l.smooth.map(|d| d.step)).ok_or_else(|| usage(format!("the {name} engine needs --step")))?;
    let sig = Sigmoid::new(e.sigmoid.kind(), eps).map_err(|err| usage(err.to_string()))?;
    Ok(Regularization { sig, step })
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| usage(format!("cannot create {}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn simulate(source: &Source, e: &EngineArgs, o: &OutArgs) -> Result<(), CliError> {
    let l = load(source)?;
    let t_span = span(&l, e.t_end)?;
    let mut meta = output::Meta {
        engine: e.engine.name(),
        source: l.label.clone(),
        version: env!("CARGO_PKG_VERSION"),
        t_span,
        eps: None,
        sigmoid: None,
        step: None,
        rel_tol: None,
        abs_tol: None,
        event_tol: None,
        kappa: None,
        seed: None,
        stride: e.stride.unwrap_or(1),
    };
    let traj: Trajectory = match e.engine {
        Engine::Pws => {
            let mut cfg = IntegratorConfig::default();
            if let Some(s) = e.step {
                cfg.step = s;
            }
            meta.step = Some(cfg.step);
            meta.rel_tol = Some(cfg.rel_tol);
            meta.abs_tol = Some(cfg.abs_tol);
            meta.event_tol = Some(cfg.event_tol);
            integrate::simulate(&l.system, &l.x0, t_span, &cfg)?
        }
        Engine::Smooth | Engine::Stochastic => {
            let r = regularization(&l, e)?;
            meta.eps = Some(r.sig.eps);
            meta.sigmoid = Some(r.sig.kind.name());
            meta.step = Some(r.step);
            if e.engine == Engine::Smooth {
                regularize::smooth_simulate(&l.system, &l.x0, t_span, &r.sig, r.step, e.stride)?
            } else {
                let kappa = e.kappa.ok_or_else(|| usage("the stochastic engine needs --kappa"))?;
                meta.kappa = Some(kappa);
                meta.seed = Some(e.seed);
                let noise = NoiseConfig { kappa, seed: e.seed, substep: r.step };
                regularize::stochastic_simulate(&l.system, &l.x0, t_span, &r.sig, &noise, e.stride)?
            }
        }
    };
    // the regularized engines already applied the stride
    let stride = if e.engine == Engine::Pws { meta.stride } else { 1 };
    let samples = output::decimate(&traj, stride);
    let dim = l.system.dim();
    let mut w = writer(o.out.as_deref())?;
    match o.format {
        Format::Csv => {
            output::write_trajectory_csv(&mut w, dim, &samples)?;
            if let Some(p) = &o.out {
                let mut ev = writer(Some(&sibling(p, "events.csv")))?;
                output::write_events_csv(&mut ev, &traj.events)?;
                ev.flush()?;
            }
        }
        Format::Json => output::write_trajectory_json(&mut w, &meta, dim, &samples, &traj.events)?,
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RootReport {
    lambda: f64,
    stability: &'static str,
    df1_dlam: f64,
    sliding_velocity: Option<Vec<f64>>,
    lambda_drift: Option<f64>,
}

#[derive(Serialize)]
struct LayerReport {
    source: String,
    x: Vec<f64>,
    t: f64,
    h: f64,
    f1_minus: f64,
    f1_plus: f64,
    roots: Vec<RootReport>,
    filippov_root: Option<f64>,
}

fn stability_label(s: Stability) -> &'static str {
    match s {
        Stability::Attracting => "attracting",
        Stability::Repelling => "repelling",
        Stability::Degenerate => "degenerate",
    }
}

fn root_report(sys: &SwitchedSystem, x: &[f64], t: f64, r: &SlidingRoot) -> RootReport {
    let velocity = layer::sliding_field(sys, x, t, r).ok();
    let drift = layer::sliding_drift(sys, x, t, r).ok().map(|(rate, _)| rate);
    RootReport {
        lambda: r.lam_star,
        stability: stability_label(r.stability),
        df1_dlam: r.df1_dlam,
        sliding_velocity: velocity,
        lambda_drift: drift,
    }
}

fn analyze_layer(source: &Source, x: &[f64], t: f64, out: Option<&Path>) -> Result<(), CliError> {
    let l = load(source)?;
    let sys = &l.system;
    if x.len() != sys.dim() {
        return Err(usage(format!("--x has {} components, expected {}", x.len(), sys.dim())));
    }
    let fail = |e: &dyn std::fmt::Display| CliError::Failure(e.to_string());
    let h = sys.switching(x).map_err(|e| fail(&e))?;
    if !sys.on_surface(x).map_err(|e| fail(&e))? {
        return Err(usage(format!("--x is off the switching surface (h = {h:e})")));
    }
    let roots = layer::find_sliding_roots(sys, x, t).map_err(|e| fail(&e))?;
    // fields that are not polynomial in λ have no reduction to report
    let filippov = layer::filippov_root(sys, x, t).ok().flatten().map(|r| r.lam_star);
    let report = LayerReport {
        source: l.label,
        x: x.to_vec(),
        t,
        h,
        f1_minus: sys.normal_component(x, t, -1.0).map_err(|e| fail(&e))?,
        f1_plus: sys.normal_component(x, t, 1.0).map_err(|e| fail(&e))?,
        roots: roots.iter().map(|r| root_report(sys, x, t, r)).collect(),
        filippov_root: filippov,
    };
    let mut w = writer(out)?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(|e| CliError::Failure(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct WashoutRow {
    kappa: f64,
    sticks: usize,
    runs: usize,
    fraction: f64,
    ci_low: f64,
    ci_high: f64,
    r_eps: f64,
}

#[derive(Serialize)]
struct StepRow {
    step: f64,
    samples: usize,
    transits: usize,
    mean_transit: f64,
    max_transit: f64,
    max_deviation: f64,
    divergence_time: Option<f64>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(config::fmt_f64).unwrap_or_default()
}

/// Largest sup-norm gap between two runs at shared sample times, and the
/// first time it exceeds [`DIVERGENCE_THRESHOLD`].
fn compare(a: &Trajectory, b: &Trajectory, tol: f64) -> (f64, Option<f64>) {
    let (mut i, mut j) = (0, 0);
    let (mut worst, mut first) = (0.0f64, None);
    while i < a.samples.len() && j < b.samples.len() {
        let (sa, sb) = (&a.samples[i], &b.samples[j]);
        if (sa.t - sb.t).abs() <= tol {
            let d = sa.x.iter().zip(&sb.x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            worst = worst.max(d);
            if first.is_none() && d > DIVERGENCE_THRESHOLD {
                first = Some(sa.t);
            }
            i += 1;
            j += 1;
        } else if sa.t < sb.t {
            i += 1;
        } else {
            j += 1;
        }
    }
    (worst, first)
}

fn sweep(
    source: &Source,
    e: &EngineArgs,
    kappas: Option<&[f64]>,
    steps: Option<&[f64]>,
    runs: usize,
    o: &OutArgs,
) -> Result<(), CliError> {
    let l = load(source)?;
    let t_span = span(&l, e.t_end)?;
    match (kappas, steps) {
        (Some(_), Some(_)) => Err(usage("give either --kappas or --steps, not both")),
        (None, None) => Err(usage("sweep needs --kappas or --steps")),
        (Some([]), _) | (_, Some([])) => Err(usage("the sweep list is empty")),
        (Some(kappas), None) => {
            if e.engine != Engine::Stochastic {
                return Err(usage("--kappas sweeps need --engine stochastic"));
            }
            if runs == 0 {
                return Err(usage("--runs must be positive"));
            }
            let r = regularization(&l, e)?;
            let cfg = WashoutConfig {
                runs,
                horizon: t_span.1 - t_span.0,
                substep: r.step,
                seed: e.seed,
                rule: StickRule::default(),
            };
            let pts = regularize::washout_curve(&l.system, &l.x0, &r.sig, kappas, &cfg)?;
            let rows: Vec<WashoutRow> = pts
                .iter()
                .map(|p| WashoutRow {
                    kappa: p.kappa,
                    sticks: p.sticks,
                    runs: p.runs,
                    fraction: p.fraction,
                    ci_low: p.ci.0,
                    ci_high: p.ci.1,
                    r_eps: r_eps(r.sig.eps),
                })
                .collect();
            let mut w = writer(o.out.as_deref())?;
            match o.format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &rows).map_err(|e| CliError::Failure(e.to_string()))?;
                    writeln!(w)?;
                }
                Format::Csv => {
                    writeln!(w, "kappa,sticks,runs,fraction,ci_low,ci_high,r_eps")?;
                    for r in &rows {
                        writeln!(
                            w,
                            "{},{},{},{},{},{},{}",
                            config::fmt_f64(r.kappa),
                            r.sticks,
                            r.runs,
                            config::fmt_f64(r.fraction),
                            config::fmt_f64(r.ci_low),
                            config::fmt_f64(r.ci_high),
                            config::fmt_f64(r.r_eps)
                        )?;
                    }
                }
            }
            w.flush()?;
            Ok(())
        }
        (None, Some(steps)) => {
            if e.engine != Engine::Smooth {
                return Err(usage("--steps sweeps need --engine smooth"));
            }
            let eps = e.eps.or(l.smooth.map(|d| d.eps)).ok_or_else(|| usage("the smooth engine needs --eps"))?;
            let sig = Sigmoid::new(e.sigmoid.kind(), eps).map_err(|err| usage(err.to_string()))?;
            if let Some(bad) = steps.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
                return Err(usage(format!("step must be positive, got {bad}")));
            }
            // common output grid so runs can be compared sample by sample
            let grid = e.stride.map_or_else(|| steps.iter().cloned().fold(1e-3, f64::max), |k| k as f64 * steps[0]);
            let finest = steps.iter().cloned().fold(f64::INFINITY, f64::min);
            let trajs = steps
                .iter()
                .map(|&s| {
                    let stride = ((grid / s).round() as usize).max(1);
                    regularize::smooth_simulate(&l.system, &l.x0, t_span, &sig, s, Some(stride))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let rows: Vec<StepRow> = steps
                .iter()
                .zip(&trajs)
                .map(|(&s, tr)| {
                    let ts = regularize::transits(tr);
                    let durations: Vec<f64> = ts.iter().map(|t| t.duration()).collect();
                    let (dev, div) = compare(&trajs[0], tr, 0.5 * finest);
                    StepRow {
                        step: s,
                        samples: tr.samples.len(),
                        transits: ts.len(),
                        mean_transit: if durations.is_empty() { 0.0 } else { durations.iter().sum::<f64>() / durations.len() as f64 },
                        max_transit: durations.iter().cloned().fold(0.0, f64::max),
                        max_deviation: dev,
                        divergence_time: div,
                    }
                })
                .collect();
            if let Some(p) = &o.out {
                for (i, tr) in trajs.iter().enumerate() {
                    let mut w = writer(Some(&sibling(p, &format!("step{i}.csv"))))?;
                    output::write_trajectory_csv(&mut w, l.system.dim(), &output::decimate(tr, 1))?;
                    w.flush()?;
                    let mut w = writer(Some(&sibling(p, &format!("step{i}.transits.csv"))))?;
                    writeln!(w, "t_enter,t_exit,duration")?;
                    for t in regularize::transits(tr) {
                        writeln!(w, "{},{},{}", config::fmt_f64(t.t_enter), config::fmt_f64(t.t_exit), config::fmt_f64(t.duration()))?;
                    }
                    w.flush()?;
                }
            }
            let mut w = writer(o.out.as_deref())?;
            match o.format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &rows).map_err(|e| CliError::Failure(e.to_string()))?;
                    writeln!(w)?;
                }
                Format::Csv => {
                    writeln!(w, "step,samples,transits,mean_transit,max_transit,max_deviation,divergence_time")?;
                    for r in &rows {
                        writeln!(
                            w,
                            "{},{},{},{},{},{},{}",
                            config::fmt_f64(r.step),
                            r.samples,
                            r.transits,
                            config::fmt_f64(r.mean_transit),
                            config::fmt_f64(r.max_transit),
                            config::fmt_f64(r.max_deviation),
                            fmt_opt(r.divergence_time)
                        )?;
                    }
                }
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn list_scenarios() -> Result<(), CliError> {
    let mut w = writer(None)?;
    for s in scenarios::catalog() {
        writeln!(w, "{:<22}n={}  t=[{}, {}]  {}", s.name, s.system.dim(), s.t_span.0, s.t_span.1, s.summary)?;
    }
    w.flush()?;
    Ok(())
}

fn decompose(source: &Source) -> Result<(), CliError> {
    let l = load(source)?;
    // a field that is not polynomial in λ has no exact split
    let d = l.system.to_split().map_err(|e| CliError::Failure(e.to_string()))?;
    let mut w = writer(None)?;
    let join = |v: &[switchlayer::Expr]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
    writeln!(w, "fplus = [{}]", join(&d.fplus))?;
    writeln!(w, "fminus = [{}]", join(&d.fminus))?;
    writeln!(w, "g = [{}]", join(&d.g))?;
    w.flush()?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { source, engine, out } => simulate(&source, &engine, &out),
        Command::AnalyzeLayer { source, x, t, out } => analyze_layer(&source, &x, t, out.as_deref()),
        Command::Sweep { source, engine, kappas, steps, runs, out } => {
            sweep(&source, &engine, kappas.as_deref(), steps.as_deref(), runs, &out)
        }
        Command::ListScenarios => list_scenarios(),
        Command::Decompose { source } => decompose(&source),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code; diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use switchlayer::integrate::{Mode, Sample};

    fn line(ts: &[f64], x: f64) -> Trajectory {
        let mut t = Trajectory::new();
        for &s in ts {
            t.push(Sample { t: s, x: vec![x + s], lam: 0.0, mode: Mode::FreePlus });
        }
        t
    }

    #[test]
    fn compare_matches_shared_times() {
        let a = line(&[0.0, 1.0, 2.0, 3.0], 0.0);
        let mut b = line(&[0.0, 2.0, 3.0], 0.0);
        b.samples[2].x[0] += 0.7;
        let (dev, div) = compare(&a, &b, 1e-9);
        assert!((dev - 0.7).abs() < 1e-12);
        assert_eq!(div, Some(3.0));
        assert_eq!(compare(&a, &a, 1e-9), (0.0, None));
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("/tmp/run.csv"), "events.csv"), PathBuf::from("/tmp/run.events.csv"));
        assert_eq!(sibling(Path::new("out"), "step0.csv"), PathBuf::from("out.step0.csv"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["switchlayer", "bogus"]), 1);
        assert_eq!(run(["switchlayer", "simulate"]), 1);
        assert_eq!(run(["switchlayer", "simulate", "--scenario", "nope"]), 1);
        assert_eq!(run(["switchlayer", "--version"]), 0);
    }
}

//! Named worked examples with initial data and the facts they should
//! reproduce.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{FieldForm, ModelError, SwitchedSystem};

/// Where an expected fact comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Stated in the published analysis of the example.
    Published,
    /// Worked out independently (closed form, fold analysis, Monte Carlo).
    Derived,
}

/// Machine-checkable statement about a scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum Fact {
    /// A sliding root at `lam` exists at the surface point reached from `x0`.
    SlidingRoot { lam: f64, tol: f64 },
    /// The trajectory is captured by the root at `lam`.
    Captured { lam: f64, tol: f64 },
    /// Component `index` of the sliding velocity at capture.
    SlidingVelocity { index: usize, value: f64, tol: f64 },
    /// The trajectory crosses and the layer has no sliding root there.
    Crosses,
    /// After `after`, the peak of `|x_index|` is `value` within `rel_tol`.
    PeakAbs { index: usize, value: f64, rel_tol: f64, after: f64 },
    /// `|x_index|` falls below `bound` by time `by`.
    DecaysBelow { index: usize, bound: f64, by: f64 },
    /// Layer transits near `near` last longer than in scenario `other`.
    SlowerTransitThan { other: &'static str, near: f64, factor: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expected {
    pub fact: Fact,
    pub basis: Basis,
    pub note: &'static str,
}

/// Regularization used by default for the smooth and noisy engines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothDefaults {
    pub eps: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub system: SwitchedSystem,
    pub x0: Vec<f64>,
    pub t_span: (f64, f64),
    /// Opt-in horizon for runs too long for routine testing.
    pub long_horizon: Option<f64>,
    pub smooth: SmoothDefaults,
    pub expected: Vec<Expected>,
    /// Facts for the system with its hidden term removed.
    pub filippov_expected: Vec<Expected>,
}

impl Scenario {
    /// The scenario over its long horizon, when it has one.
    pub fn extended(&self) -> Scenario {
        let mut s = self.clone();
        if let Some(t1) = self.long_horizon {
            s.t_span.1 = t1;
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown scenario '{0}'")]
    Unknown(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn expect(fact: Fact, basis: Basis, note: &'static str) -> Expected {
    Expected { fact, basis, note }
}

fn build(name: &'static str) -> Result<Scenario, ModelError> {
    use Basis::*;
    use Fact::*;
    let sqrt_half = core::f64::consts::FRAC_1_SQRT_2;
    let examples = SmoothDefaults { eps: 1e-3, step: 1e-5 };
    let s = match name {
        "example1a" => Scenario {
            name,
            summary: "f = (-lam, 2 lam^2 - 1): slides down x1 = 0",
            system: SwitchedSystem::combined(2, "x1", &["-lam", "2*lam^2 - 1"])?,
            x0: vec![0.3, 0.0],
            t_span: (0.0, 5.0),
            long_horizon: None,
            smooth: examples,
            expected: vec![
                expect(SlidingRoot { lam: 0.0, tol: 1e-10 }, Published, "root of the layer field at lam = 0"),
                expect(Captured { lam: 0.0, tol: 1e-10 }, Published, "captured at lam = 0"),
                expect(SlidingVelocity { index: 1, value: -1.0, tol: 1e-8 }, Published, "slides downwards"),
            ],
            filippov_expected: vec![],
        },
        "example1b" => Scenario {
            name,
            summary: "f = (-lam, 1): same outside x1 = 0, slides up",
            system: SwitchedSystem::combined(2, "x1", &["-lam", "1"])?,
            x0: vec![0.3, 0.0],
            t_span: (0.0, 5.0),
            long_horizon: None,
            smooth: examples,
            expected: vec![
                expect(SlidingRoot { lam: 0.0, tol: 1e-10 }, Published, "root of the layer field at lam = 0"),
                expect(Captured { lam: 0.0, tol: 1e-10 }, Published, "captured at lam = 0"),
                expect(SlidingVelocity { index: 1, value: 1.0, tol: 1e-8 }, Published, "slides upwards"),
            ],
            filippov_expected: vec![],
        },
        "example2a" => Scenario {
            name,
            summary: "f = (2 lam^2 - 1, -lam): hidden sliding traps the flow",
            system: SwitchedSystem::combined(2, "x1", &["2*lam^2 - 1", "-lam"])?,
            x0: vec![-0.5, 0.0],
            t_span: (0.0, 5.0),
            long_horizon: None,
            smooth: examples,
            expected: vec![
                expect(SlidingRoot { lam: sqrt_half, tol: 1e-10 }, Published, "repelling root"),
                expect(SlidingRoot { lam: -sqrt_half, tol: 1e-10 }, Published, "attracting root"),
                expect(Captured { lam: -sqrt_half, tol: 1e-10 }, Published, "collapses onto the attracting root"),
                expect(SlidingVelocity { index: 1, value: sqrt_half, tol: 1e-8 }, Published, "slides upwards at 1/sqrt 2"),
            ],
            filippov_expected: vec![expect(Crosses, Published, "without the hidden term the flow crosses")],
        },
        "example2b" => Scenario {
            name,
            summary: "f = (1, -lam): the affine version crosses",
            system: SwitchedSystem::combined(2, "x1", &["1", "-lam"])?,
            x0: vec![-0.5, 0.0],
            t_span: (0.0, 5.0),
            long_horizon: None,
            smooth: examples,
            expected: vec![expect(Crosses, Published, "crosses x1 = 0")],
            filippov_expected: vec![],
        },
        "hidden_vdp" => Scenario {
            name,
            summary: "van der Pol oscillation hidden inside x1 = 0",
            system: SwitchedSystem::combined(2, "x1", &["x2/10 + lam - 2*lam^3", "-lam"])?,
            x0: vec![1.0, 1.0],
            t_span: (0.0, 100.0),
            long_horizon: None,
            smooth: SmoothDefaults { eps: 1e-3, step: 1e-4 },
            expected: vec![
                // folds of x2/10 + lam - 2 lam^3 at lam = ±1/√6 give |x2| = 20/(3√6)
                expect(
                    PeakAbs { index: 1, value: 20.0 / (3.0 * libm::sqrt(6.0)), rel_tol: 0.05, after: 50.0 },
                    Derived,
                    "sustained relaxation oscillation of x2",
                ),
            ],
            filippov_expected: vec![expect(
                DecaysBelow { index: 1, bound: 1e-3, by: 100.0 },
                Published,
                "the origin attracts once the cubic is dropped",
            )],
        },
        "hidden_vdp_coupled" => Scenario {
            name,
            summary: "hidden van der Pol with x3 relaxing onto lam (beta = 1e-4)",
            // β ẋ3 = λ − x3 with β = 1e-4
            system: SwitchedSystem::combined(3, "x1", &["x2/10 + lam - 2*lam^3", "-lam", "1e4*(lam - x3)"])?,
            x0: vec![1.0, 1.0, 0.0],
            t_span: (0.0, 100.0),
            long_horizon: None,
            smooth: SmoothDefaults { eps: 1e-3, step: 1e-5 },
            expected: vec![expect(
                PeakAbs { index: 1, value: 20.0 / (3.0 * libm::sqrt(6.0)), rel_tol: 0.05, after: 50.0 },
                Derived,
                "the extra variable leaves the x2 oscillation intact",
            )],
            filippov_expected: vec![],
        },
        "oscillator_linear" => Scenario {
            name,
            summary: "forced oscillator, forcing frequency switched by convex combination",
            system: SwitchedSystem::combined(
                2,
                "x1",
                &["-0.01*x1 - x2 - ((1 + lam)/2*sin(3/2*pi*t) + (1 - lam)/2*sin(1/2*pi*t))", "x1"],
            )?,
            x0: vec![1.0, 0.0],
            t_span: (0.0, 200.0),
            long_horizon: Some(2000.0),
            smooth: SmoothDefaults { eps: 1e-3, step: 1e-5 },
            expected: vec![],
            filippov_expected: vec![],
        },
        "oscillator_nonlinear" => Scenario {
            name,
            summary: "forced oscillator, frequency (1 + lam/2) pi switched inside the sine",
            system: SwitchedSystem::combined(2, "x1", &["-0.01*x1 - x2 - sin((1 + lam/2)*pi*t)", "x1"])?,
            x0: vec![1.0, 0.0],
            t_span: (0.0, 200.0),
            long_horizon: Some(2000.0),
            smooth: SmoothDefaults { eps: 1e-3, step: 1e-5 },
            expected: vec![expect(
                SlowerTransitThan { other: "oscillator_linear", near: 2.0, factor: 2.0 },
                Published,
                "nonlinear switching slows passage through the layer",
            )],
            filippov_expected: vec![],
        },
        other => unreachable!("no scenario {other}"),
    };
    Ok(s)
}

/// Stable scenario identifiers, in catalog order.
pub const NAMES: [&str; 8] = [
    "example1a",
    "example1b",
    "example2a",
    "example2b",
    "hidden_vdp",
    "hidden_vdp_coupled",
    "oscillator_linear",
    "oscillator_nonlinear",
];

pub fn catalog() -> Vec<Scenario> {
    NAMES.iter().map(|n| build(n).expect("catalog systems are valid")).collect()
}

pub fn scenario(name: &str) -> Result<Scenario, ScenarioError> {
    match NAMES.iter().find(|n| **n == name) {
        Some(n) => Ok(build(n)?),
        None => Err(ScenarioError::Unknown(name.into())),
    }
}

/// The scenario with its hidden term removed. Systems that have none are
/// returned unchanged; otherwise the expected facts are swapped for those
/// of the reduced system.
pub fn filippov_variant(s: &Scenario) -> Result<Scenario, ScenarioError> {
    let d = s.system.to_split()?;
    if d.g.iter().all(|e| e.as_number() == Some(0.0)) {
        return Ok(s.clone());
    }
    let reduced = s.system.filippov_reduction()?;
    debug_assert!(matches!(reduced.form(), FieldForm::Split { .. }));
    Ok(Scenario {
        system: reduced,
        expected: s.filippov_expected.clone(),
        filippov_expected: Vec::new(),
        ..s.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::{self, Stability};

    #[test]
    fn catalog_is_complete_and_named_stably() {
        let c = catalog();
        assert_eq!(c.len(), NAMES.len());
        for (s, n) in c.iter().zip(NAMES) {
            assert_eq!(s.name, n);
            assert_eq!(s.x0.len(), s.system.dim());
            assert!(s.t_span.1 > s.t_span.0);
        }
        assert!(matches!(scenario("nope"), Err(ScenarioError::Unknown(_))));
    }

    #[test]
    fn oscillators_agree_off_the_surface() {
        let lin = scenario("oscillator_linear").unwrap().system;
        let non = scenario("oscillator_nonlinear").unwrap().system;
        for t in [0.0, 0.3, 1.7, 12.25] {
            for lam in [-1.0, 1.0] {
                let a = lin.assemble(&[0.2, -0.4], t, lam).unwrap();
                let b = non.assemble(&[0.2, -0.4], t, lam).unwrap();
                assert!((a[0] - b[0]).abs() < 1e-14 && a[1] == b[1]);
            }
        }
        let a = lin.assemble(&[0.0, 0.0], 0.5, 0.0).unwrap();
        let b = non.assemble(&[0.0, 0.0], 0.5, 0.0).unwrap();
        assert!((a[0] - b[0]).abs() > 1e-3);
    }

    #[test]
    fn vdp_variant_loses_the_cubic() {
        let s = scenario("hidden_vdp").unwrap();
        let v = filippov_variant(&s).unwrap();
        // layer field becomes x2/10 - lam: one attracting root at the origin
        let roots = layer::find_sliding_roots(&v.system, &[0.0, 0.0], 0.0).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].lam_star.abs() < 1e-12);
        assert_eq!(roots[0].stability, Stability::Attracting);
        let f1 = v.system.normal_component(&[0.0, 0.3], 0.0, 0.5).unwrap();
        assert!((f1 - (0.03 - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn example2a_variant_crosses_like_2b() {
        let v = filippov_variant(&scenario("example2a").unwrap()).unwrap();
        let b = scenario("example2b").unwrap();
        for lam in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let a = v.system.normal_component(&[0.0, 0.1], 0.0, lam).unwrap();
            let c = b.system.normal_component(&[0.0, 0.1], 0.0, lam).unwrap();
            assert!((a - c).abs() < 1e-14);
        }
    }

    #[test]
    fn hidden_free_variant_is_unchanged() {
        for n in ["example1b", "example2b", "oscillator_linear"] {
            let s = scenario(n).unwrap();
            assert_eq!(filippov_variant(&s).unwrap(), s);
        }
    }

    #[test]
    fn nonpolynomial_variant_fails() {
        assert!(filippov_variant(&scenario("oscillator_nonlinear").unwrap()).is_err());
    }

    #[test]
    fn extended_horizon() {
        let s = scenario("oscillator_linear").unwrap();
        assert_eq!(s.extended().t_span, (0.0, 2000.0));
        let e = scenario("example1a").unwrap();
        assert_eq!(e.extended(), e);
    }
}

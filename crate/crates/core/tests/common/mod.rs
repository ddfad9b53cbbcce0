//! Checks shared by the property suite and the acceptance runner.

#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use switchlayer::expr::{Bindings, Var};
use switchlayer::layer;
use switchlayer::{decompose, parse, SwitchedSystem};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * ((self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: u32) -> u32 {
        self.0.next_u32() % n
    }
}

/// `Σ c_k λ^k` as source text, with full-precision coefficients.
pub fn poly_source(c: &[f64]) -> String {
    let terms: Vec<String> = c.iter().enumerate().map(|(k, v)| format!("({v:?})*lam^{k}")).collect();
    terms.join(" + ")
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Compares the layer root finder on `f₁ = p(λ)` with a uniform scan of
/// `cells` intervals over `[-1, 1]`. Every cell must hold an odd number of
/// reported roots exactly when `p` changes sign across it (two roots closer
/// than a cell are invisible to the scan but must then come in a pair), and
/// isolated roots must agree with bisection to `tol`.
pub fn check_roots_against_scan(c: &[f64], cells: usize, tol: f64) -> Result<(), String> {
    let sys = SwitchedSystem::combined(1, "x1", &[&poly_source(c)]).map_err(|e| e.to_string())?;
    let roots: Vec<f64> = layer::find_sliding_roots(&sys, &[0.0], 0.0)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|r| r.lam_star)
        .collect();
    let node = |i: usize| -1.0 + 2.0 * i as f64 / cells as f64;
    let cell_of = |r: f64| (((r + 1.0) / 2.0 * cells as f64) as usize).min(cells - 1);

    let mut counts = vec![0usize; cells];
    for &r in &roots {
        if !(-1.0..=1.0).contains(&r) {
            return Err(format!("root {r} outside the layer"));
        }
        counts[cell_of(r)] += 1;
    }
    let values: Vec<f64> = (0..=cells).map(|i| horner(c, node(i))).collect();
    let mut bad = Vec::new();
    for i in 0..cells {
        let change = values[i] == 0.0 || values[i] * values[i + 1] < 0.0;
        if change != (counts[i] % 2 == 1) {
            bad.push(i);
        }
    }
    // a root within `tol` of a node may land in either neighbouring cell
    let mut k = 0;
    let mut unresolved = Vec::new();
    while k < bad.len() {
        let i = bad[k];
        if k + 1 < bad.len() && bad[k + 1] == i + 1 && roots.iter().any(|r| (r - node(i + 1)).abs() <= tol) {
            k += 2;
            continue;
        }
        unresolved.push(i);
        k += 1;
    }
    if !unresolved.is_empty() {
        let i = unresolved[0];
        return Err(format!(
            "{} cell(s) disagree, first [{}, {}]: scan {} vs {} root(s); roots {roots:?}",
            unresolved.len(),
            node(i),
            node(i + 1),
            if values[i] * values[i + 1] < 0.0 { "sign change" } else { "no sign change" },
            counts[i]
        ));
    }
    for i in 0..cells {
        if counts[i] == 1 && values[i] * values[i + 1] < 0.0 {
            let (mut a, mut b) = (node(i), node(i + 1));
            let fa = values[i];
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if horner(c, m) * fa > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let r = roots[roots.iter().position(|&r| cell_of(r) == i).unwrap()];
            if (r - 0.5 * (a + b)).abs() > tol {
                return Err(format!("root {r} vs bisection {}", 0.5 * (a + b)));
            }
        }
    }
    Ok(())
}

pub fn random_poly(rng: &mut Rng) -> Vec<f64> {
    let degree = 1 + rng.below(6) as usize;
    (0..=degree).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

/// Random smooth expression in `x1, x2, t, lam` whose denominators stay
/// away from zero.
pub fn random_expr(rng: &mut Rng, depth: u32) -> String {
    if depth == 0 || rng.below(4) == 0 {
        return match rng.below(6) {
            0 => "x1".into(),
            1 => "x2".into(),
            2 => "t".into(),
            3 => "lam".into(),
            _ => format!("{:.3}", rng.uniform(-2.0, 2.0)),
        };
    }
    let a = random_expr(rng, depth - 1);
    let b = random_expr(rng, depth - 1);
    match rng.below(10) {
        0 => format!("({a} + {b})"),
        1 => format!("({a} - {b})"),
        2 => format!("({a} * {b})"),
        3 => format!("({a} / (2 + sin({b})))"),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("tanh({a})"),
        7 => format!("atan({a})"),
        8 => format!("({a})^{}", 2 + rng.below(2)),
        _ => format!("exp(sin({a}))"),
    }
}

/// Forward-mode derivative against a central difference.
pub fn check_deriv(src: &str, x: &[f64; 2], t: f64, lam: f64, rel: f64) -> Result<(), String> {
    let e = parse(src, 2).map_err(|e| format!("{src}: {e}"))?;
    for var in [Var::X(0), Var::X(1), Var::T, Var::Lam] {
        let at = |d: f64| {
            let mut x = *x;
            let (mut t, mut lam) = (t, lam);
            match var {
                Var::X(i) => x[i] += d,
                Var::T => t += d,
                Var::Lam => lam += d,
            }
            e.eval(&Bindings::new(&x, t, lam)).unwrap()
        };
        let d = e.deriv(&Bindings::new(x, t, lam), var).map_err(|e| e.to_string())?;
        let h = 1e-5;
        // fourth-order central difference
        let fd = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
        let scale = d.abs().max(fd.abs()).max(1.0);
        if (d - fd).abs() > rel * scale {
            return Err(format!("{src} d/d{var}: {d} vs {fd}"));
        }
    }
    Ok(())
}

/// Off the layer (`λ = ±1`) a split system equals its one-sided fields,
/// whatever the hidden term.
pub fn check_ghost(g_src: &str, x: &[f64; 2], t: f64, tol: f64) -> Result<(), String> {
    let fp = ["x2 - 1", "sin(t) * x1"];
    let fm = ["x2 + 1", "cos(x1) + t"];
    let sys = SwitchedSystem::split(2, "x1", &fp, &fm, &[g_src, g_src]).map_err(|e| e.to_string())?;
    for (lam, side) in [(1.0, fp), (-1.0, fm)] {
        let f = sys.assemble(x, t, lam).map_err(|e| e.to_string())?;
        for (k, src) in side.iter().enumerate() {
            let want = parse(src, 2).unwrap().eval(&Bindings::new(x, t, 0.0)).unwrap();
            if (f[k] - want).abs() > tol * want.abs().max(1.0) {
                return Err(format!("g = {g_src}: lam = {lam}, component {k}: {} vs {want}", f[k]));
            }
        }
    }
    Ok(())
}

/// `½(1+λ)f⁺ + ½(1−λ)f⁻ + (λ²−1)g` rebuilt from `decompose` matches the
/// original polynomial field.
pub fn check_decompose(c: &[f64], lam: f64, x: &[f64; 2], tol: f64) -> Result<(), String> {
    let src = format!("x2 * ({}) + x1", poly_source(c));
    let f = [parse(&src, 2).unwrap(), parse("lam^3 - x1*lam", 2).unwrap()];
    let d = decompose(&f).map_err(|e| e.to_string())?;
    for k in 0..2 {
        let b = Bindings::new(x, 0.0, 0.0);
        let (p, m, g) = (d.fplus[k].eval(&b).unwrap(), d.fminus[k].eval(&b).unwrap(), d.g[k].eval(&Bindings::new(x, 0.0, lam)).unwrap());
        let rebuilt = 0.5 * (1.0 + lam) * p + 0.5 * (1.0 - lam) * m + (lam * lam - 1.0) * g;
        let orig = f[k].eval(&Bindings::new(x, 0.0, lam)).unwrap();
        if (rebuilt - orig).abs() > tol * orig.abs().max(1.0) {
            return Err(format!("component {k}: {rebuilt} vs {orig} at lam = {lam}"));
        }
    }
    Ok(())
}

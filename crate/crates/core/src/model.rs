//! Canonical switched-system representation.
//!
//! A system is `ẋ = f(x, t; λ)` with switching function `h(x)`; off the
//! surface `λ = sign(h)`, on it `λ ∈ [-1, 1]`. The field is given either
//! directly as λ-dependent expressions or split as
//!
//! ```text
//! f = ½(1+λ) f⁺ + ½(1-λ) f⁻ + (λ²-1) g
//! ```
//!
//! where the hidden term `(λ²-1) g` vanishes at `λ = ±1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::scalar::{Dual, Scalar};
use crate::expr::{self, BinOp, Bindings, Expr, ExprError, ExprKind, Var};

/// Relative scale of the surface membership test `|h(x)| ≤ tol·(1+|x|)`.
pub const SURFACE_TOL_REL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("`{field}` has {got} components, expected {expected}")]
    Dimension { field: &'static str, got: usize, expected: usize },
    #[error("h must not depend on {0}")]
    SwitchDependsOn(Var),
    #[error("{field}[{index}] must not depend on lam")]
    OneSidedDependsOnLam { field: &'static str, index: usize },
    #[error("{field}[{index}] applies abs/sign to lam; the field must be smooth in lam")]
    NonsmoothInLam { field: &'static str, index: usize },
    #[error("{field}[{index}] references x{var} but the dimension is {dim}")]
    StateOutOfRange { field: &'static str, index: usize, var: usize, dim: usize },
    #[error("component {index} is not polynomial in lam")]
    NotPolynomial { index: usize },
    #[error("lam = {0} is outside [-1, 1]")]
    LamOutOfRange(f64),
    #[error("point is off the switching surface (h = {0:e})")]
    OffSurface(f64),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldForm {
    Combined { f: Vec<Expr> },
    Split { fplus: Vec<Expr>, fminus: Vec<Expr>, g: Vec<Expr> },
}

/// Piecewise-smooth system with a single switching surface `h(x) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchedSystem {
    dim: usize,
    h: Expr,
    form: FieldForm,
}

/// A point inside the switching layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerPoint {
    pub x: Vec<f64>,
    pub lam: f64,
    pub t: f64,
}

impl LayerPoint {
    /// Checks `|h(x)| ≤ surface tolerance` and `λ ∈ [-1, 1]`.
    pub fn new(sys: &SwitchedSystem, x: Vec<f64>, t: f64, lam: f64) -> Result<Self, ModelError> {
        if !(-1.0..=1.0).contains(&lam) {
            return Err(ModelError::LamOutOfRange(lam));
        }
        let hv = sys.switching(&x)?;
        if hv.abs() > sys.surface_tolerance(&x) {
            return Err(ModelError::OffSurface(hv));
        }
        Ok(LayerPoint { x, lam, t })
    }
}

/// Result of splitting a λ-polynomial field into `(f⁺, f⁻, g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub fplus: Vec<Expr>,
    pub fminus: Vec<Expr>,
    pub g: Vec<Expr>,
}

fn check_vec(field: &'static str, v: &[Expr], dim: usize) -> Result<(), ModelError> {
    if v.len() != dim {
        return Err(ModelError::Dimension { field, got: v.len(), expected: dim });
    }
    for (index, e) in v.iter().enumerate() {
        let var = e.max_state_index();
        if var > dim {
            return Err(ModelError::StateOutOfRange { field, index, var, dim });
        }
        if e.nonsmooth_in(Var::Lam) {
            return Err(ModelError::NonsmoothInLam { field, index });
        }
    }
    Ok(())
}

fn check_lam_free(field: &'static str, v: &[Expr]) -> Result<(), ModelError> {
    match v.iter().position(|e| e.depends_on(Var::Lam)) {
        Some(index) => Err(ModelError::OneSidedDependsOnLam { field, index }),
        None => Ok(()),
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|a| a * a).sum::<f64>())
}

impl SwitchedSystem {
    pub fn new(dim: usize, h: Expr, form: FieldForm) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension);
        }
        for var in [Var::T, Var::Lam] {
            if h.depends_on(var) {
                return Err(ModelError::SwitchDependsOn(var));
            }
        }
        let var = h.max_state_index();
        if var > dim {
            return Err(ModelError::StateOutOfRange { field: "h", index: 0, var, dim });
        }
        match &form {
            FieldForm::Combined { f } => check_vec("f", f, dim)?,
            FieldForm::Split { fplus, fminus, g } => {
                check_vec("fplus", fplus, dim)?;
                check_vec("fminus", fminus, dim)?;
                check_vec("g", g, dim)?;
                check_lam_free("fplus", fplus)?;
                check_lam_free("fminus", fminus)?;
            }
        }
        Ok(SwitchedSystem { dim, h, form })
    }

    /// Parses `h` and the combined field from source strings.
    pub fn combined(dim: usize, h: &str, f: &[&str]) -> Result<Self, ModelError> {
        let h = expr::parse(h, dim)?;
        let f = f.iter().map(|s| expr::parse(s, dim)).collect::<Result<Vec<_>, _>>()?;
        SwitchedSystem::new(dim, h, FieldForm::Combined { f })
    }

    /// Parses `h` and the split field from source strings.
    pub fn split(
        dim: usize,
        h: &str,
        fplus: &[&str],
        fminus: &[&str],
        g: &[&str],
    ) -> Result<Self, ModelError> {
        let p = |v: &[&str]| v.iter().map(|s| expr::parse(s, dim)).collect::<Result<Vec<_>, _>>();
        let h = expr::parse(h, dim)?;
        SwitchedSystem::new(dim, h, FieldForm::Split { fplus: p(fplus)?, fminus: p(fminus)?, g: p(g)? })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> &Expr {
        &self.h
    }

    pub fn form(&self) -> &FieldForm {
        &self.form
    }

    /// True when the system is in split form with every hidden component a
    /// literal zero, i.e. the field is affine in λ.
    pub fn is_hidden_free(&self) -> bool {
        match &self.form {
            FieldForm::Split { g, .. } => g.iter().all(|e| e.as_number() == Some(0.0)),
            FieldForm::Combined { .. } => false,
        }
    }

    pub fn switching(&self, x: &[f64]) -> Result<f64, ExprError> {
        self.h.eval(&Bindings::new(x, 0.0, 0.0))
    }

    pub fn surface_tolerance(&self, x: &[f64]) -> f64 {
        SURFACE_TOL_REL * (1.0 + norm(x))
    }

    /// Whether `|h(x)|` is within the surface tolerance.
    pub fn on_surface(&self, x: &[f64]) -> Result<bool, ExprError> {
        Ok(self.switching(x)?.abs() <= self.surface_tolerance(x))
    }

    pub fn grad_h_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), ExprError> {
        let b = Bindings::new(x, 0.0, 0.0);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.h.deriv(&b, Var::X(i))?;
        }
        Ok(())
    }

    pub fn grad_h(&self, x: &[f64]) -> Result<Vec<f64>, ExprError> {
        let mut g = vec![0.0; self.dim];
        self.grad_h_into(x, &mut g)?;
        Ok(g)
    }

    /// Field value in any scalar type; `out` must have length `dim`.
    pub fn assemble_scalar<S: Scalar>(
        &self,
        x: &[S],
        t: S,
        lam: S,
        out: &mut [S],
    ) -> Result<(), ExprError> {
        let mut kink = false;
        match &self.form {
            FieldForm::Combined { f } => {
                for (o, e) in out.iter_mut().zip(f) {
                    *o = e.eval_scalar(x, t, lam, &mut kink)?;
                }
            }
            FieldForm::Split { fplus, fminus, g } => {
                let one = S::cst(1.0);
                let half = S::cst(0.5);
                let wp = half * (one + lam);
                let wm = half * (one - lam);
                let wg = lam * lam - one;
                for (i, o) in out.iter_mut().enumerate() {
                    let p = fplus[i].eval_scalar(x, t, lam, &mut kink)?;
                    let m = fminus[i].eval_scalar(x, t, lam, &mut kink)?;
                    let gi = g[i].eval_scalar(x, t, lam, &mut kink)?;
                    *o = wp * p + wm * m + wg * gi;
                }
            }
        }
        Ok(())
    }

    pub fn assemble_into(&self, x: &[f64], t: f64, lam: f64, out: &mut [f64]) -> Result<(), ExprError> {
        self.assemble_scalar(x, t, lam, out)
    }

    /// Value of `f(x, t; λ)`.
    pub fn assemble(&self, x: &[f64], t: f64, lam: f64) -> Result<Vec<f64>, ExprError> {
        let mut out = vec![0.0; self.dim];
        self.assemble_into(x, t, lam, &mut out)?;
        Ok(out)
    }

    /// Normal component `f₁ = f·∇h`, the right-hand side of the fast layer
    /// dynamics `λ' = f₁`.
    pub fn normal_component(&self, x: &[f64], t: f64, lam: f64) -> Result<f64, ExprError> {
        let f = self.assemble(x, t, lam)?;
        let g = self.grad_h(x)?;
        Ok(f.iter().zip(&g).map(|(a, b)| a * b).sum())
    }

    /// `(f₁, ∂f₁/∂λ)` at a layer point.
    pub fn normal_lam_slope(&self, x: &[f64], t: f64, lam: f64) -> Result<(f64, f64), ExprError> {
        let grad = self.grad_h(x)?;
        self.normal_lam_slope_with(x, t, lam, &grad)
    }

    pub(crate) fn normal_lam_slope_with(
        &self,
        x: &[f64],
        t: f64,
        lam: f64,
        grad: &[f64],
    ) -> Result<(f64, f64), ExprError> {
        let xd: Vec<Dual<f64>> = x.iter().map(|&v| Dual::constant(v)).collect();
        let mut f = vec![Dual::constant(0.0); self.dim];
        self.assemble_scalar(&xd, Dual::constant(t), Dual::variable(lam), &mut f)?;
        let (mut v, mut d) = (0.0, 0.0);
        for (fi, gi) in f.iter().zip(grad) {
            v += fi.re * gi;
            d += fi.eps * gi;
        }
        Ok((v, d))
    }

    /// `(f₁, D f₁)` where `D` differentiates along `(ẋ, ṫ) = (dx, dt)` at
    /// fixed λ. Includes the curvature of `h` through the directional
    /// derivative of `∇h`.
    pub fn normal_directional(
        &self,
        x: &[f64],
        t: f64,
        lam: f64,
        dx: &[f64],
        dt: f64,
    ) -> Result<(f64, f64), ExprError> {
        let n = self.dim;
        let xd: Vec<Dual<f64>> = x.iter().zip(dx).map(|(&a, &b)| Dual::new(a, b)).collect();
        let mut f = vec![Dual::constant(0.0); n];
        self.assemble_scalar(&xd, Dual::new(t, dt), Dual::constant(lam), &mut f)?;

        let mut kink = false;
        let (mut v, mut d) = (0.0, 0.0);
        for i in 0..n {
            let xdd: Vec<Dual<Dual<f64>>> = (0..n)
                .map(|j| {
                    Dual::new(Dual::new(x[j], dx[j]), Dual::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                })
                .collect();
            let zero = Dual::constant(Dual::constant(0.0));
            let hd = self.h.eval_scalar(&xdd, zero, zero, &mut kink)?;
            let (gi, dgi) = (hd.eps.re, hd.eps.eps);
            v += f[i].re * gi;
            d += f[i].eps * gi + f[i].re * dgi;
        }
        Ok((v, d))
    }

    /// Pulls `x` back onto `h = 0` by Newton steps along `∇h`.
    pub fn project_to_surface(&self, x: &mut [f64]) -> Result<(), ExprError> {
        let mut grad = vec![0.0; self.dim];
        for _ in 0..4 {
            let hv = self.switching(x)?;
            if hv == 0.0 || hv.abs() <= 1e-3 * self.surface_tolerance(x) {
                break;
            }
            self.grad_h_into(x, &mut grad)?;
            let g2: f64 = grad.iter().map(|g| g * g).sum();
            if g2 == 0.0 {
                break;
            }
            for (xi, gi) in x.iter_mut().zip(&grad) {
                *xi -= hv * gi / g2;
            }
        }
        Ok(())
    }

    /// Splits the field into `(f⁺, f⁻, g)`; combined fields must be
    /// polynomial in λ.
    pub fn to_split(&self) -> Result<Decomposition, ModelError> {
        match &self.form {
            FieldForm::Combined { f } => decompose(f),
            FieldForm::Split { fplus, fminus, g } => {
                Ok(Decomposition { fplus: fplus.clone(), fminus: fminus.clone(), g: g.clone() })
            }
        }
    }

    /// The same system with the hidden term dropped (Filippov's convex
    /// combination).
    pub fn filippov_reduction(&self) -> Result<SwitchedSystem, ModelError> {
        let d = self.to_split()?;
        let g = vec![Expr::num(0.0); self.dim];
        SwitchedSystem::new(
            self.dim,
            self.h.clone(),
            FieldForm::Split { fplus: d.fplus, fminus: d.fminus, g },
        )
    }
}

// Constant-folding constructors; keep decomposed coefficients readable.

fn is_zero(e: &Expr) -> bool {
    e.as_number() == Some(0.0)
}

fn is_one(e: &Expr) -> bool {
    e.as_number() == Some(1.0)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => Expr::num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        (_, Some(y)) if y < 0.0 => Expr::binary(BinOp::Sub, a, Expr::num(-y)),
        _ => Expr::binary(BinOp::Add, a, b),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => Expr::num(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        (_, Some(y)) if y < 0.0 => Expr::binary(BinOp::Add, a, Expr::num(-y)),
        _ => Expr::binary(BinOp::Sub, a, b),
    }
}

fn neg(a: Expr) -> Expr {
    match a.as_number() {
        Some(x) => Expr::num(-x),
        None => match a.kind() {
            ExprKind::Neg(inner) => (**inner).clone(),
            _ => Expr::neg(a),
        },
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) => Expr::num(x * y),
        _ if is_zero(&a) || is_zero(&b) => Expr::num(0.0),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::binary(BinOp::Mul, a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_number(), b.as_number()) {
        (Some(x), Some(y)) if y != 0.0 => Expr::num(x / y),
        _ if is_zero(&a) => Expr::num(0.0),
        _ if is_one(&b) => a,
        _ => Expr::binary(BinOp::Div, a, b),
    }
}

type Poly = Vec<Expr>;

fn poly_trim(mut p: Poly) -> Poly {
    while p.len() > 1 && is_zero(p.last().unwrap()) {
        p.pop();
    }
    p
}

fn poly_add(a: Poly, b: Poly, negate_b: bool) -> Poly {
    let n = a.len().max(b.len());
    let mut a = a.into_iter();
    let mut b = b.into_iter();
    let out = (0..n)
        .map(|_| {
            let x = a.next().unwrap_or_else(|| Expr::num(0.0));
            let y = b.next().unwrap_or_else(|| Expr::num(0.0));
            if negate_b {
                sub(x, y)
            } else {
                add(x, y)
            }
        })
        .collect();
    poly_trim(out)
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Expr::num(0.0); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            let term = mul(ai.clone(), bj.clone());
            let slot = core::mem::replace(&mut out[i + j], Expr::num(0.0));
            out[i + j] = add(slot, term);
        }
    }
    poly_trim(out)
}

/// Expands `e` as a polynomial in λ with λ-free coefficient expressions.
fn to_poly(e: &Expr) -> Option<Poly> {
    if !e.depends_on(Var::Lam) {
        return Some(vec![e.clone()]);
    }
    match e.kind() {
        ExprKind::Num(_) | ExprKind::Var(_) => Some(vec![Expr::num(0.0), Expr::num(1.0)]),
        ExprKind::Neg(a) => Some(to_poly(a)?.into_iter().map(neg).collect()),
        ExprKind::Binary(op, l, r) => match op {
            BinOp::Add => Some(poly_add(to_poly(l)?, to_poly(r)?, false)),
            BinOp::Sub => Some(poly_add(to_poly(l)?, to_poly(r)?, true)),
            BinOp::Mul => Some(poly_mul(&to_poly(l)?, &to_poly(r)?)),
            BinOp::Div => {
                if r.depends_on(Var::Lam) {
                    return None;
                }
                Some(to_poly(l)?.into_iter().map(|c| div(c, (**r).clone())).collect())
            }
            BinOp::Pow => {
                if r.depends_on(Var::Lam) {
                    return None;
                }
                let k = r.as_number()?;
                if k < 0.0 || k != libm::trunc(k) || k > 64.0 {
                    return None;
                }
                let base = to_poly(l)?;
                let mut acc = vec![Expr::num(1.0)];
                for _ in 0..k as usize {
                    acc = poly_mul(&acc, &base);
                }
                Some(acc)
            }
        },
        ExprKind::Call(..) => None,
    }
}

/// Splits each λ-polynomial component as `a + bλ + (λ²-1) q(λ)` and returns
/// `f⁺ = a + b`, `f⁻ = a - b` and `g = q`.
pub fn decompose(f: &[Expr]) -> Result<Decomposition, ModelError> {
    let mut out = Decomposition { fplus: Vec::new(), fminus: Vec::new(), g: Vec::new() };
    for (index, e) in f.iter().enumerate() {
        let c = to_poly(e).ok_or(ModelError::NotPolynomial { index })?;
        let d = c.len();
        // p = (λ²-1) q + r  ⇒  q_k = c_{k+2} + q_{k+2}
        let mut q = vec![Expr::num(0.0); d.saturating_sub(2).max(1)];
        for k in (0..d.saturating_sub(2)).rev() {
            let next = if k + 2 < q.len() { q[k + 2].clone() } else { Expr::num(0.0) };
            q[k] = add(c[k + 2].clone(), next);
        }
        let qk = |k: usize| if k < q.len() { q[k].clone() } else { Expr::num(0.0) };
        let ck = |k: usize| if k < d { c[k].clone() } else { Expr::num(0.0) };
        let r0 = add(ck(0), qk(0));
        let r1 = add(ck(1), qk(1));
        out.fplus.push(add(r0.clone(), r1.clone()));
        out.fminus.push(sub(r0, r1));

        let mut g = Expr::num(0.0);
        for (k, coef) in q.into_iter().enumerate() {
            let mono = match k {
                0 => Expr::num(1.0),
                1 => Expr::var(Var::Lam),
                _ => Expr::binary(BinOp::Pow, Expr::var(Var::Lam), Expr::num(k as f64)),
            };
            g = add(g, mul(coef, mono));
        }
        out.g.push(g);
    }
    Ok(out)
}

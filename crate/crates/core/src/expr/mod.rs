//! Vector-field expression language.
//!
//! Expressions are arithmetic trees over the state variables `x1..xn`, model
//! time `t` and the switching multiplier `lam`. Trees are immutable after
//! parsing. Values come from [`Expr::eval`]; exact first derivatives come
//! from forward-mode dual numbers via [`Expr::deriv`].
//!
//! Grammar:
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" unary)?
//! atom  := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-x` is `2^(-x)`. The identifiers `pi` and `e` are
//! folded to numeric literals at parse time.

mod parse;
pub mod scalar;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use parse::parse;
use scalar::{Dual, Scalar};

/// A variable an expression may reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// State component, zero-based (`x1` is `X(0)`).
    X(usize),
    T,
    Lam,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::T => f.write_str("t"),
            Var::Lam => f.write_str("lam"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sign,
    Atan,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Sign,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// `abs` and `sign` have a kink at zero.
    pub fn is_nonsmooth(self) -> bool {
        matches!(self, Func::Abs | Func::Sign)
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Expression tree node. `pos` is the byte offset of the node in the source
/// text (zero for programmatically built nodes); it is ignored by equality.
#[derive(Clone, Debug)]
pub struct Expr {
    kind: ExprKind,
    pos: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Num(a), ExprKind::Num(b)) => a.to_bits() == b.to_bits(),
            (ExprKind::Var(a), ExprKind::Var(b)) => a == b,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a == b,
            (ExprKind::Binary(o1, l1, r1), ExprKind::Binary(o2, l2, r2)) => {
                o1 == o2 && l1 == l2 && r1 == r2
            }
            (ExprKind::Call(f1, a1), ExprKind::Call(f2, a2)) => f1 == f2 && a1 == a2,
            _ => false,
        }
    }
}

/// Kinds of runtime domain failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    /// Negative base with a non-integer exponent, or zero to a negative power.
    Power,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogNonPositive => "log of a non-positive value",
            DomainKind::SqrtNegative => "sqrt of a negative value",
            DomainKind::Power => "power outside its real domain",
        })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("function `{name}` at {pos} takes 1 argument, got {got}")]
    Arity { pos: usize, name: String, got: usize },
    #[error("{kind} at {pos}")]
    Domain { pos: usize, kind: DomainKind },
}

impl ExprError {
    /// Byte offset of the offending node or token.
    pub fn pos(&self) -> usize {
        match self {
            ExprError::Syntax { pos, .. }
            | ExprError::UnknownIdentifier { pos, .. }
            | ExprError::Arity { pos, .. }
            | ExprError::Domain { pos, .. } => *pos,
        }
    }
}

/// Values for one evaluation.
#[derive(Clone, Copy, Debug)]
pub struct Bindings<'a> {
    pub x: &'a [f64],
    pub t: f64,
    pub lam: f64,
}

impl<'a> Bindings<'a> {
    pub fn new(x: &'a [f64], t: f64, lam: f64) -> Self {
        Bindings { x, t, lam }
    }
}

/// Value and first derivative of an expression at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tangent {
    pub value: f64,
    pub slope: f64,
    /// Set when evaluation passed exactly through the kink of `abs`/`sign`;
    /// the slope is then the right-sided one.
    pub kink: bool,
}

impl Expr {
    pub(crate) fn new(kind: ExprKind, pos: usize) -> Self {
        Expr { kind, pos }
    }

    /// Numeric literal. Negative values become a negated literal so that the
    /// printed form parses back to the same tree.
    pub fn num(v: f64) -> Self {
        if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
            Expr::neg(Expr::new(ExprKind::Num(-v), 0))
        } else {
            Expr::new(ExprKind::Num(v), 0)
        }
    }

    pub fn var(v: Var) -> Self {
        Expr::new(ExprKind::Var(v), 0)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Self {
        Expr::new(ExprKind::Neg(Box::new(e)), 0)
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), 0)
    }

    pub fn call(f: Func, arg: Expr) -> Self {
        Expr::new(ExprKind::Call(f, Box::new(arg)), 0)
    }

    pub fn kind(&self) -> &ExprKind {
        &self.kind
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    /// Literal value if this node is a (possibly negated) number.
    pub fn as_number(&self) -> Option<f64> {
        match &self.kind {
            ExprKind::Num(v) => Some(*v),
            ExprKind::Neg(inner) => inner.as_number().map(|v| -v),
            _ => None,
        }
    }

    /// Calls `visit` on every node, pre-order.
    pub fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Var(_) => {}
            ExprKind::Neg(a) | ExprKind::Call(_, a) => a.walk(visit),
            ExprKind::Binary(_, l, r) => {
                l.walk(visit);
                r.walk(visit);
            }
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let ExprKind::Var(v) = e.kind {
                found |= v == var;
            }
        });
        found
    }

    /// Largest state index referenced, one-based (0 when no `x` appears).
    pub fn max_state_index(&self) -> usize {
        let mut m = 0;
        self.walk(&mut |e| {
            if let ExprKind::Var(Var::X(i)) = e.kind {
                m = m.max(i + 1);
            }
        });
        m
    }

    /// True when some function call has an argument depending on `var`.
    pub fn var_inside_call(&self, var: Var) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let ExprKind::Call(_, arg) = &e.kind {
                found |= arg.depends_on(var);
            }
        });
        found
    }

    /// True when `abs` or `sign` is applied to something depending on `var`.
    pub fn nonsmooth_in(&self, var: Var) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let ExprKind::Call(f, arg) = &e.kind {
                found |= f.is_nonsmooth() && arg.depends_on(var);
            }
        });
        found
    }

    /// Evaluates the expression in double precision.
    pub fn eval(&self, b: &Bindings<'_>) -> Result<f64, ExprError> {
        let mut kink = false;
        self.eval_scalar(b.x, b.t, b.lam, &mut kink)
    }

    /// Exact derivative with respect to `var`.
    pub fn deriv(&self, b: &Bindings<'_>, var: Var) -> Result<f64, ExprError> {
        self.tangent(b, var).map(|t| t.slope)
    }

    /// Value, derivative with respect to `var`, and the kink flag.
    pub fn tangent(&self, b: &Bindings<'_>, var: Var) -> Result<Tangent, ExprError> {
        self.directional(b, |v| if v == var { 1.0 } else { 0.0 })
    }

    /// Directional derivative; `seed(v)` gives the tangent component of `v`.
    pub fn directional(
        &self,
        b: &Bindings<'_>,
        seed: impl Fn(Var) -> f64,
    ) -> Result<Tangent, ExprError> {
        let mut kink = false;
        let x: Vec<Dual<f64>> = b
            .x
            .iter()
            .enumerate()
            .map(|(i, &xi)| Dual::new(xi, seed(Var::X(i))))
            .collect();
        let t = Dual::new(b.t, seed(Var::T));
        let lam = Dual::new(b.lam, seed(Var::Lam));
        let d = self.eval_scalar(&x, t, lam, &mut kink)?;
        Ok(Tangent { value: d.re, slope: d.eps, kink })
    }

    /// Generic tree walk shared by the value and derivative paths.
    pub fn eval_scalar<S: Scalar>(
        &self,
        x: &[S],
        t: S,
        lam: S,
        kink: &mut bool,
    ) -> Result<S, ExprError> {
        let domain = |kind| ExprError::Domain { pos: self.pos, kind };
        Ok(match &self.kind {
            ExprKind::Num(v) => S::cst(*v),
            ExprKind::Var(Var::X(i)) => x[*i],
            ExprKind::Var(Var::T) => t,
            ExprKind::Var(Var::Lam) => lam,
            ExprKind::Neg(a) => -a.eval_scalar(x, t, lam, kink)?,
            ExprKind::Binary(op, l, r) => {
                let a = l.eval_scalar(x, t, lam, kink)?;
                let b = r.eval_scalar(x, t, lam, kink)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.re() == 0.0 {
                            return Err(domain(DomainKind::DivisionByZero));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let (base, ex) = (a.re(), b.re());
                        if (base < 0.0 && ex != libm::trunc(ex)) || (base == 0.0 && ex < 0.0) {
                            return Err(domain(DomainKind::Power));
                        }
                        a.pow(b)
                    }
                }
            }
            ExprKind::Call(f, arg) => {
                let a = arg.eval_scalar(x, t, lam, kink)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Tanh => a.tanh(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a.re() <= 0.0 {
                            return Err(domain(DomainKind::LogNonPositive));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a.re() < 0.0 {
                            return Err(domain(DomainKind::SqrtNegative));
                        }
                        a.sqrt()
                    }
                    Func::Atan => a.atan(),
                    Func::Abs | Func::Sign => {
                        if a.re() == 0.0 {
                            *kink = true;
                        }
                        if *f == Func::Abs {
                            a.abs()
                        } else {
                            a.sign()
                        }
                    }
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprKind::Neg(_) => 3,
            ExprKind::Binary(BinOp::Pow, ..) => 4,
            ExprKind::Num(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }
}

struct Child<'a>(&'a Expr, u8);

impl fmt::Display for Child<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.precedence() < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints with the minimum parentheses needed to parse back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            // integers print bare; everything else in the shortest round-trip form
            ExprKind::Num(v) if libm::trunc(*v) == *v && v.abs() < 1e15 => write!(f, "{v}"),
            ExprKind::Num(v) => write!(f, "{v:?}"),
            ExprKind::Var(v) => write!(f, "{v}"),
            ExprKind::Neg(a) => write!(f, "-{}", Child(a, 3)),
            ExprKind::Binary(op, l, r) => {
                let (lp, rp) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                    BinOp::Pow => (5, 3),
                };
                if *op == BinOp::Pow {
                    write!(f, "{}^{}", Child(l, lp), Child(r, rp))
                } else {
                    write!(f, "{} {} {}", Child(l, lp), op.symbol(), Child(r, rp))
                }
            }
            ExprKind::Call(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn ev(src: &str, n: usize, x: &[f64], t: f64, lam: f64) -> f64 {
        parse(src, n).unwrap().eval(&Bindings::new(x, t, lam)).unwrap()
    }

    #[test]
    fn hidden_term_root_evaluates_to_zero() {
        let v = ev("2*lam^2-1", 2, &[0.0, 0.0], 0.0, core::f64::consts::FRAC_1_SQRT_2);
        assert!(v.abs() < 1e-15, "{v}");
    }

    #[test]
    fn identity_eval_and_deriv() {
        let e = parse("x1", 1).unwrap();
        let b = Bindings::new(&[3.5], 0.0, 0.0);
        assert_eq!(e.eval(&b).unwrap(), 3.5);
        assert_eq!(e.deriv(&b, Var::X(0)).unwrap(), 1.0);
    }

    #[test]
    fn tanh_layer_value() {
        let v = ev("tanh(x1/0.001)", 1, &[0.01], 0.0, 0.0);
        assert!((v - 0.999_999_995_877_692_8).abs() < 1e-15, "{v}");
    }

    #[test]
    fn hidden_term_slope_at_root() {
        let e = parse("2*lam^2 - 1", 2).unwrap();
        let b = Bindings::new(&[0.0, 0.0], 0.0, core::f64::consts::FRAC_1_SQRT_2);
        let d = e.deriv(&b, Var::Lam).unwrap();
        assert!((d - 2.0 * core::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn cubic_slope_at_origin() {
        let e = parse("lam - 2*lam^3", 1).unwrap();
        let b = Bindings::new(&[0.0], 0.0, 0.0);
        assert_eq!(e.deriv(&b, Var::Lam).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors_carry_position() {
        let e = parse("1 + log(x1)", 1).unwrap();
        let err = e.eval(&Bindings::new(&[0.0], 0.0, 0.0)).unwrap_err();
        assert_eq!(err, ExprError::Domain { pos: 4, kind: DomainKind::LogNonPositive });
        let e = parse("x1/(x1-1)", 1).unwrap();
        let err = e.eval(&Bindings::new(&[1.0], 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, ExprError::Domain { kind: DomainKind::DivisionByZero, pos: 2 }));
        let e = parse("sqrt(x1)", 1).unwrap();
        assert!(e.eval(&Bindings::new(&[-1.0], 0.0, 0.0)).is_err());
        let e = parse("x1^0.5", 1).unwrap();
        assert!(e.eval(&Bindings::new(&[-1.0], 0.0, 0.0)).is_err());
    }

    #[test]
    fn kink_uses_right_slope_and_flags() {
        let e = parse("abs(x1)", 1).unwrap();
        let tan = e.tangent(&Bindings::new(&[0.0], 0.0, 0.0), Var::X(0)).unwrap();
        assert_eq!(tan.slope, 1.0);
        assert!(tan.kink);
        let e = parse("sign(x1)", 1).unwrap();
        let tan = e.tangent(&Bindings::new(&[0.0], 0.0, 0.0), Var::X(0)).unwrap();
        assert_eq!(tan.slope, 0.0);
        assert!(tan.kink);
        let tan = e.tangent(&Bindings::new(&[2.0], 0.0, 0.0), Var::X(0)).unwrap();
        assert!(!tan.kink);
    }

    #[test]
    fn printer_parenthesizes_minimally() {
        let cases = [
            ("-x1^2", "-x1^2"),
            ("(-x1)^2", "(-x1)^2"),
            ("x1^x2^2", "x1^x2^2"),
            ("(x1^x2)^2", "(x1^x2)^2"),
            ("x1 - (x2 - 1)", "x1 - (x2 - 1)"),
            ("(x1 - x2) - 1", "x1 - x2 - 1"),
            ("x1/(x2*t)", "x1/(x2 * t)".trim()),
            ("2^-x1", "2^-x1"),
        ];
        for (src, _) in cases {
            let e = parse(src, 2).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed, 2).unwrap(), e, "{src} -> {printed}");
        }
        assert_eq!(parse("-x1^2", 1).unwrap().to_string(), "-x1^2");
        assert_eq!(parse("x1 - (x1 - 1)", 1).unwrap().to_string(), "x1 - (x1 - 1)");
    }

    #[test]
    fn negative_literals_print_as_negation() {
        let e = Expr::binary(BinOp::Mul, Expr::num(-2.5), Expr::var(Var::Lam));
        let back = parse(&e.to_string(), 1).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn validation_helpers() {
        let e = parse("sin((1 + lam/2)*pi*t) + x2", 2).unwrap();
        assert!(e.depends_on(Var::Lam));
        assert!(e.var_inside_call(Var::Lam));
        assert!(!e.nonsmooth_in(Var::Lam));
        assert_eq!(e.max_state_index(), 2);
        assert!(parse("abs(lam)*x1", 1).unwrap().nonsmooth_in(Var::Lam));
        assert!(!parse("abs(x1)*lam", 1).unwrap().nonsmooth_in(Var::Lam));
    }
}

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};

use super::{BinOp, Expr, ExprError, ExprKind, Func, Var};

/// Parses `text` as an expression over `x1..xn`, `t` and `lam`.
pub fn parse(text: &str, n: usize) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, n };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn syntax(&self, pos: usize, msg: &str) -> ExprError {
        ExprError::Syntax { pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let at = self.pos;
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), at);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), at);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            let at = self.pos;
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), at));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            let at = self.pos;
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::new(ExprKind::Binary(BinOp::Pow, Box::new(base), Box::new(exp)), at));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = match self.peek() {
            None => return Err(self.syntax(self.src.len(), "unexpected end of input")),
            Some(_) => self.pos,
        };
        let c = self.src[at];
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax(self.pos, "expected `)`"));
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(at);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            return self.ident(at);
        }
        Err(self.syntax(at, &format!("unexpected character `{}`", c as char)))
    }

    fn number(&mut self, at: usize) -> Result<Expr, ExprError> {
        let s = self.src;
        let mut i = at;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        if i < s.len() && s[i] == b'.' {
            i += 1;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
        }
        // exponent only when digits follow, so `2*e` style input stays unambiguous
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = core::str::from_utf8(&s[at..i]).expect("ascii slice");
        let v: f64 = text
            .parse()
            .map_err(|_| self.syntax(at, &format!("malformed number `{text}`")))?;
        if !v.is_finite() {
            return Err(self.syntax(at, "number out of range"));
        }
        self.pos = i;
        Ok(Expr::new(ExprKind::Num(v), at))
    }

    fn ident(&mut self, at: usize) -> Result<Expr, ExprError> {
        let s = self.src;
        let mut i = at;
        while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == b'_') {
            i += 1;
        }
        let name = core::str::from_utf8(&s[at..i]).expect("ascii slice");
        self.pos = i;
        let is_call = self.peek() == Some(b'(');

        if let Some(func) = Func::from_name(name) {
            if !is_call {
                return Err(self.syntax(at, &format!("function `{name}` needs an argument list")));
            }
            self.pos += 1;
            if self.eat(b')') {
                return Err(ExprError::Arity { pos: at, name: name.to_string(), got: 0 });
            }
            let arg = self.expr()?;
            let mut got = 1;
            while self.eat(b',') {
                self.expr()?;
                got += 1;
            }
            if got != 1 {
                return Err(ExprError::Arity { pos: at, name: name.to_string(), got });
            }
            if !self.eat(b')') {
                return Err(self.syntax(self.pos, "expected `)`"));
            }
            return Ok(Expr::new(ExprKind::Call(func, Box::new(arg)), at));
        }

        let kind = match name {
            "pi" => ExprKind::Num(core::f64::consts::PI),
            "e" => ExprKind::Num(core::f64::consts::E),
            "t" => ExprKind::Var(Var::T),
            "lam" => ExprKind::Var(Var::Lam),
            _ => match state_index(name) {
                Some(k) if k >= 1 && k <= self.n => ExprKind::Var(Var::X(k - 1)),
                _ => {
                    return Err(ExprError::UnknownIdentifier { pos: at, name: String::from(name) })
                }
            },
        };
        if is_call {
            return Err(self.syntax(at, &format!("`{name}` is not a function")));
        }
        Ok(Expr::new(kind, at))
    }
}

fn state_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;

    #[test]
    fn hidden_term_tree_shape() {
        let e = parse("2*lam^2 - 1", 2).unwrap();
        let expected = Expr::binary(
            BinOp::Sub,
            Expr::binary(
                BinOp::Mul,
                Expr::num(2.0),
                Expr::binary(BinOp::Pow, Expr::var(Var::Lam), Expr::num(2.0)),
            ),
            Expr::num(1.0),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn pi_is_folded() {
        let e = parse("sin((1 + lam/2)*pi*t)", 2).unwrap();
        let mut saw_pi = false;
        e.walk(&mut |n| {
            if let ExprKind::Num(v) = n.kind() {
                saw_pi |= *v == core::f64::consts::PI;
            }
        });
        assert!(saw_pi);
        assert!(!e.depends_on(Var::X(0)));
        let v = e.eval(&Bindings::new(&[0.0, 0.0], 1.0, 1.0)).unwrap();
        assert!((v - libm::sin(1.5 * core::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let v = parse("-2^2", 0).unwrap().eval(&Bindings::new(&[], 0.0, 0.0)).unwrap();
        assert_eq!(v, -4.0);
        let v = parse("2^3^2", 0).unwrap().eval(&Bindings::new(&[], 0.0, 0.0)).unwrap();
        assert_eq!(v, 512.0);
        let v = parse("2^-1", 0).unwrap().eval(&Bindings::new(&[], 0.0, 0.0)).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn numbers_with_exponents() {
        let v = parse("1.5e-3 + 2E2 + .5", 0).unwrap().eval(&Bindings::new(&[], 0.0, 0.0)).unwrap();
        assert_eq!(v, 1.5e-3 + 200.0 + 0.5);
        assert!(matches!(parse("2e", 0), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("x3", 2), Err(ExprError::UnknownIdentifier { pos: 0, .. })));
        assert!(matches!(parse("x0", 2), Err(ExprError::UnknownIdentifier { .. })));
        assert!(matches!(parse("1 + foo", 2), Err(ExprError::UnknownIdentifier { pos: 4, .. })));
        assert!(matches!(parse("atan(1, 2)", 2), Err(ExprError::Arity { got: 2, .. })));
        assert!(matches!(parse("sin()", 2), Err(ExprError::Arity { got: 0, .. })));
        assert!(matches!(parse("sin", 2), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x1(2)", 2), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("(x1", 2), Err(ExprError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("x1 +", 2), Err(ExprError::Syntax { pos: 4, .. })));
        assert!(matches!(parse("x1 x2", 2), Err(ExprError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("x1 # 2", 2), Err(ExprError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("", 2), Err(ExprError::Syntax { .. })));
    }
}

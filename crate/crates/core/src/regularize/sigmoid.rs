//! Monotone sigmoids `Λ(h/ε)` that tend to `sign(h)` as `ε → 0`.

use core::f64::consts::FRAC_2_PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmoidKind {
    Tanh,
    Arctan,
    /// `2Z(θe^h) − 1` with `Z(z) = z^r/(z^r + θ^r)`, `r = 1/ε`.
    Hill { theta: f64 },
    AlgebraicSqrt,
    /// Smooth but non-analytic; exactly `sign(h)` for `|h| ≥ ε`.
    NonAnalyticBump,
}

impl SigmoidKind {
    pub fn name(self) -> &'static str {
        match self {
            SigmoidKind::Tanh => "tanh",
            SigmoidKind::Arctan => "arctan",
            SigmoidKind::Hill { .. } => "hill",
            SigmoidKind::AlgebraicSqrt => "alg",
            SigmoidKind::NonAnalyticBump => "bump",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sigmoid {
    pub kind: SigmoidKind,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SigmoidError {
    #[error("eps must be positive and finite, got {0}")]
    Eps(f64),
    #[error("Hill threshold must be positive, got {0}")]
    Theta(f64),
    #[error("tail expansion needs |h| > eps (h = {h}, eps = {eps})")]
    InsideLayer { h: f64, eps: f64 },
}

fn sign(v: f64) -> f64 {
    crate::expr::scalar::sign3(v)
}

/// `exp(2/(u−1))`, the building block of the bump; zero at `u = 1`.
fn bump_r(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        libm::exp(2.0 / (u - 1.0))
    }
}

impl Sigmoid {
    pub fn new(kind: SigmoidKind, eps: f64) -> Result<Self, SigmoidError> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(SigmoidError::Eps(eps));
        }
        if let SigmoidKind::Hill { theta } = kind {
            if !(theta.is_finite() && theta > 0.0) {
                return Err(SigmoidError::Theta(theta));
            }
        }
        Ok(Sigmoid { kind, eps })
    }

    pub fn tanh(eps: f64) -> Self {
        Sigmoid { kind: SigmoidKind::Tanh, eps }
    }

    /// `Λ(h/ε)`.
    pub fn eval(&self, h: f64) -> f64 {
        let u = h / self.eps;
        match self.kind {
            SigmoidKind::Tanh => libm::tanh(u),
            SigmoidKind::Arctan => FRAC_2_PI * libm::atan(u),
            // θ cancels: Z(θe^h) = 1/(1 + e^{-h/ε}), so 2Z − 1 = tanh(h/2ε)
            SigmoidKind::Hill { .. } => libm::tanh(0.5 * u),
            SigmoidKind::AlgebraicSqrt => {
                if u.abs() > 1e150 {
                    sign(u)
                } else {
                    u / libm::sqrt(1.0 + u * u)
                }
            }
            SigmoidKind::NonAnalyticBump => {
                if u.abs() >= 1.0 {
                    sign(u)
                } else {
                    // r(−h)^{r(h)} − r(h)^{r(−h)} with r(h) = e^{2ε/(h−ε)}
                    libm::exp(-2.0 * bump_r(u) / (u + 1.0)) - libm::exp(-2.0 * bump_r(-u) / (1.0 - u))
                }
            }
        }
    }

    /// Leading term of `Λ(h/ε) − sign(h)` for `|h| > ε`.
    pub fn predicted_tail(&self, h: f64) -> Result<f64, SigmoidError> {
        if h.abs() <= self.eps {
            return Err(SigmoidError::InsideLayer { h, eps: self.eps });
        }
        let a = (h / self.eps).abs();
        let s = sign(h);
        Ok(match self.kind {
            SigmoidKind::Tanh => -s * 2.0 * libm::exp(-2.0 * a),
            SigmoidKind::Arctan => -s * FRAC_2_PI / a,
            SigmoidKind::Hill { .. } => -s * 2.0 * libm::exp(-a),
            SigmoidKind::AlgebraicSqrt => -s * 0.5 / (a * a),
            SigmoidKind::NonAnalyticBump => 0.0,
        })
    }

    /// `(predicted, actual)` tail error at `h`, with `|h| > ε`.
    pub fn tail_error(&self, h: f64) -> Result<(f64, f64), SigmoidError> {
        let predicted = self.predicted_tail(h)?;
        Ok((predicted, self.eval(h) - sign(h)))
    }
}

/// Free-function form of [`Sigmoid::eval`].
pub fn sigmoid_eval(s: &Sigmoid, h: f64) -> f64 {
    s.eval(h)
}

/// Free-function form of [`Sigmoid::tail_error`].
pub fn tail_error(s: &Sigmoid, h: f64) -> Result<(f64, f64), SigmoidError> {
    s.tail_error(h)
}

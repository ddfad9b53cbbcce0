//! Switching-layer analysis of piecewise-smooth dynamical systems.
//!
//! The crate is `no_std` (it needs `alloc`). Systems are written as
//! expressions in the state `x1..xn`, time `t` and the switching multiplier
//! `lam`, then analysed inside the layer `h(x) = 0, λ ∈ [-1, 1]`,
//! integrated exactly through the discontinuity, or simulated with a
//! smooth or noisy regularization.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod closures;
pub mod expr;
pub mod integrate;
pub mod layer;
pub mod model;
pub mod regularize;
pub mod scenarios;

pub use expr::{parse, Expr, ExprError, Var};
pub use model::{decompose, Decomposition, FieldForm, LayerPoint, ModelError, SwitchedSystem};
pub use scenarios::{catalog, filippov_variant, scenario, Scenario};

//! Nonoscillatory solutions of the self-adjoint equation `(p x')' = q x`
//! with `p, q > 0`, constructed through the two associated Riccati equations
//!
//! ```text
//! u' = q - u^2 / p        u = p x' / x
//! v' = 1/p - q v^2        v = x / (p x')
//! ```
//!
//! The crate classifies an equation by the convergence of `∫ 1/p` and `∫ q`,
//! builds Riccati solutions as fixed points of integral operators on a
//! log-spaced grid, turns them back into solutions `x` and checks the
//! results against asymptotic predictions and closed-form oracles.
//!
//! The crate is `no_std` with `alloc`; the `std` feature (on by default)
//! only adds `std::error::Error` plumbing through `core::error::Error`.

#![cfg_attr(all(not(feature = "std"), not(test)), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classify;
pub mod expr;
pub mod math;
pub mod quad;
pub mod reproduce;
pub mod riccati;
pub mod verify;

pub use expr::{Coefficients, Expr};
pub use quad::{GridFunction, IntegralVerdict, TailConfig};

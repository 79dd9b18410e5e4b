//! Quadrature: adaptive Gauss–Kronrod for closed-form integrands, a
//! tenth-order panel rule for sampled data, doubling-window tests for
//! improper integrals, and the auxiliary profiles `∫1/p`, `∫q` and their
//! tails on equation-adapted grids.

mod gk;
mod grid;
pub mod profile;
pub mod sampled;
mod tail;

use alloc::vec::Vec;
use core::fmt;

pub use gk::{gk15, integrate, Estimate};
pub use grid::{GridFunction, Interp};
pub use profile::{build_grid, GridConfig, GridVariable, Profiles};
pub use tail::{classify_improper, tail_integral, window_edges, window_verdict, IntegralVerdict, TailConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum QuadError {
    NonFinite { t: f64 },
    BadInterval { a: f64, b: f64 },
    BadGrid(&'static str),
    HorizonTooShort { windows: usize },
    NotIntegrable(&'static str),
}

impl fmt::Display for QuadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadError::NonFinite { t } => write!(f, "integrand is not finite at t = {t}"),
            QuadError::BadInterval { a, b } => write!(f, "bad interval [{a}, {b}]"),
            QuadError::BadGrid(msg) => write!(f, "bad grid: {msg}"),
            QuadError::HorizonTooShort { windows } => {
                write!(f, "horizon leaves only {windows} doubling window(s); at least 4 are needed")
            }
            QuadError::NotIntegrable(what) => write!(f, "{what} is not integrable to infinity"),
        }
    }
}

impl core::error::Error for QuadError {}

/// `F(t_i) = ∫_{t_0}^{t_i} f`, panel by panel with Gauss–Kronrod.
pub fn cumulative_integral<F: Fn(f64) -> f64 + ?Sized>(f: &F, nodes: &[f64], rel_tol: f64) -> Result<GridFunction, QuadError> {
    let mut values = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    values.push(0.0);
    for w in nodes.windows(2) {
        acc += integrate(f, w[0], w[1], rel_tol)?.value;
        values.push(acc);
    }
    GridFunction::new(nodes.to_vec(), values, Interp::MonotoneCubic)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_of_power_family_q() {
        // q = 2/t^2 from a = 1 has Q(t) = 2(1 - 1/t).
        let nodes = sampled::log_nodes(1.0, 100.0, 40);
        let g = cumulative_integral(&|t: f64| 2.0 / (t * t), &nodes, 1e-12).unwrap();
        let at10 = nodes.iter().position(|&t| t >= 10.0).unwrap();
        let t = nodes[at10];
        assert!(crate::math::rel_diff(g.values()[at10], 2.0 * (1.0 - 1.0 / t)) <= 1e-8);
    }
}

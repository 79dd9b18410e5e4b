//! Integration and differentiation of data known only at grid nodes.
//!
//! Panel integrals use the degree-9 Lagrange interpolant through ten nearby
//! nodes, integrated exactly, so cumulative sums are tenth-order accurate on
//! smooth data. Derivatives come from Fornberg weights on nine nodes, taken
//! in `ln t` when the grid is positive and strongly stretched.

use alloc::vec::Vec;

use crate::math;

const STENCIL: usize = 10;
const DIFF_STENCIL: usize = 9;

// Five-point Gauss–Legendre on [0, 1]; exact through degree 9, the degree
// of the panel interpolant.
const GL_X: [f64; 5] = [0.046910077030668004, 0.23076534494715845, 0.5, 0.7692346550528415, 0.953089922969332];
const GL_W: [f64; 5] = [0.11846344252809454, 0.23931433524968324, 0.28444444444444444, 0.23931433524968324, 0.11846344252809454];

/// Precomputed panel weights for one grid.
#[derive(Debug, Clone)]
pub struct PanelRule {
    width: usize,
    starts: Vec<usize>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        let width = STENCIL.min(n);
        let panels = n.saturating_sub(1);
        let mut starts = Vec::with_capacity(panels);
        let mut weights = Vec::with_capacity(panels * width);
        for i in 0..panels {
            let s = (i + 1).saturating_sub(width / 2).min(n - width);
            starts.push(s);
            let (a, h) = (nodes[i], nodes[i + 1] - nodes[i]);
            // local coordinates keep the basis well conditioned
            let xs: Vec<f64> = nodes[s..s + width].iter().map(|&x| (x - a) / h).collect();
            for j in 0..width {
                let mut w = 0.0;
                for (&g, &gw) in GL_X.iter().zip(&GL_W) {
                    let mut l = 1.0;
                    for (m, &xm) in xs.iter().enumerate() {
                        if m != j {
                            l *= (g - xm) / (xs[j] - xm);
                        }
                    }
                    w += gw * l;
                }
                weights.push(w * h);
            }
        }
        PanelRule { width, starts, weights }
    }

    pub fn panel_count(&self) -> usize {
        self.starts.len()
    }

    /// `∫_{t_i}^{t_{i+1}}` of the interpolant, one entry per panel.
    pub fn panels(&self, values: &[f64]) -> Vec<f64> {
        self.starts
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let w = &self.weights[i * self.width..(i + 1) * self.width];
                w.iter().zip(&values[s..s + self.width]).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Running integral from the first node; entry 0 is zero.
    pub fn cumulative(&self, values: &[f64]) -> Vec<f64> {
        cumulate(&self.panels(values))
    }

    /// Integral from each node to the last node; last entry is zero.
    pub fn reverse_cumulative(&self, values: &[f64]) -> Vec<f64> {
        reverse_cumulate(&self.panels(values))
    }
}

pub fn cumulate(panels: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(panels.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for &p in panels {
        acc += p;
        out.push(acc);
    }
    out
}

pub fn reverse_cumulate(panels: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; panels.len() + 1];
    let mut acc = 0.0;
    for i in (0..panels.len()).rev() {
        acc += panels[i];
        out[i] = acc;
    }
    out
}

/// Number of panels per block for tail extrapolation: sixteen blocks per grid.
pub fn block_len(panels: usize) -> usize {
    (panels / 16).max(1)
}

/// Sums of consecutive panel blocks of length [`block_len`], aligned to the
/// end of the grid; leftover panels at the start are dropped.
pub fn block_sums(panels: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let m = block_len(panels.len());
    let count = panels.len() / m;
    let first = panels.len() - count * m;
    let sums = (0..count).map(|b| panels[first + b * m..first + (b + 1) * m].iter().sum()).collect();
    let starts = (0..count).map(|b| first + b * m).collect();
    (sums, starts)
}

/// Geometric continuation past the last node from the last two blocks:
/// `B₂ r / (1 − r)` with `r = B₂ / B₁`. `None` when the blocks do not decay.
pub fn geometric_tail(panels: &[f64]) -> Option<f64> {
    let m = block_len(panels.len());
    if panels.len() < 2 * m {
        return None;
    }
    let n = panels.len();
    let b1: f64 = panels[n - 2 * m..n - m].iter().sum();
    let b2: f64 = panels[n - m..].iter().sum();
    if b2 == 0.0 {
        return Some(0.0);
    }
    let r = b2 / b1;
    if !(0.0..1.0).contains(&r) {
        return None;
    }
    Some(b2 * r / (1.0 - r))
}

/// First-derivative weights at every node.
#[derive(Debug, Clone)]
pub struct DiffStencil {
    width: usize,
    starts: Vec<usize>,
    weights: Vec<f64>,
}

impl DiffStencil {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        let width = DIFF_STENCIL.min(n);
        // on stretched positive grids differentiate in ln t: power-like data
        // is far smoother there, which matters most for one-sided stencils
        let log = n > 2 && nodes[0] > 0.0 && nodes[n - 1] - nodes[n - 2] > 4.0 * (nodes[1] - nodes[0]);
        let z: Vec<f64> = if log { nodes.iter().map(|t| math::ln(*t)).collect() } else { nodes.to_vec() };
        let mut starts = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n * width);
        for i in 0..n {
            let s = i.saturating_sub(width / 2).min(n - width);
            starts.push(s);
            let scale = if log { 1.0 / nodes[i] } else { 1.0 };
            weights.extend(fornberg_first(z[i], &z[s..s + width]).into_iter().map(|w| w * scale));
        }
        DiffStencil { width, starts, weights }
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        self.starts
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let w = &self.weights[i * self.width..(i + 1) * self.width];
                w.iter().zip(&values[s..s + self.width]).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// Fornberg's recursion, truncated to the first derivative.
fn fornberg_first(z: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    // c[j][k]: weight of x_j for derivative order k (k = 0, 1)
    let mut c = alloc::vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Log-spaced nodes `lo · (hi/lo)^(i/(n−1))`.
pub fn log_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = math::ln(hi / lo);
    let mut v: Vec<f64> = (0..n).map(|i| lo * math::exp(r * i as f64 / (n - 1) as f64)).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

pub fn linear_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    v[n - 1] = hi;
    v
}

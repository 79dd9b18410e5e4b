//! Grids adapted to an equation and the auxiliary integrals on them:
//! the running integrals of `1/p` and `q` from `a`, and their tails.

use alloc::vec::Vec;

use super::gk::integrate;
use super::sampled::{cumulate, geometric_tail, reverse_cumulate, DiffStencil, PanelRule};
use super::tail::{tail_integral, TailConfig};
use super::{IntegralVerdict, QuadError};
use crate::expr::Coefficients;
use crate::math;

/// Which quantity the grid is geometric in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GridVariable {
    /// `∫_a^t 1/p` (shifted to be at least 1 at `a`); used when it diverges.
    RunningInvP,
    /// `1 / ∫_t^∞ 1/p`; used when `1/p` is integrable.
    InverseTailInvP,
    /// Plain uniform spacing in `t`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridConfig {
    pub nodes: usize,
    /// The grid ends where the grid variable reaches this value (or at the
    /// tail horizon in `t`, whichever comes first).
    pub scale: f64,
    pub tail: TailConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { nodes: 512, scale: 1e6, tail: TailConfig::default() }
    }
}

const INNER_TOL: f64 = 1e-13;

/// `∫_a^t 1/p` plus the family offset.
pub fn running_inv_p(c: &Coefficients, t: f64) -> Result<f64, QuadError> {
    Ok(c.cum_inv_p_at_a + integrate(&c.inv_p_fn(), c.a, t, INNER_TOL)?.value)
}

/// Value of `∫_t^∞ 1/p`, or an error if it is not judged convergent.
pub fn tail_inv_p(c: &Coefficients, t: f64, cfg: &TailConfig) -> Result<f64, QuadError> {
    match tail_integral(&c.inv_p_fn(), t, cfg)? {
        IntegralVerdict::Convergent { value, .. } => Ok(value),
        _ => Err(QuadError::NotIntegrable("1/p")),
    }
}

/// Solves `∫_from^s f = target` for `s > from` (`f > 0`), never passing
/// `limit`. Returns `limit` itself when even that is not enough.
fn invert_forward<F: Fn(f64) -> f64>(f: &F, from: f64, target: f64, limit: f64) -> Result<(f64, bool), QuadError> {
    let f0 = f(from);
    if !(f0 > 0.0) || !f0.is_finite() {
        return Err(QuadError::NonFinite { t: from });
    }
    let mut step = (target / f0).max(1e-12 * math::abs(from).max(1.0));
    let (mut lo, mut f_lo) = (from, -target);
    let (mut hi, mut f_hi);
    loop {
        hi = (from + step).min(limit);
        f_hi = f_lo + integrate(f, lo, hi, INNER_TOL)?.value;
        if f_hi >= 0.0 {
            break;
        }
        if hi >= limit {
            return Ok((limit, false));
        }
        lo = hi;
        f_lo = f_hi;
        step *= 2.0;
    }
    for _ in 0..200 {
        if math::abs(f_lo) <= 1e-15 * target {
            return Ok((lo, true));
        }
        if math::abs(f_hi) <= 1e-15 * target || hi - lo <= 4.0 * f64::EPSILON * math::abs(hi) {
            return Ok((hi, true));
        }
        let d = f(lo);
        let mut s = if d > 0.0 { lo - f_lo / d } else { f64::NAN };
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let fs = f_lo + integrate(f, lo, s, INNER_TOL)?.value;
        if fs < 0.0 {
            lo = s;
            f_lo = fs;
        } else {
            hi = s;
            f_hi = fs;
        }
    }
    Ok((hi, true))
}

/// Mirror image of [`invert_forward`]: `∫_s^from f = target`, `s < from`.
fn invert_backward<F: Fn(f64) -> f64>(f: &F, from: f64, target: f64, limit: f64) -> Result<(f64, bool), QuadError> {
    let g = |x: f64| f(-x);
    let (s, ok) = invert_forward(&g, -from, target, -limit)?;
    Ok((-s, ok))
}

/// Nodes from `start` on which the chosen variable is geometric.
pub fn build_grid(c: &Coefficients, var: GridVariable, start: f64, cfg: &GridConfig) -> Result<Vec<f64>, QuadError> {
    let n = cfg.nodes;
    if n < 8 {
        return Err(QuadError::BadGrid("at least eight nodes are needed"));
    }
    if start < c.a {
        return Err(QuadError::BadGrid("grid starts before a"));
    }
    let f = c.inv_p_fn();
    let limit = cfg.tail.horizon;
    match var {
        GridVariable::Uniform => {
            let hi = limit.min(start + cfg.scale);
            Ok(super::sampled::linear_nodes(start, hi, n))
        }
        GridVariable::RunningInvP => {
            let shift = (1.0 - c.cum_inv_p_at_a).max(0.0);
            let g0 = running_inv_p(c, start)? + shift;
            if g0 >= cfg.scale {
                return Err(QuadError::BadGrid("grid variable already exceeds the scale at the start"));
            }
            let (h, reached) = invert_forward(&f, start, cfg.scale - g0, limit)?;
            let g_end = if reached { cfg.scale } else { g0 + integrate(&f, start, h, INNER_TOL)?.value };
            let targets = super::sampled::log_nodes(g0, g_end, n);
            let mut nodes = Vec::with_capacity(n);
            nodes.push(start);
            for i in 1..n {
                let prev = nodes[i - 1];
                let (t, _) = invert_forward(&f, prev, targets[i] - targets[i - 1], h)?;
                nodes.push(if i == n - 1 { h } else { t });
            }
            dedup_check(nodes)
        }
        GridVariable::InverseTailInvP => {
            let pi0 = tail_inv_p(c, start, &cfg.tail)?;
            let pi_end = 1.0 / cfg.scale;
            if pi0 <= pi_end {
                return Err(QuadError::BadGrid("grid variable already exceeds the scale at the start"));
            }
            // leave the tail integral at the end room for its doubling windows
            let (h, _) = invert_forward(&f, start, pi0 - pi_end, limit / 32.0)?;
            let pi_h = tail_inv_p(c, h, &cfg.tail)?;
            let pi_start = pi_h + integrate(&f, start, h, INNER_TOL)?.value;
            let inv = super::sampled::log_nodes(1.0 / pi_start, 1.0 / pi_h, n);
            let mut nodes = alloc::vec![0.0; n];
            nodes[n - 1] = h;
            for i in (1..n - 1).rev() {
                let delta = 1.0 / inv[i] - 1.0 / inv[i + 1];
                let (t, _) = invert_backward(&f, nodes[i + 1], delta, start)?;
                nodes[i] = t;
            }
            nodes[0] = start;
            dedup_check(nodes)
        }
    }
}

fn dedup_check(nodes: Vec<f64>) -> Result<Vec<f64>, QuadError> {
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(QuadError::BadGrid("grid collapsed; the scale is too fine for this horizon"));
    }
    Ok(nodes)
}

/// Coefficients and their integrals sampled on one grid.
#[derive(Debug, Clone)]
pub struct Profiles {
    pub nodes: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub cum_inv_p: Vec<f64>,
    pub cum_q: Vec<f64>,
    pub tail_inv_p: Option<Vec<f64>>,
    pub tail_q: Option<Vec<f64>>,
    pub rule: PanelRule,
    pub diff: DiffStencil,
    pub variable: GridVariable,
}

/// `∫_H^∞ f`: doubling windows when the horizon leaves room for them,
/// otherwise geometric continuation of the grid's last blocks.
fn tail_beyond<F: Fn(f64) -> f64>(f: &F, h: f64, panels: &[f64], cfg: &TailConfig) -> Option<f64> {
    if cfg.horizon >= h + 16.0 * math::abs(h).max(1.0) {
        match tail_integral(f, h, cfg) {
            Ok(IntegralVerdict::Convergent { value, .. }) => Some(value),
            _ => None,
        }
    } else {
        geometric_tail(panels)
    }
}

impl Profiles {
    pub fn build(c: &Coefficients, nodes: Vec<f64>, variable: GridVariable, cfg: &TailConfig) -> Result<Self, QuadError> {
        let n = nodes.len();
        let mut p = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        for &t in &nodes {
            p.push(c.p_at(t).map_err(|_| QuadError::NonFinite { t })?);
            q.push(c.q_at(t).map_err(|_| QuadError::NonFinite { t })?);
        }
        let inv_p = c.inv_p_fn();
        let qf = c.q_fn();
        let mut inv_p_panels = Vec::with_capacity(n - 1);
        let mut q_panels = Vec::with_capacity(n - 1);
        for w in nodes.windows(2) {
            inv_p_panels.push(integrate(&inv_p, w[0], w[1], INNER_TOL)?.value);
            q_panels.push(integrate(&qf, w[0], w[1], INNER_TOL)?.value);
        }
        let p0 = running_inv_p(c, nodes[0])?;
        let q0 = integrate(&qf, c.a, nodes[0], INNER_TOL)?.value;
        let cum_inv_p = cumulate(&inv_p_panels).into_iter().map(|v| v + p0).collect();
        let cum_q = cumulate(&q_panels).into_iter().map(|v| v + q0).collect();
        let h = nodes[n - 1];
        let tail_inv_p =
            tail_beyond(&inv_p, h, &inv_p_panels, cfg).map(|t| reverse_cumulate(&inv_p_panels).into_iter().map(|v| v + t).collect());
        let tail_q = tail_beyond(&qf, h, &q_panels, cfg).map(|t| reverse_cumulate(&q_panels).into_iter().map(|v| v + t).collect());
        let rule = PanelRule::new(&nodes);
        let diff = DiffStencil::new(&nodes);
        Ok(Profiles { nodes, p, q, cum_inv_p, cum_q, tail_inv_p, tail_q, rule, diff, variable })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn horizon(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Value of the grid variable at each node.
    pub fn grid_variable(&self) -> Vec<f64> {
        match self.variable {
            GridVariable::RunningInvP => {
                let shift = (1.0 - self.cum_inv_p[0]).max(0.0);
                self.cum_inv_p.iter().map(|v| v + shift).collect()
            }
            GridVariable::InverseTailInvP => match &self.tail_inv_p {
                Some(tp) => tp.iter().map(|v| 1.0 / v).collect(),
                None => self.nodes.clone(),
            },
            GridVariable::Uniform => self.nodes.clone(),
        }
    }

    /// Nodes whose grid variable lies in `[2 g(T), g(H)/2]`, the window
    /// where asymptotic comparisons are made.
    pub fn comparison_window(&self) -> (f64, f64) {
        let g = self.grid_variable();
        let n = g.len();
        let (lo, hi) = match self.variable {
            GridVariable::Uniform => {
                let span = self.horizon() - self.start();
                (self.start() + span / 8.0, self.horizon() - span / 8.0)
            }
            _ => {
                let lo_i = g.partition_point(|&x| x < 2.0 * g[0]).min(n - 1);
                let hi_i = g.partition_point(|&x| x <= 0.5 * g[n - 1]).saturating_sub(1);
                (self.nodes[lo_i], self.nodes[hi_i.max(lo_i)])
            }
        };
        (lo, hi)
    }
}

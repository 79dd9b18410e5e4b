//! Functions sampled on a strictly increasing grid.

use alloc::vec::Vec;

use super::QuadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Interp {
    Linear,
    /// Fritsch–Carlson slopes; never overshoots monotone data.
    MonotoneCubic,
    /// Cubic Hermite with caller-supplied derivatives at the nodes.
    Hermite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    interp: Interp,
}

fn check_nodes(nodes: &[f64]) -> Result<(), QuadError> {
    if nodes.len() < 2 {
        return Err(QuadError::BadGrid("need at least two nodes"));
    }
    if nodes.iter().any(|t| !t.is_finite()) {
        return Err(QuadError::BadGrid("non-finite node"));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(QuadError::BadGrid("nodes must be strictly increasing"));
    }
    Ok(())
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, interp: Interp) -> Result<Self, QuadError> {
        check_nodes(&nodes)?;
        if values.len() != nodes.len() {
            return Err(QuadError::BadGrid("value count differs from node count"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(QuadError::NonFinite { t: nodes[i] });
        }
        let slopes = match interp {
            Interp::Linear => Vec::new(),
            Interp::MonotoneCubic => pchip_slopes(&nodes, &values),
            Interp::Hermite => return Err(QuadError::BadGrid("Hermite interpolation needs slopes")),
        };
        Ok(GridFunction { nodes, values, slopes, interp })
    }

    pub fn with_slopes(nodes: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self, QuadError> {
        check_nodes(&nodes)?;
        if values.len() != nodes.len() || slopes.len() != nodes.len() {
            return Err(QuadError::BadGrid("value or slope count differs from node count"));
        }
        if let Some(i) = values.iter().zip(&slopes).position(|(v, s)| !v.is_finite() || !s.is_finite()) {
            return Err(QuadError::NonFinite { t: nodes[i] });
        }
        Ok(GridFunction { nodes, values, slopes, interp: Interp::Hermite })
    }

    /// Samples `f` at the nodes.
    pub fn sample<F: Fn(f64) -> f64>(nodes: &[f64], f: F, interp: Interp) -> Result<Self, QuadError> {
        let values = nodes.iter().map(|&t| f(t)).collect();
        Self::new(nodes.to_vec(), values, interp)
    }

    pub fn constant(nodes: &[f64], c: f64) -> Result<Self, QuadError> {
        Self::new(nodes.to_vec(), alloc::vec![c; nodes.len()], Interp::Linear)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interp(&self) -> Interp {
        self.interp
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

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Index of the panel `[t_i, t_{i+1}]` containing `t`.
    fn panel(&self, t: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => (i.max(1) - 1).min(n - 2),
        }
    }

    /// Interpolated value; `None` outside the grid.
    pub fn eval(&self, t: f64) -> Option<f64> {
        if !(t >= self.start() && t <= self.end()) {
            return None;
        }
        let i = self.panel(t);
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        Some(match self.interp {
            Interp::Linear => y0 + s * (y1 - y0),
            _ => {
                let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
            }
        })
    }

    /// Pointwise map onto the same nodes (interpolation resets to the
    /// monotone cubic unless linear was requested).
    pub fn map<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<Self, QuadError> {
        let values = self.nodes.iter().zip(&self.values).map(|(&t, &v)| f(t, v)).collect();
        let interp = if self.interp == Interp::Linear { Interp::Linear } else { Interp::MonotoneCubic };
        Self::new(self.nodes.clone(), values, interp)
    }

    /// Indices of the nodes inside `[lo, hi]`.
    pub fn indices_in(&self, lo: f64, hi: f64) -> core::ops::Range<usize> {
        let start = self.nodes.partition_point(|&t| t < lo);
        let end = self.nodes.partition_point(|&t| t <= hi);
        start..end.max(start)
    }
}

/// PCHIP slopes: weighted harmonic means of adjacent secants, zero at
/// local extrema, shape-preserving one-sided formulas at the ends.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return alloc::vec![del[0], del[0]];
    }
    let mut d = alloc::vec![0.0; n];
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    let end = |h0: f64, h1: f64, m0: f64, m1: f64| {
        let mut d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() || m0 == 0.0 {
            d = 0.0;
        } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            d = 3.0 * m0;
        }
        d
    };
    d[0] = end(h[0], h[1], del[0], del[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

//! Improper integrals `∫_t^∞ f` judged from doubling windows.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::gk::integrate;
use super::QuadError;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailConfig {
    /// Largest `t` any window may reach.
    pub horizon: f64,
    /// A window ratio at or below this counts as geometric decay.
    pub r_conv: f64,
    /// Convergent needs the extrapolated tail below `tolerance · |value|`.
    pub tolerance: f64,
    /// Partial sums beyond this are declared divergent on the spot.
    pub divergence_threshold: f64,
    /// Relative tolerance of each window's Gauss–Kronrod integral.
    pub quad_tol: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig { horizon: 1e6, r_conv: 0.75, tolerance: 1e-2, divergence_threshold: 1e15, quad_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "verdict", rename_all = "snake_case"))]
pub enum IntegralVerdict {
    Convergent { value: f64, error_estimate: f64 },
    Divergent { evidence: String },
    Inconclusive { reason: String },
}

impl IntegralVerdict {
    pub fn is_convergent(&self) -> bool {
        matches!(self, IntegralVerdict::Convergent { .. })
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, IntegralVerdict::Divergent { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            IntegralVerdict::Convergent { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            IntegralVerdict::Convergent { .. } => "convergent",
            IntegralVerdict::Divergent { .. } => "divergent",
            IntegralVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

impl fmt::Display for IntegralVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegralVerdict::Convergent { value, error_estimate } => {
                write!(f, "convergent ({value:.6e} ± {error_estimate:.1e})")
            }
            IntegralVerdict::Divergent { evidence } => write!(f, "divergent ({evidence})"),
            IntegralVerdict::Inconclusive { reason } => write!(f, "inconclusive ({reason})"),
        }
    }
}

/// Window edges `t + s(2^j − 1)` with `s = max(|t|, 1)`, as far as the
/// horizon allows.
pub fn window_edges(t: f64, horizon: f64) -> Vec<f64> {
    let s = math::abs(t).max(1.0);
    let mut edges = alloc::vec![t];
    for j in 1..64 {
        let b = t + s * ((1u64 << j) as f64 - 1.0);
        if b > horizon {
            break;
        }
        edges.push(b);
    }
    edges
}

/// `∫_t^∞ f`, integrating doubling windows up to the horizon.
pub fn tail_integral<F: Fn(f64) -> f64 + ?Sized>(f: &F, t: f64, cfg: &TailConfig) -> Result<IntegralVerdict, QuadError> {
    let edges = window_edges(t, cfg.horizon);
    if edges.len() < 5 {
        return Err(QuadError::HorizonTooShort { windows: edges.len().saturating_sub(1) });
    }
    let mut sums = Vec::with_capacity(edges.len() - 1);
    let mut partial = 0.0;
    for w in edges.windows(2) {
        let est = integrate(f, w[0], w[1], cfg.quad_tol)?;
        partial += est.value;
        sums.push(est.value);
        if math::abs(partial) > cfg.divergence_threshold {
            return Ok(IntegralVerdict::Divergent {
                evidence: alloc::format!("partial sum exceeds {:e} by t = {}", cfg.divergence_threshold, w[1]),
            });
        }
        // Once decay is fast and the last window is below round-off, the
        // remaining windows cannot change anything (and may overflow).
        let m = sums.len();
        if m >= 4
            && (m - 4..m - 1).all(|j| math::abs(sums[j + 1]) <= cfg.r_conv * math::abs(sums[j]))
            && math::abs(sums[m - 1]) <= f64::EPSILON * math::abs(partial)
        {
            break;
        }
    }
    Ok(window_verdict(&sums, &edges[..sums.len()], cfg))
}

/// `∫_a^∞ f`; the same procedure as [`tail_integral`] started at `a`.
pub fn classify_improper<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, cfg: &TailConfig) -> Result<IntegralVerdict, QuadError> {
    tail_integral(f, a, cfg)
}

/// Verdict from consecutive window contributions `sums` starting at
/// `starts`. Windows are expected to grow geometrically in some variable,
/// as doubling windows in `t` or equal blocks of a log-spaced grid do.
pub fn window_verdict(sums: &[f64], starts: &[f64], cfg: &TailConfig) -> IntegralVerdict {
    let n = sums.len();
    let partial: f64 = sums.iter().sum();
    if n < 4 {
        return IntegralVerdict::Inconclusive { reason: "fewer than four windows".to_string() };
    }
    if sums[n - 1] == 0.0 && sums[n - 2] == 0.0 {
        return IntegralVerdict::Convergent { value: partial, error_estimate: 0.0 };
    }
    let w: Vec<f64> = sums.iter().map(|s| math::abs(*s)).collect();
    let tail_w = &w[n - 4..];
    if tail_w.iter().all(|&x| x > 0.0) && tail_w.windows(2).all(|p| p[1] >= p[0] * (1.0 - 1e-9)) {
        return IntegralVerdict::Divergent { evidence: "window contributions stop decreasing".to_string() };
    }
    let ratio = |j: usize| if w[j] == 0.0 { 0.0 } else { w[j + 1] / w[j] };
    let r_last = ratio(n - 2);
    let tail = if r_last < 1.0 { w[n - 1] * r_last / (1.0 - r_last) } else { f64::INFINITY };
    let value = partial + tail * sums[n - 1].signum();
    let geometric = (n - 4..n - 1).all(|j| ratio(j) <= cfg.r_conv);
    if geometric && tail <= cfg.tolerance * math::abs(value) {
        return IntegralVerdict::Convergent { value, error_estimate: tail };
    }
    // Logarithmic decay: fit ln W against ln ln(start) over the last windows.
    let fit: Vec<(f64, f64)> = (n.saturating_sub(6)..n)
        .filter(|&j| starts[j] > core::f64::consts::E && w[j] > 0.0)
        .map(|j| (math::ln(math::ln(starts[j])), math::ln(w[j])))
        .collect();
    if fit.len() >= 4 {
        let m = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / m;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = fit.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            let beta = -sxy / sxx;
            if beta <= 1.25 {
                return IntegralVerdict::Divergent { evidence: alloc::format!("window contributions fall only like (log t)^-{beta:.2}") };
            }
            if beta >= 1.75 && tail.is_finite() {
                return IntegralVerdict::Convergent { value, error_estimate: tail };
            }
            return IntegralVerdict::Inconclusive { reason: alloc::format!("window contributions fall like (log t)^-{beta:.2}") };
        }
    }
    IntegralVerdict::Inconclusive { reason: alloc::format!("last window ratio {r_last:.3} is not clearly below {}", cfg.r_conv) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_square_converges_to_one() {
        let v = classify_improper(&|t: f64| 1.0 / (t * t), 1.0, &TailConfig::default()).unwrap();
        match v {
            IntegralVerdict::Convergent { value, error_estimate } => {
                assert!((value - 1.0).abs() <= 1e-6, "{value}");
                assert!(error_estimate > 0.0 && error_estimate < 1e-5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn harmonic_diverges() {
        let v = classify_improper(&|t: f64| 1.0 / t, 1.0, &TailConfig::default()).unwrap();
        assert!(v.is_divergent(), "{v:?}");
    }

    #[test]
    fn log_divergence_is_caught() {
        let v = classify_improper(&|t: f64| 1.0 / (t * t.ln()), 3.0, &TailConfig::default()).unwrap();
        assert!(v.is_divergent(), "{v:?}");
    }

    #[test]
    fn log_squared_converges() {
        let v = classify_improper(&|t: f64| 1.0 / (t * t.ln() * t.ln()), 3.0, &TailConfig::default()).unwrap();
        assert!(v.is_convergent(), "{v:?}");
    }

    #[test]
    fn log_three_halves_is_inconclusive() {
        let v = classify_improper(&|t: f64| 1.0 / (t * t.ln().powf(1.5)), 3.0, &TailConfig::default()).unwrap();
        assert!(matches!(v, IntegralVerdict::Inconclusive { .. }), "{v:?}");
    }

    #[test]
    fn exponential_growth_hits_threshold() {
        let v = classify_improper(&|t: f64| t.exp(), 0.0, &TailConfig::default()).unwrap();
        assert!(v.is_divergent());
    }

    #[test]
    fn short_horizon_is_an_error() {
        let cfg = TailConfig { horizon: 10.0, ..TailConfig::default() };
        assert!(matches!(tail_integral(&|t: f64| 1.0 / (t * t), 5.0, &cfg), Err(QuadError::HorizonTooShort { .. })));
    }
}

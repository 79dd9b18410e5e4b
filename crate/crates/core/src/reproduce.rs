//! Solutions `x` of `(p x')' = q x` rebuilt from Riccati solutions, and
//! the second solution obtained from a first one.

use alloc::vec::Vec;
use core::fmt;

use crate::classify::{Case, Limit, TerminalTag};
use crate::expr::Coefficients;
use crate::math;
use crate::quad::sampled::{block_sums, geometric_tail, reverse_cumulate, PanelRule};
use crate::quad::{integrate, window_verdict, GridFunction, IntegralVerdict, Interp, QuadError, TailConfig};
use crate::riccati::{Equation, RiccatiSolution};

/// Which end the exponent's integral is anchored at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variant {
    /// `∫_T^t`, used when the integrand is not integrable; `x(T) = 1`.
    Cumulative,
    /// `−∫_t^∞`, used when it is; `x(∞) = 1`.
    Tail,
}

/// The two formulas through the second Riccati equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum VFormula {
    /// `x = exp(∫ 1/(p v))`.
    Exponential,
    /// `x = v exp(∫ q v)`.
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "from", rename_all = "snake_case"))]
pub enum Source {
    FromU { variant: Variant },
    FromUAlt { variant: Variant },
    FromV { formula: VFormula, variant: Variant },
    CompanionNonprincipal,
    CompanionPrincipal,
    ExactOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Principal {
    Principal,
    Nonprincipal,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: GridFunction,
    /// Quasi-derivative `p x'`.
    pub dx: GridFunction,
    pub source: Source,
    pub principal: Principal,
    pub terminal_estimate: Option<TerminalTag>,
    /// Multiplier applied after the formula's own normalization.
    pub normalization: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReproduceError {
    /// The requested variant contradicts the integrability of the exponent.
    VariantMismatch {
        variant: Variant,
        verdict: IntegralVerdict,
    },
    WrongEquation,
    Vanishes {
        t: f64,
    },
    NonFinite {
        t: f64,
    },
    /// The companion through the tail needs `∫ 1/(p x²) < ∞`.
    NotApplicable,
    NotPositive {
        t: f64,
    },
    Quad(QuadError),
}

impl fmt::Display for ReproduceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReproduceError::VariantMismatch { variant, verdict } => {
                write!(f, "{variant:?} variant requested but the exponent integral is {verdict}")
            }
            ReproduceError::WrongEquation => f.write_str("Riccati solution belongs to the other equation"),
            ReproduceError::Vanishes { t } => write!(f, "Riccati function vanishes at t = {t}"),
            ReproduceError::NonFinite { t } => write!(f, "solution is not finite at t = {t}"),
            ReproduceError::NotApplicable => f.write_str("x is principal; the tail companion does not exist"),
            ReproduceError::NotPositive { t } => write!(f, "x is not positive at t = {t}"),
            ReproduceError::Quad(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ReproduceError {}

impl From<QuadError> for ReproduceError {
    fn from(e: QuadError) -> Self {
        ReproduceError::Quad(e)
    }
}

fn sample(nodes: &[f64], f: impl Fn(f64) -> Result<f64, crate::expr::EvalError>) -> Result<Vec<f64>, ReproduceError> {
    nodes.iter().map(|&t| f(t).map_err(|_| ReproduceError::NonFinite { t })).collect()
}

/// Verdict on `∫^∞ h` from the grid alone: sums over sixteen blocks.
pub fn grid_verdict(nodes: &[f64], rule: &PanelRule, h: &[f64]) -> IntegralVerdict {
    let panels = rule.panels(h);
    let (sums, starts) = block_sums(&panels);
    let starts: Vec<f64> = starts.iter().map(|&i| nodes[i]).collect();
    window_verdict(&sums, &starts, &TailConfig::default())
}

/// Signed exponent: `∫_T^t h` or `−∫_t^∞ h`, checking the variant
/// against the grid verdict (an inconclusive verdict allows either).
fn exponent(nodes: &[f64], h: &[f64], variant: Variant) -> Result<Vec<f64>, ReproduceError> {
    let rule = PanelRule::new(nodes);
    let verdict = grid_verdict(nodes, &rule, h);
    let mismatch = match variant {
        Variant::Cumulative => verdict.is_convergent(),
        Variant::Tail => verdict.is_divergent(),
    };
    if mismatch {
        return Err(ReproduceError::VariantMismatch { variant, verdict });
    }
    Ok(match variant {
        Variant::Cumulative => rule.cumulative(h),
        Variant::Tail => {
            let panels = rule.panels(h);
            let beyond = geometric_tail(&panels).unwrap_or(0.0);
            reverse_cumulate(&panels).into_iter().map(|v| -(v + beyond)).collect()
        }
    })
}

fn exp_all(nodes: &[f64], e: &[f64], pre: impl Fn(usize) -> f64) -> Result<Vec<f64>, ReproduceError> {
    e.iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = pre(i) * math::exp(v);
            if x.is_finite() && x > 0.0 {
                Ok(x)
            } else {
                Err(ReproduceError::NonFinite { t: nodes[i] })
            }
        })
        .collect()
}

impl Solution {
    /// Assembles a solution and decides the principal flag.
    pub fn new(
        x: Vec<f64>,
        dx: Vec<f64>,
        nodes: &[f64],
        source: Source,
        normalization: f64,
        c: &Coefficients,
    ) -> Result<Self, ReproduceError> {
        if let Some(i) = x.iter().position(|&v| !(v > 0.0)) {
            return Err(ReproduceError::NotPositive { t: nodes[i] });
        }
        let slopes: Vec<f64> = {
            let p = sample(nodes, |t| c.p_at(t))?;
            (0..nodes.len()).map(|i| dx[i] / p[i]).collect()
        };
        let xg = GridFunction::with_slopes(nodes.to_vec(), x, slopes)?;
        let dxg = GridFunction::new(nodes.to_vec(), dx, Interp::MonotoneCubic)?;
        let mut s = Solution { x: xg, dx: dxg, source, principal: Principal::Undetermined, terminal_estimate: None, normalization };
        s.principal = principal_flag(&s, c)?;
        Ok(s)
    }

    pub fn nodes(&self) -> &[f64] {
        self.x.nodes()
    }

    /// Fills in [`Solution::terminal_estimate`] for the given case.
    pub fn with_terminal_estimate(mut self, case: Case) -> Self {
        self.terminal_estimate = estimate_terminal_state(&self, case, &TrendConfig::default());
        self
    }

    /// `Dx / x`, the first Riccati function of this solution.
    pub fn u(&self) -> Vec<f64> {
        self.dx.values().iter().zip(self.x.values()).map(|(d, x)| d / x).collect()
    }

    /// `x / Dx`, the second Riccati function.
    pub fn v(&self) -> Vec<f64> {
        self.x.values().iter().zip(self.dx.values()).map(|(x, d)| x / d).collect()
    }
}

/// Principal iff `∫ 1/(p x²)` diverges, judged from the grid.
pub fn principal_flag(s: &Solution, c: &Coefficients) -> Result<Principal, ReproduceError> {
    let nodes = s.nodes();
    let p = sample(nodes, |t| c.p_at(t))?;
    let h: Vec<f64> = (0..nodes.len()).map(|i| 1.0 / (p[i] * s.x.values()[i] * s.x.values()[i])).collect();
    if h.iter().any(|v| !v.is_finite()) {
        return Ok(Principal::Undetermined);
    }
    Ok(match grid_verdict(nodes, &PanelRule::new(nodes), &h) {
        IntegralVerdict::Divergent { .. } => Principal::Principal,
        IntegralVerdict::Convergent { .. } => Principal::Nonprincipal,
        IntegralVerdict::Inconclusive { .. } => Principal::Undetermined,
    })
}

/// `x = scale · exp(±∫ u/p)`, `Dx = u x`.
pub fn reproduce_from_u(u: &GridFunction, c: &Coefficients, variant: Variant, scale: f64) -> Result<Solution, ReproduceError> {
    let nodes = u.nodes();
    let p = sample(nodes, |t| c.p_at(t))?;
    let h: Vec<f64> = (0..nodes.len()).map(|i| u.values()[i] / p[i]).collect();
    let e = exponent(nodes, &h, variant)?;
    let x = exp_all(nodes, &e, |_| scale)?;
    let dx = (0..nodes.len()).map(|i| u.values()[i] * x[i]).collect();
    Solution::new(x, dx, nodes, Source::FromU { variant }, scale, c)
}

/// `x = exp(±∫ q/u) / |u|`, `Dx = u x`. The absolute value keeps `x`
/// positive when `u < 0`.
pub fn reproduce_from_u_alt(u: &GridFunction, c: &Coefficients, variant: Variant, scale: f64) -> Result<Solution, ReproduceError> {
    let nodes = u.nodes();
    if let Some(i) = u.values().iter().position(|&v| v == 0.0) {
        return Err(ReproduceError::Vanishes { t: nodes[i] });
    }
    let q = sample(nodes, |t| c.q_at(t))?;
    let h: Vec<f64> = (0..nodes.len()).map(|i| q[i] / u.values()[i]).collect();
    let e = exponent(nodes, &h, variant)?;
    let x = exp_all(nodes, &e, |i| scale / math::abs(u.values()[i]))?;
    let dx = (0..nodes.len()).map(|i| u.values()[i] * x[i]).collect();
    Solution::new(x, dx, nodes, Source::FromUAlt { variant }, scale, c)
}

/// Through the second Riccati equation: `x = exp(±∫ 1/(p v))` or
/// `x = |v| exp(±∫ q v)`; `Dx = x / v` either way.
pub fn reproduce_from_v(
    v: &GridFunction,
    c: &Coefficients,
    formula: VFormula,
    variant: Variant,
    scale: f64,
) -> Result<Solution, ReproduceError> {
    let nodes = v.nodes();
    if let Some(i) = v.values().iter().position(|&x| x == 0.0) {
        return Err(ReproduceError::Vanishes { t: nodes[i] });
    }
    let vv = v.values();
    let x = match formula {
        VFormula::Exponential => {
            let p = sample(nodes, |t| c.p_at(t))?;
            let h: Vec<f64> = (0..nodes.len()).map(|i| 1.0 / (p[i] * vv[i])).collect();
            let e = exponent(nodes, &h, variant)?;
            exp_all(nodes, &e, |_| scale)?
        }
        VFormula::Scaled => {
            let q = sample(nodes, |t| c.q_at(t))?;
            let h: Vec<f64> = (0..nodes.len()).map(|i| q[i] * vv[i]).collect();
            let e = exponent(nodes, &h, variant)?;
            exp_all(nodes, &e, |i| scale * math::abs(vv[i]))?
        }
    };
    let dx = (0..nodes.len()).map(|i| x[i] / vv[i]).collect();
    Solution::new(x, dx, nodes, Source::FromV { formula, variant }, scale, c)
}

/// Dispatches on the solution's equation with the usual formula choice:
/// `exp(∫u/p)` for the first equation and `|v| exp(∫qv)` for the second.
pub fn reproduce(sol: &RiccatiSolution, c: &Coefficients, variant: Variant, scale: f64) -> Result<Solution, ReproduceError> {
    match sol.equation {
        Equation::R1 => reproduce_from_u(&sol.f, c, variant, scale),
        Equation::R2 => reproduce_from_v(&sol.f, c, VFormula::Scaled, variant, scale),
    }
}

/// Tries the tail variant first and falls back to the cumulative one when
/// the grid says the exponent is not integrable.
pub fn reproduce_auto(sol: &RiccatiSolution, c: &Coefficients) -> Result<Solution, ReproduceError> {
    match reproduce(sol, c, Variant::Tail, 1.0) {
        Err(ReproduceError::VariantMismatch { .. }) => reproduce(sol, c, Variant::Cumulative, 1.0),
        other => other,
    }
}

/// Panel integrals of `1/(p x²)`, with `x` interpolated through `ln x`
/// (whose slope `Dx/(p x)` is known) so rapid growth costs no accuracy.
fn inverse_square_panels(x: &Solution, c: &Coefficients) -> Result<Vec<f64>, ReproduceError> {
    let nodes = x.nodes();
    let p = sample(nodes, |t| c.p_at(t))?;
    let lx: Vec<f64> = x.x.values().iter().map(|&v| math::ln(v)).collect();
    let slopes: Vec<f64> = (0..nodes.len()).map(|i| x.dx.values()[i] / (p[i] * x.x.values()[i])).collect();
    let log_x = GridFunction::with_slopes(nodes.to_vec(), lx, slopes)?;
    let h = |t: f64| {
        let lx = log_x.eval(t).unwrap_or(f64::NAN);
        c.p_at(t).map(|p| math::exp(-2.0 * lx) / p).unwrap_or(f64::NAN)
    };
    let mut panels = Vec::with_capacity(nodes.len() - 1);
    for w in nodes.windows(2) {
        panels.push(integrate(&h, w[0], w[1], 1e-12)?.value);
    }
    Ok(panels)
}

/// `x₂ = x ∫_T^t ds/(p x²)`, `Dx₂ = Dx ∫_T^t ds/(p x²) + 1/x`. Nodes
/// before `t0` are dropped.
pub fn companion_nonprincipal(x: &Solution, c: &Coefficients, t0: f64) -> Result<Solution, ReproduceError> {
    let x = restrict(x, c, t0)?;
    let nodes = x.nodes();
    let panels = inverse_square_panels(&x, c)?;
    let j = crate::quad::sampled::cumulate(&panels);
    let xs = x.x.values();
    let ds = x.dx.values();
    let x2: Vec<f64> = (0..nodes.len()).map(|i| xs[i] * j[i]).collect();
    let dx2: Vec<f64> = (0..nodes.len()).map(|i| ds[i] * j[i] + 1.0 / xs[i]).collect();
    // x₂ vanishes at T itself; start the solution one node later
    let keep = 1..nodes.len();
    Solution::new(x2[keep.clone()].to_vec(), dx2[keep.clone()].to_vec(), &nodes[keep], Source::CompanionNonprincipal, 1.0, c)
}

/// `x₂ = x ∫_t^∞ ds/(p x²)`, `Dx₂ = Dx ∫_t^∞ ds/(p x²) − 1/x`.
pub fn companion_principal(x: &Solution, c: &Coefficients) -> Result<Solution, ReproduceError> {
    let nodes = x.nodes();
    let panels = inverse_square_panels(x, c)?;
    let (sums, starts) = block_sums(&panels);
    let starts: Vec<f64> = starts.iter().map(|&i| nodes[i]).collect();
    if !window_verdict(&sums, &starts, &TailConfig::default()).is_convergent() {
        return Err(ReproduceError::NotApplicable);
    }
    let beyond = geometric_tail(&panels).ok_or(ReproduceError::NotApplicable)?;
    let k: Vec<f64> = reverse_cumulate(&panels).into_iter().map(|v| v + beyond).collect();
    let xs = x.x.values();
    let ds = x.dx.values();
    let x2 = (0..nodes.len()).map(|i| xs[i] * k[i]).collect();
    let dx2 = (0..nodes.len()).map(|i| ds[i] * k[i] - 1.0 / xs[i]).collect();
    Solution::new(x2, dx2, nodes, Source::CompanionPrincipal, 1.0, c)
}

fn restrict(x: &Solution, c: &Coefficients, t0: f64) -> Result<Solution, ReproduceError> {
    if t0 <= x.x.start() {
        return Ok(x.clone());
    }
    let r = x.x.indices_in(t0, x.x.end());
    if r.len() < 8 {
        return Err(ReproduceError::Quad(QuadError::BadGrid("start point leaves too few nodes")));
    }
    let nodes = &x.nodes()[r.clone()];
    Solution::new(x.x.values()[r.clone()].to_vec(), x.dx.values()[r].to_vec(), nodes, x.source, x.normalization, c)
}

/// Thresholds for reading limits off the end of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrendConfig {
    /// Ratios between checkpoints within this of 1 mean a finite limit.
    pub band: f64,
    /// Checkpoints are this many nodes apart (as a fraction of the grid).
    pub spacing: f64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig { band: 0.02, spacing: 1.0 / 16.0 }
    }
}

fn limit_of(vals: &[f64], idx: &[usize], cfg: &TrendConfig) -> Option<Limit> {
    let f: Vec<f64> = idx.iter().map(|&i| math::abs(vals[i])).collect();
    if f.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let r: Vec<f64> = f.windows(2).map(|w| w[1] / w[0]).collect();
    if r.iter().all(|x| math::abs(x - 1.0) <= cfg.band) {
        Some(Limit::FiniteNonzero)
    } else if r.iter().all(|&x| x > 1.0) {
        Some(Limit::Infinite)
    } else if r.iter().all(|&x| x < 1.0) {
        Some(Limit::Zero)
    } else {
        None
    }
}

/// Reads `|x(∞)|` and `|Dx(∞)|` off four checkpoints at the end of the
/// grid and maps them to a terminal-state type admissible in `case`.
pub fn estimate_terminal_state(s: &Solution, case: Case, cfg: &TrendConfig) -> Option<TerminalTag> {
    let n = s.x.len();
    let m = ((n as f64 * cfg.spacing) as usize).max(1);
    if n < 3 * m + 1 {
        return None;
    }
    let idx = [n - 1 - 3 * m, n - 1 - 2 * m, n - 1 - m, n - 1];
    let xs = s.x.values();
    let ds = s.dx.values();
    let sign = (xs[idx[0]] * ds[idx[0]]).signum();
    if idx.iter().any(|&i| (xs[i] * ds[i]).signum() != sign) {
        return None;
    }
    let xl = limit_of(xs, &idx, cfg)?;
    let dl = limit_of(ds, &idx, cfg)?;
    TerminalTag::from_limits(xl, dl, case)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};
    use crate::quad::sampled::linear_nodes;

    fn unit() -> Coefficients {
        Coefficients::new(Expr::Const(1.0), Expr::Const(1.0), 0.0).unwrap()
    }

    #[test]
    fn constant_u_gives_exponentials() {
        let nodes = linear_nodes(0.0, 20.0, 401);
        let c = unit();
        let u = GridFunction::constant(&nodes, 1.0).unwrap();
        let s = reproduce_from_u(&u, &c, Variant::Cumulative, 1.0).unwrap();
        for (i, &t) in nodes.iter().enumerate() {
            assert!(math::rel_diff(s.x.values()[i], t.exp()) < 1e-12);
        }
        assert_eq!(s.principal, Principal::Nonprincipal);
        let alt = reproduce_from_u_alt(&u, &c, Variant::Cumulative, 1.0).unwrap();
        assert!(math::rel_diff(alt.x.last(), 20f64.exp()) < 1e-12);
        let m = GridFunction::constant(&nodes, -1.0).unwrap();
        let s = reproduce_from_u(&m, &c, Variant::Cumulative, 1.0).unwrap();
        assert_eq!(s.principal, Principal::Principal);
        assert_eq!(s.with_terminal_estimate(Case::CaseBoth).terminal_estimate, Some(TerminalTag::I4));
        assert!(matches!(reproduce_from_u(&m, &c, Variant::Tail, 1.0), Err(ReproduceError::VariantMismatch { .. })));
    }

    #[test]
    fn constant_v_matches_constant_u() {
        let nodes = linear_nodes(0.0, 10.0, 201);
        let c = Coefficients::new(Expr::Const(1.0), Expr::Const(4.0), 0.0).unwrap();
        let v = GridFunction::constant(&nodes, 0.5).unwrap();
        let s = reproduce_from_v(&v, &c, VFormula::Scaled, Variant::Cumulative, 1.0).unwrap();
        // x = (1/2) e^{2t}
        assert!(math::rel_diff(s.x.last(), 0.5 * 20f64.exp()) < 1e-12);
        let e = reproduce_from_v(&v, &c, VFormula::Exponential, Variant::Cumulative, 1.0).unwrap();
        assert!(math::rel_diff(e.x.last(), 20f64.exp()) < 1e-12);
        assert!(math::rel_diff(e.dx.last(), 2.0 * 20f64.exp()) < 1e-12);
    }

    #[test]
    fn companions_of_exponentials() {
        let nodes = linear_nodes(0.0, 8.0, 257);
        let c = unit();
        let down = reproduce_from_u(&GridFunction::constant(&nodes, -1.0).unwrap(), &c, Variant::Cumulative, 1.0).unwrap();
        let up = companion_nonprincipal(&down, &c, 0.0).unwrap();
        for (i, &t) in up.nodes().iter().enumerate() {
            assert!(math::rel_diff(up.x.values()[i], t.sinh()) < 1e-10, "{t}");
            assert!(math::rel_diff(up.dx.values()[i], t.cosh()) < 1e-10, "{t}");
        }
        assert_eq!(up.principal, Principal::Nonprincipal);
        let grow = reproduce_from_u(&GridFunction::constant(&nodes, 1.0).unwrap(), &c, Variant::Cumulative, 1.0).unwrap();
        let decay = companion_principal(&grow, &c).unwrap();
        for (i, &t) in nodes.iter().enumerate() {
            assert!(math::rel_diff(decay.x.values()[i], 0.5 * (-t).exp()) < 1e-10, "{t}");
        }
        assert_eq!(companion_principal(&down, &c), Err(ReproduceError::NotApplicable));
    }

    #[test]
    fn power_companion() {
        // x = 1/t for q = 2/t²; the companion from 1 is (t² − 1/t)/3
        let c = Coefficients::new(Expr::Const(1.0), parse("2/t^2").unwrap(), 1.0).unwrap();
        let nodes = crate::quad::sampled::log_nodes(1.0, 1e3, 512);
        let u = GridFunction::sample(&nodes, |t| -1.0 / t, Interp::MonotoneCubic).unwrap();
        let x = reproduce_from_u(&u, &c, Variant::Cumulative, 1.0).unwrap();
        assert_eq!(x.principal, Principal::Principal);
        let y = companion_nonprincipal(&x, &c, 1.0).unwrap();
        for (i, &t) in y.nodes().iter().enumerate() {
            assert!(math::rel_diff(y.x.values()[i], (t * t - 1.0 / t) / 3.0) < 1e-8, "{t}");
        }
        assert_eq!(y.principal, Principal::Nonprincipal);
        assert_eq!(y.with_terminal_estimate(Case::CaseI).terminal_estimate, Some(TerminalTag::I2));
    }
}

//! Coefficient pairs `(p, q)` and the built-in families that assemble `q`
//! from `p` and a shape rule.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{add, div, log, mul, pow, sub, EvalError, Expr};
use crate::math;
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FamilyKind {
    /// `q = k / (p P^λ (log P)^μ)` with `P` the running integral of `1/p`.
    PowerLog,
    /// `q = (k/p) π^-λ (log 1/π)^μ` with `π` the tail integral of `1/p`.
    TailPowerLog,
    /// `q = k² / p`; `u ≡ ±k` solve the first Riccati equation exactly.
    ConstantQ,
    /// `q = φ²/p + φ'` with `φ > 0` increasing; `u = φ` is exact.
    R1Growing,
    /// `q = Φ²/p − Φ'` with `Φ > 0` decreasing; `u = −Φ` is exact.
    R1Decaying,
    /// `q = (1/p − φ')/φ²` with `φ > 0` decreasing; `v = φ` is exact.
    R2Growing,
    /// `q = (1/p + Φ')/Φ²` with `Φ > 0` increasing; `v = −Φ` is exact.
    R2Decaying,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 7] = [
        FamilyKind::PowerLog,
        FamilyKind::TailPowerLog,
        FamilyKind::ConstantQ,
        FamilyKind::R1Growing,
        FamilyKind::R1Decaying,
        FamilyKind::R2Growing,
        FamilyKind::R2Decaying,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::PowerLog => "power_log",
            FamilyKind::TailPowerLog => "tail_power_log",
            FamilyKind::ConstantQ => "constant_q",
            FamilyKind::R1Growing => "r1_growing",
            FamilyKind::R1Decaying => "r1_decaying",
            FamilyKind::R2Growing => "r2_growing",
            FamilyKind::R2Decaying => "r2_decaying",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inputs for [`make_family`]. Only the fields the family uses are read.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub p: Expr,
    pub a: f64,
    pub k: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Closed form of `∫ 1/p` (defaults to `t/p` when `p` is constant).
    pub cum_inv_p: Option<Expr>,
    /// Closed form of `∫_t^∞ 1/p`.
    pub tail_inv_p: Option<Expr>,
    /// The generator `φ` (or `Φ`) and its derivative.
    pub phi: Option<Expr>,
    pub dphi: Option<Expr>,
    /// An antiderivative of `φ/p` (generators on the first Riccati equation)
    /// or of `1/(pφ)` (second), when known in closed form.
    pub antiderivative: Option<Expr>,
}

impl FamilySpec {
    pub fn new(p: Expr, a: f64) -> Self {
        FamilySpec { p, a, k: 1.0, lambda: 2.0, mu: 0.0, cum_inv_p: None, tail_inv_p: None, phi: None, dphi: None, antiderivative: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyError {
    Missing(&'static str),
    InvalidParameter(String),
    NotPositive {
        what: &'static str,
        t: f64,
    },
    Eval(EvalError),
    /// A supplied closed form disagrees with quadrature of its definition.
    Inconsistent {
        what: &'static str,
        t: f64,
        rel: f64,
    },
    Quadrature(String),
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::Missing(what) => write!(f, "family needs `{what}`"),
            FamilyError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            FamilyError::NotPositive { what, t } => write!(f, "{what} is not positive at t = {t}"),
            FamilyError::Eval(e) => write!(f, "{e}"),
            FamilyError::Inconsistent { what, t, rel } => {
                write!(f, "{what} disagrees with quadrature near t = {t} (relative {rel:.2e})")
            }
            FamilyError::Quadrature(msg) => write!(f, "quadrature failed: {msg}"),
        }
    }
}

impl core::error::Error for FamilyError {}

impl From<EvalError> for FamilyError {
    fn from(e: EvalError) -> Self {
        FamilyError::Eval(e)
    }
}

/// The coefficient pair of one equation on `[a, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub p: Expr,
    pub q: Expr,
    pub a: f64,
    /// Value given to `∫ 1/p` at `a`, so that the running integral can match
    /// a family's closed form (zero for plain coefficients).
    pub cum_inv_p_at_a: f64,
    pub family: Option<(FamilyKind, FamilySpec)>,
}

/// Points used to sanity-check coefficients: `a` and 64 points spread
/// geometrically over `(a, a + 100]`.
pub(crate) fn probe_points(a: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(65);
    pts.push(a);
    for j in 0..64 {
        let s = 1e-3 * math::pow(1e5, j as f64 / 63.0);
        pts.push(a + s);
    }
    pts
}

impl Coefficients {
    /// Plain coefficients. Parameters must already be bound; `p` and `q`
    /// are checked positive at the probe points.
    pub fn new(p: Expr, q: Expr, a: f64) -> Result<Self, FamilyError> {
        let c = Coefficients { p, q, a, cum_inv_p_at_a: 0.0, family: None };
        c.check_positive()?;
        Ok(c)
    }

    fn check_positive(&self) -> Result<(), FamilyError> {
        if !self.a.is_finite() {
            return Err(FamilyError::InvalidParameter("a must be finite".into()));
        }
        for t in probe_points(self.a) {
            if self.p.eval(t)? <= 0.0 {
                return Err(FamilyError::NotPositive { what: "p", t });
            }
            if self.q.eval(t)? <= 0.0 {
                return Err(FamilyError::NotPositive { what: "q", t });
            }
        }
        Ok(())
    }

    pub fn p_at(&self, t: f64) -> Result<f64, EvalError> {
        self.p.eval(t)
    }

    pub fn q_at(&self, t: f64) -> Result<f64, EvalError> {
        self.q.eval(t)
    }

    /// `1/p` as a plain closure; evaluation failures come back as NaN so
    /// the quadrature layer reports them with the offending `t`.
    pub fn inv_p_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |t| self.p.eval(t).map(|p| 1.0 / p).unwrap_or(f64::NAN)
    }

    pub fn q_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |t| self.q.eval(t).unwrap_or(f64::NAN)
    }

    pub fn family_kind(&self) -> Option<FamilyKind> {
        self.family.as_ref().map(|(k, _)| *k)
    }

    pub fn family_spec(&self) -> Option<&FamilySpec> {
        self.family.as_ref().map(|(_, s)| s)
    }
}

fn power_factor(base: Expr, ex: f64) -> Option<Expr> {
    if ex == 0.0 {
        None
    } else if ex == 1.0 {
        Some(base)
    } else {
        Some(pow(base, Expr::Const(ex)))
    }
}

fn require<'a>(e: &'a Option<Expr>, what: &'static str) -> Result<&'a Expr, FamilyError> {
    e.as_ref().ok_or(FamilyError::Missing(what))
}

/// Builds a family member. Closed forms supplied by the caller (`∫1/p`,
/// `∫_t^∞ 1/p`, `φ'`) are checked against quadrature or finite differences
/// at the probe points before anything is returned.
pub fn make_family(kind: FamilyKind, spec: &FamilySpec) -> Result<Coefficients, FamilyError> {
    let a = spec.a;
    let p = spec.p.clone();
    let mut offset = 0.0;
    let q = match kind {
        FamilyKind::PowerLog | FamilyKind::TailPowerLog => {
            if !(spec.k > 0.0) {
                return Err(FamilyError::InvalidParameter("k must be positive".into()));
            }
            if !spec.lambda.is_finite() || !spec.mu.is_finite() {
                return Err(FamilyError::InvalidParameter("lambda and mu must be finite".into()));
            }
            // `g` is P for PowerLog and 1/π for TailPowerLog; both grow.
            let g = if kind == FamilyKind::PowerLog {
                let big_p = match &spec.cum_inv_p {
                    Some(e) => e.clone(),
                    None if !p.depends_on_t() => {
                        let p0 = p.eval(a)?;
                        if p0 == 1.0 {
                            Expr::Var
                        } else {
                            div(Expr::Var, Expr::Const(p0))
                        }
                    }
                    None => return Err(FamilyError::Missing("cum_inv_p")),
                };
                check_running_integral(&p, &big_p, a)?;
                offset = big_p.eval(a)?;
                big_p
            } else {
                let tail = require(&spec.tail_inv_p, "tail_inv_p")?.clone();
                check_tail_integral(&p, &tail, a)?;
                div(Expr::Const(1.0), tail)
            };
            let g_a = g.eval(a)?;
            if !(g_a > 0.0) || (spec.mu != 0.0 && g_a < core::f64::consts::E) {
                return Err(FamilyError::InvalidParameter(alloc::format!(
                    "growth variable at a is {g_a}; needs > 0, and >= e when mu != 0"
                )));
            }
            let factors = [power_factor(g.clone(), spec.lambda), power_factor(log(g), spec.mu)];
            if kind == FamilyKind::PowerLog {
                let den = factors.into_iter().flatten().fold(p.clone(), mul);
                div(Expr::Const(spec.k), den)
            } else {
                let num = factors.into_iter().flatten().fold(Expr::Const(spec.k), mul);
                div(num, p.clone())
            }
        }
        FamilyKind::ConstantQ => {
            if !(spec.k > 0.0) {
                return Err(FamilyError::InvalidParameter("k must be positive".into()));
            }
            if let Some(big_p) = &spec.cum_inv_p {
                check_running_integral(&p, big_p, a)?;
                offset = big_p.eval(a)?;
            }
            div(Expr::Const(spec.k * spec.k), p.clone())
        }
        FamilyKind::R1Growing | FamilyKind::R1Decaying | FamilyKind::R2Growing | FamilyKind::R2Decaying => {
            let phi = require(&spec.phi, "phi")?.clone();
            let dphi = require(&spec.dphi, "dphi")?.clone();
            check_derivative(&phi, &dphi, a)?;
            for t in probe_points(a) {
                if phi.eval(t)? <= 0.0 {
                    return Err(FamilyError::NotPositive { what: "phi", t });
                }
            }
            let sq = pow(phi.clone(), Expr::Const(2.0));
            let inv_p = div(Expr::Const(1.0), p.clone());
            match kind {
                FamilyKind::R1Growing => add(div(sq, p.clone()), dphi),
                FamilyKind::R1Decaying => sub(div(sq, p.clone()), dphi),
                FamilyKind::R2Growing => div(sub(inv_p, dphi), sq),
                _ => div(add(inv_p, dphi), sq),
            }
        }
    };
    let mut c = Coefficients { p, q, a, cum_inv_p_at_a: offset, family: Some((kind, spec.clone())) };
    c.check_positive()?;
    if let Some(big_p) = &spec.cum_inv_p {
        if kind != FamilyKind::PowerLog && kind != FamilyKind::ConstantQ {
            check_running_integral(&c.p, big_p, a)?;
            c.cum_inv_p_at_a = big_p.eval(a)?;
        }
    }
    Ok(c)
}

fn check_running_integral(p: &Expr, big_p: &Expr, a: f64) -> Result<(), FamilyError> {
    let inv_p = |t: f64| p.eval(t).map(|v| 1.0 / v).unwrap_or(f64::NAN);
    let pts = probe_points(a);
    for w in pts.windows(2) {
        let want = big_p.eval(w[1])? - big_p.eval(w[0])?;
        let got = quad::integrate(&inv_p, w[0], w[1], 1e-12).map_err(|e| FamilyError::Quadrature(alloc::format!("{e}")))?.value;
        let rel = math::rel_diff(want, got);
        if rel > 1e-6 {
            return Err(FamilyError::Inconsistent { what: "cum_inv_p", t: w[1], rel });
        }
    }
    Ok(())
}

fn check_tail_integral(p: &Expr, tail: &Expr, a: f64) -> Result<(), FamilyError> {
    let inv_p = |t: f64| p.eval(t).map(|v| 1.0 / v).unwrap_or(f64::NAN);
    let pts = probe_points(a);
    for &t in &pts {
        if tail.eval(t)? <= 0.0 {
            return Err(FamilyError::NotPositive { what: "tail_inv_p", t });
        }
    }
    for w in pts.windows(2) {
        let want = tail.eval(w[0])? - tail.eval(w[1])?;
        let got = quad::integrate(&inv_p, w[0], w[1], 1e-12).map_err(|e| FamilyError::Quadrature(alloc::format!("{e}")))?.value;
        let rel = math::rel_diff(want, got);
        if rel > 1e-6 {
            return Err(FamilyError::Inconsistent { what: "tail_inv_p", t: w[1], rel });
        }
    }
    Ok(())
}

fn check_derivative(f: &Expr, df: &Expr, a: f64) -> Result<(), FamilyError> {
    for t in probe_points(a).into_iter().skip(8) {
        let h = 1e-4 * t.abs().max(1.0);
        // five-point central difference
        let d = (f.eval(t - 2.0 * h)? - 8.0 * f.eval(t - h)? + 8.0 * f.eval(t + h)? - f.eval(t + 2.0 * h)?) / (12.0 * h);
        let want = df.eval(t)?;
        let scale = want.abs().max(f.eval(t)?.abs() / t.abs().max(1.0)).max(1e-300);
        let rel = (d - want).abs() / scale;
        if rel > 1e-6 {
            return Err(FamilyError::Inconsistent { what: "dphi", t, rel });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn power_log(k: f64, lambda: f64, mu: f64) -> Coefficients {
        let mut s = FamilySpec::new(Expr::Const(1.0), core::f64::consts::E);
        s.k = k;
        s.lambda = lambda;
        s.mu = mu;
        make_family(FamilyKind::PowerLog, &s).unwrap()
    }

    #[test]
    fn power_log_matches_hand_formula() {
        let c = power_log(0.5, 2.0, 0.0);
        assert_eq!(c.cum_inv_p_at_a, core::f64::consts::E);
        for t in probe_points(c.a) {
            let want = 0.5 / (t * t);
            assert!(math::rel_diff(c.q_at(t).unwrap(), want) <= 1e-12);
        }
        let c = power_log(2.0, 2.5, -1.0);
        for t in probe_points(c.a) {
            let want = 2.0 / (math::pow(t, 2.5) * math::pow(math::ln(t), -1.0));
            assert!(math::rel_diff(c.q_at(t).unwrap(), want) <= 1e-12);
        }
    }

    #[test]
    fn tail_power_log_matches_hand_formula() {
        let mut s = FamilySpec::new(parse("exp(t)").unwrap(), 1.0);
        s.tail_inv_p = Some(parse("exp(-t)").unwrap());
        s.k = 1.0;
        s.lambda = 1.5;
        s.mu = 0.0;
        let c = make_family(FamilyKind::TailPowerLog, &s).unwrap();
        for t in probe_points(1.0) {
            let want = math::exp(0.5 * t);
            assert!(math::rel_diff(c.q_at(t).unwrap(), want) <= 1e-12);
        }
    }

    #[test]
    fn generators_reproduce_their_q() {
        let mut s = FamilySpec::new(parse("exp(-t)").unwrap(), 0.0);
        s.phi = Some(parse("exp(t)").unwrap());
        s.dphi = Some(parse("exp(t)").unwrap());
        let c = make_family(FamilyKind::R1Growing, &s).unwrap();
        for t in probe_points(0.0) {
            let want = math::exp(t) + math::exp(3.0 * t);
            assert!(math::rel_diff(c.q_at(t).unwrap(), want) <= 1e-12);
        }
        let mut s = FamilySpec::new(parse("exp(-3*t)").unwrap(), 0.0);
        s.phi = Some(parse("exp(-t)").unwrap());
        s.dphi = Some(parse("-exp(-t)").unwrap());
        let c = make_family(FamilyKind::R1Decaying, &s).unwrap();
        for t in probe_points(0.0) {
            let want = math::exp(-t) + math::exp(t);
            assert!(math::rel_diff(c.q_at(t).unwrap(), want) <= 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut s = FamilySpec::new(Expr::Const(1.0), 1.0);
        s.k = -1.0;
        assert!(make_family(FamilyKind::PowerLog, &s).is_err());
        let mut s = FamilySpec::new(Expr::Const(1.0), 1.0);
        s.mu = 1.0;
        assert!(matches!(make_family(FamilyKind::PowerLog, &s), Err(FamilyError::InvalidParameter(_))));
        let mut s = FamilySpec::new(Expr::Var, 1.0);
        s.cum_inv_p = Some(parse("t").unwrap());
        assert!(matches!(make_family(FamilyKind::PowerLog, &s), Err(FamilyError::Inconsistent { .. })));
        let mut s = FamilySpec::new(Expr::Const(1.0), 1.0);
        s.phi = Some(parse("exp(t)").unwrap());
        s.dphi = Some(parse("2*exp(t)").unwrap());
        assert!(matches!(make_family(FamilyKind::R1Growing, &s), Err(FamilyError::Inconsistent { .. })));
        assert!(Coefficients::new(Expr::Const(1.0), parse("-1").unwrap(), 0.0).is_err());
    }
}

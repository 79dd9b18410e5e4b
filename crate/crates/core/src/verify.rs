//! Quantitative checks: asymptotic equivalence, Wronskians, equation
//! residuals, and comparison with closed-form solutions.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::classify::{Case, EquationClass};
use crate::expr::{div, exp, mul, neg, pow, Coefficients, Expr, FamilyKind};
use crate::math;
use crate::quad::profile::Profiles;
use crate::quad::sampled::DiffStencil;
use crate::quad::{GridFunction, QuadError, TailConfig};
use crate::reproduce::{ReproduceError, Solution, Source};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: String,
    /// The claim being tested, e.g. `x1 ~ P`.
    pub target: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub window: (f64, f64),
}

impl Check {
    /// Passes when `measured ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, target: impl Into<String>, measured: f64, tolerance: f64, window: (f64, f64)) -> Self {
        Check { name: name.into(), target: target.into(), measured, tolerance, pass: measured <= tolerance, window }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub window: (f64, f64),
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn extend(&mut self, other: VerificationReport) {
        if self.checks.is_empty() {
            self.window = other.window;
        }
        self.checks.extend(other.checks);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyError {
    InsufficientWindow {
        checkpoints: usize,
    },
    Disjoint,
    NoTheorem(Case),
    BasisSize {
        expected: usize,
        found: usize,
    },
    FamilyMismatch,
    /// A closed-form oracle failed its own residual check.
    OracleInvalid {
        label: String,
        residual: f64,
    },
    Reproduce(ReproduceError),
    Quad(QuadError),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::InsufficientWindow { checkpoints } => write!(f, "window holds only {checkpoints} checkpoint(s); 4 needed"),
            VerifyError::Disjoint => f.write_str("the two solutions share no nodes"),
            VerifyError::NoTheorem(c) => write!(f, "no moderate-basis asymptotics for {c}"),
            VerifyError::BasisSize { expected, found } => write!(f, "basis needs {expected} solutions, got {found}"),
            VerifyError::FamilyMismatch => f.write_str("oracle belongs to a different family"),
            VerifyError::OracleInvalid { label, residual } => write!(f, "oracle {label} has residual {residual:.2e}"),
            VerifyError::Reproduce(e) => write!(f, "{e}"),
            VerifyError::Quad(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for VerifyError {}

impl From<QuadError> for VerifyError {
    fn from(e: QuadError) -> Self {
        VerifyError::Quad(e)
    }
}

impl From<ReproduceError> for VerifyError {
    fn from(e: ReproduceError) -> Self {
        VerifyError::Reproduce(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioResult {
    /// `f/g` at the last checkpoint.
    pub limit_estimate: f64,
    /// `|f/g − 1|` at the last checkpoint.
    pub deviation: f64,
    pub equivalent: bool,
}

/// Compares `f/g` at eight checkpoints spread evenly (by node index)
/// through `window` on `f`'s grid. Equivalent when the last three ratios
/// lie within `band` of 1 and their deviation does not grow.
pub fn asymptotic_ratio(f: &GridFunction, g: &GridFunction, window: (f64, f64), band: f64) -> Result<RatioResult, VerifyError> {
    let range = f.indices_in(window.0, window.1);
    let idx: Vec<usize> = range.clone().filter(|&i| g.eval(f.nodes()[i]).is_some()).collect();
    if idx.len() < 4 {
        return Err(VerifyError::InsufficientWindow { checkpoints: idx.len() });
    }
    let picks: Vec<usize> = (0..8).map(|k| idx[k * (idx.len() - 1) / 7]).collect();
    let mut ratios = Vec::with_capacity(8);
    for &i in &picks {
        let t = f.nodes()[i];
        let gv = g.eval(t).unwrap_or(f64::NAN);
        ratios.push(f.values()[i] / gv);
    }
    ratios.dedup();
    if ratios.len() < 4 {
        // fewer distinct nodes than checkpoints; fall back to all of them
        ratios = idx.iter().map(|&i| f.values()[i] / g.eval(f.nodes()[i]).unwrap_or(f64::NAN)).collect();
    }
    let m = ratios.len();
    let dev: Vec<f64> = ratios[m - 3..].iter().map(|r| math::abs(r - 1.0)).collect();
    let shrinking = dev[2] <= dev[0] * (1.0 + 1e-6) + 1e-12;
    let limit = ratios[m - 1];
    let equivalent = limit.is_finite() && dev.iter().all(|d| *d <= band) && shrinking;
    Ok(RatioResult { limit_estimate: limit, deviation: dev[2], equivalent })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Wronskian {
    pub c: f64,
    pub rel_variation: f64,
}

/// `C = x₂ Dx₁ − x₁ Dx₂` over the nodes the two solutions share.
pub fn wronskian(x1: &Solution, x2: &Solution) -> Result<Wronskian, VerifyError> {
    wronskian_on(x1, x2, f64::NEG_INFINITY, f64::INFINITY)
}

/// [`wronskian`] restricted to shared nodes in `[lo, hi]`.
pub fn wronskian_on(x1: &Solution, x2: &Solution, lo: f64, hi: f64) -> Result<Wronskian, VerifyError> {
    let (a, b) = (x1.nodes(), x2.nodes());
    let (mut i, mut j) = (0, 0);
    let mut vals = Vec::new();
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            if a[i] < lo || a[i] > hi {
                i += 1;
                j += 1;
                continue;
            }
            let c = x2.x.values()[j] * x1.dx.values()[i] - x1.x.values()[i] * x2.dx.values()[j];
            vals.push(c);
            i += 1;
            j += 1;
        } else if a[i] < b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    if vals.is_empty() {
        return Err(VerifyError::Disjoint);
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| math::abs(v - mean)).fold(0.0, f64::max) / math::abs(mean);
    Ok(Wronskian { c: mean, rel_variation: var })
}

/// [`wronskian`] for solutions on different grids: `x₂` and `Dx₂` are
/// interpolated onto the nodes of `x₁` in `[lo, hi]`.
pub fn wronskian_interpolated(x1: &Solution, x2: &Solution, lo: f64, hi: f64) -> Result<Wronskian, VerifyError> {
    let mut vals = Vec::new();
    for i in x1.x.indices_in(lo, hi) {
        let t = x1.nodes()[i];
        let (Some(b), Some(db)) = (x2.x.eval(t), x2.dx.eval(t)) else { continue };
        vals.push(b * x1.dx.values()[i] - x1.x.values()[i] * db);
    }
    if vals.is_empty() {
        return Err(VerifyError::Disjoint);
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| math::abs(v - mean)).fold(0.0, f64::max) / math::abs(mean);
    Ok(Wronskian { c: mean, rel_variation: var })
}

fn sample(c: &Coefficients, nodes: &[f64]) -> Result<(Vec<f64>, Vec<f64>), QuadError> {
    let mut p = Vec::with_capacity(nodes.len());
    let mut q = Vec::with_capacity(nodes.len());
    for &t in nodes {
        p.push(c.p_at(t).map_err(|_| QuadError::NonFinite { t })?);
        q.push(c.q_at(t).map_err(|_| QuadError::NonFinite { t })?);
    }
    Ok((p, q))
}

/// Derivative of positive-or-negative data through its logarithm when
/// the sign is constant (accurate for exponential growth), else directly.
fn derivative(nodes: &[f64], vals: &[f64]) -> Vec<f64> {
    let d = DiffStencil::new(nodes);
    let s = vals[0].signum();
    if s != 0.0 && vals.iter().all(|v| v.signum() == s && *v != 0.0) {
        let logs: Vec<f64> = vals.iter().map(|v| math::ln(math::abs(*v))).collect();
        d.apply(&logs).iter().zip(vals).map(|(dl, v)| dl * v).collect()
    } else {
        d.apply(vals)
    }
}

/// Nodes of `[lo, hi]` padded by a few on each side for the stencil.
fn padded(s: &Solution, lo: f64, hi: f64) -> (core::ops::Range<usize>, core::ops::Range<usize>) {
    let r = s.x.indices_in(lo, hi);
    let n = s.nodes().len();
    let outer = r.start.saturating_sub(3)..(r.end + 3).min(n);
    let inner = r.start - outer.start..r.end - outer.start;
    (outer, inner)
}

/// `sup |(Dx)' − q x| / max(|q x|, |(Dx)'|, |Dx|/max(t, 1))` over nodes in `[lo, hi]`.
pub fn equation_residual(s: &Solution, c: &Coefficients, lo: f64, hi: f64) -> Result<f64, VerifyError> {
    let (outer, inner) = padded(s, lo, hi);
    if outer.len() < 5 {
        return Err(VerifyError::InsufficientWindow { checkpoints: outer.len() });
    }
    let nodes = &s.nodes()[outer.clone()];
    let (_, q) = sample(c, nodes)?;
    let ddx = derivative(nodes, &s.dx.values()[outer.clone()]);
    let xs = &s.x.values()[outer.clone()];
    let dxs = &s.dx.values()[outer];
    let mut worst: f64 = 0.0;
    for i in inner {
        let qx = q[i] * xs[i];
        // when Dx is nearly constant its derivative sits below the roundoff
        // of Dx itself; |Dx|/t is the smallest slope the grid can resolve
        let floor = math::abs(dxs[i]) / math::abs(nodes[i]).max(1.0);
        let w = math::abs(qx).max(math::abs(ddx[i])).max(floor);
        if w > 0.0 {
            worst = worst.max(math::abs(ddx[i] - qx) / w);
        }
    }
    Ok(worst)
}

/// `sup |p x' − Dx| / |Dx|` over nodes in `[lo, hi]`, with `x'` from the
/// grid.
pub fn quasi_derivative_mismatch(s: &Solution, c: &Coefficients, lo: f64, hi: f64) -> Result<f64, VerifyError> {
    let (outer, inner) = padded(s, lo, hi);
    if outer.len() < 5 {
        return Err(VerifyError::InsufficientWindow { checkpoints: outer.len() });
    }
    let nodes = &s.nodes()[outer.clone()];
    let (p, _) = sample(c, nodes)?;
    let dx = derivative(nodes, &s.x.values()[outer.clone()]);
    let ds = &s.dx.values()[outer];
    let mut worst: f64 = 0.0;
    for i in inner {
        worst = worst.max(math::rel_diff(p[i] * dx[i], ds[i]));
    }
    Ok(worst)
}

/// `x₂/Dx₂ − x₁/Dx₁ = sign/(Dx₁ Dx₂)`: worst relative mismatch over
/// shared nodes in `[lo, hi]`.
pub fn inverse_ratio_identity(x1: &Solution, x2: &Solution, sign: f64, lo: f64, hi: f64) -> Result<f64, VerifyError> {
    let mut worst: f64 = 0.0;
    let mut seen = 0;
    for (i, &t) in x1.nodes().iter().enumerate() {
        if t < lo || t > hi {
            continue;
        }
        let Some(j) = x2.nodes().iter().position(|&s| s == t) else { continue };
        let (a, da) = (x1.x.values()[i], x1.dx.values()[i]);
        let (b, db) = (x2.x.values()[j], x2.dx.values()[j]);
        let lhs = b / db - a / da;
        let rhs = sign / (da * db);
        worst = worst.max(math::rel_diff(lhs, rhs));
        seen += 1;
    }
    if seen == 0 {
        return Err(VerifyError::Disjoint);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub label: String,
    pub x: Expr,
    pub dx: Expr,
}

/// Closed-form solutions of one family member.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOracle {
    pub family: FamilyKind,
    pub solutions: Vec<OracleSolution>,
    /// Where the closed form comes from.
    pub origin: String,
}

fn c(v: f64) -> Expr {
    Expr::Const(v)
}

/// Roots of `α² − α = k`, larger first.
pub fn power_exponents(k: f64) -> (f64, f64) {
    let s = math::sqrt(1.0 + 4.0 * k);
    (0.5 * (1.0 + s), 0.5 * (1.0 - s))
}

impl ExactOracle {
    /// The oracle for a family member, when one is known in closed form:
    /// the square law (`λ = 2, μ = 0`) of both power families, the
    /// constant family and generators with a supplied antiderivative.
    pub fn for_coefficients(co: &Coefficients) -> Option<ExactOracle> {
        let (kind, spec) = co.family.as_ref()?;
        let running_p = || -> Option<Expr> {
            match &spec.cum_inv_p {
                Some(e) => Some(e.clone()),
                None if !spec.p.depends_on_t() => {
                    let p0 = spec.p.eval(spec.a).ok()?;
                    Some(if p0 == 1.0 { Expr::Var } else { div(Expr::Var, c(p0)) })
                }
                None => None,
            }
        };
        let sols = match kind {
            FamilyKind::PowerLog | FamilyKind::TailPowerLog => {
                if spec.lambda != 2.0 || spec.mu != 0.0 {
                    return None;
                }
                let (a1, a2) = power_exponents(spec.k);
                if *kind == FamilyKind::PowerLog {
                    let big_p = running_p()?;
                    [a1, a2]
                        .iter()
                        .zip(["growing P^α₁", "decaying P^α₂"])
                        .map(|(&al, label)| OracleSolution {
                            label: label.to_string(),
                            x: pow(big_p.clone(), c(al)),
                            dx: mul(c(al), pow(big_p.clone(), c(al - 1.0))),
                        })
                        .collect()
                } else {
                    let pi = spec.tail_inv_p.clone()?;
                    // π^α with α² − α = k: α₂ < 0 grows, α₁ > 1 decays
                    [a2, a1]
                        .iter()
                        .zip(["growing π^α₂", "decaying π^α₁"])
                        .map(|(&al, label)| OracleSolution {
                            label: label.to_string(),
                            x: pow(pi.clone(), c(al)),
                            dx: mul(c(-al), pow(pi.clone(), c(al - 1.0))),
                        })
                        .collect()
                }
            }
            FamilyKind::ConstantQ => {
                let big_p = running_p()?;
                let k = spec.k;
                [k, -k]
                    .iter()
                    .zip(["growing exp(kP)", "decaying exp(-kP)"])
                    .map(|(&kk, label)| {
                        let x = exp(mul(c(kk), big_p.clone()));
                        OracleSolution { label: label.to_string(), dx: mul(c(kk), x.clone()), x }
                    })
                    .collect()
            }
            FamilyKind::R1Growing | FamilyKind::R1Decaying | FamilyKind::R2Growing | FamilyKind::R2Decaying => {
                let anti = spec.antiderivative.clone()?;
                let phi = spec.phi.clone()?;
                let (x, dx, label) = match kind {
                    FamilyKind::R1Growing => {
                        let x = exp(anti);
                        (x.clone(), mul(phi, x), "exp(∫φ/p)")
                    }
                    FamilyKind::R1Decaying => {
                        let x = exp(neg(anti));
                        (x.clone(), neg(mul(phi, x)), "exp(-∫Φ/p)")
                    }
                    FamilyKind::R2Growing => {
                        let x = exp(anti);
                        (x.clone(), div(x, phi), "exp(∫1/(pφ))")
                    }
                    _ => {
                        let x = exp(neg(anti));
                        (x.clone(), neg(div(x, phi)), "exp(-∫1/(pΦ))")
                    }
                };
                alloc::vec![OracleSolution { label: label.to_string(), x, dx }]
            }
        };
        let origin = match kind {
            FamilyKind::PowerLog => "square law in P: x = P^α with α² − α = k",
            FamilyKind::TailPowerLog => "square law in 1/π: x = π^α with α² − α = k",
            FamilyKind::ConstantQ => "constant q p = k²: u ≡ ±k",
            _ => "generator: the Riccati function is the generator itself",
        };
        Some(ExactOracle { family: *kind, solutions: sols, origin: origin.to_string() })
    }

    /// Oracle solution `i` sampled on `nodes`.
    pub fn solution(&self, i: usize, nodes: &[f64], co: &Coefficients) -> Result<Solution, VerifyError> {
        let o = &self.solutions[i];
        let mut x = Vec::with_capacity(nodes.len());
        let mut dx = Vec::with_capacity(nodes.len());
        for &t in nodes {
            x.push(o.x.eval(t).map_err(|_| QuadError::NonFinite { t })?);
            dx.push(o.dx.eval(t).map_err(|_| QuadError::NonFinite { t })?);
        }
        Ok(Solution::new(x, dx, nodes, Source::ExactOracle, 1.0, co)?)
    }

    /// Every oracle solution must solve the equation on `nodes` to `tol`.
    pub fn validate(&self, co: &Coefficients, nodes: &[f64], tol: f64) -> Result<f64, VerifyError> {
        let mut worst: f64 = 0.0;
        for (i, o) in self.solutions.iter().enumerate() {
            let s = self.solution(i, nodes, co)?;
            // stencils are one-sided at the ends; judge the interior
            let lo = nodes[3.min(nodes.len() - 1)];
            let hi = nodes[nodes.len().saturating_sub(4)];
            let r = equation_residual(&s, co, lo, hi)?;
            if !(r <= tol) {
                return Err(VerifyError::OracleInvalid { label: o.label.clone(), residual: r });
            }
            worst = worst.max(r);
        }
        Ok(worst)
    }
}

/// Residual an oracle must meet before it is used for comparison.
pub const ORACLE_RESIDUAL: f64 = 1e-8;

/// Scales `sol` to the best-matching oracle solution at the window's left
/// edge and reports the worst relative deviation of `x` and `Dx` in the
/// window.
pub fn compare_to_oracle(
    sol: &Solution,
    co: &Coefficients,
    oracle: &ExactOracle,
    window: (f64, f64),
    tol: f64,
) -> Result<VerificationReport, VerifyError> {
    if co.family_kind() != Some(oracle.family) {
        return Err(VerifyError::FamilyMismatch);
    }
    let idx = sol.x.indices_in(window.0, window.1);
    if idx.len() < 8 {
        return Err(VerifyError::InsufficientWindow { checkpoints: idx.len() });
    }
    oracle.validate(co, &sol.nodes()[idx.clone()], ORACLE_RESIDUAL)?;
    let mut best: Option<(f64, f64, &OracleSolution)> = None;
    for o in &oracle.solutions {
        let i0 = idx.start;
        let t0 = sol.nodes()[i0];
        let Ok(x0) = o.x.eval(t0) else { continue };
        let scale = x0 / sol.x.values()[i0];
        let (mut dev_x, mut dev_dx) = (0.0f64, 0.0f64);
        for i in idx.clone() {
            let t = sol.nodes()[i];
            let (Ok(xo), Ok(dxo)) = (o.x.eval(t), o.dx.eval(t)) else {
                dev_x = f64::INFINITY;
                break;
            };
            dev_x = dev_x.max(math::abs(scale * sol.x.values()[i] - xo) / math::abs(xo));
            dev_dx = dev_dx.max(math::abs(scale * sol.dx.values()[i] - dxo) / math::abs(dxo));
        }
        if best.is_none_or(|b| dev_x < b.0) {
            best = Some((dev_x, dev_dx, o));
        }
    }
    let (dev_x, dev_dx, o) = best.ok_or(VerifyError::FamilyMismatch)?;
    let w = (sol.nodes()[idx.start], sol.nodes()[idx.end - 1]);
    Ok(VerificationReport {
        checks: alloc::vec![
            Check::at_most("oracle x", alloc::format!("x ∝ {}", o.label), dev_x, tol, w),
            Check::at_most("oracle Dx", alloc::format!("Dx ∝ D[{}]", o.label), dev_dx, tol, w),
        ],
        window: w,
    })
}

/// Reference functions on a solution's own nodes.
fn references(s: &Solution, co: &Coefficients, tail: &TailConfig, case: Case) -> Result<Profiles, VerifyError> {
    Ok(Profiles::build(co, s.nodes().to_vec(), case.grid_variable(), tail)?)
}

fn grid(nodes: &[f64], vals: Vec<f64>) -> Result<GridFunction, VerifyError> {
    Ok(GridFunction::new(nodes.to_vec(), vals, crate::quad::Interp::MonotoneCubic)?)
}

/// Claimed equivalences for a moderate basis: `(x₁, x₂)` when one
/// integral diverges, `(x₁, x₂, x₃)` when both converge. Magnitudes are
/// compared; the sign of `Dx` is a separate check. `band` is the
/// allowed relative deviation.
pub fn check_theorem_asymptotics(
    basis: &[Solution],
    co: &Coefficients,
    class: &EquationClass,
    tail: &TailConfig,
    band: f64,
) -> Result<VerificationReport, VerifyError> {
    // (claim, which function of which solution, reference, expected Dx sign)
    enum Ref {
        One,
        BigP,
        BigQ,
        Pi,
        Rho,
    }
    let plan: &[(&str, Ref, Ref, f64)] = match class.case {
        Case::CaseI => &[("x1 ~ 1, Dx1 ~ -ρ", Ref::One, Ref::Rho, -1.0), ("x2 ~ P, Dx2 ~ 1", Ref::BigP, Ref::One, 1.0)],
        Case::CaseII => &[("x1 ~ π, Dx1 ~ -1", Ref::Pi, Ref::One, -1.0), ("x2 ~ 1, Dx2 ~ Q", Ref::One, Ref::BigQ, 1.0)],
        Case::CaseIII => &[
            ("x1 ~ 1, Dx1 ~ 1", Ref::One, Ref::One, 1.0),
            ("x2 ~ π, Dx2 ~ -1", Ref::Pi, Ref::One, -1.0),
            ("x3 ~ 1, |Dx3| ~ ρ", Ref::One, Ref::Rho, -1.0),
        ],
        c => return Err(VerifyError::NoTheorem(c)),
    };
    if basis.len() != plan.len() {
        return Err(VerifyError::BasisSize { expected: plan.len(), found: basis.len() });
    }
    let mut report = VerificationReport::default();
    for (k, (s, (claim, xr, dr, sign))) in basis.iter().zip(plan).enumerate() {
        let prof = references(s, co, tail, class.case)?;
        let window = prof.comparison_window();
        let nodes = s.nodes();
        let pick = |r: &Ref| -> Result<GridFunction, VerifyError> {
            let v = match r {
                Ref::One => alloc::vec![1.0; nodes.len()],
                Ref::BigP => prof.cum_inv_p.clone(),
                Ref::BigQ => prof.cum_q.clone(),
                Ref::Pi => prof.tail_inv_p.clone().ok_or(QuadError::NotIntegrable("1/p"))?,
                Ref::Rho => prof.tail_q.clone().ok_or(QuadError::NotIntegrable("q"))?,
            };
            grid(nodes, v)
        };
        let names = ["x", "Dx"];
        let parts = claim.split(", ").collect::<Vec<_>>();
        let abs_dx = grid(nodes, s.dx.values().iter().map(|v| math::abs(*v)).collect())?;
        for (j, (f, r)) in [(&s.x, xr), (&abs_dx, dr)].into_iter().enumerate() {
            let res = asymptotic_ratio(f, &pick(r)?, window, band)?;
            let mut chk = Check::at_most(alloc::format!("{}{} ratio", names[j], k + 1), parts[j].to_string(), res.deviation, band, window);
            // the trend matters as well as the last deviation
            chk.pass = res.equivalent;
            report.checks.push(chk);
        }
        let idx = s.x.indices_in(window.0, window.1);
        let wrong = idx.filter(|&i| s.dx.values()[i].signum() != *sign).count();
        report.checks.push(Check::at_most(
            alloc::format!("Dx{} sign", k + 1),
            if *sign > 0.0 { "Dx > 0".to_string() } else { "Dx < 0".to_string() },
            wrong as f64,
            0.0,
            window,
        ));
        if k == 0 {
            report.window = window;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{make_family, parse, FamilySpec};
    use crate::quad::sampled::{linear_nodes, log_nodes};
    use crate::quad::Interp;

    #[test]
    fn ratio_identity_and_mismatch() {
        let nodes = log_nodes(1.0, 1e6, 256);
        let f = GridFunction::sample(&nodes, |t| t, Interp::MonotoneCubic).unwrap();
        let r = asymptotic_ratio(&f, &f, (2.0, 5e5), 0.02).unwrap();
        assert!(r.equivalent && r.limit_estimate == 1.0);
        let g = GridFunction::sample(&nodes, |t| t.ln().max(1e-3), Interp::MonotoneCubic).unwrap();
        assert!(!asymptotic_ratio(&f, &g, (2.0, 5e5), 0.02).unwrap().equivalent);
        // ρ for k = 2, λ = 3 is 1/t²
        let rho = GridFunction::sample(&nodes, |t| 1.0 / (t * t) + 1e-3 / (t * t * t), Interp::MonotoneCubic).unwrap();
        let want = GridFunction::sample(&nodes, |t| 1.0 / (t * t), Interp::MonotoneCubic).unwrap();
        assert!(asymptotic_ratio(&rho, &want, (2.0, 5e5), 0.02).unwrap().equivalent);
    }

    #[test]
    fn exponential_wronskian() {
        let co = Coefficients::new(Expr::Const(1.0), Expr::Const(1.0), 0.0).unwrap();
        let nodes = linear_nodes(0.0, 10.0, 101);
        let mk = |s: f64| {
            Solution::new(
                nodes.iter().map(|t| (s * t).exp()).collect(),
                nodes.iter().map(|t| s * (s * t).exp()).collect(),
                &nodes,
                Source::ExactOracle,
                1.0,
                &co,
            )
            .unwrap()
        };
        let w = wronskian(&mk(-1.0), &mk(1.0)).unwrap();
        assert!((w.c + 2.0).abs() < 1e-12 && w.rel_variation < 1e-10, "{w:?}");
    }

    #[test]
    fn power_oracles_validate() {
        for k in [0.5, 2.0] {
            let mut s = FamilySpec::new(Expr::Const(1.0), 1.0);
            s.k = k;
            let co = make_family(FamilyKind::PowerLog, &s).unwrap();
            let o = ExactOracle::for_coefficients(&co).unwrap();
            let nodes = log_nodes(1.0, 1e6, 512);
            let r = o.validate(&co, &nodes, 1e-8).unwrap();
            assert!(r < 1e-8, "{r}");
            if k == 2.0 {
                let a = o.solution(1, &nodes, &co).unwrap();
                let b = o.solution(0, &nodes, &co).unwrap();
                let w = wronskian(&a, &b).unwrap();
                assert!((w.c + 3.0).abs() < 1e-9, "{w:?}");
            }
        }
    }

    #[test]
    fn generator_oracle_and_identity() {
        let mut s = FamilySpec::new(parse("exp(-t)").unwrap(), 0.0);
        s.phi = Some(parse("exp(t)").unwrap());
        s.dphi = Some(parse("exp(t)").unwrap());
        s.antiderivative = Some(parse("exp(2*t)/2").unwrap());
        let co = make_family(FamilyKind::R1Growing, &s).unwrap();
        let o = ExactOracle::for_coefficients(&co).unwrap();
        let nodes = linear_nodes(0.0, 3.0, 512);
        assert!(o.validate(&co, &nodes, 1e-6).is_ok());
        let x1 = o.solution(0, &nodes, &co).unwrap();
        let x2 = crate::reproduce::companion_principal(&x1, &co).unwrap();
        let w = wronskian_on(&x2, &x1, 0.0, 2.5).unwrap();
        assert!((w.c + 1.0).abs() < 1e-6, "{w:?}");
        let id = inverse_ratio_identity(&x1, &x2, 1.0, 0.0, 2.5).unwrap();
        assert!(id < 1e-5, "{id}");
        let r = equation_residual(&x2, &co, 0.05, 2.5).unwrap();
        assert!(r < 1e-4, "{r}");
    }
}

#[cfg(test)]
mod basis_tests {
    use super::*;
    use crate::classify::classify_equation;
    use crate::expr::{make_family, FamilySpec};
    use crate::reproduce::reproduce_auto;
    use crate::riccati::{solve, OperatorKind, SolverConfig};

    fn basis(kinds: &[OperatorKind], co: &Coefficients) -> Vec<Solution> {
        let cfg = SolverConfig::default();
        kinds.iter().map(|k| reproduce_auto(&solve(co, k, &cfg).unwrap(), co).unwrap()).collect()
    }

    #[test]
    fn moderate_basis_case_one() {
        let mut s = FamilySpec::new(Expr::Const(1.0), core::f64::consts::E);
        s.k = 2.0;
        s.lambda = 3.0;
        let co = make_family(FamilyKind::PowerLog, &s).unwrap();
        let tail = TailConfig::default();
        let class = classify_equation(&co, &tail).unwrap();
        assert_eq!(class.case, Case::CaseI);
        let b = basis(&[OperatorKind::ModerateUI, OperatorKind::ModerateVI], &co);
        let r = check_theorem_asymptotics(&b, &co, &class, &tail, 0.02).unwrap();
        assert!(r.all_pass());
        let w = wronskian_interpolated(&b[1], &b[0], 20.0, 1e5).unwrap();
        assert!(w.c.abs() > 0.5 && w.rel_variation < 1e-5, "{w:?}");
    }
}

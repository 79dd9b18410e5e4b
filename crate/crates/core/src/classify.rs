//! Which of `∫1/p`, `∫q` diverge, what terminal states that allows, and
//! the integral criteria deciding between moderate and extreme solutions.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::expr::Coefficients;
use crate::math;
use crate::quad::profile::{GridConfig, GridVariable, Profiles};
use crate::quad::sampled::geometric_tail;
use crate::quad::{build_grid, classify_improper, integrate, window_edges, window_verdict, IntegralVerdict, QuadError, TailConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Case {
    /// `∫1/p = ∞`, `∫q < ∞`.
    CaseI,
    /// `∫1/p < ∞`, `∫q = ∞`.
    CaseII,
    CaseIII,
    /// Both integrals diverge; every solution is extreme.
    CaseBoth,
    Unknown,
}

impl Case {
    pub fn from_verdicts(ip: &IntegralVerdict, iq: &IntegralVerdict) -> Case {
        use IntegralVerdict::*;
        match (ip, iq) {
            (Divergent { .. }, Convergent { .. }) => Case::CaseI,
            (Convergent { .. }, Divergent { .. }) => Case::CaseII,
            (Convergent { .. }, Convergent { .. }) => Case::CaseIII,
            (Divergent { .. }, Divergent { .. }) => Case::CaseBoth,
            _ => Case::Unknown,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Case::CaseI => "CaseI",
            Case::CaseII => "CaseII",
            Case::CaseIII => "CaseIII",
            Case::CaseBoth => "CaseBoth",
            Case::Unknown => "Unknown",
        }
    }

    /// Grid variable suited to the case: the running integral of `1/p` when
    /// it diverges, the reciprocal of its tail otherwise.
    pub fn grid_variable(self) -> GridVariable {
        match self {
            Case::CaseI | Case::CaseBoth => GridVariable::RunningInvP,
            Case::CaseII | Case::CaseIII => GridVariable::InverseTailInvP,
            Case::Unknown => GridVariable::Uniform,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquationClass {
    pub ip: IntegralVerdict,
    pub iq: IntegralVerdict,
    pub case: Case,
}

pub fn classify_equation(c: &Coefficients, cfg: &TailConfig) -> Result<EquationClass, QuadError> {
    let ip = classify_improper(&c.inv_p_fn(), c.a, cfg)?;
    let iq = classify_improper(&c.q_fn(), c.a, cfg)?;
    let case = Case::from_verdicts(&ip, &iq);
    Ok(EquationClass { ip, iq, case })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TerminalTag {
    #[cfg_attr(feature = "serde", serde(rename = "I(i)"))]
    I1,
    #[cfg_attr(feature = "serde", serde(rename = "I(ii)"))]
    I2,
    #[cfg_attr(feature = "serde", serde(rename = "I(iii)"))]
    I3,
    #[cfg_attr(feature = "serde", serde(rename = "I(iv)"))]
    I4,
    #[cfg_attr(feature = "serde", serde(rename = "II(i)"))]
    II1,
    #[cfg_attr(feature = "serde", serde(rename = "II(ii)"))]
    II2,
    #[cfg_attr(feature = "serde", serde(rename = "II(iii)"))]
    II3,
    #[cfg_attr(feature = "serde", serde(rename = "II(iv)"))]
    II4,
    #[cfg_attr(feature = "serde", serde(rename = "III(i)"))]
    III1,
    #[cfg_attr(feature = "serde", serde(rename = "III(ii)"))]
    III2,
    #[cfg_attr(feature = "serde", serde(rename = "III(iii)"))]
    III3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Limit {
    Zero,
    FiniteNonzero,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Flavor {
    Moderate,
    Extreme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TerminalStateType {
    pub tag: TerminalTag,
    pub x_limit: Limit,
    #[cfg_attr(feature = "serde", serde(rename = "Dx_limit"))]
    pub dx_limit: Limit,
    pub flavor: Flavor,
}

impl TerminalTag {
    pub const ALL: [TerminalTag; 11] = [
        TerminalTag::I1,
        TerminalTag::I2,
        TerminalTag::I3,
        TerminalTag::I4,
        TerminalTag::II1,
        TerminalTag::II2,
        TerminalTag::II3,
        TerminalTag::II4,
        TerminalTag::III1,
        TerminalTag::III2,
        TerminalTag::III3,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TerminalTag::I1 => "I(i)",
            TerminalTag::I2 => "I(ii)",
            TerminalTag::I3 => "I(iii)",
            TerminalTag::I4 => "I(iv)",
            TerminalTag::II1 => "II(i)",
            TerminalTag::II2 => "II(ii)",
            TerminalTag::II3 => "II(iii)",
            TerminalTag::II4 => "II(iv)",
            TerminalTag::III1 => "III(i)",
            TerminalTag::III2 => "III(ii)",
            TerminalTag::III3 => "III(iii)",
        }
    }

    /// `(|x(∞)|, |Dx(∞)|)` for the type.
    pub fn limits(self) -> (Limit, Limit) {
        use Limit::*;
        match self {
            TerminalTag::I1 => (Infinite, FiniteNonzero),
            TerminalTag::I2 | TerminalTag::II2 => (Infinite, Infinite),
            TerminalTag::I3 | TerminalTag::III3 => (FiniteNonzero, Zero),
            TerminalTag::I4 | TerminalTag::II4 => (Zero, Zero),
            TerminalTag::II1 => (FiniteNonzero, Infinite),
            TerminalTag::II3 | TerminalTag::III2 => (Zero, FiniteNonzero),
            TerminalTag::III1 => (FiniteNonzero, FiniteNonzero),
        }
    }

    pub fn flavor(self) -> Flavor {
        match self {
            TerminalTag::I2 | TerminalTag::I4 | TerminalTag::II2 | TerminalTag::II4 => Flavor::Extreme,
            _ => Flavor::Moderate,
        }
    }

    pub fn state(self) -> TerminalStateType {
        let (x_limit, dx_limit) = self.limits();
        TerminalStateType { tag: self, x_limit, dx_limit, flavor: self.flavor() }
    }

    /// The type with these limits admissible in `case` (the first match
    /// in table order when the case does not narrow it down).
    pub fn from_limits(x: Limit, dx: Limit, case: Case) -> Option<TerminalTag> {
        let family = |t: &TerminalTag| match case {
            Case::CaseI | Case::CaseBoth => matches!(t, TerminalTag::I1 | TerminalTag::I2 | TerminalTag::I3 | TerminalTag::I4),
            Case::CaseII => matches!(t, TerminalTag::II1 | TerminalTag::II2 | TerminalTag::II3 | TerminalTag::II4),
            Case::CaseIII => matches!(t, TerminalTag::III1 | TerminalTag::III2 | TerminalTag::III3),
            Case::Unknown => true,
        };
        Self::ALL.into_iter().filter(family).find(|t| t.limits() == (x, dx))
    }
}

impl fmt::Display for TerminalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Admissible terminal states. `resolved` is false when the deciding
/// criterion was inconclusive and the list is the unfiltered one.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Menu {
    pub types: Vec<TerminalStateType>,
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifyError {
    UnknownClass,
    /// Only the two one-sided cases have extremity conditions.
    NoCriteria(Case),
    Quad(QuadError),
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::UnknownClass => f.write_str("equation class is unknown (an integral test was inconclusive)"),
            ClassifyError::NoCriteria(c) => write!(f, "no moderate/extreme criteria for {c}"),
            ClassifyError::Quad(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ClassifyError {}

impl From<QuadError> for ClassifyError {
    fn from(e: QuadError) -> Self {
        ClassifyError::Quad(e)
    }
}

pub fn terminal_state_menu(class: &EquationClass, criteria: &CriteriaReport) -> Result<Menu, ClassifyError> {
    use TerminalTag::*;
    let pick = |tags: &[TerminalTag], resolved: bool| Menu { types: tags.iter().map(|t| t.state()).collect(), resolved };
    Ok(match class.case {
        Case::Unknown => return Err(ClassifyError::UnknownClass),
        Case::CaseIII => pick(&[III1, III2, III3], true),
        Case::CaseBoth => pick(&[I2, I4], true),
        Case::CaseI | Case::CaseII => {
            let (moderate, extreme) = if class.case == Case::CaseI { ([I1, I3], [I2, I4]) } else { ([II1, II3], [II2, II4]) };
            match &criteria.moderate_criterion {
                IntegralVerdict::Convergent { .. } => pick(&moderate, true),
                IntegralVerdict::Divergent { .. } => pick(&extreme, true),
                IntegralVerdict::Inconclusive { .. } => {
                    let all = [moderate[0], extreme[0], moderate[1], extreme[1]];
                    pick(&all, false)
                }
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Crosscheck {
    Pass,
    Fail,
    Skipped,
}

impl Crosscheck {
    fn compare(a: &IntegralVerdict, b: &IntegralVerdict) -> Crosscheck {
        match (a, b) {
            (IntegralVerdict::Inconclusive { .. }, _) | (_, IntegralVerdict::Inconclusive { .. }) => Crosscheck::Skipped,
            _ if a.label() == b.label() => Crosscheck::Pass,
            _ => Crosscheck::Fail,
        }
    }
}

/// The moderate criterion and the four extremity ratios. Ratio estimates
/// are suprema over `probe_window` of the defining quotient.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriteriaReport {
    pub moderate_criterion: IntegralVerdict,
    /// `∫_T^t q P² / P(t)`: growing extreme solutions when `I_p = ∞`.
    #[cfg_attr(feature = "serde", serde(rename = "gamma_43"))]
    pub v_grow_ratio: Option<f64>,
    /// `∫_t^∞ ρ²/p / ρ(t)`: decaying extreme solutions when `I_p = ∞`.
    #[cfg_attr(feature = "serde", serde(rename = "delta_48"))]
    pub u_decay_ratio: Option<f64>,
    /// `∫_t^∞ q π² / π(t)`: decaying extreme solutions when `I_q = ∞`.
    #[cfg_attr(feature = "serde", serde(rename = "gamma_414"))]
    pub v_decay_ratio: Option<f64>,
    /// `∫_T^t Q²/p / Q(t)`: growing extreme solutions when `I_q = ∞`.
    #[cfg_attr(feature = "serde", serde(rename = "delta_415"))]
    pub u_grow_ratio: Option<f64>,
    pub equivalence_crosscheck: Crosscheck,
    /// The companion verdict the crosscheck compared against.
    pub companion_criterion: Option<IntegralVerdict>,
    pub probe_window: Option<(f64, f64)>,
    /// Conditions that could not be evaluated, with the reason.
    pub unevaluated: Vec<String>,
}

impl CriteriaReport {
    pub fn empty(moderate_criterion: IntegralVerdict) -> Self {
        CriteriaReport {
            moderate_criterion,
            v_grow_ratio: None,
            u_decay_ratio: None,
            v_decay_ratio: None,
            u_grow_ratio: None,
            equivalence_crosscheck: Crosscheck::Skipped,
            companion_criterion: None,
            probe_window: None,
            unevaluated: Vec::new(),
        }
    }
}

/// A theorem with ratio bound `< 1` is taken to apply when the estimate
/// leaves at least `margin` below 1.
pub fn ratio_applies(estimate: Option<f64>, margin: f64) -> bool {
    matches!(estimate, Some(e) if e.is_finite() && e < 1.0 - margin)
}

/// Sums over the doubling windows from `a`, stopping like the tail test does.
fn scan_windows<F>(a: f64, cfg: &TailConfig, mut window: F) -> Result<(Vec<f64>, Vec<f64>), QuadError>
where
    F: FnMut(usize, f64, f64) -> Result<f64, QuadError>,
{
    let edges = window_edges(a, cfg.horizon);
    if edges.len() < 5 {
        return Err(QuadError::HorizonTooShort { windows: edges.len().saturating_sub(1) });
    }
    let mut sums = Vec::with_capacity(edges.len() - 1);
    let mut partial = 0.0;
    for (j, w) in edges.windows(2).enumerate() {
        let s = window(j, w[0], w[1])?;
        if !s.is_finite() {
            return Err(QuadError::NonFinite { t: w[1] });
        }
        partial += s;
        sums.push(s);
        if math::abs(partial) > cfg.divergence_threshold {
            break;
        }
        if settled(&sums, cfg) {
            break;
        }
    }
    let starts = edges[..sums.len()].to_vec();
    Ok((sums, starts))
}

/// Four geometrically shrinking windows, the last below round-off of the sum.
fn settled(sums: &[f64], cfg: &TailConfig) -> bool {
    let m = sums.len();
    let total: f64 = sums.iter().sum();
    m >= 4
        && (m - 4..m - 1).all(|i| math::abs(sums[i + 1]) <= cfg.r_conv * math::abs(sums[i]))
        && math::abs(sums[m - 1]) <= f64::EPSILON * math::abs(total)
}

fn verdict_of(sums: &[f64], starts: &[f64], cfg: &TailConfig) -> IntegralVerdict {
    let partial: f64 = sums.iter().sum();
    if math::abs(partial) > cfg.divergence_threshold {
        return IntegralVerdict::Divergent { evidence: alloc::format!("partial sum exceeds {:e}", cfg.divergence_threshold) };
    }
    window_verdict(sums, starts, cfg)
}

/// `∫_a^∞ f(t) G(t) dt` where `G(t) = ∫_a^t g` (running) or `∫_t^∞ g`
/// (tail). `G` is assembled window by window from positive pieces so no
/// cancellation occurs even when it decays fast.
fn weighted_verdict<F, G>(a: f64, f: &F, g: &G, running: bool, cfg: &TailConfig) -> Result<IntegralVerdict, QuadError>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let tol = cfg.quad_tol;
    let mut edges = window_edges(a, cfg.horizon);
    let mut g_windows = Vec::with_capacity(edges.len());
    for w in edges.windows(2) {
        g_windows.push(integrate(g, w[0], w[1], tol)?.value);
        // once g is negligible the coefficients may overflow further out
        if settled(&g_windows, cfg) {
            break;
        }
    }
    edges.truncate(g_windows.len() + 1);
    let cfg = &TailConfig { horizon: edges[edges.len() - 1], ..*cfg };
    // G at the window edges.
    let g_edge: Vec<f64> = if running {
        let mut acc = 0.0;
        let mut v = alloc::vec![0.0];
        for s in &g_windows {
            acc += s;
            v.push(acc);
        }
        v
    } else {
        let verdict = verdict_of(&g_windows, &edges[..g_windows.len()], cfg);
        let total = match verdict {
            IntegralVerdict::Convergent { value, .. } => value,
            _ => return Ok(IntegralVerdict::Inconclusive { reason: "inner tail integral is not convergent".to_string() }),
        };
        let mut beyond = total - g_windows.iter().sum::<f64>();
        if beyond < 0.0 {
            beyond = 0.0;
        }
        let mut v = alloc::vec![0.0; edges.len()];
        v[edges.len() - 1] = beyond;
        for j in (0..g_windows.len()).rev() {
            v[j] = v[j + 1] + g_windows[j];
        }
        v
    };
    let inner = |lo: f64, hi: f64| integrate(g, lo, hi, tol).map(|e| e.value).unwrap_or(f64::NAN);
    let (sums, starts) = scan_windows(a, cfg, |j, lo, hi| {
        let integrand = |t: f64| {
            let gt = if running { g_edge[j] + inner(lo, t) } else { g_edge[j + 1] + inner(t, hi) };
            f(t) * gt
        };
        Ok(integrate(&integrand, lo, hi, tol)?.value)
    })?;
    Ok(verdict_of(&sums, &starts, cfg))
}

/// `∫ q P` (when `I_p = ∞`) or `∫ q π` (when `I_q = ∞`), with the running
/// integral of `1/p` taken from `a` so that it vanishes there.
pub fn moderate_criterion(c: &Coefficients, case: Case, cfg: &TailConfig) -> Result<IntegralVerdict, ClassifyError> {
    let inv_p = c.inv_p_fn();
    let q = c.q_fn();
    match case {
        Case::CaseI | Case::CaseIII | Case::CaseBoth => Ok(weighted_verdict(c.a, &q, &inv_p, true, cfg)?),
        Case::CaseII => Ok(weighted_verdict(c.a, &q, &inv_p, false, cfg)?),
        Case::Unknown => Err(ClassifyError::UnknownClass),
    }
}

/// The equivalent form of the moderate criterion: `∫ ρ/p` or `∫ Q/p`.
pub fn companion_criterion(c: &Coefficients, case: Case, cfg: &TailConfig) -> Result<IntegralVerdict, ClassifyError> {
    let inv_p = c.inv_p_fn();
    let q = c.q_fn();
    match case {
        Case::CaseI | Case::CaseIII => Ok(weighted_verdict(c.a, &inv_p, &q, false, cfg)?),
        Case::CaseII | Case::CaseBoth => Ok(weighted_verdict(c.a, &inv_p, &q, true, cfg)?),
        Case::Unknown => Err(ClassifyError::UnknownClass),
    }
}

/// Criteria for one equation: the moderate criterion, its equivalent
/// form, and (for the one-sided cases) the extremity ratios measured on
/// the part of the grid where the grid variable exceeds `√scale`.
pub fn extremity_conditions(c: &Coefficients, class: &EquationClass, grid: &GridConfig) -> Result<CriteriaReport, ClassifyError> {
    let case = class.case;
    if case == Case::Unknown {
        return Err(ClassifyError::UnknownClass);
    }
    let cfg = &grid.tail;
    let moderate = moderate_criterion(c, case, cfg)?;
    let mut report = CriteriaReport::empty(moderate);
    match companion_criterion(c, case, cfg) {
        Ok(v) => {
            report.equivalence_crosscheck = Crosscheck::compare(&report.moderate_criterion, &v);
            report.companion_criterion = Some(v);
        }
        Err(e) => report.unevaluated.push(alloc::format!("equivalent criterion: {e}")),
    }
    if !matches!(case, Case::CaseI | Case::CaseII) {
        return Ok(report);
    }
    let var = case.grid_variable();
    let nodes = build_grid(c, var, c.a, grid)?;
    let prof = Profiles::build(c, nodes, var, cfg)?;
    let g = prof.grid_variable();
    let n = prof.len();
    let probe = math::sqrt(grid.scale).max(2.0 * g[0]);
    let i0 = g.partition_point(|&x| x < probe).min(n - 8);
    report.probe_window = Some((prof.nodes[i0], prof.horizon()));
    let range = i0..n;
    let sup = |num: &[f64], den: &[f64]| -> f64 { range.clone().map(|i| num[i] / den[i]).fold(0.0, f64::max) };
    let running_from = |vals: &[f64]| -> Vec<f64> {
        let cum = prof.rule.cumulative(vals);
        cum.iter().map(|v| v - cum[i0]).collect()
    };
    let tail_of = |vals: &[f64]| -> Option<Vec<f64>> {
        let panels = prof.rule.panels(vals);
        let beyond = geometric_tail(&panels)?;
        let rev = crate::quad::sampled::reverse_cumulate(&panels);
        Some(rev.into_iter().map(|v| v + beyond).collect())
    };
    if case == Case::CaseI {
        let big_p = &prof.cum_inv_p;
        let qp2: Vec<f64> = (0..n).map(|i| prof.q[i] * big_p[i] * big_p[i]).collect();
        report.v_grow_ratio = Some(sup(&running_from(&qp2), big_p));
        match &prof.tail_q {
            Some(rho) => {
                let rho2_p: Vec<f64> = (0..n).map(|i| rho[i] * rho[i] / prof.p[i]).collect();
                match tail_of(&rho2_p) {
                    Some(num) => report.u_decay_ratio = Some(sup(&num, rho)),
                    None => report.unevaluated.push("decaying-solution ratio: tail of ρ²/p does not settle".into()),
                }
            }
            None => report.unevaluated.push("decaying-solution ratio: ρ could not be evaluated".into()),
        }
    } else {
        let big_q = &prof.cum_q;
        let q2_p: Vec<f64> = (0..n).map(|i| big_q[i] * big_q[i] / prof.p[i]).collect();
        report.u_grow_ratio = Some(sup(&running_from(&q2_p), big_q));
        match &prof.tail_inv_p {
            Some(pi) => {
                let qpi2: Vec<f64> = (0..n).map(|i| prof.q[i] * pi[i] * pi[i]).collect();
                match tail_of(&qpi2) {
                    Some(num) => report.v_decay_ratio = Some(sup(&num, pi)),
                    None => report.unevaluated.push("decaying-solution ratio: tail of qπ² does not settle".into()),
                }
            }
            None => report.unevaluated.push("decaying-solution ratio: π could not be evaluated".into()),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{make_family, parse, Expr, FamilyKind, FamilySpec};

    fn power_log(k: f64, lambda: f64, mu: f64) -> Coefficients {
        let mut s = FamilySpec::new(Expr::Const(1.0), core::f64::consts::E);
        s.k = k;
        s.lambda = lambda;
        s.mu = mu;
        make_family(FamilyKind::PowerLog, &s).unwrap()
    }

    fn class_of(p: &str, q: &str, a: f64) -> Case {
        let c = Coefficients::new(parse(p).unwrap(), parse(q).unwrap(), a).unwrap();
        classify_equation(&c, &TailConfig::default()).unwrap().case
    }

    #[test]
    fn the_four_cases() {
        assert_eq!(class_of("1", "1/t^3", 1.0), Case::CaseI);
        assert_eq!(class_of("exp(t)", "1", 0.0), Case::CaseII);
        assert_eq!(class_of("1", "1", 0.0), Case::CaseBoth);
        assert_eq!(class_of("exp(t)", "exp(-2*t)", 0.0), Case::CaseIII);
    }

    #[test]
    fn extreme_flavor_table() {
        for t in TerminalTag::ALL {
            let ext = matches!(t, TerminalTag::I2 | TerminalTag::I4 | TerminalTag::II2 | TerminalTag::II4);
            assert_eq!(t.state().flavor == Flavor::Extreme, ext, "{t}");
        }
    }

    #[test]
    fn menus() {
        let conv = IntegralVerdict::Convergent { value: 1.0, error_estimate: 0.0 };
        let div = IntegralVerdict::Divergent { evidence: String::new() };
        let inc = IntegralVerdict::Inconclusive { reason: String::new() };
        let class = |case| EquationClass { ip: inc.clone(), iq: inc.clone(), case };
        let tags = |m: Menu| m.types.iter().map(|t| t.tag).collect::<Vec<_>>();
        let m = terminal_state_menu(&class(Case::CaseI), &CriteriaReport::empty(conv.clone())).unwrap();
        assert_eq!(tags(m), [TerminalTag::I1, TerminalTag::I3]);
        let m = terminal_state_menu(&class(Case::CaseII), &CriteriaReport::empty(div.clone())).unwrap();
        assert_eq!(tags(m), [TerminalTag::II2, TerminalTag::II4]);
        let m = terminal_state_menu(&class(Case::CaseI), &CriteriaReport::empty(inc.clone())).unwrap();
        assert!(!m.resolved && m.types.len() == 4);
        let m = terminal_state_menu(&class(Case::CaseBoth), &CriteriaReport::empty(inc.clone())).unwrap();
        assert_eq!(tags(m), [TerminalTag::I2, TerminalTag::I4]);
        assert_eq!(terminal_state_menu(&class(Case::Unknown), &CriteriaReport::empty(conv)), Err(ClassifyError::UnknownClass));
    }

    #[test]
    fn moderate_criterion_and_its_equivalent() {
        let cfg = TailConfig::default();
        for (lambda, mu, moderate) in [(3.0, 0.0, true), (2.0, 0.0, false), (2.0, 1.0, false), (1.5, -1.0, false)] {
            let c = power_log(2.0, lambda, mu);
            let m = moderate_criterion(&c, Case::CaseI, &cfg).unwrap();
            let e = companion_criterion(&c, Case::CaseI, &cfg).unwrap();
            assert_eq!(m.is_convergent(), moderate, "{lambda} {mu}: {m}");
            assert_eq!(e.is_convergent(), moderate, "{lambda} {mu}: {e}");
        }
        // λ = 3, k = 2 from a = e: ∫ 2(t - e)/t³ = 2/e - 1/e = 1/e
        let v = moderate_criterion(&power_log(2.0, 3.0, 0.0), Case::CaseI, &cfg).unwrap().value().unwrap();
        assert!((v - 1.0 / core::f64::consts::E).abs() < 1e-4, "{v}");
    }

    #[test]
    fn ratio_estimates_for_the_square_law() {
        let c = power_log(0.5, 2.0, 0.0);
        let class = classify_equation(&c, &TailConfig::default()).unwrap();
        assert_eq!(class.case, Case::CaseI);
        let r = extremity_conditions(&c, &class, &GridConfig::default()).unwrap();
        let g = r.v_grow_ratio.unwrap();
        let d = r.u_decay_ratio.unwrap();
        assert!((g - 0.5).abs() < 0.01, "{g}");
        assert!((d - 0.5).abs() < 0.01, "{d}");
        assert!(ratio_applies(Some(g), 0.05));
        let menu = terminal_state_menu(&class, &r).unwrap();
        assert!(menu.types.iter().all(|t| t.flavor == Flavor::Extreme));
    }
}

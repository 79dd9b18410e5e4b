//! The four pipelines behind the subcommands. Each returns a serializable
//! report plus the exit status it implies.

use anyhow::{bail, Result};
use rayon::prelude::*;
use riccati_core::classify::{
    classify_equation, extremity_conditions, terminal_state_menu, Case, CriteriaReport, Crosscheck, EquationClass, Menu, TerminalTag,
};
use riccati_core::expr::FamilyKind;
use riccati_core::quad::{build_grid, GridFunction, GridVariable, IntegralVerdict};
use riccati_core::reproduce::{
    companion_nonprincipal, companion_principal, reproduce_auto, reproduce_from_u, Principal, Solution, Source, Variant,
};
use riccati_core::riccati::{solve as solve_kind, OperatorKind, RiccatiError, RiccatiSolution, SolverConfig};
use riccati_core::verify::{
    check_theorem_asymptotics, compare_to_oracle, equation_residual, inverse_ratio_identity, wronskian, wronskian_interpolated,
    wronskian_on, Check, ExactOracle, VerificationReport,
};
use riccati_core::Coefficients;
use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok = 0,
    Error = 1,
    Inconclusive = 2,
    NotApplicable = 3,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub schema_version: u32,
    pub case: Case,
    pub ip: IntegralVerdict,
    pub iq: IntegralVerdict,
    pub menu: Option<Menu>,
    pub criteria: Option<CriteriaReport>,
    pub determinate: bool,
}

impl ClassifyReport {
    pub fn status(&self) -> Status {
        if self.determinate {
            Status::Ok
        } else {
            Status::Inconclusive
        }
    }
}

fn is_inconclusive(v: &IntegralVerdict) -> bool {
    matches!(v, IntegralVerdict::Inconclusive { .. })
}

/// Class, extremity criteria and terminal-state menu.
pub fn classify(cfg: &RunConfig) -> Result<ClassifyReport> {
    let co = cfg.coefficients()?;
    classify_coefficients(&co, cfg)
}

fn classify_coefficients(co: &Coefficients, cfg: &RunConfig) -> Result<ClassifyReport> {
    let class = classify_equation(co, &cfg.tail())?;
    let criteria = match class.case {
        Case::Unknown => None,
        _ => Some(extremity_conditions(co, &class, &cfg.grid())?),
    };
    let menu = criteria.as_ref().and_then(|c| terminal_state_menu(&class, c).ok());
    let determinate = class.case != Case::Unknown
        && criteria.as_ref().is_some_and(|c| !is_inconclusive(&c.moderate_criterion))
        && menu.as_ref().is_some_and(|m| m.resolved);
    Ok(ClassifyReport { schema_version: SCHEMA_VERSION, case: class.case, ip: class.ip, iq: class.iq, menu, criteria, determinate })
}

fn moderate(criteria: &CriteriaReport) -> bool {
    criteria.moderate_criterion.is_convergent()
}

/// Constructions the theorems offer for a class: the moderate basis when
/// the moderate criterion holds, otherwise the extreme pair; all three
/// for the doubly convergent case.
pub fn auto_kinds(
    class: &EquationClass,
    criteria: Option<&CriteriaReport>,
    cfg: &SolverConfig,
    param: Option<f64>,
) -> Vec<(String, Result<OperatorKind, RiccatiError>)> {
    let fixed = |k: OperatorKind| (k.name().to_string(), Ok(k));
    let extreme = |names: [&str; 2]| -> Vec<(String, Result<OperatorKind, RiccatiError>)> {
        names
            .iter()
            .map(|n| {
                let k = match criteria {
                    Some(c) => OperatorKind::extreme_from_report(n, c, cfg),
                    None => Err(RiccatiError::Missing("extremity criteria")),
                };
                (n.to_string(), k)
            })
            .collect()
    };
    let is_moderate = criteria.is_some_and(moderate);
    match class.case {
        Case::CaseIII => vec![
            fixed(OperatorKind::Type3UOmega { omega: param.unwrap_or(1.0) }),
            fixed(OperatorKind::Type3V),
            fixed(OperatorKind::Type3URho),
        ],
        Case::CaseI if is_moderate => vec![fixed(OperatorKind::ModerateUI), fixed(OperatorKind::ModerateVI)],
        Case::CaseII if is_moderate => vec![fixed(OperatorKind::ModerateVII), fixed(OperatorKind::ModerateUII)],
        Case::CaseII => extreme(["EXTREME_V_DECAY", "EXTREME_U_GROW"]),
        Case::CaseI | Case::CaseBoth => extreme(["EXTREME_V_GROW", "EXTREME_U_DECAY"]),
        Case::Unknown => Vec::new(),
    }
}

fn requested_kinds(
    cfg: &RunConfig,
    class: &EquationClass,
    criteria: Option<&CriteriaReport>,
    solver: &SolverConfig,
) -> Result<Vec<(String, Result<OperatorKind, RiccatiError>)>> {
    let param = cfg.solver.param;
    let mut out = Vec::new();
    for name in &cfg.solver.kinds {
        if name.eq_ignore_ascii_case("auto") {
            out.extend(auto_kinds(class, criteria, solver, param));
            continue;
        }
        let upper = name.to_ascii_uppercase();
        let extreme = upper.starts_with("EXTREME_");
        let kind = match (extreme, param) {
            (true, None) => match criteria {
                Some(c) => OperatorKind::extreme_from_report(&upper, c, solver),
                None => Err(RiccatiError::Missing("extremity criteria")),
            },
            _ => match OperatorKind::from_name(&upper, param) {
                Some(k) => Ok(k),
                None => bail!("unknown operator kind {name:?}"),
            },
        };
        out.push((upper, kind));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolvedSolution {
    pub kind: OperatorKind,
    pub file: String,
    pub start: f64,
    pub end: f64,
    pub nodes: usize,
    pub iterations: usize,
    pub final_delta: f64,
    pub tail_estimate: f64,
    pub in_band: bool,
    pub left_band: bool,
    pub contraction_history: Vec<f64>,
    pub source: Source,
    pub principal: Principal,
    pub terminal_estimate: Option<TerminalTag>,
    pub normalization: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub kind: String,
    pub not_applicable: bool,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub case: Case,
    pub solutions: Vec<SolvedSolution>,
    pub failures: Vec<Failure>,
}

impl SolveReport {
    pub fn status(&self) -> Status {
        if self.failures.is_empty() {
            Status::Ok
        } else if self.failures.iter().all(|f| f.not_applicable) {
            Status::NotApplicable
        } else {
            Status::Error
        }
    }
}

/// A converged construction and the solution reproduced from it.
pub struct Built {
    pub riccati: RiccatiSolution,
    pub solution: Solution,
}

pub struct SolveRun {
    pub report: SolveReport,
    pub built: Vec<Built>,
}

fn not_applicable(e: &RiccatiError) -> bool {
    matches!(e, RiccatiError::NotApplicable { .. } | RiccatiError::Missing(_))
}

fn construct(co: &Coefficients, kind: &OperatorKind, solver: &SolverConfig, case: Case) -> Result<Built, (bool, String)> {
    let riccati = solve_kind(co, kind, solver).map_err(|e| (not_applicable(&e), e.to_string()))?;
    let solution = reproduce_auto(&riccati, co).map_err(|e| (false, e.to_string()))?.with_terminal_estimate(case);
    Ok(Built { riccati, solution })
}

/// Runs the requested constructions and reproduces a solution from each.
pub fn solve(cfg: &RunConfig) -> Result<SolveRun> {
    let co = cfg.coefficients()?;
    let solver = cfg.solver();
    let class = classify_equation(&co, &cfg.tail())?;
    let criteria = match class.case {
        Case::Unknown => None,
        _ => Some(extremity_conditions(&co, &class, &cfg.grid())?),
    };
    let kinds = requested_kinds(cfg, &class, criteria.as_ref(), &solver)?;
    if kinds.is_empty() {
        bail!("no construction applies to {}", class.case);
    }
    let mut report = SolveReport { schema_version: SCHEMA_VERSION, case: class.case, solutions: Vec::new(), failures: Vec::new() };
    let mut built = Vec::new();
    for (name, kind) in kinds {
        let kind = match kind {
            Ok(k) => k,
            Err(e) => {
                report.failures.push(Failure { kind: name, not_applicable: not_applicable(&e), error: e.to_string() });
                continue;
            }
        };
        match construct(&co, &kind, &solver, class.case) {
            Ok(b) => {
                let s = &b.solution;
                report.solutions.push(SolvedSolution {
                    kind,
                    file: format!("{}.csv", kind.name()),
                    start: s.x.start(),
                    end: s.x.end(),
                    nodes: s.nodes().len(),
                    iterations: b.riccati.iterations,
                    final_delta: b.riccati.final_delta,
                    tail_estimate: b.riccati.tail_estimate,
                    in_band: b.riccati.in_band,
                    left_band: b.riccati.left_band,
                    contraction_history: b.riccati.contraction_history.clone(),
                    source: s.source,
                    principal: s.principal,
                    terminal_estimate: s.terminal_estimate,
                    normalization: s.normalization,
                });
                built.push(b);
            }
            Err((na, error)) => report.failures.push(Failure { kind: name, not_applicable: na, error }),
        }
    }
    Ok(SolveRun { report, built })
}

#[derive(Debug, Clone, Serialize)]
pub struct Skipped {
    pub what: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub fixture: String,
    pub verification: VerificationReport,
    pub skipped: Vec<Skipped>,
}

impl VerifyReport {
    pub fn status(&self) -> Status {
        if self.verification.all_pass() {
            Status::Ok
        } else {
            Status::Error
        }
    }
}

/// Runs the check battery that fits the configured equation.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let co = cfg.coefficients()?;
    let family = co.family_kind();
    let has_anti = cfg.equation.antiderivative.is_some();
    match family {
        Some(FamilyKind::R1Growing | FamilyKind::R1Decaying | FamilyKind::R2Growing | FamilyKind::R2Decaying) if has_anti => {
            generator_battery(cfg, &co)
        }
        Some(FamilyKind::ConstantQ) => constant_battery(cfg, &co),
        _ => match ExactOracle::for_coefficients(&co) {
            Some(oracle) => oracle_battery(cfg, &co, &oracle),
            None => moderate_battery(cfg, &co),
        },
    }
}

fn uniform_nodes(cfg: &RunConfig, co: &Coefficients) -> Vec<f64> {
    let end = cfg.grid.uniform_end.unwrap_or(co.a + 3.0);
    riccati_core::quad::sampled::linear_nodes(co.a, end, cfg.grid.nodes)
}

fn window_or(cfg: &RunConfig, lo: f64, hi: f64) -> (f64, f64) {
    cfg.verify.window.map_or((lo, hi), |w| (w[0], w[1]))
}

fn wronskian_check(name: &str, target: String, c: f64, var: f64, tol: f64, w: (f64, f64)) -> Check {
    let mut chk = Check::at_most(name, target, var, tol, w);
    chk.pass = chk.pass && c.abs() > 0.0 && c.is_finite();
    chk
}

/// Closed-form generator solution, its companion, the Wronskian and the
/// inverse-ratio identity on a uniform grid.
fn generator_battery(cfg: &RunConfig, co: &Coefficients) -> Result<VerifyReport> {
    let v = &cfg.verify;
    let oracle = ExactOracle::for_coefficients(co).ok_or_else(|| anyhow::anyhow!("the generator needs its antiderivative"))?;
    let nodes = uniform_nodes(cfg, co);
    let w = window_or(cfg, co.a, co.a + 2.5);
    let mut checks = Vec::new();
    let x1 = oracle.solution(0, &nodes, co)?;
    checks.push(Check::at_most("x1 residual", "(D x1)' = q x1", equation_residual(&x1, co, w.0, w.1)?, v.residual_tolerance, w));
    let growing = matches!(co.family_kind(), Some(FamilyKind::R1Growing | FamilyKind::R2Growing));
    // a growing x1 is nonprincipal: its companion is the principal one
    let (x2, sign) = if growing { (companion_principal(&x1, co)?, 1.0) } else { (companion_nonprincipal(&x1, co, co.a)?, -1.0) };
    let lo2 = w.0.max(x2.x.start());
    let cw = (lo2, w.1);
    checks.push(Check::at_most(
        "x2 residual",
        "(D x2)' = q x2",
        equation_residual(&x2, co, cw.0, cw.1)?,
        v.companion_residual_tolerance,
        cw,
    ));
    let wr = wronskian_on(&x1, &x2, cw.0, cw.1)?;
    // x2 Dx1 − x1 Dx2 is +1 for the principal companion, −1 otherwise
    checks.push(Check::at_most("Wronskian", format!("x2 Dx1 - x1 Dx2 = {sign}"), (wr.c - sign).abs(), v.identity_tolerance, cw));
    checks.push(wronskian_check("Wronskian constancy", "C constant".into(), wr.c, wr.rel_variation, v.wronskian_variation, cw));
    let id = inverse_ratio_identity(&x1, &x2, sign, cw.0, cw.1)?;
    checks.push(Check::at_most("inverse-ratio identity", format!("x2/Dx2 - x1/Dx1 = {sign}/(Dx1 Dx2)"), id, v.identity_tolerance, cw));
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        fixture: format!("{} generator", co.family_kind().map(|k| k.name()).unwrap_or("?")),
        verification: VerificationReport { checks, window: w },
        skipped: Vec::new(),
    })
}

/// Solutions reproduced from the constant Riccati solutions `u ≡ ±k`.
fn constant_battery(cfg: &RunConfig, co: &Coefficients) -> Result<VerifyReport> {
    let k = cfg.equation.k;
    let nodes = match cfg.grid.uniform_end {
        Some(_) => uniform_nodes(cfg, co),
        None => riccati_core::quad::sampled::linear_nodes(co.a, co.a + 10.0, cfg.grid.nodes),
    };
    let end = nodes[nodes.len() - 1];
    let w = window_or(cfg, co.a, end);
    let make = |s: f64| -> Result<Solution> {
        let u = GridFunction::constant(&nodes, s * k)?;
        Ok(reproduce_from_u(&u, co, Variant::Cumulative, 1.0)?)
    };
    let (dec, grow) = (make(-1.0)?, make(1.0)?);
    let mut checks = Vec::new();
    for (name, s) in [("decaying residual", &dec), ("growing residual", &grow)] {
        checks.push(Check::at_most(name, "(D x)' = q x", equation_residual(s, co, w.0, w.1)?, 1e-8, w));
    }
    let wr = wronskian(&dec, &grow)?;
    // x₁x₂ ≡ 1, so C = −k x₁x₂ − k x₁x₂ = −2k
    let expect = -2.0 * k;
    checks.push(Check::at_most("Wronskian", format!("x2 Dx1 - x1 Dx2 = {expect}"), (wr.c - expect).abs() / expect.abs(), 1e-10, w));
    checks.push(wronskian_check("Wronskian constancy", "C constant".into(), wr.c, wr.rel_variation, 1e-10, w));
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        fixture: "constant_q".into(),
        verification: VerificationReport { checks, window: w },
        skipped: Vec::new(),
    })
}

fn terminal_matches(kind: &OperatorKind, tag: Option<TerminalTag>) -> bool {
    let Some(tag) = tag else { return false };
    let growing = matches!(kind, OperatorKind::ExtremeVGrow { .. } | OperatorKind::ExtremeUGrow { .. });
    let want = if growing { [TerminalTag::I2, TerminalTag::II2] } else { [TerminalTag::I4, TerminalTag::II4] };
    want.contains(&tag)
}

/// Exact square-law solutions against the extreme constructions.
fn oracle_battery(cfg: &RunConfig, co: &Coefficients, oracle: &ExactOracle) -> Result<VerifyReport> {
    let v = &cfg.verify;
    let solver = cfg.solver();
    let var = if co.family_kind() == Some(FamilyKind::TailPowerLog) { GridVariable::InverseTailInvP } else { GridVariable::RunningInvP };
    let nodes = build_grid(co, var, co.a, &solver.grid)?;
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let ow = (nodes[0], nodes[nodes.len() - 1]);
    let worst = oracle.validate(co, &nodes, riccati_core::verify::ORACLE_RESIDUAL)?;
    checks.push(Check::at_most("oracle residual", "(D x)' = q x for the exact pair", worst, riccati_core::verify::ORACLE_RESIDUAL, ow));
    if oracle.solutions.len() == 2 {
        let (a, b) = (oracle.solution(1, &nodes, co)?, oracle.solution(0, &nodes, co)?);
        let wr = wronskian(&a, &b)?;
        checks.push(wronskian_check("oracle Wronskian", format!("C = {:.6}", wr.c), wr.c, wr.rel_variation, 1e-8, ow));
    }
    let class = classify_equation(co, &cfg.tail())?;
    let criteria = extremity_conditions(co, &class, &cfg.grid())?;
    let mut kinds = requested_kinds(cfg, &class, Some(&criteria), &solver)?;
    if kinds.iter().all(|(_, k)| k.as_ref().is_ok_and(|k| !k.is_extreme())) {
        let names = if class.case == Case::CaseII { ["EXTREME_V_DECAY", "EXTREME_U_GROW"] } else { ["EXTREME_V_GROW", "EXTREME_U_DECAY"] };
        kinds = names.iter().map(|n| (n.to_string(), OperatorKind::extreme_from_report(n, &criteria, &solver))).collect();
    }
    let mut window = ow;
    for (name, kind) in kinds {
        let kind = match kind {
            Ok(k) => k,
            Err(e) => {
                skipped.push(Skipped { what: name, reason: e.to_string() });
                continue;
            }
        };
        let b = match construct(co, &kind, &solver, class.case) {
            Ok(b) => b,
            Err((_, reason)) => {
                skipped.push(Skipped { what: name, reason });
                continue;
            }
        };
        let w = window_or(cfg, 2.0 * b.riccati.start, b.riccati.half_horizon());
        window = w;
        let mut rep = compare_to_oracle(&b.solution, co, oracle, w, v.oracle_tolerance)?;
        for c in &mut rep.checks {
            c.name = format!("{} {}", kind.name(), c.name);
        }
        checks.extend(rep.checks);
        checks.push(fixed_point_check(&b.riccati, oracle, w, v.fixed_point_tolerance)?);
        let tag = b.solution.terminal_estimate;
        checks.push(Check::at_most(
            format!("{} terminal state", kind.name()),
            format!("trend test gives {}", if terminal_matches(&kind, Some(TerminalTag::I2)) { "x, Dx -> inf" } else { "x, Dx -> 0" }),
            if terminal_matches(&kind, tag) { 0.0 } else { 1.0 },
            0.0,
            w,
        ));
    }
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        fixture: format!("{} square law", co.family_kind().map(|k| k.name()).unwrap_or("?")),
        verification: VerificationReport { checks, window },
        skipped,
    })
}

/// Worst relative deviation of the Riccati fixed point from the closest
/// oracle Riccati function (`Dx/x` or `x/Dx`) over the window.
fn fixed_point_check(sol: &RiccatiSolution, oracle: &ExactOracle, w: (f64, f64), tol: f64) -> Result<Check> {
    use riccati_core::riccati::Equation;
    let f = &sol.f;
    let mut best = f64::INFINITY;
    for o in &oracle.solutions {
        let mut worst: f64 = 0.0;
        for i in f.indices_in(w.0, w.1) {
            let t = f.nodes()[i];
            let (x, dx) = (o.x.eval(t)?, o.dx.eval(t)?);
            let exact = match sol.equation {
                Equation::R1 => dx / x,
                Equation::R2 => x / dx,
            };
            worst = worst.max(((f.values()[i] - exact) / exact).abs());
        }
        best = best.min(worst);
    }
    let what = match sol.equation {
        riccati_core::riccati::Equation::R1 => "u = Dx/x of the exact solution",
        riccati_core::riccati::Equation::R2 => "v = x/Dx of the exact solution",
    };
    Ok(Check::at_most(format!("{} fixed point", sol.kind.name()), what, best, tol, w))
}

/// Moderate basis against its claimed asymptotics, plus independence.
fn moderate_battery(cfg: &RunConfig, co: &Coefficients) -> Result<VerifyReport> {
    let run = solve(cfg)?;
    let class = classify_equation(co, &cfg.tail())?;
    let mut skipped: Vec<Skipped> = run.report.failures.iter().map(|f| Skipped { what: f.kind.clone(), reason: f.error.clone() }).collect();
    let basis: Vec<Solution> = run.built.iter().map(|b| b.solution.clone()).collect();
    let mut report = VerificationReport::default();
    let moderate_kinds = run.built.iter().all(|b| !b.riccati.kind.is_extreme());
    if moderate_kinds && run.report.failures.is_empty() {
        report = check_theorem_asymptotics(&basis, co, &class, &cfg.tail(), cfg.verify.band)?;
        // independence of the first two members over their common range
        let lo = basis[0].x.start().max(basis[1].x.start());
        let hi = basis[0].x.end().min(basis[1].x.end());
        match wronskian_interpolated(&basis[1], &basis[0], lo, hi) {
            Ok(wr) => report.checks.push(wronskian_check(
                "basis Wronskian",
                "C constant and nonzero".into(),
                wr.c,
                wr.rel_variation,
                cfg.verify.wronskian_variation,
                (lo, hi),
            )),
            Err(e) => skipped.push(Skipped { what: "basis Wronskian".into(), reason: e.to_string() }),
        }
    } else if !moderate_kinds {
        skipped.push(Skipped { what: "moderate asymptotics".into(), reason: "the equation has no moderate basis".into() });
    }
    Ok(VerifyReport { schema_version: SCHEMA_VERSION, fixture: format!("{} moderate basis", class.case), verification: report, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Moderate,
    Extreme,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    NotApplicable,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Construction {
    pub kind: String,
    pub outcome: Outcome,
    pub iterations: Option<usize>,
    pub terminal_estimate: Option<TerminalTag>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub lambda: f64,
    pub mu: f64,
    pub k: f64,
    pub case: Option<Case>,
    pub region: Region,
    pub moderate_criterion: Option<IntegralVerdict>,
    pub companion_criterion: Option<IntegralVerdict>,
    pub v_grow_ratio: Option<f64>,
    pub u_decay_ratio: Option<f64>,
    pub equivalence_crosscheck: Option<Crosscheck>,
    pub constructions: Vec<Construction>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub family: String,
    pub cells: Vec<Cell>,
}

fn sweep_cell(base: &RunConfig, lambda: f64, mu: f64, k: f64) -> Cell {
    let mut cell = Cell {
        lambda,
        mu,
        k,
        case: None,
        region: Region::Inconclusive,
        moderate_criterion: None,
        companion_criterion: None,
        v_grow_ratio: None,
        u_decay_ratio: None,
        equivalence_crosscheck: None,
        constructions: Vec::new(),
        error: None,
    };
    let cfg = base.with_params(lambda, mu, k);
    let mut run = || -> Result<()> {
        let co = cfg.coefficients()?;
        let solver = cfg.solver();
        let class = classify_equation(&co, &cfg.tail())?;
        cell.case = Some(class.case);
        if class.case == Case::Unknown {
            return Ok(());
        }
        let criteria = extremity_conditions(&co, &class, &cfg.grid())?;
        cell.region = match &criteria.moderate_criterion {
            IntegralVerdict::Convergent { .. } => Region::Moderate,
            IntegralVerdict::Divergent { .. } => Region::Extreme,
            IntegralVerdict::Inconclusive { .. } => Region::Inconclusive,
        };
        cell.moderate_criterion = Some(criteria.moderate_criterion.clone());
        cell.companion_criterion = criteria.companion_criterion.clone();
        cell.v_grow_ratio = criteria.v_grow_ratio;
        cell.u_decay_ratio = criteria.u_decay_ratio;
        cell.equivalence_crosscheck = Some(criteria.equivalence_crosscheck);
        for (name, kind) in auto_kinds(&class, Some(&criteria), &solver, None) {
            let c = match kind.map_err(|e| (not_applicable(&e), e.to_string())).and_then(|k| construct(&co, &k, &solver, class.case)) {
                Ok(b) => Construction {
                    kind: name,
                    outcome: Outcome::Converged,
                    iterations: Some(b.riccati.iterations),
                    terminal_estimate: b.solution.terminal_estimate,
                    detail: None,
                },
                Err((na, e)) => Construction {
                    kind: name,
                    outcome: if na { Outcome::NotApplicable } else { Outcome::Failed },
                    iterations: None,
                    terminal_estimate: None,
                    detail: Some(e),
                },
            };
            cell.constructions.push(c);
        }
        Ok(())
    };
    if let Err(e) = run() {
        cell.error = Some(format!("{e:#}"));
    }
    cell
}

/// Classifies and solves every `(λ, μ, k)` cell; cells run in parallel,
/// results keep the grid order.
pub fn sweep(cfg: &RunConfig) -> Result<SweepReport> {
    let family = cfg.family()?.unwrap_or(FamilyKind::PowerLog);
    if !matches!(family, FamilyKind::PowerLog | FamilyKind::TailPowerLog) {
        bail!("sweeps need a family with lambda and mu, not {family}");
    }
    let mut base = cfg.clone();
    base.equation.family = Some(family.name().to_string());
    let s = &cfg.sweep;
    let grid: Vec<(f64, f64, f64)> =
        s.lambda.iter().flat_map(|&l| s.mu.iter().flat_map(move |&m| s.k.iter().map(move |&k| (l, m, k)))).collect();
    let cells = grid.par_iter().map(|&(l, m, k)| sweep_cell(&base, l, m, k)).collect();
    Ok(SweepReport { schema_version: SCHEMA_VERSION, family: family.name().to_string(), cells })
}

impl SweepReport {
    pub fn status(&self) -> Status {
        if self.cells.iter().any(|c| c.error.is_some()) {
            Status::Error
        } else if self.cells.iter().any(|c| c.region == Region::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Ok
        }
    }
}

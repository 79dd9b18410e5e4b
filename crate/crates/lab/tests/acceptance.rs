//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! nonzero only when a criterion's outcome differs from the recorded one.

use std::path::PathBuf;
use std::process::ExitCode;

use riccati_core::classify::Crosscheck;
use riccati_lab::commands::{self, Outcome, Region, SweepReport, VerifyReport};
use riccati_lab::RunConfig;

// tolerances, pinned here independently of the config files
const ORACLE_TOL: f64 = 1e-4;
const FIXED_POINT_TOL: f64 = 1e-6;
const ORACLE_RESIDUAL: f64 = 1e-8;
const TIGHT_BAND: f64 = 0.01;
const BAND: f64 = 0.02;
const CONSTANT_RESIDUAL: f64 = 1e-8;
const CONSTANT_WRONSKIAN: f64 = 1e-10;
const GENERATOR_RESIDUAL: f64 = 1e-6;
const COMPANION_RESIDUAL: f64 = 1e-4;
const IDENTITY_TOL: f64 = 1e-5;
const CONTRACTION: f64 = 0.6;
const MAX_ITERATIONS: usize = 40;
const SOLVER_TOL: f64 = 1e-9;

/// Criteria known to fail; see the decisions ledger for the analysis.
const EXPECTED_FAIL: &[u8] = &[1];

fn config(name: &str) -> RunConfig {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", &format!("{name}.toml")].iter().collect();
    let mut cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e:#}"));
    let v = &mut cfg.verify;
    v.band = BAND;
    v.oracle_tolerance = ORACLE_TOL;
    v.fixed_point_tolerance = FIXED_POINT_TOL;
    v.residual_tolerance = GENERATOR_RESIDUAL;
    v.companion_residual_tolerance = COMPANION_RESIDUAL;
    v.identity_tolerance = IDENTITY_TOL;
    cfg.solver.tol = SOLVER_TOL;
    cfg
}

struct Line {
    pass: bool,
    detail: String,
}

impl Line {
    fn new(pass: bool, detail: impl Into<String>) -> Line {
        Line { pass, detail: detail.into() }
    }
}

fn verify(name: &str) -> VerifyReport {
    commands::verify(&config(name)).unwrap_or_else(|e| panic!("{name}: {e:#}"))
}

/// Passes when every check whose name starts with `prefix` passes; the
/// detail lists the worst measured value per check.
fn checks_with(r: &VerifyReport, prefix: &str) -> (bool, String) {
    let picked: Vec<_> = r.verification.checks.iter().filter(|c| c.name.starts_with(prefix)).collect();
    let pass = !picked.is_empty() && picked.iter().all(|c| c.pass);
    let detail = picked
        .iter()
        .filter(|c| !c.name.ends_with("terminal state"))
        .map(|c| format!("{} {:.1e}", c.name.trim_start_matches(prefix).trim(), c.measured))
        .collect::<Vec<_>>()
        .join(", ");
    (pass, detail)
}

fn tolerance(r: &VerifyReport, name: &str) -> f64 {
    r.verification.checks.iter().find(|c| c.name == name).map_or(f64::NAN, |c| c.tolerance)
}

fn criterion_1() -> Line {
    let half = verify("square_law_half");
    assert_eq!(riccati_core::verify::ORACLE_RESIDUAL, ORACLE_RESIDUAL);
    assert_eq!(tolerance(&half, "EXTREME_V_GROW oracle x"), ORACLE_TOL);
    assert_eq!(tolerance(&half, "EXTREME_V_GROW fixed point"), FIXED_POINT_TOL);
    let (grow, detail) = checks_with(&half, "EXTREME_V_GROW");
    let residual = checks_with(&half, "oracle residual").0;

    let mut two = config("square_law_two");
    two.solver.kinds = vec!["EXTREME_V_GROW".into()];
    let run = commands::solve(&two).expect("solve k = 2");
    let na = run.report.solutions.is_empty() && run.report.failures.iter().all(|f| f.not_applicable);
    let two_residual = checks_with(&verify("square_law_two"), "oracle residual").0;
    Line::new(
        grow && residual && na && two_residual,
        format!("k=1/2 {detail}; k=2 not applicable {na}, exact pair residual ok {two_residual}"),
    )
}

fn criterion_2() -> Line {
    let r = verify("square_law_half");
    let (oracle, detail) = checks_with(&r, "EXTREME_U_DECAY oracle");
    let decays = checks_with(&r, "EXTREME_U_DECAY terminal state").0;
    Line::new(oracle && decays, format!("{detail}; x, Dx -> 0 {decays}"))
}

/// Ratio checks against their band; `tight` names those held to 1%.
fn moderate(name: &str, tight: &[&str], solutions: usize) -> Line {
    let r = verify(name);
    let mut pass = r.skipped.is_empty() && r.verification.all_pass();
    let mut worst: f64 = 0.0;
    let mut worst_name = "";
    let mut n = 0;
    for c in r.verification.checks.iter().filter(|c| c.name.ends_with("ratio")) {
        let band = if tight.contains(&c.name.as_str()) { TIGHT_BAND } else { BAND };
        assert_eq!(c.tolerance, BAND);
        pass &= c.measured <= band;
        if c.measured / band >= worst {
            worst = c.measured / band;
            worst_name = &c.name;
        }
        n += 1;
    }
    pass &= n == 2 * solutions;
    Line::new(pass, format!("{n} ratio checks, worst {worst_name} {:.1e} of its band, skipped {}", worst, r.skipped.len()))
}

fn criterion_5() -> Line {
    let mut line = moderate("exponential_pair", &[], 3);
    let run = commands::solve(&config("exponential_pair")).expect("solve");
    let all = run.report.solutions.len() == 3 && run.report.failures.is_empty();
    line.pass &= all;
    line.detail = format!("three constructions converged {all}; {}", line.detail);
    line
}

fn criterion_6() -> Line {
    let r = verify("constant");
    let mut pass = r.verification.all_pass();
    for c in &r.verification.checks {
        let pinned = if c.name.contains("residual") { CONSTANT_RESIDUAL } else { CONSTANT_WRONSKIAN };
        pass &= c.tolerance == pinned;
    }
    let (_, detail) = checks_with(&r, "");
    Line::new(pass, detail)
}

fn criterion_7() -> Line {
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["generator_growing", "generator_decaying"] {
        let r = verify(name);
        pass &= r.verification.all_pass();
        pass &= tolerance(&r, "x1 residual") == GENERATOR_RESIDUAL;
        pass &= tolerance(&r, "x2 residual") == COMPANION_RESIDUAL;
        pass &= tolerance(&r, "inverse-ratio identity") == IDENTITY_TOL;
        let (_, d) = checks_with(&r, "");
        details.push(d);
    }
    Line::new(pass, details.join(" | "))
}

fn criterion_8() -> Line {
    let mut pass = true;
    let mut worst_ratio: f64 = 0.0;
    let mut most = 0;
    for name in ["cubic", "tail_power", "exponential_pair"] {
        let run = commands::solve(&config(name)).expect("solve");
        pass &= run.report.failures.is_empty();
        for s in &run.report.solutions {
            let later = s.contraction_history.iter().skip(1).fold(0.0f64, |m, &r| m.max(r));
            worst_ratio = worst_ratio.max(later);
            most = most.max(s.iterations);
            pass &= later <= CONTRACTION && s.iterations <= MAX_ITERATIONS;
        }
    }
    Line::new(pass, format!("worst ratio {worst_ratio:.3}, most iterations {most}"))
}

fn sweep() -> SweepReport {
    commands::sweep(&config("sweep")).expect("sweep")
}

fn criterion_9(r: &SweepReport) -> Line {
    let judged: Vec<_> = r.cells.iter().filter_map(|c| c.equivalence_crosscheck).filter(|x| *x != Crosscheck::Skipped).collect();
    let agree = judged.iter().filter(|x| **x == Crosscheck::Pass).count();
    Line::new(judged.len() == r.cells.len() && agree == judged.len(), format!("{agree}/{} cells agree", r.cells.len()))
}

fn criterion_10(r: &SweepReport) -> Line {
    let mut wrong = 0;
    for c in &r.cells {
        let moderate = c.lambda > 2.0 || (c.lambda == 2.0 && c.mu > 1.0);
        let want = if moderate { Region::Moderate } else { Region::Extreme };
        wrong += usize::from(c.region != want);
    }
    let boundary = |k: f64| {
        let c = r.cells.iter().find(|c| c.lambda == 2.0 && c.mu == 0.0 && c.k == k).expect("cell");
        c.constructions.iter().map(|x| x.outcome).collect::<Vec<_>>()
    };
    let below = boundary(0.5);
    let above = boundary(2.0);
    let ok_below = below.len() == 2 && below.iter().all(|o| *o == Outcome::Converged);
    let na_above = above.len() == 2 && above.iter().all(|o| *o == Outcome::NotApplicable);
    Line::new(
        r.cells.len() == 24 && wrong == 0 && ok_below && na_above,
        format!("{} cells, {wrong} misassigned; k=1/2 constructs {ok_below}, k=2 not applicable {na_above}", r.cells.len()),
    )
}

fn main() -> ExitCode {
    let sweep = sweep();
    let criteria: Vec<(u8, &str, Line)> = vec![
        (1, "square-law oracle, growing extreme", criterion_1()),
        (2, "square-law oracle, decaying extreme", criterion_2()),
        (3, "moderate basis, divergent ∫1/p", moderate("cubic", &["x1 ratio", "Dx2 ratio"], 2)),
        (4, "moderate basis, convergent ∫1/p", moderate("tail_power", &[], 2)),
        (5, "both integrals convergent, three solutions", criterion_5()),
        (6, "constant coefficients", criterion_6()),
        (7, "generator fixtures", criterion_7()),
        (8, "contraction", criterion_8()),
        (9, "criterion equivalence over the sweep", criterion_9(&sweep)),
        (10, "phase table", criterion_10(&sweep)),
    ];
    let mut unexpected = 0;
    for (id, title, line) in &criteria {
        let expected = !EXPECTED_FAIL.contains(id);
        let note = match (line.pass, expected) {
            (true, true) | (false, false) => "",
            (false, true) => "  <- unexpected failure",
            (true, false) => "  <- now passes, update the expected list",
        };
        println!("{} criterion {id:>2} {title}: {}{note}", if line.pass { "PASS" } else { "FAIL" }, line.detail);
        unexpected += usize::from(line.pass != expected);
    }
    if unexpected == 0 {
        println!("acceptance: outcomes as recorded");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} outcome(s) differ from the record");
        ExitCode::FAILURE
    }
}

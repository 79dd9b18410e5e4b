//! JSON, CSV and plain-table renderings of the reports.

use std::fmt::Write as _;

use anyhow::Result;
use riccati_core::quad::IntegralVerdict;
use riccati_core::reproduce::Solution;
use serde::Serialize;

use crate::commands::{Cell, ClassifyReport, Outcome, Region, SolveRun, SweepReport, VerifyReport};

pub fn json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Shortest text that reads back to the same `f64`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn solution_csv(s: &Solution) -> String {
    let mut out = String::from("t,x,Dx\n");
    for (i, t) in s.nodes().iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", num(*t), num(s.x.values()[i]), num(s.dx.values()[i]));
    }
    out
}

fn verdict(v: &IntegralVerdict) -> String {
    match v {
        IntegralVerdict::Convergent { value, .. } => format!("convergent ({})", num(*value)),
        IntegralVerdict::Divergent { .. } => "divergent".into(),
        IntegralVerdict::Inconclusive { .. } => "inconclusive".into(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn classify_csv(r: &ClassifyReport) -> String {
    let mut out = String::from("key,value\n");
    let mut row = |k: &str, v: String| {
        let _ = writeln!(out, "{k},{v}");
    };
    row("case", r.case.to_string());
    row("ip", verdict(&r.ip));
    row("iq", verdict(&r.iq));
    if let Some(m) = &r.menu {
        let tags: Vec<&str> = m.types.iter().map(|t| t.tag.label()).collect();
        row("menu", tags.join(" "));
        row("menu_resolved", m.resolved.to_string());
    }
    if let Some(c) = &r.criteria {
        row("moderate_criterion", verdict(&c.moderate_criterion));
        row("v_grow_ratio", opt(c.v_grow_ratio));
        row("u_decay_ratio", opt(c.u_decay_ratio));
        row("v_decay_ratio", opt(c.v_decay_ratio));
        row("u_grow_ratio", opt(c.u_grow_ratio));
        row("equivalence_crosscheck", format!("{:?}", c.equivalence_crosscheck).to_lowercase());
    }
    row("determinate", r.determinate.to_string());
    out
}

pub fn classify_table(r: &ClassifyReport) -> String {
    let mut out = String::new();
    for line in classify_csv(r).lines().skip(1) {
        let (k, v) = line.split_once(',').unwrap_or((line, ""));
        let _ = writeln!(out, "{k:<24} {v}");
    }
    out
}

pub fn solve_csv(run: &SolveRun) -> String {
    let mut out = String::new();
    for (meta, b) in run.report.solutions.iter().zip(&run.built) {
        let _ = writeln!(out, "# {}", meta.kind.name());
        out.push_str(&solution_csv(&b.solution));
    }
    out
}

pub fn solve_table(run: &SolveRun) -> String {
    let mut out = format!("case: {}\n", run.report.case);
    let _ = writeln!(out, "{:<18} {:>12} {:>5} {:>10} {:>8} {:>10} {:>8}", "kind", "T", "iter", "delta", "in_band", "principal", "state");
    for s in &run.report.solutions {
        let _ = writeln!(
            out,
            "{:<18} {:>12.6} {:>5} {:>10.2e} {:>8} {:>10} {:>8}",
            s.kind.name(),
            s.start,
            s.iterations,
            s.final_delta,
            s.in_band,
            format!("{:?}", s.principal).to_lowercase(),
            s.terminal_estimate.map(|t| t.label()).unwrap_or("?"),
        );
    }
    for f in &run.report.failures {
        let _ = writeln!(out, "{:<18} {}", f.kind, f.error);
    }
    out
}

pub fn verify_csv(r: &VerifyReport) -> String {
    let mut out = String::from("name,target,measured,tolerance,pass,lo,hi\n");
    for c in &r.verification.checks {
        let _ = writeln!(
            out,
            "{},\"{}\",{},{},{},{},{}",
            c.name,
            c.target.replace('"', "'"),
            num(c.measured),
            num(c.tolerance),
            c.pass,
            num(c.window.0),
            num(c.window.1)
        );
    }
    out
}

pub fn verify_table(r: &VerifyReport) -> String {
    let mut out = format!("fixture: {}\n", r.fixture);
    for c in &r.verification.checks {
        let _ = writeln!(
            out,
            "{:<4} {:<34} {:<40} {:>11.3e} <= {:<9.1e} [{}, {}]",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.target,
            c.measured,
            c.tolerance,
            num(c.window.0),
            num(c.window.1)
        );
    }
    for s in &r.skipped {
        let _ = writeln!(out, "SKIP {:<34} {}", s.what, s.reason);
    }
    out
}

fn region(r: Region) -> &'static str {
    match r {
        Region::Moderate => "moderate",
        Region::Extreme => "extreme",
        Region::Inconclusive => "inconclusive",
    }
}

fn constructions(c: &Cell) -> String {
    c.constructions
        .iter()
        .map(|x| {
            let o = match x.outcome {
                Outcome::Converged => "ok",
                Outcome::NotApplicable => "n/a",
                Outcome::Failed => "failed",
            };
            format!("{}={o}", x.kind)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn sweep_csv(r: &SweepReport) -> String {
    let mut out = String::from("lambda,mu,k,case,region,v_grow_ratio,u_decay_ratio,crosscheck,constructions\n");
    for c in &r.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(c.lambda),
            num(c.mu),
            num(c.k),
            c.case.map(|c| c.to_string()).unwrap_or_default(),
            region(c.region),
            opt(c.v_grow_ratio),
            opt(c.u_decay_ratio),
            c.equivalence_crosscheck.map(|x| format!("{x:?}").to_lowercase()).unwrap_or_default(),
            constructions(c)
        );
    }
    out
}

/// One λ × μ phase table per `k`: `M`/`E` for the region, `+` when every
/// construction the cell offers converged, `-` when none did.
pub fn sweep_table(r: &SweepReport) -> String {
    let mut ks: Vec<f64> = Vec::new();
    let mut ls: Vec<f64> = Vec::new();
    let mut ms: Vec<f64> = Vec::new();
    for c in &r.cells {
        for (v, list) in [(c.k, &mut ks), (c.lambda, &mut ls), (c.mu, &mut ms)] {
            if !list.contains(&v) {
                list.push(v);
            }
        }
    }
    let mut out = String::new();
    for &k in &ks {
        let _ = write!(out, "k = {}\n{:>8}", num(k), "λ \\ μ");
        for &m in &ms {
            let _ = write!(out, " {:>6}", num(m));
        }
        out.push('\n');
        for &l in &ls {
            let _ = write!(out, "{:>8}", num(l));
            for &m in &ms {
                let cell = r.cells.iter().find(|c| c.k == k && c.lambda == l && c.mu == m);
                let mark = match cell {
                    None => "".to_string(),
                    Some(c) if c.error.is_some() => "err".into(),
                    Some(c) => {
                        let ok = c.constructions.iter().filter(|x| x.outcome == Outcome::Converged).count();
                        let tag = match c.region {
                            Region::Moderate => "M",
                            Region::Extreme => "E",
                            Region::Inconclusive => "?",
                        };
                        let s = if ok == c.constructions.len() && ok > 0 {
                            "+"
                        } else if ok == 0 {
                            "-"
                        } else {
                            "~"
                        };
                        format!("{tag}{s}")
                    }
                };
                let _ = write!(out, " {mark:>6}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str("M/E: moderate or extreme region; +: all constructions converged, ~: some, -: none\n");
    out
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, -2.5, 1e-300, 3.0e87, 0.1 + 0.2, std::f64::consts::PI * 1e20, 1e-5] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }
}

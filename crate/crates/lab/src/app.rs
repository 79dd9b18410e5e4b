//! Command dispatch shared by the binary and the tests.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use crate::commands::{self, Status};
use crate::config::{Format, RunConfig};
use crate::render;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Solve,
    Verify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

/// What a run produced: the exit status, the text for stdout and the
/// files to write under `--out`.
pub struct Output {
    pub status: Status,
    pub stdout: String,
    pub files: Vec<(String, String)>,
}

fn ext(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Table => "txt",
    }
}

pub fn execute(cmd: Command, cfg: &RunConfig, format: Format) -> Result<Output> {
    let name = cmd.name();
    let (status, text, mut files) = match cmd {
        Command::Classify => {
            let r = commands::classify(cfg)?;
            let text = match format {
                Format::Json => render::json(&r)?,
                Format::Csv => render::classify_csv(&r),
                Format::Table => render::classify_table(&r),
            };
            (r.status(), text, Vec::new())
        }
        Command::Solve => {
            let run = commands::solve(cfg)?;
            let text = match format {
                Format::Json => render::json(&run.report)?,
                Format::Csv => render::solve_csv(&run),
                Format::Table => render::solve_table(&run),
            };
            // one CSV per solution regardless of the report format
            let mut files: Vec<(String, String)> =
                run.report.solutions.iter().zip(&run.built).map(|(m, b)| (m.file.clone(), render::solution_csv(&b.solution))).collect();
            if format != Format::Json {
                files.push(("solve.json".into(), render::json(&run.report)?));
            }
            (run.report.status(), text, files)
        }
        Command::Verify => {
            let r = commands::verify(cfg)?;
            let text = match format {
                Format::Json => render::json(&r)?,
                Format::Csv => render::verify_csv(&r),
                Format::Table => render::verify_table(&r),
            };
            (r.status(), text, Vec::new())
        }
        Command::Sweep => {
            let r = commands::sweep(cfg)?;
            let text = match format {
                Format::Json => render::json(&r)?,
                Format::Csv => render::sweep_csv(&r),
                Format::Table => render::sweep_table(&r),
            };
            (r.status(), text, Vec::new())
        }
    };
    files.insert(0, (format!("{name}.{}", ext(format)), text.clone()));
    Ok(Output { status, stdout: text, files })
}

pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

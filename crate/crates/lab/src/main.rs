use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use riccati_lab::app::{self, Command};
use riccati_lab::config::{Format, RunConfig, DEFAULTS};

/// Classify (p x')' = q x, build its solutions through the Riccati
/// equations and check them.
///
/// Exit status: 0 success, 1 error or failed verification, 2 inconclusive
/// classification, 3 construction not applicable.
#[derive(Parser)]
#[command(name = "riccati-lab", version, after_long_help = after_help())]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integral tests, extremity criteria and the terminal-state menu.
    Classify(Common),
    /// Solve the Riccati constructions and write one CSV per solution.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Operator kind (or "auto"); overrides [solver] kinds.
        #[arg(long)]
        kind: Option<String>,
        /// Gamma, delta or omega for kinds that take one.
        #[arg(long)]
        param: Option<f64>,
    },
    /// Run the check battery that fits the configured equation.
    Verify(Common),
    /// Classify and solve every (lambda, mu, k) cell of [sweep].
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for report and solution files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; overrides [output] format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn after_help() -> String {
    format!("Config keys and their defaults:\n\n{DEFAULTS}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common, kind, param) = match cli.cmd {
        Cmd::Classify(c) => (Command::Classify, c, None, None),
        Cmd::Solve { common, kind, param } => (Command::Solve, common, kind, param),
        Cmd::Verify(c) => (Command::Verify, c, None, None),
        Cmd::Sweep(c) => (Command::Sweep, c, None, None),
    };
    let run = || -> anyhow::Result<u8> {
        let mut cfg = RunConfig::load(&common.config)?;
        if let Some(k) = kind {
            cfg.solver.kinds = vec![k];
        }
        if param.is_some() {
            cfg.solver.param = param;
        }
        let format = common.format.unwrap_or(cfg.output.format);
        let out = app::execute(cmd, &cfg, format)?;
        match &common.out {
            Some(dir) => app::write_files(dir, &out.files)?,
            None => print!("{}", out.stdout),
        }
        Ok(out.status.code())
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

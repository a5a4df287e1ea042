//! Batch front end: reads a JSON request (or flags), runs one analysis and
//! writes a deterministic JSON report with optional CSV sequence dumps.

pub mod error;
pub mod output;
pub mod request;
pub mod run;

use clap::{Parser, Subcommand};

pub use error::{CliError, Result};
pub use output::{format_float, render_json, write_csv};
pub use request::{AnalysisRequest, Command, Overrides, RequestDocument, REQUEST_SCHEMA};
pub use run::{run, Outcome, Report, REPORT_SCHEMA};

#[derive(Debug, Parser)]
#[command(
    name = "qgid",
    version,
    about = "Finite-order q.g.i.d. membership analyses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Both membership tests, the K jet and the pmf recursions at one λ.
    Analyze(Overrides),
    /// Bisection for the largest λ at which membership holds.
    Threshold(Overrides),
    /// Split pgfs `G(z; λ, p)` and their validity.
    Split(Overrides),
    /// Membership over a λ grid, optionally with split validity over a p grid.
    Sweep(Overrides),
    /// Poisson-mixture precheck of the pgf or of its splits.
    Precheck(Overrides),
    /// Runs the command named in the request document.
    Run(Overrides),
}

impl CliCommand {
    fn parts(&self) -> (Option<Command>, &Overrides) {
        match self {
            Self::Analyze(o) => (Some(Command::Analyze), o),
            Self::Threshold(o) => (Some(Command::Threshold), o),
            Self::Split(o) => (Some(Command::Split), o),
            Self::Sweep(o) => (Some(Command::Sweep), o),
            Self::Precheck(o) => (Some(Command::Precheck), o),
            Self::Run(o) => (None, o),
        }
    }
}

/// Validates, runs, and writes the report and any CSV files.
pub fn execute(cli: &Cli) -> Result<()> {
    let (command, flags) = cli.command.parts();
    let request = AnalysisRequest::from_sources(command, flags)?;
    let report = run(&request)?;
    let text = render_json(&report);
    if let Some(dir) = &flags.csv {
        write_csv(dir, &report.sequences())?;
    }
    match &flags.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

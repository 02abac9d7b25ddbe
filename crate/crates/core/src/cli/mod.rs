// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: argument and config-file parsing, experiment
//! orchestration and report emission.

mod report;
mod run;
mod spec;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use report::{
    fmt_sig, reference_table, AggregateEntry, Artifact, CompareRow, ExactRow, ReferenceEntry, Report, Rows, TheoryRow, ARTIFACT,
    CSV_HEADER, EXACT_HEADER, THEORY_HEADER,
};
pub use run::{run_command, CommandOutput};
pub use spec::{parse_config, AttackChoice, Cli, Command, ExactMode, ExperimentSpec, OutputFormat, RunArgs, Subcommand};

use crate::error::{ConfigError, InvariantViolation, SimError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
    #[error(transparent)]
    Analysis(#[from] crate::error::AnalysisError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => CliError::Config(c),
            SimError::Invariant(i) => CliError::Invariant(i),
        }
    }
}

impl CliError {
    /// 2 for bad input, 3 for a safety breach, 1 for I/O trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Analysis(crate::error::AnalysisError::Simulation(SimError::Invariant(_))) => 3,
            CliError::Analysis(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = parse_config(cli).and_then(|spec| run_command(&spec));
    match result {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            match &out.written_to {
                Some(path) => eprintln!("wrote {}", path.display()),
                None => {
                    let _ = std::io::stdout().write_all(out.text.as_bytes());
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

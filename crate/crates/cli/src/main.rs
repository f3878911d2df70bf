mod args;
mod commands;
mod output;
mod table;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use twolevel_core::exprlang::ExprError;
use twolevel_core::Error;

use args::{Cli, Command};
use commands::Failure;
use output::diagnostic;

/// Exit status for a library error.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Expr(ExprError::Syntax { .. }) => 2,
        Error::Expr(ExprError::SimplicityViolation { .. })
        | Error::Regularity { .. }
        | Error::DegenerateCritical { .. }
        | Error::Oscillation { .. }
        | Error::NonNormalizable { .. }
        | Error::NonFinitePotential { .. } => 3,
        Error::Verification(_) => 4,
        Error::Validity { .. } | Error::UnknownEntry(_) => 5,
        _ => 1,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Expr(ExprError::Syntax { .. }) => "parse",
        Error::Expr(ExprError::SimplicityViolation { .. }) => "simplicity",
        Error::Expr(_) => "expression",
        Error::Regularity { .. } => "regularity",
        Error::DegenerateCritical { .. } => "degenerate_critical",
        Error::Oscillation { .. } => "oscillation",
        Error::NonNormalizable { .. } => "non_normalizable",
        Error::NonFinitePotential { .. } => "non_finite_potential",
        Error::InvalidLevels(_) => "invalid_levels",
        Error::InvalidGrid(_) => "invalid_grid",
        Error::DegenerateMobius(_) => "degenerate_mobius",
        Error::InconsistentLevels(_) => "inconsistent_levels",
        Error::DegenerateSpec(_) => "degenerate_spec",
        Error::Unsupported(_) => "unsupported",
        Error::UnknownEntry(_) => "unknown_entry",
        Error::Validity { .. } => "validity",
        Error::Convergence(_) => "convergence",
        Error::Verification(_) => "verification",
    }
}

fn details(e: &Error) -> Option<serde_json::Value> {
    match e {
        Error::Regularity { location, b } => Some(json!({ "location": location, "B": b })),
        Error::DegenerateCritical { location } => Some(json!({ "location": location })),
        Error::Expr(ExprError::SimplicityViolation { location, .. }) => Some(json!({ "location": location })),
        Error::Oscillation { nodes } => Some(json!({ "N1": nodes, "N2": nodes })),
        Error::NonNormalizable { tail_fraction } => Some(json!({ "tail_fraction": tail_fraction })),
        Error::NonFinitePotential { x } => Some(json!({ "x": x })),
        Error::Expr(ExprError::Syntax { offset, .. }) => Some(json!({ "offset": offset })),
        _ => None,
    }
}

pub fn run(argv: impl IntoIterator<Item = OsString>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            diagnostic("error", "usage", first, None);
            return 1;
        }
    };
    let outcome = match &cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Classify(a) => commands::classify(a),
        Command::Verify(a) => commands::verify(a),
        Command::Deform(a) => commands::deform(a),
        Command::Radial(a) => commands::radial(a),
        Command::Catalog { action } => commands::catalog(action),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Rejected(code)) => code,
        Err(Failure::Usage(m)) => {
            diagnostic("error", "usage", &m, None);
            1
        }
        // the reader went away, e.g. `| head`
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(Failure::Io(e)) => {
            diagnostic("error", "io", &e.to_string(), None);
            1
        }
        Err(Failure::Core(e)) => {
            diagnostic("error", kind(&e), &e.to_string(), details(&e));
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

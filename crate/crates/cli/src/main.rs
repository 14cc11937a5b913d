//! `drheat`: heat-kernel oracles and estimate checks from the command line.
//!
//! Exit status is 0 when every check passes, 1 when a check fails or a
//! computation errors, and 2 for configuration errors.

mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand};
use config::{RawArgs, RunConfig};
use report::Report;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "drheat", version, about = "Heat kernels and derivative bounds on Damek-Ricci spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check H-type and group identities on random samples.
    GeometryCheck(RawArgs),
    /// Tabulate the heat kernel or a time derivative on a (t, r) grid.
    EvalKernel(RawArgs),
    /// Empirical constant of the derivative estimate.
    CheckBounds(RawArgs),
    /// Tabulate the (β, γ) recurrence against its limit.
    Recurrence(RawArgs),
    /// Print the critical σ for given Q and p.
    SigmaThreshold(RawArgs),
    /// Probe integrability of the σ-maximal kernel.
    LpProbe(RawArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, raw) = match &cli.command {
        Command::GeometryCheck(a) => ("geometry-check", a),
        Command::EvalKernel(a) => ("eval-kernel", a),
        Command::CheckBounds(a) => ("check-bounds", a),
        Command::Recurrence(a) => ("recurrence", a),
        Command::SigmaThreshold(a) => ("sigma-threshold", a),
        Command::LpProbe(a) => ("lp-probe", a),
    };
    let cfg = match RunConfig::resolve(name, raw) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match name {
        "geometry-check" => commands::geometry_check(&cfg),
        "eval-kernel" => commands::eval_kernel(&cfg),
        "check-bounds" => commands::check_bounds(&cfg),
        "recurrence" => commands::recurrence(&cfg),
        "sigma-threshold" => commands::threshold(&cfg).map(|(v, rep)| {
            println!("{v}");
            rep
        }),
        _ => commands::lp_probe(&cfg),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) if is_config_error(&e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(code) = emit(&cfg, &report) {
        return code;
    }
    for c in &report.checks {
        eprintln!(
            "{} {}: value {:e}, tolerance {:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn is_config_error(e: &drheat_core::Error) -> bool {
    use drheat_core::Error::*;
    matches!(e, InfeasibleDimensions { .. } | InvalidArgument { .. } | DimensionMismatch { .. })
}

fn emit(cfg: &RunConfig, report: &Report) -> Result<(), ExitCode> {
    let text = report.render(cfg);
    match report::destination(cfg) {
        Some(path) => report::write_atomic(&path, &text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(1)
        }),
        // sigma-threshold prints its value; the full report goes to a file only.
        None if cfg.command == "sigma-threshold" => Ok(()),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Ok(()) => Ok(()),
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => {
                    eprintln!("error: cannot write to stdout: {e}");
                    Err(ExitCode::from(1))
                }
            }
        }
    }
}

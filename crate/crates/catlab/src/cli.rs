//! Argument parsing and dispatch.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunArgs;
use crate::error::{CliError, EXIT_INVARIANT, EXIT_OK};
use crate::prepare::{prepare, PrepareOptions};
use crate::sweep::{range, sweep, threads_from_env, write_sweep, SweepAxis, SWEEP_FILE};
use crate::timings::{timings, TimingsArgs};
use crate::verify::{verify, REPORT_FILE};

#[derive(Debug, Parser)]
#[command(name = "catlab", version, about = "Trapped-ion cat-state preparation beyond the Lamb-Dicke limit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the three-pulse preparation and read it out.
    Prepare {
        #[command(flatten)]
        run: RunArgs,
        /// Also write a Wigner map of the measured state on an N×N grid.
        #[arg(long, value_name = "N")]
        wigner: Option<usize>,
    },
    /// Check identities and propagator defects for one configuration.
    Verify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tabulate preparation-time estimates.
    Timings(TimingsArgs),
    /// Compare closed-form and exact evolution over a grid.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Explicit times, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["t_range", "eta_values"])]
        t_values: Option<Vec<f64>>,
        /// Time range "start:stop:points".
        #[arg(long, value_parser = parse_range, conflicts_with = "eta_values")]
        t_range: Option<(f64, f64, usize)>,
        /// Space the time range logarithmically.
        #[arg(long, requires = "t_range")]
        log: bool,
        /// Lamb-Dicke parameters, comma separated, at the configured time.
        #[arg(long, value_delimiter = ',')]
        eta_values: Option<Vec<f64>>,
        /// Output CSV (default: <out-dir>/sweep.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected start:stop:points, got {s:?}"));
    };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    let n = n.trim().parse::<usize>().map_err(|e| format!("{n:?}: {e}"))?;
    Ok((num(a)?, num(b)?, n))
}

/// Runs a parsed command, printing human-readable results to `out`.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<u8, CliError> {
    let io = |e| CliError::io("<stdout>", e);
    match cli.command {
        Command::Prepare { run, wigner } => {
            let cfg = run.resolve()?;
            let s = prepare(&cfg, &PrepareOptions { wigner_points: wigner })?;
            writeln!(
                out,
                "t = {:.6}{} dim = {} weights e/g = {:.4}/{:.4} fluorescence p = {:.4}",
                s.time.t,
                if s.time.auto { " (auto)" } else { "" },
                s.dim,
                s.weight_e,
                s.weight_g,
                s.fluorescence_probability,
            )
            .map_err(io)?;
            for c in &s.cats {
                writeln!(out, "cat {}: peaks x = {:?}", c.sign, c.peaks_x).map_err(io)?;
            }
            writeln!(
                out,
                "measured: fluorescence = {} -> {} cat (p = {:.4})",
                s.measurement.fluorescence, s.measurement.cat_sign, s.measurement.probability
            )
            .map_err(io)?;
            writeln!(out, "wrote {}", cfg.out_dir.display()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Verify { run } => {
            let cfg = run.resolve()?;
            let report = verify(&cfg)?;
            for c in &report.checks {
                let status = match (c.hard, c.pass) {
                    (false, _) => "info",
                    (true, true) => "ok",
                    (true, false) => "FAIL",
                };
                let bound = match c.bound {
                    Some(b) if c.at_least => format!(" (>= {b:e})"),
                    Some(b) => format!(" (<= {b:e})"),
                    None => String::new(),
                };
                writeln!(out, "{status:<4} {:<28} {:.3e}{bound}", c.name, c.value).map_err(io)?;
            }
            if report.amplitude_disagreement {
                writeln!(out, "note: closed-form and exact branch amplitudes differ by more than 10%")
                    .map_err(io)?;
            }
            writeln!(out, "wrote {}", cfg.out_dir.join(REPORT_FILE).display()).map_err(io)?;
            if report.failures.is_empty() {
                Ok(EXIT_OK)
            } else {
                Ok(EXIT_INVARIANT)
            }
        }
        Command::Timings(args) => {
            timings(&args, out)?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            run,
            t_values,
            t_range,
            log,
            eta_values,
            csv,
        } => {
            let cfg = run.resolve()?;
            let axis = match (t_values, t_range, eta_values) {
                (Some(ts), _, _) => SweepAxis::Time(ts),
                (_, Some((a, b, n)), _) => SweepAxis::Time(range(a, b, n, log)?),
                (_, _, Some(etas)) => SweepAxis::Eta(etas),
                _ => {
                    return Err(CliError::Usage(
                        "sweep needs --t-values, --t-range or --eta-values".into(),
                    ))
                }
            };
            let rows = sweep(&cfg, &axis, threads_from_env()?)?;
            let path = csv.unwrap_or_else(|| cfg.out_dir.join(SWEEP_FILE));
            write_sweep(&path, &rows)?;
            writeln!(out, "{} rows -> {}", rows.len(), path.display()).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `std::env::args`, runs, and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(&e)
        }
    }
}

//! `catlab timings`: the preparation-time comparison as a text table and CSV.

use std::io::Write;
use std::path::PathBuf;

use catlab_core::timings::{comparison_table, format_sig3, TimingInputs, TimingRow};
use serde::Serialize;

use crate::error::CliError;
use crate::output::csv_writer;

#[derive(Debug, Clone, clap::Args)]
pub struct TimingsArgs {
    /// Lamb-Dicke parameter of the schemes inside the Lamb-Dicke limit.
    #[arg(long, default_value_t = 0.202)]
    pub eta_ldl: f64,
    /// Rabi frequency Ω in trap units.
    #[arg(long, default_value_t = 0.1)]
    pub omega: f64,
    /// Lamb-Dicke parameters beyond the limit, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2.0")]
    pub eta_beyond: Vec<f64>,
    /// Trap frequency in Hz.
    #[arg(long, default_value_t = 1e7)]
    pub nu_hz: f64,
    /// Metastable-level lifetime in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub lifetime_s: f64,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl Default for TimingsArgs {
    fn default() -> Self {
        let d = TimingInputs::default();
        Self {
            eta_ldl: d.eta_ldl,
            omega: d.omega,
            eta_beyond: d.eta_beyond,
            nu_hz: d.nu_hz,
            lifetime_s: d.lifetime_s,
            csv: None,
        }
    }
}

#[derive(Serialize)]
struct CsvRow {
    scheme: &'static str,
    formula: &'static str,
    inputs: String,
    value: f64,
    rounded: String,
    seconds: f64,
}

fn inputs_label(row: &TimingRow) -> String {
    row.inputs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Builds the table, prints it to `out` and writes the CSV if requested.
pub fn timings(args: &TimingsArgs, out: &mut impl Write) -> Result<Vec<TimingRow>, CliError> {
    let rows = comparison_table(&TimingInputs {
        eta_ldl: args.eta_ldl,
        omega: args.omega,
        eta_beyond: args.eta_beyond.clone(),
        nu_hz: args.nu_hz,
        lifetime_s: args.lifetime_s,
    })?;

    let io = |e| CliError::io("<stdout>", e);
    writeln!(
        out,
        "{:<18} {:<34} {:<24} {:>14} {:>8} {:>12}",
        "scheme", "formula", "inputs", "value", "rounded", "seconds"
    )
    .map_err(io)?;
    for r in &rows {
        writeln!(
            out,
            "{:<18} {:<34} {:<24} {:>14.6} {:>8} {:>12}",
            r.scheme.label(),
            r.formula,
            inputs_label(r),
            r.value,
            r.rounded(),
            format_sig3(r.value / args.nu_hz),
        )
        .map_err(io)?;
    }

    if let Some(path) = &args.csv {
        let mut w = csv_writer(path)?;
        for r in &rows {
            w.serialize(CsvRow {
                scheme: r.scheme.label(),
                formula: r.formula,
                inputs: inputs_label(r),
                value: r.value,
                rounded: r.rounded(),
                seconds: r.value / args.nu_hz,
            })?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    Ok(rows)
}

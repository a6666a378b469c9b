//! File formats. Every JSON document has the shape
//! `{"metadata", "conventions", "config", "payload"}`; only `metadata` carries
//! run-dependent values such as the timestamp. CSV files start with the same
//! conventions as `#` comment lines.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use catlab_core::C64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const CONVENTIONS: [(&str, &str); 6] = [
    (
        "state_ordering",
        "internal-major: |e> block at indices 0..dim, |g> block at dim..2*dim; |e> = (1, 0)",
    ),
    (
        "position_quadrature",
        "x = (a + a^dag)/sqrt(2); coherent |alpha> centred at x = sqrt(2)*Re(alpha); R = x/sqrt(2)",
    ),
    (
        "phase_gauge",
        "conditional states: first amplitude above 1e-10 of the largest made real positive; \
         psi2/psi3 keep the exp(-i xi^2 t) prefactor",
    ),
    ("complex_encoding", "[re, im]"),
    ("time_unit", "1/nu (dimensionless trap units)"),
    ("fock_truncation", "levels 0..dim-1; interior = levels 0..dim-margin-1"),
];

pub fn conventions() -> Value {
    Value::Object(
        CONVENTIONS
            .iter()
            .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
            .collect::<Map<_, _>>(),
    )
}

pub fn complex(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn complex_vec<'a>(v: impl IntoIterator<Item = &'a C64>) -> Vec<[f64; 2]> {
    v.into_iter().map(|c| complex(*c)).collect()
}

fn metadata() -> Value {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "generated_unix_s": now,
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes `{"metadata", "conventions", "config", "payload"}` as pretty JSON.
pub fn write_json(
    path: &Path,
    config: &impl Serialize,
    payload: &impl Serialize,
) -> Result<(), CliError> {
    let doc = json!({
        "metadata": metadata(),
        "conventions": conventions(),
        "config": config,
        "payload": payload,
    });
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// CSV writer whose file begins with the convention block as comments.
pub fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv_preamble(&mut w).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(w))
}

pub fn write_csv_preamble(w: &mut impl Write) -> std::io::Result<()> {
    for (k, v) in CONVENTIONS {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

/// Reads a CSV written by [`csv_writer`], skipping the comment lines.
pub fn csv_reader(path: &Path) -> Result<csv::Reader<File>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file))
}

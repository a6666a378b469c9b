//! `catlab sweep`: closed-form versus exact evolution over a grid of times or
//! Lamb-Dicke parameters. Points run in parallel; rows come out in grid order.

use std::path::Path;

use catlab_core::analysis::{default_grid, peak_summary, position_density, separation_time_ok};
use catlab_core::fock::Internal;
use catlab_core::propagators::{
    balanced_superposition, branch_amplitude, evolve_exact, evolve_paper, state_infidelity,
};
use catlab_core::protocol::{run_protocol, Engine, DEGENERATE_WEIGHT};
use catlab_core::{CatSign, ModelParams, SpaceConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{csv_writer, ensure_dir};

pub const SWEEP_FILE: &str = "sweep.csv";
/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "CATLAB_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Interaction times at the configured η.
    Time(Vec<f64>),
    /// Lamb-Dicke parameters at the configured (or automatic) time.
    Eta(Vec<f64>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Time(v) | SweepAxis::Eta(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `n` points from `start` to `stop`, evenly or logarithmically spaced.
pub fn range(start: f64, stop: f64, n: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("a range needs at least 2 points, got {n}")));
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(CliError::Usage("a log range needs positive endpoints".into()));
    }
    let (a, b) = if log { (start.ln(), stop.ln()) } else { (start, stop) };
    Ok((0..n)
        .map(|i| {
            let v = a + (b - a) * i as f64 / (n - 1) as f64;
            if log {
                v.exp()
            } else {
                v
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub eta: f64,
    pub paper_e_re: f64,
    pub paper_e_im: f64,
    pub paper_g_re: f64,
    pub paper_g_im: f64,
    pub exact_e_re: f64,
    pub exact_e_im: f64,
    pub exact_g_re: f64,
    pub exact_g_im: f64,
    pub state_infidelity: f64,
    pub separation_ok: bool,
    pub separation_threshold: f64,
    /// Position-density peaks of the normalized `Φ₊` from the closed-form
    /// engine.
    pub peak_count: usize,
}

struct Point {
    p: ModelParams,
    t: f64,
}

fn points(cfg: &RunConfig, axis: &SweepAxis) -> Result<Vec<Point>, CliError> {
    match axis {
        SweepAxis::Time(ts) => {
            let p = cfg.model()?;
            ts.iter()
                .map(|&t| {
                    if !(t.is_finite() && t >= 0.0) {
                        return Err(CliError::Usage(format!("invalid time {t}")));
                    }
                    Ok(Point { p, t })
                })
                .collect()
        }
        SweepAxis::Eta(etas) => etas
            .iter()
            .map(|&eta| {
                let c = RunConfig {
                    eta,
                    eta_pair: None,
                    ..cfg.clone()
                };
                let p = c.model()?;
                let t = c.resolve_t(&p)?.t;
                Ok(Point { p, t })
            })
            .collect(),
    }
}

fn evaluate(pt: &Point, space: &SpaceConfig, cfg: &RunConfig) -> Result<SweepRow, CliError> {
    let Point { p, t } = pt;
    let psi1 = balanced_superposition(space);
    let paper = evolve_paper(p, *t, space, &psi1)?;
    let exact = evolve_exact(p, *t, space, &psi1)?;
    let pe = branch_amplitude(&paper, Internal::Excited)?;
    let pg = branch_amplitude(&paper, Internal::Ground)?;
    let ee = branch_amplitude(&exact, Internal::Excited)?;
    let eg = branch_amplitude(&exact, Internal::Ground)?;
    let sep = separation_time_ok(p, *t)?;

    let out = run_protocol(p, *t, cfg.variant.into(), Engine::Paper, space)?;
    let peak_count = if out.weight(CatSign::Plus) < DEGENERATE_WEIGHT {
        0
    } else {
        let grid = default_grid(RunConfig::amplitude(p, *t));
        let profile = position_density(&out.cat_plus.to_normalized()?, &grid)?;
        peak_summary(&profile)?.count
    };

    Ok(SweepRow {
        t: *t,
        eta: p.eta(),
        paper_e_re: pe.re,
        paper_e_im: pe.im,
        paper_g_re: pg.re,
        paper_g_im: pg.im,
        exact_e_re: ee.re,
        exact_e_im: ee.im,
        exact_g_re: eg.re,
        exact_g_im: eg.im,
        state_infidelity: state_infidelity(&paper, &exact)?,
        separation_ok: sep.ok,
        separation_threshold: sep.threshold,
        peak_count,
    })
}

/// Thread cap from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Evaluates every grid point on one shared truncation, sized for the
/// largest amplitude in the sweep.
pub fn sweep(
    cfg: &RunConfig,
    axis: &SweepAxis,
    threads: Option<usize>,
) -> Result<Vec<SweepRow>, CliError> {
    if axis.len() < 2 {
        return Err(CliError::Usage(format!(
            "a sweep needs at least 2 points, got {}",
            axis.len()
        )));
    }
    let pts = points(cfg, axis)?;
    let amplitude = pts
        .iter()
        .map(|pt| RunConfig::amplitude(&pt.p, pt.t))
        .fold(0.0, f64::max);
    let space = cfg.space(amplitude, 0.0, false)?;

    let run = || -> Result<Vec<SweepRow>, CliError> {
        pts.par_iter().map(|pt| evaluate(pt, &space, cfg)).collect()
    };
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}


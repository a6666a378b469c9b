//! `catlab prepare`: run the pulse sequence, read it out, write the state,
//! its position densities and a summary.

use std::path::PathBuf;

use catlab_core::analysis::{
    default_grid, grid_reach, linspace, number_stats, peak_summary, position_density,
    separation_time_ok, WignerEvaluator,
};
use catlab_core::fock::{required_dim, Internal, Ket};
use catlab_core::model::RegimeThresholds;
use catlab_core::protocol::{
    run_protocol, shelving_measure, OutcomeSource, ProtocolOutcome, DEGENERATE_WEIGHT,
};
use catlab_core::{CatSign, MotionalState};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ResolvedTime, RunConfig, VariantArg};
use crate::error::CliError;
use crate::output::{complex, complex_vec, csv_writer, ensure_dir, write_json};

pub const STATE_FILE: &str = "state.json";
pub const DENSITY_FILE: &str = "density.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const WIGNER_FILE: &str = "wigner.csv";

#[derive(Debug, Clone, Default)]
pub struct PrepareOptions {
    /// Points per axis of a Wigner map of the measured state; none if unset.
    pub wigner_points: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatSummary {
    pub sign: &'static str,
    pub weight: f64,
    pub norm_sqr: f64,
    pub mean_n: f64,
    pub var_n: f64,
    pub mean_a: [f64; 2],
    pub peak_count: usize,
    /// Peak positions in the `x = (a+a†)/√2` convention.
    pub peaks_x: Vec<f64>,
    /// The same peaks as `R = x/√2`.
    pub peaks_r: Vec<f64>,
    pub peak_heights: Vec<f64>,
    pub density_integral: f64,
    pub grid_too_narrow: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasurementSummary {
    pub seed: u64,
    pub fluorescence: bool,
    pub probability: f64,
    pub cat_sign: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrepareSummary {
    pub time: ResolvedTime,
    pub dim: usize,
    pub interior_margin: usize,
    pub xi: f64,
    pub epsilon: f64,
    pub wer_ok: bool,
    pub beyond_ldl: bool,
    pub variant: VariantArg,
    pub engine: crate::config::EngineArg,
    /// `‖Ψ₃|e⟩‖²`, `‖Ψ₃|g⟩‖²`.
    pub weight_e: f64,
    pub weight_g: f64,
    pub weight_plus: f64,
    pub weight_minus: f64,
    pub fluorescence_probability: f64,
    /// `|⟨e,0|Ψ₃⟩|²`.
    pub psi3_excited_vacuum_overlap: f64,
    pub psi3_norm_sqr: f64,
    pub separation_ok: bool,
    pub separation_threshold: f64,
    pub cats: Vec<CatSummary>,
    pub measurement: MeasurementSummary,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct StatePayload {
    dim: usize,
    psi3: Vec<[f64; 2]>,
    cat_plus: Vec<[f64; 2]>,
    cat_minus: Vec<[f64; 2]>,
    conditional_state: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct DensityRow {
    x: f64,
    r: f64,
    density_plus: Option<f64>,
    density_minus: Option<f64>,
}

#[derive(Serialize)]
struct WignerRow {
    x: f64,
    p: f64,
    w: f64,
}

pub fn sign_label(s: CatSign) -> &'static str {
    match s {
        CatSign::Plus => "plus",
        CatSign::Minus => "minus",
    }
}

fn normalized_cat(out: &ProtocolOutcome, sign: CatSign) -> Option<MotionalState> {
    if out.weight(sign) < DEGENERATE_WEIGHT {
        return None;
    }
    out.cat(sign).to_normalized().ok()
}

/// Wigner rows `W(x, ·)` over `grid × grid`, computed in parallel and
/// returned in grid order. The state is zero-padded to a truncation that can
/// hold every displacement the grid asks for.
pub fn parallel_wigner(state: &MotionalState, grid: &[f64]) -> Result<Vec<Vec<f64>>, CliError> {
    let reach = grid_reach(grid, grid);
    let mean_n = number_stats(state)?.mean_n;
    let dim = required_dim(reach + mean_n.sqrt()).max(state.dim());
    let ev = WignerEvaluator::new(&state.padded(dim)?, reach)?;
    Ok(grid.par_iter().map(|&x| ev.row(x, grid)).collect())
}

pub fn prepare(cfg: &RunConfig, opts: &PrepareOptions) -> Result<PrepareSummary, CliError> {
    let p = cfg.model()?;
    let time = cfg.resolve_t(&p)?;
    let amplitude = RunConfig::amplitude(&p, time.t);
    let space = cfg.space(amplitude, p.xi(), false)?;
    let out = run_protocol(&p, time.t, cfg.variant.into(), cfg.engine.into(), &space)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let record = shelving_measure(OutcomeSource::Sampled(&mut rng), &out)?;

    let grid = default_grid(amplitude);
    let mut cats = Vec::new();
    let mut densities: [Option<Vec<f64>>; 2] = [None, None];
    for (slot, sign) in [CatSign::Plus, CatSign::Minus].into_iter().enumerate() {
        let Some(state) = normalized_cat(&out, sign) else {
            continue;
        };
        let profile = position_density(&state, &grid)?;
        let peaks = peak_summary(&profile)?;
        let stats = number_stats(&state)?;
        cats.push(CatSummary {
            sign: sign_label(sign),
            weight: out.weight(sign),
            norm_sqr: out.cat(sign).norm_sqr(),
            mean_n: stats.mean_n,
            var_n: stats.var_n,
            mean_a: complex(stats.mean_a),
            peak_count: peaks.count,
            peaks_r: peaks
                .peak_positions
                .iter()
                .map(|x| x / std::f64::consts::SQRT_2)
                .collect(),
            peaks_x: peaks.peak_positions,
            peak_heights: peaks.peak_heights,
            density_integral: profile.integral,
            grid_too_narrow: profile.grid_too_narrow,
        });
        densities[slot] = Some(profile.values);
    }

    ensure_dir(&cfg.out_dir)?;
    let state_path = cfg.out_dir.join(STATE_FILE);
    write_json(
        &state_path,
        cfg,
        &StatePayload {
            dim: space.dim(),
            psi3: complex_vec(out.psi3.amplitudes().iter()),
            cat_plus: complex_vec(out.cat_plus.amplitudes().iter()),
            cat_minus: complex_vec(out.cat_minus.amplitudes().iter()),
            conditional_state: complex_vec(record.conditional_state.amplitudes().iter()),
        },
    )?;

    let density_path = cfg.out_dir.join(DENSITY_FILE);
    let mut w = csv_writer(&density_path)?;
    for (i, &x) in grid.iter().enumerate() {
        w.serialize(DensityRow {
            x,
            r: x / std::f64::consts::SQRT_2,
            density_plus: densities[0].as_ref().map(|d| d[i]),
            density_minus: densities[1].as_ref().map(|d| d[i]),
        })?;
    }
    w.flush().map_err(|e| CliError::io(&density_path, e))?;

    let mut files = vec![state_path, density_path];
    if let Some(n) = opts.wigner_points {
        if n < 2 {
            return Err(CliError::Usage("wigner grid needs at least 2 points".into()));
        }
        let half = std::f64::consts::SQRT_2 * amplitude + 4.0;
        let wgrid = linspace(-half, half, n);
        let rows = parallel_wigner(&record.conditional_state, &wgrid)?;
        let path = cfg.out_dir.join(WIGNER_FILE);
        let mut w = csv_writer(&path)?;
        for (&x, row) in wgrid.iter().zip(&rows) {
            for (&pv, &wv) in wgrid.iter().zip(row) {
                w.serialize(WignerRow { x, p: pv, w: wv })?;
            }
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        files.push(path);
    }

    let flags = p.regime_flags(&RegimeThresholds::default());
    let sep = separation_time_ok(&p, time.t)?;
    let e_vac = out.psi3.branch(Internal::Excited).amplitudes()[0];
    let summary_path = cfg.out_dir.join(SUMMARY_FILE);
    files.push(summary_path.clone());
    let summary = PrepareSummary {
        time,
        dim: space.dim(),
        interior_margin: space.interior_margin(),
        xi: p.xi(),
        epsilon: p.epsilon(),
        wer_ok: flags.wer_ok,
        beyond_ldl: flags.beyond_ldl,
        variant: cfg.variant,
        engine: cfg.engine,
        weight_e: out.psi3.branch(Internal::Excited).norm_sqr(),
        weight_g: out.psi3.branch(Internal::Ground).norm_sqr(),
        weight_plus: out.weights[0],
        weight_minus: out.weights[1],
        fluorescence_probability: out.fluorescence_probability(),
        psi3_excited_vacuum_overlap: e_vac.norm_sqr(),
        psi3_norm_sqr: out.psi3.norm_sqr(),
        separation_ok: sep.ok,
        separation_threshold: sep.threshold,
        cats,
        measurement: MeasurementSummary {
            seed: cfg.seed,
            fluorescence: record.fluorescence,
            probability: record.probability,
            cat_sign: sign_label(record.cat_sign),
        },
        files,
    };
    write_json(&summary_path, cfg, &summary)?;
    Ok(summary)
}

//! Observable diagnostics for motional states: position density, peak
//! extraction, the separation criterion, Wigner maps and phonon statistics.
//!
//! Position is measured with `x̂ = (a + a†)/√2`, so a coherent state `|α⟩`
//! is centred at `x = √2·Re α`. The cat-centre expression `⟨R⟩ ~ α` used when
//! discussing observability corresponds to `R = x/√2`.

// inherent float methods are only visible when std is linked somewhere
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;
use core::cell::Cell;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{
    check_truncation, ladder_operators, position_generator, HermitianSpectrum, Ket,
    MotionalState, SpaceConfig, C64, NORM_TOL,
};
use crate::model::ModelParams;

/// Default number of grid points for position densities.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Margin, in ground-state widths, added beyond the outermost coherent centre.
pub const DEFAULT_GRID_MARGIN: f64 = 6.0;
/// Peaks lower than this fraction of the global maximum are ignored.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 1e-3;
/// Densities integrating below this are flagged as cut off by the grid.
pub const MIN_GRID_PROBABILITY: f64 = 0.999;

const RESCALE: f64 = 1e100;

fn require_normalized(state: &MotionalState) -> Result<()> {
    let n = state.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr: n });
    }
    Ok(())
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| start + step * i as f64).collect()
        }
    }
}

/// Symmetric grid of [`DEFAULT_GRID_POINTS`] points over
/// `±(√2·alpha_max + 6)`.
pub fn default_grid(alpha_max: f64) -> Vec<f64> {
    let half = core::f64::consts::SQRT_2 * alpha_max.abs() + DEFAULT_GRID_MARGIN;
    linspace(-half, half, DEFAULT_GRID_POINTS)
}

/// Runs the normalized Hermite-function recurrence at `x`, calling
/// `visit(n, u_n, scale)` for each order.
///
/// The true value is `φ_n(x) = u_n · exp(scale − x²/2)` where `scale` is the
/// running log-scale passed to `visit`. Whenever `|u|` exceeds `1e100` the
/// pair in flight is divided by `1e100` and `on_rescale` is told, so no
/// intermediate grows beyond ~1e102.
fn hermite_recurrence(
    len: usize,
    x: f64,
    mut visit: impl FnMut(usize, f64, f64),
    mut on_rescale: impl FnMut(f64),
) {
    if len == 0 {
        return;
    }
    let mut scale = 0.0;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    visit(0, cur, scale);
    for n in 0..len - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            scale += RESCALE.ln();
            on_rescale(1.0 / RESCALE);
        }
        visit(n + 1, cur, scale);
    }
}

fn unscale(u: f64, scale: f64, x: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    u.signum() * (u.abs().ln() + scale - 0.5 * x * x).exp()
}

/// Harmonic-oscillator eigenfunctions `φ_0(x) … φ_{len-1}(x)` for the
/// quadrature `x̂ = (a+a†)/√2`.
pub fn hermite_functions(len: usize, x: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0; len];
    hermite_recurrence(len, x, |n, u, s| out[n] = unscale(u, s, x), |_| {});
    out
}

/// `ψ(x) = Σ c_n φ_n(x)`.
pub fn wavefunction(amplitudes: &DVector<C64>, x: f64) -> C64 {
    let acc = Cell::new(C64::new(0.0, 0.0));
    let mut scale = 0.0;
    hermite_recurrence(
        amplitudes.len(),
        x,
        |n, u, s| {
            acc.set(acc.get() + amplitudes[n] * u);
            scale = s;
        },
        |f| acc.set(acc.get() * f),
    );
    let acc = acc.get();
    if acc == C64::new(0.0, 0.0) {
        return acc;
    }
    acc * (scale - 0.5 * x * x).exp()
}

/// Sampled position probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Mean spacing of `grid`.
    pub grid_step: f64,
    /// Trapezoidal integral of `values`.
    pub integral: f64,
    /// Set when less than [`MIN_GRID_PROBABILITY`] of the state lies on the
    /// grid.
    pub grid_too_narrow: bool,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Config(format!(
            "grid needs at least 2 points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::Config("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
        .sum()
}

pub fn position_density(state: &MotionalState, grid: &[f64]) -> Result<DensityProfile> {
    require_normalized(state)?;
    check_grid(grid)?;
    let values: Vec<f64> = grid
        .iter()
        .map(|&x| wavefunction(state.amplitudes(), x).norm_sqr())
        .collect();
    let integral = trapezoid(grid, &values);
    Ok(DensityProfile {
        grid_step: (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64,
        grid: grid.to_vec(),
        values,
        integral,
        grid_too_narrow: integral < MIN_GRID_PROBABILITY,
    })
}

/// Local maxima of a density, refined by a three-point parabola.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSummary {
    pub peak_positions: Vec<f64>,
    pub peak_heights: Vec<f64>,
    pub count: usize,
}

pub fn peak_summary(profile: &DensityProfile) -> Result<PeakSummary> {
    peak_summary_with_threshold(profile, DEFAULT_PEAK_THRESHOLD)
}

/// Strict interior local maxima above `relative_threshold × max`.
pub fn peak_summary_with_threshold(
    profile: &DensityProfile,
    relative_threshold: f64,
) -> Result<PeakSummary> {
    let (x, y) = (&profile.grid, &profile.values);
    if y.is_empty() || x.len() != y.len() {
        return Err(Error::EmptyProfile);
    }
    let floor = relative_threshold * y.iter().copied().fold(0.0, f64::max);
    let mut peak_positions = Vec::new();
    let mut peak_heights = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] > y[i + 1] && y[i] >= floor {
            let (pos, height) = parabola_vertex(
                (x[i - 1], y[i - 1]),
                (x[i], y[i]),
                (x[i + 1], y[i + 1]),
            );
            peak_positions.push(pos);
            peak_heights.push(height);
        }
    }
    Ok(PeakSummary {
        count: peak_positions.len(),
        peak_positions,
        peak_heights,
    })
}

fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> (f64, f64) {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return (x1, y1);
    }
    let xv = x1 - 0.5 * num / den;
    // Lagrange form evaluated at the vertex
    let l0 = (xv - x1) * (xv - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (xv - x0) * (xv - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (xv - x0) * (xv - x1) / ((x2 - x0) * (x2 - x1));
    (xv, y0 * l0 + y1 * l1 + y2 * l2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationCheck {
    pub ok: bool,
    pub threshold: f64,
}

/// Minimum interaction time `√(2π/ξ)` for the two cat components to be
/// resolvable.
pub fn separation_threshold(xi: f64) -> Result<f64> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::Domain(format!("xi must be > 0, got {xi}")));
    }
    Ok((2.0 * PI / xi).sqrt())
}

pub fn separation_time_ok(p: &ModelParams, t: f64) -> Result<SeparationCheck> {
    let threshold = separation_threshold(p.xi())?;
    Ok(SeparationCheck {
        ok: t >= threshold,
        threshold,
    })
}

/// Smallest `t = (2k+1)π/2` with `t ≥ √(2π/ξ)`, returned as `(k, t)`.
pub fn first_observable_time(xi: f64) -> Result<(u32, f64)> {
    let threshold = separation_threshold(xi)?;
    let mut k = ((threshold / FRAC_PI_2 - 1.0) / 2.0).ceil().max(0.0) as u32;
    // guard against rounding in the ceil
    while k > 0 && (2 * k - 1) as f64 * FRAC_PI_2 >= threshold {
        k -= 1;
    }
    while ((2 * k + 1) as f64) * FRAC_PI_2 < threshold {
        k += 1;
    }
    Ok((k, (2 * k + 1) as f64 * FRAC_PI_2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberStats {
    pub mean_n: f64,
    pub var_n: f64,
    pub mean_a: C64,
}

/// `⟨n⟩`, `Var(n)` and `⟨a⟩` of a normalized state.
pub fn number_stats(state: &MotionalState) -> Result<NumberStats> {
    require_normalized(state)?;
    let c = state.amplitudes();
    let (mut m1, mut m2) = (0.0, 0.0);
    let mut mean_a = C64::new(0.0, 0.0);
    for n in 0..c.len() {
        let nf = n as f64;
        let w = c[n].norm_sqr();
        m1 += nf * w;
        m2 += nf * nf * w;
        if n > 0 {
            mean_a += c[n - 1].conj() * c[n] * nf.sqrt();
        }
    }
    Ok(NumberStats {
        mean_n: m1,
        var_n: (m2 - m1 * m1).max(0.0),
        mean_a,
    })
}

/// Wigner function sampled on a rectangular phase-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMap {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `values[(i, j)] = W(x[i], p[j])`.
    pub values: DMatrix<f64>,
}

impl WignerMap {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let rows: Vec<f64> = (0..self.x.len())
            .map(|i| {
                let row: Vec<f64> = self.values.row(i).iter().copied().collect();
                trapezoid(&self.p, &row)
            })
            .collect();
        trapezoid(&self.x, &rows)
    }
}

/// `W(x, p) = (1/π)⟨ψ|D(λ) Π D†(λ)|ψ⟩` with `λ = (x+ip)/√2` and `Π` the Fock
/// parity, evaluated one `x` row at a time.
///
/// `D†(λ)` is applied as `e^{-ip x̂} e^{ix p̂}` (up to a phase that drops out of
/// the parity expectation), so only the two quadratures are diagonalized.
#[derive(Debug, Clone)]
pub struct WignerEvaluator {
    psi: DVector<C64>,
    x_op: HermitianSpectrum,
    p_op: HermitianSpectrum,
}

impl WignerEvaluator {
    /// Prepares evaluation for displacements up to `|λ| = lambda_max`,
    /// checking the truncation for `lambda_max + √⟨n⟩`.
    pub fn new(state: &MotionalState, lambda_max: f64) -> Result<Self> {
        require_normalized(state)?;
        let cfg = SpaceConfig::with_default_margin(state.dim())?;
        let stats = number_stats(state)?;
        check_truncation(&cfg, lambda_max + stats.mean_n.sqrt())?;
        let s = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let (a, ad) = ladder_operators(&cfg);
        Ok(Self {
            psi: state.amplitudes().clone(),
            x_op: HermitianSpectrum::new(&(position_generator(&cfg) * s))?,
            p_op: HermitianSpectrum::new(&((ad - a) * C64::new(0.0, 1.0) * s))?,
        })
    }

    /// `W(x, p)` for every `p` in `pgrid`.
    pub fn row(&self, x: f64, pgrid: &[f64]) -> Vec<f64> {
        let shifted = self.p_op.apply(-x, &self.psi);
        pgrid
            .iter()
            .map(|&p| {
                let phi = self.x_op.apply(p, &shifted);
                let parity: f64 = phi
                    .iter()
                    .enumerate()
                    .map(|(n, c)| if n % 2 == 0 { c.norm_sqr() } else { -c.norm_sqr() })
                    .sum();
                parity / PI
            })
            .collect()
    }
}

/// Largest `|λ|` reached on a rectangular grid.
pub fn grid_reach(xgrid: &[f64], pgrid: &[f64]) -> f64 {
    let reach = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (reach(xgrid).powi(2) + reach(pgrid).powi(2)).sqrt() / core::f64::consts::SQRT_2
}

pub fn wigner_map(state: &MotionalState, xgrid: &[f64], pgrid: &[f64]) -> Result<WignerMap> {
    check_grid(xgrid)?;
    check_grid(pgrid)?;
    let ev = WignerEvaluator::new(state, grid_reach(xgrid, pgrid))?;
    let mut values = DMatrix::zeros(xgrid.len(), pgrid.len());
    for (i, &x) in xgrid.iter().enumerate() {
        for (j, w) in ev.row(x, pgrid).into_iter().enumerate() {
            values[(i, j)] = w;
        }
    }
    Ok(WignerMap {
        x: xgrid.to_vec(),
        p: pgrid.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, required_dim};
    use crate::protocol::{cat_analytic, CatSign};
    use core::f64::consts::SQRT_2;
    use proptest::prelude::*;

    fn coherent(re: f64, im: f64) -> MotionalState {
        let alpha = C64::new(re, im);
        let cfg = SpaceConfig::with_default_margin(required_dim(alpha.norm())).unwrap();
        coherent_state(alpha, &cfg).unwrap()
    }

    fn pad(s: &MotionalState, dim: usize) -> MotionalState {
        s.padded(dim).unwrap()
    }

    fn cat(eta: f64, k: u32, sign: CatSign) -> MotionalState {
        let p = ModelParams::new(eta, 0.0, 0.0).unwrap();
        let alpha = p.xi() / 8.0 * ((2 * k + 1) as f64).powi(2) * PI * PI;
        let cfg = SpaceConfig::with_default_margin(required_dim(alpha)).unwrap();
        cat_analytic(&p, k, sign, &cfg).unwrap().state
    }

    #[test]
    fn hermite_low_orders() {
        for &x in &[-2.5, -0.3, 0.0, 0.7, 3.1] {
            let phi = hermite_functions(4, x);
            let g = PI.powf(-0.25) * (-0.5 * x * x).exp();
            assert!((phi[0] - g).abs() < 1e-15);
            assert!((phi[1] - g * SQRT_2 * x).abs() < 1e-14);
            assert!((phi[2] - g * (2.0 * x * x - 1.0) / SQRT_2).abs() < 1e-14);
            assert!((phi[3] - g * (2.0 * x * x * x - 3.0 * x) / 3f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn hermite_is_overflow_free() {
        for &x in &[-40.0, -33.0, -12.5, 0.0, 7.0, 31.9, 40.0] {
            let phi = hermite_functions(513, x);
            assert!(phi.iter().all(|v| v.is_finite() && v.abs() < 1.0), "x={x}");
        }
        // far outside the classical turning point the high orders are tiny but
        // not flushed to zero by the Gaussian underflowing first
        let phi = hermite_functions(513, 40.0);
        assert!(phi[512] > 0.0 && phi[512] < 1e-20);
    }

    #[test]
    fn hermite_orthonormal_on_grid() {
        let grid = linspace(-12.0, 12.0, 4001);
        let table: Vec<Vec<f64>> = grid.iter().map(|&x| hermite_functions(12, x)).collect();
        for m in 0..12 {
            for n in 0..12 {
                let col: Vec<f64> = table.iter().map(|r| r[m] * r[n]).collect();
                let ip = trapezoid(&grid, &col);
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-10, "{m},{n}: {ip}");
            }
        }
    }

    #[test]
    fn vacuum_density_and_peak() {
        let cfg = SpaceConfig::with_default_margin(16).unwrap();
        let prof = position_density(&MotionalState::vacuum(&cfg), &default_grid(0.0)).unwrap();
        for (x, v) in prof.grid.iter().zip(&prof.values) {
            assert!((v - (-x * x).exp() / PI.sqrt()).abs() < 1e-14);
        }
        assert!(!prof.grid_too_narrow);
        let peaks = peak_summary(&prof).unwrap();
        assert_eq!(peaks.count, 1);
        assert!(peaks.peak_positions[0].abs() <= prof.grid_step);
    }

    #[test]
    fn narrow_grid_is_flagged() {
        let s = coherent(3.0, 0.0);
        let prof = position_density(&s, &linspace(-2.0, 2.0, 101)).unwrap();
        assert!(prof.grid_too_narrow);
    }

    #[test]
    fn bad_grids_and_profiles() {
        let cfg = SpaceConfig::with_default_margin(16).unwrap();
        let vac = MotionalState::vacuum(&cfg);
        assert!(position_density(&vac, &[0.0]).is_err());
        assert!(position_density(&vac, &[0.0, 1.0, 1.0]).is_err());
        let empty = DensityProfile {
            grid: Vec::new(),
            values: Vec::new(),
            grid_step: 0.0,
            integral: 0.0,
            grid_too_narrow: true,
        };
        assert_eq!(peak_summary(&empty), Err(Error::EmptyProfile));
    }

    #[test]
    fn even_cat_has_two_symmetric_peaks() {
        let state = cat(2.0, 0, CatSign::Plus);
        let alpha = PI * PI / 8.0;
        let prof = position_density(&state, &default_grid(alpha)).unwrap();
        assert!((prof.integral - 1.0).abs() < 1e-4);
        let peaks = peak_summary(&prof).unwrap();
        assert_eq!(peaks.count, 2);
        let (l, r) = (peaks.peak_positions[0], peaks.peak_positions[1]);
        assert!((l + r).abs() < 1e-3, "{l} {r}");
        assert!((r - SQRT_2 * alpha).abs() < 0.02, "{r}");
    }

    #[test]
    fn cat_peaks_follow_observability() {
        // k = 1 at η = 2 is past the separation time: peaks at ±√2·(ξ/8)(2k+1)²π²
        let p = ModelParams::new(2.0, 0.0, 0.0).unwrap();
        assert!(separation_time_ok(&p, 1.5 * PI).unwrap().ok);
        let alpha = 9.0 * PI * PI / 8.0;
        let prof = position_density(&cat(2.0, 1, CatSign::Plus), &default_grid(alpha)).unwrap();
        let peaks = peak_summary(&prof).unwrap();
        assert_eq!(peaks.count, 2);
        for x in peaks.peak_positions {
            assert!((x.abs() / (SQRT_2 * alpha) - 1.0).abs() < 1e-2);
        }

        // deep in the Lamb-Dicke regime the components overlap into one bump
        let p = ModelParams::new(0.202, 0.0, 0.0).unwrap();
        assert!(!separation_time_ok(&p, FRAC_PI_2).unwrap().ok);
        let prof = position_density(&cat(0.202, 0, CatSign::Plus), &default_grid(1.0)).unwrap();
        assert_eq!(peak_summary(&prof).unwrap().count, 1);
    }

    #[test]
    fn separation_thresholds() {
        assert!((separation_threshold(1.0).unwrap() - 2.5066).abs() < 1e-4);
        assert!((separation_threshold(1.5).unwrap() - 2.0467).abs() < 1e-4);
        assert!(separation_threshold(0.0).is_err());
        assert!(separation_threshold(-1.0).is_err());
        let mut last = f64::INFINITY;
        for i in 1..50 {
            let t = separation_threshold(0.1 * i as f64).unwrap();
            assert!(t < last);
            last = t;
        }
    }

    #[test]
    fn first_observable_instants() {
        assert_eq!(first_observable_time(1.0).unwrap(), (1, 1.5 * PI));
        assert_eq!(first_observable_time(1.5).unwrap(), (1, 1.5 * PI));
        // ξ large enough that π/2 already qualifies
        assert_eq!(first_observable_time(4.0).unwrap().0, 0);
        // √(2π/ξ) = 5π/2 exactly
        let xi = 2.0 * PI / (2.5 * PI).powi(2);
        let (k, t) = first_observable_time(xi).unwrap();
        assert!(t >= separation_threshold(xi).unwrap());
        assert!(k == 2 || k == 3);
    }

    #[test]
    fn number_stats_examples() {
        let cfg = SpaceConfig::with_default_margin(32).unwrap();
        let s = number_stats(&MotionalState::vacuum(&cfg)).unwrap();
        assert_eq!((s.mean_n, s.var_n, s.mean_a), (0.0, 0.0, C64::new(0.0, 0.0)));
        let s = number_stats(&MotionalState::fock(3, &cfg).unwrap()).unwrap();
        assert_eq!((s.mean_n, s.var_n, s.mean_a), (3.0, 0.0, C64::new(0.0, 0.0)));

        let alpha = C64::new(1.0, 0.5);
        let s = number_stats(&coherent_state(alpha, &cfg).unwrap()).unwrap();
        assert!((s.mean_n - 1.25).abs() < 1e-6);
        assert!((s.var_n - 1.25).abs() < 1e-6);
        assert!((s.mean_a - alpha).norm() < 1e-6);
    }

    /// Independent route: W(x,p) = (1/π)∫ ψ*(x+y) ψ(x−y) e^{2ipy} dy.
    fn wigner_by_quadrature(state: &MotionalState, x: f64, p: f64) -> f64 {
        let ys = linspace(-10.0, 10.0, 4001);
        let vals_re: Vec<f64> = ys
            .iter()
            .map(|&y| {
                let a = wavefunction(state.amplitudes(), x + y).conj();
                let b = wavefunction(state.amplitudes(), x - y);
                (a * b * C64::from_polar(1.0, 2.0 * p * y)).re
            })
            .collect();
        trapezoid(&ys, &vals_re) / PI
    }

    #[test]
    fn wigner_vacuum_and_parity_cats() {
        let cfg = SpaceConfig::with_default_margin(32).unwrap();
        let w = wigner_map(&MotionalState::vacuum(&cfg), &[0.0, 1.0], &[-0.5, 0.0]).unwrap();
        assert!((w.values[(0, 1)] - 1.0 / PI).abs() < 1e-12);
        assert!((w.values[(1, 0)] - (-1.25f64).exp() / PI).abs() < 1e-10);

        let even = cat(2.0, 0, CatSign::Plus);
        let odd = cat(2.0, 0, CatSign::Minus);
        let at0 = |s: &MotionalState| {
            wigner_map(&pad(s, 48), &[0.0, 0.1], &[0.0, 0.1]).unwrap().values[(0, 0)]
        };
        assert!((at0(&even) - 1.0 / PI).abs() < 1e-10);
        assert!((at0(&odd) + 1.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn wigner_matches_quadrature_oracle() {
        let state = cat(2.0, 0, CatSign::Plus);
        let padded = pad(&state, 64);
        let xs = [-1.7, -0.4, 0.0, 0.9];
        let ps = [-1.1, 0.0, 0.35];
        let w = wigner_map(&padded, &xs, &ps).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &p) in ps.iter().enumerate() {
                let oracle = wigner_by_quadrature(&state, x, p);
                assert!((w.values[(i, j)] - oracle).abs() < 1e-8, "({x},{p}) {} vs {oracle}", w.values[(i, j)]);
            }
        }
    }

    #[test]
    fn wigner_normalization_and_truncation_guard() {
        let s = pad(&coherent(0.8, -0.4), 112);
        let g = linspace(-5.5, 5.5, 45);
        let w = wigner_map(&s, &g, &g).unwrap();
        assert!((w.integral() - 1.0).abs() < 1e-2, "{}", w.integral());

        let small = MotionalState::vacuum(&SpaceConfig::with_default_margin(20).unwrap());
        assert!(matches!(
            wigner_map(&small, &g, &g),
            Err(Error::Truncation { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn coherent_peak_sits_at_sqrt2_alpha(alpha in -12.0f64..12.0) {
            let s = coherent(alpha, 0.0);
            let prof = position_density(&s, &default_grid(alpha)).unwrap();
            prop_assert!((prof.integral - 1.0).abs() < 1e-4);
            let peaks = peak_summary(&prof).unwrap();
            prop_assert_eq!(peaks.count, 1);
            prop_assert!((peaks.peak_positions[0] - SQRT_2 * alpha).abs() < 1e-3);
        }

        #[test]
        fn densities_integrate_to_one(re in -4.0f64..4.0, im in -4.0f64..4.0, mix in 0.0f64..1.0) {
            let a = coherent(re, im);
            let b = coherent(-re, im * 0.5);
            let dim = a.dim().max(b.dim());
            let s = pad(&a, dim)
                .add_scaled(C64::new(mix, mix), &pad(&b, dim))
                .unwrap()
                .to_normalized()
                .unwrap();
            let prof = position_density(&s, &default_grid(C64::new(re, im).norm())).unwrap();
            prop_assert!((prof.integral - 1.0).abs() < 1e-4);
        }
    }
}

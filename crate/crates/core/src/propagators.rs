//! Time-evolution operators for the reduced rotated-frame dynamics.
//!
//! * [`u_exact`]: `T† exp(-i t H_I) T` with the reduced `H_I`, exponentiated
//!   spectrally on the full joint space. This is the oracle.
//! * [`u_oracle_lab`]: `exp(-i t H_lab)`, which keeps the `(Ω/2)σz` term the
//!   reduced dynamics drops.
//! * [`u_paper`]: the closed-form factorization
//!   `(1/2) e^{-iξ²t} M₁ M₂ M₃ M₄ M₅`, every factor built from a Hermitian
//!   generator so the product is unitary whatever the truncation.
//!
//! The factorization is not a one-parameter group and agrees with the oracle
//! only as `t → 0`; [`propagator_report`] measures how far apart they are.

// inherent float methods are only visible when std is linked somewhere
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::analysis::number_stats;
use crate::error::{Error, Result};
use crate::fock::{
    check_truncation, embed_blocks, identity, momentum_generator, number_operator,
    position_generator, sigma_x_rotation, HermitianSpectrum, Internal, JointOperator,
    JointState, Ket, MotionalState, SpaceConfig, C64,
};
use crate::model::{h_lab, h_rotated_reduced, t_blocks, ModelParams};

/// Relative branch-amplitude gap above which a report is flagged.
pub const AMPLITUDE_DISAGREEMENT_THRESHOLD: f64 = 0.1;

/// Largest coherent amplitude the propagators are expected to produce from
/// the vacuum: `max(ξt²/2, 2ξ)`.
pub fn evolution_amplitude_bound(p: &ModelParams, t: f64) -> f64 {
    let xi = p.xi();
    (0.5 * xi * t * t).max(2.0 * xi)
}

fn check_evolution(p: &ModelParams, t: f64, cfg: &SpaceConfig) -> Result<()> {
    check_truncation(cfg, evolution_amplitude_bound(p, t))
}

/// Oracle propagator, after checking the truncation against
/// [`evolution_amplitude_bound`].
pub fn u_exact(p: &ModelParams, t: f64, cfg: &SpaceConfig) -> Result<JointOperator> {
    check_evolution(p, t, cfg)?;
    u_exact_unchecked(p, t, cfg)
}

/// Oracle propagator without the truncation check. Still exactly unitary;
/// only the physical meaning of edge rows is lost.
pub fn u_exact_unchecked(p: &ModelParams, t: f64, cfg: &SpaceConfig) -> Result<JointOperator> {
    let h = h_rotated_reduced(p, cfg)?;
    let inner = JointOperator::new(HermitianSpectrum::new(h.matrix())?.unitary(t), true)?;
    let tr = t_blocks(&HermitianSpectrum::new(&position_generator(cfg))?.unitary(-p.xi()));
    tr.adjoint().compose(&inner)?.compose(&tr)
}

/// `exp(-i t H_lab)`.
pub fn u_oracle_lab(p: &ModelParams, t: f64, cfg: &SpaceConfig) -> Result<JointOperator> {
    check_evolution(p, t, cfg)?;
    let h = h_lab(p, cfg)?;
    JointOperator::new(HermitianSpectrum::new(h.matrix())?.unitary(t), true)
}

/// The five block factors and scalar prefactor of the closed-form propagator.
#[derive(Debug, Clone)]
pub struct PaperFactors {
    /// `(1/2) e^{-iξ²t}`.
    pub prefactor: C64,
    /// `[[W D K, −W D K], [W D† K†, W D† K†]]` with `W = e^{-ia†at}`,
    /// `K = e^{-ξt(a†−a)}`.
    pub m1: JointOperator,
    /// `exp(-ξt(a†−a)σx)`, the cosh/sinh block.
    pub m2: JointOperator,
    /// `exp(-i(ξ/2)t²(a†+a)σx)`, the cos/sin block.
    pub m3: JointOperator,
    /// `exp(iεtσx)`.
    pub m4: JointOperator,
    /// `[[D†, D], [−D†, D]]`.
    pub m5: JointOperator,
}

impl PaperFactors {
    pub fn new(p: &ModelParams, t: f64, cfg: &SpaceConfig) -> Result<Self> {
        let xi = p.xi();
        let x = HermitianSpectrum::new(&position_generator(cfg))?;
        let y = HermitianSpectrum::new(&momentum_generator(cfg))?;
        let id = HermitianSpectrum::new(&identity(cfg))?;

        let d = x.unitary(-xi);
        let dd = d.adjoint();
        let k = y.unitary(xi * t);
        let w = HermitianSpectrum::new(&number_operator(cfg))?.unitary(t);

        let upper = &w * &d * &k;
        let lower = &w * &dd * k.adjoint();
        let m1 = embed_blocks(&upper, &(-&upper), &lower, &lower)?;
        let m5 = embed_blocks(&dd, &d, &(-&dd), &d)?;

        Ok(Self {
            prefactor: C64::from_polar(0.5, -xi * xi * t),
            m1,
            m2: sigma_x_rotation(&y, xi * t),
            m3: sigma_x_rotation(&x, 0.5 * xi * t * t),
            m4: sigma_x_rotation(&id, -p.epsilon() * t),
            m5,
        })
    }

    pub fn product(&self) -> Result<JointOperator> {
        let m = self
            .m1
            .compose(&self.m2)?
            .compose(&self.m3)?
            .compose(&self.m4)?
            .compose(&self.m5)?;
        JointOperator::new(m.into_matrix() * self.prefactor, true)
    }
}

/// Closed-form propagator, after checking the truncation against
/// [`evolution_amplitude_bound`].
pub fn u_paper(p: &ModelParams, t: f64, cfg: &SpaceConfig) -> Result<JointOperator> {
    check_evolution(p, t, cfg)?;
    u_paper_unchecked(p, t, cfg)
}

pub fn u_paper_unchecked(p: &ModelParams, t: f64, cfg: &SpaceConfig) -> Result<JointOperator> {
    PaperFactors::new(p, t, cfg)?.product()
}

fn split(psi: &JointState, cfg: &SpaceConfig) -> Result<(DVector<C64>, DVector<C64>)> {
    if psi.dim() != cfg.dim() {
        return Err(Error::Shape {
            expected: cfg.dim(),
            found: psi.dim(),
        });
    }
    Ok((
        psi.branch(Internal::Excited).into_amplitudes(),
        psi.branch(Internal::Ground).into_amplitudes(),
    ))
}

fn join(e: DVector<C64>, g: DVector<C64>) -> JointState {
    JointState::from_branches(&MotionalState::unnormalized(e), &MotionalState::unnormalized(g))
        .expect("equal lengths")
}

/// `(e, g) ↦ (C e + S g, S e + C g)` for the σx rotation `exp(-iθ σx⊗G)`.
fn sigma_x_apply(
    spec: &HermitianSpectrum,
    theta: f64,
    e: &DVector<C64>,
    g: &DVector<C64>,
) -> (DVector<C64>, DVector<C64>) {
    let (ue, ude) = (spec.apply(theta, e), spec.apply(-theta, e));
    let (ug, udg) = (spec.apply(theta, g), spec.apply(-theta, g));
    let half = C64::new(0.5, 0.0);
    let (ce, se) = ((&ue + &ude) * half, (ue - ude) * half);
    let (cg, sg) = ((&ug + &udg) * half, (ug - udg) * half);
    (ce + sg, se + cg)
}

/// `U_paper·ψ` applied factor by factor, without forming joint matrices.
pub fn evolve_paper(
    p: &ModelParams,
    t: f64,
    cfg: &SpaceConfig,
    psi: &JointState,
) -> Result<JointState> {
    check_evolution(p, t, cfg)?;
    let xi = p.xi();
    let (e, g) = split(psi, cfg)?;
    let x = HermitianSpectrum::new(&position_generator(cfg))?;
    let y = HermitianSpectrum::new(&momentum_generator(cfg))?;

    // M5
    let (de, dg) = (x.apply(xi, &e), x.apply(-xi, &g));
    let (e, g) = (&de + &dg, dg - de);
    // M4
    let (s, c) = (p.epsilon() * t).sin_cos();
    let (cs, is) = (C64::new(c, 0.0), C64::new(0.0, s));
    let (e, g) = (&e * cs + &g * is, e * is + g * cs);
    // M3, M2
    let (e, g) = sigma_x_apply(&x, 0.5 * xi * t * t, &e, &g);
    let (e, g) = sigma_x_apply(&y, xi * t, &e, &g);
    // M1
    let w = DVector::from_fn(cfg.dim(), |n, _| C64::from_polar(1.0, -(n as f64) * t));
    let upper = x.apply(-xi, &y.apply(xi * t, &(&e - &g)));
    let lower = x.apply(xi, &y.apply(-xi * t, &(e + g)));
    let pre = C64::from_polar(0.5, -xi * xi * t);
    Ok(join(
        upper.component_mul(&w) * pre,
        lower.component_mul(&w) * pre,
    ))
}

/// `U_exact·ψ`. The reduced Hamiltonian commutes with σx, so it is evolved
/// in the σx eigenbasis where it splits into `a†a + ξ² ± (ξ·i(a−a†) − ε)`.
pub fn evolve_exact(
    p: &ModelParams,
    t: f64,
    cfg: &SpaceConfig,
    psi: &JointState,
) -> Result<JointState> {
    check_evolution(p, t, cfg)?;
    let xi = p.xi();
    let (e, g) = split(psi, cfg)?;
    let x = HermitianSpectrum::new(&position_generator(cfg))?;
    let s = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);

    // T
    let (de, dg) = (x.apply(xi, &e), x.apply(-xi, &g));
    let (te, tg) = ((&de + &dg) * s, (dg - de) * s);
    // σx eigenbasis
    let (plus, minus) = ((&te + &tg) * s, (te - tg) * s);
    let base = number_operator(cfg) + identity(cfg) * C64::new(xi * xi, 0.0);
    let coupling =
        momentum_generator(cfg) * C64::new(xi, 0.0) - identity(cfg) * C64::new(p.epsilon(), 0.0);
    let plus = HermitianSpectrum::new(&(&base + &coupling))?.apply(t, &plus);
    let minus = HermitianSpectrum::new(&(base - coupling))?.apply(t, &minus);
    let (te, tg) = ((&plus + &minus) * s, (plus - minus) * s);
    // T†
    let (a, b) = ((&te - &tg) * s, (te + tg) * s);
    Ok(join(x.apply(-xi, &a), x.apply(xi, &b)))
}

/// `(|e⟩ + |g⟩)|0⟩/√2`, the state the first pulse prepares.
pub fn balanced_superposition(cfg: &SpaceConfig) -> JointState {
    let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let vac = MotionalState::vacuum(cfg).scaled(h);
    JointState::from_branches(&vac, &vac).expect("same dim")
}

/// `⟨a⟩` of the normalized motional branch, or zero for an empty branch.
pub fn branch_amplitude(state: &JointState, internal: Internal) -> Result<C64> {
    let branch = state.branch(internal);
    if branch.norm_sqr() < 1e-24 {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(number_stats(&branch.to_normalized()?)?.mean_a)
}

/// `1 − |⟨a|b⟩|²`, clamped to `[0, 1]`.
pub fn state_infidelity(a: &JointState, b: &JointState) -> Result<f64> {
    Ok((1.0 - a.inner(b)?.norm_sqr()).clamp(0.0, 1.0))
}

fn relative_gap(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale < 1e-9 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Closed-form versus oracle propagator at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub t: f64,
    pub unitarity_defect_paper: f64,
    pub unitarity_defect_exact: f64,
    /// `‖P(U_paper − U_exact)P‖_max`.
    pub interior_operator_distance: f64,
    /// `1 − |⟨U_paper Ψ₁|U_exact Ψ₁⟩|²`.
    pub state_infidelity: f64,
    /// `⟨a⟩` of the `(|e⟩, |g⟩)` branches of `U_paper Ψ₁`.
    pub branch_amplitudes_paper: [C64; 2],
    /// `⟨a⟩` of the `(|e⟩, |g⟩)` branches of `U_exact Ψ₁`.
    pub branch_amplitudes_exact: [C64; 2],
    /// `|a_paper − a_exact| / max(|a_paper|, |a_exact|)` per branch.
    pub amplitude_gap: [f64; 2],
    /// Set when either gap exceeds [`AMPLITUDE_DISAGREEMENT_THRESHOLD`].
    pub amplitude_disagreement: bool,
}

pub fn propagator_report(p: &ModelParams, t: f64, cfg: &SpaceConfig) -> Result<ComparisonReport> {
    let paper = u_paper(p, t, cfg)?;
    let exact = u_exact(p, t, cfg)?;
    let psi1 = balanced_superposition(cfg);
    let evolved_paper = paper.apply(&psi1)?;
    let evolved_exact = exact.apply(&psi1)?;

    let amps = |s: &JointState| -> Result<[C64; 2]> {
        Ok([
            branch_amplitude(s, Internal::Excited)?,
            branch_amplitude(s, Internal::Ground)?,
        ])
    };
    let branch_amplitudes_paper = amps(&evolved_paper)?;
    let branch_amplitudes_exact = amps(&evolved_exact)?;
    let amplitude_gap = [0, 1].map(|i| relative_gap(branch_amplitudes_paper[i], branch_amplitudes_exact[i]));

    Ok(ComparisonReport {
        t,
        unitarity_defect_paper: paper.unitarity_defect(),
        unitarity_defect_exact: exact.unitarity_defect(),
        interior_operator_distance: paper.interior_distance(&exact, cfg)?,
        state_infidelity: state_infidelity(&evolved_paper, &evolved_exact)?,
        branch_amplitudes_paper,
        branch_amplitudes_exact,
        amplitude_gap,
        amplitude_disagreement: amplitude_gap
            .iter()
            .any(|&g| g > AMPLITUDE_DISAGREEMENT_THRESHOLD),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

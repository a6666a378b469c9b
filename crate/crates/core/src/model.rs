//! Physical parameters, the lab-frame Hamiltonian, the frame transformation
//! `T` and the rotated-frame Hamiltonians.
//!
//! With `D = e^{iξ(a+a†)}`, `ξ = η/2` and `ε = Δ/2`:
//!
//! ```text
//! H_lab = (Δ/2)σz + a†a + (Ω/2)[σ₊ e^{iη(a+a†)} + σ₋ e^{-iη(a+a†)}]
//! T     = (1/√2) [[D†, D], [-D†, D]]
//! H_I   = T H_lab T† = (Ω/2)σz + a†a − iξ(a†−a)σx − εσx + ξ²
//! ```
//!
//! The reduced Hamiltonian drops `(Ω/2)σz`, which is what the preparation
//! scheme evolves under. The constant `ξ²` stays inside the matrices so the
//! propagators carry the `e^{-iξ²t}` phase on their own.

use alloc::format;


use crate::error::{Error, Result};
use crate::fock::{
    check_truncation, embed_blocks, identity, ladder_operators, number_operator,
    position_generator, HermitianSpectrum, JointOperator, MotionalOp, SpaceConfig, C64,
};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[cfg(test)]
pub(crate) const SIGMA_X: [[C64; 2]; 2] = [[ZERO, ONE], [ONE, ZERO]];
pub(crate) const SIGMA_Z: [[C64; 2]; 2] = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];

/// Laser-ion parameters in trap units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    eta: f64,
    eta_pair: Option<(f64, f64)>,
    omega: f64,
    delta: f64,
    nu_hz: Option<f64>,
}

impl ModelParams {
    /// `eta > 0`, `omega ≥ 0`, `delta` finite. Regime violations are not
    /// errors; see [`ModelParams::regime_flags`].
    pub fn new(eta: f64, omega: f64, delta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must be finite and > 0, got {eta}"),
            });
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega",
                reason: format!("must be finite and >= 0, got {omega}"),
            });
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("must be finite, got {delta}"),
            });
        }
        Ok(Self {
            eta,
            eta_pair: None,
            omega,
            delta,
            nu_hz: None,
        })
    }

    /// Effective parameter from the two counter-propagating beams,
    /// `η = η₁ + η₂`.
    pub fn from_eta_pair(eta1: f64, eta2: f64, omega: f64, delta: f64) -> Result<Self> {
        let mut p = Self::new(eta1 + eta2, omega, delta)?;
        p.eta_pair = Some((eta1, eta2));
        Ok(p)
    }

    pub fn with_trap_frequency(mut self, nu_hz: f64) -> Result<Self> {
        if !(nu_hz.is_finite() && nu_hz > 0.0) {
            return Err(Error::InvalidParameter {
                name: "nu_hz",
                reason: format!("must be finite and > 0, got {nu_hz}"),
            });
        }
        self.nu_hz = Some(nu_hz);
        Ok(self)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta_pair(&self) -> Option<(f64, f64)> {
        self.eta_pair
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn nu_hz(&self) -> Option<f64> {
        self.nu_hz
    }

    /// `ξ = η/2`.
    pub fn xi(&self) -> f64 {
        self.eta / 2.0
    }

    /// `ε = Δ/2`.
    pub fn epsilon(&self) -> f64 {
        self.delta / 2.0
    }

    pub fn regime_flags(&self, thresholds: &RegimeThresholds) -> RegimeFlags {
        RegimeFlags {
            wer_ok: self.omega <= thresholds.wer_max_omega,
            beyond_ldl: self.xi() >= thresholds.beyond_ldl_min_xi,
            thresholds: *thresholds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Weak excitation holds for `Ω ≤ wer_max_omega`.
    pub wer_max_omega: f64,
    /// Beyond the Lamb-Dicke limit means `ξ ≥ beyond_ldl_min_xi`.
    pub beyond_ldl_min_xi: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            wer_max_omega: 0.1,
            beyond_ldl_min_xi: 1.0,
        }
    }
}

/// Advisory regime checks; the scheme assumes `Ω ≪ 1 ≤ ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeFlags {
    pub wer_ok: bool,
    pub beyond_ldl: bool,
    pub thresholds: RegimeThresholds,
}

/// `D = e^{iξ(a+a†)}`, a displacement by `iξ`.
pub fn displacement(xi: f64, cfg: &SpaceConfig) -> Result<MotionalOp> {
    Ok(HermitianSpectrum::new(&position_generator(cfg))?.unitary(-xi))
}

/// Lab-frame Hamiltonian. Needs room for a displacement by `η`.
pub fn h_lab(p: &ModelParams, cfg: &SpaceConfig) -> Result<JointOperator> {
    check_truncation(cfg, p.eta())?;
    let kick = HermitianSpectrum::new(&position_generator(cfg))?.unitary(-p.eta());
    let n = number_operator(cfg);
    let id = identity(cfg);
    let half_delta = C64::new(p.delta() / 2.0, 0.0);
    let half_omega = C64::new(p.omega() / 2.0, 0.0);
    embed_blocks(
        &(&n + &id * half_delta),
        &(&kick * half_omega),
        &(kick.adjoint() * half_omega),
        &(&n - &id * half_delta),
    )
}

/// `T = (1/√2)[[D†, D], [-D†, D]]`, flagged unitary.
pub fn transform_t(p: &ModelParams, cfg: &SpaceConfig) -> Result<JointOperator> {
    check_truncation(cfg, p.xi())?;
    let d = displacement(p.xi(), cfg)?;
    Ok(t_blocks(&d))
}

pub(crate) fn t_blocks(d: &MotionalOp) -> JointOperator {
    let s = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let dd = d.adjoint() * s;
    let d = d * s;
    embed_blocks(&dd, &d, &(-&dd), &d)
        .expect("square blocks")
        .with_unitary_flag(true)
}

/// `a†a − iξ(a†−a)σx − εσx + ξ²`, shared by both rotated Hamiltonians.
fn rotated_core(p: &ModelParams, cfg: &SpaceConfig) -> Result<JointOperator> {
    let (a, ad) = ladder_operators(cfg);
    let xi = p.xi();
    let id = identity(cfg);
    let diag = number_operator(cfg) + &id * C64::new(xi * xi, 0.0);
    let off = (&ad - &a) * C64::new(0.0, -xi) - &id * C64::new(p.epsilon(), 0.0);
    embed_blocks(&diag, &off, &off, &diag)
}

/// Rotated-frame Hamiltonian built term by term (not as `T H_lab T†`).
pub fn h_rotated_full(p: &ModelParams, cfg: &SpaceConfig) -> Result<JointOperator> {
    let core = rotated_core(p, cfg)?;
    let drive = JointOperator::kron_internal(SIGMA_Z, &identity(cfg))?
        .scaled(C64::new(p.omega() / 2.0, 0.0));
    JointOperator::new(core.matrix() + drive.matrix(), false)
}

/// Rotated-frame Hamiltonian without the `(Ω/2)σz` term; commutes with
/// `σx ⊗ I`.
pub fn h_rotated_reduced(p: &ModelParams, cfg: &SpaceConfig) -> Result<JointOperator> {
    rotated_core(p, cfg)
}

/// `‖P(T·H_lab·T† − H_full)P‖_max` using the margin in `cfg`.
pub fn rotated_frame_defect(p: &ModelParams, cfg: &SpaceConfig) -> Result<f64> {
    let t = transform_t(p, cfg)?;
    let conj = t.compose(&h_lab(p, cfg)?)?.compose(&t.adjoint())?;
    conj.interior_distance(&h_rotated_full(p, cfg)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, max_abs, Internal, Ket, MotionalState};
    use proptest::prelude::*;

    fn params(eta: f64, omega: f64, delta: f64) -> ModelParams {
        ModelParams::new(eta, omega, delta).unwrap()
    }

    #[test]
    fn derived_quantities_and_flags() {
        let p = params(2.0, 0.05, 0.0);
        assert_eq!(p.xi(), 1.0);
        assert_eq!(p.epsilon(), 0.0);
        let f = p.regime_flags(&RegimeThresholds::default());
        assert!(f.wer_ok && f.beyond_ldl);

        let f = params(0.202, 0.1, 0.0).regime_flags(&RegimeThresholds::default());
        assert!(f.wer_ok);
        assert!(!f.beyond_ldl);

        assert!(params(3.0, 0.1, 0.0)
            .regime_flags(&RegimeThresholds::default())
            .beyond_ldl);
        // flags warn, never block
        assert!(!params(2.0, 5.0, 0.0)
            .regime_flags(&RegimeThresholds::default())
            .wer_ok);
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            ModelParams::new(0.0, 0.1, 0.0),
            Err(Error::InvalidParameter { name: "eta", .. })
        ));
        assert!(ModelParams::new(-1.0, 0.1, 0.0).is_err());
        assert!(ModelParams::new(1.0, -0.1, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.1, f64::NAN).is_err());
        assert!(params(1.0, 0.1, 0.0).with_trap_frequency(0.0).is_err());

        let p = ModelParams::from_eta_pair(0.101, 0.101, 0.1, 0.0).unwrap();
        let (a, b) = p.eta_pair().unwrap();
        assert!((a + b - p.eta()).abs() < 1e-12);
    }

    #[test]
    fn lab_hamiltonian_vacuum_coupling() {
        let cfg = SpaceConfig::with_default_margin(64).unwrap();
        let h = h_lab(&params(2.0, 0.1, 0.0), &cfg).unwrap();
        // ⟨0|e^{iη(a+a†)}|0⟩ = ⟨0|iη⟩ from the coherent-state series
        let kicked = coherent_state(C64::new(0.0, 2.0), &cfg).unwrap();
        let vac_overlap = MotionalState::vacuum(&cfg).inner(&kicked).unwrap();
        let elem = h.matrix()[(0, cfg.dim())];
        assert!((elem - vac_overlap * 0.05).norm() < 1e-12);
        assert!((elem.re - 0.05 * (-2.0f64).exp()).abs() < 1e-12);
        assert!((elem.re - 6.767e-3).abs() < 1e-6);
    }

    #[test]
    fn lab_hamiltonian_small_eta_limit_and_hermiticity() {
        let cfg = SpaceConfig::with_default_margin(32).unwrap();
        let h = h_lab(&params(1e-9, 0.2, 0.0), &cfg).unwrap();
        let drive = h.block(Internal::Excited, Internal::Ground);
        assert!(max_abs(&(drive - identity(&cfg) * C64::new(0.1, 0.0))) < 1e-8);

        let cfg = SpaceConfig::with_default_margin(64).unwrap();
        let h = h_lab(&params(2.0, 0.05, 0.3), &cfg).unwrap();
        assert!(h.hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn transform_reduces_to_pulse_without_displacement() {
        let cfg = SpaceConfig::with_default_margin(16).unwrap();
        let t = t_blocks(&identity(&cfg));
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let id = identity(&cfg);
        let v = JointOperator::kron_internal(
            [[C64::new(s, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(s, 0.0)]],
            &id,
        )
        .unwrap();
        assert!(t.max_abs_diff(&v).unwrap() < 1e-15);

        let cfg = SpaceConfig::with_default_margin(128).unwrap();
        let t = transform_t(&params(3.0, 0.0, 0.0), &cfg).unwrap();
        assert!(t.is_flagged_unitary());
        assert!(t.unitarity_defect() <= 1e-10);
    }

    #[test]
    fn transform_of_balanced_superposition() {
        let cfg = SpaceConfig::with_default_margin(48).unwrap();
        let p = params(2.0, 0.0, 0.0);
        let d = displacement(p.xi(), &cfg).unwrap();
        let vac = MotionalState::vacuum(&cfg);
        let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = crate::fock::JointState::from_branches(&vac.scaled(h), &vac.scaled(h)).unwrap();
        let out = transform_t(&p, &cfg).unwrap().apply(&psi).unwrap();
        let expect = vac
            .apply(&(&d - d.adjoint()))
            .unwrap()
            .scaled(C64::new(0.5, 0.0));
        let got = out.branch(Internal::Ground);
        assert!(crate::fock::max_abs_vec(&(got.amplitudes() - expect.amplitudes())) < 1e-14);
    }

    #[test]
    fn rotated_hamiltonian_structure() {
        let cfg = SpaceConfig::with_default_margin(24).unwrap();
        let h = h_rotated_full(&params(1e-15, 0.3, 0.0), &cfg).unwrap();
        let expect = JointOperator::kron_internal(SIGMA_Z, &identity(&cfg))
            .unwrap()
            .scaled(C64::new(0.15, 0.0));
        let n = JointOperator::kron_internal([[ONE, ZERO], [ZERO, ONE]], &number_operator(&cfg))
            .unwrap();
        let sum = JointOperator::new(expect.matrix() + n.matrix(), false).unwrap();
        assert!(h.max_abs_diff(&sum).unwrap() < 1e-12);

        let p = params(2.0, 0.08, 0.4);
        let h = h_rotated_full(&p, &cfg).unwrap();
        assert!((h.matrix()[(0, 0)].re - (0.04 + 1.0)).abs() < 1e-15);
        assert!(h.hermiticity_defect() == 0.0);

        let r = h_rotated_reduced(&p, &cfg).unwrap();
        assert!((h.max_abs_diff(&r).unwrap() - 0.04).abs() < 1e-15);
        let p0 = params(2.0, 0.0, 0.4);
        assert_eq!(h_rotated_full(&p0, &cfg).unwrap(), h_rotated_reduced(&p0, &cfg).unwrap());
    }

    #[test]
    fn rotated_frame_identity_on_interior() {
        // Far from the edge the transformation is exact.
        let cfg = SpaceConfig::with_default_margin(128).unwrap();
        let defect = rotated_frame_defect(&params(0.5, 0.1, 0.3), &cfg).unwrap();
        assert!(defect <= 1e-8, "{defect}");

        let p = params(2.0, 0.05, 0.2);
        let cfg = SpaceConfig::with_edge_aware_margin(128, p.xi()).unwrap();
        let defect = rotated_frame_defect(&p, &cfg).unwrap();
        assert!(defect <= 1e-8, "{defect}");
    }

    #[test]
    fn narrow_margin_exposes_edge_leakage() {
        // The displaced number operator needs ~2ξ√dim levels of headroom.
        let p = params(2.0, 0.05, 0.2);
        let cfg = SpaceConfig::new(128, 16).unwrap();
        assert!(rotated_frame_defect(&p, &cfg).unwrap() > 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn reduced_hamiltonian_commutes_with_sigma_x(
            eta in 0.01f64..6.0, omega in 0.0f64..1.0, delta in -2.0f64..2.0, dim in 2usize..40,
        ) {
            let cfg = SpaceConfig::with_default_margin(dim).unwrap();
            let h = h_rotated_reduced(&params(eta, omega, delta), &cfg).unwrap();
            let sx = JointOperator::kron_internal(SIGMA_X, &identity(&cfg)).unwrap();
            let comm = h.matrix() * sx.matrix() - sx.matrix() * h.matrix();
            prop_assert!(max_abs(&comm) <= 1e-12);
        }

        #[test]
        fn transform_is_unitary(xi in 0.0f64..3.0, dim in 8usize..96) {
            let cfg = SpaceConfig::with_default_margin(dim).unwrap();
            let d = displacement(xi, &cfg).unwrap();
            prop_assert!(t_blocks(&d).unitarity_defect() <= 1e-10);
        }
    }
}

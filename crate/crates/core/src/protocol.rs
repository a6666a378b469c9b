//! The three-pulse preparation `V̂ · U(t) · V̂` (or `V̂′` last), the analytic
//! intermediate and cat states, and the shelving readout.
//!
//! With `Ψ₃ = (1/√2) e^{-iξ²t} (Φ₊|e⟩ + Φ₋|g⟩)` for [`Variant::V`] and
//! `Ψ₃ = (1/√2) e^{-iξ²t} (−Φ₋|e⟩ + Φ₊|g⟩)` for [`Variant::VPrime`], the cat
//! components `Φ±` are recovered from the branches and kept unnormalized.
//! Only the `|g⟩` branch fluoresces under shelving readout.

// inherent float methods are only visible when std is linked somewhere
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;

use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::fock::{
    check_truncation, coherent_state, identity, Internal, JointOperator, JointState, Ket,
    MotionalState, SpaceConfig, C64,
};
use crate::model::ModelParams;
use crate::propagators::{balanced_superposition, evolve_exact, evolve_paper};

/// Branch weights below this are treated as an outcome that cannot occur.
pub const DEGENERATE_WEIGHT: f64 = 1e-12;

/// Which pulse closes the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    V,
    VPrime,
}

/// Which propagator drives the free evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Paper,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatSign {
    Plus,
    Minus,
}

impl CatSign {
    fn factor(self) -> f64 {
        match self {
            CatSign::Plus => 1.0,
            CatSign::Minus => -1.0,
        }
    }
}

fn pulse(m: [[f64; 2]; 2], cfg: &SpaceConfig) -> JointOperator {
    let s = |v: f64| C64::new(v * FRAC_1_SQRT_2, 0.0);
    let sigma = [[s(m[0][0]), s(m[0][1])], [s(m[1][0]), s(m[1][1])]];
    JointOperator::kron_internal(sigma, &identity(cfg))
        .expect("square identity")
        .with_unitary_flag(true)
}

/// `(1/√2)[[1, 1], [−1, 1]] ⊗ I`.
pub fn pulse_v(cfg: &SpaceConfig) -> JointOperator {
    pulse([[1.0, 1.0], [-1.0, 1.0]], cfg)
}

/// `(1/√2)[[1, −1], [1, 1]] ⊗ I`.
pub fn pulse_v_prime(cfg: &SpaceConfig) -> JointOperator {
    pulse([[1.0, -1.0], [1.0, 1.0]], cfg)
}

/// `V̂|g⟩|0⟩ = (|e⟩ + |g⟩)|0⟩/√2`.
pub fn psi1(cfg: &SpaceConfig) -> JointState {
    balanced_superposition(cfg)
}

/// `(1/√2) e^{-iξ²t} [e^{-iεt}|e⟩|A⟩ + e^{iεt}|g⟩|−A⟩]` with
/// `A = i(ξ/2)t² e^{-it}`.
pub fn psi2_analytic(p: &ModelParams, t: f64, cfg: &SpaceConfig) -> Result<JointState> {
    let xi = p.xi();
    let amp = C64::new(0.0, 0.5 * xi * t * t) * C64::from_polar(1.0, -t);
    check_truncation(cfg, amp.norm())?;
    let phase = C64::from_polar(FRAC_1_SQRT_2, -xi * xi * t);
    let et = p.epsilon() * t;
    let e = coherent_state(amp, cfg)?.scaled(phase * C64::from_polar(1.0, -et));
    let g = coherent_state(-amp, cfg)?.scaled(phase * C64::from_polar(1.0, et));
    JointState::from_branches(&e, &g)
}

/// Every stage of one run of the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub psi1: JointState,
    pub psi2: JointState,
    pub psi3: JointState,
    pub variant: Variant,
    pub engine: Engine,
    pub t: f64,
    /// Unnormalized `Φ₊`.
    pub cat_plus: MotionalState,
    /// Unnormalized `Φ₋`.
    pub cat_minus: MotionalState,
    /// `(‖Φ₊‖²/2, ‖Φ₋‖²/2)`.
    pub weights: [f64; 2],
}

impl ProtocolOutcome {
    /// Internal level that carries the given cat after the last pulse.
    pub fn branch_of(&self, sign: CatSign) -> Internal {
        match (self.variant, sign) {
            (Variant::V, CatSign::Plus) | (Variant::VPrime, CatSign::Minus) => Internal::Excited,
            _ => Internal::Ground,
        }
    }

    pub fn sign_on(&self, internal: Internal) -> CatSign {
        if self.branch_of(CatSign::Plus) == internal {
            CatSign::Plus
        } else {
            CatSign::Minus
        }
    }

    pub fn weight(&self, sign: CatSign) -> f64 {
        match sign {
            CatSign::Plus => self.weights[0],
            CatSign::Minus => self.weights[1],
        }
    }

    pub fn cat(&self, sign: CatSign) -> &MotionalState {
        match sign {
            CatSign::Plus => &self.cat_plus,
            CatSign::Minus => &self.cat_minus,
        }
    }

    /// `‖Ψ₃|g⟩‖²`, the probability of seeing fluorescence.
    pub fn fluorescence_probability(&self) -> f64 {
        self.weight(self.sign_on(Internal::Ground))
    }
}

/// Runs `V̂|g,0⟩ → U(t) → V̂ or V̂′` with the chosen propagator.
pub fn run_protocol(
    p: &ModelParams,
    t: f64,
    variant: Variant,
    engine: Engine,
    cfg: &SpaceConfig,
) -> Result<ProtocolOutcome> {
    let psi1 = psi1(cfg);
    let psi2 = match engine {
        Engine::Paper => evolve_paper(p, t, cfg, &psi1)?,
        Engine::Exact => evolve_exact(p, t, cfg, &psi1)?,
    };
    let last = match variant {
        Variant::V => pulse_v(cfg),
        Variant::VPrime => pulse_v_prime(cfg),
    };
    let psi3 = last.apply(&psi2)?;

    let unphase = C64::from_polar(SQRT_2, p.xi() * p.xi() * t);
    let e = psi3.branch(Internal::Excited).scaled(unphase);
    let g = psi3.branch(Internal::Ground).scaled(unphase);
    let (cat_plus, cat_minus) = match variant {
        Variant::V => (e, g),
        Variant::VPrime => (g, e.scaled(C64::new(-1.0, 0.0))),
    };
    let weights = [cat_plus.norm_sqr() / 2.0, cat_minus.norm_sqr() / 2.0];
    Ok(ProtocolOutcome {
        psi1,
        psi2,
        psi3,
        variant,
        engine,
        t,
        cat_plus,
        cat_minus,
        weights,
    })
}

/// Amplitude `(−1)ᵏ(ξ/8)(2k+1)²π²` of the cat observed at `t = (2k+1)π/2`.
pub fn cat_amplitude(xi: f64, k: u32) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let m = (2 * k + 1) as f64;
    sign * xi / 8.0 * m * m * core::f64::consts::PI * core::f64::consts::PI
}

/// Normalized cat together with the squared norm of the unnormalized form.
#[derive(Debug, Clone, PartialEq)]
pub struct CatState {
    pub state: MotionalState,
    /// `1 ± cos(2εt)·e^{−2α²}`.
    pub norm_sqr_unnormalized: f64,
    /// `(−1)ᵏα_k`, see [`cat_amplitude`].
    pub alpha: f64,
    pub t: f64,
}

/// `(1/√2)[e^{iεt}|−(−1)ᵏα_k⟩ ± e^{−iεt}|(−1)ᵏα_k⟩]` at `t = (2k+1)π/2`,
/// normalized.
pub fn cat_analytic(p: &ModelParams, k: u32, sign: CatSign, cfg: &SpaceConfig) -> Result<CatState> {
    let alpha = cat_amplitude(p.xi(), k);
    check_truncation(cfg, alpha.abs())?;
    let t = (2 * k + 1) as f64 * FRAC_PI_2;
    let et = p.epsilon() * t;
    let left = coherent_state(C64::new(-alpha, 0.0), cfg)?;
    let right = coherent_state(C64::new(alpha, 0.0), cfg)?;
    let raw = left
        .scaled(C64::from_polar(FRAC_1_SQRT_2, et))
        .add_scaled(C64::from_polar(sign.factor() * FRAC_1_SQRT_2, -et), &right)?;
    let norm_sqr_unnormalized =
        1.0 + sign.factor() * (2.0 * et).cos() * (-2.0 * alpha * alpha).exp();
    Ok(CatState {
        state: raw.to_normalized()?,
        norm_sqr_unnormalized,
        alpha,
        t,
    })
}

/// Where the shelving outcome comes from.
pub enum OutcomeSource<'a> {
    Sampled(&'a mut dyn RngCore),
    /// `true` forces fluorescence.
    Forced(bool),
}

/// Result of one shelving readout.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub fluorescence: bool,
    /// Probability of the observed outcome.
    pub probability: f64,
    /// Normalized, gauge-fixed cat left in the motion.
    pub conditional_state: MotionalState,
    pub cat_sign: CatSign,
}

/// Projects `Ψ₃` onto the fluorescing (`|g⟩`) or dark (`|e⟩`) level.
pub fn shelving_measure(
    source: OutcomeSource<'_>,
    proto: &ProtocolOutcome,
) -> Result<MeasurementRecord> {
    let p_fluor = proto.fluorescence_probability();
    let fluorescence = match source {
        OutcomeSource::Sampled(rng) => rng.random::<f64>() < p_fluor,
        OutcomeSource::Forced(f) => f,
    };
    let internal = if fluorescence {
        Internal::Ground
    } else {
        Internal::Excited
    };
    let cat_sign = proto.sign_on(internal);
    let probability = proto.weight(cat_sign);
    if probability < DEGENERATE_WEIGHT {
        return Err(Error::DegenerateOutcome);
    }
    let conditional_state = proto.cat(cat_sign).to_normalized()?.gauge_fixed();
    Ok(MeasurementRecord {
        fluorescence,
        probability,
        conditional_state,
        cat_sign,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity, max_abs, max_abs_vec};
    use crate::model::transform_t;
    use crate::propagators::u_paper;
    use core::f64::consts::PI;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(eta: f64, delta: f64) -> ModelParams {
        ModelParams::new(eta, 0.0, delta).unwrap()
    }

    fn cfg(dim: usize) -> SpaceConfig {
        SpaceConfig::with_default_margin(dim).unwrap()
    }

    fn ground_vacuum(cfg: &SpaceConfig) -> JointState {
        JointState::product(Internal::Ground, &MotionalState::vacuum(cfg))
    }

    #[test]
    fn pulses() {
        let c = cfg(24);
        let v = pulse_v(&c);
        let vp = pulse_v_prime(&c);
        assert!(v.unitarity_defect() < 1e-15 && vp.unitarity_defect() < 1e-15);
        assert!(max_abs(&(vp.matrix() - v.matrix().transpose())) == 0.0);
        let t0 = transform_t(&ModelParams::new(1e-300, 0.0, 0.0).unwrap(), &c).unwrap();
        assert!(v.max_abs_diff(&t0).unwrap() < 1e-15);

        let first = v.apply(&ground_vacuum(&c)).unwrap();
        assert!(max_abs_vec(&(first.amplitudes() - psi1(&c).amplitudes())) < 1e-15);
        let back = vp.apply(&psi1(&c)).unwrap();
        assert!(back.branch(Internal::Excited).norm_sqr() < 1e-30);
        assert!((back.branch(Internal::Ground).norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn psi2_at_time_zero_is_psi1() {
        let c = cfg(24);
        let s = psi2_analytic(&params(2.0, 0.7), 0.0, &c).unwrap();
        assert!(max_abs_vec(&(s.amplitudes() - psi1(&c).amplitudes())) < 1e-15);
    }

    #[test]
    fn psi2_matches_closed_form_propagator() {
        let c = cfg(64);
        let p = params(2.0, 0.0);
        let analytic = psi2_analytic(&p, FRAC_PI_2, &c).unwrap();
        let evolved = u_paper(&p, FRAC_PI_2, &c).unwrap().apply(&psi1(&c)).unwrap();
        for b in [Internal::Excited, Internal::Ground] {
            let f = fidelity(
                &analytic.branch(b).to_normalized().unwrap(),
                &evolved.branch(b).to_normalized().unwrap(),
            )
            .unwrap();
            assert!(f >= 1.0 - 1e-6);
        }
        // the relative phase between branches survives too
        assert!((analytic.inner(&evolved).unwrap().norm() - 1.0).abs() < 1e-9);
        let g = analytic.branch(Internal::Ground).to_normalized().unwrap();
        let target = coherent_state(C64::new(-PI * PI / 8.0, 0.0), &c).unwrap();
        assert!(fidelity(&g, &target).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn protocol_at_time_zero() {
        let c = cfg(32);
        for engine in [Engine::Paper, Engine::Exact] {
            let out = run_protocol(&params(2.0, 0.3), 0.0, Variant::V, engine, &c).unwrap();
            let target = JointState::product(Internal::Excited, &MotionalState::vacuum(&c));
            assert!(max_abs_vec(&(out.psi3.amplitudes() - target.amplitudes())) < 1e-12);
            assert!(out.cat_minus.norm_sqr() < 1e-24);
            assert!(out.fluorescence_probability() < 1e-24);
            let r = shelving_measure(OutcomeSource::Forced(true), &out);
            assert!(matches!(r, Err(Error::DegenerateOutcome)));
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let r = shelving_measure(OutcomeSource::Sampled(&mut rng), &out).unwrap();
            assert!(!r.fluorescence);
        }
    }

    #[test]
    fn cat_weights_at_first_observable_time() {
        let c = cfg(64);
        let p = params(2.0, 0.0);
        let out = run_protocol(&p, FRAC_PI_2, Variant::V, Engine::Paper, &c).unwrap();
        let overlap = (-2.0 * (PI * PI / 8.0).powi(2)).exp();
        assert!((overlap - 0.04767).abs() < 1e-4);
        assert!((out.weights[0] - (1.0 + overlap) / 2.0).abs() < 1e-9);
        assert!((out.weights[1] - (1.0 - overlap) / 2.0).abs() < 1e-9);
        assert!((out.weights[0] - 0.5240).abs() < 1e-3);
        for sign in [CatSign::Plus, CatSign::Minus] {
            let cat = cat_analytic(&p, 0, sign, &c).unwrap();
            let f = fidelity(&out.cat(sign).to_normalized().unwrap(), &cat.state).unwrap();
            assert!(f >= 1.0 - 1e-6, "{sign:?} {f}");
        }
    }

    #[test]
    fn primed_variant_swaps_carriers() {
        let c = cfg(64);
        let p = params(2.0, 0.4);
        let v = run_protocol(&p, 1.3, Variant::V, Engine::Paper, &c).unwrap();
        let vp = run_protocol(&p, 1.3, Variant::VPrime, Engine::Paper, &c).unwrap();
        assert!(max_abs_vec(&(v.cat_plus.amplitudes() - vp.cat_plus.amplitudes())) < 1e-12);
        assert!(max_abs_vec(&(v.cat_minus.amplitudes() - vp.cat_minus.amplitudes())) < 1e-12);
        let dark = shelving_measure(OutcomeSource::Forced(false), &vp).unwrap();
        assert_eq!(dark.cat_sign, CatSign::Minus);
        let expected = vp.cat_minus.to_normalized().unwrap();
        assert!(fidelity(&dark.conditional_state, &expected).unwrap() > 1.0 - 1e-12);
        let dark_v = shelving_measure(OutcomeSource::Forced(false), &v).unwrap();
        assert_eq!(dark_v.cat_sign, CatSign::Plus);
        assert!((dark_v.probability - v.weights[0]).abs() < 1e-15);
    }

    #[test]
    fn later_cats_match_analytic_form() {
        let p = params(1.0, 0.3);
        let c = cfg(128);
        for k in [0u32, 1] {
            let t = (2 * k + 1) as f64 * FRAC_PI_2;
            let out = run_protocol(&p, t, Variant::V, Engine::Paper, &c).unwrap();
            for sign in [CatSign::Plus, CatSign::Minus] {
                let cat = cat_analytic(&p, k, sign, &c).unwrap();
                let f = fidelity(&out.cat(sign).to_normalized().unwrap(), &cat.state).unwrap();
                assert!(f >= 1.0 - 1e-6, "k {k} {sign:?}");
                let n = out.cat(sign).norm_sqr();
                assert!((n - cat.norm_sqr_unnormalized).abs() < 1e-8, "k {k} {sign:?}");
            }
        }
    }

    #[test]
    fn cat_norms_and_parity() {
        let c = cfg(64);
        let even = cat_analytic(&params(2.0, 0.0), 0, CatSign::Plus, &c).unwrap();
        assert!((even.norm_sqr_unnormalized - 1.0477).abs() < 1e-4);
        for k in [0u32, 1] {
            let odd = cat_analytic(&params(0.5, 0.0), k, CatSign::Minus, &c).unwrap();
            let amps = odd.state.amplitudes();
            for n in (0..amps.len()).step_by(2) {
                assert!(amps[n].norm() < 1e-10);
            }
        }
    }

    #[test]
    fn measurement_is_seed_deterministic() {
        let c = cfg(64);
        let out = run_protocol(&params(2.0, 0.0), FRAC_PI_2, Variant::V, Engine::Paper, &c).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200)
                .map(|_| {
                    shelving_measure(OutcomeSource::Sampled(&mut rng), &out)
                        .unwrap()
                        .fluorescence
                })
                .collect::<alloc::vec::Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn protocol_preserves_completeness(
            eta in 0.1f64..2.5,
            delta in -1.0f64..1.0,
            t in 0.0f64..2.0,
            prime in any::<bool>(),
            exact in any::<bool>(),
        ) {
            let p = params(eta, delta);
            let c = cfg(64);
            let variant = if prime { Variant::VPrime } else { Variant::V };
            let engine = if exact { Engine::Exact } else { Engine::Paper };
            let out = run_protocol(&p, t, variant, engine, &c).unwrap();
            prop_assert!((out.psi3.norm_sqr() - 1.0).abs() < 1e-10);
            prop_assert!((out.weights[0] + out.weights[1] - 1.0).abs() < 1e-8);
            prop_assert!((out.cat_plus.norm_sqr() + out.cat_minus.norm_sqr() - 2.0).abs() < 1e-8);
        }

        #[test]
        fn psi2_is_normalized(eta in 0.1f64..3.0, delta in -1.0f64..1.0, t in 0.0f64..2.5) {
            let s = psi2_analytic(&params(eta, delta), t, &cfg(96)).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}

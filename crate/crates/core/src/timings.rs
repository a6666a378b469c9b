//! Preparation-time estimates for an observable cat, in units of `1/ν`.
//!
//! The time quoted for the scheme beyond the Lamb-Dicke limit is the same
//! number as the separation threshold of
//! [`separation_threshold`](crate::analysis::separation_threshold):
//! `√(4π/η) = √(2π/ξ)`.

// inherent float methods are only visible when std is linked somewhere
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Strong excitation beyond the Lamb-Dicke limit (this work).
    ThisPaper,
    /// Strong-excitation regime inside the Lamb-Dicke limit.
    Ref2Ser,
    /// Weak excitation inside the Lamb-Dicke limit.
    Ref16WerLdl,
    /// Schemes bounded by the spontaneous-emission lifetime.
    Ref14Spontaneous,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::ThisPaper => "this_paper",
            Scheme::Ref2Ser => "ref2_SER",
            Scheme::Ref16WerLdl => "ref16_WER_LDL",
            Scheme::Ref14Spontaneous => "ref14_spontaneous",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Scheme::ThisPaper => "sqrt(4*pi/eta)",
            Scheme::Ref2Ser => "(pi/4)*(sqrt(pi/(2*eta^2)) - 1)",
            Scheme::Ref16WerLdl => "pi*exp(eta^2/2)/(eta*omega)",
            Scheme::Ref14Spontaneous => "nu_hz*lifetime_s",
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and positive, got {v}"),
        })
    }
}

/// `√(4π/η)`.
pub fn prep_time_this_paper(eta: f64) -> Result<f64> {
    positive("eta", eta)?;
    Ok((4.0 * PI / eta).sqrt())
}

/// `(π/4)(√(π/(2η²)) − 1)`; negative values are a domain error.
pub fn prep_time_ref2(eta: f64) -> Result<f64> {
    positive("eta", eta)?;
    let v = PI / 4.0 * ((PI / (2.0 * eta * eta)).sqrt() - 1.0);
    if v < 0.0 {
        return Err(Error::Domain(format!(
            "eta = {eta} exceeds sqrt(pi/2); the estimate is negative"
        )));
    }
    Ok(v)
}

/// `π e^{η²/2} / (ηΩ)`.
pub fn prep_time_ref16(eta: f64, omega: f64) -> Result<f64> {
    positive("eta", eta)?;
    positive("omega", omega)?;
    Ok(PI * (eta * eta / 2.0).exp() / (eta * omega))
}

/// `ν·τ`, the metastable lifetime in trap units.
pub fn prep_time_ref14_floor(nu_hz: f64, lifetime_s: f64) -> Result<f64> {
    positive("nu_hz", nu_hz)?;
    positive("lifetime_s", lifetime_s)?;
    Ok(nu_hz * lifetime_s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub scheme: Scheme,
    pub formula: &'static str,
    pub inputs: BTreeMap<&'static str, f64>,
    pub value: f64,
}

impl TimingRow {
    fn new(scheme: Scheme, inputs: &[(&'static str, f64)]) -> Result<Self> {
        let inputs: BTreeMap<_, _> = inputs.iter().copied().collect();
        let value = evaluate(scheme, &inputs)?;
        Ok(Self {
            scheme,
            formula: scheme.formula(),
            inputs,
            value,
        })
    }

    /// Re-evaluates the scheme formula from the stored inputs.
    pub fn recompute(&self) -> Result<f64> {
        evaluate(self.scheme, &self.inputs)
    }

    pub fn rounded(&self) -> String {
        format_sig3(self.value)
    }
}

fn input(inputs: &BTreeMap<&'static str, f64>, name: &'static str) -> Result<f64> {
    inputs
        .get(name)
        .copied()
        .ok_or_else(|| Error::Config(format!("missing timing input {name}")))
}

fn evaluate(scheme: Scheme, inputs: &BTreeMap<&'static str, f64>) -> Result<f64> {
    match scheme {
        Scheme::ThisPaper => prep_time_this_paper(input(inputs, "eta")?),
        Scheme::Ref2Ser => prep_time_ref2(input(inputs, "eta")?),
        Scheme::Ref16WerLdl => prep_time_ref16(input(inputs, "eta")?, input(inputs, "omega")?),
        Scheme::Ref14Spontaneous => {
            prep_time_ref14_floor(input(inputs, "nu_hz")?, input(inputs, "lifetime_s")?)
        }
    }
}

/// Inputs of the comparison; [`Default`] gives the quoted experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingInputs {
    pub eta_ldl: f64,
    pub omega: f64,
    pub eta_beyond: Vec<f64>,
    pub nu_hz: f64,
    pub lifetime_s: f64,
}

impl Default for TimingInputs {
    fn default() -> Self {
        Self {
            eta_ldl: 0.202,
            omega: 0.1,
            eta_beyond: alloc::vec![2.0],
            nu_hz: 1e7,
            lifetime_s: 1.0,
        }
    }
}

/// One row per scheme, with one `this_paper` row per entry of `eta_beyond`.
pub fn comparison_table(inputs: &TimingInputs) -> Result<Vec<TimingRow>> {
    if inputs.eta_beyond.is_empty() {
        return Err(Error::Config("eta_beyond list is empty".into()));
    }
    let mut rows = Vec::with_capacity(3 + inputs.eta_beyond.len());
    rows.push(TimingRow::new(Scheme::Ref2Ser, &[("eta", inputs.eta_ldl)])?);
    rows.push(TimingRow::new(
        Scheme::Ref16WerLdl,
        &[("eta", inputs.eta_ldl), ("omega", inputs.omega)],
    )?);
    for &eta in &inputs.eta_beyond {
        rows.push(TimingRow::new(Scheme::ThisPaper, &[("eta", eta)])?);
    }
    rows.push(TimingRow::new(
        Scheme::Ref14Spontaneous,
        &[("nu_hz", inputs.nu_hz), ("lifetime_s", inputs.lifetime_s)],
    )?);
    Ok(rows)
}

/// Three significant figures; scientific notation at or above `1e4` and below
/// `1e-2`.
pub fn format_sig3(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-2..4).contains(&mag) {
        return format!("{v:.2e}");
    }
    let decimals = (2 - mag).max(0) as usize;
    // rounding can carry into a new digit (e.g. 9.996 → 10.0)
    let s = format!("{v:.decimals$}");
    let digits = s.trim_start_matches('-').chars().filter(|c| c.is_ascii_digit());
    let significant = digits.skip_while(|&c| c == '0').count();
    if significant > 3 && decimals > 0 {
        let decimals = decimals - 1;
        return format!("{v:.decimals$}");
    }
    s
}

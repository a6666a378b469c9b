//! Run configuration shared by `prepare`, `verify` and `sweep`.
//!
//! A config file (JSON) and command-line flags use the same field names;
//! flags win.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use catlab_core::analysis::first_observable_time;
use catlab_core::fock::{default_margin, edge_aware_margin, required_dim, SpaceConfig};
use catlab_core::propagators::evolution_amplitude_bound;
use catlab_core::{Engine, ModelParams, Variant};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

/// Smallest truncation picked automatically.
pub const MIN_AUTO_DIM: usize = 64;
/// Interior levels an automatic dimension keeps beyond the margin.
pub const MIN_INTERIOR_LEVELS: usize = 32;

/// Interaction time: a number, or `auto` for the first observable instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TimeSpec {
    #[default]
    Auto,
    At(f64),
}

impl FromStr for TimeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(TimeSpec::Auto);
        }
        let t: f64 = s
            .parse()
            .map_err(|_| format!("t must be a number or \"auto\", got {s:?}"))?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(format!("t must be finite and >= 0, got {t}"));
        }
        Ok(TimeSpec::At(t))
    }
}

impl fmt::Display for TimeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeSpec::Auto => f.write_str("auto"),
            TimeSpec::At(t) => write!(f, "{t}"),
        }
    }
}

impl Serialize for TimeSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TimeSpec::Auto => s.serialize_str("auto"),
            TimeSpec::At(t) => s.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for TimeSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(t) => TimeSpec::from_str(&t.to_string()),
            Raw::Text(s) => TimeSpec::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    #[default]
    #[serde(alias = "V")]
    V,
    #[serde(alias = "Vprime", alias = "v_prime")]
    #[value(alias = "v-prime", alias = "v_prime")]
    Vprime,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::V => Variant::V,
            VariantArg::Vprime => Variant::VPrime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    #[default]
    Paper,
    Exact,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Paper => Engine::Paper,
            EngineArg::Exact => Engine::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub eta: f64,
    /// When set, `eta` is taken as the sum of the pair.
    pub eta_pair: Option<(f64, f64)>,
    pub omega: f64,
    pub delta: f64,
    pub nu_hz: Option<f64>,
    /// `0` picks a dimension from the truncation rule.
    pub dim: usize,
    /// `0` picks the margin automatically.
    pub interior_margin: usize,
    pub t: TimeSpec,
    pub variant: VariantArg,
    pub engine: EngineArg,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eta: 2.0,
            eta_pair: None,
            omega: 0.1,
            delta: 0.0,
            nu_hz: None,
            dim: 0,
            interior_margin: 0,
            t: TimeSpec::Auto,
            variant: VariantArg::V,
            engine: EngineArg::Paper,
            seed: 0,
            out_dir: PathBuf::from("catlab-out"),
        }
    }
}

/// Interaction time after resolving `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedTime {
    pub t: f64,
    pub auto: bool,
    /// `k` when `t` is within `1e-3` of `(2k+1)π/2`.
    pub k: Option<u32>,
}

fn nearest_observable_k(t: f64) -> Option<u32> {
    let k = ((t / std::f64::consts::FRAC_PI_2 - 1.0) / 2.0).round();
    if k < 0.0 {
        return None;
    }
    let tk = (2.0 * k + 1.0) * std::f64::consts::FRAC_PI_2;
    ((t - tk).abs() < 1e-3).then_some(k as u32)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigFile {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        let p = match self.eta_pair {
            Some((a, b)) => ModelParams::from_eta_pair(a, b, self.omega, self.delta)?,
            None => ModelParams::new(self.eta, self.omega, self.delta)?,
        };
        Ok(match self.nu_hz {
            Some(nu) => p.with_trap_frequency(nu)?,
            None => p,
        })
    }

    pub fn resolve_t(&self, p: &ModelParams) -> Result<ResolvedTime, CliError> {
        Ok(match self.t {
            TimeSpec::Auto => {
                let (k, t) = first_observable_time(p.xi())?;
                ResolvedTime {
                    t,
                    auto: true,
                    k: Some(k),
                }
            }
            TimeSpec::At(t) => ResolvedTime {
                t,
                auto: false,
                k: nearest_observable_k(t),
            },
        })
    }

    /// Truncation for evolving to time `t`.
    ///
    /// With `dim = 0` the dimension is the larger of [`MIN_AUTO_DIM`] and the
    /// truncation rule applied to `amplitude`, grown until the margin leaves
    /// [`MIN_INTERIOR_LEVELS`] interior levels. With `interior_margin = 0`
    /// the margin is the edge-aware one when `edge_aware` is set, else the
    /// default.
    pub fn space(&self, amplitude: f64, xi: f64, edge_aware: bool) -> Result<SpaceConfig, CliError> {
        let margin_for = |dim: usize| match (self.interior_margin, edge_aware) {
            (0, true) => edge_aware_margin(dim, xi),
            (0, false) => default_margin(dim),
            (m, _) => m,
        };
        let dim = if self.dim == 0 {
            let mut dim = required_dim(amplitude).max(MIN_AUTO_DIM);
            while dim < margin_for(dim) + MIN_INTERIOR_LEVELS {
                dim += 8;
            }
            dim
        } else {
            self.dim
        };
        Ok(SpaceConfig::new(dim, margin_for(dim))?)
    }

    /// Amplitude the propagators may reach by time `t`.
    pub fn amplitude(p: &ModelParams, t: f64) -> f64 {
        evolution_amplitude_bound(p, t)
    }
}

/// Command-line overrides for [`RunConfig`].
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// JSON config file with the same field names as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Effective Lamb-Dicke parameter η.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Two-beam Lamb-Dicke parameters "η1,η2" (η = η1+η2).
    #[arg(long, value_parser = parse_pair)]
    pub eta_pair: Option<(f64, f64)>,
    /// Rabi frequency Ω in trap units.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Detuning Δ in trap units.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Trap frequency in Hz.
    #[arg(long)]
    pub nu_hz: Option<f64>,
    /// Fock truncation (0 = automatic).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Levels below the truncation edge excluded from interior checks
    /// (0 = automatic).
    #[arg(long = "margin", alias = "interior-margin")]
    pub interior_margin: Option<usize>,
    /// Interaction time in units of 1/ν, or "auto".
    #[arg(long)]
    pub t: Option<TimeSpec>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"a,b\", got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

impl RunArgs {
    /// Config file (or defaults) with the flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(eta, omega, delta, dim, interior_margin, t, variant, engine, seed, out_dir);
        if let Some(pair) = self.eta_pair {
            cfg.eta_pair = Some(pair);
        } else if self.eta.is_some() {
            cfg.eta_pair = None;
        }
        if self.nu_hz.is_some() {
            cfg.nu_hz = self.nu_hz;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_spec_round_trip() {
        assert_eq!("auto".parse::<TimeSpec>().unwrap(), TimeSpec::Auto);
        assert_eq!("1.5".parse::<TimeSpec>().unwrap(), TimeSpec::At(1.5));
        assert!("-1".parse::<TimeSpec>().is_err());
        assert!("soon".parse::<TimeSpec>().is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"t": 0.5, "variant": "vprime"}"#).unwrap();
        assert_eq!(cfg.t, TimeSpec::At(0.5));
        assert_eq!(cfg.variant, VariantArg::Vprime);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<RunConfig>(r#"{"etta": 1}"#).is_err());
    }

    #[test]
    fn auto_time_is_first_observable_instant() {
        let cfg = RunConfig::default();
        let p = cfg.model().unwrap();
        let r = cfg.resolve_t(&p).unwrap();
        assert!(r.auto);
        assert_eq!(r.k, Some(1));
        assert!((r.t - 3.0 * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let explicit = RunConfig {
            t: TimeSpec::At(std::f64::consts::FRAC_PI_2 + 5e-4),
            ..cfg.clone()
        };
        assert_eq!(explicit.resolve_t(&p).unwrap().k, Some(0));
        let off = RunConfig {
            t: TimeSpec::At(2.0),
            ..cfg
        };
        assert_eq!(off.resolve_t(&p).unwrap().k, None);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"eta": 3.0, "delta": 0.4, "seed": 9}"#).unwrap();
        let args = RunArgs {
            config: Some(path),
            eta: Some(2.5),
            ..RunArgs::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.eta, cfg.delta, cfg.seed), (2.5, 0.4, 9));
    }

    #[test]
    fn automatic_space() {
        let cfg = RunConfig::default();
        let p = cfg.model().unwrap();
        let s = cfg.space(11.1, p.xi(), true).unwrap();
        assert!(s.dim() >= required_dim(11.1));
        assert!(s.interior_levels() >= MIN_INTERIOR_LEVELS);
        assert_eq!(s.interior_margin(), edge_aware_margin(s.dim(), p.xi()));
        let fixed = RunConfig {
            dim: 128,
            interior_margin: 16,
            ..cfg
        };
        let s = fixed.space(1.0, p.xi(), true).unwrap();
        assert_eq!((s.dim(), s.interior_margin()), (128, 16));
    }
}

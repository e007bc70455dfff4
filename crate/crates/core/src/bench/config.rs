//! Sweep configuration, read from a flat TOML file.
//!
//! ```toml
//! mode = "noisy"
//! n = 2000
//! k = 10
//! m_over_n_grid = [0.5, 1.0, 1.5]
//! c1 = "calibrate"
//! c2 = 1.0
//! epsilon_rule = "sigma:1.0"
//! noise_variance = 0.0031622776601683794
//! iteration_budgets = [30, 80, 130]
//! trials_per_point = 20
//! base_seed = 1
//! output_path = "noisy.csv"
//! ```
//!
//! Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::onebit::BihtVariant;
use crate::sensing::Precision;
use crate::zero_ident::{NOISELESS_THRESHOLD, NOISY_THRESHOLD};

/// Noise variance used in the noisy experiments, `10^-2.5`.
pub const PAPER_NOISE_VARIANCE: f64 = 0.0031622776601683794;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Noiseless,
    Noisy,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Noiseless => "noiseless",
            Mode::Noisy => "noisy",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A constant that is either given or found by calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constant {
    Value(f64),
    Calibrate,
}

impl Serialize for Constant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Constant::Value(v) => s.serialize_f64(*v),
            Constant::Calibrate => s.serialize_str("calibrate"),
        }
    }
}

impl<'de> Deserialize<'de> for Constant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Constant::Value(v as f64)),
            Raw::Float(v) => Ok(Constant::Value(v)),
            Raw::Word(w) if w == "calibrate" => Ok(Constant::Calibrate),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected a number or \"calibrate\", got {w:?}"
            ))),
        }
    }
}

/// How the Part 1 threshold `epsilon` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonRule {
    /// A fixed value, written `abs:<value>`.
    Absolute(f64),
    /// A multiple of the noise standard deviation, written `sigma:<multiple>`.
    NoiseStd(f64),
}

impl EpsilonRule {
    pub fn resolve(self, noise_variance: f64) -> f64 {
        match self {
            EpsilonRule::Absolute(v) => v,
            EpsilonRule::NoiseStd(mult) => mult * noise_variance.sqrt(),
        }
    }
}

impl fmt::Display for EpsilonRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonRule::Absolute(v) => write!(f, "abs:{v}"),
            EpsilonRule::NoiseStd(v) => write!(f, "sigma:{v}"),
        }
    }
}

impl FromStr for EpsilonRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("epsilon_rule must be abs:<x> or sigma:<x>, got {s:?}"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        if !(value >= 0.0) || !value.is_finite() {
            return Err(bad());
        }
        match kind.trim() {
            "abs" => Ok(EpsilonRule::Absolute(value)),
            "sigma" => Ok(EpsilonRule::NoiseStd(value)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for EpsilonRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EpsilonRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// On-disk form. Optional keys fall back to mode-dependent defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Mode,
    n: Option<usize>,
    k: Option<usize>,
    m_over_n_grid: Vec<f64>,
    c1: Option<Constant>,
    c2: Option<Constant>,
    epsilon_rule: Option<EpsilonRule>,
    noise_variance: Option<f64>,
    iteration_budgets: Option<Vec<usize>>,
    trials_per_point: Option<usize>,
    base_seed: Option<u64>,
    output_path: PathBuf,
    zero_threshold: Option<usize>,
    biht_variant: Option<BihtVariant>,
    step_size: Option<f64>,
    algorithms: Option<Vec<String>>,
    precision: Option<Precision>,
    record_runtime: Option<bool>,
    redraw_signal: Option<bool>,
    calibration_target: Option<f64>,
    calibration_trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    pub m_over_n_grid: Vec<f64>,
    pub c1: Constant,
    pub c2: Constant,
    pub epsilon_rule: EpsilonRule,
    pub noise_variance: f64,
    /// Noiseless: iteration caps with consistency stopping. Noisy: fixed
    /// iteration counts.
    pub iteration_budgets: Vec<usize>,
    pub trials_per_point: usize,
    pub base_seed: u64,
    pub output_path: PathBuf,
    pub zero_threshold: usize,
    pub biht_variant: BihtVariant,
    /// `None` uses the variant default.
    pub step_size: Option<f64>,
    pub algorithms: Vec<String>,
    pub precision: Precision,
    /// When false the `runtime_s` column is left empty so repeated runs
    /// produce identical files.
    pub record_runtime: bool,
    /// When false every trial reuses one signal realization.
    pub redraw_signal: bool,
    pub calibration_target: f64,
    pub calibration_trials: usize,
}

/// Desk-scale problem size.
pub const DESK_N: usize = 2000;
pub const DESK_K: usize = 10;
/// Provisional c1 used when c2 is calibrated before c1 is known.
pub const PROVISIONAL_C1: f64 = 4.0;

impl SweepConfig {
    /// Desk-scale defaults for `mode`.
    pub fn defaults(mode: Mode, m_over_n_grid: Vec<f64>, output_path: impl Into<PathBuf>) -> Self {
        let noisy = mode == Mode::Noisy;
        Self {
            mode,
            n: DESK_N,
            k: DESK_K,
            m_over_n_grid,
            c1: Constant::Calibrate,
            c2: Constant::Value(1.0),
            epsilon_rule: if noisy {
                EpsilonRule::NoiseStd(1.0)
            } else {
                EpsilonRule::Absolute(0.0)
            },
            noise_variance: if noisy { PAPER_NOISE_VARIANCE } else { 0.0 },
            iteration_budgets: if noisy { vec![30, 80, 130] } else { vec![100] },
            trials_per_point: 10,
            base_seed: 1,
            output_path: output_path.into(),
            zero_threshold: if noisy { NOISY_THRESHOLD } else { NOISELESS_THRESHOLD },
            biht_variant: if noisy { BihtVariant::L2 } else { BihtVariant::L1 },
            step_size: None,
            algorithms: vec!["sudo-biht".into(), "direct-biht".into()],
            precision: Precision::F64,
            record_runtime: true,
            redraw_signal: true,
            calibration_target: 0.9,
            calibration_trials: 20,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = Self::defaults(raw.mode, raw.m_over_n_grid, raw.output_path);
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = raw.$field { cfg.$field = v; } )* };
        }
        take!(
            n, k, c1, c2, epsilon_rule, noise_variance, iteration_budgets, trials_per_point, base_seed,
            zero_threshold, biht_variant, algorithms, precision, record_runtime, redraw_signal,
            calibration_target, calibration_trials
        );
        cfg.step_size = raw.step_size;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon_rule.resolve(self.noise_variance)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k == 0 || self.k > self.n {
            return fail(format!("need 1 <= k <= n, got k={}, n={}", self.k, self.n));
        }
        if self.m_over_n_grid.is_empty() {
            return fail("m_over_n_grid is empty".into());
        }
        if let Some(r) = self.m_over_n_grid.iter().find(|r| !(0.0..=2.0).contains(*r)) {
            return fail(format!("grid value {r} outside [0, 2]"));
        }
        if self.trials_per_point == 0 {
            return fail("trials_per_point must be >= 1".into());
        }
        if self.iteration_budgets.is_empty() || self.iteration_budgets.contains(&0) {
            return fail("iteration_budgets must be nonempty and positive".into());
        }
        if self.zero_threshold == 0 {
            return fail("zero_threshold must be >= 1".into());
        }
        for (name, c) in [("c1", self.c1), ("c2", self.c2)] {
            if let Constant::Value(v) = c {
                if !(v > 0.0 && v.is_finite()) {
                    return fail(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if let Constant::Value(c2) = self.c2 {
            if c2 / self.k as f64 > 1.0 {
                return fail(format!("c2 / k = {} exceeds 1", c2 / self.k as f64));
            }
        }
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return fail(format!("noise_variance must be >= 0, got {}", self.noise_variance));
        }
        match self.mode {
            Mode::Noiseless if self.noise_variance != 0.0 => {
                return fail("noiseless mode requires noise_variance = 0".into())
            }
            Mode::Noisy if self.noise_variance == 0.0 => {
                return fail("noisy mode requires noise_variance > 0".into())
            }
            Mode::Noisy if self.epsilon() == 0.0 => {
                return fail("noisy mode requires epsilon > 0".into())
            }
            _ => {}
        }
        if let Some(tau) = self.step_size {
            if !(tau > 0.0 && tau.is_finite()) {
                return fail(format!("step_size must be positive, got {tau}"));
            }
        }
        if self.algorithms.is_empty() {
            return fail("algorithms is empty".into());
        }
        let registry = crate::registry::Registry::builtin();
        if let Some(a) = self.algorithms.iter().find(|a| registry.get(a).is_none()) {
            return fail(format!(
                "unknown algorithm {a:?}; known: {}",
                registry.names().collect::<Vec<_>>().join(", ")
            ));
        }
        if !(self.calibration_target > 0.0 && self.calibration_target < 1.0) {
            return fail("calibration_target must lie in (0, 1)".into());
        }
        if self.calibration_trials == 0 {
            return fail("calibration_trials must be >= 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
mode = "noisy"
m_over_n_grid = [0.5, 1.0]
output_path = "out.csv"
"#;

    #[test]
    fn minimal_noisy_defaults() {
        let c = SweepConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!((c.n, c.k), (2000, 10));
        assert_eq!(c.iteration_budgets, vec![30, 80, 130]);
        assert_eq!(c.zero_threshold, 3);
        assert_eq!(c.biht_variant, BihtVariant::L2);
        assert!((c.epsilon() - 10f64.powf(-1.25)).abs() < 1e-15);
        assert_eq!(c.c1, Constant::Calibrate);
    }

    #[test]
    fn noiseless_defaults() {
        let c = SweepConfig::from_toml_str(
            "mode = \"noiseless\"\nm_over_n_grid = [1.0]\noutput_path = \"o.csv\"\nc1 = 2\n",
        )
        .unwrap();
        assert_eq!(c.epsilon(), 0.0);
        assert_eq!(c.zero_threshold, 1);
        assert_eq!(c.iteration_budgets, vec![100]);
        assert_eq!(c.c1, Constant::Value(2.0));
    }

    #[test]
    fn rejects_unknown_key() {
        let text = format!("{MINIMAL}colour = \"blue\"\n");
        assert!(matches!(SweepConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_values() {
        for extra in [
            "trials_per_point = 0",
            "c1 = \"guess\"",
            "c2 = 20.0",
            "noise_variance = 0.0",
            "epsilon_rule = \"abs:0\"",
            "epsilon_rule = \"median:1\"",
            "algorithms = [\"cosamp\"]",
            "iteration_budgets = []",
        ] {
            let text = format!("{MINIMAL}{extra}\n");
            assert!(SweepConfig::from_toml_str(&text).is_err(), "{extra}");
        }
        let text = MINIMAL.replace("[0.5, 1.0]", "[0.5, 2.5]");
        assert!(SweepConfig::from_toml_str(&text).is_err());
        let text = MINIMAL.replace("noisy", "noiseless") + "noise_variance = 0.1\n";
        assert!(SweepConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn epsilon_rule_parsing() {
        assert_eq!("abs:0.05".parse::<EpsilonRule>().unwrap(), EpsilonRule::Absolute(0.05));
        assert_eq!("sigma:2".parse::<EpsilonRule>().unwrap(), EpsilonRule::NoiseStd(2.0));
        assert!("sigma:-1".parse::<EpsilonRule>().is_err());
        assert_eq!(EpsilonRule::NoiseStd(1.5).to_string(), "sigma:1.5");
    }
}

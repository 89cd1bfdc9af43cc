//! Experiment configuration, read from TOML and overridden by CLI flags.
//!
//! ```toml
//! [problem]
//! name = "cosine-quadratic"
//! params = { dim = 10, x0 = 3.0 }
//!
//! [optimizer]
//! kind = "odog-const"     # odog-const | odog-adaptive | gd | sgd | o2nc-ogd
//!
//! [run]
//! budget = 4096
//! sigma = 0.0
//! seeds = [0, 1, 2]
//! auto_params = true
//! out = "out"
//!
//! [sweep]
//! axis = "sigma"          # sigma | budget | optimizer
//! values = [0.0, 0.1, 1.0]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use odog_core::problems::{NoiseMode, ParamMap};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    OdogConst,
    OdogAdaptive,
    Gd,
    Sgd,
    O2ncOgd,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::OdogConst => "odog-const",
            OptimizerKind::OdogAdaptive => "odog-adaptive",
            OptimizerKind::Gd => "gd",
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::O2ncOgd => "o2nc-ogd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            OptimizerKind::OdogConst,
            OptimizerKind::OdogAdaptive,
            OptimizerKind::Gd,
            OptimizerKind::Sgd,
            OptimizerKind::O2ncOgd,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    /// Whether directions are confined to the ball `‖Δ‖ ≤ D`.
    pub fn ball_constrained(self) -> bool {
        !matches!(self, OptimizerKind::Gd | OptimizerKind::Sgd)
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: String,
    #[serde(default)]
    pub params: ParamMap,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            name: "cosine-quadratic".into(),
            params: ParamMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub kind: OptimizerKind,
    /// Constant step size; overrides the automatic choice.
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    /// Local gradient Lipschitz constant for the adaptive parameters;
    /// defaults to the problem's `L1`.
    pub l1_hat: Option<f64>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            kind: OptimizerKind::OdogConst,
            eta: None,
            gamma: None,
            alpha: None,
            l1_hat: None,
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_workers() -> usize {
    1
}

fn default_max_trace() -> usize {
    odog_core::engine::DEFAULT_MAX_TRACE
}

fn default_noise() -> NoiseMode {
    NoiseMode::SharedSeed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub budget: usize,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "default_noise")]
    pub noise: NoiseMode,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Derive `D`, `T`, `K` (and `η`) from the problem constants.
    #[serde(default)]
    pub auto_params: bool,
    pub radius: Option<f64>,
    pub episode_length: Option<usize>,
    #[serde(default)]
    pub verify: bool,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_max_trace")]
    pub max_trace: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            budget: 4096,
            sigma: 0.0,
            noise: default_noise(),
            seeds: default_seeds(),
            auto_params: false,
            radius: None,
            episode_length: None,
            verify: false,
            out: default_out(),
            workers: default_workers(),
            max_trace: default_max_trace(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Sigma,
    Budget,
    Optimizer,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Sigma => "sigma",
            SweepAxis::Budget => "budget",
            SweepAxis::Optimizer => "optimizer",
        }
    }
}

/// One sweep value: a number for `sigma`/`budget`, a name for `optimizer`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Name(String),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Number(v) => write!(f, "{v}"),
            SweepValue::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<SweepValue>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub run: RunSection,
    pub sweep: Option<SweepSection>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks everything that does not need the problem instance.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Config(m));
        let r = &self.run;
        if r.seeds.is_empty() {
            return fail("seed list is empty".into());
        }
        if r.budget < 1 {
            return fail("budget must be >= 1".into());
        }
        if !r.sigma.is_finite() || r.sigma < 0.0 {
            return fail(format!("sigma must be finite and >= 0, got {}", r.sigma));
        }
        if r.workers == 0 {
            return fail("workers must be >= 1".into());
        }
        if !r.auto_params && (r.radius.is_none() || r.episode_length.is_none()) {
            return fail("set run.radius and run.episode_length, or enable auto_params".into());
        }
        for (name, v) in [
            ("optimizer.eta", self.optimizer.eta),
            ("optimizer.gamma", self.optimizer.gamma),
            ("optimizer.alpha", self.optimizer.alpha),
            ("optimizer.l1_hat", self.optimizer.l1_hat),
            ("run.radius", r.radius),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v <= 0.0 {
                    return fail(format!("{name} must be > 0, got {v}"));
                }
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return fail("sweep values are empty".into());
            }
            for v in &s.values {
                match (s.axis, v) {
                    (SweepAxis::Sigma, SweepValue::Number(x)) if *x >= 0.0 && x.is_finite() => {}
                    (SweepAxis::Budget, SweepValue::Number(x)) if *x >= 1.0 && x.fract() == 0.0 => {}
                    (SweepAxis::Optimizer, SweepValue::Name(n)) if OptimizerKind::parse(n).is_some() => {}
                    _ => return fail(format!("invalid {} sweep value {v}", s.axis.name())),
                }
            }
        }
        Ok(())
    }

    /// The configuration for one point of the sweep.
    pub fn at(&self, axis: SweepAxis, value: &SweepValue) -> ExperimentConfig {
        let mut c = self.clone();
        c.sweep = None;
        match (axis, value) {
            (SweepAxis::Sigma, SweepValue::Number(v)) => c.run.sigma = *v,
            (SweepAxis::Budget, SweepValue::Number(v)) => c.run.budget = *v as usize,
            (SweepAxis::Optimizer, SweepValue::Name(n)) => {
                if let Some(k) = OptimizerKind::parse(n) {
                    c.optimizer.kind = k;
                }
            }
            _ => {}
        }
        c
    }
}

/// Parses `"0,1,5"` or `"0..30"` (half open).
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Config(format!("cannot parse seed list `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b <= a {
            return Err(bad());
        }
        return Ok((a..b).collect());
    }
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect()
}

/// Parses a comma-separated sweep value list for `axis`.
pub fn parse_values(axis: SweepAxis, s: &str) -> Result<Vec<SweepValue>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| match axis {
            SweepAxis::Optimizer => Ok(SweepValue::Name(p.to_string())),
            _ => p
                .parse::<f64>()
                .map(SweepValue::Number)
                .map_err(|_| CliError::Config(format!("invalid {} value `{p}`", axis.name()))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let c = ExperimentConfig::from_toml(
            r#"
            [problem]
            name = "quadratic"
            params = { dim = 3, a = [1.0, 2.0, 3.0] }
            [optimizer]
            kind = "odog-adaptive"
            gamma = 1.5
            [run]
            budget = 256
            sigma = 0.1
            noise = "fresh"
            seeds = [1, 2]
            auto_params = true
            verify = true
            [sweep]
            axis = "budget"
            values = [256, 1024]
            "#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.optimizer.kind, OptimizerKind::OdogAdaptive);
        assert_eq!(c.run.noise, NoiseMode::Fresh);
        assert_eq!(c.sweep.unwrap().values.len(), 2);
    }

    #[test]
    fn rejects_unknown_keys() {
        let e = ExperimentConfig::from_toml("[run]\nbudget = 5\nbudgte = 6\n").unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        assert!(ExperimentConfig::from_toml("[runs]\nbudget = 5\n").is_err());
    }

    #[test]
    fn manual_parameters_are_required_without_auto() {
        let c = ExperimentConfig::from_toml("[run]\nbudget = 64\n").unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_toml("[run]\nbudget = 64\nradius = 0.1\nepisode_length = 8\n").unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn empty_sweep_is_a_config_error() {
        let c = ExperimentConfig::from_toml("[run]\nbudget = 64\nauto_params = true\n[sweep]\naxis = \"sigma\"\nvalues = []\n").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0,3, 5").unwrap(), vec![0, 3, 5]);
        assert_eq!(parse_seeds("2..5").unwrap(), vec![2, 3, 4]);
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("x").is_err());
    }
}

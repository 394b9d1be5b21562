//! Experiment configuration: one strict JSON document.

use std::path::Path;

use icstab_core::channel::{PowerAllocation, SinrThresholds, StrategyPair, Topology};
use icstab_core::closure::SweepSpec;
use icstab_core::sim::DominantMode;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessConfig {
    pub q1: f64,
    pub q2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Powers on `[0, p_max]`, saturated access.
    Power,
    /// Configured powers, access probabilities on `[0, 1]`.
    Access,
    /// Both grids at once.
    AccessAndPower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    /// Defaults to the larger configured power.
    #[serde(default)]
    pub p_max: Option<f64>,
    #[serde(default = "default_power_points")]
    pub power_points: usize,
    #[serde(default = "default_access_points")]
    pub access_points: usize,
    #[serde(default = "default_lambda1_points")]
    pub lambda1_points: usize,
}

fn default_power_points() -> usize {
    SweepSpec::DEFAULT_POWER_POINTS
}

fn default_access_points() -> usize {
    SweepSpec::DEFAULT_ACCESS_POINTS
}

fn default_lambda1_points() -> usize {
    SweepSpec::DEFAULT_LAMBDA1_POINTS
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kind: SweepKind::Power,
            p_max: None,
            power_points: default_power_points(),
            access_points: default_access_points(),
            lambda1_points: default_lambda1_points(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub samples: u64,
    /// Strategy pairs to check; defaults to the configured pair.
    #[serde(default)]
    pub strategies: Option<Vec<StrategyPair>>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { samples: 1_000_000, strategies: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub lambda1: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    0.005
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub horizon: u64,
    /// Runs use seeds `seed, seed + 1, ...`.
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub lambda1: f64,
    #[serde(default)]
    pub lambda2: f64,
    #[serde(default)]
    pub dominant: DominantMode,
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
    /// Dump queue lengths of the first run every this many slots.
    #[serde(default)]
    pub trace_every: Option<u64>,
}

fn default_runs() -> usize {
    1
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            horizon: 1_000_000,
            runs: default_runs(),
            lambda1: 0.0,
            lambda2: 0.0,
            dominant: DominantMode::None,
            boundary: None,
            trace_every: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub powers: PowerAllocation,
    pub thresholds: SinrThresholds,
    pub strategy: StrategyPair,
    #[serde(default)]
    pub access: Option<AccessConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub validate: Option<ValidateConfig>,
    #[serde(default)]
    pub sim: Option<SimSection>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        config.check()?;
        Ok(config)
    }

    /// Checks every section against the invariants of the modules it feeds.
    pub fn check(&self) -> Result<(), CliError> {
        self.topology.validate()?;
        self.powers.validate()?;
        self.thresholds.validate()?;
        self.strategy.validate()?;
        if let Some(a) = self.access {
            for q in [a.q1, a.q2] {
                if !(0.0..=1.0).contains(&q) {
                    return Err(CliError::Config(format!("access probability {q} is outside [0, 1]")));
                }
            }
        }
        if let Some(v) = &self.validate {
            if v.samples == 0 {
                return Err(CliError::Config("sample count must be positive".into()));
            }
            for pair in v.strategies.iter().flatten() {
                pair.validate()?;
            }
        }
        if let Some(s) = &self.sim {
            if s.runs == 0 {
                return Err(CliError::Config("sim.runs must be positive".into()));
            }
            if s.horizon == 0 {
                return Err(CliError::Config("horizon must be at least one slot".into()));
            }
            if let Some(b) = &s.boundary {
                if b.tol <= 0.0 {
                    return Err(CliError::Config(format!("boundary tolerance must be positive, got {}", b.tol)));
                }
            }
        }
        Ok(())
    }

    /// Applies one `key=value` override from the command line.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override {spec:?} is not of the form key=value")))?;
        let bad = |e: &dyn std::fmt::Display| CliError::Config(format!("override {key}: {e}"));
        let int = |v: &str| v.parse::<usize>().map_err(|e| bad(&e));
        let float = |v: &str| v.parse::<f64>().map_err(|e| bad(&e));
        match key {
            "power_points" => self.sweep.get_or_insert_with(Default::default).power_points = int(value)?,
            "access_points" => self.sweep.get_or_insert_with(Default::default).access_points = int(value)?,
            "lambda1_points" => self.sweep.get_or_insert_with(Default::default).lambda1_points = int(value)?,
            "p_max" => self.sweep.get_or_insert_with(Default::default).p_max = Some(float(value)?),
            "kind" => {
                self.sweep.get_or_insert_with(Default::default).kind =
                    serde_json::from_value(serde_json::Value::String(value.into())).map_err(|e| bad(&e))?
            }
            "samples" => {
                self.validate.get_or_insert_with(Default::default).samples =
                    value.parse().map_err(|e| bad(&e))?
            }
            "horizon" => {
                self.sim.get_or_insert_with(Default::default).horizon = value.parse().map_err(|e| bad(&e))?
            }
            "runs" => self.sim.get_or_insert_with(Default::default).runs = int(value)?,
            "lambda1" => self.sim.get_or_insert_with(Default::default).lambda1 = float(value)?,
            "lambda2" => self.sim.get_or_insert_with(Default::default).lambda2 = float(value)?,
            _ => return Err(CliError::Config(format!("unknown override key {key:?}"))),
        }
        Ok(())
    }

    /// Sweep grids implied by the `sweep` section.
    pub fn sweep_spec(&self) -> Result<(SweepKind, SweepSpec), CliError> {
        let sweep = self.sweep.clone().ok_or_else(|| CliError::Config("closure needs a sweep section".into()))?;
        let p_max = sweep.p_max.unwrap_or(self.powers.p1.max(self.powers.p2));
        let spec = match sweep.kind {
            SweepKind::Power => SweepSpec::power_sweep(p_max, sweep.power_points, sweep.lambda1_points),
            SweepKind::Access => {
                SweepSpec::access_sweep(self.powers, p_max, sweep.access_points, sweep.lambda1_points)
            }
            SweepKind::AccessAndPower => {
                let power = SweepSpec::power_sweep(p_max, sweep.power_points, sweep.lambda1_points);
                let access = SweepSpec::access_sweep(self.powers, p_max, sweep.access_points, sweep.lambda1_points);
                SweepSpec { q1_values: access.q1_values, q2_values: access.q2_values, ..power }
            }
        };
        spec.validate()?;
        Ok((sweep.kind, spec))
    }

    /// Number of points of the `lambda1` grid used for boundary traces.
    pub fn lambda1_points(&self) -> usize {
        self.sweep.as_ref().map_or(SweepSpec::DEFAULT_LAMBDA1_POINTS, |s| s.lambda1_points)
    }
}

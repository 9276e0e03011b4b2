use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{Algorithm, MatchSettings, EXHAUSTIVE_MAX_LINKS};
use crate::netmodel::{FrameConfig, ScenarioParams};
use crate::powerctl::{QosSpec, SolverSettings};
use crate::powermodel::{PowerConfig, DEFAULT_CONFIG_JSON};

/// Uniform QoS requirement applied to every UE of a drop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosConfig {
    pub r_min_bps: f64,
    pub p_max_w: f64,
}

impl QosConfig {
    pub fn spec(&self, k: usize, frame: &FrameConfig) -> Result<QosSpec> {
        QosSpec::new(vec![self.r_min_bps; k], self.p_max_w, frame)
    }
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "M")]
    M,
    #[serde(rename = "K")]
    K,
    #[serde(rename = "N")]
    N,
    #[serde(rename = "L")]
    L,
    #[serde(rename = "r_min_bps")]
    RMin,
    #[serde(rename = "p_max_w")]
    PMax,
    #[serde(rename = "area_side")]
    AreaSide,
}

impl SweepParameter {
    fn is_count(self) -> bool {
        matches!(self, SweepParameter::M | SweepParameter::K | SweepParameter::N | SweepParameter::L)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Algorithm list: a comma-separated selector string or `all`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmSet(pub Vec<Algorithm>);

impl std::str::FromStr for AlgorithmSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "all" {
            return Ok(Self(Algorithm::ALL.to_vec()));
        }
        let algs = s.split(',').map(|a| a.trim().parse()).collect::<Result<Vec<Algorithm>>>()?;
        if algs.is_empty() {
            return Err(Error::Config("empty algorithm selector".into()));
        }
        for (i, a) in algs.iter().enumerate() {
            if algs[..i].contains(a) {
                return Err(Error::Config(format!("algorithm `{a}` listed twice")));
            }
        }
        Ok(Self(algs))
    }
}

impl std::fmt::Display for AlgorithmSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|a| a.name()).collect();
        f.write_str(&names.join(","))
    }
}

impl Serialize for AlgorithmSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AlgorithmSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Complete description of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioParams,
    pub frame: FrameConfig,
    pub power: PowerConfig,
    pub qos: QosConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub matching: MatchSettings,
    pub algorithm: AlgorithmSet,
    pub drops: usize,
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Fill `wall_time_ms`. Off by default so that outputs are reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl RunConfig {
    /// The bundled default configuration.
    pub fn defaults() -> Self {
        serde_json::from_str(DEFAULT_CONFIG_JSON).expect("bundled config matches the schema")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Sweep points, or a single unlabeled point without a sweep.
    pub fn points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }

    /// This configuration with the sweep parameter set to `value`.
    pub fn at(&self, value: Option<f64>) -> Result<RunConfig> {
        let mut cfg = self.clone();
        let (Some(spec), Some(v)) = (&self.sweep, value) else {
            return Ok(cfg);
        };
        if spec.parameter.is_count() && !(v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64) {
            return Err(Error::Config(format!("sweep value {v} is not a positive integer")));
        }
        match spec.parameter {
            SweepParameter::M => cfg.scenario.m = v as usize,
            SweepParameter::K => cfg.scenario.k = v as usize,
            SweepParameter::N => cfg.scenario.n = v as usize,
            SweepParameter::L => cfg.scenario.l = v as usize,
            SweepParameter::RMin => cfg.qos.r_min_bps = v,
            SweepParameter::PMax => cfg.qos.p_max_w = v,
            SweepParameter::AreaSide => cfg.scenario.area_side = v,
        }
        Ok(cfg)
    }

    /// Power configuration with the active antenna count and bandwidth taken
    /// from the scenario and frame.
    pub fn power_for_drop(&self) -> PowerConfig {
        let mut p = self.power.clone();
        p.bs.act_values.n = self.scenario.n as f64;
        p.bs.act_values.b = self.frame.bandwidth_hz;
        p
    }

    fn validate_point(&self) -> Result<()> {
        self.scenario.validate()?;
        self.frame.validate()?;
        if self.scenario.k > self.frame.tau_p {
            return Err(Error::Config(format!(
                "K = {} UEs need at least as many pilots, tau_p = {}",
                self.scenario.k, self.frame.tau_p
            )));
        }
        self.power_for_drop().validate()?;
        self.qos.spec(self.scenario.k, &self.frame)?;
        if self.algorithm.0.contains(&Algorithm::Exhaustive) && self.scenario.m * self.scenario.k > EXHAUSTIVE_MAX_LINKS {
            return Err(Error::Guard(format!(
                "exhaustive search needs M·K <= {EXHAUSTIVE_MAX_LINKS}, got {}",
                self.scenario.m * self.scenario.k
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.drops == 0 {
            return Err(Error::Config("drops must be at least 1".into()));
        }
        self.solver.validate()?;
        self.matching.validate()?;
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::Config("sweep needs at least one value".into()));
            }
        }
        for v in self.points() {
            self.at(v)?.validate_point()?;
        }
        Ok(())
    }
}

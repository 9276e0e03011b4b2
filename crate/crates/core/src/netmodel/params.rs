use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Geometry and antenna configuration of one network drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    /// Number of uplink base stations (UBSs).
    #[serde(rename = "M")]
    pub m: usize,
    /// Number of single-antenna UEs.
    #[serde(rename = "K")]
    pub k: usize,
    /// Antennas per UBS.
    #[serde(rename = "N")]
    pub n: usize,
    /// Maximum number of UBSs serving a UE.
    #[serde(rename = "L")]
    pub l: usize,
    /// Side of the square deployment area, meters.
    pub area_side: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_exponent: f64,
    /// Log-normal shadowing standard deviation; 0 disables shadowing.
    #[serde(default)]
    pub shadowing_std_db: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            m: 16,
            k: 5,
            n: 5,
            l: 3,
            area_side: 500.0,
            pathloss_intercept_db: 30.5,
            pathloss_exponent: 3.67,
            shadowing_std_db: 0.0,
            seed: 0,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(invalid("M", "at least one UBS is required"));
        }
        if self.k < 1 {
            return Err(invalid("K", "at least one UE is required"));
        }
        if self.n < 1 {
            return Err(invalid("N", "at least one antenna per UBS is required"));
        }
        if self.l < 1 || self.l > self.m {
            return Err(invalid("L", format!("must satisfy 1 <= L <= M (L={}, M={})", self.l, self.m)));
        }
        if !(self.area_side > 0.0 && self.area_side.is_finite()) {
            return Err(invalid("area_side", format!("must be positive, got {}", self.area_side)));
        }
        if !self.pathloss_intercept_db.is_finite() || !self.pathloss_exponent.is_finite() {
            return Err(invalid("pathloss", "path-loss parameters must be finite"));
        }
        if !(self.shadowing_std_db >= 0.0 && self.shadowing_std_db.is_finite()) {
            return Err(invalid("shadowing_std_db", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Coherence-block structure and link-budget constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    /// Symbols per coherence block.
    pub tau_c: usize,
    /// Pilot symbols per coherence block.
    pub tau_p: usize,
    pub bandwidth_hz: f64,
    /// Receiver noise power sigma^2, watts.
    pub noise_power_w: f64,
    /// Per-UE pilot transmit power, watts.
    pub pilot_power_w: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            tau_c: 190,
            tau_p: 10,
            bandwidth_hz: 20e6,
            noise_power_w: dbm_to_watt(-94.0),
            pilot_power_w: 0.1,
        }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_p > 0 && self.tau_p < self.tau_c) {
            return Err(invalid(
                "tau_p",
                format!("must satisfy 0 < tau_p < tau_c (tau_p={}, tau_c={})", self.tau_p, self.tau_c),
            ));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(invalid("bandwidth_hz", "must be positive"));
        }
        if !(self.noise_power_w > 0.0 && self.noise_power_w.is_finite()) {
            return Err(invalid("noise_power_w", "must be positive"));
        }
        if !(self.pilot_power_w >= 0.0 && self.pilot_power_w.is_finite()) {
            return Err(invalid("pilot_power_w", "must be non-negative"));
        }
        Ok(())
    }

    /// Data symbols per coherence block.
    pub fn tau_u(&self) -> usize {
        self.tau_c - self.tau_p
    }

    /// Pre-log factor `(tau_u / tau_c) * B` in bit/s per bit/s/Hz.
    pub fn prelog(&self) -> f64 {
        self.tau_u() as f64 / self.tau_c as f64 * self.bandwidth_hz
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

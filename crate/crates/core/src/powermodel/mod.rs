//! Component-level power consumption of the uplink network, its affine
//! reduction in the UE rates, and energy efficiency.

mod components;
mod network;

pub use components::{component_power, ubs_power, BsPowerConfig, ParamKey, ParamValues, SubComponentSpec};
pub use network::{
    build_affine_form, cooling_factor, edge_cloud_power, energy_efficiency, network_power, pooling_factor, sleep_power,
    theta, ubs_loads, AffinePowerForm, PowerBreakdown, PowerConfig, PowerModel, SystemPowerParams,
};

/// Bundled run configuration; its `power` section is the default power model.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../../configs/default.json");

impl PowerConfig {
    /// Default power configuration. The component tables are placeholders.
    pub fn defaults() -> Self {
        let v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG_JSON).expect("bundled config is valid JSON");
        serde_json::from_value(v["power"].clone()).expect("bundled power config matches the schema")
    }
}

//! Network drops, channel statistics and ergodic uplink rates.

mod association;
mod correlation;
mod params;
mod rate;
mod statistics;
mod topology;

pub use association::Association;
pub use correlation::{build_correlation, pathloss_db, CMatrix, CorrelationSet, C64, MIN_LINK_DISTANCE};
pub use params::{db_to_linear, dbm_to_watt, FrameConfig, ScenarioParams};
pub use rate::{rate_from_sinr, sinr, sinr_effective, uplink_rate, uplink_rate_effective, EffectiveChannel, RateVector};
pub use statistics::{mmse_statistics, monte_carlo_statistics, CoefficientTensor, MonteCarloStatistics};
pub use topology::{generate_topology, wrap_distance, Point, Topology};

//! Energy-efficiency optimization for the uplink of a fully-decoupled radio
//! access network.
//!
//! The crate is organized in five layers:
//!
//! * [`netmodel`] generates network drops, spatial-correlation channel
//!   statistics and the ergodic SINR / rate of any association and power
//!   vector.
//! * [`powermodel`] evaluates the holistic network power (UBSs, sleep mode,
//!   fronthaul, edge cloud, UEs) and reduces it to an affine form in the
//!   per-UE rates and powers.
//! * [`powerctl`] solves the power-control subproblem for a fixed
//!   association: successive lower-bound maximization wrapped around
//!   Dinkelbach's algorithm (SLMDB), plus the FiPC / QoPC / EIPC heuristics.
//! * [`matching`] solves the association and sleeping subproblem with
//!   many-to-many swap matching (TriMSM), the RECP / LLSF / TSAP baselines,
//!   the no-sleep variant and an exhaustive oracle.
//! * [`harness`] ingests run configurations, runs seeded drops and sweeps,
//!   and emits CSV / JSON results.

pub mod error;
pub mod harness;
pub mod matching;
pub mod netmodel;
pub mod powerctl;
pub mod powermodel;

pub use error::{Error, Result};

//! UE association and UBS sleeping.
//!
//! The association matrix is improved by many-to-many swap matching
//! (TriMSM): starting from a received-power initialization, candidate moves
//! between UE pairs are approved when every UE keeps its rate requirement and
//! the network energy efficiency strictly increases. Baselines (RECP, LLSF,
//! TSAP), the no-sleep variant and an exhaustive oracle share the same
//! evaluation path.

mod evaluate;
mod exhaustive;
mod init;
mod moves;
mod swap;

use serde::{Deserialize, Serialize};

pub use evaluate::{ee_upper_bound, evaluate, is_swap_blocking, Evaluation, Evaluator, PreferenceOutcome};
pub use exhaustive::{exhaustive_search, EXHAUSTIVE_MAX_LINKS};
pub use init::{cover_all_ubs, llsf_assoc, recp_init, tsap_assoc, TSAP_THRESHOLD};
pub use moves::{apply_move, candidate_moves, moves_for_pair, MoveKind, SwapMove};
pub use swap::{nos_assoc, trimsm, trimsm_from, verify_stability};

use crate::error::{Error, Result};
use crate::netmodel::{Association, CorrelationSet};
use crate::powerctl::{PowerContext, PowerControl, PowerSolution};
use crate::powermodel::PowerModel;

/// An association together with its capacity caps: at most `l` UBSs per UE
/// and at most `n` UEs per UBS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    assoc: Association,
    l: usize,
    n: usize,
}

impl Matching {
    pub fn new(assoc: Association, l: usize, n: usize) -> Result<Self> {
        assoc.check_caps(l, n)?;
        Ok(Self { assoc, l, n })
    }

    pub fn empty(m: usize, k: usize, l: usize, n: usize) -> Self {
        Self {
            assoc: Association::empty(m, k),
            l,
            n,
        }
    }

    pub fn assoc(&self) -> &Association {
        &self.assoc
    }

    pub fn into_assoc(self) -> Association {
        self.assoc
    }

    pub fn ue_cap(&self) -> usize {
        self.l
    }

    pub fn ubs_cap(&self) -> usize {
        self.n
    }

    /// UBSs matched with UE `k`.
    pub fn of_ue(&self, k: usize) -> Vec<usize> {
        self.assoc.serving(k).collect()
    }

    /// UEs matched with UBS `m`.
    pub fn of_ubs(&self, m: usize) -> Vec<usize> {
        self.assoc.served(m).collect()
    }
}

/// Tunables of the association algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchSettings {
    /// RECP share of the total received power, percent.
    #[serde(default = "default_delta")]
    pub delta_percent: f64,
    /// Full sweeps over the candidate moves before giving up.
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
}

fn default_delta() -> f64 {
    95.0
}

fn default_max_sweeps() -> usize {
    100
}

impl Default for MatchSettings {
    fn default() -> Self {
        Self {
            delta_percent: default_delta(),
            max_sweeps: default_max_sweeps(),
        }
    }
}

impl MatchSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_percent > 0.0 && self.delta_percent <= 100.0) {
            return Err(crate::error::invalid("delta_percent", "must lie in (0, 100]"));
        }
        if self.max_sweeps == 0 {
            return Err(crate::error::invalid("max_sweeps", "must be positive"));
        }
        Ok(())
    }
}

/// Everything an association algorithm needs for one drop.
#[derive(Debug, Clone, Copy)]
pub struct MatchContext<'a> {
    pub power: PowerContext<'a>,
    pub model: &'a PowerModel,
    /// UBSs per UE.
    pub l: usize,
    /// UEs per UBS.
    pub n: usize,
}

impl MatchContext<'_> {
    pub fn corr(&self) -> &CorrelationSet {
        self.power.corr
    }

    pub fn num_ubs(&self) -> usize {
        self.power.corr.num_ubs()
    }

    pub fn num_ue(&self) -> usize {
        self.power.corr.num_ue()
    }
}

#[derive(Debug, Clone)]
pub struct SolutionReport {
    pub matching: Matching,
    pub power: PowerSolution,
    pub ee: f64,
    /// Approved moves.
    pub swap_count: usize,
    /// Power-controller runs, cache hits excluded.
    pub evaluation_count: usize,
    pub sweeps: usize,
    /// Certified by a full stability scan. Only swap matching sets it.
    pub stable: bool,
    /// Some UE misses its rate requirement in the returned solution.
    pub infeasible: bool,
}

/// Algorithm selectors accepted by the command line and run configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "trimsm-slmdb")]
    TrimsmSlmdb,
    #[serde(rename = "trimsm-fipc")]
    TrimsmFipc,
    #[serde(rename = "trimsm-qopc")]
    TrimsmQopc,
    #[serde(rename = "trimsm-eipc")]
    TrimsmEipc,
    #[serde(rename = "recp")]
    Recp,
    #[serde(rename = "llsf")]
    Llsf,
    #[serde(rename = "tsap")]
    Tsap,
    #[serde(rename = "nos")]
    Nos,
    #[serde(rename = "exhaustive")]
    Exhaustive,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::TrimsmSlmdb,
        Algorithm::TrimsmFipc,
        Algorithm::TrimsmQopc,
        Algorithm::TrimsmEipc,
        Algorithm::Recp,
        Algorithm::Llsf,
        Algorithm::Tsap,
        Algorithm::Nos,
        Algorithm::Exhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TrimsmSlmdb => "trimsm-slmdb",
            Algorithm::TrimsmFipc => "trimsm-fipc",
            Algorithm::TrimsmQopc => "trimsm-qopc",
            Algorithm::TrimsmEipc => "trimsm-eipc",
            Algorithm::Recp => "recp",
            Algorithm::Llsf => "llsf",
            Algorithm::Tsap => "tsap",
            Algorithm::Nos => "nos",
            Algorithm::Exhaustive => "exhaustive",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Baseline association evaluated with SLMDB power control.
fn fixed_association(matching: Matching, ctx: &MatchContext<'_>) -> Result<SolutionReport> {
    let eval = evaluate(&matching, PowerControl::Slmdb, ctx)?;
    Ok(SolutionReport {
        matching,
        ee: eval.ee,
        infeasible: !eval.qos_ok,
        power: eval.power,
        swap_count: 0,
        evaluation_count: 1,
        sweeps: 0,
        stable: false,
    })
}

/// Runs one algorithm on one drop.
pub fn run_algorithm(alg: Algorithm, ctx: &MatchContext<'_>, settings: &MatchSettings) -> Result<SolutionReport> {
    settings.validate()?;
    let (corr, l, n) = (ctx.corr(), ctx.l, ctx.n);
    match alg {
        Algorithm::TrimsmSlmdb => trimsm(ctx, PowerControl::Slmdb, settings),
        Algorithm::TrimsmFipc => trimsm(ctx, PowerControl::Fipc, settings),
        Algorithm::TrimsmQopc => trimsm(ctx, PowerControl::Qopc, settings),
        Algorithm::TrimsmEipc => trimsm(ctx, PowerControl::Eipc, settings),
        Algorithm::Recp => fixed_association(recp_init(corr, l, n, settings.delta_percent)?, ctx),
        Algorithm::Llsf => fixed_association(llsf_assoc(corr, l, n)?, ctx),
        Algorithm::Tsap => fixed_association(tsap_assoc(corr, l, n)?, ctx),
        Algorithm::Nos => nos_assoc(ctx, PowerControl::Eipc, settings),
        Algorithm::Exhaustive => exhaustive_search(ctx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            let json = serde_json::to_string(&a).unwrap();
            assert_eq!(json, format!("\"{}\"", a.name()));
        }
        assert!("trimsm".parse::<Algorithm>().is_err());
    }

    #[test]
    fn matching_checks_caps() {
        let a = Association::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap();
        assert!(Matching::new(a.clone(), 2, 2).is_ok());
        assert!(Matching::new(a.clone(), 1, 2).is_err());
        assert!(Matching::new(a, 2, 1).is_err());
    }

    #[test]
    fn settings_defaults() {
        let s: MatchSettings = serde_json::from_str("{}").unwrap();
        assert_eq!(s, MatchSettings::default());
        assert_eq!(s.delta_percent, 95.0);
        assert!(MatchSettings { delta_percent: 0.0, ..s }.validate().is_err());
    }
}

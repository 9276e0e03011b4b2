//! Uplink power control for a fixed association: the successive lower-bound
//! maximization with Dinkelbach inner loop (SLMDB), and the fixed (FiPC),
//! QoS-constrained (QoPC) and channel-inversion (EIPC) controllers.

mod barrier;
mod problem;
mod simple;
mod solver;
mod surrogate;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::netmodel::{Association, CoefficientTensor, CorrelationSet, EffectiveChannel, FrameConfig, RateVector};
use crate::powermodel::AffinePowerForm;

pub use simple::{eipc, fipc};
pub use solver::{dinkelbach, evaluate_fixed, qopc, slmdb, solve_parametric, DinkelbachResult, QopcResult};
pub use surrogate::{qos_residual, taylor_bounds, SurrogatePoint};

/// `γ_k = 2^{τ_c R_min,k / (τ_u B)} − 1`.
pub fn gamma_thresholds(r_min: &[f64], frame: &FrameConfig) -> Vec<f64> {
    r_min.iter().map(|&r| (r / frame.prelog()).exp2() - 1.0).collect()
}

/// Per-UE rate requirements, their SINR thresholds, and the power cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QosSpec {
    pub r_min_bps: Vec<f64>,
    pub gamma: Vec<f64>,
    pub p_max_w: f64,
}

impl QosSpec {
    pub fn new(r_min_bps: Vec<f64>, p_max_w: f64, frame: &FrameConfig) -> Result<Self> {
        if !(p_max_w > 0.0 && p_max_w.is_finite()) {
            return Err(invalid("p_max_w", format!("must be positive, got {p_max_w}")));
        }
        if let Some(r) = r_min_bps.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(invalid("r_min_bps", format!("must be finite and nonnegative, got {r}")));
        }
        let gamma = gamma_thresholds(&r_min_bps, frame);
        Ok(Self { r_min_bps, gamma, p_max_w })
    }

    /// Same requirement for all `k` UEs.
    pub fn uniform(k: usize, r_min_bps: f64, p_max_w: f64, frame: &FrameConfig) -> Self {
        Self::new(vec![r_min_bps; k], p_max_w, frame).expect("valid uniform QoS")
    }

    pub fn num_ue(&self) -> usize {
        self.gamma.len()
    }
}

fn default_slm_tol() -> f64 {
    1e-3
}
fn default_dinkelbach_tol() -> f64 {
    1e-6
}
fn default_inner_tol() -> f64 {
    1e-8
}
fn default_feas_tol() -> f64 {
    1e-9
}
fn default_max_outer() -> usize {
    100
}
fn default_max_dinkelbach() -> usize {
    50
}
fn default_max_newton() -> usize {
    200
}
fn default_barrier_mu() -> f64 {
    50.0
}
fn default_stall_rounds() -> usize {
    3
}

/// Tolerances and iteration caps of the power-control solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    /// Outer-loop stop: relative EE improvement `ϑ ≤ slm_tol`.
    #[serde(default = "default_slm_tol")]
    pub slm_tol: f64,
    /// Dinkelbach stop: `F(π) ≤ dinkelbach_tol · π · P_N`.
    #[serde(default = "default_dinkelbach_tol")]
    pub dinkelbach_tol: f64,
    /// Barrier suboptimality bound of each parametric solve.
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    /// Largest normalized QoS residual still counted as feasible.
    #[serde(default = "default_feas_tol")]
    pub feas_tol: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default = "default_max_dinkelbach")]
    pub max_dinkelbach: usize,
    /// Newton steps per barrier centering pass.
    #[serde(default = "default_max_newton")]
    pub max_newton: usize,
    #[serde(default = "default_barrier_mu")]
    pub barrier_mu: f64,
    /// Dinkelbach rounds without improvement before giving up.
    #[serde(default = "default_stall_rounds")]
    pub stall_rounds: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            slm_tol: default_slm_tol(),
            dinkelbach_tol: default_dinkelbach_tol(),
            inner_tol: default_inner_tol(),
            feas_tol: default_feas_tol(),
            max_outer: default_max_outer(),
            max_dinkelbach: default_max_dinkelbach(),
            max_newton: default_max_newton(),
            barrier_mu: default_barrier_mu(),
            stall_rounds: default_stall_rounds(),
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("slm_tol", self.slm_tol),
            ("dinkelbach_tol", self.dinkelbach_tol),
            ("inner_tol", self.inner_tol),
            ("feas_tol", self.feas_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.barrier_mu > 1.0) {
            return Err(invalid("barrier_mu", format!("must exceed 1, got {}", self.barrier_mu)));
        }
        if self.max_outer == 0 || self.max_dinkelbach == 0 || self.max_newton == 0 || self.stall_rounds == 0 {
            return Err(invalid("max_iterations", "iteration caps must be positive"));
        }
        Ok(())
    }
}

/// Iteration counts and traces of one power-control solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub outer_iterations: usize,
    pub dinkelbach_iterations: Vec<usize>,
    /// True EE of every accepted outer iterate, starting with the initial point.
    pub ee_trace: Vec<f64>,
    pub pi_traces: Vec<Vec<f64>>,
    pub newton_steps: usize,
    /// Largest normalized QoS residual of the phase-I point.
    pub qopc_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSolution {
    pub p: Vec<f64>,
    pub ee: f64,
    pub rates: RateVector,
    pub feasible: bool,
    pub diagnostics: Diagnostics,
}

/// Power-control algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerControl {
    Slmdb,
    Fipc,
    Qopc,
    Eipc,
}

impl PowerControl {
    pub fn name(self) -> &'static str {
        match self {
            PowerControl::Slmdb => "slmdb",
            PowerControl::Fipc => "fipc",
            PowerControl::Qopc => "qopc",
            PowerControl::Eipc => "eipc",
        }
    }
}

impl std::str::FromStr for PowerControl {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slmdb" => Ok(Self::Slmdb),
            "fipc" => Ok(Self::Fipc),
            "qopc" => Ok(Self::Qopc),
            "eipc" => Ok(Self::Eipc),
            other => Err(Error::Config(format!("unknown power control `{other}`"))),
        }
    }
}

/// Everything a power controller needs besides the association and its form.
#[derive(Debug, Clone, Copy)]
pub struct PowerContext<'a> {
    pub tensor: &'a CoefficientTensor,
    pub corr: &'a CorrelationSet,
    pub frame: &'a FrameConfig,
    pub qos: &'a QosSpec,
    pub settings: &'a SolverSettings,
}

/// Runs the selected controller for one association.
pub fn solve_power(
    control: PowerControl,
    assoc: &Association,
    form: &AffinePowerForm,
    ctx: &PowerContext<'_>,
) -> Result<PowerSolution> {
    let ch = EffectiveChannel::new(assoc, ctx.tensor)?;
    match control {
        PowerControl::Slmdb => solver::slmdb_channel(&ch, ctx.frame, form, ctx.qos, ctx.settings, None),
        PowerControl::Qopc => solver::qopc_solution(&ch, ctx.frame, form, ctx.qos, ctx.settings),
        PowerControl::Fipc => {
            let p = fipc(assoc.num_ue(), ctx.qos);
            let p: Vec<f64> = (0..p.len()).map(|k| if ch.is_served(k) { p[k] } else { 0.0 }).collect();
            evaluate_fixed(&p, &ch, ctx.frame, form, ctx.qos, ctx.settings)
        }
        PowerControl::Eipc => {
            let p = eipc(assoc, ctx.corr, ctx.qos);
            evaluate_fixed(&p, &ch, ctx.frame, form, ctx.qos, ctx.settings)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_correlation, generate_topology, mmse_statistics, ScenarioParams};
    use crate::powermodel::{PowerConfig, PowerModel};

    #[test]
    fn gamma_examples() {
        let f = FrameConfig::default();
        assert_eq!(gamma_thresholds(&[0.0], &f), vec![0.0]);
        let g = gamma_thresholds(&[20e6], &f)[0];
        assert!((g - ((19.0f64 / 18.0).exp2() - 1.0)).abs() < 1e-12);
        assert!((g - 1.0785).abs() < 1e-4);
        let gs = gamma_thresholds(&[1e6, 5e6, 2e7, 4e7], &f);
        assert!(gs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn settings_round_trip_and_defaults() {
        let s: SolverSettings = serde_json::from_str("{}").unwrap();
        assert_eq!(s, SolverSettings::default());
        assert_eq!(s.slm_tol, 1e-3);
        assert!(s.validate().is_ok());
        assert!(SolverSettings { inner_tol: 0.0, ..s }.validate().is_err());
    }

    fn drop_instance(seed: u64, m: usize, k: usize) -> (Association, CoefficientTensor, CorrelationSet, AffinePowerForm) {
        let p = ScenarioParams { m, k, n: 5, l: 2, seed, ..Default::default() };
        let topo = generate_topology(&p).unwrap();
        let frame = FrameConfig::default();
        let corr = build_correlation(&topo, &frame).unwrap();
        let t = mmse_statistics(&corr, &frame).unwrap();
        let mut a = Association::empty(m, k);
        for ue in 0..k {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| corr.beta(y, ue).total_cmp(&corr.beta(x, ue)));
            for &bs in &order[..2] {
                a.set(bs, ue, true);
            }
        }
        let form = PowerModel::new(&PowerConfig::defaults(), m).unwrap().affine_form(&a).unwrap();
        (a, t, corr, form)
    }

    #[test]
    fn slmdb_improves_on_qopc_and_stays_feasible() {
        let frame = FrameConfig::default();
        let settings = SolverSettings::default();
        for seed in 0..5 {
            let (a, t, corr, form) = drop_instance(seed, 6, 3);
            let qos = QosSpec::uniform(3, 2e6, 0.1, &frame);
            let ctx = PowerContext { tensor: &t, corr: &corr, frame: &frame, qos: &qos, settings: &settings };
            let q = solve_power(PowerControl::Qopc, &a, &form, &ctx).unwrap();
            let s = solve_power(PowerControl::Slmdb, &a, &form, &ctx).unwrap();
            assert_eq!(q.feasible, s.feasible);
            if s.feasible {
                assert!(s.ee >= q.ee * (1.0 - 1e-12));
                for (r, rmin) in s.rates.rates.iter().zip(&qos.r_min_bps) {
                    assert!(*r >= rmin * (1.0 - 1e-6));
                }
                assert!(s.diagnostics.ee_trace.windows(2).all(|w| w[1] >= w[0]));
            }
            assert!(s.p.iter().all(|&v| (0.0..=0.1).contains(&v)));
        }
    }

    #[test]
    fn unserved_ue_with_demand_is_infeasible() {
        let frame = FrameConfig::default();
        let (mut a, t, corr, _) = drop_instance(3, 4, 2);
        for m in 0..4 {
            a.set(m, 1, false);
        }
        let form = PowerModel::new(&PowerConfig::defaults(), 4).unwrap().affine_form(&a).unwrap();
        let settings = SolverSettings::default();
        let qos = QosSpec::uniform(2, 1e6, 0.1, &frame);
        let ctx = PowerContext { tensor: &t, corr: &corr, frame: &frame, qos: &qos, settings: &settings };
        let s = solve_power(PowerControl::Slmdb, &a, &form, &ctx).unwrap();
        assert!(!s.feasible);
        assert_eq!(s.p[1], 0.0);
        let qos0 = QosSpec::uniform(2, 0.0, 0.1, &frame);
        let ctx0 = PowerContext { qos: &qos0, ..ctx };
        let s0 = solve_power(PowerControl::Slmdb, &a, &form, &ctx0).unwrap();
        assert!(s0.feasible);
        assert_eq!(s0.p[1], 0.0);
        assert_eq!(s0.rates.rates[1], 0.0);
    }
}

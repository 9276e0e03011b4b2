//! Instance builders and independent oracles shared by the integration tests.
#![allow(dead_code)]

use fdran_core::netmodel::{
    build_correlation, generate_topology, mmse_statistics, Association, CoefficientTensor, CorrelationSet, FrameConfig,
    ScenarioParams,
};
use fdran_core::powermodel::{ubs_power, AffinePowerForm, PowerConfig, PowerModel};
use fdran_core::powerctl::{PowerContext, QosSpec, SolverSettings};

pub struct Instance {
    pub params: ScenarioParams,
    pub frame: FrameConfig,
    pub corr: CorrelationSet,
    pub tensor: CoefficientTensor,
    pub power: PowerConfig,
    pub model: PowerModel,
    pub qos: QosSpec,
    pub settings: SolverSettings,
}

impl Instance {
    pub fn new(seed: u64, m: usize, k: usize, n: usize, l: usize, r_min: f64) -> Self {
        Self::with_area(seed, m, k, n, l, r_min, 500.0)
    }

    pub fn with_area(seed: u64, m: usize, k: usize, n: usize, l: usize, r_min: f64, area: f64) -> Self {
        let params = ScenarioParams { m, k, n, l, area_side: area, seed, ..Default::default() };
        let frame = FrameConfig::default();
        let topo = generate_topology(&params).unwrap();
        let corr = build_correlation(&topo, &frame).unwrap();
        let tensor = mmse_statistics(&corr, &frame).unwrap();
        let mut power = PowerConfig::defaults();
        power.bs.act_values.n = n as f64;
        let model = PowerModel::new(&power, m).unwrap();
        let qos = QosSpec::uniform(k, r_min, 0.1, &frame);
        Self { params, frame, corr, tensor, power, model, qos, settings: SolverSettings::default() }
    }

    pub fn ctx(&self) -> PowerContext<'_> {
        PowerContext {
            tensor: &self.tensor,
            corr: &self.corr,
            frame: &self.frame,
            qos: &self.qos,
            settings: &self.settings,
        }
    }

    pub fn form(&self, assoc: &Association) -> AffinePowerForm {
        self.model.affine_form(assoc).unwrap()
    }

    /// Each UE attached to its `l` strongest UBSs.
    pub fn strongest(&self, l: usize) -> Association {
        let (m, k) = (self.params.m, self.params.k);
        let mut a = Association::empty(m, k);
        for ue in 0..k {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| self.corr.beta(y, ue).total_cmp(&self.corr.beta(x, ue)));
            for &bs in order.iter().take(l) {
                a.set(bs, ue, true);
            }
        }
        a
    }
}

/// Rate of every UE written out from the SINR definition, independent of the
/// library's channel reduction.
pub fn direct_rates(p: &[f64], assoc: &Association, t: &CoefficientTensor, frame: &FrameConfig) -> Vec<f64> {
    let (m_n, k_n) = (assoc.num_ubs(), assoc.num_ue());
    (0..k_n)
        .map(|k| {
            let serving: Vec<usize> = (0..m_n).filter(|&m| assoc.get(m, k)).collect();
            if serving.is_empty() {
                return 0.0;
            }
            let ds: f64 = serving.iter().map(|&m| t.mu(m, k)).sum();
            let mut total = 0.0;
            for kp in 0..k_n {
                let mut is: f64 = serving.iter().map(|&m| t.omega(m, k, kp)).sum();
                if kp == k {
                    for &a in &serving {
                        for &b in &serving {
                            if a != b {
                                is += t.mu(a, k) * t.mu(b, k);
                            }
                        }
                    }
                }
                total += p[kp] * is;
            }
            let ns: f64 = serving.iter().map(|&m| t.noise_coeff(m, k)).sum();
            let sinr = p[k] * ds * ds / (total - p[k] * ds * ds + frame.noise_power_w * ns);
            frame.prelog() * (1.0 + sinr).log2()
        })
        .collect()
}

/// Network power evaluated consumer by consumer from the component tables,
/// with every UBS at its own load.
pub fn direct_network_power(p: &[f64], rates: &[f64], assoc: &Association, cfg: &PowerConfig) -> f64 {
    let (bs, sys) = (&cfg.bs, &cfg.system);
    let m_n = assoc.num_ubs();
    let k_n = assoc.num_ue();
    let div = bs.loss_divisor();
    let theta = sys.psi_d * bs.sectors * bs.bbu_power(1.0).unwrap() / div / ubs_power(bs, 1.0).unwrap();
    let kt = sys.kappa * theta;
    let mut per_ubs = vec![0.0; m_n];
    let mut total = 0.0;
    for m in 0..m_n {
        let active = (0..k_n).any(|k| assoc.get(m, k));
        let mut load = 0.0;
        for k in 0..k_n {
            if assoc.get(m, k) {
                let deg = (0..m_n).filter(|&j| assoc.get(j, k)).count() as f64;
                load += rates[k] / (deg * sys.r_ref_bps);
            }
        }
        let p_ubs = ubs_power(bs, load).unwrap();
        per_ubs[m] = p_ubs;
        total += if active {
            (1.0 - kt) * p_ubs
        } else {
            (1.0 - kt) * bs.sleep_scale * ubs_power(bs, 0.0).unwrap()
        };
        // fronthaul
        let fix = if active { sys.fronthaul_fix_w } else { 0.0 };
        total += fix + sys.fronthaul_trf_w_per_bps * rates.iter().sum::<f64>();
    }
    let mf = m_n as f64;
    let pool = sys.pooling_power / mf * (mf / (sys.pooling_capacity * sys.stacking_gain)).ceil();
    let cool = if bs.loss_co != 0.0 {
        sys.loss_co_ec / sys.cooling_gain + 1.0 - sys.loss_co_ec
    } else {
        sys.loss_co_ec / ((1.0 - sys.loss_co_ec) * sys.cooling_gain) + 1.0
    };
    total += kt * per_ubs.iter().sum::<f64>() * pool * cool;
    for k in 0..k_n {
        total += sys.ue_circuit_w + sys.ue_pa_slope * p[k];
    }
    total
}

/// EE from the direct oracles.
pub fn direct_ee(p: &[f64], assoc: &Association, inst: &Instance) -> f64 {
    let r = direct_rates(p, assoc, &inst.tensor, &inst.frame);
    r.iter().sum::<f64>() / direct_network_power(p, &r, assoc, &inst.power)
}

/// Best EE over `n + 1` evenly spaced powers of a single-UE instance,
/// restricted to powers meeting the rate requirement. `None` when no grid
/// point is feasible.
pub fn grid_search_k1(assoc: &Association, inst: &Instance, n: usize) -> Option<(f64, f64)> {
    let p_max = inst.qos.p_max_w;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..=n {
        let p = [p_max * i as f64 / n as f64];
        let r = direct_rates(&p, assoc, &inst.tensor, &inst.frame);
        if r[0] < inst.qos.r_min_bps[0] {
            continue;
        }
        let ee = r[0] / direct_network_power(&p, &r, assoc, &inst.power);
        if best.is_none_or(|(_, e)| ee > e) {
            best = Some((p[0], ee));
        }
    }
    best
}

/// Maximizes a unimodal function on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    while hi - lo > tol {
        if f(c) >= f(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - r * (hi - lo);
        d = lo + r * (hi - lo);
    }
    0.5 * (lo + hi)
}

pub fn report(name: &str, pass: bool, detail: impl std::fmt::Display) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}

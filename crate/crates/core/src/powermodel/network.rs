use serde::{Deserialize, Serialize};

use super::{ubs_power, BsPowerConfig};
use crate::error::{invalid, Error, Result};
use crate::netmodel::{uplink_rate, Association, CoefficientTensor, FrameConfig};

/// Fronthaul, edge-cloud and UE parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemPowerParams {
    pub fronthaul_fix_w: f64,
    pub fronthaul_trf_w_per_bps: f64,
    pub kappa: f64,
    pub psi_d: f64,
    pub stacking_gain: f64,
    pub pooling_capacity: f64,
    pub pooling_power: f64,
    pub cooling_gain: f64,
    pub loss_co_ec: f64,
    pub ue_circuit_w: f64,
    pub ue_pa_slope: f64,
    pub r_ref_bps: f64,
}

impl SystemPowerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(invalid("kappa", format!("must lie in (0, 1], got {}", self.kappa)));
        }
        if !(0.0..=1.0).contains(&self.psi_d) {
            return Err(invalid("psi_d", format!("must lie in [0, 1], got {}", self.psi_d)));
        }
        if !(self.ue_pa_slope >= 1.0) {
            return Err(invalid("ue_pa_slope", format!("must be at least 1, got {}", self.ue_pa_slope)));
        }
        if !(self.r_ref_bps > 0.0) {
            return Err(invalid("r_ref_bps", format!("must be positive, got {}", self.r_ref_bps)));
        }
        if !(self.stacking_gain > 0.0 && self.pooling_capacity > 0.0 && self.pooling_power > 0.0 && self.cooling_gain > 0.0) {
            return Err(invalid("edge_cloud", "stacking, pooling and cooling gains must be positive"));
        }
        if !(0.0..1.0).contains(&self.loss_co_ec) {
            return Err(invalid("loss_co_ec", format!("must lie in [0, 1), got {}", self.loss_co_ec)));
        }
        for (name, v) in [
            ("fronthaul_fix_w", self.fronthaul_fix_w),
            ("fronthaul_trf_w_per_bps", self.fronthaul_trf_w_per_bps),
            ("ue_circuit_w", self.ue_circuit_w),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Complete power configuration: per-UBS hardware plus system parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub bs: BsPowerConfig,
    pub system: SystemPowerParams,
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        self.bs.validate_affine()?;
        self.system.validate()
    }
}

/// Share of UBS power drawn by the offloadable part of the BBU, evaluated at
/// the reference operating point (load fraction 1).
///
/// UBSs are homogeneous, so the ratio does not depend on their number.
pub fn theta(cfg: &BsPowerConfig, params: &SystemPowerParams) -> Result<f64> {
    let total = ubs_power(cfg, 1.0)?;
    if !(total > 0.0) {
        return Err(Error::PowerConfig("UBS power at the reference load is zero".into()));
    }
    let bbu = params.psi_d * cfg.sectors * cfg.bbu_power(1.0)? / cfg.loss_divisor();
    Ok(bbu / total)
}

/// `η_s · P^UBS(Ld = 0) · (1 − κθ)`.
pub fn sleep_power(cfg: &BsPowerConfig, params: &SystemPowerParams) -> Result<f64> {
    let kt = params.kappa * theta(cfg, params)?;
    Ok(cfg.sleep_scale * ubs_power(cfg, 0.0)? * (1.0 - kt))
}

/// Stacking/pooling factor `ξ/M · ⌈M/(λζ)⌉`.
pub fn pooling_factor(params: &SystemPowerParams, m: usize) -> f64 {
    let m = m as f64;
    params.pooling_power / m * (m / (params.pooling_capacity * params.stacking_gain)).ceil()
}

/// Edge-cloud cooling multiplier; exceeds 1 when the UBSs have no cooling of
/// their own.
pub fn cooling_factor(cfg: &BsPowerConfig, params: &SystemPowerParams) -> f64 {
    let s = params.loss_co_ec;
    if cfg.loss_co != 0.0 {
        s / params.cooling_gain + 1.0 - s
    } else {
        s / ((1.0 - s) * params.cooling_gain) + 1.0
    }
}

/// Edge-cloud power from the unscaled per-UBS powers of all `M` UBSs.
pub fn edge_cloud_power(cfg: &BsPowerConfig, params: &SystemPowerParams, m: usize, per_ubs_powers: &[f64]) -> Result<f64> {
    if m == 0 || per_ubs_powers.len() != m {
        return Err(Error::Dimension(format!("expected {m} UBS powers, got {}", per_ubs_powers.len())));
    }
    let kt = params.kappa * theta(cfg, params)?;
    let base: f64 = per_ubs_powers.iter().sum();
    Ok(kt * base * pooling_factor(params, m) * cooling_factor(cfg, params))
}

/// Load fraction of every UBS: each UE's `R_k/R_ref` is split evenly over its
/// serving set, so the loads sum to `Σ_k R_k/R_ref` over served UEs.
pub fn ubs_loads(assoc: &Association, rates: &[f64], r_ref_bps: f64) -> Vec<f64> {
    let mut loads = vec![0.0; assoc.num_ubs()];
    for (k, &r) in rates.iter().enumerate() {
        let deg = assoc.ue_degree(k);
        if deg == 0 {
            continue;
        }
        let share = r / (deg as f64 * r_ref_bps);
        for m in assoc.serving(k) {
            loads[m] += share;
        }
    }
    loads
}

/// Scalar constants of the reduced power model for a fixed network size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub num_ubs: usize,
    /// Zero-load UBS power `P^{BS_fix}`, before the edge-cloud split.
    pub p_fix_w: f64,
    /// Load-proportional UBS power at load fraction 1.
    pub p_trf_w: f64,
    pub theta: f64,
    pub kappa_theta: f64,
    pub pooling: f64,
    pub cooling: f64,
    pub sleep_w: f64,
    pub fronthaul_fix_w: f64,
    pub fronthaul_trf_w_per_bps: f64,
    pub ue_circuit_w: f64,
    pub ue_pa_slope: f64,
    pub r_ref_bps: f64,
}

impl PowerModel {
    pub fn new(cfg: &PowerConfig, m: usize) -> Result<Self> {
        cfg.validate()?;
        if m == 0 {
            return Err(invalid("M", "at least one UBS is required"));
        }
        let (bs, sys) = (&cfg.bs, &cfg.system);
        let p_fix = ubs_power(bs, 0.0)?;
        let p_trf = ubs_power(bs, 1.0)? - p_fix;
        let th = theta(bs, sys)?;
        let kt = sys.kappa * th;
        Ok(Self {
            num_ubs: m,
            p_fix_w: p_fix,
            p_trf_w: p_trf,
            theta: th,
            kappa_theta: kt,
            pooling: pooling_factor(sys, m),
            cooling: cooling_factor(bs, sys),
            sleep_w: sleep_power(bs, sys)?,
            fronthaul_fix_w: sys.fronthaul_fix_w,
            fronthaul_trf_w_per_bps: sys.fronthaul_trf_w_per_bps,
            ue_circuit_w: sys.ue_circuit_w,
            ue_pa_slope: sys.ue_pa_slope,
            r_ref_bps: sys.r_ref_bps,
        })
    }

    fn edge_scale(&self) -> f64 {
        self.kappa_theta * self.pooling * self.cooling
    }

    /// Per-UE rate coefficient, watts per unit of `R_k/R_ref`.
    pub fn alpha(&self) -> f64 {
        (1.0 - self.kappa_theta) * self.p_trf_w
            + self.num_ubs as f64 * self.fronthaul_trf_w_per_bps * self.r_ref_bps
            + self.edge_scale() * self.p_trf_w
    }

    /// Constant term for `active` awake UBSs and `k` UEs.
    pub fn constant(&self, active: usize, k: usize) -> f64 {
        let m = self.num_ubs as f64;
        let a = active as f64;
        (1.0 - self.kappa_theta) * a * self.p_fix_w
            + (m - a) * self.sleep_w
            + a * self.fronthaul_fix_w
            + self.edge_scale() * m * self.p_fix_w
            + k as f64 * self.ue_circuit_w
    }

    pub fn affine_form(&self, assoc: &Association) -> Result<AffinePowerForm> {
        if assoc.num_ubs() != self.num_ubs {
            return Err(Error::Dimension(format!(
                "association has {} UBSs, power model {}",
                assoc.num_ubs(),
                self.num_ubs
            )));
        }
        self.affine_form_with_active(assoc, assoc.active_count())
    }

    /// Affine form with `active` UBSs kept awake, at least the ones serving
    /// a UE. Used when sleeping is disabled.
    pub fn affine_form_with_active(&self, assoc: &Association, active: usize) -> Result<AffinePowerForm> {
        if assoc.num_ubs() != self.num_ubs {
            return Err(Error::Dimension(format!(
                "association has {} UBSs, power model {}",
                assoc.num_ubs(),
                self.num_ubs
            )));
        }
        if active < assoc.active_count() || active > self.num_ubs {
            return Err(invalid("active", format!("{active} awake UBSs is outside [{}, {}]", assoc.active_count(), self.num_ubs)));
        }
        let k = assoc.num_ue();
        Ok(AffinePowerForm {
            c0_w: self.constant(active, k),
            alpha_per_k: vec![self.alpha(); k],
            delta_per_k: vec![self.ue_pa_slope; k],
            r_ref_bps: self.r_ref_bps,
            active,
            model: self.clone(),
        })
    }
}

/// `P_N = c0 + Σ_k α_k R_k/R_ref + Σ_k δ_k P_k` for one association.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePowerForm {
    pub c0_w: f64,
    pub alpha_per_k: Vec<f64>,
    pub delta_per_k: Vec<f64>,
    pub r_ref_bps: f64,
    active: usize,
    model: PowerModel,
}

impl AffinePowerForm {
    pub fn num_ue(&self) -> usize {
        self.alpha_per_k.len()
    }

    pub fn active_count(&self) -> usize {
        self.active
    }

    pub fn model(&self) -> &PowerModel {
        &self.model
    }

    /// Slope of `P_N` in `R_k`, watts per bit/s.
    pub fn rate_slope(&self, k: usize) -> f64 {
        self.alpha_per_k[k] / self.r_ref_bps
    }

    pub fn total(&self, p: &[f64], rates: &[f64]) -> f64 {
        let mut t = self.c0_w;
        for k in 0..self.num_ue() {
            t += self.alpha_per_k[k] * rates[k] / self.r_ref_bps + self.delta_per_k[k] * p[k];
        }
        t
    }
}

/// Convenience wrapper building the model and the form in one step.
pub fn build_affine_form(assoc: &Association, cfg: &PowerConfig) -> Result<AffinePowerForm> {
    PowerModel::new(cfg, assoc.num_ubs())?.affine_form(assoc)
}

/// Network power split by consumer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    pub ubs_active_w: f64,
    pub ubs_sleep_w: f64,
    pub fronthaul_w: f64,
    pub edge_cloud_w: f64,
    pub ue_w: f64,
    pub total_w: f64,
}

pub fn network_power(p: &[f64], rates: &[f64], assoc: &Association, form: &AffinePowerForm) -> Result<PowerBreakdown> {
    let k = form.num_ue();
    if p.len() != k || rates.len() != k || assoc.num_ue() != k {
        return Err(Error::Dimension(format!("power model is built for {k} UEs")));
    }
    if assoc.active_count() > form.active {
        return Err(Error::Dimension("association does not match the affine form".into()));
    }
    let md = &form.model;
    let m = md.num_ubs as f64;
    let a = form.active as f64;
    let load: f64 = rates.iter().sum::<f64>() / md.r_ref_bps;
    let ubs_active_w = (1.0 - md.kappa_theta) * (a * md.p_fix_w + md.p_trf_w * load);
    let ubs_sleep_w = (m - a) * md.sleep_w;
    let fronthaul_w = a * md.fronthaul_fix_w + m * md.fronthaul_trf_w_per_bps * rates.iter().sum::<f64>();
    let edge_cloud_w = md.edge_scale() * (m * md.p_fix_w + md.p_trf_w * load);
    let ue_w = (0..k).map(|i| md.ue_circuit_w + form.delta_per_k[i] * p[i]).sum();
    Ok(PowerBreakdown {
        ubs_active_w,
        ubs_sleep_w,
        fronthaul_w,
        edge_cloud_w,
        ue_w,
        total_w: ubs_active_w + ubs_sleep_w + fronthaul_w + edge_cloud_w + ue_w,
    })
}

/// `Σ_k R_k / P_N`, bit/J.
pub fn energy_efficiency(
    p: &[f64],
    assoc: &Association,
    tensor: &CoefficientTensor,
    frame: &FrameConfig,
    form: &AffinePowerForm,
) -> Result<f64> {
    let rates = uplink_rate(p, assoc, tensor, frame)?;
    let pn = form.total(p, &rates.rates);
    if !(pn > 0.0) {
        return Err(Error::PowerConfig(format!("network power is {pn} W")));
    }
    Ok(rates.sum() / pn)
}

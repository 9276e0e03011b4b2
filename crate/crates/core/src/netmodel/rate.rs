use serde::{Deserialize, Serialize};

use super::{Association, CoefficientTensor, FrameConfig};
use crate::error::{Error, Result};

/// Association-specific expectations entering the SINR of every UE.
///
/// * `ds[k]  = E{DS_k} = Σ_m S[m,k] μ[m,k]`
/// * `is[k][k'] = E{|IS_{k,k'}|²}`; the diagonal carries the cross-UBS terms
///   `Σ_{m≠m'} μ μ'`, which vanish off the diagonal by independence
/// * `ns[k]  = E{NS_k} = Σ_m S[m,k] E{‖v[m,k]‖²}`
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    k: usize,
    ds: Vec<f64>,
    is: Vec<f64>,
    ns: Vec<f64>,
    served: Vec<bool>,
}

impl EffectiveChannel {
    pub fn new(assoc: &Association, tensor: &CoefficientTensor) -> Result<Self> {
        if assoc.num_ubs() != tensor.num_ubs() || assoc.num_ue() != tensor.num_ue() {
            return Err(Error::Dimension(format!(
                "association is {}x{}, tensor is {}x{}",
                assoc.num_ubs(),
                assoc.num_ue(),
                tensor.num_ubs(),
                tensor.num_ue()
            )));
        }
        let k_n = assoc.num_ue();
        let mut ds = vec![0.0; k_n];
        let mut is = vec![0.0; k_n * k_n];
        let mut ns = vec![0.0; k_n];
        let mut served = vec![false; k_n];
        for k in 0..k_n {
            let mut sum_mu_sq = 0.0;
            for m in assoc.serving(k) {
                served[k] = true;
                let mu = tensor.mu(m, k);
                ds[k] += mu;
                sum_mu_sq += mu * mu;
                ns[k] += tensor.noise_coeff(m, k);
                for kp in 0..k_n {
                    is[k * k_n + kp] += tensor.omega(m, k, kp);
                }
            }
            is[k * k_n + k] += ds[k] * ds[k] - sum_mu_sq;
        }
        Ok(Self { k: k_n, ds, is, ns, served })
    }

    /// Builds a channel directly from its expectations (tests, synthetic
    /// instances). A UE counts as served when `ns[k] > 0`.
    pub fn from_parts(ds: Vec<f64>, is: Vec<f64>, ns: Vec<f64>) -> Result<Self> {
        let k = ds.len();
        if is.len() != k * k || ns.len() != k {
            return Err(Error::Dimension("effective channel parts disagree on K".into()));
        }
        let served = ns.iter().map(|&v| v > 0.0).collect();
        Ok(Self { k, ds, is, ns, served })
    }

    pub fn num_ue(&self) -> usize {
        self.k
    }

    pub fn ds(&self, k: usize) -> f64 {
        self.ds[k]
    }

    /// `|E{DS_k}|²`.
    pub fn ds_sq(&self, k: usize) -> f64 {
        self.ds[k] * self.ds[k]
    }

    pub fn is(&self, k: usize, kp: usize) -> f64 {
        self.is[k * self.k + kp]
    }

    pub fn ns(&self, k: usize) -> f64 {
        self.ns[k]
    }

    /// UE has a non-empty serving set.
    pub fn is_served(&self, k: usize) -> bool {
        self.served[k]
    }

    /// `Σ_k' P_k' E{|IS_{k,k'}|²} + σ² E{NS_k}`: received power including the
    /// UE's own signal.
    pub fn total_received(&self, k: usize, p: &[f64], noise: f64) -> f64 {
        let row = &self.is[k * self.k..(k + 1) * self.k];
        row.iter().zip(p).map(|(c, q)| c * q).sum::<f64>() + noise * self.ns[k]
    }

    /// Interference-plus-noise seen by UE `k`.
    pub fn interference(&self, k: usize, p: &[f64], noise: f64) -> f64 {
        self.total_received(k, p, noise) - p[k] * self.ds_sq(k)
    }
}

/// Per-UE uplink rates, bit/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVector {
    pub rates: Vec<f64>,
}

impl RateVector {
    pub fn sum(&self) -> f64 {
        self.rates.iter().sum()
    }
}

fn check_powers(p: &[f64], k: usize) -> Result<()> {
    if p.len() != k {
        return Err(Error::Dimension(format!("power vector has {} entries, expected {k}", p.len())));
    }
    if let Some((ue, &value)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativePower { ue, value });
    }
    Ok(())
}

/// SINR of every UE for an already-reduced channel.
pub fn sinr_effective(p: &[f64], ch: &EffectiveChannel, noise: f64) -> Result<Vec<f64>> {
    check_powers(p, ch.num_ue())?;
    Ok((0..ch.num_ue())
        .map(|k| {
            if !ch.is_served(k) {
                return 0.0;
            }
            let signal = p[k] * ch.ds_sq(k);
            if signal == 0.0 {
                return 0.0;
            }
            signal / ch.interference(k, p, noise)
        })
        .collect())
}

/// SINR of every UE under use-and-then-forget bounding.
pub fn sinr(p: &[f64], assoc: &Association, tensor: &CoefficientTensor, frame: &FrameConfig) -> Result<Vec<f64>> {
    let ch = EffectiveChannel::new(assoc, tensor)?;
    sinr_effective(p, &ch, frame.noise_power_w)
}

pub fn rate_from_sinr(sinr: f64, frame: &FrameConfig) -> f64 {
    frame.prelog() * (1.0 + sinr).log2()
}

pub fn uplink_rate_effective(p: &[f64], ch: &EffectiveChannel, frame: &FrameConfig) -> Result<RateVector> {
    let s = sinr_effective(p, ch, frame.noise_power_w)?;
    Ok(RateVector {
        rates: s.into_iter().map(|v| rate_from_sinr(v, frame)).collect(),
    })
}

/// `R_k = (τ_u/τ_c) B log2(1 + SINR_k)`.
pub fn uplink_rate(p: &[f64], assoc: &Association, tensor: &CoefficientTensor, frame: &FrameConfig) -> Result<RateVector> {
    let ch = EffectiveChannel::new(assoc, tensor)?;
    uplink_rate_effective(p, &ch, frame)
}

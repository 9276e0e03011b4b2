use std::f64::consts::LN_2;

use super::QosSpec;
use crate::error::{Error, Result};
use crate::netmodel::{Association, CoefficientTensor, EffectiveChannel, FrameConfig};

/// Expansion point `P⁽ⁿ⁾` of the rate bounds with its cached denominators.
///
/// For UE `k`, `f_k = log2(Σ_k' P_k' E|IS_kk'|² + σ²E{NS_k})` and
/// `g_k = f_k`'s argument minus the desired-signal term; `R = c(f − g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogatePoint {
    pub p_anchor: Vec<f64>,
    /// `ln 2 · I_k(P⁽ⁿ⁾)`.
    pub f_den: Vec<f64>,
    /// `ln 2 · J_k(P⁽ⁿ⁾)`.
    pub g_den: Vec<f64>,
    ch: EffectiveChannel,
    noise: f64,
    prelog: f64,
}

impl SurrogatePoint {
    pub fn new(p_anchor: &[f64], assoc: &Association, tensor: &CoefficientTensor, frame: &FrameConfig) -> Result<Self> {
        let ch = EffectiveChannel::new(assoc, tensor)?;
        Self::from_channel(p_anchor, ch, frame)
    }

    pub fn from_channel(p_anchor: &[f64], ch: EffectiveChannel, frame: &FrameConfig) -> Result<Self> {
        if p_anchor.len() != ch.num_ue() {
            return Err(Error::Dimension("anchor length differs from K".into()));
        }
        if let Some((ue, &value)) = p_anchor.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativePower { ue, value });
        }
        let noise = frame.noise_power_w;
        let f_den = (0..ch.num_ue()).map(|k| LN_2 * ch.total_received(k, p_anchor, noise)).collect();
        let g_den = (0..ch.num_ue()).map(|k| LN_2 * ch.interference(k, p_anchor, noise)).collect();
        Ok(Self {
            p_anchor: p_anchor.to_vec(),
            f_den,
            g_den,
            ch,
            noise,
            prelog: frame.prelog(),
        })
    }

    fn f(&self, k: usize, p: &[f64]) -> f64 {
        self.ch.total_received(k, p, self.noise).log2()
    }

    fn g(&self, k: usize, p: &[f64]) -> f64 {
        self.ch.interference(k, p, self.noise).log2()
    }

    fn f_hat(&self, k: usize, p: &[f64]) -> f64 {
        let lin: f64 = (0..p.len()).map(|j| self.ch.is(k, j) * (p[j] - self.p_anchor[j])).sum();
        self.f(k, &self.p_anchor) + lin / self.f_den[k]
    }

    fn g_hat(&self, k: usize, p: &[f64]) -> f64 {
        let lin: f64 = (0..p.len()).map(|j| self.ch.is(k, j) * (p[j] - self.p_anchor[j])).sum::<f64>()
            - self.ch.ds_sq(k) * (p[k] - self.p_anchor[k]);
        self.g(k, &self.p_anchor) + lin / self.g_den[k]
    }

    /// `(R̂, R̄)` at `p`; unserved UEs get zero in both.
    pub fn bounds(&self, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k_n = self.ch.num_ue();
        let mut hat = vec![0.0; k_n];
        let mut bar = vec![0.0; k_n];
        for k in (0..k_n).filter(|&k| self.ch.is_served(k)) {
            hat[k] = self.prelog * (self.f_hat(k, p) - self.g(k, p));
            bar[k] = self.prelog * (self.f(k, p) - self.g_hat(k, p));
        }
        (hat, bar)
    }
}

/// Rate bounds `(R̂, R̄)` around `anchor`: `R̄ ≤ R ≤ R̂` with equality at the
/// anchor.
pub fn taylor_bounds(p: &[f64], anchor: &SurrogatePoint) -> Result<(Vec<f64>, Vec<f64>)> {
    if p.len() != anchor.p_anchor.len() {
        return Err(Error::Dimension("power vector length differs from anchor".into()));
    }
    if let Some((ue, &value)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativePower { ue, value });
    }
    Ok(anchor.bounds(p))
}

/// `r_k(P) = γ_k(Σ_k' P_k' E|IS_kk'|² + σ²E{NS_k}) − (1+γ_k) P_k |E{DS_k}|²`.
///
/// An unserved UE with a positive requirement gets `+∞`; one without gets 0.
pub fn qos_residual(
    p: &[f64],
    assoc: &Association,
    tensor: &CoefficientTensor,
    frame: &FrameConfig,
    qos: &QosSpec,
) -> Result<Vec<f64>> {
    let ch = EffectiveChannel::new(assoc, tensor)?;
    if p.len() != ch.num_ue() || qos.gamma.len() != ch.num_ue() {
        return Err(Error::Dimension("QoS inputs disagree on K".into()));
    }
    if let Some((ue, &value)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativePower { ue, value });
    }
    Ok((0..ch.num_ue())
        .map(|k| {
            let g = qos.gamma[k];
            if !ch.is_served(k) {
                return if g > 0.0 { f64::INFINITY } else { 0.0 };
            }
            g * ch.total_received(k, p, frame.noise_power_w) - (1.0 + g) * p[k] * ch.ds_sq(k)
        })
        .collect())
}

//! Power-control problem for one association, in normalized coordinates.
//!
//! Only UEs with a non-empty serving set carry a variable `x_k = P_k/P_max`.
//! Every SINR row is divided by the UE's noise term `σ² E{NS_k}`, so that
//! `Ĩ_k(x) = 1 + b̃_k·x` is the normalized received power and
//! `J̃_k(x) = Ĩ_k(x) − ã_k x_k` the normalized interference-plus-noise.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use super::QosSpec;
use crate::error::{Error, Result};
use crate::netmodel::{EffectiveChannel, FrameConfig};
use crate::powermodel::AffinePowerForm;

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub k_all: usize,
    /// Served UEs, ascending.
    pub idx: Vec<usize>,
    pub a: Vec<f64>,
    pub b: DMatrix<f64>,
    pub gamma: Vec<f64>,
    /// An unserved UE has a positive rate requirement.
    pub unserved_demand: bool,
    pub p_max: f64,
    pub prelog: f64,
    pub c0: f64,
    /// `P_N` slope in each served UE's rate, W per bit/s.
    pub rate_slope: Vec<f64>,
    /// `P_N` slope in each served UE's normalized power, W.
    pub power_slope: Vec<f64>,
}

impl Problem {
    /// Channel and QoS part only; the power model is zero until
    /// [`Problem::with_power`] is applied.
    pub fn new(ch: &EffectiveChannel, frame: &FrameConfig, qos: &QosSpec) -> Result<Self> {
        let k_all = ch.num_ue();
        if qos.gamma.len() != k_all {
            return Err(Error::Dimension(format!("power control inputs disagree on K = {k_all}")));
        }
        let idx: Vec<usize> = (0..k_all).filter(|&k| ch.is_served(k)).collect();
        let n = idx.len();
        let p_max = qos.p_max_w;
        let mut a = Vec::with_capacity(n);
        let mut b = DMatrix::zeros(n, n);
        for (i, &k) in idx.iter().enumerate() {
            let noise = frame.noise_power_w * ch.ns(k);
            a.push(ch.ds_sq(k) * p_max / noise);
            for (j, &kp) in idx.iter().enumerate() {
                b[(i, j)] = ch.is(k, kp) * p_max / noise;
            }
        }
        let unserved_demand = (0..k_all).any(|k| !ch.is_served(k) && qos.gamma[k] > 0.0);
        Ok(Self {
            k_all,
            gamma: idx.iter().map(|&k| qos.gamma[k]).collect(),
            rate_slope: vec![0.0; n],
            power_slope: vec![0.0; n],
            idx,
            a,
            b,
            unserved_demand,
            p_max,
            prelog: frame.prelog(),
            c0: 0.0,
        })
    }

    pub fn with_power(mut self, form: &AffinePowerForm) -> Result<Self> {
        if form.num_ue() != self.k_all {
            return Err(Error::Dimension(format!("power form has {} UEs, expected {}", form.num_ue(), self.k_all)));
        }
        self.c0 = form.c0_w;
        self.rate_slope = self.idx.iter().map(|&k| form.rate_slope(k)).collect();
        self.power_slope = self.idx.iter().map(|&k| form.delta_per_k[k] * self.p_max).collect();
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.idx.len()
    }

    pub fn to_powers(&self, x: &DVector<f64>) -> Vec<f64> {
        let mut p = vec![0.0; self.k_all];
        for (i, &k) in self.idx.iter().enumerate() {
            p[k] = (x[i] * self.p_max).clamp(0.0, self.p_max);
        }
        p
    }

    pub fn from_powers(&self, p: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.idx.iter().map(|&k| p[k] / self.p_max))
    }

    pub fn i_tilde(&self, i: usize, x: &DVector<f64>) -> f64 {
        1.0 + self.b.row(i).dot(&x.transpose())
    }

    pub fn j_tilde(&self, i: usize, x: &DVector<f64>) -> f64 {
        self.i_tilde(i, x) - self.a[i] * x[i]
    }

    /// Rates of the served UEs, bit/s.
    pub fn rates(&self, x: &DVector<f64>) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.prelog * (self.i_tilde(i, x) / self.j_tilde(i, x)).log2())
            .collect()
    }

    /// `P_N` for given normalized powers and served-UE rates.
    pub fn network_power(&self, x: &DVector<f64>, rates: &[f64]) -> f64 {
        let mut t = self.c0;
        for i in 0..self.dim() {
            t += self.rate_slope[i] * rates[i] + self.power_slope[i] * x[i];
        }
        t
    }

    pub fn ee(&self, x: &DVector<f64>) -> f64 {
        let r = self.rates(x);
        r.iter().sum::<f64>() / self.network_power(x, &r)
    }

    /// QoS rows `γ(1 + b̃·x) − (1+γ) ã x_k`, each divided by a row scale so
    /// that entries are of order one.
    pub fn qos_rows(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        let mut h = DVector::zeros(n);
        for i in 0..n {
            let gam = self.gamma[i];
            let scale = gam * (1.0 + self.b.row(i).sum()) + (1.0 + gam) * self.a[i];
            for j in 0..n {
                g[(i, j)] = gam * self.b[(i, j)] / scale;
            }
            g[(i, i)] -= (1.0 + gam) * self.a[i] / scale;
            h[i] = -gam / scale;
        }
        (g, h)
    }

    /// Normalized residual `ρ_k(x)`; nonpositive exactly when the UE meets its
    /// rate requirement.
    pub fn qos_residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let (g, h) = self.qos_rows();
        &g * x - h
    }
}

/// First-order expansion point of the surrogate rate bounds.
#[derive(Debug, Clone)]
pub(crate) struct Surrogate {
    pub x0: DVector<f64>,
    pub i0: Vec<f64>,
    pub j0: Vec<f64>,
}

impl Surrogate {
    pub fn new(pb: &Problem, x0: &DVector<f64>) -> Self {
        let n = pb.dim();
        Self {
            x0: x0.clone(),
            i0: (0..n).map(|i| pb.i_tilde(i, x0)).collect(),
            j0: (0..n).map(|i| pb.j_tilde(i, x0)).collect(),
        }
    }

    fn f_hat(&self, pb: &Problem, i: usize, x: &DVector<f64>) -> f64 {
        let d = x - &self.x0;
        self.i0[i].log2() + pb.b.row(i).dot(&d.transpose()) / (LN_2 * self.i0[i])
    }

    fn g_hat(&self, pb: &Problem, i: usize, x: &DVector<f64>) -> f64 {
        let d = x - &self.x0;
        let lin = pb.b.row(i).dot(&d.transpose()) - pb.a[i] * d[i];
        self.j0[i].log2() + lin / (LN_2 * self.j0[i])
    }

    /// Upper bound `R̂` on the served-UE rates.
    pub fn r_hat(&self, pb: &Problem, x: &DVector<f64>) -> Vec<f64> {
        (0..pb.dim())
            .map(|i| pb.prelog * (self.f_hat(pb, i, x) - pb.j_tilde(i, x).log2()))
            .collect()
    }

    /// Lower bound `R̄` on the served-UE rates.
    pub fn r_bar(&self, pb: &Problem, x: &DVector<f64>) -> Vec<f64> {
        (0..pb.dim())
            .map(|i| pb.prelog * (pb.i_tilde(i, x).log2() - self.g_hat(pb, i, x)))
            .collect()
    }

    /// Numerator `Σ R̄` and denominator `P_N(R̂)` of the surrogate ratio.
    pub fn ratio_parts(&self, pb: &Problem, x: &DVector<f64>) -> (f64, f64) {
        let num = self.r_bar(pb, x).iter().sum();
        let den = pb.network_power(x, &self.r_hat(pb, x));
        (num, den)
    }

    pub fn ratio(&self, pb: &Problem, x: &DVector<f64>) -> f64 {
        let (n, d) = self.ratio_parts(pb, x);
        n / d
    }

    /// Analytic gradient of the surrogate ratio in normalized coordinates.
    #[cfg(test)]
    pub fn ratio_gradient(&self, pb: &Problem, x: &DVector<f64>) -> DVector<f64> {
        let n = pb.dim();
        let (num, den) = self.ratio_parts(pb, x);
        let mut gn = DVector::zeros(n);
        let mut gd = DVector::from_vec(pb.power_slope.clone());
        for i in 0..n {
            let bi = pb.b.row(i).transpose();
            let mut v = bi.clone();
            v[i] -= pb.a[i];
            let ii = pb.i_tilde(i, x);
            let jj = pb.j_tilde(i, x);
            // ∇R̄ = c (b/(ln2 Ĩ) − v/(ln2 J̃0)),  ∇R̂ = c (b/(ln2 Ĩ0) − v/(ln2 J̃))
            gn += pb.prelog / LN_2 * (&bi / ii - &v / self.j0[i]);
            gd += pb.rate_slope[i] * pb.prelog / LN_2 * (&bi / self.i0[i] - &v / jj);
        }
        (gn * den - gd * num) / (den * den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Association, CoefficientTensor};
    use crate::powermodel::{PowerConfig, PowerModel};

    fn instance() -> (Problem, FrameConfig) {
        let frame = FrameConfig::default();
        let t = CoefficientTensor::from_parts(
            2,
            2,
            vec![3e-5, 1e-5, 2e-5, 4e-5],
            vec![1.2e-9, 2e-11, 3e-11, 1.1e-10, 5e-10, 4e-11, 1e-11, 1.7e-9],
            vec![1.0; 4],
        )
        .unwrap();
        let assoc = Association::from_rows(&[vec![1, 0], vec![1, 1]]).unwrap();
        let ch = EffectiveChannel::new(&assoc, &t).unwrap();
        let form = PowerModel::new(&PowerConfig::defaults(), 2).unwrap().affine_form(&assoc).unwrap();
        let qos = QosSpec::uniform(2, 1e6, 0.1, &frame);
        (Problem::new(&ch, &frame, &qos).unwrap().with_power(&form).unwrap(), frame)
    }

    #[test]
    fn surrogate_gradient_matches_finite_differences() {
        let (pb, _) = instance();
        let x0 = DVector::from_vec(vec![0.3, 0.6]);
        let sur = Surrogate::new(&pb, &x0);
        let x = DVector::from_vec(vec![0.45, 0.2]);
        let g = sur.ratio_gradient(&pb, &x);
        for j in 0..2 {
            let h = 1e-6;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (sur.ratio(&pb, &xp) - sur.ratio(&pb, &xm)) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * g.amax(), "{fd} vs {}", g[j]);
        }
    }

    #[test]
    fn bounds_touch_at_anchor() {
        let (pb, _) = instance();
        let x0 = DVector::from_vec(vec![0.7, 0.1]);
        let sur = Surrogate::new(&pb, &x0);
        let r = pb.rates(&x0);
        for (a, b) in sur.r_hat(&pb, &x0).iter().zip(&r) {
            assert!((a - b).abs() <= 1e-10 * b);
        }
        for (a, b) in sur.r_bar(&pb, &x0).iter().zip(&r) {
            assert!((a - b).abs() <= 1e-10 * b);
        }
    }
}

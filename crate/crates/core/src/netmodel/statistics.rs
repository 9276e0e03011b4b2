//! Ergodic expectations of the desired-signal, interference and noise terms
//! under MMSE channel estimation and normalized maximum-ratio combining.
//!
//! With orthogonal pilots the estimate of `h[m,k]` is `ĥ = sqrt(p τ_p) R Ψ⁻¹ y`
//! with `Ψ = p τ_p R + σ² I`, and `ĥ ~ CN(0, Φ)`, `Φ = p τ_p R Ψ⁻¹ R`. The
//! combiner `v = ĥ / sqrt(tr Φ)` then yields
//!
//! ```text
//! μ[m,k]       = E{vᴴ h[m,k]}      = sqrt(tr Φ)
//! ω[m,k,k']    = E{|vᴴ h[m,k']|²}  = tr(R[m,k'] Φ) / tr Φ           (k' ≠ k)
//! ω[m,k,k]                         = tr Φ + tr(R[m,k] Φ) / tr Φ
//! E{‖v‖²}                          = 1
//! ```

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::correlation::{CMatrix, CorrelationSet, C64};
use super::FrameConfig;
use crate::error::{Error, Result};

/// Precomputed `μ`, `ω` and noise coefficients for every link.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    m: usize,
    k: usize,
    mu: Vec<f64>,
    omega: Vec<f64>,
    noise: Vec<f64>,
}

impl CoefficientTensor {
    /// Builds a tensor from raw arrays: `mu` and `noise` indexed `m*K + k`,
    /// `omega` indexed `(m*K + k)*K + k'`.
    pub fn from_parts(m: usize, k: usize, mu: Vec<f64>, omega: Vec<f64>, noise: Vec<f64>) -> Result<Self> {
        if mu.len() != m * k || noise.len() != m * k || omega.len() != m * k * k {
            return Err(Error::Dimension(format!(
                "tensor parts have lengths mu={}, omega={}, noise={} for M={m}, K={k}",
                mu.len(),
                omega.len(),
                noise.len()
            )));
        }
        if mu.iter().chain(&omega).chain(&noise).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Dimension("tensor entries must be finite and non-negative".into()));
        }
        Ok(Self { m, k, mu, omega, noise })
    }

    pub fn num_ubs(&self) -> usize {
        self.m
    }

    pub fn num_ue(&self) -> usize {
        self.k
    }

    pub fn mu(&self, m: usize, k: usize) -> f64 {
        self.mu[m * self.k + k]
    }

    pub fn omega(&self, m: usize, k: usize, kp: usize) -> f64 {
        self.omega[(m * self.k + k) * self.k + kp]
    }

    pub fn noise_coeff(&self, m: usize, k: usize) -> f64 {
        self.noise[m * self.k + k]
    }

    pub fn mu_slice(&self) -> &[f64] {
        &self.mu
    }

    pub fn omega_slice(&self) -> &[f64] {
        &self.omega
    }

    pub fn noise_slice(&self) -> &[f64] {
        &self.noise
    }
}

fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Orthogonal pilots are assumed; `K > tau_p` is rejected.
fn check_pilots(corr: &CorrelationSet, frame: &FrameConfig) -> Result<()> {
    frame.validate()?;
    if corr.num_ue() > frame.tau_p {
        return Err(crate::error::invalid(
            "tau_p",
            format!("orthogonal pilots need K <= tau_p (K={}, tau_p={})", corr.num_ue(), frame.tau_p),
        ));
    }
    Ok(())
}

/// Estimate covariance `Φ = p τ_p R Ψ⁻¹ R` of one link.
fn estimate_covariance(r: &CMatrix, frame: &FrameConfig) -> Result<CMatrix> {
    let n = r.nrows();
    let gain = frame.pilot_power_w * frame.tau_p as f64;
    let psi = r * C64::new(gain, 0.0) + CMatrix::identity(n, n) * C64::new(frame.noise_power_w, 0.0);
    let chol = Cholesky::new(psi).ok_or_else(|| Error::Singular("pilot observation covariance".into()))?;
    Ok(r * chol.solve(r) * C64::new(gain, 0.0))
}

/// Closed-form coefficient tensor.
pub fn mmse_statistics(corr: &CorrelationSet, frame: &FrameConfig) -> Result<CoefficientTensor> {
    check_pilots(corr, frame)?;
    let (m_n, k_n) = (corr.num_ubs(), corr.num_ue());
    let mut mu = vec![0.0; m_n * k_n];
    let mut omega = vec![0.0; m_n * k_n * k_n];
    for m in 0..m_n {
        for k in 0..k_n {
            let phi = estimate_covariance(corr.r(m, k), frame)?;
            let tr_phi = trace_re(&phi);
            if tr_phi <= 0.0 {
                // no pilot energy: the combiner vanishes
                continue;
            }
            mu[m * k_n + k] = tr_phi.sqrt();
            for kp in 0..k_n {
                let cross = trace_re(&(corr.r(m, kp) * &phi)).max(0.0) / tr_phi;
                omega[(m * k_n + k) * k_n + kp] = if kp == k { tr_phi + cross } else { cross };
            }
        }
    }
    CoefficientTensor::from_parts(m_n, k_n, mu, omega, vec![1.0; m_n * k_n])
}

/// Monte Carlo estimate of the tensor together with delta-method standard
/// errors of every entry.
#[derive(Debug, Clone)]
pub struct MonteCarloStatistics {
    pub tensor: CoefficientTensor,
    pub mu_se: Vec<f64>,
    pub omega_se: Vec<f64>,
    pub noise_se: Vec<f64>,
    pub samples: usize,
}

/// Samples per independently seeded chunk.
const CHUNK: usize = 4096;

/// Running sums for one chunk; layout mirrors [`CoefficientTensor`].
#[derive(Clone)]
struct Sums {
    // per link: x = Re(ĥᴴh), y = ‖ĥ‖²
    sx: Vec<f64>,
    sxx: Vec<f64>,
    sy: Vec<f64>,
    syy: Vec<f64>,
    sxy: Vec<f64>,
    // per (link, k'): z = |ĥᴴ h[m,k']|²
    sz: Vec<f64>,
    szz: Vec<f64>,
    szy: Vec<f64>,
}

impl Sums {
    fn new(links: usize, k: usize) -> Self {
        Self {
            sx: vec![0.0; links],
            sxx: vec![0.0; links],
            sy: vec![0.0; links],
            syy: vec![0.0; links],
            sxy: vec![0.0; links],
            sz: vec![0.0; links * k],
            szz: vec![0.0; links * k],
            szy: vec![0.0; links * k],
        }
    }

    fn add(&mut self, other: &Sums) {
        let pairs = [
            (&mut self.sx, &other.sx),
            (&mut self.sxx, &other.sxx),
            (&mut self.sy, &other.sy),
            (&mut self.syy, &other.syy),
            (&mut self.sxy, &other.sxy),
            (&mut self.sz, &other.sz),
            (&mut self.szz, &other.szz),
            (&mut self.szy, &other.szy),
        ];
        for (a, b) in pairs {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

/// Hermitian square root through the eigen-decomposition.
fn hermitian_sqrt(r: &CMatrix) -> CMatrix {
    let eig = r.clone().symmetric_eigen();
    let d = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let u = &eig.eigenvectors;
    u * CMatrix::from_diagonal(&d) * u.adjoint()
}

struct LinkOps {
    sqrt_r: Vec<CMatrix>,
    estimator: Vec<CMatrix>,
}

fn link_ops(corr: &CorrelationSet, frame: &FrameConfig) -> Result<LinkOps> {
    let gain = frame.pilot_power_w * frame.tau_p as f64;
    let mut sqrt_r = Vec::new();
    let mut estimator = Vec::new();
    for m in 0..corr.num_ubs() {
        for k in 0..corr.num_ue() {
            let r = corr.r(m, k);
            let n = r.nrows();
            sqrt_r.push(hermitian_sqrt(r));
            let psi = r * C64::new(gain, 0.0) + CMatrix::identity(n, n) * C64::new(frame.noise_power_w, 0.0);
            let chol = Cholesky::new(psi).ok_or_else(|| Error::Singular("pilot observation covariance".into()))?;
            // ĥ = sqrt(pτ) R Ψ⁻¹ y, and R Ψ⁻¹ = (Ψ⁻¹ R)ᴴ
            estimator.push(chol.solve(r).adjoint() * C64::new(gain.sqrt(), 0.0));
        }
    }
    Ok(LinkOps { sqrt_r, estimator })
}

fn cn_vector(rng: &mut ChaCha8Rng, n: usize, std: f64, out: &mut [C64]) {
    let s = std * std::f64::consts::FRAC_1_SQRT_2;
    for z in out.iter_mut().take(n) {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *z = C64::new(re * s, im * s);
    }
}

fn mat_vec(a: &CMatrix, x: &[C64], out: &mut [C64]) {
    let n = a.nrows();
    for (i, o) in out.iter_mut().enumerate().take(n) {
        let mut acc = C64::new(0.0, 0.0);
        for (j, xj) in x.iter().enumerate().take(a.ncols()) {
            acc += a[(i, j)] * xj;
        }
        *o = acc;
    }
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn sample_chunk(corr: &CorrelationSet, frame: &FrameConfig, ops: &LinkOps, seed: u64, chunk: u64, count: usize) -> Sums {
    let (m_n, k_n, n) = (corr.num_ubs(), corr.num_ue(), corr.antennas());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut sums = Sums::new(m_n * k_n, k_n);
    let sqrt_gain = (frame.pilot_power_w * frame.tau_p as f64).sqrt();
    let noise_std = frame.noise_power_w.sqrt();
    let mut z = vec![C64::new(0.0, 0.0); n];
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut y = vec![C64::new(0.0, 0.0); n];
    let mut h = vec![vec![C64::new(0.0, 0.0); n]; k_n];
    let mut hhat = vec![vec![C64::new(0.0, 0.0); n]; k_n];
    for _ in 0..count {
        for m in 0..m_n {
            for k in 0..k_n {
                let l = m * k_n + k;
                cn_vector(&mut rng, n, 1.0, &mut z);
                mat_vec(&ops.sqrt_r[l], &z, &mut h[k]);
                cn_vector(&mut rng, n, noise_std, &mut w);
                for i in 0..n {
                    y[i] = h[k][i] * sqrt_gain + w[i];
                }
                mat_vec(&ops.estimator[l], &y, &mut hhat[k]);
            }
            for k in 0..k_n {
                let l = m * k_n + k;
                let x = inner(&hhat[k], &h[k]).re;
                let yy = inner(&hhat[k], &hhat[k]).re;
                sums.sx[l] += x;
                sums.sxx[l] += x * x;
                sums.sy[l] += yy;
                sums.syy[l] += yy * yy;
                sums.sxy[l] += x * yy;
                for kp in 0..k_n {
                    let zz = inner(&hhat[k], &h[kp]).norm_sqr();
                    let idx = l * k_n + kp;
                    sums.sz[idx] += zz;
                    sums.szz[idx] += zz * zz;
                    sums.szy[idx] += zz * yy;
                }
            }
        }
    }
    sums
}

/// Monte Carlo oracle for [`mmse_statistics`].
///
/// Channels, pilot observations and MMSE estimates are drawn explicitly and
/// the combiner is normalized by the empirical mean of `‖ĥ‖²`. The sample
/// budget is split in fixed chunks with per-chunk ChaCha streams and the chunk
/// sums are merged in chunk order, so the result does not depend on how many
/// rayon workers execute it.
pub fn monte_carlo_statistics(
    corr: &CorrelationSet,
    frame: &FrameConfig,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloStatistics> {
    if samples == 0 {
        return Err(crate::error::invalid("samples", "at least one sample is required"));
    }
    check_pilots(corr, frame)?;
    let ops = link_ops(corr, frame)?;
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(samples - c * CHUNK);
            sample_chunk(corr, frame, &ops, seed, c as u64, count)
        })
        .collect();
    let (m_n, k_n) = (corr.num_ubs(), corr.num_ue());
    let mut total = Sums::new(m_n * k_n, k_n);
    for p in &partial {
        total.add(p);
    }
    Ok(finish(total, m_n, k_n, samples))
}

fn finish(s: Sums, m_n: usize, k_n: usize, samples: usize) -> MonteCarloStatistics {
    let n = samples as f64;
    // sample covariance with Bessel correction; zero for a single sample
    let cov = |sab: f64, sa: f64, sb: f64| {
        if samples > 1 {
            (sab - sa * sb / n) / (n - 1.0)
        } else {
            0.0
        }
    };
    let links = m_n * k_n;
    let mut mu = vec![0.0; links];
    let mut mu_se = vec![0.0; links];
    let mut omega = vec![0.0; links * k_n];
    let mut omega_se = vec![0.0; links * k_n];
    let mut noise = vec![1.0; links];
    for l in 0..links {
        let (xb, yb) = (s.sx[l] / n, s.sy[l] / n);
        if yb <= 0.0 {
            noise[l] = 1.0;
            continue;
        }
        let (vxx, vyy, vxy) = (cov(s.sxx[l], s.sx[l], s.sx[l]), cov(s.syy[l], s.sy[l], s.sy[l]), cov(s.sxy[l], s.sx[l], s.sy[l]));
        // μ = x̄ / sqrt(ȳ)
        mu[l] = (xb / yb.sqrt()).max(0.0);
        let (gx, gy) = (1.0 / yb.sqrt(), -xb / (2.0 * yb.powf(1.5)));
        mu_se[l] = ((gx * gx * vxx + 2.0 * gx * gy * vxy + gy * gy * vyy) / n).max(0.0).sqrt();
        for kp in 0..k_n {
            let i = l * k_n + kp;
            let zb = s.sz[i] / n;
            let (vzz, vzy) = (cov(s.szz[i], s.sz[i], s.sz[i]), cov(s.szy[i], s.sz[i], s.sy[l]));
            // ω = z̄ / ȳ
            omega[i] = zb / yb;
            let (gz, gy) = (1.0 / yb, -zb / (yb * yb));
            omega_se[i] = ((gz * gz * vzz + 2.0 * gz * gy * vzy + gy * gy * vyy) / n).max(0.0).sqrt();
        }
    }
    let tensor = CoefficientTensor {
        m: m_n,
        k: k_n,
        mu,
        omega,
        noise,
    };
    MonteCarloStatistics {
        tensor,
        mu_se,
        omega_se,
        noise_se: vec![0.0; links],
        samples,
    }
}

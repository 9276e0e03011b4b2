use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{db_to_linear, wrap_distance, FrameConfig, Topology};
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Minimum link distance used by the path-loss law, meters.
pub const MIN_LINK_DISTANCE: f64 = 1.0;

/// Spatial correlation matrices `R[m,k]` for every UBS/UE link.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSet {
    m: usize,
    k: usize,
    n: usize,
    r: Vec<CMatrix>,
    beta: Vec<f64>,
}

impl CorrelationSet {
    /// Builds a set from explicit per-link matrices, indexed `m * K + k`.
    ///
    /// Every matrix must be `N x N` and Hermitian; positive semi-definiteness
    /// is checked through the diagonal only.
    pub fn from_matrices(m: usize, k: usize, n: usize, r: Vec<CMatrix>) -> Result<Self> {
        if r.len() != m * k {
            return Err(Error::Dimension(format!("expected {} correlation matrices, got {}", m * k, r.len())));
        }
        let mut beta = Vec::with_capacity(r.len());
        for (idx, mat) in r.iter().enumerate() {
            if mat.nrows() != n || mat.ncols() != n {
                return Err(Error::Dimension(format!("R[{idx}] is {}x{}, expected {n}x{n}", mat.nrows(), mat.ncols())));
            }
            let scale = mat.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            if (mat - mat.adjoint()).iter().any(|z| z.norm() > 1e-10 * scale) {
                return Err(Error::Dimension(format!("R[{idx}] is not Hermitian")));
            }
            if (0..n).any(|i| mat[(i, i)].re < 0.0) {
                return Err(Error::Dimension(format!("R[{idx}] has a negative diagonal entry")));
            }
            beta.push(mat.trace().re / n as f64);
        }
        Ok(Self { m, k, n, r, beta })
    }

    /// Uncorrelated fading, `R[m,k] = beta[m,k] * I_N`.
    pub fn from_gains(m: usize, k: usize, n: usize, beta: &[f64]) -> Result<Self> {
        if beta.len() != m * k {
            return Err(Error::Dimension(format!("expected {} gains, got {}", m * k, beta.len())));
        }
        let r = beta.iter().map(|&b| CMatrix::identity(n, n) * C64::new(b, 0.0)).collect();
        Ok(Self {
            m,
            k,
            n,
            r,
            beta: beta.to_vec(),
        })
    }

    pub fn num_ubs(&self) -> usize {
        self.m
    }

    pub fn num_ue(&self) -> usize {
        self.k
    }

    pub fn antennas(&self) -> usize {
        self.n
    }

    pub fn r(&self, m: usize, k: usize) -> &CMatrix {
        &self.r[m * self.k + k]
    }

    /// Large-scale gain `trace(R[m,k]) / N`, linear.
    pub fn beta(&self, m: usize, k: usize) -> f64 {
        self.beta[m * self.k + k]
    }

    /// Statistical channel gain `trace(R[m,k])`.
    pub fn trace_gain(&self, m: usize, k: usize) -> f64 {
        self.beta(m, k) * self.n as f64
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }
}

/// Large-scale gain in dB for a link of the given length.
pub fn pathloss_db(intercept_db: f64, exponent: f64, distance: f64) -> f64 {
    -intercept_db - 10.0 * exponent * distance.max(MIN_LINK_DISTANCE).log10()
}

/// Log-distance path loss with optional log-normal shadowing, `R = beta I_N`.
///
/// Shadowing is drawn from ChaCha stream 1 of the scenario seed, so it never
/// perturbs the topology stream.
pub fn build_correlation(topology: &Topology, frame: &FrameConfig) -> Result<CorrelationSet> {
    let p = &topology.params;
    p.validate()?;
    frame.validate()?;
    let (m, k) = (topology.num_ubs(), topology.num_ue());
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(1);
    let shadow = if p.shadowing_std_db > 0.0 {
        Some(Normal::new(0.0, p.shadowing_std_db).map_err(|e| crate::error::invalid("shadowing_std_db", e.to_string()))?)
    } else {
        None
    };
    let mut beta = Vec::with_capacity(m * k);
    for a in &topology.ubs_positions {
        for b in &topology.ue_positions {
            let d = wrap_distance(*a, *b, p.area_side);
            let mut db = pathloss_db(p.pathloss_intercept_db, p.pathloss_exponent, d);
            if let Some(dist) = &shadow {
                db += dist.sample(&mut rng);
            }
            beta.push(db_to_linear(db));
        }
    }
    CorrelationSet::from_gains(m, k, p.n, &beta)
}

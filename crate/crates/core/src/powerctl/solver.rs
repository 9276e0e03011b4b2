use std::f64::consts::LN_2;

use log::debug;
use nalgebra::{DMatrix, DVector};

use super::barrier::{maximize, BarrierSettings, ConcaveObjective, Linear, Polytope};
use super::problem::{Problem, Surrogate};
use super::{Diagnostics, PowerSolution, QosSpec, SolverSettings};
use crate::error::{invalid, Error, Result};
use crate::netmodel::{uplink_rate_effective, Association, CoefficientTensor, EffectiveChannel, FrameConfig};
use crate::powermodel::AffinePowerForm;

/// `Σ_j w_j log2(1 + v_j·x) + l·x`.
struct LogSum {
    terms: Vec<(f64, DVector<f64>)>,
    lin: DVector<f64>,
}

impl ConcaveObjective for LogSum {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.terms.iter().map(|(w, v)| w * (1.0 + v.dot(x)).log2()).sum::<f64>() + self.lin.dot(x)
    }

    fn derivatives(&self, x: &DVector<f64>, grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) {
        grad.copy_from(&self.lin);
        hess.fill(0.0);
        for (w, v) in &self.terms {
            let d = 1.0 + v.dot(x);
            grad.axpy(w / (LN_2 * d), v, 1.0);
            hess.ger(-w / (LN_2 * d * d), v, v, 1.0);
        }
    }
}

/// `U/c = Σ R̄/c − (π/c)·P_N(R̂)` up to a constant, `c` the rate prelog.
fn parametric_objective(pb: &Problem, sur: &Surrogate, pi: f64) -> LogSum {
    let n = pb.dim();
    let mut terms = Vec::with_capacity(2 * n);
    let mut lin = DVector::from_iterator(n, pb.power_slope.iter().map(|s| -pi * s / pb.prelog));
    for i in 0..n {
        let b = pb.b.row(i).transpose();
        let mut v = b.clone();
        v[i] -= pb.a[i];
        let w = pi * pb.rate_slope[i];
        lin.axpy(-1.0 / (LN_2 * sur.j0[i]), &v, 1.0);
        if w > 0.0 {
            lin.axpy(-w / (LN_2 * sur.i0[i]), &b, 1.0);
            terms.push((w, v));
        }
        terms.push((1.0, b));
    }
    LogSum { terms, lin }
}

fn box_rows(n: usize, extra_cols: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut a = DMatrix::zeros(2 * n, n + extra_cols);
    let mut b = DVector::zeros(2 * n);
    for i in 0..n {
        a[(i, i)] = -1.0;
        a[(n + i, i)] = 1.0;
        b[n + i] = 1.0;
    }
    (a, b)
}

/// Box plus the QoS rows of UEs with a positive requirement.
fn feasible_polytope(pb: &Problem) -> Polytope {
    let n = pb.dim();
    let (g, h) = pb.qos_rows();
    let rows: Vec<usize> = (0..n).filter(|&i| pb.gamma[i] > 0.0).collect();
    let (mut a, mut b) = box_rows(n, 0);
    let base = a.nrows();
    a = a.resize_vertically(base + rows.len(), 0.0);
    b = b.resize_vertically(base + rows.len(), 0.0);
    for (r, &i) in rows.iter().enumerate() {
        a.row_mut(base + r).copy_from(&g.row(i));
        b[base + r] = h[i];
    }
    Polytope { a, b }
}

fn barrier_settings(settings: &SolverSettings, gap_tol: f64) -> BarrierSettings {
    BarrierSettings {
        gap_tol,
        max_newton: settings.max_newton,
        mu: settings.barrier_mu,
        t0: 1.0,
    }
}

/// Outcome of the phase-I problem `min s  s.t.  ρ_k(x) ≤ s, 0 ≤ x ≤ 1`.
#[derive(Debug, Clone)]
pub(crate) struct PhaseOne {
    pub x: DVector<f64>,
    pub s_star: f64,
    pub feasible: bool,
    /// A point strictly inside the feasible polytope, when one exists.
    pub interior: Option<DVector<f64>>,
    pub newton_steps: usize,
}

pub(crate) fn phase_one(pb: &Problem, settings: &SolverSettings) -> Result<PhaseOne> {
    let n = pb.dim();
    if n == 0 {
        return Ok(PhaseOne {
            x: DVector::zeros(0),
            s_star: if pb.unserved_demand { f64::INFINITY } else { f64::NEG_INFINITY },
            feasible: !pb.unserved_demand,
            interior: None,
            newton_steps: 0,
        });
    }
    let (g, h) = pb.qos_rows();
    let (mut a, mut b) = box_rows(n, 1);
    a = a.resize_vertically(3 * n, 0.0);
    b = b.resize_vertically(3 * n, 0.0);
    for i in 0..n {
        for j in 0..n {
            a[(2 * n + i, j)] = g[(i, j)];
        }
        a[(2 * n + i, n)] = -1.0;
        b[2 * n + i] = h[i];
    }
    let poly = Polytope { a, b };
    let x_mid = DVector::from_element(n, 0.5);
    let s0 = (&g * &x_mid - &h).max() + 1.0;
    let z0 = DVector::from_iterator(n + 1, x_mid.iter().copied().chain(std::iter::once(s0)));
    let mut c = DVector::zeros(n + 1);
    c[n] = -1.0;
    let out = maximize(&Linear(c), &poly, z0, &barrier_settings(settings, 0.1 * settings.feas_tol))?;
    let x = out.x.rows(0, n).into_owned();
    let s_star = pb.qos_residual(&x).max();
    let feasible = !pb.unserved_demand && s_star <= settings.feas_tol;
    let interior = (s_star < -settings.feas_tol && feasible_polytope(pb).strictly_contains(&x)).then(|| x.clone());
    Ok(PhaseOne {
        x,
        s_star,
        feasible,
        interior,
        newton_steps: out.newton_steps,
    })
}

pub(crate) fn parametric_step(
    pb: &Problem,
    sur: &Surrogate,
    pi: f64,
    start: &DVector<f64>,
    settings: &SolverSettings,
) -> Result<(DVector<f64>, usize)> {
    let obj = parametric_objective(pb, sur, pi);
    let out = maximize(&obj, &feasible_polytope(pb), start.clone(), &barrier_settings(settings, settings.inner_tol))?;
    if !out.converged {
        debug!("parametric step stopped before reaching the gap target");
    }
    Ok((out.x, out.newton_steps))
}

#[derive(Debug, Clone)]
pub(crate) struct DinkelbachRun {
    pub x: DVector<f64>,
    pub pi_star: f64,
    pub pi_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub newton_steps: usize,
}

pub(crate) fn dinkelbach_run(pb: &Problem, sur: &Surrogate, start: &DVector<f64>, settings: &SolverSettings) -> Result<DinkelbachRun> {
    let mut pi = sur.ratio(pb, &sur.x0);
    let mut pi_trace = vec![pi];
    let mut best_x = sur.x0.clone();
    let mut best = pi;
    let mut start = start.clone();
    let mut stall = 0;
    let mut converged = false;
    let mut iterations = 0;
    let mut newton = 0;
    while iterations < settings.max_dinkelbach {
        iterations += 1;
        let (x, steps) = parametric_step(pb, sur, pi, &start, settings)?;
        newton += steps;
        let (num, den) = sur.ratio_parts(pb, &x);
        let ratio = num / den;
        if ratio > best {
            best = ratio;
            best_x = x.clone();
            stall = 0;
        } else {
            stall += 1;
        }
        start = x;
        if num - pi * den <= settings.dinkelbach_tol * pi * den {
            converged = true;
            break;
        }
        if ratio > pi {
            pi = ratio;
            pi_trace.push(pi);
        }
        if stall >= settings.stall_rounds {
            converged = true;
            break;
        }
    }
    Ok(DinkelbachRun {
        x: best_x,
        pi_star: best,
        pi_trace,
        iterations,
        converged,
        newton_steps: newton,
    })
}

fn finish(
    pb: &Problem,
    x: &DVector<f64>,
    ch: &EffectiveChannel,
    frame: &FrameConfig,
    form: &AffinePowerForm,
    feasible: bool,
    diagnostics: Diagnostics,
) -> Result<PowerSolution> {
    let p = pb.to_powers(x);
    let rates = uplink_rate_effective(&p, ch, frame)?;
    let ee = rates.sum() / form.total(&p, &rates.rates);
    Ok(PowerSolution {
        p,
        ee,
        rates,
        feasible,
        diagnostics,
    })
}

fn problem(ch: &EffectiveChannel, frame: &FrameConfig, form: &AffinePowerForm, qos: &QosSpec) -> Result<Problem> {
    Problem::new(ch, frame, qos)?.with_power(form)
}

/// QoS verdict for a fixed power vector.
pub(crate) fn meets_qos(pb: &Problem, x: &DVector<f64>, settings: &SolverSettings) -> bool {
    !pb.unserved_demand && (pb.dim() == 0 || pb.qos_residual(x).max() <= settings.feas_tol)
}

/// Evaluates a fixed power vector (FiPC, EIPC) as a [`PowerSolution`].
pub fn evaluate_fixed(
    p: &[f64],
    ch: &EffectiveChannel,
    frame: &FrameConfig,
    form: &AffinePowerForm,
    qos: &QosSpec,
    settings: &SolverSettings,
) -> Result<PowerSolution> {
    let pb = problem(ch, frame, form, qos)?;
    let x = pb.from_powers(p);
    let feasible = meets_qos(&pb, &x, settings);
    let diag = Diagnostics {
        ee_trace: vec![pb.ee(&x)],
        ..Default::default()
    };
    finish(&pb, &x, ch, frame, form, feasible, diag)
}

/// Result of the QoS feasibility program.
#[derive(Debug, Clone, PartialEq)]
pub struct QopcResult {
    pub p: Vec<f64>,
    pub feasible: bool,
    /// Largest normalized QoS residual at `p`; nonpositive when feasible.
    pub s_star: f64,
}

/// QoS-constrained power: the minimizer of the largest normalized QoS
/// residual over the power box.
pub fn qopc(
    assoc: &Association,
    tensor: &CoefficientTensor,
    frame: &FrameConfig,
    qos: &QosSpec,
    settings: &SolverSettings,
) -> Result<QopcResult> {
    let ch = EffectiveChannel::new(assoc, tensor)?;
    let pb = Problem::new(&ch, frame, qos)?;
    let ph = phase_one(&pb, settings)?;
    Ok(QopcResult {
        p: pb.to_powers(&ph.x),
        feasible: ph.feasible,
        s_star: ph.s_star,
    })
}

pub(crate) fn qopc_solution(
    ch: &EffectiveChannel,
    frame: &FrameConfig,
    form: &AffinePowerForm,
    qos: &QosSpec,
    settings: &SolverSettings,
) -> Result<PowerSolution> {
    let pb = problem(ch, frame, form, qos)?;
    let ph = phase_one(&pb, settings)?;
    let diag = Diagnostics {
        ee_trace: vec![pb.ee(&ph.x)],
        newton_steps: ph.newton_steps,
        qopc_residual: ph.s_star,
        ..Default::default()
    };
    finish(&pb, &ph.x, ch, frame, form, ph.feasible, diag)
}

fn interior_start(pb: &Problem, settings: &SolverSettings) -> Result<DVector<f64>> {
    phase_one(pb, settings)?
        .interior
        .ok_or_else(|| Error::Infeasible("the QoS region has no interior point".into()))
}

/// Maximizer of `Σ R̄ − π·P_N(R̂)` around the anchor `anchor_p`.
#[allow(clippy::too_many_arguments)]
pub fn solve_parametric(
    pi: f64,
    anchor_p: &[f64],
    assoc: &Association,
    tensor: &CoefficientTensor,
    frame: &FrameConfig,
    form: &AffinePowerForm,
    qos: &QosSpec,
    settings: &SolverSettings,
) -> Result<Vec<f64>> {
    if !(pi >= 0.0) {
        return Err(invalid("pi", format!("must be nonnegative, got {pi}")));
    }
    let ch = EffectiveChannel::new(assoc, tensor)?;
    let pb = problem(&ch, frame, form, qos)?;
    if pb.dim() == 0 {
        return Ok(vec![0.0; pb.k_all]);
    }
    let start = interior_start(&pb, settings)?;
    let sur = Surrogate::new(&pb, &pb.from_powers(anchor_p));
    let (x, _) = parametric_step(&pb, &sur, pi, &start, settings)?;
    Ok(pb.to_powers(&x))
}

/// Dinkelbach iterations on the surrogate ratio around one anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachResult {
    pub p: Vec<f64>,
    pub pi_star: f64,
    pub pi_trace: Vec<f64>,
    pub iterations: usize,
    /// False when the iteration cap was reached first.
    pub converged: bool,
}

pub fn dinkelbach(
    anchor_p: &[f64],
    assoc: &Association,
    tensor: &CoefficientTensor,
    frame: &FrameConfig,
    form: &AffinePowerForm,
    qos: &QosSpec,
    settings: &SolverSettings,
) -> Result<DinkelbachResult> {
    let ch = EffectiveChannel::new(assoc, tensor)?;
    let pb = problem(&ch, frame, form, qos)?;
    if pb.dim() == 0 {
        return Ok(DinkelbachResult {
            p: vec![0.0; pb.k_all],
            pi_star: 0.0,
            pi_trace: vec![0.0],
            iterations: 0,
            converged: true,
        });
    }
    let x0 = pb.from_powers(anchor_p);
    if pb.qos_residual(&x0).max() > settings.feas_tol || x0.iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v)) {
        return Err(invalid("anchor", "the anchor power vector is not feasible"));
    }
    let start = interior_start(&pb, settings)?;
    let run = dinkelbach_run(&pb, &Surrogate::new(&pb, &x0), &start, settings)?;
    Ok(DinkelbachResult {
        p: pb.to_powers(&run.x),
        pi_star: run.pi_star,
        pi_trace: run.pi_trace,
        iterations: run.iterations,
        converged: run.converged,
    })
}

pub(crate) fn slmdb_channel(
    ch: &EffectiveChannel,
    frame: &FrameConfig,
    form: &AffinePowerForm,
    qos: &QosSpec,
    settings: &SolverSettings,
    p0: Option<&[f64]>,
) -> Result<PowerSolution> {
    let pb = problem(ch, frame, form, qos)?;
    let ph = phase_one(&pb, settings)?;
    let mut diag = Diagnostics {
        newton_steps: ph.newton_steps,
        qopc_residual: ph.s_star,
        ..Default::default()
    };
    if !ph.feasible || pb.dim() == 0 {
        diag.ee_trace.push(if pb.dim() == 0 { 0.0 } else { pb.ee(&ph.x) });
        diag.converged = true;
        return finish(&pb, &ph.x, ch, frame, form, ph.feasible, diag);
    }
    let mut anchor = match p0 {
        Some(p) => {
            if p.len() != pb.k_all {
                return Err(Error::Dimension("initial power has the wrong length".into()));
            }
            let x = pb.from_powers(p);
            if !meets_qos(&pb, &x, settings) || x.iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v)) {
                return Err(invalid("p0", "the initial power vector is not feasible"));
            }
            x.map(|v| v.clamp(0.0, 1.0))
        }
        None => ph.x.clone(),
    };
    let Some(mut start) = ph.interior.clone() else {
        // Feasible set without interior: nothing to optimize over.
        diag.ee_trace.push(pb.ee(&anchor));
        diag.converged = true;
        return finish(&pb, &anchor, ch, frame, form, true, diag);
    };
    let mut ee = pb.ee(&anchor);
    diag.ee_trace.push(ee);
    while diag.outer_iterations < settings.max_outer {
        diag.outer_iterations += 1;
        let sur = Surrogate::new(&pb, &anchor);
        let run = dinkelbach_run(&pb, &sur, &start, settings)?;
        diag.newton_steps += run.newton_steps;
        diag.dinkelbach_iterations.push(run.iterations);
        diag.pi_traces.push(run.pi_trace);
        let ee_new = pb.ee(&run.x);
        let theta = if ee > 0.0 {
            (ee_new - ee) / ee
        } else if ee_new > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if ee_new >= ee {
            anchor = run.x.clone();
            start = run.x;
            ee = ee_new;
            diag.ee_trace.push(ee);
        } else {
            debug!("SLM step lowered EE by {:.3e} relative; keeping the previous iterate", -theta);
        }
        if theta <= settings.slm_tol {
            diag.converged = true;
            break;
        }
    }
    finish(&pb, &anchor, ch, frame, form, true, diag)
}

/// Successive lower-bound maximization with Dinkelbach inner iterations.
///
/// Starts from `p0` when given (it must satisfy the QoS constraints), else
/// from the QoPC point. An infeasible QoS system yields `feasible = false`
/// and the QoPC powers.
pub fn slmdb(
    assoc: &Association,
    tensor: &CoefficientTensor,
    frame: &FrameConfig,
    form: &AffinePowerForm,
    qos: &QosSpec,
    settings: &SolverSettings,
    p0: Option<&[f64]>,
) -> Result<PowerSolution> {
    let ch = EffectiveChannel::new(assoc, tensor)?;
    slmdb_channel(&ch, frame, form, qos, settings, p0)
}

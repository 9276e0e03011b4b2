use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::Result;
use crate::matching::{run_algorithm, Algorithm, MatchContext};
use crate::netmodel::{build_correlation, generate_topology, mmse_statistics};
use crate::powerctl::PowerContext;
use crate::powermodel::{network_power, PowerModel};

/// Rate slack when counting QoS violations in a record.
const QOS_RATE_TOL: f64 = 1e-6;

/// One (sweep point, drop, algorithm) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub sweep_value: Option<f64>,
    pub drop_index: usize,
    pub drop_seed: u64,
    pub algorithm: String,
    pub num_ue: usize,
    pub ee_bits_per_joule: f64,
    pub sum_rate_bps: f64,
    pub ubs_active_w: f64,
    pub ubs_sleep_w: f64,
    pub fronthaul_w: f64,
    pub edge_cloud_w: f64,
    pub ue_w: f64,
    pub total_power_w: f64,
    pub active_ubs_count: usize,
    pub qos_violation_count: usize,
    pub swap_count: usize,
    pub slm_iterations: usize,
    pub wall_time_ms: Option<f64>,
    pub feasible: bool,
}

/// Seed of drop `d`.
pub fn drop_seed(base_seed: u64, d: usize) -> u64 {
    base_seed ^ d as u64
}

/// Runs every configured algorithm on one drop of a single-point config.
fn run_drop(cfg: &RunConfig, value: Option<f64>, d: usize) -> Result<Vec<ResultRecord>> {
    let seed = drop_seed(cfg.base_seed, d);
    let mut scenario = cfg.scenario.clone();
    scenario.seed = seed;
    let corr = build_correlation(&generate_topology(&scenario)?, &cfg.frame)?;
    let tensor = mmse_statistics(&corr, &cfg.frame)?;
    let model = PowerModel::new(&cfg.power_for_drop(), scenario.m)?;
    let qos = cfg.qos.spec(scenario.k, &cfg.frame)?;
    let ctx = MatchContext {
        power: PowerContext {
            tensor: &tensor,
            corr: &corr,
            frame: &cfg.frame,
            qos: &qos,
            settings: &cfg.solver,
        },
        model: &model,
        l: scenario.l,
        n: scenario.n,
    };
    let mut out = Vec::with_capacity(cfg.algorithm.0.len());
    for &alg in &cfg.algorithm.0 {
        let start = Instant::now();
        let report = run_algorithm(alg, &ctx, &cfg.matching)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let assoc = report.matching.assoc();
        let form = if alg == Algorithm::Nos {
            model.affine_form_with_active(assoc, scenario.m)?
        } else {
            model.affine_form(assoc)?
        };
        let rates = &report.power.rates.rates;
        let b = network_power(&report.power.p, rates, assoc, &form)?;
        let sum_rate: f64 = rates.iter().sum();
        let violations = rates.iter().zip(&qos.r_min_bps).filter(|(r, m)| **r < **m * (1.0 - QOS_RATE_TOL)).count();
        out.push(ResultRecord {
            sweep_value: value,
            drop_index: d,
            drop_seed: seed,
            algorithm: alg.name().to_string(),
            num_ue: scenario.k,
            ee_bits_per_joule: sum_rate / b.total_w,
            sum_rate_bps: sum_rate,
            ubs_active_w: b.ubs_active_w,
            ubs_sleep_w: b.ubs_sleep_w,
            fronthaul_w: b.fronthaul_w,
            edge_cloud_w: b.edge_cloud_w,
            ue_w: b.ue_w,
            total_power_w: b.total_w,
            active_ubs_count: form.active_count(),
            qos_violation_count: violations,
            swap_count: report.swap_count,
            slm_iterations: report.power.diagnostics.outer_iterations,
            wall_time_ms: cfg.record_wall_time.then_some(elapsed),
            feasible: !report.infeasible,
        });
    }
    Ok(out)
}

/// Runs all drops of every sweep point. Records are ordered by sweep point,
/// drop index and algorithm position in the selector, whatever the
/// execution order.
pub fn run(cfg: &RunConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for v in cfg.points() {
        let point = cfg.at(v)?;
        for d in 0..cfg.drops {
            jobs.push((point.clone(), v, d));
        }
    }
    let per_job: Vec<Result<Vec<ResultRecord>>> = jobs.par_iter().map(|(c, v, d)| run_drop(c, *v, *d)).collect();
    let mut out = Vec::new();
    for r in per_job {
        out.extend(r?);
    }
    Ok(out)
}

/// Exhaustive comparison on one tiny drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub drop_seed: u64,
    pub algorithm: String,
    pub ee_bits_per_joule: f64,
    pub exhaustive_ee_bits_per_joule: f64,
    pub ratio: f64,
    pub feasible: bool,
    pub exhaustive_feasible: bool,
}

/// Runs each configured algorithm and the exhaustive search on every drop
/// and reports the EE ratio. Exhaustive itself is skipped in the list.
pub fn oracle_check(cfg: &RunConfig) -> Result<Vec<OracleRow>> {
    let mut cfg = cfg.clone();
    cfg.sweep = None;
    cfg.algorithm.0.retain(|a| *a != Algorithm::Exhaustive);
    cfg.algorithm.0.push(Algorithm::Exhaustive);
    cfg.validate()?;
    let per_drop: Vec<Result<Vec<OracleRow>>> = (0..cfg.drops)
        .into_par_iter()
        .map(|d| {
            let recs = run_drop(&cfg, None, d)?;
            let (ex, rest) = recs.split_last().expect("exhaustive is always run");
            Ok(rest
                .iter()
                .map(|r| OracleRow {
                    drop_seed: r.drop_seed,
                    algorithm: r.algorithm.clone(),
                    ee_bits_per_joule: r.ee_bits_per_joule,
                    exhaustive_ee_bits_per_joule: ex.ee_bits_per_joule,
                    ratio: r.ee_bits_per_joule / ex.ee_bits_per_joule,
                    feasible: r.feasible,
                    exhaustive_feasible: ex.feasible,
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in per_drop {
        out.extend(r?);
    }
    Ok(out)
}


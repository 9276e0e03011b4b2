use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::run::{OracleRow, ResultRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

/// Row types with a fixed CSV column order.
pub trait Table: Serialize + DeserializeOwned {
    const COLUMNS: &'static [&'static str];
}

impl Table for ResultRecord {
    const COLUMNS: &'static [&'static str] = &[
        "sweep_value",
        "drop_index",
        "drop_seed",
        "algorithm",
        "num_ue",
        "ee_bits_per_joule",
        "sum_rate_bps",
        "ubs_active_w",
        "ubs_sleep_w",
        "fronthaul_w",
        "edge_cloud_w",
        "ue_w",
        "total_power_w",
        "active_ubs_count",
        "qos_violation_count",
        "swap_count",
        "slm_iterations",
        "wall_time_ms",
        "feasible",
    ];
}

impl Table for OracleRow {
    const COLUMNS: &'static [&'static str] = &[
        "drop_seed",
        "algorithm",
        "ee_bits_per_joule",
        "exhaustive_ee_bits_per_joule",
        "ratio",
        "feasible",
        "exhaustive_feasible",
    ];
}

/// Per (sweep point, algorithm) summary. EE statistics cover feasible drops
/// only and are absent when there are none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub sweep_value: Option<f64>,
    pub algorithm: String,
    pub drops: usize,
    pub feasible_drops: usize,
    pub infeasible_drops: usize,
    pub ee_mean: Option<f64>,
    pub ee_median: Option<f64>,
    pub active_ubs_mean: f64,
    /// Share of UEs below their rate requirement over all drops, percent.
    pub qos_violation_pct: f64,
    pub swap_mean: f64,
}

impl Table for AggregateRow {
    const COLUMNS: &'static [&'static str] = &[
        "sweep_value",
        "algorithm",
        "drops",
        "feasible_drops",
        "infeasible_drops",
        "ee_mean",
        "ee_median",
        "active_ubs_mean",
        "qos_violation_pct",
        "swap_mean",
    ];
}

/// One step of an empirical EE distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub sweep_value: Option<f64>,
    pub algorithm: String,
    pub ee_bits_per_joule: f64,
    pub probability: f64,
}

impl Table for CdfPoint {
    const COLUMNS: &'static [&'static str] = &["sweep_value", "algorithm", "ee_bits_per_joule", "probability"];
}

fn same_point(a: Option<f64>, b: Option<f64>) -> bool {
    a.map(f64::to_bits) == b.map(f64::to_bits)
}

/// Groups in order of first appearance.
fn groups(records: &[ResultRecord]) -> Vec<(Option<f64>, String, Vec<&ResultRecord>)> {
    let mut out: Vec<(Option<f64>, String, Vec<&ResultRecord>)> = Vec::new();
    for r in records {
        match out.iter_mut().find(|(v, a, _)| same_point(*v, r.sweep_value) && *a == r.algorithm) {
            Some(g) => g.2.push(r),
            None => out.push((r.sweep_value, r.algorithm.clone(), vec![r])),
        }
    }
    out
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

pub fn aggregate(records: &[ResultRecord]) -> Vec<AggregateRow> {
    groups(records)
        .into_iter()
        .map(|(sweep_value, algorithm, rs)| {
            let n = rs.len() as f64;
            let ee: Vec<f64> = rs.iter().filter(|r| r.feasible).map(|r| r.ee_bits_per_joule).collect();
            let ues: usize = rs.iter().map(|r| r.num_ue).sum();
            let violations: usize = rs.iter().map(|r| r.qos_violation_count).sum();
            AggregateRow {
                sweep_value,
                algorithm,
                drops: rs.len(),
                feasible_drops: ee.len(),
                infeasible_drops: rs.len() - ee.len(),
                ee_mean: (!ee.is_empty()).then(|| ee.iter().sum::<f64>() / ee.len() as f64),
                ee_median: median(&ee),
                active_ubs_mean: rs.iter().map(|r| r.active_ubs_count as f64).sum::<f64>() / n,
                qos_violation_pct: if ues == 0 { 0.0 } else { 100.0 * violations as f64 / ues as f64 },
                swap_mean: rs.iter().map(|r| r.swap_count as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Empirical CDF of the feasible EE values of every group, ascending.
pub fn ee_cdf(records: &[ResultRecord]) -> Vec<CdfPoint> {
    let mut out = Vec::new();
    for (sweep_value, algorithm, rs) in groups(records) {
        let mut ee: Vec<f64> = rs.iter().filter(|r| r.feasible).map(|r| r.ee_bits_per_joule).collect();
        ee.sort_by(f64::total_cmp);
        let n = ee.len() as f64;
        for (i, e) in ee.into_iter().enumerate() {
            out.push(CdfPoint {
                sweep_value,
                algorithm: algorithm.clone(),
                ee_bits_per_joule: e,
                probability: (i + 1) as f64 / n,
            });
        }
    }
    out
}

pub fn write_table<T: Table, W: Write>(rows: &[T], format: Format, w: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            wtr.write_record(T::COLUMNS)?;
            for r in rows {
                wtr.serialize(r)?;
            }
            wtr.flush()?;
        }
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, rows)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn read_table<T: Table, R: Read>(format: Format, r: R) -> Result<Vec<T>> {
    match format {
        Format::Csv => {
            let mut rdr = csv::Reader::from_reader(r);
            let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
            if header != T::COLUMNS {
                return Err(Error::Config(format!("unexpected CSV header {header:?}")));
            }
            rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
        }
        Format::Json => Ok(serde_json::from_reader(r)?),
    }
}

/// Writes `rows` to `path`.
pub fn emit<T: Table>(rows: &[T], format: Format, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_table(rows, format, std::io::BufWriter::new(f))
}

pub fn load<T: Table>(format: Format, path: &Path) -> Result<Vec<T>> {
    read_table(format, std::io::BufReader::new(std::fs::File::open(path)?))
}

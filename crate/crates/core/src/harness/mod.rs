//! Experiment runner: run configurations, seeded drops, sweeps and result
//! files.
//!
//! Drop `d` uses seed `base_seed ^ d` for its topology, and every algorithm
//! of the run sees the same drop. Output rows are ordered by sweep value,
//! drop index and algorithm, so identical configurations produce identical
//! files.

mod config;
mod output;
mod run;

pub use config::{AlgorithmSet, QosConfig, RunConfig, SweepParameter, SweepSpec};
pub use output::{aggregate, ee_cdf, emit, load, median, read_table, write_table, AggregateRow, CdfPoint, Format, Table};
pub use run::{drop_seed, oracle_check, run, OracleRow, ResultRecord};

/// Runs a sweep and aggregates it per sweep value and algorithm.
pub fn sweep(cfg: &RunConfig) -> crate::Result<Vec<AggregateRow>> {
    if cfg.sweep.is_none() {
        return Err(crate::Error::Config("sweep needs a `sweep` section".into()));
    }
    Ok(aggregate(&run(cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::Algorithm;

    fn record(alg: &str, ee: f64, feasible: bool) -> ResultRecord {
        ResultRecord {
            sweep_value: Some(2.0),
            drop_index: 0,
            drop_seed: 1,
            algorithm: alg.into(),
            num_ue: 2,
            ee_bits_per_joule: ee,
            sum_rate_bps: ee * 10.0,
            ubs_active_w: 4.0,
            ubs_sleep_w: 1.0,
            fronthaul_w: 1.0,
            edge_cloud_w: 2.0,
            ue_w: 2.0,
            total_power_w: 10.0,
            active_ubs_count: 2,
            qos_violation_count: usize::from(!feasible),
            swap_count: 3,
            slm_iterations: 4,
            wall_time_ms: None,
            feasible,
        }
    }

    #[test]
    fn selector_parsing() {
        let s: AlgorithmSet = "trimsm-slmdb, recp".parse().unwrap();
        assert_eq!(s.0, vec![Algorithm::TrimsmSlmdb, Algorithm::Recp]);
        assert_eq!(s.to_string(), "trimsm-slmdb,recp");
        assert_eq!("all".parse::<AlgorithmSet>().unwrap().0.len(), 9);
        assert!("recp,recp".parse::<AlgorithmSet>().is_err());
        assert!("".parse::<AlgorithmSet>().is_err());
    }

    #[test]
    fn bundled_config_validates() {
        let cfg = RunConfig::defaults();
        cfg.validate().unwrap();
        assert_eq!(cfg.algorithm.0, vec![Algorithm::TrimsmSlmdb]);
    }

    #[test]
    fn zero_drops_rejected() {
        let cfg = RunConfig { drops: 0, ..RunConfig::defaults() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn bad_sweep_values_rejected() {
        let mut cfg = RunConfig::defaults();
        cfg.sweep = Some(SweepSpec { parameter: SweepParameter::K, values: vec![2.0, 2.5] });
        assert!(cfg.validate().is_err());
        cfg.sweep = Some(SweepSpec { parameter: SweepParameter::L, values: vec![17.0] });
        assert!(cfg.validate().is_err());
        cfg.sweep = Some(SweepSpec { parameter: SweepParameter::M, values: vec![] });
        assert!(cfg.validate().is_err());
        cfg.sweep = Some(SweepSpec { parameter: SweepParameter::K, values: vec![2.0, 4.0] });
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(crate::powermodel::DEFAULT_CONFIG_JSON).unwrap();
        v["bogus"] = 1.into();
        assert!(RunConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn aggregate_of_constant_records() {
        let recs = vec![record("recp", 5.0, true), record("recp", 5.0, true), record("recp", 5.0, true)];
        let agg = aggregate(&recs);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].ee_mean, Some(5.0));
        assert_eq!(agg[0].ee_median, Some(5.0));
        assert_eq!(agg[0].active_ubs_mean, 2.0);
        assert_eq!(agg[0].swap_mean, 3.0);
        assert_eq!(agg[0].qos_violation_pct, 0.0);
    }

    #[test]
    fn infeasible_drops_excluded_from_ee() {
        let recs = vec![record("nos", 5.0, false), record("nos", 7.0, false), record("recp", 1.0, true), record("recp", 3.0, false)];
        let agg = aggregate(&recs);
        assert_eq!(agg[0].algorithm, "nos");
        assert_eq!(agg[0].ee_mean, None);
        assert_eq!(agg[0].infeasible_drops, 2);
        assert_eq!(agg[0].qos_violation_pct, 50.0);
        assert_eq!(agg[1].ee_mean, Some(1.0));
        assert_eq!(agg[1].feasible_drops, 1);
    }

    #[test]
    fn cdf_sorted_ascending() {
        let recs = vec![record("recp", 5.0, true), record("recp", 1.0, true), record("recp", 3.0, true)];
        let cdf = ee_cdf(&recs);
        let ee: Vec<f64> = cdf.iter().map(|c| c.ee_bits_per_joule).collect();
        assert_eq!(ee, vec![1.0, 3.0, 5.0]);
        assert_eq!(cdf[2].probability, 1.0);
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_table::<ResultRecord, _>(&[], Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("sweep_value,drop_index,drop_seed,algorithm,"));
    }

    #[test]
    fn tables_round_trip() {
        let mut recs = vec![record("recp", 1.0 / 3.0, true), record("nos", 2.5e6, false)];
        recs[1].sweep_value = None;
        recs[1].wall_time_ms = Some(0.125);
        for format in [Format::Csv, Format::Json] {
            let mut buf = Vec::new();
            write_table(&recs, format, &mut buf).unwrap();
            let back: Vec<ResultRecord> = read_table(format, buf.as_slice()).unwrap();
            assert_eq!(back, recs);
        }
    }
}

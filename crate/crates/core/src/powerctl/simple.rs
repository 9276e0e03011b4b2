use super::QosSpec;
use crate::netmodel::{Association, CorrelationSet};

/// Full power for every UE.
pub fn fipc(k: usize, qos: &QosSpec) -> Vec<f64> {
    vec![qos.p_max_w; k]
}

/// Channel-inversion powers `P_k = min_j ‖β_j‖² / ‖β_k‖² · P_max`, where
/// `β_k` collects the statistical gains `trace(R[m,k])` of the serving UBSs.
/// Unserved UEs get zero power and do not enter the minimum.
pub fn eipc(assoc: &Association, corr: &CorrelationSet, qos: &QosSpec) -> Vec<f64> {
    let norms: Vec<f64> = (0..assoc.num_ue())
        .map(|k| assoc.serving(k).map(|m| corr.trace_gain(m, k).powi(2)).sum())
        .collect();
    let min = norms.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    norms
        .iter()
        .map(|&v| if v > 0.0 { (min / v).min(1.0) * qos.p_max_w } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::FrameConfig;

    fn qos(k: usize) -> QosSpec {
        QosSpec::uniform(k, 0.0, 0.1, &FrameConfig::default())
    }

    #[test]
    fn fixed_power() {
        assert_eq!(fipc(3, &qos(3)), vec![0.1; 3]);
    }

    #[test]
    fn equal_gains_full_power() {
        let corr = CorrelationSet::from_gains(2, 3, 2, &[1e-9; 6]).unwrap();
        let a = Association::from_rows(&[vec![1, 1, 1], vec![1, 1, 1]]).unwrap();
        assert_eq!(eipc(&a, &corr, &qos(3)), vec![0.1; 3]);
    }

    #[test]
    fn inverse_gain_ratio() {
        // ‖β‖² = {1, 4}
        let corr = CorrelationSet::from_gains(1, 2, 1, &[1.0, 2.0]).unwrap();
        let a = Association::from_rows(&[vec![1, 1]]).unwrap();
        let p = eipc(&a, &corr, &qos(2));
        assert_eq!(p, vec![0.1, 0.025]);
    }

    #[test]
    fn sleeping_links_do_not_count() {
        let corr = CorrelationSet::from_gains(2, 2, 1, &[1.0, 1.0, 5.0, 1.0]).unwrap();
        let a = Association::from_rows(&[vec![1, 1], vec![0, 0]]).unwrap();
        assert_eq!(eipc(&a, &corr, &qos(2)), vec![0.1, 0.1]);
        let b = Association::from_rows(&[vec![1, 0], vec![0, 0]]).unwrap();
        assert_eq!(eipc(&b, &corr, &qos(2)), vec![0.1, 0.0]);
    }
}

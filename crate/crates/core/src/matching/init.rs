//! Initial associations and the received-power baselines.

use super::Matching;
use crate::error::{invalid, Result};
use crate::netmodel::{Association, CorrelationSet};

/// TSAP neighborhood: UBSs within this fraction of the strongest gain.
pub const TSAP_THRESHOLD: f64 = 0.3;

/// UBS indices by descending gain for UE `k`, ties to the lower index.
fn ranked(corr: &CorrelationSet, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..corr.num_ubs()).collect();
    order.sort_by(|&a, &b| corr.beta(b, k).total_cmp(&corr.beta(a, k)).then(a.cmp(&b)));
    order
}

fn check_caps(l: usize, n: usize) -> Result<()> {
    if l == 0 {
        return Err(invalid("L", "must be positive"));
    }
    if n == 0 {
        return Err(invalid("N", "must be positive"));
    }
    Ok(())
}

/// RECP selection. Per UE in index order, UBSs are taken by descending
/// gain until their cumulative gain reaches `delta_percent` of the UE's total
/// gain, at most `l` of them. UBSs already serving `n` UEs are skipped.
pub fn recp_init(corr: &CorrelationSet, l: usize, n: usize, delta_percent: f64) -> Result<Matching> {
    check_caps(l, n)?;
    if !(delta_percent > 0.0 && delta_percent <= 100.0) {
        return Err(invalid("delta_percent", "must lie in (0, 100]"));
    }
    let (m_n, k_n) = (corr.num_ubs(), corr.num_ue());
    let mut a = Association::empty(m_n, k_n);
    for k in 0..k_n {
        let total: f64 = (0..m_n).map(|m| corr.beta(m, k)).sum();
        let target = delta_percent / 100.0 * total * (1.0 - 1e-12);
        let mut acc = 0.0;
        let mut taken = 0;
        for m in ranked(corr, k) {
            if taken == l || acc >= target {
                break;
            }
            if a.ubs_load(m) >= n {
                continue;
            }
            a.set(m, k, true);
            acc += corr.beta(m, k);
            taken += 1;
        }
    }
    Matching::new(a, l, n)
}

/// Each UE takes its single strongest UBS with spare capacity.
pub fn llsf_assoc(corr: &CorrelationSet, l: usize, n: usize) -> Result<Matching> {
    check_caps(l, n)?;
    let mut a = Association::empty(corr.num_ubs(), corr.num_ue());
    for k in 0..corr.num_ue() {
        if let Some(m) = ranked(corr, k).into_iter().find(|&m| a.ubs_load(m) < n) {
            a.set(m, k, true);
        }
    }
    Matching::new(a, l, n)
}

/// Each UE takes the UBSs whose gain is at least [`TSAP_THRESHOLD`] times
/// its strongest gain, strongest first, at most `l` and capacity permitting.
pub fn tsap_assoc(corr: &CorrelationSet, l: usize, n: usize) -> Result<Matching> {
    check_caps(l, n)?;
    let mut a = Association::empty(corr.num_ubs(), corr.num_ue());
    for k in 0..corr.num_ue() {
        let order = ranked(corr, k);
        let Some(&best) = order.first() else { continue };
        let floor = TSAP_THRESHOLD * corr.beta(best, k);
        let mut taken = 0;
        for m in order {
            if taken == l || corr.beta(m, k) < floor {
                break;
            }
            if a.ubs_load(m) < n {
                a.set(m, k, true);
                taken += 1;
            }
        }
    }
    Matching::new(a, l, n)
}

/// Extends `matching` so that every UBS serves at least one UE, for the
/// no-sleep variant. Each idle UBS, in index order, goes to the strongest UE
/// with a free slot; failing that, a UE at its cap trades its weakest link
/// whose UBS is shared with another UE. Returns `None` when some UBS cannot
/// be covered.
pub fn cover_all_ubs(matching: &Matching, corr: &CorrelationSet) -> Option<Matching> {
    let (l, n) = (matching.ue_cap(), matching.ubs_cap());
    let mut a = matching.assoc().clone();
    let (m_n, k_n) = (a.num_ubs(), a.num_ue());
    for m in 0..m_n {
        if a.is_active(m) {
            continue;
        }
        let mut ues: Vec<usize> = (0..k_n).collect();
        ues.sort_by(|&x, &y| corr.beta(m, y).total_cmp(&corr.beta(m, x)).then(x.cmp(&y)));
        if let Some(&k) = ues.iter().find(|&&k| a.ue_degree(k) < l) {
            a.set(m, k, true);
            continue;
        }
        let trade = ues.iter().find_map(|&k| {
            a.serving(k)
                .filter(|&j| a.ubs_load(j) >= 2)
                .min_by(|&x, &y| corr.beta(x, k).total_cmp(&corr.beta(y, k)))
                .map(|j| (k, j))
        });
        let (k, j) = trade?;
        a.set(j, k, false);
        a.set(m, k, true);
    }
    debug_assert!(a.satisfies_caps(l, n));
    Some(Matching { assoc: a, l, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(m: usize, k: usize, beta: &[f64]) -> CorrelationSet {
        CorrelationSet::from_gains(m, k, 2, beta).unwrap()
    }

    /// `beta` is row-major `M x K`.
    fn column(v: &[f64]) -> CorrelationSet {
        gains(v.len(), 1, v)
    }

    #[test]
    fn recp_takes_minimal_prefix() {
        let c = column(&[0.05, 0.5, 0.15, 0.3]);
        let mt = recp_init(&c, 3, 4, 95.0).unwrap();
        assert_eq!(mt.of_ue(0), vec![1, 2, 3]);
        let mt = recp_init(&c, 3, 4, 50.0).unwrap();
        assert_eq!(mt.of_ue(0), vec![1]);
        let mt = recp_init(&c, 2, 4, 95.0).unwrap();
        assert_eq!(mt.of_ue(0), vec![1, 3]);
    }

    #[test]
    fn recp_full_selection_and_single_link() {
        let c = gains(3, 2, &[0.2, 0.1, 0.5, 0.6, 0.3, 0.3]);
        let all = recp_init(&c, 3, 2, 100.0).unwrap();
        for k in 0..2 {
            assert_eq!(all.of_ue(k), vec![0, 1, 2]);
        }
        let one = recp_init(&c, 1, 2, 95.0).unwrap();
        assert_eq!(one.of_ue(0), vec![1]);
        assert_eq!(one.of_ue(1), vec![1]);
    }

    #[test]
    fn recp_skips_full_ubs() {
        // both UEs prefer UBS 0, which takes one UE
        let c = gains(2, 2, &[0.9, 0.8, 0.1, 0.2]);
        let mt = recp_init(&c, 1, 1, 95.0).unwrap();
        assert_eq!(mt.of_ue(0), vec![0]);
        assert_eq!(mt.of_ue(1), vec![1]);
    }

    #[test]
    fn llsf_argmax_ties_and_capacity() {
        let c = gains(3, 2, &[0.2, 0.4, 0.4, 0.4, 0.1, 0.3]);
        let mt = llsf_assoc(&c, 2, 1).unwrap();
        assert_eq!(mt.of_ue(0), vec![1]);
        // UBS 0 and 1 tie for UE 1; the lower index wins
        assert_eq!(mt.of_ue(1), vec![0]);
        let c = gains(2, 2, &[0.9, 0.8, 0.1, 0.2]);
        let mt = llsf_assoc(&c, 1, 1).unwrap();
        assert_eq!(mt.of_ue(1), vec![1]);
    }

    #[test]
    fn tsap_threshold_rules() {
        let c = column(&[1.0, 0.2, 0.29]);
        assert_eq!(tsap_assoc(&c, 3, 4).unwrap().of_ue(0), vec![0]);
        let c = column(&[1.0, 0.3, 0.1]);
        assert_eq!(tsap_assoc(&c, 3, 4).unwrap().of_ue(0), vec![0, 1]);
        let c = column(&[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(tsap_assoc(&c, 2, 4).unwrap().of_ue(0), vec![0, 1]);
    }

    #[test]
    fn cover_fills_idle_ubs() {
        let c = gains(3, 2, &[0.9, 0.8, 0.1, 0.2, 0.3, 0.05]);
        let base = llsf_assoc(&c, 2, 2).unwrap();
        let covered = cover_all_ubs(&base, &c).unwrap();
        assert!(covered.assoc().activity().iter().all(|&x| x));
        // three UBSs, two UEs with one link each cannot be covered
        let tight = llsf_assoc(&c, 1, 2).unwrap();
        assert!(cover_all_ubs(&tight, &c).is_none());
    }
}

//! Exhaustive association search for small instances.

use std::cmp::Ordering;

use super::evaluate::{ee_upper_bound, Evaluator};
use super::{MatchContext, Matching, SolutionReport};
use crate::error::{Error, Result};
use crate::netmodel::Association;
use crate::powerctl::PowerControl;

/// Largest `M·K` accepted by [`exhaustive_search`].
pub const EXHAUSTIVE_MAX_LINKS: usize = 16;

/// Subsets of `0..m` with at most `l` elements, as bit masks.
fn ue_options(m: usize, l: usize) -> Vec<u32> {
    (0u32..1 << m).filter(|s| s.count_ones() as usize <= l).collect()
}

/// Enumerates every association within the caps, solves SLMDB on each and
/// returns the best QoS-compliant one. Ties go to fewer awake UBSs, then to
/// the lexicographically smaller `S`. When no association is compliant the
/// one with the smallest shortfall is returned, flagged infeasible.
pub fn exhaustive_search(ctx: &MatchContext<'_>) -> Result<SolutionReport> {
    let (m_n, k_n) = (ctx.num_ubs(), ctx.num_ue());
    if m_n * k_n > EXHAUSTIVE_MAX_LINKS {
        return Err(Error::Guard(format!("exhaustive search over M·K = {} links exceeds {EXHAUSTIVE_MAX_LINKS}", m_n * k_n)));
    }
    let opts = ue_options(m_n, ctx.l);
    let mut ev = Evaluator::new(ctx, PowerControl::Slmdb);
    let mut best: Option<(Matching, std::rc::Rc<super::Evaluation>)> = None;
    let mut idx = vec![0usize; k_n];
    let mut candidates = 0;
    'outer: loop {
        let mut a = Association::empty(m_n, k_n);
        for (k, &o) in idx.iter().enumerate() {
            for m in 0..m_n {
                if opts[o] >> m & 1 == 1 {
                    a.set(m, k, true);
                }
            }
        }
        if let Ok(mt) = Matching::new(a, ctx.l, ctx.n) {
            candidates += 1;
            let skip = match &best {
                Some((_, b)) if b.qos_ok => ee_upper_bound(&mt, ctx)? < b.ee,
                _ => false,
            };
            if !skip {
                let e = ev.eval(&mt)?;
                let better = match &best {
                    None => true,
                    Some((bm, b)) => rank(&e, &mt, b, bm) == Ordering::Greater,
                };
                if better {
                    best = Some((mt, e));
                }
            }
        }
        // next index tuple, first UE fastest
        for d in idx.iter_mut() {
            *d += 1;
            if *d < opts.len() {
                continue 'outer;
            }
            *d = 0;
        }
        break;
    }
    let (matching, e) = best.ok_or_else(|| Error::Guard("no association satisfies the caps".into()))?;
    log::debug!("exhaustive: {candidates} candidates, {} solves", ev.solves());
    let e = std::rc::Rc::unwrap_or_clone(e);
    Ok(SolutionReport {
        matching,
        ee: e.ee,
        infeasible: !e.qos_ok,
        power: e.power,
        swap_count: 0,
        evaluation_count: ev.solves(),
        sweeps: 0,
        stable: false,
    })
}

/// Total order used by the search: compliance, then lower shortfall, then
/// EE, then fewer awake UBSs, then the lexicographically smaller `S`.
fn rank(a: &super::Evaluation, am: &Matching, b: &super::Evaluation, bm: &Matching) -> Ordering {
    a.qos_ok
        .cmp(&b.qos_ok)
        .then(b.shortfall.total_cmp(&a.shortfall))
        .then(a.ee.total_cmp(&b.ee))
        .then(bm.assoc().active_count().cmp(&am.assoc().active_count()))
        .then(bm.assoc().bits().cmp(am.assoc().bits()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn options_respect_cap() {
        assert_eq!(ue_options(2, 2).len(), 4);
        assert_eq!(ue_options(4, 2).len(), 11);
        assert_eq!(ue_options(1, 1), vec![0, 1]);
    }
}

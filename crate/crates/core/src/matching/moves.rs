//! Swap moves between UE pairs and their deterministic enumeration.
//!
//! A move names two UEs `(K_i, K_j)` and two UBS slots `(M_m, M_n)`, any of
//! which may be empty (`None`):
//!
//! * both UEs and both UBSs given: the exchange `S^{im}_{jn}`;
//! * both UEs given and `M_n` empty: `K_i` hands `M_m` over to `K_j`;
//! * `K_j` empty, `M_m` empty: `K_i` adds `M_n`;
//! * `K_j` empty, `M_n` empty: `K_i` drops `M_m`;
//! * `K_j` empty, both UBSs given: `K_i` replaces `M_m` with `M_n`.

use serde::{Deserialize, Serialize};

use super::Matching;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Exchange,
    Add,
    Remove,
    Replace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SwapMove {
    pub ue_i: Option<usize>,
    pub ue_j: Option<usize>,
    pub bs_m: Option<usize>,
    pub bs_n: Option<usize>,
    pub kind: MoveKind,
}

impl SwapMove {
    pub fn exchange(ue_i: usize, ue_j: usize, bs_m: usize, bs_n: usize) -> Self {
        Self { ue_i: Some(ue_i), ue_j: Some(ue_j), bs_m: Some(bs_m), bs_n: Some(bs_n), kind: MoveKind::Exchange }
    }

    /// `ue_i` hands `bs_m` over to `ue_j`.
    pub fn transfer(ue_i: usize, ue_j: usize, bs_m: usize) -> Self {
        Self { ue_i: Some(ue_i), ue_j: Some(ue_j), bs_m: Some(bs_m), bs_n: None, kind: MoveKind::Exchange }
    }

    pub fn add(ue_i: usize, bs_n: usize) -> Self {
        Self { ue_i: Some(ue_i), ue_j: None, bs_m: None, bs_n: Some(bs_n), kind: MoveKind::Add }
    }

    pub fn remove(ue_i: usize, bs_m: usize) -> Self {
        Self { ue_i: Some(ue_i), ue_j: None, bs_m: Some(bs_m), bs_n: None, kind: MoveKind::Remove }
    }

    pub fn replace(ue_i: usize, bs_m: usize, bs_n: usize) -> Self {
        Self { ue_i: Some(ue_i), ue_j: None, bs_m: Some(bs_m), bs_n: Some(bs_n), kind: MoveKind::Replace }
    }

    /// The move that undoes this one on the matching it produces.
    pub fn inverse(&self) -> Self {
        match (self.kind, self.ue_i, self.ue_j, self.bs_m, self.bs_n) {
            (MoveKind::Exchange, Some(i), Some(j), Some(m), Some(n)) => Self::exchange(i, j, n, m),
            (MoveKind::Exchange, Some(i), Some(j), Some(m), None) => Self::transfer(j, i, m),
            (MoveKind::Exchange, Some(i), Some(j), None, Some(n)) => Self::transfer(i, j, n),
            (MoveKind::Add, Some(i), _, _, Some(n)) => Self::remove(i, n),
            (MoveKind::Remove, Some(i), _, Some(m), _) => Self::add(i, m),
            (MoveKind::Replace, Some(i), _, Some(m), Some(n)) => Self::replace(i, n, m),
            _ => *self,
        }
    }
}

fn bad(mv: &SwapMove, why: &str) -> Error {
    Error::InvalidMove(format!("{mv:?}: {why}"))
}

/// Applies `mv`, checking its structural preconditions and the capacity caps
/// of the result.
pub fn apply_move(matching: &Matching, mv: &SwapMove) -> Result<Matching> {
    let a = matching.assoc();
    let (m_n, k_n) = (a.num_ubs(), a.num_ue());
    let ue_ok = |u: Option<usize>| u.is_none_or(|u| u < k_n);
    let bs_ok = |b: Option<usize>| b.is_none_or(|b| b < m_n);
    if !(ue_ok(mv.ue_i) && ue_ok(mv.ue_j) && bs_ok(mv.bs_m) && bs_ok(mv.bs_n)) {
        return Err(bad(mv, "index out of range"));
    }
    let Some(i) = mv.ue_i else {
        return Err(bad(mv, "the first UE slot must be filled"));
    };
    let mut s = a.clone();
    let has = |m: usize, k: usize| a.get(m, k);
    match (mv.kind, mv.ue_j, mv.bs_m, mv.bs_n) {
        (MoveKind::Exchange, Some(j), Some(m), Some(n)) => {
            if i == j || m == n || !has(m, i) || !has(n, j) || has(n, i) || has(m, j) {
                return Err(bad(mv, "exchange needs M_m in S(K_i), M_n in S(K_j) and neither crossed"));
            }
            s.set(m, i, false);
            s.set(n, j, false);
            s.set(n, i, true);
            s.set(m, j, true);
        }
        (MoveKind::Exchange, Some(j), Some(m), None) => {
            if i == j || !has(m, i) || has(m, j) {
                return Err(bad(mv, "transfer needs M_m in S(K_i) and not in S(K_j)"));
            }
            s.set(m, i, false);
            s.set(m, j, true);
        }
        (MoveKind::Exchange, Some(j), None, Some(n)) => {
            if i == j || !has(n, j) || has(n, i) {
                return Err(bad(mv, "transfer needs M_n in S(K_j) and not in S(K_i)"));
            }
            s.set(n, j, false);
            s.set(n, i, true);
        }
        (MoveKind::Add, None, None, Some(n)) => {
            if has(n, i) {
                return Err(bad(mv, "M_n already serves K_i"));
            }
            s.set(n, i, true);
        }
        (MoveKind::Remove, None, Some(m), None) => {
            if !has(m, i) {
                return Err(bad(mv, "M_m does not serve K_i"));
            }
            s.set(m, i, false);
        }
        (MoveKind::Replace, None, Some(m), Some(n)) => {
            if !has(m, i) || has(n, i) {
                return Err(bad(mv, "replace needs M_m in S(K_i) and M_n outside it"));
            }
            s.set(m, i, false);
            s.set(n, i, true);
        }
        _ => return Err(bad(mv, "slots do not match the move kind")),
    }
    Matching::new(s, matching.ue_cap(), matching.ubs_cap()).map_err(|e| bad(mv, &e.to_string()))
}

/// Structurally valid moves for the ordered pair `(K_i, K_j)`, `K_j = None`
/// standing for the empty player. UBS slots run in index order with the
/// empty slot last.
///
/// Exchanges with both UBSs given are listed for `i < j` only, and
/// hand-overs only in the `K_i → K_j` direction, since the mirrored pair
/// describes the same moves.
pub fn moves_for_pair(matching: &Matching, i: usize, j: Option<usize>) -> Vec<SwapMove> {
    let a = matching.assoc();
    let (l, cap) = (matching.ue_cap(), matching.ubs_cap());
    let m_n = a.num_ubs();
    let mut out = Vec::new();
    let own: Vec<usize> = a.serving(i).collect();
    match j {
        Some(j) if j != i => {
            let theirs: Vec<usize> = a.serving(j).collect();
            for &m in &own {
                if i < j {
                    for &n in &theirs {
                        if !a.get(n, i) && !a.get(m, j) {
                            out.push(SwapMove::exchange(i, j, m, n));
                        }
                    }
                }
                if !a.get(m, j) && theirs.len() < l {
                    out.push(SwapMove::transfer(i, j, m));
                }
            }
        }
        Some(_) => {}
        None => {
            for &m in &own {
                for n in 0..m_n {
                    if !a.get(n, i) && a.ubs_load(n) < cap {
                        out.push(SwapMove::replace(i, m, n));
                    }
                }
                out.push(SwapMove::remove(i, m));
            }
            if own.len() < l {
                for n in 0..m_n {
                    if !a.get(n, i) && a.ubs_load(n) < cap {
                        out.push(SwapMove::add(i, n));
                    }
                }
            }
        }
    }
    out
}

/// Partners of `K_i` in enumeration order: the other UEs, then the empty
/// player.
pub(crate) fn partners(k_n: usize, i: usize) -> impl Iterator<Item = Option<usize>> {
    (0..k_n).filter(move |&j| j != i).map(Some).chain(std::iter::once(None))
}

/// Every structurally valid move of the matching, in sweep order.
pub fn candidate_moves(matching: &Matching) -> Vec<SwapMove> {
    let k_n = matching.assoc().num_ue();
    (0..k_n).flat_map(|i| partners(k_n, i).flat_map(move |j| moves_for_pair(matching, i, j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::Association;
    use proptest::prelude::*;

    fn toy() -> Matching {
        // UBS 0 serves UEs 0 and 1, UBS 1 serves UE 1, UBS 2 serves UE 2
        let a = Association::from_rows(&[vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        Matching::new(a, 2, 2).unwrap()
    }

    #[test]
    fn exchange_swaps_links() {
        let mt = toy();
        let out = apply_move(&mt, &SwapMove::exchange(0, 2, 0, 2)).unwrap();
        assert_eq!(out.of_ue(0), vec![2]);
        assert_eq!(out.of_ue(2), vec![0]);
        assert_eq!(out.of_ubs(0), vec![1, 2]);
    }

    #[test]
    fn invalid_moves_are_rejected() {
        let mt = toy();
        // UBS 0 already serves UE 1
        assert!(matches!(apply_move(&mt, &SwapMove::exchange(0, 1, 0, 1)), Err(Error::InvalidMove(_))));
        assert!(apply_move(&mt, &SwapMove::exchange(0, 0, 0, 0)).is_err());
        assert!(apply_move(&mt, &SwapMove::remove(0, 2)).is_err());
        assert!(apply_move(&mt, &SwapMove::add(0, 0)).is_err());
        // UBS 0 is full at N = 2
        assert!(apply_move(&mt, &SwapMove::add(2, 0)).is_err());
        // UE 1 is at its cap L = 2
        assert!(apply_move(&mt, &SwapMove::transfer(2, 1, 2)).is_err());
        let wrong = SwapMove { kind: MoveKind::Add, ..SwapMove::remove(0, 0) };
        assert!(apply_move(&mt, &wrong).is_err());
    }

    #[test]
    fn remove_can_put_a_ubs_to_sleep() {
        let out = apply_move(&toy(), &SwapMove::remove(2, 2)).unwrap();
        assert!(!out.assoc().is_active(2));
        assert_eq!(out.assoc().active_count(), 2);
    }

    #[test]
    fn enumerated_moves_apply_cleanly() {
        let mt = toy();
        let moves = candidate_moves(&mt);
        assert!(!moves.is_empty());
        for mv in &moves {
            let out = apply_move(&mt, mv).unwrap();
            assert_ne!(out, mt);
        }
        let mut seen = std::collections::HashSet::new();
        for mv in &moves {
            assert!(seen.insert(apply_move(&mt, mv).unwrap().assoc().fingerprint()), "duplicate result for {mv:?}");
        }
    }

    fn arb_matching() -> impl Strategy<Value = Matching> {
        (1usize..5, 1usize..5, 1usize..4, 1usize..4).prop_flat_map(|(m, k, l, n)| {
            proptest::collection::vec(any::<bool>(), m * k).prop_map(move |bits| {
                let mut a = Association::empty(m, k);
                for mi in 0..m {
                    for ki in 0..k {
                        if bits[mi * k + ki] && a.ue_degree(ki) < l && a.ubs_load(mi) < n {
                            a.set(mi, ki, true);
                        }
                    }
                }
                Matching::new(a, l, n).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn moves_preserve_caps_and_invert(mt in arb_matching()) {
            for mv in candidate_moves(&mt) {
                let out = apply_move(&mt, &mv).unwrap();
                prop_assert!(out.assoc().satisfies_caps(mt.ue_cap(), mt.ubs_cap()));
                for m in 0..out.assoc().num_ubs() {
                    prop_assert_eq!(out.assoc().is_active(m), out.assoc().served(m).next().is_some());
                }
                let back = apply_move(&out, &mv.inverse()).unwrap();
                prop_assert_eq!(&back, &mt);
            }
        }
    }
}

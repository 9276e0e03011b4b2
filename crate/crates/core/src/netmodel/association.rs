use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary UBS-UE association `S` with the derived UBS activity vector `A`.
///
/// `A[m] = max_k S[m,k]` is kept in sync by every mutator, so a UBS with no
/// served UE is asleep by construction.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Association {
    m: usize,
    k: usize,
    s: Vec<bool>,
    active: Vec<bool>,
}

impl Association {
    pub fn empty(m: usize, k: usize) -> Self {
        Self {
            m,
            k,
            s: vec![false; m * k],
            active: vec![false; m],
        }
    }

    /// Builds an association from a row-major `M x K` 0/1 matrix.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        let mut a = Self::empty(m, k);
        for (mi, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension(format!("row {mi} has {} entries, expected {k}", row.len())));
            }
            for (ki, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => a.set(mi, ki, true),
                    _ => return Err(Error::Dimension(format!("S[{mi},{ki}] = {v} is not binary"))),
                }
            }
        }
        Ok(a)
    }

    pub fn num_ubs(&self) -> usize {
        self.m
    }

    pub fn num_ue(&self) -> usize {
        self.k
    }

    pub fn get(&self, m: usize, k: usize) -> bool {
        self.s[m * self.k + k]
    }

    pub fn set(&mut self, m: usize, k: usize, on: bool) {
        self.s[m * self.k + k] = on;
        self.active[m] = on || (0..self.k).any(|kk| self.s[m * self.k + kk]);
    }

    pub fn is_active(&self, m: usize) -> bool {
        self.active[m]
    }

    pub fn activity(&self) -> &[bool] {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Serving set of UE `k`, ascending UBS index.
    pub fn serving(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.m).filter(move |&m| self.get(m, k))
    }

    /// UEs served by UBS `m`, ascending UE index.
    pub fn served(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(move |&k| self.get(m, k))
    }

    pub fn ue_degree(&self, k: usize) -> usize {
        self.serving(k).count()
    }

    pub fn ubs_load(&self, m: usize) -> usize {
        self.served(m).count()
    }

    /// Checks the per-UE cap `L` and the per-UBS cap `N`.
    pub fn check_caps(&self, l: usize, n: usize) -> Result<()> {
        for k in 0..self.k {
            let d = self.ue_degree(k);
            if d > l {
                return Err(Error::Dimension(format!("UE {k} is served by {d} UBSs, cap is {l}")));
            }
        }
        for m in 0..self.m {
            let d = self.ubs_load(m);
            if d > n {
                return Err(Error::Dimension(format!("UBS {m} serves {d} UEs, cap is {n}")));
            }
        }
        Ok(())
    }

    pub fn satisfies_caps(&self, l: usize, n: usize) -> bool {
        self.check_caps(l, n).is_ok()
    }

    /// Exact canonical fingerprint: `S` packed row-major into 64-bit words.
    pub fn fingerprint(&self) -> Vec<u64> {
        let mut words = vec![0u64; (self.s.len() + 63) / 64];
        for (i, &b) in self.s.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }

    /// Row-major 0/1 rows, the inverse of [`Association::from_rows`].
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.m).map(|m| (0..self.k).map(|k| self.get(m, k) as u8).collect()).collect()
    }

    /// Row-major bits, used for lexicographic tie-breaking.
    pub fn bits(&self) -> &[bool] {
        &self.s
    }
}

impl fmt::Debug for Association {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Association[")?;
        for m in 0..self.m {
            if m > 0 {
                write!(f, "|")?;
            }
            for k in 0..self.k {
                write!(f, "{}", self.get(m, k) as u8)?;
            }
        }
        write!(f, "]")
    }
}

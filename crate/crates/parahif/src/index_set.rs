//! Ordered DOF index sets and the active-DOF bitset.
//!
//! DOF indices are stored as `u32`: the largest supported grids stay well
//! under 2^32 unknowns and the factorization keeps many index lists alive at
//! once, so the half-width representation matters for memory.

use crate::error::{Error, Result};

/// Strictly increasing set of DOF indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSet {
    idx: Vec<u32>,
}

impl IndexSet {
    /// Wraps a vector that is already strictly increasing.
    pub fn from_sorted(idx: Vec<u32>) -> Self {
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]), "not strictly increasing");
        IndexSet { idx }
    }

    /// Sorts and deduplicates arbitrary input.
    pub fn from_unsorted(mut idx: Vec<u32>) -> Self {
        idx.sort_unstable();
        idx.dedup();
        IndexSet { idx }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.idx[i] as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.idx.iter().map(|&i| i as usize)
    }

    pub fn as_u32(&self) -> &[u32] {
        &self.idx
    }

    pub fn contains(&self, dof: usize) -> bool {
        self.position(dof).is_some()
    }

    /// Position of `dof` within the set, if present.
    pub fn position(&self, dof: usize) -> Option<usize> {
        let d = u32::try_from(dof).ok()?;
        self.idx.binary_search(&d).ok()
    }

    /// Elements also present in `active`.
    pub fn intersect_active(&self, active: &ActiveSet) -> IndexSet {
        IndexSet {
            idx: self.idx.iter().copied().filter(|&i| active.contains(i as usize)).collect(),
        }
    }

    /// Elements of `self` not in `other` (both sorted, merged linearly).
    pub fn minus(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.idx.len());
        let mut j = 0;
        for &i in &self.idx {
            while j < other.idx.len() && other.idx[j] < i {
                j += 1;
            }
            if j >= other.idx.len() || other.idx[j] != i {
                out.push(i);
            }
        }
        IndexSet { idx: out }
    }
}

/// Membership bitset over all DOFs of a problem, tracking which are still
/// coupled (not yet decoupled by elimination or skeletonization).
#[derive(Debug, Clone)]
pub struct ActiveSet {
    active: Vec<bool>,
    count: usize,
}

impl ActiveSet {
    pub fn full(n: usize) -> Self {
        ActiveSet { active: vec![true; n], count: n }
    }

    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn contains(&self, dof: usize) -> bool {
        self.active[dof]
    }

    /// Marks a DOF decoupled. Errors if it already was: every DOF must be
    /// decoupled exactly once over a factorization.
    pub fn deactivate(&mut self, dof: usize) -> Result<()> {
        if !self.active[dof] {
            return Err(Error::Numerical(format!("dof {dof} decoupled twice")));
        }
        self.active[dof] = false;
        self.count -= 1;
        Ok(())
    }

    pub fn deactivate_all(&mut self, set: &IndexSet) -> Result<()> {
        for dof in set.iter() {
            self.deactivate(dof)?;
        }
        Ok(())
    }

    /// Remaining members as an ordered set.
    pub fn to_index_set(&self) -> IndexSet {
        IndexSet {
            idx: (0..self.active.len() as u32).filter(|&i| self.active[i as usize]).collect(),
        }
    }
}

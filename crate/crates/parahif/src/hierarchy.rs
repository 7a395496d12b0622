//! Geometric grouping of grid DOFs for the multilevel factorization.
//!
//! Level `l` tiles the grid with cells of `leaf * 2^l` grid cells per side.
//! Every interior node is classified by how many of its coordinates are
//! multiples of the tile size `s`:
//!
//! - 0 axes: interior of one tile,
//! - 1 axis: codimension-1 separator (edge in 2D, face in 3D),
//! - 2 axes, 3D only: codimension-2 separator (edge),
//! - all axes: corner (always a single node).
//!
//! The classification is total and disjoint at every level, so each
//! [`LevelGroups`] is a partition of all DOFs; the factorization intersects
//! it with its active set as levels are consumed.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::index_set::{ActiveSet, IndexSet};

#[derive(Debug, Clone)]
pub struct LevelGroups {
    /// One group per tile, lexicographic tile order.
    pub interiors: Vec<IndexSet>,
    /// Codimension-1 separators, grouped per (axis, plane, lateral tile).
    pub codim1: Vec<IndexSet>,
    /// Codimension-2 separators; empty in 2D.
    pub codim2: Vec<IndexSet>,
    /// Corner nodes, one group per node.
    pub corners: Vec<IndexSet>,
}

impl LevelGroups {
    pub fn all_boundary_groups(&self) -> impl Iterator<Item = &IndexSet> {
        self.codim1.iter().chain(&self.codim2).chain(&self.corners)
    }

    /// Defensive partition check: the active restrictions of all groups must
    /// cover every active DOF exactly once.
    pub fn coverage_check(&self, active: &ActiveSet) -> Result<()> {
        let covered: usize = self
            .interiors
            .iter()
            .chain(self.all_boundary_groups())
            .map(|g| g.intersect_active(active).len())
            .sum();
        if covered != active.count() {
            return Err(Error::Numerical(format!(
                "level groups cover {covered} of {} active dofs",
                active.count()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DofHierarchy {
    pub levels: Vec<LevelGroups>,
}

/// Intersects each group with the active set, dropping groups that have no
/// active members left.
pub fn active_groups(groups: &[IndexSet], active: &ActiveSet) -> Vec<IndexSet> {
    groups
        .iter()
        .map(|g| g.intersect_active(active))
        .filter(|g| !g.is_empty())
        .collect()
}

fn build_level(grid: &GridSpec, level: usize) -> LevelGroups {
    let d = grid.dim;
    let s = grid.leaf << level;
    let cells = grid.n / s;
    debug_assert!(cells >= 2);

    let n_interior = cells.pow(d as u32);
    let per_axis_c1 = (cells - 1) * cells.pow(d as u32 - 1);
    let n_codim1 = d * per_axis_c1;
    let per_axis_c2 = if d == 3 { (cells - 1) * (cells - 1) * cells } else { 0 };
    let n_codim2 = d * per_axis_c2; // keyed by the free axis
    let n_corners = (cells - 1).pow(d as u32);

    let mut interiors: Vec<Vec<u32>> = vec![Vec::new(); n_interior];
    let mut codim1: Vec<Vec<u32>> = vec![Vec::new(); n_codim1];
    let mut codim2: Vec<Vec<u32>> = vec![Vec::new(); n_codim2];
    let mut corners: Vec<Vec<u32>> = vec![Vec::new(); n_corners];

    for idx in 0..grid.n_dofs() {
        let co = grid.dof_coords(idx);
        let mut constrained = [false; 3];
        let mut n_constrained = 0;
        for a in 0..d {
            if co[a] % s == 0 {
                constrained[a] = true;
                n_constrained += 1;
            }
        }
        // tile coordinate per axis; on constrained axes co[a]/s is the
        // 1-based plane index instead
        let mut cell = [0usize; 3];
        for a in 0..d {
            cell[a] = co[a] / s;
        }
        match n_constrained {
            0 => {
                let mut id = 0;
                for a in (0..d).rev() {
                    id = id * cells + cell[a];
                }
                interiors[id].push(idx as u32);
            }
            1 => {
                let axis = (0..d).find(|&a| constrained[a]).unwrap();
                let mut lateral = 0;
                for a in (0..d).rev() {
                    if a != axis {
                        lateral = lateral * cells + cell[a];
                    }
                }
                let id = axis * per_axis_c1 + lateral * (cells - 1) + (cell[axis] - 1);
                codim1[id].push(idx as u32);
            }
            2 if d == 3 => {
                let free = (0..d).find(|&a| !constrained[a]).unwrap();
                let planes: Vec<usize> =
                    (0..d).filter(|&a| a != free).map(|a| cell[a] - 1).collect();
                let id = free * per_axis_c2
                    + (cell[free] * (cells - 1) + planes[1]) * (cells - 1)
                    + planes[0];
                codim2[id].push(idx as u32);
            }
            _ => {
                let mut id = 0;
                for a in (0..d).rev() {
                    id = id * (cells - 1) + (cell[a] - 1);
                }
                corners[id].push(idx as u32);
            }
        }
    }

    let pack = |v: Vec<Vec<u32>>| v.into_iter().map(IndexSet::from_sorted).collect();
    LevelGroups {
        interiors: pack(interiors),
        codim1: pack(codim1),
        codim2: pack(codim2),
        corners: pack(corners),
    }
}

/// Builds the full hierarchy; `grid.levels == 0` yields no levels, meaning
/// the whole problem is handled by the dense root.
pub fn build_hierarchy(grid: &GridSpec) -> DofHierarchy {
    DofHierarchy {
        levels: (0..grid.levels).map(|l| build_level(grid, l)).collect(),
    }
}

pub fn kind_name(dim: usize, category: usize) -> &'static str {
    match (dim, category) {
        (_, 0) => "interior",
        (2, 1) => "edge",
        (3, 1) => "face",
        (3, 2) => "edge",
        _ => "corner",
    }
}

/// Human-readable listing of the per-level classification, one line per DOF.
pub fn classification_dump(grid: &GridSpec) -> String {
    use std::fmt::Write;
    let hier = build_hierarchy(grid);
    let mut out = String::new();
    for (l, groups) in hier.levels.iter().enumerate() {
        let s = grid.leaf << l;
        let cells = grid.n / s;
        writeln!(out, "level {l}: {cells}^{} tiles of {s} grid cells per side", grid.dim).unwrap();
        let mut label = vec![("", 0usize); grid.n_dofs()];
        let cats: [&[IndexSet]; 4] =
            [&groups.interiors, &groups.codim1, &groups.codim2, &groups.corners];
        for (cat, sets) in cats.iter().enumerate() {
            for (gi, set) in sets.iter().enumerate() {
                for dof in set.iter() {
                    label[dof] = (kind_name(grid.dim, cat), gi);
                }
            }
        }
        for idx in 0..grid.n_dofs() {
            let co = grid.dof_coords(idx);
            let (kind, gi) = label[idx];
            if grid.dim == 2 {
                writeln!(out, "  dof {idx} at ({},{}): {kind} {gi}", co[0], co[1]).unwrap();
            } else {
                writeln!(out, "  dof {idx} at ({},{},{}): {kind} {gi}", co[0], co[1], co[2])
                    .unwrap();
            }
        }
    }
    out
}

//! The three per-level transforms. Each consumes the current level matrix
//! and produces the factors plus the next matrix, rebuilt from triplets
//! rather than mutated in place.
//!
//! Rebuilt matrices carry no rows for decoupled DOFs; the root operator is
//! understood to act as the identity there.

use crate::dense::{cholesky, dot, interpolative_decomposition, DenseBlock, Side};
use crate::error::{Error, Result};
use crate::index_set::{ActiveSet, IndexSet};
use crate::sparse::{interacting_dofs, SymSparse, Triplet};

use super::{lift_chol, EliminationFactor, JacobiFactor, SkelFactor};

/// Exact elimination of the given interior groups. Distinct interiors never
/// couple and their Schur corrections land only on boundary-boundary
/// entries, so every factor is computed from the frozen input matrix and the
/// corrections are accumulated in one rebuild.
pub fn eliminate_cells(
    a: &SymSparse,
    targets: &[IndexSet],
    active: &mut ActiveSet,
) -> Result<(Vec<EliminationFactor>, SymSparse)> {
    let mut factors = Vec::with_capacity(targets.len());
    let mut triplets: Vec<Triplet> = Vec::new();

    for target in targets {
        let boundary = interacting_dofs(a, target, active);
        let a_ii = a.extract_block(target, target);
        let a_ib = a.extract_block(target, &boundary);
        let l = cholesky(&a_ii).map_err(|e| lift_chol(e, target))?;
        let mut w = a_ib.clone();
        l.solve_block(&mut w, Side::Left, false);
        l.solve_block(&mut w, Side::Left, true);

        // Schur correction, lower triangle: X = A_BB - A_IB^T W
        for bj in 0..boundary.len() {
            let wj = w.col(bj);
            for bi in bj..boundary.len() {
                let v = -dot(a_ib.col(bi), wj);
                if v != 0.0 {
                    triplets.push((boundary.get(bi) as u32, boundary.get(bj) as u32, v));
                }
            }
        }

        active.deactivate_all(target)?;
        factors.push(EliminationFactor { target: target.clone(), boundary, l, coupling: w });
    }

    a.lower_triplets_filtered(|i, j| active.contains(i) && active.contains(j), &mut triplets);
    let next = SymSparse::assemble(a.dim(), triplets)?;
    Ok((factors, next))
}

/// Symmetric block rescale of every separator group: diagonal blocks become
/// exact identities, cross blocks `E` become `L_g^{-1} E L_h^{-T}`. The next
/// matrix is rebuilt from fresh triplets alone, which requires the groups to
/// cover every DOF that still has couplings.
pub fn jacobi_rescale(
    a: &SymSparse,
    targets: Vec<IndexSet>,
) -> Result<(Vec<JacobiFactor>, SymSparse)> {
    let mut owner = vec![u32::MAX; a.dim()];
    for (gi, t) in targets.iter().enumerate() {
        for d in t.iter() {
            owner[d] = gi as u32;
        }
    }
    for i in 0..a.dim() {
        let (cols, _) = a.row(i);
        if !cols.is_empty() && owner[i] == u32::MAX {
            return Err(Error::Numerical(format!(
                "dof {i} still couples but belongs to no rescale group"
            )));
        }
    }

    let mut factors = Vec::with_capacity(targets.len());
    for t in targets {
        let block = a.extract_block(&t, &t);
        let l = cholesky(&block).map_err(|e| lift_chol(e, &t))?;
        factors.push(JacobiFactor { target: t, l });
    }

    let mut triplets: Vec<Triplet> = Vec::new();
    for f in &factors {
        for d in f.target.iter() {
            triplets.push((d as u32, d as u32, 1.0));
        }
    }
    // transformed cross blocks, one (g, h) orientation per coupled pair
    let mut partners: Vec<u32> = Vec::new();
    for (gi, f) in factors.iter().enumerate() {
        partners.clear();
        for d in f.target.iter() {
            let (cols, _) = a.row(d);
            for &c in cols {
                let o = owner[c as usize];
                if o != u32::MAX && o > gi as u32 {
                    partners.push(o);
                }
            }
        }
        partners.sort_unstable();
        partners.dedup();
        for &h in partners.iter() {
            let other = &factors[h as usize];
            let mut e = a.extract_block(&f.target, &other.target);
            f.l.solve_block(&mut e, Side::Left, false);
            other.l.solve_block(&mut e, Side::Right, true);
            for c in 0..other.target.len() {
                let j = other.target.get(c) as u32;
                for (r, &v) in e.col(c).iter().enumerate() {
                    if v != 0.0 {
                        triplets.push((f.target.get(r) as u32, j, v));
                    }
                }
            }
        }
    }
    let next = SymSparse::assemble(a.dim(), triplets)?;
    Ok((factors, next))
}

/// Interpolative skeletonization of the codimension-1 groups. All strips are
/// decomposed against the frozen input matrix and active set, so the result
/// does not depend on group order; the redundant DOFs of every group are
/// deactivated together afterwards. Dropping their residual couplings is the
/// only approximation in the factorization.
pub fn skeletonize_edges(
    a: &SymSparse,
    edges: Vec<IndexSet>,
    eps: f64,
    active: &mut ActiveSet,
) -> Result<(Vec<SkelFactor>, SymSparse)> {
    let n = a.dim();
    let mut factors: Vec<SkelFactor> = Vec::new();
    let mut triplets: Vec<Triplet> = Vec::new();
    let mut redundant_mask = vec![false; n];
    let mut skeleton_diag = vec![false; n];

    for group in &edges {
        let reach = interacting_dofs(a, group, active);
        let strip = a.extract_block(&reach, group);
        let id = interpolative_decomposition(&strip, eps);
        if id.redundant.is_empty() {
            continue; // group kept whole, its identity block stays as is
        }
        let skeleton = IndexSet::from_sorted(
            id.skeleton.iter().map(|&c| group.get(c) as u32).collect(),
        );
        let redundant = IndexSet::from_sorted(
            id.redundant.iter().map(|&c| group.get(c) as u32).collect(),
        );
        for d in redundant.iter() {
            redundant_mask[d] = true;
        }
        for d in skeleton.iter() {
            skeleton_diag[d] = true;
        }

        // after the Jacobi pass the group block is the identity, so
        // eliminating the redundant part needs only chol(I + T^T T)
        let t = id.t;
        let k = redundant.len();
        let mut gram = DenseBlock::identity(k);
        for c2 in 0..k {
            for c1 in c2..k {
                let v = gram.at(c1, c2) + dot(t.col(c1), t.col(c2));
                gram.set(c1, c2, v);
                gram.set(c2, c1, v);
            }
        }
        let l = cholesky(&gram).map_err(|e| lift_chol(e, &redundant))?;
        let mut g = t.transpose();
        l.solve_block(&mut g, Side::Left, false);
        l.solve_block(&mut g, Side::Left, true);

        // replacement diagonal block on the skeleton: X = I - T G
        let tg = t.mul(&g);
        for bj in 0..skeleton.len() {
            for bi in bj..skeleton.len() {
                let v = if bi == bj { 1.0 - tg.at(bi, bj) } else { -tg.at(bi, bj) };
                if v != 0.0 {
                    triplets.push((skeleton.get(bi) as u32, skeleton.get(bj) as u32, v));
                }
            }
        }
        factors.push(SkelFactor { skeleton, redundant, t, l, g });
    }

    for f in &factors {
        active.deactivate_all(&f.redundant)?;
    }
    a.lower_triplets_filtered(
        |i, j| !redundant_mask[i] && !redundant_mask[j] && !(i == j && skeleton_diag[i]),
        &mut triplets,
    );
    let next = SymSparse::assemble(n, triplets)?;
    Ok((factors, next))
}

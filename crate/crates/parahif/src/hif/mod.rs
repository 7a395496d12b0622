//! Multilevel generalized Cholesky factorization on grid hierarchies.
//!
//! Each level applies three sparsity-preserving congruence transforms to the
//! running matrix: exact elimination of tile interiors, block Jacobi
//! rescaling of every separator group (making their diagonal blocks exact
//! identities), and interpolative skeletonization of the codimension-1
//! groups, which is the single lossy step. What survives all levels is
//! factored densely at the root.
//!
//! Writing the per-level transform as `R = M C K`, the factorization is
//!
//! ```text
//! A  ~=  R_0^{-T} .. R_{L-1}^{-T}  A_L  R_{L-1}^{-1} .. R_0^{-1}
//! ```
//!
//! with `A_L` the identity on decoupled DOFs plus the dense root block, so
//! both `F x` and `F^{-1} x` are products of triangular and small dense
//! blocks. The factorization of an SPD matrix is SPD by construction.

pub mod apply;
pub mod steps;

use crate::dense::{cholesky, DenseBlock, LowerTriangular};
use crate::error::{Error, Result};
use crate::hierarchy::{active_groups, DofHierarchy};
use crate::index_set::{ActiveSet, IndexSet};
use crate::sparse::SymSparse;

/// Exact elimination of one tile interior `I` against its boundary `B`:
/// `L = chol(A_II)`, `W = A_II^{-1} A_IB`.
#[derive(Debug, Clone)]
pub struct EliminationFactor {
    pub target: IndexSet,
    pub boundary: IndexSet,
    pub l: LowerTriangular,
    /// `|I| x |B|`.
    pub coupling: DenseBlock,
}

/// Symmetric rescale of one separator group by `L^{-T}`, `L = chol(A_gg)`.
#[derive(Debug, Clone)]
pub struct JacobiFactor {
    pub target: IndexSet,
    pub l: LowerTriangular,
}

/// Interpolative reduction of one codimension-1 group into skeleton and
/// redundant parts: the redundant columns of the coupling strip factor as
/// `A[:, red] ~= A[:, skel] T`, and with the identity diagonal block left by
/// the Jacobi pass the redundant DOFs are eliminated through
/// `L = chol(I + T^T T)` and `G = (I + T^T T)^{-1} T^T`.
#[derive(Debug, Clone)]
pub struct SkelFactor {
    pub skeleton: IndexSet,
    pub redundant: IndexSet,
    /// `|skel| x |red|`.
    pub t: DenseBlock,
    pub l: LowerTriangular,
    /// `|red| x |skel|`.
    pub g: DenseBlock,
}

#[derive(Debug, Clone, Default)]
pub struct Level {
    pub eliminations: Vec<EliminationFactor>,
    pub jacobi: Vec<JacobiFactor>,
    pub skels: Vec<SkelFactor>,
}

#[derive(Debug, Clone)]
pub struct HifFactor {
    n: usize,
    eps: f64,
    pub levels: Vec<Level>,
    /// DOFs still coupled at the root.
    pub root: IndexSet,
    pub root_l: LowerTriangular,
}

/// Per-level size accounting, for reporting.
#[derive(Debug, Clone, Copy)]
pub struct LevelStats {
    pub eliminated: usize,
    pub redundant: usize,
    pub skeleton_kept: usize,
    pub active_after: usize,
}

/// The running level matrix around each transform of one level, recorded by
/// [`factorize_with_trace`]. Decoupled DOFs carry no rows in these matrices;
/// a dense reconstruction must treat them as identity.
#[derive(Debug, Clone)]
pub struct StageTrace {
    pub entry: SymSparse,
    pub after_elimination: SymSparse,
    pub after_jacobi: SymSparse,
    pub after_skeletonization: SymSparse,
}

pub fn factorize(a: &SymSparse, hier: &DofHierarchy, eps: f64) -> Result<HifFactor> {
    factorize_inner(a, hier, eps, None)
}

/// Factorizes while snapshotting the level matrices, so tests and
/// diagnostics can verify each congruence transform against a dense oracle.
pub fn factorize_with_trace(
    a: &SymSparse,
    hier: &DofHierarchy,
    eps: f64,
) -> Result<(HifFactor, Vec<StageTrace>)> {
    let mut trace = Vec::new();
    let f = factorize_inner(a, hier, eps, Some(&mut trace))?;
    Ok((f, trace))
}

fn factorize_inner(
    a: &SymSparse,
    hier: &DofHierarchy,
    eps: f64,
    mut trace: Option<&mut Vec<StageTrace>>,
) -> Result<HifFactor> {
    let n = a.dim();
    let mut active = ActiveSet::full(n);
    let mut cur = a.clone();
    let mut levels = Vec::with_capacity(hier.levels.len());

    for groups in &hier.levels {
        groups.coverage_check(&active)?;
        let entry = trace.is_some().then(|| cur.clone());

        let interiors = active_groups(&groups.interiors, &active);
        let (eliminations, next) = steps::eliminate_cells(&cur, &interiors, &mut active)?;
        cur = next;
        let after_elimination = trace.is_some().then(|| cur.clone());

        let mut boundary = active_groups(&groups.codim1, &active);
        boundary.extend(active_groups(&groups.codim2, &active));
        boundary.extend(active_groups(&groups.corners, &active));
        let (jacobi, next) = steps::jacobi_rescale(&cur, boundary)?;
        cur = next;
        let after_jacobi = trace.is_some().then(|| cur.clone());

        let edges = active_groups(&groups.codim1, &active);
        let (skels, next) = steps::skeletonize_edges(&cur, edges, eps, &mut active)?;
        cur = next;

        if let Some(t) = trace.as_deref_mut() {
            t.push(StageTrace {
                entry: entry.unwrap(),
                after_elimination: after_elimination.unwrap(),
                after_jacobi: after_jacobi.unwrap(),
                after_skeletonization: cur.clone(),
            });
        }
        levels.push(Level { eliminations, jacobi, skels });
    }

    let root = active.to_index_set();
    let block = cur.extract_block(&root, &root);
    let root_l = cholesky(&block).map_err(|e| lift_chol(e, &root))?;
    Ok(HifFactor { n, eps, levels, root, root_l })
}

/// Rewrites a block-local breakdown index as the global DOF it belongs to.
pub(crate) fn lift_chol(e: Error, set: &IndexSet) -> Error {
    match e {
        Error::NotPositiveDefinite { index, value } => {
            Error::NotPositiveDefinite { index: set.get(index), value }
        }
        other => other,
    }
}

impl HifFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn root_size(&self) -> usize {
        self.root.len()
    }

    /// DOFs removed by elimination or skeletonization across all levels.
    /// Together with the root they account for every DOF exactly once.
    pub fn decoupled_count(&self) -> usize {
        self.levels
            .iter()
            .map(|lev| {
                lev.eliminations.iter().map(|e| e.target.len()).sum::<usize>()
                    + lev.skels.iter().map(|s| s.redundant.len()).sum::<usize>()
            })
            .sum()
    }

    pub fn stored_floats(&self) -> usize {
        let mut floats = self.root_l.float_count();
        for lev in &self.levels {
            for e in &lev.eliminations {
                floats += e.l.float_count() + e.coupling.float_count();
            }
            for j in &lev.jacobi {
                floats += j.l.float_count();
            }
            for s in &lev.skels {
                floats += s.t.float_count() + s.l.float_count() + s.g.float_count();
            }
        }
        floats
    }

    fn stored_indices(&self) -> usize {
        let mut idx = self.root.len();
        for lev in &self.levels {
            for e in &lev.eliminations {
                idx += e.target.len() + e.boundary.len();
            }
            for j in &lev.jacobi {
                idx += j.target.len();
            }
            for s in &lev.skels {
                idx += s.skeleton.len() + s.redundant.len();
            }
        }
        idx
    }

    /// Bytes held by the factor: 8 per stored float, 4 per stored index.
    pub fn memory_bytes(&self) -> usize {
        8 * self.stored_floats() + 4 * self.stored_indices()
    }

    pub fn level_stats(&self) -> Vec<LevelStats> {
        let mut out = Vec::with_capacity(self.levels.len());
        let mut active = self.n;
        for lev in &self.levels {
            let eliminated: usize = lev.eliminations.iter().map(|e| e.target.len()).sum();
            let redundant: usize = lev.skels.iter().map(|s| s.redundant.len()).sum();
            let skeleton_kept: usize = lev.skels.iter().map(|s| s.skeleton.len()).sum();
            active -= eliminated + redundant;
            out.push(LevelStats { eliminated, redundant, skeleton_kept, active_after: active });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::dot;
    use crate::grid::{build_stiffness, sample_coeff, CoeffField, GridSpec};
    use crate::hierarchy::build_hierarchy;
    use crate::rng;

    fn small_problem(dim: usize, n: usize) -> (GridSpec, SymSparse) {
        let g = GridSpec::with_depth(dim, n, 2).unwrap();
        let field = CoeffField::Bumps { m: 6, sigma2: 0.02, lo: 0.5, hi: 2.0 };
        let c = sample_coeff(&field, &g, 3);
        let m = build_stiffness(&g, &c).unwrap();
        // factor the positive definite Crank-Nicolson matrix I - dt/2 M
        let (a, _) = crate::grid::build_cn_pair(&m, g.h());
        (g, a)
    }

    #[test]
    fn exact_inverse_when_nothing_is_dropped() {
        for (dim, n) in [(2usize, 4usize), (2, 8), (3, 4)] {
            let (g, a) = small_problem(dim, n);
            let hier = build_hierarchy(&g);
            let f = factorize(&a, &hier, 1e-15).unwrap();
            assert_eq!(f.decoupled_count() + f.root_size(), a.dim());
            for trial in 0..3 {
                let x: Vec<f64> =
                    (0..a.dim()).map(|i| rng::signed_f64(trial, i as u64)).collect();
                let mut y = vec![0.0; a.dim()];
                a.spmv(&x, &mut y);
                f.apply_inverse(&mut y);
                let err: f64 = y
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                assert!(err < 1e-11, "dim {dim} n {n}: |F^-1 A x - x| = {err}");
            }
        }
    }

    #[test]
    fn apply_and_apply_inverse_cancel() {
        let (g, a) = small_problem(2, 8);
        let f = factorize(&a, &build_hierarchy(&g), 1e-2).unwrap();
        let x: Vec<f64> = (0..a.dim()).map(|i| rng::signed_f64(9, i as u64)).collect();
        let mut y = x.clone();
        f.apply(&mut y);
        f.apply_inverse(&mut y);
        let err = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn factor_is_symmetric_positive() {
        let (g, a) = small_problem(2, 8);
        let f = factorize(&a, &build_hierarchy(&g), 1e-1).unwrap();
        let n = a.dim();
        for trial in 0..4 {
            let x: Vec<f64> = (0..n).map(|i| rng::signed_f64(20 + trial, i as u64)).collect();
            let y: Vec<f64> = (0..n).map(|i| rng::signed_f64(40 + trial, i as u64)).collect();
            let mut fx = x.clone();
            f.apply_inverse(&mut fx);
            let mut fy = y.clone();
            f.apply_inverse(&mut fy);
            let xt_fy = dot(&x, &fy);
            let yt_fx = dot(&y, &fx);
            assert!((xt_fy - yt_fx).abs() <= 1e-12 * xt_fy.abs().max(yt_fx.abs()));
            assert!(dot(&x, &fx) > 0.0);
        }
    }

    #[test]
    fn zero_levels_is_a_dense_solve() {
        let g = GridSpec::new(2, 4, 4, 0).unwrap();
        let c = sample_coeff(&CoeffField::Constant(1.0), &g, 0);
        let m = build_stiffness(&g, &c).unwrap();
        let (a, _) = crate::grid::build_cn_pair(&m, g.h());
        let f = factorize(&a, &build_hierarchy(&g), 1e-3).unwrap();
        assert_eq!(f.root_size(), a.dim());
        assert_eq!(f.decoupled_count(), 0);
        assert_eq!(
            f.stored_floats(),
            a.dim() * (a.dim() + 1) / 2,
            "dense root only"
        );
        let mut y = vec![0.0; a.dim()];
        let x: Vec<f64> = (0..a.dim()).map(|i| rng::unit_f64(3, i as u64)).collect();
        a.spmv(&x, &mut y);
        f.apply_inverse(&mut y);
        for (yi, xi) in y.iter().zip(&x) {
            assert!((yi - xi).abs() < 1e-12);
        }
    }

    #[test]
    fn memory_grows_as_eps_tightens() {
        let (g, a) = small_problem(2, 16);
        let hier = build_hierarchy(&g);
        let loose = factorize(&a, &hier, 0.5).unwrap();
        let tight = factorize(&a, &hier, 1e-12).unwrap();
        assert!(loose.memory_bytes() <= tight.memory_bytes());
        assert!(loose.root_size() <= tight.root_size());
    }

    #[test]
    fn level_stats_account_for_every_dof() {
        let (g, a) = small_problem(2, 16);
        let f = factorize(&a, &build_hierarchy(&g), 1e-3).unwrap();
        let stats = f.level_stats();
        assert_eq!(stats.len(), g.levels);
        let moved: usize = stats.iter().map(|s| s.eliminated + s.redundant).sum();
        assert_eq!(moved + f.root_size(), a.dim());
        assert_eq!(stats.last().unwrap().active_after, f.root_size());
    }
}

//! Shared helpers for the integration suites: dense oracles that redo the
//! factorization arithmetic with plain Gaussian elimination and full
//! matrices, plus config-driven spec builders.

#![allow(dead_code)]

use parahif::config::{parse_config, Config};
use parahif::dense::{DenseBlock, Side};
use parahif::grid::ProblemSpec;
use parahif::hif::{EliminationFactor, JacobiFactor, SkelFactor};
use parahif::sparse::SymSparse;

/// Full symmetric dense copy of a sparse matrix.
pub fn dense_full(a: &SymSparse) -> DenseBlock {
    let n = a.dim();
    let mut d = DenseBlock::zeros(n, n);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (c, v) in cols.iter().zip(vals) {
            d.set(i, *c as usize, *v);
        }
    }
    d
}

/// Dense copy with unit diagonal on rows the sparse matrix no longer
/// carries. Mid-factorization matrices drop decoupled DOFs; the operator is
/// the identity there.
pub fn dense_embed(a: &SymSparse) -> DenseBlock {
    let mut d = dense_full(a);
    for i in 0..a.dim() {
        if a.row(i).0.is_empty() {
            d.set(i, i, 1.0);
        }
    }
    d
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting. Kept
/// deliberately naive and independent of the library's Cholesky path.
pub fn gauss_solve(a: &DenseBlock, b: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.len(), n);
    let mut m = vec![0.0f64; n * n];
    for j in 0..n {
        for i in 0..n {
            m[i * n + j] = a.at(i, j);
        }
    }
    let mut x = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if m[i * n + k].abs() > m[piv * n + k].abs() {
                piv = i;
            }
        }
        assert!(m[piv * n + k] != 0.0, "singular matrix in gauss_solve");
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k * n + j] * x[j];
        }
        x[k] = s / m[k * n + k];
    }
    x
}

/// `|x - y|_F / |y|_F`.
pub fn rel_frob_diff(x: &DenseBlock, y: &DenseBlock) -> f64 {
    assert_eq!(x.nrows(), y.nrows());
    assert_eq!(x.ncols(), y.ncols());
    let mut diff = 0.0;
    for j in 0..x.ncols() {
        for (a, b) in x.col(j).iter().zip(y.col(j)) {
            diff += (a - b) * (a - b);
        }
    }
    diff.sqrt() / y.frob_norm()
}

pub fn rel_l2_diff(x: &[f64], y: &[f64]) -> f64 {
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let base: f64 = y.iter().map(|v| v * v).sum();
    (diff / base).sqrt()
}

fn inverse_transpose(l: &parahif::dense::LowerTriangular) -> DenseBlock {
    let mut inv = DenseBlock::identity(l.dim());
    l.solve_block(&mut inv, Side::Left, true);
    inv
}

/// Dense form of a level's interior eliminations: `L^{-T}` on each target
/// block, `-W` into its boundary columns, identity elsewhere. Targets are
/// disjoint and never sit on another target's boundary, so placing the
/// blocks of all factors into one identity equals their product.
pub fn dense_elim_transform(n: usize, factors: &[EliminationFactor]) -> DenseBlock {
    let mut m = DenseBlock::identity(n);
    for f in factors {
        let linv = inverse_transpose(&f.l);
        for (bi, gi) in f.target.iter().enumerate() {
            for (bj, gj) in f.target.iter().enumerate() {
                m.set(gi, gj, linv.at(bi, bj));
            }
            for (bj, gj) in f.boundary.iter().enumerate() {
                m.set(gi, gj, -f.coupling.at(bi, bj));
            }
        }
    }
    m
}

/// Dense form of a level's block rescales: `L^{-T}` on each group, identity
/// elsewhere.
pub fn dense_jacobi_transform(n: usize, factors: &[JacobiFactor]) -> DenseBlock {
    let mut m = DenseBlock::identity(n);
    for f in factors {
        let linv = inverse_transpose(&f.l);
        for (bi, gi) in f.target.iter().enumerate() {
            for (bj, gj) in f.target.iter().enumerate() {
                m.set(gi, gj, linv.at(bi, bj));
            }
        }
    }
    m
}

/// Dense form of a level's skeletonizations, rows and columns in global
/// order: on each group the skeleton block is `I - T G`,
/// skeleton-to-redundant `-T L^{-T}`, redundant-to-skeleton `G`, redundant
/// block `L^{-T}`; identity elsewhere.
pub fn dense_skel_transform(n: usize, factors: &[SkelFactor]) -> DenseBlock {
    let mut m = DenseBlock::identity(n);
    for f in factors {
        let linv = inverse_transpose(&f.l);
        let tg = f.t.mul(&f.g);
        let mut tlinv = f.t.clone();
        f.l.solve_block(&mut tlinv, Side::Right, true);
        for (bi, gi) in f.skeleton.iter().enumerate() {
            for (bj, gj) in f.skeleton.iter().enumerate() {
                let v = if bi == bj { 1.0 - tg.at(bi, bj) } else { -tg.at(bi, bj) };
                m.set(gi, gj, v);
            }
            for (bj, gj) in f.redundant.iter().enumerate() {
                m.set(gi, gj, -tlinv.at(bi, bj));
            }
        }
        for (bi, gi) in f.redundant.iter().enumerate() {
            for (bj, gj) in f.skeleton.iter().enumerate() {
                m.set(gi, gj, f.g.at(bi, bj));
            }
            for (bj, gj) in f.redundant.iter().enumerate() {
                m.set(gi, gj, linv.at(bi, bj));
            }
        }
    }
    m
}

/// `X^T A X` for dense square blocks.
pub fn congruence(a: &DenseBlock, x: &DenseBlock) -> DenseBlock {
    x.transpose().mul(&a.mul(x))
}

/// Spectral norm of a symmetric matrix by cyclic Jacobi rotations,
/// independent of the library's power-iteration estimators.
pub fn sym_spectral_norm(a: &DenseBlock) -> f64 {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a.at(i, j)).collect()).collect();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p][q] * m[p][q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k][p];
                    let akq = m[k][q];
                    m[k][p] = c * akp - s * akq;
                    m[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p][k];
                    let aqk = m[q][k];
                    m[p][k] = c * apk - s * aqk;
                    m[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i].abs()).fold(0.0, f64::max)
}

pub fn parse(text: &str) -> Config {
    parse_config(text).expect("test config must parse")
}

/// One problem spec straight from config text, table defaults applied.
pub fn spec_from(kind: &str, n: usize, nsteps: usize, extra: &str) -> ProblemSpec {
    let text = format!("[problem]\nkind = {kind}\nn = {n}\nnsteps = {nsteps}\n{extra}\n");
    let cfg = parse(&text);
    assert_eq!(cfg.problems.len(), 1);
    cfg.problems.into_iter().next().unwrap()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

//! In-place application of the factorization and its inverse.
//!
//! With per-level transforms `R = M C K` and the root operator `A_L`
//! (identity on decoupled DOFs, dense block on the root),
//!
//! ```text
//! F^{-1} x = R_0 .. R_{L-1} A_L^{-1} R_{L-1}^T .. R_0^T x
//! F x      = R_0^{-T} .. R_{L-1}^{-T} A_L R_{L-1}^{-1} .. R_0^{-1} x
//! ```
//!
//! Factors within one pass touch disjoint targets (interiors never overlap,
//! separator groups partition the remaining DOFs, skeleton updates stay
//! inside their group), so application order within a level pass is free.

use crate::dense::LowerTriangular;
use crate::index_set::IndexSet;

use super::{EliminationFactor, HifFactor, JacobiFactor, SkelFactor};

#[derive(Default)]
struct Scratch {
    xi: Vec<f64>,
    xb: Vec<f64>,
    t1: Vec<f64>,
    t2: Vec<f64>,
}

fn gather(x: &[f64], set: &IndexSet, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(set.iter().map(|i| x[i]));
}

fn scatter(x: &mut [f64], set: &IndexSet, buf: &[f64]) {
    for (k, i) in set.iter().enumerate() {
        x[i] = buf[k];
    }
}

/// `x_B -= W^T x_I; x_I <- L^{-1} x_I`
fn elim_tr(f: &EliminationFactor, x: &mut [f64], s: &mut Scratch) {
    gather(x, &f.target, &mut s.xi);
    gather(x, &f.boundary, &mut s.xb);
    f.coupling.sub_tr_mul_vec(&s.xi, &mut s.xb);
    f.l.solve_vec(&mut s.xi, false);
    scatter(x, &f.target, &s.xi);
    scatter(x, &f.boundary, &s.xb);
}

/// `x_I <- L^{-T} x_I - W x_B`
fn elim_fwd(f: &EliminationFactor, x: &mut [f64], s: &mut Scratch) {
    gather(x, &f.target, &mut s.xi);
    gather(x, &f.boundary, &mut s.xb);
    f.l.solve_vec(&mut s.xi, true);
    f.coupling.sub_mul_vec(&s.xb, &mut s.xi);
    scatter(x, &f.target, &s.xi);
}

/// `x_I <- L^T (x_I + W x_B)`
fn elim_inv(f: &EliminationFactor, x: &mut [f64], s: &mut Scratch) {
    gather(x, &f.target, &mut s.xi);
    gather(x, &f.boundary, &mut s.xb);
    f.coupling.add_mul_vec(&s.xb, &mut s.xi);
    s.t1.clear();
    s.t1.resize(s.xi.len(), 0.0);
    f.l.mul_vec_into(&s.xi, &mut s.t1, true);
    scatter(x, &f.target, &s.t1);
}

/// `t = L x_I; x_I <- t; x_B += W^T t`
fn elim_inv_tr(f: &EliminationFactor, x: &mut [f64], s: &mut Scratch) {
    gather(x, &f.target, &mut s.xi);
    gather(x, &f.boundary, &mut s.xb);
    s.t1.clear();
    s.t1.resize(s.xi.len(), 0.0);
    f.l.mul_vec_into(&s.xi, &mut s.t1, false);
    f.coupling.add_tr_mul_vec(&s.t1, &mut s.xb);
    scatter(x, &f.target, &s.t1);
    scatter(x, &f.boundary, &s.xb);
}

#[derive(Clone, Copy)]
enum JacMode {
    Tr,    // C^T   = L^{-1}
    Fwd,   // C     = L^{-T}
    Inv,   // C^{-1} = L^T
    InvTr, // C^{-T} = L
}

fn jac(f: &JacobiFactor, mode: JacMode, x: &mut [f64], s: &mut Scratch) {
    gather(x, &f.target, &mut s.xi);
    match mode {
        JacMode::Tr => f.l.solve_vec(&mut s.xi, false),
        JacMode::Fwd => f.l.solve_vec(&mut s.xi, true),
        JacMode::Inv | JacMode::InvTr => {
            s.t1.clear();
            s.t1.resize(s.xi.len(), 0.0);
            f.l.mul_vec_into(&s.xi, &mut s.t1, matches!(mode, JacMode::Inv));
            std::mem::swap(&mut s.xi, &mut s.t1);
        }
    }
    scatter(x, &f.target, &s.xi);
}

/// `t = x_R - T^T x_S; x_S += G^T t; x_R <- L^{-1} t`
/// (S = skeleton, R = redundant)
fn skel_tr(f: &SkelFactor, x: &mut [f64], s: &mut Scratch) {
    gather(x, &f.skeleton, &mut s.xi);
    gather(x, &f.redundant, &mut s.t1);
    f.t.sub_tr_mul_vec(&s.xi, &mut s.t1);
    f.g.add_tr_mul_vec(&s.t1, &mut s.xi);
    f.l.solve_vec(&mut s.t1, false);
    scatter(x, &f.skeleton, &s.xi);
    scatter(x, &f.redundant, &s.t1);
}

/// `t = L^{-T} x_R + G x_S; x_S -= T t; x_R <- t`
fn skel_fwd(f: &SkelFactor, x: &mut [f64], s: &mut Scratch) {
    gather(x, &f.skeleton, &mut s.xi);
    gather(x, &f.redundant, &mut s.t1);
    f.l.solve_vec(&mut s.t1, true);
    f.g.add_mul_vec(&s.xi, &mut s.t1);
    f.t.sub_mul_vec(&s.t1, &mut s.xi);
    scatter(x, &f.skeleton, &s.xi);
    scatter(x, &f.redundant, &s.t1);
}

/// `z = x_S + T x_R; x_R <- L^T (x_R - G z); x_S <- z`
fn skel_inv(f: &SkelFactor, x: &mut [f64], s: &mut Scratch) {
    gather(x, &f.skeleton, &mut s.xi);
    gather(x, &f.redundant, &mut s.xb);
    s.t1.clear();
    s.t1.extend_from_slice(&s.xi);
    f.t.add_mul_vec(&s.xb, &mut s.t1);
    f.g.sub_mul_vec(&s.t1, &mut s.xb);
    s.t2.clear();
    s.t2.resize(s.xb.len(), 0.0);
    f.l.mul_vec_into(&s.xb, &mut s.t2, true);
    scatter(x, &f.skeleton, &s.t1);
    scatter(x, &f.redundant, &s.t2);
}

/// `t = L x_R; x_S -= G^T t; x_R <- t + T^T x_S`
fn skel_inv_tr(f: &SkelFactor, x: &mut [f64], s: &mut Scratch) {
    gather(x, &f.skeleton, &mut s.xi);
    gather(x, &f.redundant, &mut s.xb);
    s.t1.clear();
    s.t1.resize(s.xb.len(), 0.0);
    f.l.mul_vec_into(&s.xb, &mut s.t1, false);
    f.g.sub_tr_mul_vec(&s.t1, &mut s.xi);
    f.t.add_tr_mul_vec(&s.xi, &mut s.t1);
    scatter(x, &f.skeleton, &s.xi);
    scatter(x, &f.redundant, &s.t1);
}

fn root_solve(root: &IndexSet, l: &LowerTriangular, x: &mut [f64], s: &mut Scratch) {
    gather(x, root, &mut s.xi);
    l.solve_vec(&mut s.xi, false);
    l.solve_vec(&mut s.xi, true);
    scatter(x, root, &s.xi);
}

fn root_mul(root: &IndexSet, l: &LowerTriangular, x: &mut [f64], s: &mut Scratch) {
    gather(x, root, &mut s.xi);
    s.t1.clear();
    s.t1.resize(s.xi.len(), 0.0);
    l.mul_vec_into(&s.xi, &mut s.t1, true);
    l.mul_vec_into(&s.t1, &mut s.xi, false);
    scatter(x, root, &s.xi);
}

impl HifFactor {
    /// `x <- F^{-1} x`: one preconditioner application.
    pub fn apply_inverse(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let mut s = Scratch::default();
        for lev in &self.levels {
            for e in &lev.eliminations {
                elim_tr(e, x, &mut s);
            }
            for j in &lev.jacobi {
                jac(j, JacMode::Tr, x, &mut s);
            }
            for f in &lev.skels {
                skel_tr(f, x, &mut s);
            }
        }
        root_solve(&self.root, &self.root_l, x, &mut s);
        for lev in self.levels.iter().rev() {
            for f in &lev.skels {
                skel_fwd(f, x, &mut s);
            }
            for j in &lev.jacobi {
                jac(j, JacMode::Fwd, x, &mut s);
            }
            for e in &lev.eliminations {
                elim_fwd(e, x, &mut s);
            }
        }
    }

    /// `x <- F x`: multiplication by the implied approximation of `A`.
    pub fn apply(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let mut s = Scratch::default();
        for lev in &self.levels {
            for e in &lev.eliminations {
                elim_inv(e, x, &mut s);
            }
            for j in &lev.jacobi {
                jac(j, JacMode::Inv, x, &mut s);
            }
            for f in &lev.skels {
                skel_inv(f, x, &mut s);
            }
        }
        root_mul(&self.root, &self.root_l, x, &mut s);
        for lev in self.levels.iter().rev() {
            for f in &lev.skels {
                skel_inv_tr(f, x, &mut s);
            }
            for j in &lev.jacobi {
                jac(j, JacMode::InvTr, x, &mut s);
            }
            for e in &lev.eliminations {
                elim_inv_tr(e, x, &mut s);
            }
        }
    }
}

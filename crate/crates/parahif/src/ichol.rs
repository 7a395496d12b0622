//! Drop-tolerance incomplete Cholesky, the baseline preconditioner.
//!
//! Left-looking column factorization: column `j` is formed from `A[:, j]`
//! minus the contributions of all earlier columns with a stored entry in row
//! `j`, tracked through per-row linked lists so each column is visited only
//! when it matters. An off-diagonal entry is dropped when
//! `|L(i,j)| <= droptol * ||A[:, j]||_2`; the diagonal is always kept.
//!
//! A nonpositive pivot restarts the factorization on `A + shift I`, with the
//! shift starting at `1e-3 * max diag` and doubling, up to 20 attempts.

use crate::error::{Error, Result};
use crate::sparse::SymSparse;

#[derive(Debug, Clone)]
pub struct IncompleteCholesky {
    n: usize,
    colptr: Vec<usize>,
    /// Rows per column, ascending; the diagonal leads each column.
    rows: Vec<u32>,
    vals: Vec<f64>,
    /// Diagonal shift of the successful attempt; 0 when none was needed.
    pub shift: f64,
    pub droptol: f64,
}

enum Attempt {
    Done(IncompleteCholesky),
    Breakdown,
}

fn try_factor(a: &SymSparse, droptol: f64, shift: f64, norms: &[f64]) -> Attempt {
    let n = a.dim();
    let mut colptr = Vec::with_capacity(n + 1);
    colptr.push(0usize);
    let mut rows: Vec<u32> = Vec::new();
    let mut vals: Vec<f64> = Vec::new();

    let mut w = vec![0.0f64; n];
    let mut marked = vec![false; n];
    let mut pattern: Vec<u32> = Vec::new();
    // head[r]: first column whose next unconsumed entry sits in row r
    let mut head = vec![u32::MAX; n];
    let mut next = vec![u32::MAX; n];
    let mut cursor = vec![0usize; n];

    for j in 0..n {
        // load A[j.., j] plus the shift
        let (cols, avals) = a.row(j);
        for (c, v) in cols.iter().zip(avals) {
            let i = *c as usize;
            if i >= j {
                w[i] = *v;
                marked[i] = true;
                pattern.push(*c);
            }
        }
        if !marked[j] {
            w[j] = 0.0;
            marked[j] = true;
            pattern.push(j as u32);
        }
        w[j] += shift;

        // subtract contributions of earlier columns hitting row j
        let mut k = head[j];
        while k != u32::MAX {
            let k_next = next[k as usize];
            let idx = cursor[k as usize];
            let ljk = vals[idx];
            let col_end = colptr[k as usize + 1];
            for q in idx..col_end {
                let i = rows[q] as usize;
                if !marked[i] {
                    marked[i] = true;
                    pattern.push(rows[q]);
                    w[i] = 0.0;
                }
                w[i] -= ljk * vals[q];
            }
            if idx + 1 < col_end {
                cursor[k as usize] = idx + 1;
                let r = rows[idx + 1] as usize;
                next[k as usize] = head[r];
                head[r] = k;
            }
            k = k_next;
        }

        let pivot = w[j];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Attempt::Breakdown;
        }
        let d = pivot.sqrt();

        pattern.sort_unstable();
        let col_start = rows.len();
        for &iu in &pattern {
            let i = iu as usize;
            if i == j {
                rows.push(iu);
                vals.push(d);
            } else {
                let lij = w[i] / d;
                if lij.abs() > droptol * norms[j] {
                    rows.push(iu);
                    vals.push(lij);
                }
            }
            marked[i] = false;
            w[i] = 0.0;
        }
        pattern.clear();
        colptr.push(rows.len());

        if rows.len() > col_start + 1 {
            cursor[j] = col_start + 1;
            let r = rows[col_start + 1] as usize;
            next[j] = head[r];
            head[r] = j as u32;
        }
    }

    Attempt::Done(IncompleteCholesky { n, colptr, rows, vals, shift, droptol })
}

pub fn ichol_droptol(a: &SymSparse, droptol: f64) -> Result<IncompleteCholesky> {
    let norms = a.column_norms();
    let mut max_diag = 0.0f64;
    for i in 0..a.dim() {
        max_diag = max_diag.max(a.get(i, i));
    }
    let mut shift = 0.0;
    for _ in 0..20 {
        match try_factor(a, droptol, shift, &norms) {
            Attempt::Done(f) => return Ok(f),
            Attempt::Breakdown => {
                shift = if shift == 0.0 { 1e-3 * max_diag } else { 2.0 * shift };
            }
        }
    }
    Err(Error::Numerical(format!(
        "incomplete Cholesky breakdown persists after 20 shift doublings (last shift {shift:e})"
    )))
}

impl IncompleteCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn stored_floats(&self) -> usize {
        self.vals.len()
    }

    /// Same accounting rule as the multilevel factor: 8 bytes per float,
    /// 4 per index.
    pub fn memory_bytes(&self) -> usize {
        8 * self.vals.len() + 4 * (self.rows.len() + self.colptr.len())
    }

    /// `x <- (L L^T)^{-1} x`, the preconditioner application.
    pub fn solve(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        for j in 0..self.n {
            let s = self.colptr[j];
            let e = self.colptr[j + 1];
            x[j] /= self.vals[s];
            let xj = x[j];
            for q in s + 1..e {
                x[self.rows[q] as usize] -= self.vals[q] * xj;
            }
        }
        for j in (0..self.n).rev() {
            let s = self.colptr[j];
            let e = self.colptr[j + 1];
            let mut acc = x[j];
            for q in s + 1..e {
                acc -= self.vals[q] * x[self.rows[q] as usize];
            }
            x[j] = acc / self.vals[s];
        }
    }

    #[cfg(test)]
    fn entry(&self, i: usize, j: usize) -> f64 {
        let s = self.colptr[j];
        let e = self.colptr[j + 1];
        match self.rows[s..e].binary_search(&(i as u32)) {
            Ok(p) => self.vals[s + p],
            Err(_) => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_stiffness, build_cn_pair, sample_coeff, CoeffField, GridSpec};
    use crate::rng;
    use crate::sparse::Triplet;

    fn heat_matrix(n: usize) -> SymSparse {
        let g = GridSpec::with_depth(2, n, n / 2).unwrap();
        let field = CoeffField::Bumps { m: 8, sigma2: 0.01, lo: 0.5, hi: 3.0 };
        let c = sample_coeff(&field, &g, 2);
        let m = build_stiffness(&g, &c).unwrap();
        build_cn_pair(&m, g.h()).0
    }

    #[test]
    fn zero_droptol_is_exact_cholesky() {
        let a = heat_matrix(8);
        let f = ichol_droptol(&a, 0.0).unwrap();
        assert_eq!(f.shift, 0.0);
        for trial in 0..3 {
            let x: Vec<f64> =
                (0..a.dim()).map(|i| rng::signed_f64(trial, i as u64)).collect();
            let mut y = vec![0.0; a.dim()];
            a.spmv(&x, &mut y);
            f.solve(&mut y);
            for (yi, xi) in y.iter().zip(&x) {
                assert!((yi - xi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_stays_identity() {
        let a = SymSparse::identity(5);
        for droptol in [0.0, 1e-3, 0.9] {
            let f = ichol_droptol(&a, droptol).unwrap();
            assert_eq!(f.nnz(), 5);
            for i in 0..5 {
                assert_eq!(f.entry(i, i), 1.0);
            }
        }
    }

    #[test]
    fn huge_droptol_keeps_only_diagonals() {
        // tridiag(2, -1): off-diagonal magnitudes are far below the column
        // norms, so a droptol of 1 strips the factor to sqrt(diag)
        let mut t: Vec<Triplet> = Vec::new();
        for i in 0..6u32 {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
        }
        let a = SymSparse::assemble(6, t).unwrap();
        let f = ichol_droptol(&a, 1.0).unwrap();
        assert_eq!(f.nnz(), 6);
        for j in 0..6 {
            assert!((f.entry(j, j) - 2.0f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn pattern_rows_sorted_with_diagonal_first() {
        let a = heat_matrix(8);
        let f = ichol_droptol(&a, 1e-2).unwrap();
        for j in 0..f.n {
            let s = f.colptr[j];
            let e = f.colptr[j + 1];
            assert_eq!(f.rows[s] as usize, j);
            for q in s + 1..e {
                assert!(f.rows[q] > f.rows[q - 1]);
            }
            assert!(f.vals[s] > 0.0);
        }
    }

    #[test]
    fn indefinite_matrix_recovers_through_shifts() {
        // [[1, 4], [4, 1]] needs (1 + shift)^2 > 16 to factor
        let a =
            SymSparse::assemble(2, vec![(0, 0, 1.0), (1, 0, 4.0), (1, 1, 1.0)]).unwrap();
        let f = ichol_droptol(&a, 0.0).unwrap();
        assert!(f.shift > 3.0, "recorded shift {}", f.shift);
        assert!(f.shift < 16.0);
    }

    #[test]
    fn hopeless_matrix_reports_failure() {
        let a = SymSparse::assemble(1, vec![(0, 0, 0.0)]).unwrap();
        assert!(ichol_droptol(&a, 0.0).is_err());
    }

    #[test]
    fn dropping_reduces_fill() {
        let a = heat_matrix(16);
        let exact = ichol_droptol(&a, 0.0).unwrap();
        let dropped = ichol_droptol(&a, 1e-2).unwrap();
        assert!(dropped.nnz() < exact.nnz());
        assert!(dropped.memory_bytes() < exact.memory_bytes());
    }
}

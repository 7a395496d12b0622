//! Dense kernels: column-major blocks, packed Cholesky, triangular solves,
//! column-pivoted Householder QR, and the interpolative decomposition.
//!
//! Everything here is deliberately dependency-free and deterministic: the
//! factorization's compression choices (pivot order, rank cuts) must be
//! reproducible bit for bit for fixed inputs. Reductions use a fixed 4-way
//! accumulator split so the summation order never depends on optimization
//! whims.

use crate::error::{Error, Result};

/// Dot product with four independent accumulators (fixed association order,
/// vectorizes well).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseBlock {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseBlock { nrows, ncols, data: vec![0.0; nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Test/oracle constructor from row slices.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let nrows = rows.len();
        let ncols = if nrows == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(nrows, ncols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), ncols);
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.data[j * self.nrows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.data[j * self.nrows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> DenseBlock {
        let mut t = DenseBlock::zeros(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                t.set(j, i, self.at(i, j));
            }
        }
        t
    }

    /// `self * other`, column-axpy form.
    pub fn mul(&self, other: &DenseBlock) -> DenseBlock {
        assert_eq!(self.ncols, other.nrows);
        let mut c = DenseBlock::zeros(self.nrows, other.ncols);
        for j in 0..other.ncols {
            let cj = c.col_mut(j);
            for k in 0..self.ncols {
                axpy(cj, other.at(k, j), self.col(k));
            }
        }
        c
    }

    /// `y = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        y.fill(0.0);
        for j in 0..self.ncols {
            axpy(y, x[j], self.col(j));
        }
    }

    /// `y += self * x`.
    pub fn add_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for j in 0..self.ncols {
            axpy(y, x[j], self.col(j));
        }
    }

    /// `y -= self * x`.
    pub fn sub_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for j in 0..self.ncols {
            axpy(y, -x[j], self.col(j));
        }
    }

    /// `y += self^T * x`.
    pub fn add_tr_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for j in 0..self.ncols {
            y[j] += dot(self.col(j), x);
        }
    }

    /// `y -= self^T * x`.
    pub fn sub_tr_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for j in 0..self.ncols {
            y[j] -= dot(self.col(j), x);
        }
    }

    pub fn frob_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs_diff(&self, other: &DenseBlock) -> f64 {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn float_count(&self) -> usize {
        self.data.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Lower-triangular factor with strictly positive diagonal, packed
/// column-major (column j holds rows j..n contiguously).
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    n: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i < self.n);
        self.col_start(j) + (i - j)
    }

    #[inline]
    fn col_start(&self, j: usize) -> usize {
        // columns have lengths n, n-1, ...: start_j = j*n - j*(j-1)/2
        j * self.n - j * j.saturating_sub(1) / 2
    }

    pub fn identity(n: usize) -> Self {
        let mut l = LowerTriangular { n, data: vec![0.0; n * (n + 1) / 2] };
        for j in 0..n {
            let s = l.col_start(j);
            l.data[s] = 1.0;
        }
        l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    /// Column j restricted to rows j..n.
    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        let s = self.col_start(j);
        &self.data[s..s + self.n - j]
    }

    pub fn to_dense(&self) -> DenseBlock {
        let mut d = DenseBlock::zeros(self.n, self.n);
        for j in 0..self.n {
            for i in j..self.n {
                d.set(i, j, self.at(i, j));
            }
        }
        d
    }

    pub fn float_count(&self) -> usize {
        self.data.len()
    }

    /// In-place solve of `L x = b` (or `L^T x = b`) for a single vector.
    pub fn solve_vec(&self, x: &mut [f64], transpose: bool) {
        assert_eq!(x.len(), self.n);
        if !transpose {
            for j in 0..self.n {
                let c = self.col(j);
                x[j] /= c[0];
                let xj = x[j];
                axpy(&mut x[j + 1..], -xj, &c[1..]);
            }
        } else {
            for j in (0..self.n).rev() {
                let c = self.col(j);
                x[j] = (x[j] - dot(&c[1..], &x[j + 1..])) / c[0];
            }
        }
    }

    /// `y = L x` (or `L^T x`), out of place.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64], transpose: bool) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        if !transpose {
            y.fill(0.0);
            for j in 0..self.n {
                axpy(&mut y[j..], x[j], self.col(j));
            }
        } else {
            for j in 0..self.n {
                y[j] = dot(self.col(j), &x[j..]);
            }
        }
    }

    /// In-place triangular solve against a block: `op(L) X = B` (Left) or
    /// `X op(L) = B` (Right), overwriting `b` with the solution.
    pub fn solve_block(&self, b: &mut DenseBlock, side: Side, transpose: bool) {
        match side {
            Side::Left => {
                assert_eq!(b.nrows(), self.n);
                for c in 0..b.ncols() {
                    self.solve_vec(b.col_mut(c), transpose);
                }
            }
            Side::Right => {
                assert_eq!(b.ncols(), self.n);
                let nr = b.nrows;
                if !transpose {
                    // X L = B: solved column j needs columns i > j, so sweep down
                    for j in (0..self.n).rev() {
                        for i in j + 1..self.n {
                            let lij = self.at(i, j);
                            if lij != 0.0 {
                                let (head, tail) = b.data.split_at_mut(i * nr);
                                axpy(&mut head[j * nr..(j + 1) * nr], -lij, &tail[..nr]);
                            }
                        }
                        let inv = 1.0 / self.at(j, j);
                        for v in b.col_mut(j) {
                            *v *= inv;
                        }
                    }
                } else {
                    // X L^T = B: solved column j needs columns i < j, sweep up
                    for j in 0..self.n {
                        for i in 0..j {
                            let lji = self.at(j, i);
                            if lji != 0.0 {
                                let (head, tail) = b.data.split_at_mut(j * nr);
                                let xi = &head[i * nr..(i + 1) * nr];
                                axpy(&mut tail[..nr], -lji, xi);
                            }
                        }
                        let inv = 1.0 / self.at(j, j);
                        for v in b.col_mut(j) {
                            *v *= inv;
                        }
                    }
                }
            }
        }
    }
}

/// Cholesky factorization `A = L L^T` of a symmetric positive definite block
/// (reads the lower triangle). Fails with the pivot index on a nonpositive
/// pivot.
pub fn cholesky(a: &DenseBlock) -> Result<LowerTriangular> {
    assert_eq!(a.nrows(), a.ncols());
    let n = a.nrows();
    let mut l = LowerTriangular { n, data: vec![0.0; n * (n + 1) / 2] };
    // pack the lower triangle
    for j in 0..n {
        let s = l.col_start(j);
        for i in j..n {
            l.data[s + i - j] = a.at(i, j);
        }
    }
    // right-looking: scale column k, then rank-1 update of the trailing part
    for k in 0..n {
        let sk = l.col_start(k);
        let d = l.data[sk];
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: k, value: d });
        }
        let lkk = d.sqrt();
        l.data[sk] = lkk;
        let inv = 1.0 / lkk;
        for v in &mut l.data[sk + 1..sk + n - k] {
            *v *= inv;
        }
        for j in k + 1..n {
            let alpha = l.data[sk + j - k];
            if alpha != 0.0 {
                let sj = l.col_start(j);
                let (ck, cj) = l.data.split_at_mut(sj);
                axpy(&mut cj[..n - j], -alpha, &ck[sk + j - k..sk + n - k]);
            }
        }
    }
    Ok(l)
}

/// Column-pivoted Householder QR: `A P = Q R` with `|R(0,0)| >= |R(1,1)| >= ...`.
///
/// Pivoting recomputes exact trailing column norms every step (no downdating
/// drift), and ties within 1e-15 relative go to the smallest original column
/// index, so the pivot sequence is a pure function of the input.
pub struct PivotedQr {
    /// Householder vectors below the diagonal (unit leading entry implicit),
    /// R on and above.
    pub factors: DenseBlock,
    pub tau: Vec<f64>,
    /// `perm[k]` = original index of the column now in position k.
    pub perm: Vec<usize>,
}

pub fn pivoted_qr(a: &DenseBlock) -> PivotedQr {
    let m = a.nrows();
    let n = a.ncols();
    let t = m.min(n);
    let mut f = a.clone();
    let mut tau = vec![0.0; t];
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..t {
        // exact trailing norms of columns k..n
        let mut best = k;
        let mut best_norm = -1.0;
        let mut norms = vec![0.0; n - k];
        for j in k..n {
            let nj = norm2(&f.col(j)[k..]);
            norms[j - k] = nj;
            if nj > best_norm {
                best_norm = nj;
                best = j;
            }
        }
        if best_norm <= 0.0 {
            break; // trailing block is exactly zero; R stays zero there
        }
        for j in k..n {
            // tie break: any column within 1e-15 relative of the max wins if
            // it carries a smaller original index
            if norms[j - k] >= best_norm * (1.0 - 1e-15) && perm[j] < perm[best] {
                best = j;
            }
        }
        if best != k {
            perm.swap(k, best);
            let (lo, hi) = if k < best { (k, best) } else { (best, k) };
            let (head, tail) = f.data.split_at_mut(hi * m);
            head[lo * m..(lo + 1) * m].swap_with_slice(&mut tail[..m]);
        }

        let normx = norm2(&f.col(k)[k..]);
        if normx == 0.0 {
            tau[k] = 0.0;
            continue;
        }
        let alpha = f.at(k, k);
        let beta = -normx.copysign(alpha);
        tau[k] = (beta - alpha) / beta;
        let denom = alpha - beta;
        for i in k + 1..m {
            let v = f.at(i, k) / denom;
            f.set(i, k, v);
        }
        f.set(k, k, beta);
        // apply H = I - tau v v^T to the trailing columns
        for j in k + 1..n {
            let (vk, cj) = {
                let (head, tail) = f.data.split_at_mut(j * m);
                (&head[k * m..(k + 1) * m], &mut tail[..m])
            };
            let mut w = cj[k];
            w += dot(&vk[k + 1..], &cj[k + 1..]);
            let tw = tau[k] * w;
            cj[k] -= tw;
            axpy(&mut cj[k + 1..], -tw, &vk[k + 1..]);
        }
    }
    PivotedQr { factors: f, tau, perm }
}

impl PivotedQr {
    pub fn rank_bound(&self) -> usize {
        self.tau.len()
    }

    /// R factor, `min(m,n) x n` upper triangular (in pivot order).
    pub fn r(&self) -> DenseBlock {
        let t = self.tau.len();
        let n = self.factors.ncols();
        let mut r = DenseBlock::zeros(t, n);
        for j in 0..n {
            for i in 0..t.min(j + 1) {
                r.set(i, j, self.factors.at(i, j));
            }
        }
        r
    }

    /// Thin Q, `m x min(m,n)`, assembled by applying the reflectors to the
    /// identity (test support).
    pub fn q(&self) -> DenseBlock {
        let m = self.factors.nrows();
        let t = self.tau.len();
        let mut q = DenseBlock::zeros(m, t);
        for j in 0..t {
            q.set(j, j, 1.0);
        }
        for k in (0..t).rev() {
            let tk = self.tau[k];
            if tk == 0.0 {
                continue;
            }
            let vk = self.factors.col(k);
            for c in 0..t {
                let qc = q.col_mut(c);
                let w = qc[k] + dot(&vk[k + 1..], &qc[k + 1..]);
                let tw = tk * w;
                qc[k] -= tw;
                axpy(&mut qc[k + 1..], -tw, &vk[k + 1..]);
            }
        }
        q
    }

    /// `Q R` with the column permutation undone, i.e. the original matrix up
    /// to roundoff (test support).
    pub fn reconstruct(&self) -> DenseBlock {
        let qr = self.q().mul(&self.r());
        let n = self.factors.ncols();
        let mut a = DenseBlock::zeros(qr.nrows(), n);
        for j in 0..n {
            let orig = self.perm[j];
            for i in 0..qr.nrows() {
                a.set(i, orig, qr.at(i, j));
            }
        }
        a
    }
}

/// Outcome of the interpolative decomposition of a strip: the skeleton
/// columns reproduce the redundant ones through `T`.
pub struct IdResult {
    /// Original column indices kept, ascending.
    pub skeleton: Vec<usize>,
    /// Original column indices expressed through the skeleton, ascending.
    pub redundant: Vec<usize>,
    /// `|skeleton| x |redundant|`: `A[:, redundant] ~= A[:, skeleton] * T`.
    pub t: DenseBlock,
    /// `||R22||_F / ||A||_F`, the relative truncation actually committed.
    pub achieved_error: f64,
}

/// Interpolative decomposition at relative tolerance `eps` via pivoted QR.
///
/// The rank cut is the first diagonal of R with `|R(k,k)| <= eps * |R(0,0)|`;
/// below machine precision this keeps every independent column.
pub fn interpolative_decomposition(a: &DenseBlock, eps: f64) -> IdResult {
    let m = a.nrows();
    let n = a.ncols();
    let qr = pivoted_qr(a);
    let t_max = m.min(n);
    let r00 = if t_max == 0 { 0.0 } else { qr.factors.at(0, 0).abs() };
    let mut rank = t_max;
    if r00 == 0.0 {
        rank = 0;
    } else {
        for k in 1..t_max {
            if qr.factors.at(k, k).abs() <= eps * r00 {
                rank = k;
                break;
            }
        }
    }

    let mut skeleton: Vec<usize> = qr.perm[..rank].to_vec();
    let mut redundant: Vec<usize> = qr.perm[rank..].to_vec();

    // T' = R11^{-1} R12 in pivot order
    let mut tp = DenseBlock::zeros(rank, n - rank);
    for c in 0..n - rank {
        for i in 0..rank {
            tp.set(i, c, qr.factors.at(i, rank + c));
        }
        // column-oriented back substitution on the upper triangle R11
        let col = tp.col_mut(c);
        for j in (0..rank).rev() {
            col[j] /= qr.factors.at(j, j);
            let xj = col[j];
            for i in 0..j {
                col[i] -= qr.factors.at(i, j) * xj;
            }
        }
    }

    // residual committed by the cut
    let mut r22_sq = 0.0;
    for j in rank..n {
        for i in rank..t_max.min(j + 1) {
            let v = qr.factors.at(i, j);
            r22_sq += v * v;
        }
    }
    let anorm = a.frob_norm();
    let achieved_error = if anorm > 0.0 { r22_sq.sqrt() / anorm } else { 0.0 };

    // rows and columns of T reordered to match the sorted index lists
    let mut sk_order: Vec<usize> = (0..rank).collect();
    sk_order.sort_unstable_by_key(|&i| skeleton[i]);
    let mut red_order: Vec<usize> = (0..n - rank).collect();
    red_order.sort_unstable_by_key(|&i| redundant[i]);
    let mut t = DenseBlock::zeros(rank, n - rank);
    for (new_c, &old_c) in red_order.iter().enumerate() {
        for (new_r, &old_r) in sk_order.iter().enumerate() {
            t.set(new_r, new_c, tp.at(old_r, old_c));
        }
    }
    skeleton.sort_unstable();
    redundant.sort_unstable();

    IdResult { skeleton, redundant, t, achieved_error }
}

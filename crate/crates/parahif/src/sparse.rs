//! Symmetric sparse matrices in CSR form.
//!
//! Both triangles are stored so row access equals column access; assembly
//! takes triplets covering each unordered pair once (either orientation) and
//! mirrors the missing transposes, which keeps symmetry exact by
//! construction instead of up to roundoff. Column indices are `u32` to halve
//! the index memory of the level matrices.

use crate::dense::DenseBlock;
use crate::error::{Error, Result};
use crate::index_set::{ActiveSet, IndexSet};

#[derive(Debug, Clone)]
pub struct SymSparse {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

pub type Triplet = (u32, u32, f64);

impl SymSparse {
    /// Builds from triplets. Duplicate entries at the same `(i, j)`
    /// accumulate; if both `(i, j)` and `(j, i)` appear their values must
    /// agree exactly; pairs given in one orientation are mirrored. Exact
    /// zeros (after accumulation) are dropped.
    pub fn assemble(n: usize, mut triplets: Vec<Triplet>) -> Result<SymSparse> {
        for &(i, j, _) in &triplets {
            if i as usize >= n || j as usize >= n {
                return Err(Error::Config(format!(
                    "assemble: entry ({i}, {j}) out of range for dimension {n}"
                )));
            }
        }
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        // accumulate duplicates in place
        let mut dedup: Vec<Triplet> = Vec::with_capacity(triplets.len());
        for t in triplets {
            match dedup.last_mut() {
                Some(last) if last.0 == t.0 && last.1 == t.1 => last.2 += t.2,
                _ => dedup.push(t),
            }
        }
        dedup.retain(|t| t.2 != 0.0);

        // mirror orientation gaps, verify agreement where both are present
        let mut full: Vec<Triplet> = Vec::with_capacity(2 * dedup.len());
        for &(i, j, v) in &dedup {
            full.push((i, j, v));
            if i != j {
                match dedup.binary_search_by(|probe| (probe.0, probe.1).cmp(&(j, i))) {
                    Ok(k) => {
                        if dedup[k].2 != v {
                            return Err(Error::Config(format!(
                                "assemble: conflicting symmetric entries at ({i}, {j}): {} vs {}",
                                v, dedup[k].2
                            )));
                        }
                    }
                    Err(_) => full.push((j, i, v)),
                }
            }
        }
        full.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut indptr = vec![0usize; n + 1];
        for &(i, _, _) in &full {
            indptr[i as usize + 1] += 1;
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        let mut indices = Vec::with_capacity(full.len());
        let mut values = Vec::with_capacity(full.len());
        for &(_, j, v) in &full {
            indices.push(j);
            values.push(v);
        }
        Ok(SymSparse { n, indptr, indices, values })
    }

    pub fn identity(n: usize) -> SymSparse {
        SymSparse {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n as u32).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entry count (both triangles).
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    /// Entry lookup; absent entries are zero.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c as usize];
            }
            y[i] = acc;
        }
    }

    /// `I + alpha * A`, as a new matrix.
    pub fn scale_plus_identity(&self, alpha: f64) -> SymSparse {
        let mut indptr = Vec::with_capacity(self.n + 1);
        let mut indices = Vec::with_capacity(self.nnz() + self.n);
        let mut values = Vec::with_capacity(self.nnz() + self.n);
        indptr.push(0);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut wrote_diag = false;
            for (c, v) in cols.iter().zip(vals) {
                let cu = *c as usize;
                let mut out = alpha * v;
                if cu == i {
                    out += 1.0;
                    wrote_diag = true;
                } else if cu > i && !wrote_diag {
                    indices.push(i as u32);
                    values.push(1.0);
                    wrote_diag = true;
                }
                if out != 0.0 {
                    indices.push(*c);
                    values.push(out);
                }
            }
            if !wrote_diag {
                indices.push(i as u32);
                values.push(1.0);
            }
            indptr.push(indices.len());
        }
        SymSparse { n: self.n, indptr, indices, values }
    }

    /// Dense copy of the submatrix `A[rows, cols]`; absent entries are zero.
    pub fn extract_block(&self, rows: &IndexSet, cols: &IndexSet) -> DenseBlock {
        let mut out = DenseBlock::zeros(rows.len(), cols.len());
        let want = cols.as_u32();
        for (ri, r) in rows.iter().enumerate() {
            let (rcols, rvals) = self.row(r);
            let mut p = 0;
            let mut q = 0;
            while p < rcols.len() && q < want.len() {
                match rcols[p].cmp(&want[q]) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        out.set(ri, q, rvals[p]);
                        p += 1;
                        q += 1;
                    }
                }
            }
        }
        out
    }

    /// Appends the stored lower-triangle entries (`i >= j`) passing `keep`
    /// to `out`, for rebuild-style assembly.
    pub fn lower_triplets_filtered(
        &self,
        mut keep: impl FnMut(usize, usize) -> bool,
        out: &mut Vec<Triplet>,
    ) {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let j = *c as usize;
                if j > i {
                    break; // columns are sorted; upper triangle mirrors lower
                }
                if keep(i, j) {
                    out.push((i as u32, *c, *v));
                }
            }
        }
    }

    /// Euclidean norms of the full columns (used by drop rules).
    pub fn column_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.n];
        for i in 0..self.n {
            let (_, vals) = self.row(i);
            // symmetric: row i norms equal column i norms
            for v in vals {
                sq[i] += v * v;
            }
        }
        sq.iter().map(|s| s.sqrt()).collect()
    }
}

/// Active DOFs outside `target` that `target` couples to: all `j` in
/// `within \ target` with some nonzero `A(j, i)`, `i` in `target`.
pub fn interacting_dofs(a: &SymSparse, target: &IndexSet, within: &ActiveSet) -> IndexSet {
    let mut found: Vec<u32> = Vec::new();
    for i in target.iter() {
        let (cols, _) = a.row(i);
        for &c in cols {
            if within.contains(c as usize) {
                found.push(c);
            }
        }
    }
    IndexSet::from_unsorted(found).minus(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SymSparse {
        // lower orientation only; assemble mirrors the upper entries
        let mut t: Vec<Triplet> = Vec::new();
        for i in 0..n as u32 {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
        }
        SymSparse::assemble(n, t).unwrap()
    }

    #[test]
    fn assemble_mirrors_missing_orientation() {
        let a = tridiag(3);
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 2), -1.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.nnz(), 7);
    }

    #[test]
    fn assemble_accumulates_duplicates() {
        let a = SymSparse::assemble(1, vec![(0, 0, 1.0), (0, 0, 1.0)]).unwrap();
        assert_eq!(a.get(0, 0), 2.0);
    }

    #[test]
    fn assemble_rejects_conflicting_pairs() {
        let r = SymSparse::assemble(2, vec![(0, 1, 1.0), (1, 0, 2.0)]);
        assert!(r.is_err());
        // agreeing pairs are fine and stored once per orientation
        let a = SymSparse::assemble(2, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn assemble_drops_cancelled_entries() {
        let a = SymSparse::assemble(2, vec![(0, 1, 1.0), (0, 1, -1.0), (0, 0, 3.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
    }

    #[test]
    fn assemble_rejects_out_of_range() {
        assert!(SymSparse::assemble(2, vec![(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn five_point_matches_dense_stencil() {
        // 3x3 interior grid (n = 4, h = 1/4, a = 1): diagonal -4/h^2,
        // nearest neighbors +1/h^2, x-fastest ordering
        let h2inv = 16.0;
        let mut t: Vec<Triplet> = Vec::new();
        for j in 0..3u32 {
            for i in 0..3u32 {
                let d = j * 3 + i;
                t.push((d, d, -4.0 * h2inv));
                if i + 1 < 3 {
                    t.push((d + 1, d, h2inv));
                }
                if j + 1 < 3 {
                    t.push((d + 3, d, h2inv));
                }
            }
        }
        let a = SymSparse::assemble(9, t).unwrap();
        for p in 0..9usize {
            for q in 0..9usize {
                let (pi, pj) = (p % 3, p / 3);
                let (qi, qj) = (q % 3, q / 3);
                let dist = pi.abs_diff(qi) + pj.abs_diff(qj);
                let expect = if p == q {
                    -4.0 * h2inv
                } else if dist == 1 {
                    h2inv
                } else {
                    0.0
                };
                assert_eq!(a.get(p, q), expect, "entry ({p}, {q})");
            }
        }
    }

    #[test]
    fn spmv_small_cases() {
        let a = tridiag(4);
        let x = [1.0, 1.0, 1.0, 1.0];
        let mut y = [0.0; 4];
        a.spmv(&x, &mut y);
        assert_eq!(y, [1.0, 0.0, 0.0, 1.0]);

        let i3 = SymSparse::identity(3);
        let x3 = [2.0, -1.0, 0.5];
        let mut y3 = [0.0; 3];
        i3.spmv(&x3, &mut y3);
        assert_eq!(y3, x3);
    }

    #[test]
    fn scale_plus_identity_small() {
        let m = SymSparse::assemble(1, vec![(0, 0, -16.0)]).unwrap();
        let a = m.scale_plus_identity(-0.125);
        assert_eq!(a.get(0, 0), 3.0);
        let b = m.scale_plus_identity(0.125);
        assert_eq!(b.get(0, 0), -1.0);

        // missing diagonal gets the identity entry
        let off = SymSparse::assemble(2, vec![(1, 0, 5.0)]).unwrap();
        let c = off.scale_plus_identity(2.0);
        assert_eq!(c.get(0, 0), 1.0);
        assert_eq!(c.get(1, 1), 1.0);
        assert_eq!(c.get(0, 1), 10.0);
    }

    #[test]
    fn extract_block_matches_entries() {
        let a = tridiag(6);
        let rows = IndexSet::from_sorted(vec![1, 4]);
        let cols = IndexSet::from_sorted(vec![0, 4, 5]);
        let b = a.extract_block(&rows, &cols);
        assert_eq!(b.nrows(), 2);
        assert_eq!(b.ncols(), 3);
        for (ri, r) in rows.iter().enumerate() {
            for (ci, c) in cols.iter().enumerate() {
                assert_eq!(b.at(ri, ci), a.get(r, c));
            }
        }
        // empty selections produce 0x0 blocks
        let e = a.extract_block(&IndexSet::default(), &IndexSet::default());
        assert_eq!((e.nrows(), e.ncols()), (0, 0));
    }

    #[test]
    fn interacting_dofs_tridiagonal() {
        let a = tridiag(10);
        let target = IndexSet::from_sorted(vec![5]);
        let within = ActiveSet::full(10);
        let b = interacting_dofs(&a, &target, &within);
        assert_eq!(b.as_u32(), &[4, 6]);

        let mut partial = ActiveSet::full(10);
        partial.deactivate(6).unwrap();
        let b2 = interacting_dofs(&a, &target, &partial);
        assert_eq!(b2.as_u32(), &[4]);

        // disjoint from the target and inside `within` by construction
        for d in b.iter() {
            assert!(!target.contains(d));
            assert!(within.contains(d));
        }
    }
}

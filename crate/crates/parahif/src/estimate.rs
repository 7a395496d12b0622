//! Randomized power-iteration estimates of operator norms, used for the
//! factorization quality numbers e_a = ||A - F|| / ||A|| and
//! e_s = ||I - A F^{-1}||.

use crate::dense::norm2;
use crate::error::{Error, Result};
use crate::hif::HifFactor;
use crate::rng;
use crate::sparse::SymSparse;

pub const DEFAULT_REL_TARGET: f64 = 1e-2;
pub const DEFAULT_MAX_ITERS: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Spectral-norm estimate of a symmetric operator by power iteration from a
/// seeded random start. Stops when successive Rayleigh estimates agree to
/// `rel_target` relatively; running out of iterations flags `converged:
/// false` rather than erroring, since estimates are diagnostics.
pub fn est_opnorm(
    mut op: impl FnMut(&[f64], &mut [f64]),
    dim: usize,
    rel_target: f64,
    max_iters: usize,
    seed: u64,
) -> Result<NormEstimate> {
    if dim == 0 {
        return Err(Error::Numerical("est_opnorm: zero-dimensional operator".into()));
    }
    let mut x: Vec<f64> = (0..dim).map(|i| rng::signed_f64(seed, i as u64)).collect();
    let nx = norm2(&x);
    for v in &mut x {
        *v /= nx;
    }
    let mut y = vec![0.0; dim];
    op(&x, &mut y);
    let mut prev = norm2(&y);
    if prev == 0.0 {
        return Ok(NormEstimate { value: 0.0, iterations: 0, converged: true });
    }
    for k in 1..=max_iters {
        let ny = norm2(&y);
        if ny == 0.0 {
            // iterate fell into the null space; the estimate cannot improve
            return Ok(NormEstimate { value: 0.0, iterations: k, converged: true });
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        op(&x, &mut y);
        let est = norm2(&y);
        if !est.is_finite() {
            return Err(Error::Numerical("est_opnorm: iterate diverged".into()));
        }
        if (est - prev).abs() <= rel_target * est {
            return Ok(NormEstimate { value: est, iterations: k, converged: true });
        }
        prev = est;
    }
    Ok(NormEstimate { value: prev, iterations: max_iters, converged: false })
}

/// Relative factorization error ||A - F|| / ||A||, both norms estimated on
/// the symmetric operators directly.
pub fn est_e_a(a: &SymSparse, f: &HifFactor, rel_target: f64, seed: u64) -> Result<f64> {
    let n = a.dim();
    let mut t = vec![0.0; n];
    let diff = est_opnorm(
        |x: &[f64], y: &mut [f64]| {
            a.spmv(x, y);
            t.copy_from_slice(x);
            f.apply(&mut t);
            for (yi, ti) in y.iter_mut().zip(&t) {
                *yi -= ti;
            }
        },
        n,
        rel_target,
        DEFAULT_MAX_ITERS,
        seed,
    )?;
    let base = est_opnorm(
        |x: &[f64], y: &mut [f64]| a.spmv(x, y),
        n,
        rel_target,
        DEFAULT_MAX_ITERS,
        seed,
    )?;
    if base.value == 0.0 {
        return Err(Error::Numerical("est_e_a: zero operator norm".into()));
    }
    Ok(diff.value / base.value)
}

/// Preconditioned residual norm ||I - A F^{-1}||. The operator is not
/// symmetric, so the iteration runs on its Gram form C'C with
/// C' = I - F^{-1} A (A and F^{-1} are both symmetric) and reports the
/// square root.
pub fn est_e_s(a: &SymSparse, f: &HifFactor, rel_target: f64, seed: u64) -> Result<f64> {
    let n = a.dim();
    let mut t = vec![0.0; n];
    let mut c = vec![0.0; n];
    let gram = est_opnorm(
        |x: &[f64], y: &mut [f64]| {
            // c = (I - A F^{-1}) x
            t.copy_from_slice(x);
            f.apply_inverse(&mut t);
            a.spmv(&t, &mut c);
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci = xi - *ci;
            }
            // y = (I - F^{-1} A) c
            a.spmv(&c, &mut t);
            f.apply_inverse(&mut t);
            for ((yi, ci), ti) in y.iter_mut().zip(&c).zip(&t) {
                *yi = ci - ti;
            }
        },
        n,
        rel_target,
        DEFAULT_MAX_ITERS,
        seed,
    )?;
    Ok(gram.value.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CoeffField, GridSpec};
    use crate::hierarchy::build_hierarchy;
    use crate::hif::factorize;
    use crate::{grid, rng};

    #[test]
    fn scaled_identity_converges_in_one_iteration() {
        let est = est_opnorm(
            |x: &[f64], y: &mut [f64]| {
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi = 2.0 * xi;
                }
            },
            5,
            1e-2,
            64,
            0,
        )
        .unwrap();
        assert_eq!(est.value, 2.0);
        assert_eq!(est.iterations, 1);
        assert!(est.converged);
    }

    #[test]
    fn diagonal_dominant_eigenvalue() {
        let d = [1.0, 0.5, 0.25];
        let est = est_opnorm(
            |x: &[f64], y: &mut [f64]| {
                for i in 0..3 {
                    y[i] = d[i] * x[i];
                }
            },
            3,
            1e-2,
            64,
            1,
        )
        .unwrap();
        assert!(est.converged);
        assert!((est.value - 1.0).abs() <= 0.01, "estimate {}", est.value);
    }

    #[test]
    fn zero_dimension_is_an_error() {
        assert!(est_opnorm(|_: &[f64], _: &mut [f64]| {}, 0, 1e-2, 64, 0).is_err());
    }

    #[test]
    fn zero_operator_estimates_zero() {
        let est =
            est_opnorm(|_: &[f64], y: &mut [f64]| y.fill(0.0), 4, 1e-2, 64, 0).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.converged);
    }

    /// Cyclic Jacobi eigensolver, test-only oracle for dense spectral norms.
    fn jacobi_spectral_norm(a: &mut Vec<Vec<f64>>) -> f64 {
        let n = a.len();
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[p][q] * a[p][q];
                }
            }
            if off < 1e-28 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max)
    }

    #[test]
    fn random_symmetric_matches_dense_oracle() {
        let n = 40;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = rng::signed_f64(7, (i * n + j) as u64);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let a_apply = a.clone();
        let est = est_opnorm(
            |x: &[f64], y: &mut [f64]| {
                for i in 0..n {
                    y[i] = a_apply[i].iter().zip(x).map(|(aij, xj)| aij * xj).sum();
                }
            },
            n,
            1e-4,
            400,
            3,
        )
        .unwrap();
        let exact = jacobi_spectral_norm(&mut a);
        assert!(
            (est.value - exact).abs() <= 0.02 * exact,
            "estimate {} vs exact {}",
            est.value,
            exact
        );
    }

    #[test]
    fn seed_determinism_is_bitwise() {
        let op = |x: &[f64], y: &mut [f64]| {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = (i + 1) as f64 * x[i];
            }
        };
        let a = est_opnorm(op, 9, 1e-3, 64, 11).unwrap();
        let b = est_opnorm(op, 9, 1e-3, 64, 11).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn exact_factorization_limit() {
        let gs = GridSpec::with_depth(2, 16, 8).unwrap();
        let coeff = grid::sample_coeff(
            &CoeffField::Bumps { m: 12, sigma2: 0.01, lo: 0.1, hi: 10.0 },
            &gs,
            0,
        );
        let m = grid::build_stiffness(&gs, &coeff).unwrap();
        let (a, _) = grid::build_cn_pair(&m, gs.h());
        let hier = build_hierarchy(&gs);
        let f = factorize(&a, &hier, 1e-15).unwrap();
        let e_a = est_e_a(&a, &f, 1e-2, 0).unwrap();
        let e_s = est_e_s(&a, &f, 1e-2, 0).unwrap();
        assert!(e_a <= 1e-10, "e_a = {e_a:e}");
        assert!(e_s <= 1e-9, "e_s = {e_s:e}");
    }
}

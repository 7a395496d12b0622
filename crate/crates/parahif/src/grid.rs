//! Uniform-grid discretization of `u_t = div(a grad u) + r(u)` on the unit
//! square/cube with zero Dirichlet boundary.
//!
//! The stiffness matrix is the standard 5/7-point stencil with the
//! coefficient evaluated at face midpoints, so it is symmetric negative
//! definite by construction. DOFs are the interior nodes, numbered
//! x-fastest.

use crate::error::{Error, Result};
use crate::rng;
use crate::sparse::{SymSparse, Triplet};

pub const MAX_DIM: usize = 3;

/// Uniform grid with `n` cells per axis (`h = 1/n`), `(n-1)^dim` interior
/// DOFs, and a cell hierarchy of `levels` halvings above leaf cells of
/// `leaf` grid cells per side: `n = leaf * 2^levels`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub leaf: usize,
    pub levels: usize,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, leaf: usize, levels: usize) -> Result<GridSpec> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Config(format!("dim must be 2 or 3, got {dim}")));
        }
        if leaf < 2 {
            return Err(Error::Config(format!("leaf must be at least 2, got {leaf}")));
        }
        let expected = leaf.checked_shl(levels as u32).unwrap_or(0);
        if expected != n || n < 2 {
            return Err(Error::Config(format!(
                "grid size n = {n} must equal leaf * 2^levels = {leaf} * 2^{levels}"
            )));
        }
        Ok(GridSpec { dim, n, leaf, levels })
    }

    /// Derives the hierarchy depth from `n` and `leaf` (largest power of two
    /// quotient; `n / leaf` must be an exact power of two).
    pub fn with_depth(dim: usize, n: usize, leaf: usize) -> Result<GridSpec> {
        if leaf == 0 || n % leaf != 0 || !(n / leaf).is_power_of_two() {
            return Err(Error::Config(format!(
                "n = {n} is not leaf * 2^levels for leaf = {leaf}"
            )));
        }
        let levels = (n / leaf).trailing_zeros() as usize;
        GridSpec::new(dim, n, leaf, levels)
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Interior nodes per axis.
    pub fn nodes_per_axis(&self) -> usize {
        self.n - 1
    }

    pub fn n_dofs(&self) -> usize {
        self.nodes_per_axis().pow(self.dim as u32)
    }

    /// Flattened index of 1-based interior coordinates, x fastest.
    pub fn dof_index(&self, coords: [usize; MAX_DIM]) -> usize {
        let m = self.nodes_per_axis();
        let mut idx = 0;
        for a in (0..self.dim).rev() {
            debug_assert!((1..=m).contains(&coords[a]));
            idx = idx * m + (coords[a] - 1);
        }
        idx
    }

    /// Inverse of [`Self::dof_index`]; unused axes are zero.
    pub fn dof_coords(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let m = self.nodes_per_axis();
        let mut coords = [0; MAX_DIM];
        for a in 0..self.dim {
            coords[a] = idx % m + 1;
            idx /= m;
        }
        coords
    }

    /// Physical position of a node, unused axes zero.
    pub fn position(&self, coords: [usize; MAX_DIM]) -> [f64; MAX_DIM] {
        let h = self.h();
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = coords[a] as f64 * h;
        }
        x
    }
}

/// Diffusion coefficient description.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffField {
    Constant(f64),
    /// Sum of `m` Gaussian bumps with width `sigma2`, centers uniform in the
    /// unit box from the problem seed, affinely rescaled so the sampled
    /// values span exactly `[lo, hi]`.
    Bumps { m: usize, sigma2: f64, lo: f64, hi: f64 },
}

impl CoeffField {
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            CoeffField::Constant(v) => Some(*v),
            CoeffField::Bumps { .. } => None,
        }
    }
}

/// Coefficient samples on the stencil's evaluation set: interior nodes plus
/// the face midpoints carrying the fluxes.
#[derive(Debug, Clone)]
pub struct CoeffSamples {
    grid: GridSpec,
    /// Values at interior nodes, DOF order.
    pub node: Vec<f64>,
    /// Per axis, values at midpoints `(.., k_a + 1/2, ..)` with the varying
    /// axis taking `n` values (`k_a` in `0..n`) and the others the interior
    /// range; flattened x-fastest with those extents.
    axis_mid: Vec<Vec<f64>>,
}

impl CoeffSamples {
    /// Coefficient on the face between node `coords` and its `axis`-forward
    /// neighbor; `back` selects the face toward the axis-backward neighbor.
    pub fn face(&self, coords: [usize; MAX_DIM], axis: usize, back: bool) -> f64 {
        let g = &self.grid;
        let m = g.nodes_per_axis();
        let mut idx = 0;
        for a in (0..g.dim).rev() {
            let (ext, c) = if a == axis {
                // k + 1/2 with k = j-1 (backward) or k = j (forward)
                (g.n, if back { coords[a] - 1 } else { coords[a] })
            } else {
                (m, coords[a] - 1)
            };
            idx = idx * ext + c;
        }
        self.axis_mid[axis][idx]
    }
}

fn bump_centers(m: usize, dim: usize, seed: u64) -> Vec<f64> {
    // center b, component a consumes counter dim*b + a
    (0..m * dim).map(|i| rng::unit_f64(seed, i as u64)).collect()
}

fn bump_sum(x: &[f64; MAX_DIM], dim: usize, centers: &[f64], sigma2: f64) -> f64 {
    let mut acc = 0.0;
    let cutoff = 60.0 * sigma2; // exp(-60) is below resolution of the sum
    for c in centers.chunks_exact(dim) {
        let mut r2 = 0.0;
        for a in 0..dim {
            let d = x[a] - c[a];
            r2 += d * d;
        }
        if r2 < cutoff {
            acc += (-r2 / sigma2).exp();
        }
    }
    acc
}

/// Samples the coefficient field at every point the stencil reads. For bump
/// fields the affine rescale is fitted over this whole sample set (nodes and
/// midpoints together), then clamped to `[lo, hi]` for safety.
pub fn sample_coeff(field: &CoeffField, grid: &GridSpec, seed: u64) -> CoeffSamples {
    let dim = grid.dim;
    let m = grid.nodes_per_axis();

    let mut node = vec![0.0; grid.n_dofs()];
    let mut axis_mid: Vec<Vec<f64>> = (0..dim)
        .map(|a| {
            let mut len = 1;
            for b in 0..dim {
                len *= if b == a { grid.n } else { m };
            }
            vec![0.0; len]
        })
        .collect();

    match field {
        CoeffField::Constant(v) => {
            node.fill(*v);
            for mid in &mut axis_mid {
                mid.fill(*v);
            }
        }
        CoeffField::Bumps { m: nbumps, sigma2, lo, hi } => {
            let centers = bump_centers(*nbumps, dim, seed);
            let h = grid.h();
            for (idx, out) in node.iter_mut().enumerate() {
                let coords = grid.dof_coords(idx);
                let x = grid.position(coords);
                *out = bump_sum(&x, dim, &centers, *sigma2);
            }
            for axis in 0..dim {
                let mid = &mut axis_mid[axis];
                let mut ext = [0usize; MAX_DIM];
                for b in 0..dim {
                    ext[b] = if b == axis { grid.n } else { m };
                }
                for (idx, out) in mid.iter_mut().enumerate() {
                    let mut rem = idx;
                    let mut x = [0.0; MAX_DIM];
                    for b in 0..dim {
                        let c = rem % ext[b];
                        rem /= ext[b];
                        x[b] = if b == axis {
                            (c as f64 + 0.5) * h
                        } else {
                            (c as f64 + 1.0) * h
                        };
                    }
                    *out = bump_sum(&x, dim, &centers, *sigma2);
                }
            }
            // affine map of the observed range onto [lo, hi]
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for v in node.iter().chain(axis_mid.iter().flatten()) {
                min = min.min(*v);
                max = max.max(*v);
            }
            let scale = if max > min { (hi - lo) / (max - min) } else { 0.0 };
            let base = if max > min { *lo } else { 0.5 * (lo + hi) };
            for v in node.iter_mut().chain(axis_mid.iter_mut().flatten()) {
                *v = (base + (*v - min) * scale).clamp(*lo, *hi);
            }
        }
    }
    CoeffSamples { grid: *grid, node, axis_mid }
}

/// Stiffness matrix of `div(a grad .)` with zero Dirichlet data: symmetric
/// negative definite, one row per interior node.
pub fn build_stiffness(grid: &GridSpec, coeff: &CoeffSamples) -> Result<SymSparse> {
    let m = grid.nodes_per_axis();
    let h2inv = (grid.n * grid.n) as f64;
    let n_dofs = grid.n_dofs();
    let mut triplets: Vec<Triplet> = Vec::with_capacity(n_dofs * (1 + grid.dim));

    for idx in 0..n_dofs {
        let coords = grid.dof_coords(idx);
        let mut diag = 0.0;
        for axis in 0..grid.dim {
            let a_back = coeff.face(coords, axis, true);
            let a_fwd = coeff.face(coords, axis, false);
            diag -= (a_back + a_fwd) * h2inv;
            if coords[axis] < m {
                // forward neighbor inside: emit the upper coupling once
                let mut nb = coords;
                nb[axis] += 1;
                triplets.push((grid.dof_index(nb) as u32, idx as u32, a_fwd * h2inv));
            }
        }
        triplets.push((idx as u32, idx as u32, diag));
    }
    SymSparse::assemble(n_dofs, triplets)
}

/// Crank-Nicolson matrices `A = I - dt/2 M` and `B = I + dt/2 M`.
pub fn build_cn_pair(m: &SymSparse, dt: f64) -> (SymSparse, SymSparse) {
    (m.scale_plus_identity(-0.5 * dt), m.scale_plus_identity(0.5 * dt))
}

/// Initial data choices.
#[derive(Debug, Clone, PartialEq)]
pub enum InitKind {
    /// Sum of two unit Gaussians centered at `(c1, c1, ..)` and `(c2, c2, ..)`.
    TwoGaussians { c1: f64, c2: f64, sigma2: f64 },
    /// One Gaussian at `(c, c, ..)` scaled by `amplitude`.
    Gaussian { c: f64, sigma2: f64, amplitude: f64 },
    /// Product of `sin(pi x_a)`: the manufactured-solution mode at `t = 0`.
    SineProduct,
}

pub fn initial_condition(init: &InitKind, grid: &GridSpec) -> Vec<f64> {
    let n_dofs = grid.n_dofs();
    let mut u = vec![0.0; n_dofs];
    for (idx, out) in u.iter_mut().enumerate() {
        let x = grid.position(grid.dof_coords(idx));
        *out = match init {
            InitKind::TwoGaussians { c1, c2, sigma2 } => {
                let mut r1 = 0.0;
                let mut r2 = 0.0;
                for a in 0..grid.dim {
                    r1 += (x[a] - c1) * (x[a] - c1);
                    r2 += (x[a] - c2) * (x[a] - c2);
                }
                (-r1 / sigma2).exp() + (-r2 / sigma2).exp()
            }
            InitKind::Gaussian { c, sigma2, amplitude } => {
                let mut r = 0.0;
                for a in 0..grid.dim {
                    r += (x[a] - c) * (x[a] - c);
                }
                amplitude * (-r / sigma2).exp()
            }
            InitKind::SineProduct => {
                let mut v = 1.0;
                for a in 0..grid.dim {
                    v *= (std::f64::consts::PI * x[a]).sin();
                }
                v
            }
        };
    }
    u
}

/// Exact solution `prod_a sin(pi x_a) * exp(-dim pi^2 a t)` of the heat
/// equation with constant coefficient `a`, sampled at the interior nodes.
/// Only defined for constant fields.
pub fn manufactured_heat_solution(
    grid: &GridSpec,
    coeff: &CoeffField,
    t: f64,
) -> Result<Vec<f64>> {
    let a = coeff.constant_value().ok_or_else(|| {
        Error::Config("manufactured solution requires a constant coefficient field".into())
    })?;
    let decay = (-(grid.dim as f64) * std::f64::consts::PI.powi(2) * a * t).exp();
    let mut u = initial_condition(&InitKind::SineProduct, grid);
    for v in &mut u {
        *v *= decay;
    }
    Ok(u)
}

/// Problem families of the benchmark suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Heat2d,
    Heat3d,
    Logistic2d,
    Logistic3d,
}

impl ProblemKind {
    pub fn dim(&self) -> usize {
        match self {
            ProblemKind::Heat2d | ProblemKind::Logistic2d => 2,
            ProblemKind::Heat3d | ProblemKind::Logistic3d => 3,
        }
    }

    pub fn has_reaction(&self) -> bool {
        matches!(self, ProblemKind::Logistic2d | ProblemKind::Logistic3d)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Heat2d => "heat2d",
            ProblemKind::Heat3d => "heat3d",
            ProblemKind::Logistic2d => "logistic2d",
            ProblemKind::Logistic3d => "logistic3d",
        }
    }
}

/// Logistic growth `r(u) = k1 u (1 - u/k2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reaction {
    pub k1: f64,
    pub k2: f64,
}

/// A fully specified benchmark problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub grid: GridSpec,
    /// `dt = dt_factor * h`.
    pub dt_factor: f64,
    pub nsteps: usize,
    pub seed: u64,
    pub coeff: CoeffField,
    pub init: InitKind,
    pub reaction: Option<Reaction>,
}

impl ProblemSpec {
    pub fn dt(&self) -> f64 {
        self.dt_factor * self.grid.h()
    }

    pub fn problem_id(&self) -> String {
        format!("{}_n{}", self.kind.name(), self.grid.n)
    }
}

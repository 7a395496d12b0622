//! Fast solver toolkit for linear and semi-linear parabolic PDEs on uniform
//! 2d/3d grids.
//!
//! The centerpiece is a recursively preconditioned hierarchical interpolative
//! factorization ([`hif::HifFactor`]): a multilevel generalized Cholesky
//! decomposition that alternates block elimination of cell interiors, block
//! Jacobi rescaling of the separator groups, and skeletonization of edges
//! (2d) or faces (3d) via interpolative decompositions. The result applies
//! and inverts in near-linear time and serves as a PCG preconditioner inside
//! Crank-Nicolson time stepping ([`solver::crank_nicolson_run`]).
//!
//! A drop-tolerance incomplete Cholesky baseline ([`ichol`]), randomized
//! power-iteration error estimators ([`estimate`]), and a config-driven
//! benchmark harness ([`bench`]) round out the toolkit. See the `examples/`
//! directory for runnable entry points per capability.

pub mod bench;
pub mod config;
pub mod dense;
pub mod error;
pub mod estimate;
pub mod fieldio;
pub mod grid;
pub mod hierarchy;
pub mod hif;
pub mod ichol;
pub mod index_set;
pub mod report;
pub mod rng;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use index_set::{ActiveSet, IndexSet};
pub use sparse::SymSparse;

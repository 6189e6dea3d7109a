//! Numerical core for quantum-ergodicity experiments on finite graphs.
//!
//! The crate is `no_std` (it needs `alloc`). Everything touching files, the
//! command line or threads lives in the companion `qergo` crate.
//!
//! Module map:
//! - [`graph`], [`paths`]: finite graphs, directed edges, non-backtracking path spaces,
//!   injectivity radius and Benjamini–Schramm statistics.
//! - [`generators`]: seeded random regular graphs, random lifts, biregular graphs and
//!   small named graphs.
//! - [`linalg`], [`spectral`]: dense symmetric eigensolver, walk spectral gap, the
//!   non-backtracking matrix and its relations to adjacency eigenvectors.
//! - [`kernels`]: graded kernels on path spaces and the operators acting on them.
//! - [`cone`]: trees of finite cone type and their Green functions.
//! - [`anderson`]: population dynamics for the random tree recursion.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod anderson;
pub mod cone;
pub mod error;
pub mod generators;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod paths;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Sequential simulation algorithms for minimizing L♮-convex objectives over
//! the integer box `[1..n]^d` from noisy evaluations.
//!
//! The crate is layered bottom-up:
//!
//! - [`lattice`]: box geometry, neighbor chains, projections.
//! - [`extension`]: the glued convex extension and exhaustive structure checks.
//! - [`stats`]: sub-Gaussian confidence intervals and seeded random streams.
//! - [`oracles`]: noisy simulation models, subgradient estimators, instance generators.
//! - [`solvers`]: stochastic subgradient methods with good-selection and
//!   correct-selection guarantees.
//! - [`steepest`]: steepest descent under biased neighbor information.
//! - [`harness`]: replicated experiments, brute-force ground truth, CSV output.

pub mod error;
pub mod extension;
pub mod harness;
pub mod lattice;
pub mod oracles;
pub mod solvers;
pub mod stats;
pub mod steepest;

pub use error::{Error, Result};
pub use extension::GridFunction;
pub use lattice::{BoxDomain, BoxPoint, LatticePoint};
pub use oracles::SimulationOracle;

//! Sparse graphical models for multivariate Lévy jump processes on trees.
//!
//! The standardized Lévy measure carries the dependence, stable marginal
//! tails carry the scale, and tree structure gives conditional independence.
//! The crate covers model construction, compound-Poisson simulation,
//! rank-based estimation of Lévy correlations, spanning-tree structure
//! learning and numerical conditional-independence checks.

pub mod ci_check;
pub mod config;
pub mod error;
pub mod estimate;
pub mod io;
pub mod learn;
pub mod linalg;
pub mod measures;
pub mod model;
pub mod normal;
pub mod quadrature;
pub mod simulate;
pub mod tree;

pub use error::{Error, Result};
pub use model::{Dependence, HeterogeneousStableModel};

//! Numerical laboratory for Hessian quotient Dirichlet problems
//! `sigma_k(lambda(U[u])) / sigma_l(lambda(U[u])) = f(x, u, grad u)`, `U[u] = tau (Lap u) I - Hess u`,
//! on coordinate boxes of the hyperboloid model of hyperbolic space.

// `!(x > 0.0)` is used on purpose so NaN is rejected with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod checks;
pub mod config;
pub mod error;
pub mod hessop;
pub mod hypgeom;
pub mod linalg;
pub mod oracle;
pub mod pogorelov;
pub mod solver;
pub mod sparse;
pub mod symfunc;

pub use error::{Error, Result};
pub use linalg::{SpectralDecomp, SymMat};
pub use symfunc::{Lambda, QuotientSpec};

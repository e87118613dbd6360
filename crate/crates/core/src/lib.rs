//! Exact homology calculus for Dehn fillings of knots in homology lens spaces.
//!
//! - [`exactlin`]: integer matrices, Smith normal form, cokernels.
//! - [`surgery`]: slopes, surgery parameters and the filled manifold's `H_1`.
//! - [`obstruction`]: surjections onto `Z/p`, divisors of the slope distance,
//!   the `L(4, q)` parity argument and the determined-by-complement rule table.
//! - [`verify`]: exhaustive sweeps with deterministic reports.
//! - [`cli`]: the `homlens` command-line front end.

pub mod cli;
pub mod error;
pub mod exactlin;
pub mod obstruction;
pub mod surgery;
pub mod verify;

pub use error::{Error, Result};
pub use exactlin::{AbelianGroup, IntMatrix, SnfDecomposition};
pub use surgery::{HomologyClass, Slope, SurgeryParams};

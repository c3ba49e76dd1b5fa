//! Exact worst-case deviation from the standard normal c.d.f. at zero among
//! distributions that match the first `k` even normal moments.
//!
//! For even `k` the least favorable distribution is symmetric and discrete,
//! built from the squared nonzero roots of the Hermite polynomial of degree
//! `k + 1`; its mass at zero equals the Hankel bound `1 / (H⁻¹)₀₀`. For odd
//! `k` no maximizer exists and the supremum is only approached as the largest
//! mass point escapes to infinity.
//!
//! Modules:
//! - [`hermite`]: exact Hermite coefficients and root squares.
//! - [`moments`]: exact normal moments, Hankel matrices and the bound.
//! - [`matching`]: probabilities on an arbitrary support matching a moment
//!   vector, behind the [`matching::ProbabilitySolver`] registry.
//! - [`extremal`]: least favorable distributions and the odd-`k` sweep.
//! - [`lp`]: grid linear-programming oracle.
//! - [`verify`]: named invariant checks aggregated into a pass/fail table.

pub mod error;
pub mod exact;
pub mod extremal;
pub mod hermite;
pub mod linalg;
pub mod lp;
pub mod matching;
pub mod moments;
pub mod roots;
mod simplex;
pub mod verify;

pub use error::{Error, Result};

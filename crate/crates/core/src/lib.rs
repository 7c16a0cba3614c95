//! Hyperbolic-polynomial machinery on Hermitian pencils.
//!
//! The crate evaluates elementary symmetric polynomials `σ_m` relative to a
//! positive-definite metric `G` and their complete polarizations, tests
//! Gårding-cone membership and hyperbolicity, checks Gårding's inequality,
//! certifies the signature and primitive negativity of the mixed Hodge-index
//! form `Q(β, γ) = D(β, γ, α_1, …, α_{m−2})` on `Herm(n)`, checks
//! log-concavity of mixed intersection sequences, and realizes the global
//! statements on a flat complex torus with a spectral Laplacian solver.

pub mod cli;
pub mod error;
pub mod fault;
pub mod garding;
pub mod herm;
pub mod hodge;
pub mod json;
pub mod literal;
pub mod sample;
pub mod sympoly;
pub mod torus;

pub use error::{GhxError, Result};
pub use herm::{inner, pencil_eigenvalues, proportionality, HermitianForm, MetricPencil, RealBasis};

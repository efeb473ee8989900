//! Sharp constants for rank-one Brascamp–Lieb inequalities and the dual
//! subadditivity of entropy `Σ c_j S(a_j·X) ≤ S(X) + D(A,c)`.
//!
//! - [`family`]: feasibility polytope, critical subsets, splitting, total reducibility
//! - [`gaussopt`]: the constant `D(A,c)`, frame matrices and extremizers
//! - [`entropy`]: grid densities, entropy, Fisher information, marginals, heat flow
//! - [`blverify`]: numerical checks of the inequality and its equality cases
//! - [`spectral`]: ground-state eigenvalues and their subadditivity
//! - [`linops`]: dense kernels shared by the rest

// `!(x > 0.0)` is used on purpose so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blverify;
pub mod entropy;
pub mod error;
pub mod family;
pub mod gaussopt;
pub mod linops;
pub mod spectral;

pub use entropy::{Axis, DensityGrid, MarginalGrid};
pub use error::{Error, Result};
pub use family::{SpanningFamily, Subset, WeightVector};
pub use gaussopt::GaussianSpec;
pub use linops::{Mat, Subspace, Vector};
pub use spectral::{GroundState, Potential};

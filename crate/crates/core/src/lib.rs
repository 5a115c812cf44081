//! Exact-enumeration laboratory for Ising models and general distributions
//! over `{-1,+1}^V`: Glauber dynamics, influence matrices, the
//! k-transformation, block factorization of entropy, down-up walks and
//! modified log-Sobolev comparisons, each checked against brute force.

pub mod cli;
pub mod error;
pub mod exact;
pub mod factorization;
pub mod glauber;
pub mod model;
pub mod numeric;
pub mod report;
pub mod spectral;
pub mod transform;
pub mod walks;

pub use error::{GlabError, Result};
pub use exact::{DenseDistribution, FieldAssignment, FunctionTable};
pub use model::{FlipDirection, IsingModel, Pinning, SpinConfig};
pub use report::CheckReport;

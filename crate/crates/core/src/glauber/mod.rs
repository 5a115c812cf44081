//! Glauber dynamics: exact transition matrices and simulated chains,
//! Dirichlet forms, modified log-Sobolev estimates, exact mixing times,
//! comparison identities under magnetization, and verification bounds for
//! the biased Ising model.

mod chain;
mod compare;
mod mls;
mod verification;

pub use chain::*;
pub use compare::*;
pub use mls::*;
pub use verification::*;

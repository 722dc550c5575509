//! Higher-order asymptotics for the maximum likelihood estimator of location.
//!
//! The crate evaluates the stochastic expansion of √n(θ̂ₙ − θ₀) through the
//! n⁻² term, the Edgeworth expansion of the distribution of the standardized
//! estimator √(n I(f)) (θ̂ₙ − θ₀), and the matching Cornish-Fisher quantile
//! expansion. The population functionals these expansions need are computed
//! by adaptive quadrature, and a Monte Carlo harness checks every formula
//! against simulated MLEs.
//!
//! Modules:
//! - [`density`]: location families, ρ = −log f and its derivatives;
//! - [`moments`]: Fisher information, a₁…a₆, η₂…η₁₀ and regularity checks;
//! - [`expansion`]: stochastic, Edgeworth and Cornish-Fisher evaluators;
//! - [`mle`]: the location MLE;
//! - [`montecarlo`]: sampling, ECDF comparison and remainder studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod error;
pub mod exec;
pub mod expansion;
pub mod mle;
pub mod moments;
pub mod montecarlo;
pub mod quadrature;
pub mod special;

pub use density::{DensityModel, FamilySpec};
pub use error::{Error, Result};
pub use exec::Execution;
pub use expansion::ExpansionOrder;
pub use moments::MomentSet;

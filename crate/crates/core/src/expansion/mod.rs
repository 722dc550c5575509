//! Asymptotic expansions of the location MLE.
//!
//! An [`ExpansionOrder`] k in 1..=5 keeps the terms of order n^0 through
//! n^{-(k-1)/2}; order 1 is the first-order (normal) approximation.

pub mod coefficients;
pub mod compose;
pub mod cornish_fisher;
pub mod edgeworth;
pub mod stochastic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use coefficients::{CoefficientTable, EdgeworthCoefficients, TableKind};
pub use compose::{compose_check, compose_check_grid, CompositionReport, OrderResidual};
pub use cornish_fisher::{cornish_fisher_quantile, CornishFisher};
pub use edgeworth::{edgeworth_cdf, Edgeworth, EdgeworthValue};
pub use stochastic::{compute_xi, stochastic_expansion, stochastic_expansion_terms, XiVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ExpansionOrder(u8);

impl ExpansionOrder {
    pub const FIRST: ExpansionOrder = ExpansionOrder(1);
    pub const MAX: ExpansionOrder = ExpansionOrder(5);

    pub fn new(k: u8) -> Result<Self> {
        if (1..=5).contains(&k) {
            Ok(Self(k))
        } else {
            Err(Error::invalid(format!("expansion order must be in 1..=5, got {k}")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    /// Exponent e of the last retained term n^{-e}.
    pub fn last_exponent(self) -> f64 {
        (self.0 as f64 - 1.0) / 2.0
    }

    /// Orders 1..=self.
    pub fn up_to(self) -> impl Iterator<Item = ExpansionOrder> {
        (1..=self.0).map(ExpansionOrder)
    }

    pub fn all() -> impl Iterator<Item = ExpansionOrder> {
        Self::MAX.up_to()
    }
}

impl TryFrom<u8> for ExpansionOrder {
    type Error = Error;
    fn try_from(k: u8) -> Result<Self> {
        Self::new(k)
    }
}

impl From<ExpansionOrder> for u8 {
    fn from(k: ExpansionOrder) -> u8 {
        k.0
    }
}

impl fmt::Display for ExpansionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// n^{-1/2}, rejecting n = 0.
pub(crate) fn root_inverse(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    Ok(1.0 / (n as f64).sqrt())
}

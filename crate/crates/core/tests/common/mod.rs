#![allow(dead_code)]

use mle_expansion::density::{ratios_from_log_derivatives, LocationFamily, MAX_ORDER};
use mle_expansion::error::{Error, Result};

/// Standard Gumbel (minimum-of-exponent form): f(x) = exp(−x − e^{−x}).
/// log f has ℓ' = e^{−x} − 1 and ℓ^(j) = (−1)^j e^{−x} for j ≥ 2, so
/// I(f) = Var(Exp(1)) = 1 and η₃ = E(E − 1)³ = 2.
#[derive(Debug, Clone, Copy)]
pub struct Gumbel;

impl LocationFamily for Gumbel {
    fn name(&self) -> String {
        "gumbel".into()
    }

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        -x - (-x).exp()
    }

    fn derivative_ratios(&self, x: f64) -> [f64; MAX_ORDER] {
        let e = (-x).exp();
        let mut ell = [0.0; MAX_ORDER];
        ell[0] = e - 1.0;
        for (j, v) in ell.iter_mut().enumerate().skip(1) {
            *v = if j % 2 == 1 { -e } else { e };
        }
        ratios_from_log_derivatives(&ell)
    }

    fn cdf(&self, x: f64) -> f64 {
        (-(-x).exp()).exp()
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        Ok(-(-p.ln()).ln())
    }

    fn positive_on_interior(&self) -> bool {
        true
    }
}

/// Logistic whose inverse CDF refuses the lower `cut` tail.
#[derive(Debug, Clone, Copy)]
pub struct BrokenQuantile {
    pub cut: f64,
}

impl LocationFamily for BrokenQuantile {
    fn name(&self) -> String {
        "broken-quantile".into()
    }

    fn pdf(&self, x: f64) -> f64 {
        mle_expansion::density::Logistic::new().pdf(x)
    }

    fn derivative_ratios(&self, x: f64) -> [f64; MAX_ORDER] {
        mle_expansion::density::Logistic::new().derivative_ratios(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        mle_expansion::density::Logistic::new().cdf(x)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        if p < self.cut {
            Err(Error::InversionFailure { p })
        } else {
            mle_expansion::density::Logistic::new().quantile(p)
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn positive_on_interior(&self) -> bool {
        true
    }
}

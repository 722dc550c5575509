//! Stochastic expansion of √n(θ̂ − θ₀) in powers of n^{-1/2}.
//!
//! With ξ_j = √n (n⁻¹ Σ ρ^(j)(X_i − θ₀) − a_j), solving the score equation
//! term by term gives √n(θ̂ − θ₀) = T₁ + n^{-1/2}T₂ + n⁻¹T₃ + n^{-3/2}T₄ + n⁻²T₅
//! + O_p(n^{-5/2}), each T_k a polynomial in ξ₁…ξ_k over powers of a₂.

use serde::Serialize;

use super::{root_inverse, ExpansionOrder};
use crate::density::{DensityModel, MAX_ORDER};
use crate::error::{Error, Result};

/// ξ₁…ξ₆ for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiVector {
    pub xi: [f64; MAX_ORDER],
    pub n: usize,
}

impl XiVector {
    /// ξ_j, j in 1..=6.
    pub fn get(&self, j: usize) -> f64 {
        self.xi[j - 1]
    }
}

/// Centred, √n-scaled sample means of ρ^(j)(X_i − θ₀).
pub fn compute_xi(sample: &[f64], theta0: f64, model: &DensityModel, a: &[f64; MAX_ORDER]) -> Result<XiVector> {
    if sample.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let mut sums = [0.0; MAX_ORDER];
    for &x in sample {
        let d = model.rho_derivs(x - theta0)?;
        for (s, v) in sums.iter_mut().zip(d) {
            *s += v;
        }
    }
    let n = sample.len();
    let root_n = (n as f64).sqrt();
    let mut xi = [0.0; MAX_ORDER];
    for j in 0..MAX_ORDER {
        xi[j] = root_n * (sums[j] / n as f64 - a[j]);
    }
    Ok(XiVector { xi, n })
}

fn check_information(a2: f64) -> Result<()> {
    if !a2.is_finite() || a2.abs() < f64::EPSILON {
        return Err(Error::SingularInformation(a2));
    }
    Ok(())
}

/// T₁ … T₅ (unscaled).
pub fn stochastic_expansion_terms(xi: &XiVector, a: &[f64; MAX_ORDER]) -> Result<[f64; 5]> {
    let a2 = a[1];
    check_information(a2)?;
    let (a3, a4, a5, a6) = (a[2], a[3], a[4], a[5]);
    let [x1, x2, x3, x4, x5, _] = xi.xi;
    let p = |k: i32| a2.powi(k);

    let t1 = x1 / a2;

    let t2 = -x1 * x2 / p(2) + a3 * x1 * x1 / (2.0 * p(3));

    let t3 = x1 * x2 * x2 / p(3) - 3.0 * a3 * x1 * x1 * x2 / (2.0 * p(4)) + x1 * x1 * x3 / (2.0 * p(3))
        + a3 * a3 * x1.powi(3) / (2.0 * p(5))
        - a4 * x1.powi(3) / (6.0 * p(4));

    let t4 = 3.0 * a3 * x1 * x1 * x2 * x2 / p(5) + 5.0 * a3.powi(3) * x1.powi(4) / (8.0 * p(7))
        - 5.0 * a3 * a4 * x1.powi(4) / (12.0 * p(6))
        - 3.0 * x1 * x1 * x2 * x3 / (2.0 * p(4))
        - 5.0 * a3 * a3 * x1.powi(3) * x2 / (2.0 * p(6))
        + a5 * x1.powi(4) / (24.0 * p(5))
        + a3 * x1.powi(3) * x3 / p(5)
        + 2.0 * a4 * x1.powi(3) * x2 / (3.0 * p(5))
        - x1.powi(3) * x4 / (6.0 * p(4))
        - x1 * x2.powi(3) / p(4);

    let t5 = -5.0 * a3 * x1 * x1 * x2.powi(3) / p(6) - 5.0 * a4 * x1.powi(4) * x3 / (12.0 * p(6))
        + 15.0 * a3 * a3 * x1.powi(3) * x2 * x2 / (2.0 * p(7))
        - 35.0 * a3.powi(3) * x1.powi(4) * x2 / (8.0 * p(8))
        + 5.0 * a3 * a4 * x1.powi(4) * x2 / (2.0 * p(7))
        - 5.0 * a5 * x1.powi(4) * x2 / (24.0 * p(6))
        - 7.0 * a3 * a3 * a4 * x1.powi(5) / (8.0 * p(8))
        - a6 * x1.powi(5) / (120.0 * p(6))
        + x1 * x2.powi(4) / p(5)
        + x1.powi(4) * x5 / (24.0 * p(5))
        + a4 * a4 * x1.powi(5) / (12.0 * p(7))
        + 7.0 * a3.powi(4) * x1.powi(5) / (8.0 * p(9))
        + x1.powi(3) * x3 * x3 / (2.0 * p(5))
        + 3.0 * x1 * x1 * x2 * x2 * x3 / p(5)
        + 15.0 * a3 * a3 * x1.powi(4) * x3 / (8.0 * p(7))
        - 5.0 * a3 * x1.powi(4) * x4 / (12.0 * p(6))
        - 5.0 * a4 * x1.powi(3) * x2 * x2 / (3.0 * p(6))
        + a3 * a5 * x1.powi(5) / (8.0 * p(7))
        - 5.0 * a3 * x1.powi(3) * x2 * x3 / p(6)
        + 2.0 * x1.powi(3) * x2 * x4 / (3.0 * p(5));

    Ok([t1, t2, t3, t4, t5])
}

/// Σ_{k ≤ order} n^{-(k-1)/2} T_k.
pub fn stochastic_expansion(xi: &XiVector, a: &[f64; MAX_ORDER], order: ExpansionOrder) -> Result<f64> {
    Ok(truncations(xi, a)?[order.index()])
}

/// The value of the expansion at every order 1..=5.
pub fn truncations(xi: &XiVector, a: &[f64; MAX_ORDER]) -> Result<[f64; 5]> {
    let terms = stochastic_expansion_terms(xi, a)?;
    let h = root_inverse(xi.n)?;
    let mut out = [0.0; 5];
    let mut acc = 0.0;
    let mut scale = 1.0;
    for k in 0..5 {
        acc += scale * terms[k];
        out[k] = acc;
        scale *= h;
    }
    Ok(out)
}

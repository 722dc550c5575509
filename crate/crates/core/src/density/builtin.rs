use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma::ln_gamma;

use super::{ratios_from_log_derivatives, LocationFamily, Support, MAX_ORDER};
use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_pdf, norm_quantile};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal. ψ_j(x) = (−1)^j He_j(x).
#[derive(Debug, Clone, Copy, Default)]
pub struct Normal;

impl LocationFamily for Normal {
    fn name(&self) -> String {
        "normal".into()
    }

    fn pdf(&self, x: f64) -> f64 {
        norm_pdf(x)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        -0.5 * x * x - LN_SQRT_2PI
    }

    fn derivative_ratios(&self, x: f64) -> [f64; MAX_ORDER] {
        // probabilists' Hermite recursion He_{k+1} = x He_k − k He_{k−1}
        let mut he = [0.0; MAX_ORDER + 1];
        he[0] = 1.0;
        he[1] = x;
        for k in 1..MAX_ORDER {
            he[k + 1] = x * he[k] - k as f64 * he[k - 1];
        }
        let mut out = [0.0; MAX_ORDER];
        for j in 1..=MAX_ORDER {
            out[j - 1] = if j % 2 == 0 { he[j] } else { -he[j] };
        }
        out
    }

    fn cdf(&self, x: f64) -> f64 {
        norm_cdf(x)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        Ok(norm_quantile(p))
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn positive_on_interior(&self) -> bool {
        true
    }
}

/// Standard logistic, f(x) = e^{−x} / (1 + e^{−x})².
///
/// With t = tanh(x/2), ℓ' = −t and d/dx acts on polynomials in t as
/// p ↦ p'(t) (1 − t²) / 2, so every log-derivative is a polynomial in t.
#[derive(Debug, Clone)]
pub struct Logistic {
    // ℓ^(j) as polynomial coefficients in t, lowest degree first.
    log_derivative_polys: [[f64; MAX_ORDER + 2]; MAX_ORDER],
}

impl Default for Logistic {
    fn default() -> Self {
        Self::new()
    }
}

impl Logistic {
    pub fn new() -> Self {
        let mut polys = [[0.0; MAX_ORDER + 2]; MAX_ORDER];
        polys[0][1] = -1.0;
        for j in 1..MAX_ORDER {
            let p = polys[j - 1];
            let mut q = [0.0; MAX_ORDER + 2];
            // (1 − t²)/2 · Σ k c_k t^{k−1}
            for k in 1..p.len() {
                let dk = k as f64 * p[k];
                q[k - 1] += 0.5 * dk;
                if k + 1 < q.len() {
                    q[k + 1] -= 0.5 * dk;
                }
            }
            polys[j] = q;
        }
        Self {
            log_derivative_polys: polys,
        }
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
}

impl LocationFamily for Logistic {
    fn name(&self) -> String {
        "logistic".into()
    }

    fn pdf(&self, x: f64) -> f64 {
        let e = (-x.abs()).exp();
        e / ((1.0 + e) * (1.0 + e))
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        -x.abs() - 2.0 * (-x.abs()).exp().ln_1p()
    }

    fn derivative_ratios(&self, x: f64) -> [f64; MAX_ORDER] {
        let t = (0.5 * x).tanh();
        let ell = self.log_derivative_polys.map(|p| horner(&p, t));
        ratios_from_log_derivatives(&ell)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x >= 0.0 {
            1.0 / (1.0 + (-x).exp())
        } else {
            let e = x.exp();
            e / (1.0 + e)
        }
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        Ok((p / (1.0 - p)).ln())
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn positive_on_interior(&self) -> bool {
        true
    }
}

/// Student t with `nu` degrees of freedom, unit scale.
///
/// ρ(x) = (ν+1)/2 · log(1 + x²/ν) + const, and with s = √ν
/// ρ^(j)(x) = (ν+1) (−1)^{j−1} (j−1)! Re[(x − i s)^{−j}].
#[derive(Debug, Clone)]
pub struct StudentT {
    nu: f64,
    ln_norm: f64,
    dist: StudentsT,
}

impl StudentT {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Family(format!("student-t needs nu > 0, got {nu}")));
        }
        let dist = StudentsT::new(0.0, 1.0, nu).map_err(|e| Error::Family(e.to_string()))?;
        let ln_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * std::f64::consts::PI).ln();
        Ok(Self { nu, ln_norm, dist })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

impl LocationFamily for StudentT {
    fn name(&self) -> String {
        format!("student-t(nu={})", self.nu)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_norm - 0.5 * (self.nu + 1.0) * (x * x / self.nu).ln_1p()
    }

    fn derivative_ratios(&self, x: f64) -> [f64; MAX_ORDER] {
        let s = self.nu.sqrt();
        let r = x.hypot(s);
        let phi = s.atan2(x);
        let mut ell = [0.0; MAX_ORDER];
        let mut fact = 1.0;
        for j in 1..=MAX_ORDER {
            if j > 1 {
                fact *= (j - 1) as f64;
            }
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let re = (j as f64 * phi).cos() / r.powi(j as i32);
            // ℓ = −ρ
            ell[j - 1] = -(self.nu + 1.0) * sign * fact * re;
        }
        ratios_from_log_derivatives(&ell)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.dist.cdf(x)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.dist.inverse_cdf(p))
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn positive_on_interior(&self) -> bool {
        true
    }
}

/// `inner` translated to location `shift`.
#[derive(Debug, Clone)]
pub struct Shifted {
    inner: Arc<dyn LocationFamily>,
    shift: f64,
}

impl Shifted {
    pub fn new(inner: Arc<dyn LocationFamily>, shift: f64) -> Self {
        Self { inner, shift }
    }
}

impl LocationFamily for Shifted {
    fn name(&self) -> String {
        format!("{}+{}", self.inner.name(), self.shift)
    }
    fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x - self.shift)
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        self.inner.ln_pdf(x - self.shift)
    }
    fn derivative_ratios(&self, x: f64) -> [f64; MAX_ORDER] {
        self.inner.derivative_ratios(x - self.shift)
    }
    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x - self.shift)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.inner.quantile(p)? + self.shift)
    }
    fn support(&self) -> Support {
        let s = self.inner.support();
        Support {
            lower: s.lower + self.shift,
            upper: s.upper + self.shift,
        }
    }
    fn derivative_mode(&self) -> super::DerivativeMode {
        self.inner.derivative_mode()
    }
    fn length_scale(&self) -> f64 {
        self.inner.length_scale()
    }
    fn positive_on_interior(&self) -> bool {
        self.inner.positive_on_interior()
    }
}

//! Location density families and the contrast ρ = −log f.
//!
//! A family supplies its density and the derivative ratios
//! ψ_j = f^(j) / f for j = 1..=6. Derivatives of ρ are obtained from the
//! ratios by inverting the logarithmic-derivative recursion
//!
//! ```text
//! ψ_j = Σ_{k=0}^{j-1} C(j-1, k) ℓ^(k+1) ψ_{j-1-k},   ψ_0 = 1,  ℓ = log f,
//! ```
//!
//! so nothing is ever differenced on the log scale.

mod builtin;
mod numeric;
mod spec;
mod user;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

pub use builtin::{Logistic, Normal, Shifted, StudentT};
pub use numeric::{initial_step, numeric_derivative, NumericDerivative, PRECISION_WARNING_THRESHOLD};
pub use spec::FamilySpec;
pub use user::{ExpressionFamily, TabulatedFamily, TABULATED_COLUMNS};

/// Highest derivative order carried by a family.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    NumericFallback,
}

/// Closed interval of the real line; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub const REAL_LINE: Support = Support {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::invalid(format!("empty support [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }

    pub fn is_real_line(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }
}

/// A density family f(· − θ) evaluated at θ = 0.
///
/// Implementations must be pure; models are shared across worker threads.
pub trait LocationFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn pdf(&self, x: f64) -> f64;

    fn ln_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }

    /// ψ_1(x), …, ψ_6(x).
    fn derivative_ratios(&self, x: f64) -> [f64; MAX_ORDER];

    fn cdf(&self, x: f64) -> f64;

    fn quantile(&self, p: f64) -> Result<f64>;

    fn support(&self) -> Support {
        Support::REAL_LINE
    }

    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Analytic
    }

    /// Whether f(x) = f(−x).
    fn is_symmetric(&self) -> bool {
        false
    }

    /// Length on which the density varies; used for quadrature splits and
    /// finite-difference steps.
    fn length_scale(&self) -> f64 {
        1.0
    }

    /// True when f is strictly positive on the whole interior of the
    /// support, so the zero-density check can be skipped.
    fn positive_on_interior(&self) -> bool {
        false
    }
}

/// Shared handle to a location family.
#[derive(Clone)]
pub struct DensityModel {
    family: Arc<dyn LocationFamily>,
}

impl fmt::Debug for DensityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityModel")
            .field("name", &self.name())
            .field("support", &self.support())
            .field("derivative_mode", &self.derivative_mode())
            .finish()
    }
}

impl DensityModel {
    pub fn new<F: LocationFamily + 'static>(family: F) -> Self {
        Self {
            family: Arc::new(family),
        }
    }

    pub fn normal() -> Self {
        Self::new(Normal)
    }

    pub fn logistic() -> Self {
        Self::new(Logistic::new())
    }

    pub fn student_t(nu: f64) -> Result<Self> {
        StudentT::new(nu).map(Self::new)
    }

    /// The same family moved to location `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        if shift == 0.0 {
            return self.clone();
        }
        Self::new(Shifted::new(self.family.clone(), shift))
    }

    pub fn family(&self) -> &dyn LocationFamily {
        self.family.as_ref()
    }

    pub fn name(&self) -> String {
        self.family.name()
    }

    pub fn support(&self) -> Support {
        self.family.support()
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.family.derivative_mode()
    }

    pub fn is_symmetric(&self) -> bool {
        self.family.is_symmetric()
    }

    pub fn length_scale(&self) -> f64 {
        self.family.length_scale()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if self.support().contains_interior(x) {
            self.family.pdf(x)
        } else {
            0.0
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lower {
            0.0
        } else if x >= s.upper {
            1.0
        } else {
            self.family.cdf(x)
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InversionFailure { p });
        }
        let x = self.family.quantile(p)?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::InversionFailure { p })
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let ok = self.support().contains_interior(x)
            && (self.family.positive_on_interior() || self.family.ln_pdf(x) > f64::NEG_INFINITY);
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                family: self.name(),
                x,
            })
        }
    }

    /// ρ(x) = −log f(x).
    pub fn rho(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(-self.family.ln_pdf(x))
    }

    /// ψ_i(x) = f^(i)(x) / f(x), i in 1..=6.
    pub fn psi(&self, i: usize, x: f64) -> Result<f64> {
        check_order(i)?;
        self.check_domain(x)?;
        Ok(self.family.derivative_ratios(x)[i - 1])
    }

    /// All six ratios at once.
    pub fn psis(&self, x: f64) -> Result<[f64; MAX_ORDER]> {
        self.check_domain(x)?;
        Ok(self.family.derivative_ratios(x))
    }

    /// f^(j)(x) for j in 0..=6.
    pub fn density_derivative(&self, j: usize, x: f64) -> Result<f64> {
        if j == 0 {
            return Ok(self.pdf(x));
        }
        Ok(self.psi(j, x)? * self.pdf(x))
    }

    /// ρ^(j)(x), j in 1..=6.
    pub fn rho_deriv(&self, j: usize, x: f64) -> Result<f64> {
        check_order(j)?;
        Ok(self.rho_derivs(x)?[j - 1])
    }

    /// ρ^(1)(x), …, ρ^(6)(x).
    pub fn rho_derivs(&self, x: f64) -> Result<[f64; MAX_ORDER]> {
        let psi = self.psis(x)?;
        let ell = log_derivatives_from_ratios(&psi);
        Ok(ell.map(|v| -v))
    }

    /// Normalization, boundary decay and derivative-transcription checks.
    pub fn check_invariants(&self, tol: f64) -> DensityCheck {
        let quad = Quadrature::with_tolerance(tol * 0.1);
        let s = self.support();
        let integrate = |g: &dyn Fn(f64) -> f64| {
            quad.integrate(g, s.lower, s.upper)
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
        };
        let mass = integrate(&|x| self.pdf(x));
        let derivative_masses = [1usize, 2, 3].map(|j| {
            integrate(&|x| {
                let f = self.pdf(x);
                if f == 0.0 {
                    0.0
                } else {
                    self.family.derivative_ratios(x)[j - 1] * f
                }
            })
        });

        // Each analytic f^(j) is compared with a first-order difference of the
        // analytic f^(j-1); chaining the links down to f checks every order
        // at first-derivative accuracy.
        let probes = self.probe_grid();
        let positive = probes.iter().all(|&x| self.pdf(x) > 0.0);
        let mut worst = 0.0f64;
        let h = self.length_scale();
        for &x in &probes {
            let f = self.pdf(x);
            let ratios = self.family.derivative_ratios(x);
            for j in 1..=MAX_ORDER {
                let analytic = ratios[j - 1] * f;
                let lower = |t: f64| {
                    let ft = self.pdf(t);
                    if j == 1 {
                        ft
                    } else {
                        self.family.derivative_ratios(t)[j - 2] * ft
                    }
                };
                let numeric = numeric_derivative(lower, 1, x, h).value;
                let denom = analytic.abs().max(f);
                worst = worst.max((analytic - numeric).abs() / denom);
            }
        }
        DensityCheck {
            mass,
            derivative_masses,
            positive_on_probes: positive,
            max_derivative_mismatch: worst,
        }
    }

    /// Interior probe points used by the invariant checks.
    pub fn probe_grid(&self) -> Vec<f64> {
        let s = self.support();
        if s.is_real_line() {
            let h = self.length_scale();
            (-12..=12).map(|i| i as f64 * 0.25 * h + 0.0625 * h).collect()
        } else {
            let lo = if s.lower.is_finite() { s.lower } else { s.upper - 10.0 * self.length_scale() };
            let hi = if s.upper.is_finite() { s.upper } else { s.lower + 10.0 * self.length_scale() };
            (1..24).map(|i| lo + (hi - lo) * i as f64 / 24.0).collect()
        }
    }
}

/// Outcome of [`DensityModel::check_invariants`].
#[derive(Debug, Clone, Serialize)]
pub struct DensityCheck {
    pub mass: f64,
    /// ∫ f', ∫ f'', ∫ f'''.
    pub derivative_masses: [f64; 3],
    pub positive_on_probes: bool,
    /// Largest |f^(j) − D f^(j−1)| / max(|f^(j)|, f) on the probe grid, with D a
    /// Ridders central difference.
    pub max_derivative_mismatch: f64,
}

impl DensityCheck {
    pub fn passes(&self, tol: f64, derivative_tol: f64) -> bool {
        (self.mass - 1.0).abs() <= tol
            && self.derivative_masses.iter().all(|m| m.abs() <= tol)
            && self.positive_on_probes
            && self.max_derivative_mismatch <= derivative_tol
    }
}

fn check_order(j: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&j) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(j))
    }
}

const BINOM: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0, 0.0],
    [1.0, 5.0, 10.0, 10.0, 5.0, 1.0],
];

/// ψ_1..ψ_6 from the log-density derivatives ℓ^(1)..ℓ^(6).
pub fn ratios_from_log_derivatives(ell: &[f64; MAX_ORDER]) -> [f64; MAX_ORDER] {
    let mut psi = [0.0; MAX_ORDER + 1];
    psi[0] = 1.0;
    for j in 1..=MAX_ORDER {
        psi[j] = (0..j)
            .map(|k| BINOM[j - 1][k] * ell[k] * psi[j - 1 - k])
            .sum();
    }
    [psi[1], psi[2], psi[3], psi[4], psi[5], psi[6]]
}

/// ℓ^(1)..ℓ^(6) from ψ_1..ψ_6 (inverse of [`ratios_from_log_derivatives`]).
pub fn log_derivatives_from_ratios(psi: &[f64; MAX_ORDER]) -> [f64; MAX_ORDER] {
    let mut ell = [0.0; MAX_ORDER];
    let ratio = |i: usize| if i == 0 { 1.0 } else { psi[i - 1] };
    for j in 1..=MAX_ORDER {
        let lower: f64 = (0..j - 1)
            .map(|k| BINOM[j - 1][k] * ell[k] * ratio(j - 1 - k))
            .sum();
        ell[j - 1] = psi[j - 1] - lower;
    }
    ell
}

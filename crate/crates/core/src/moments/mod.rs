//! Population functionals of a location family at θ₀ = 0.
//!
//! With ψ_i = f^(i)/f and I = I(f):
//!
//! ```text
//! η2 = Eψ2²/I²      η3 = Eψ1³/I^{3/2}   η4 = Eψ1⁴/I²      η5 = Eψ1⁵/I^{5/2}
//! η6 = Eψ2ψ3/I^{5/2} η7 = Eψ1⁶/I³     η8 = Eψ2³/I³      η9 = Eψ3²/I³
//! η10 = Eψ1ψ2ψ3/I³
//! ```
//!
//! and a_j = E ρ^(j)(X) for j = 1..6. Indices keep their conventional
//! numbering: there is no η1.

pub mod conditions;

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::density::{DensityModel, MAX_ORDER};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quadrature::{QuadError, Quadrature};

pub use conditions::{validate_conditions, ConditionReport, ConditionResult, Verdict};

/// Default absolute tolerance per functional.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Core half-width (in length-scale units) integrated directly before the
/// tails are mapped.
const CORE_HALF_WIDTH: f64 = 8.0;
/// Tail extensions L·2^k, k = 1..=TAIL_DOUBLINGS, probed for divergence.
const TAIL_DOUBLINGS: i32 = 6;

/// η2 … η10, indexed by their conventional index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eta {
    pub eta2: f64,
    pub eta3: f64,
    pub eta4: f64,
    pub eta5: f64,
    pub eta6: f64,
    pub eta7: f64,
    pub eta8: f64,
    pub eta9: f64,
    pub eta10: f64,
}

impl Eta {
    pub const INDICES: std::ops::RangeInclusive<usize> = 2..=10;

    /// Values for the standard normal family.
    pub const GAUSSIAN: Eta = Eta {
        eta2: 2.0,
        eta3: 0.0,
        eta4: 3.0,
        eta5: 0.0,
        eta6: 0.0,
        eta7: 15.0,
        eta8: 8.0,
        eta9: 6.0,
        eta10: 6.0,
    };

    pub fn from_array(v: [f64; 9]) -> Self {
        Self {
            eta2: v[0],
            eta3: v[1],
            eta4: v[2],
            eta5: v[3],
            eta6: v[4],
            eta7: v[5],
            eta8: v[6],
            eta9: v[7],
            eta10: v[8],
        }
    }

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.eta2, self.eta3, self.eta4, self.eta5, self.eta6, self.eta7, self.eta8, self.eta9, self.eta10,
        ]
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        Self::INDICES.contains(&i).then(|| self.to_array()[i - 2])
    }
}

impl Index<usize> for Eta {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i {
            2 => &self.eta2,
            3 => &self.eta3,
            4 => &self.eta4,
            5 => &self.eta5,
            6 => &self.eta6,
            7 => &self.eta7,
            8 => &self.eta8,
            9 => &self.eta9,
            10 => &self.eta10,
            _ => panic!("eta index {i} outside 2..=10"),
        }
    }
}

/// Estimated absolute quadrature error of each entry of a [`MomentSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentErrors {
    pub fisher: f64,
    pub a: [f64; MAX_ORDER],
    pub eta: Eta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub fisher: f64,
    /// a_j = E ρ^(j)(X), stored at index j − 1.
    pub a: [f64; MAX_ORDER],
    pub eta: Eta,
    pub quadrature_error: MomentErrors,
}

impl MomentSet {
    /// Builds a moment set directly from η values, e.g. for evaluating the
    /// distributional expansions of a hypothetical family. The `a` vector is
    /// set to the Gaussian pattern (0, I, 0, …).
    pub fn from_eta(fisher: f64, eta: Eta) -> Self {
        let mut a = [0.0; MAX_ORDER];
        a[1] = fisher;
        Self {
            fisher,
            a,
            eta,
            quadrature_error: MomentErrors {
                fisher: 0.0,
                a: [0.0; MAX_ORDER],
                eta: Eta::from_array([0.0; 9]),
            },
        }
    }

    /// a_j for j in 1..=6.
    pub fn a(&self, j: usize) -> f64 {
        self.a[j - 1]
    }

    /// (name, value, estimated error) rows in a fixed order.
    pub fn rows(&self) -> Vec<(String, f64, f64)> {
        let mut out = vec![("fisher".to_string(), self.fisher, self.quadrature_error.fisher)];
        for j in 1..=MAX_ORDER {
            out.push((format!("a{j}"), self.a[j - 1], self.quadrature_error.a[j - 1]));
        }
        for i in Eta::INDICES {
            out.push((format!("eta{i}"), self.eta[i], self.quadrature_error.eta[i]));
        }
        out
    }

    /// Violated structural invariants, allowing `slack` of numerical error.
    pub fn invariant_violations(&self, slack: f64) -> Vec<String> {
        let e = &self.eta;
        let mut v = Vec::new();
        if !(self.fisher > 0.0) {
            v.push(format!("fisher information {} is not positive", self.fisher));
        }
        if self.a[0].abs() > slack {
            v.push(format!("|a1| = {:e} exceeds {slack:e}", self.a[0].abs()));
        }
        if (self.a[1] - self.fisher).abs() > slack {
            v.push(format!("|a2 - I| = {:e} exceeds {slack:e}", (self.a[1] - self.fisher).abs()));
        }
        if e.eta4 - e.eta3 * e.eta3 < -slack {
            v.push("eta4 < eta3^2".into());
        }
        if e.eta7 - e.eta4 * e.eta4 < -slack {
            v.push("eta7 < eta4^2".into());
        }
        if e.eta4 - 1.0 < -slack {
            v.push("eta4 < 1".into());
        }
        for (name, val) in [("eta2", e.eta2), ("eta7", e.eta7), ("eta9", e.eta9)] {
            if val < -slack {
                v.push(format!("{name} = {val} is negative"));
            }
        }
        v
    }
}

/// I(f) = ∫ ψ1² f.
pub fn fisher_information(model: &DensityModel) -> Result<f64> {
    fisher_information_with_error(model, DEFAULT_TOL).map(|(v, _)| v)
}

fn fisher_information_with_error(model: &DensityModel, tol: f64) -> Result<(f64, f64)> {
    expectation(model, "fisher", tol, &|psi, _| psi[0] * psi[0])
}

/// Computes I(f), a₁…a₆ and η₂…η₁₀, each to absolute tolerance `tol`.
pub fn compute_moment_set(model: &DensityModel, tol: f64) -> Result<MomentSet> {
    compute_moment_set_with(model, tol, Execution::Auto)
}

type Integrand = fn(&[f64; MAX_ORDER], &[f64; MAX_ORDER]) -> f64;

struct Functional {
    name: &'static str,
    // power of I dividing the raw expectation
    info_power: f64,
    odd: bool,
    integrand: Integrand,
}

const ETA_FUNCTIONALS: [Functional; 9] = [
    Functional { name: "eta2", info_power: 2.0, odd: false, integrand: |p, _| p[1] * p[1] },
    Functional { name: "eta3", info_power: 1.5, odd: true, integrand: |p, _| p[0].powi(3) },
    Functional { name: "eta4", info_power: 2.0, odd: false, integrand: |p, _| p[0].powi(4) },
    Functional { name: "eta5", info_power: 2.5, odd: true, integrand: |p, _| p[0].powi(5) },
    Functional { name: "eta6", info_power: 2.5, odd: true, integrand: |p, _| p[1] * p[2] },
    Functional { name: "eta7", info_power: 3.0, odd: false, integrand: |p, _| p[0].powi(6) },
    Functional { name: "eta8", info_power: 3.0, odd: false, integrand: |p, _| p[1].powi(3) },
    Functional { name: "eta9", info_power: 3.0, odd: false, integrand: |p, _| p[2] * p[2] },
    Functional { name: "eta10", info_power: 3.0, odd: false, integrand: |p, _| p[0] * p[1] * p[2] },
];

const A_FUNCTIONALS: [Functional; 6] = [
    Functional { name: "a1", info_power: 0.0, odd: true, integrand: |_, r| r[0] },
    Functional { name: "a2", info_power: 0.0, odd: false, integrand: |_, r| r[1] },
    Functional { name: "a3", info_power: 0.0, odd: true, integrand: |_, r| r[2] },
    Functional { name: "a4", info_power: 0.0, odd: false, integrand: |_, r| r[3] },
    Functional { name: "a5", info_power: 0.0, odd: true, integrand: |_, r| r[4] },
    Functional { name: "a6", info_power: 0.0, odd: false, integrand: |_, r| r[5] },
];

/// As [`compute_moment_set`], evaluating the functionals under `exec`.
/// The result does not depend on `exec`.
pub fn compute_moment_set_with(model: &DensityModel, tol: f64, exec: Execution) -> Result<MomentSet> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (fisher, fisher_err) = fisher_information_with_error(model, tol)?;
    if !(fisher > 0.0 && fisher.is_finite()) {
        return Err(Error::MomentDivergence {
            name: "fisher".into(),
            reason: format!("information {fisher} is not a positive finite number"),
        });
    }
    let symmetric = model.is_symmetric();
    let jobs: Vec<&Functional> = A_FUNCTIONALS.iter().chain(ETA_FUNCTIONALS.iter()).collect();
    let results = exec.map_indexed(jobs.len(), |k| {
        let fun = jobs[k];
        if symmetric && fun.odd {
            return Ok((0.0, 0.0));
        }
        // tolerance on the raw expectation so that the scaled η meets `tol`
        let raw_tol = tol * fisher.powf(fun.info_power).min(1.0);
        expectation(model, fun.name, raw_tol, &fun.integrand)
    });
    let mut a = [0.0; MAX_ORDER];
    let mut a_err = [0.0; MAX_ORDER];
    let mut eta = [0.0; 9];
    let mut eta_err = [0.0; 9];
    for (k, r) in results.into_iter().enumerate() {
        let (value, err) = r?;
        if k < MAX_ORDER {
            a[k] = value;
            a_err[k] = err;
        } else {
            let i = k - MAX_ORDER;
            let p = ETA_FUNCTIONALS[i].info_power;
            let scale = fisher.powf(p);
            eta[i] = value / scale;
            eta_err[i] = err / scale + eta[i].abs() * p * fisher_err / fisher;
        }
    }
    Ok(MomentSet {
        fisher,
        a,
        eta: Eta::from_array(eta),
        quadrature_error: MomentErrors {
            fisher: fisher_err,
            a: a_err,
            eta: Eta::from_array(eta_err),
        },
    })
}

/// E g(ψ(X), ρ'(X)) under the model, with value and error estimate.
fn expectation(
    model: &DensityModel,
    name: &str,
    tol: f64,
    g: &dyn Fn(&[f64; MAX_ORDER], &[f64; MAX_ORDER]) -> f64,
) -> Result<(f64, f64)> {
    let integrand = |x: f64| -> f64 {
        let f = model.pdf(x);
        if f == 0.0 {
            return 0.0;
        }
        match (model.psis(x), model.rho_derivs(x)) {
            (Ok(p), Ok(r)) => g(&p, &r) * f,
            _ => 0.0,
        }
    };
    integrate_over_support(model, &integrand, tol).map_err(|reason| Error::MomentDivergence {
        name: name.to_string(),
        reason,
    })
}

/// ∫ h over the model's support with the divergence heuristics applied:
/// quadrature refinement must converge, and for infinite tails the mass
/// beyond the last tail extension must not exceed 100·tol.
pub(crate) fn integrate_over_support(
    model: &DensityModel,
    h: &dyn Fn(f64) -> f64,
    tol: f64,
) -> std::result::Result<(f64, f64), String> {
    let s = model.support();
    let lscale = model.length_scale();
    let describe = |e: QuadError| e.to_string();
    let q = Quadrature::with_tolerance(tol / 3.0);
    let lo_core = if s.lower.is_finite() { s.lower } else { -CORE_HALF_WIDTH * lscale };
    let hi_core = if s.upper.is_finite() { s.upper } else { CORE_HALF_WIDTH * lscale };
    let (lo_core, hi_core) = if lo_core < hi_core {
        (lo_core, hi_core)
    } else {
        (s.lower.max(-CORE_HALF_WIDTH * lscale), s.upper)
    };
    let core = q.integrate(h, lo_core, hi_core).map_err(describe)?;
    let mut value = core.value;
    let mut err = core.abs_error;
    let far = CORE_HALF_WIDTH * lscale * 2f64.powi(TAIL_DOUBLINGS);
    if !s.lower.is_finite() {
        let tail = q.integrate(h, f64::NEG_INFINITY, lo_core).map_err(describe)?;
        value += tail.value;
        err += tail.abs_error;
        check_tail(&q, h, f64::NEG_INFINITY, lo_core - far, tol)?;
    }
    if !s.upper.is_finite() {
        let tail = q.integrate(h, hi_core, f64::INFINITY).map_err(describe)?;
        value += tail.value;
        err += tail.abs_error;
        check_tail(&q, h, hi_core + far, f64::INFINITY, tol)?;
    }
    Ok((value, err))
}

fn check_tail(q: &Quadrature, h: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> std::result::Result<(), String> {
    let far = q.integrate(h, a, b).map_err(|e| e.to_string())?;
    if far.value.abs() > 100.0 * tol {
        Err(format!(
            "tail beyond |x| = {:e} still contributes {:e} (> 100·tol)",
            if a.is_finite() { a.abs() } else { b.abs() },
            far.value.abs()
        ))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_fisher_is_one() {
        let i = fisher_information(&DensityModel::normal()).unwrap();
        assert!((i - 1.0).abs() < 1e-10);
    }

    #[test]
    fn logistic_fisher_is_one_third() {
        let i = fisher_information(&DensityModel::logistic()).unwrap();
        assert!((i - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn fisher_is_location_invariant() {
        let m = DensityModel::logistic();
        let a = fisher_information(&m).unwrap();
        let b = fisher_information(&m.shifted(3.7)).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn normal_moment_set() {
        let ms = compute_moment_set(&DensityModel::normal(), 1e-10).unwrap();
        let want = Eta::GAUSSIAN.to_array();
        for (got, want) in ms.eta.to_array().iter().zip(want) {
            assert!((got - want).abs() < 1e-9, "{:?}", ms.eta);
        }
        assert!((ms.a[1] - 1.0).abs() < 1e-10);
        for j in [1, 3, 4, 5, 6] {
            assert!(ms.a(j).abs() < 1e-10);
        }
        assert!(ms.invariant_violations(1e-9).is_empty());
    }

    #[test]
    fn logistic_moment_set() {
        let ms = compute_moment_set(&DensityModel::logistic(), 1e-10).unwrap();
        let want = [9.0 / 5.0, 0.0, 9.0 / 5.0, 0.0, 0.0, 27.0 / 7.0, 54.0 / 35.0, 207.0 / 35.0, 72.0 / 35.0];
        for (i, (got, want)) in ms.eta.to_array().iter().zip(want).enumerate() {
            assert!((got - want).abs() < 1e-9, "eta{} = {got} vs {want}", i + 2);
        }
        assert_eq!(ms.eta.eta3, 0.0);
        assert_eq!(ms.eta.eta5, 0.0);
        assert_eq!(ms.eta.eta6, 0.0);
        assert!(ms.invariant_violations(1e-9).is_empty());
    }

    #[test]
    fn student_t_moments_are_consistent() {
        let ms = compute_moment_set(&DensityModel::student_t(7.0).unwrap(), 1e-10).unwrap();
        // I = (ν+1)/(ν+3) for unit-scale t
        assert!((ms.fisher - 0.8).abs() < 1e-10);
        assert!(ms.invariant_violations(1e-9).is_empty(), "{:?}", ms.invariant_violations(1e-9));
        assert!((ms.a[1] - ms.fisher).abs() < 1e-9);
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let m = DensityModel::logistic();
        let a = compute_moment_set_with(&m, 1e-10, Execution::Sequential).unwrap();
        let b = compute_moment_set_with(&m, 1e-10, Execution::Parallel { workers: 4 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn halving_tolerance_stays_within_error_bars() {
        let m = DensityModel::student_t(8.0).unwrap();
        let a = compute_moment_set(&m, 1e-8).unwrap();
        let b = compute_moment_set(&m, 5e-9).unwrap();
        for (ra, rb) in a.rows().iter().zip(b.rows()) {
            assert!((ra.1 - rb.1).abs() <= ra.2 + rb.2 + 1e-15, "{} {ra:?} {rb:?}", ra.0);
        }
    }

    #[test]
    fn eta_indexing() {
        let e = Eta::GAUSSIAN;
        assert_eq!(e[7], 15.0);
        assert_eq!(e.get(10), Some(6.0));
        assert_eq!(e.get(1), None);
        assert_eq!(e.get(11), None);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(compute_moment_set(&DensityModel::normal(), 0.0).is_err());
    }
}

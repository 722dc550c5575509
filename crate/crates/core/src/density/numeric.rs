//! Finite-difference derivatives for families without analytic derivatives.
//!
//! Central differences of order `j` are extrapolated with Ridders' scheme:
//! the step shrinks geometrically from an initial `h_j` and a Neville
//! tableau cancels the even powers of `h` in the truncation error. The
//! initial step follows the usual bias/round-off balance for a `j`-th
//! central difference,
//!
//! ```text
//! h_j = scale * min(STEP_FACTOR * eps^(1 / (j + 2)), MAX_STEP)
//! ```
//!
//! where `scale` is a length scale on which `f` varies. The cap keeps the
//! widest stencil of high orders inside one length scale. Accuracy degrades
//! with `j`: first derivatives typically reach 1e-11 relative, fifth
//! derivatives 1e-7, sixth derivatives 1e-5.

const STEP_FACTOR: f64 = 30.0;
const MAX_STEP: f64 = 0.1;
const SHRINK: f64 = 1.4;
const TABLE: usize = 10;
const SAFE: f64 = 2.0;

/// Estimated relative error above which the estimate is flagged.
pub const PRECISION_WARNING_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericDerivative {
    pub value: f64,
    pub est_error: f64,
    /// Set when `est_error / |value|` exceeds [`PRECISION_WARNING_THRESHOLD`].
    pub precision_warning: bool,
}

/// Initial step for a `j`-th derivative on length scale `scale`.
pub fn initial_step(j: usize, scale: f64) -> f64 {
    scale * (STEP_FACTOR * f64::EPSILON.powf(1.0 / (j as f64 + 2.0))).min(MAX_STEP)
}

/// Estimates `f^(j)(x)`, `j` in `0..=6`.
pub fn numeric_derivative<F>(f: F, j: usize, x: f64, scale: f64) -> NumericDerivative
where
    F: Fn(f64) -> f64,
{
    assert!(j <= 6, "numeric derivatives are limited to order 6");
    assert!(scale > 0.0, "length scale must be positive");
    if j == 0 {
        return NumericDerivative {
            value: f(x),
            est_error: 0.0,
            precision_warning: false,
        };
    }

    let mut tab = [[0.0f64; TABLE]; TABLE];
    let mut h = initial_step(j, scale);
    tab[0][0] = central_difference(&f, j, x, h);
    let mut best = tab[0][0];
    let mut err = f64::INFINITY;
    for i in 1..TABLE {
        h /= SHRINK;
        tab[0][i] = central_difference(&f, j, x, h);
        let mut fac = SHRINK * SHRINK;
        for k in 1..=i {
            tab[k][i] = (tab[k - 1][i] * fac - tab[k - 1][i - 1]) / (fac - 1.0);
            fac *= SHRINK * SHRINK;
            let e = (tab[k][i] - tab[k - 1][i])
                .abs()
                .max((tab[k][i] - tab[k - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = tab[k][i];
            }
        }
        if (tab[i][i] - tab[i - 1][i - 1]).abs() >= SAFE * err {
            break;
        }
    }
    NumericDerivative {
        value: best,
        est_error: err,
        precision_warning: err > PRECISION_WARNING_THRESHOLD * best.abs(),
    }
}

/// `h^-j Σ_k (-1)^k C(j, k) f(x + (j/2 - k) h)`; error is a series in h².
fn central_difference<F>(f: &F, j: usize, x: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..=j {
        let offset = (j as f64 / 2.0 - k as f64) * h;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * f(x + offset);
        binom = binom * (j - k) as f64 / (k + 1) as f64;
    }
    sum / h.powi(j as i32)
}

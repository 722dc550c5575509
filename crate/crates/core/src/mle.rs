//! Location MLE: the minimizer of the contrast L_n(θ) = n⁻¹ Σ ρ(X_i − θ).
//!
//! The solver scans a robust bracket around the sample median on a coarse
//! grid, refines every local minimum of the scan with a bracketed Newton
//! iteration on the score, and returns the refined point with the smallest
//! contrast.

use serde::Serialize;

use crate::density::DensityModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleOptions {
    /// Stop once |L_n'(θ)| ≤ tol.
    pub tol: f64,
    pub max_iterations: usize,
    pub grid_points: usize,
    /// Half-width of the initial bracket in robust scale units.
    pub bracket_scale: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 200,
            grid_points: 41,
            bracket_scale: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleResult {
    pub theta_hat: f64,
    pub gradient_at_solution: f64,
    pub contrast: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    /// More than one separated local minimum was found in the scan.
    pub multimodal_flag: bool,
}

struct Objective<'a> {
    sample: &'a [f64],
    model: &'a DensityModel,
}

impl Objective<'_> {
    fn contrast(&self, theta: f64) -> f64 {
        let family = self.model.family();
        let support = self.model.support();
        let mut s = 0.0;
        for &x in self.sample {
            let u = x - theta;
            if !support.contains_interior(u) {
                return f64::INFINITY;
            }
            s -= family.ln_pdf(u);
        }
        let v = s / self.sample.len() as f64;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// (L_n'(θ), L_n''(θ)) from ρ' = −ψ₁ and ρ'' = ψ₁² − ψ₂.
    fn score(&self, theta: f64) -> (f64, f64) {
        let family = self.model.family();
        let mut g = 0.0;
        let mut h = 0.0;
        for &x in self.sample {
            let psi = family.derivative_ratios(x - theta);
            g += psi[0];
            h += psi[0] * psi[0] - psi[1];
        }
        let n = self.sample.len() as f64;
        (g / n, h / n)
    }
}

/// L_n(θ); +∞ if some X_i − θ leaves the support.
pub fn contrast(sample: &[f64], model: &DensityModel, theta: f64) -> f64 {
    Objective { sample, model }.contrast(theta)
}

pub fn solve_mle(sample: &[f64], model: &DensityModel, tol: f64) -> Result<MleResult> {
    solve_mle_with(sample, model, &MleOptions { tol, ..MleOptions::default() })
}

pub fn solve_mle_with(sample: &[f64], model: &DensityModel, opts: &MleOptions) -> Result<MleResult> {
    if sample.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("sample contains non-finite values"));
    }
    if !(opts.tol > 0.0) || opts.grid_points < 3 {
        return Err(Error::invalid("tolerance must be positive and the scan needs at least 3 points"));
    }
    let obj = Objective { sample, model };
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let centre = quantile_sorted(&sorted, 0.5);
    let half = opts.bracket_scale * robust_scale(&sorted, model.length_scale());

    let (mut lo, mut hi) = (centre - half, centre + half);
    let mut grid;
    let mut values;
    let mut extensions = 0;
    loop {
        grid = linspace(lo, hi, opts.grid_points);
        values = grid.iter().map(|&t| obj.contrast(t)).collect::<Vec<_>>();
        let best = argmin(&values);
        let at_edge = best == 0 || best == values.len() - 1;
        if !at_edge || extensions >= 20 || !values[best].is_finite() {
            break;
        }
        let w = hi - lo;
        if best == 0 {
            lo -= w;
        } else {
            hi += w;
        }
        extensions += 1;
    }
    if values.iter().all(|v| !v.is_finite()) {
        return Err(Error::invalid("contrast is infinite on the whole search bracket"));
    }

    let minima = local_minima(&values);
    let step = grid[1] - grid[0];
    let mut best: Option<MleResult> = None;
    let mut refined = Vec::new();
    for &i in &minima {
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        let r = refine(&obj, grid[i], a, b, opts)?;
        refined.push(r.theta_hat);
        if best.is_none_or(|cur| r.contrast < cur.contrast) {
            best = Some(r);
        }
    }
    let mut best = best.ok_or_else(|| Error::invalid("no local minimum found"))?;
    refined.sort_by(f64::total_cmp);
    best.multimodal_flag = refined.windows(2).any(|w| w[1] - w[0] > step);
    best.bracket = (lo, hi);
    Ok(best)
}

/// Newton on L_n' inside [a, b], falling back to bisection whenever the step
/// leaves the bracket or the curvature is not positive.
fn refine(obj: &Objective<'_>, start: f64, a: f64, b: f64, opts: &MleOptions) -> Result<MleResult> {
    let (mut lo, mut hi) = (a, b);
    let (g_lo, _) = obj.score(lo);
    let (g_hi, _) = obj.score(hi);
    let signed = g_lo < 0.0 && g_hi > 0.0;
    let mut theta = start;
    let mut last_g = f64::NAN;
    for it in 0..opts.max_iterations {
        let (g, h) = obj.score(theta);
        last_g = g;
        if g.abs() <= opts.tol {
            return Ok(finish(obj, theta, g, it, (a, b)));
        }
        if !g.is_finite() {
            break;
        }
        if signed {
            if g < 0.0 {
                lo = theta;
            } else {
                hi = theta;
            }
        }
        let newton = theta - g / h;
        let next = if h > 0.0 && newton > lo && newton < hi {
            newton
        } else if signed {
            0.5 * (lo + hi)
        } else {
            // score signs do not bracket a root: take a damped descent step
            let s = (hi - lo) * 0.25;
            (theta - s * g.signum()).clamp(lo, hi)
        };
        if (next - theta).abs() <= 4.0 * f64::EPSILON * theta.abs().max(1.0) {
            // no representable progress: θ is the floating-point minimizer
            return Ok(finish(obj, next, obj.score(next).0, it + 1, (a, b)));
        }
        theta = next;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        score: last_g.abs(),
    })
}

fn finish(obj: &Objective<'_>, theta: f64, g: f64, iterations: usize, bracket: (f64, f64)) -> MleResult {
    MleResult {
        theta_hat: theta,
        gradient_at_solution: g,
        contrast: obj.contrast(theta),
        iterations,
        bracket,
        multimodal_flag: false,
    }
}

fn robust_scale(sorted: &[f64], fallback: f64) -> f64 {
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    if iqr > 0.0 {
        return iqr / 1.349;
    }
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        sd
    } else {
        fallback
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

fn local_minima(v: &[f64]) -> Vec<usize> {
    let last = v.len() - 1;
    let out: Vec<usize> = (0..=last)
        .filter(|&i| {
            let left = i == 0 || v[i] <= v[i - 1];
            let right = i == last || v[i] <= v[i + 1];
            // plateaus count once, at their left end
            let fresh = i == 0 || v[i] < v[i - 1];
            v[i].is_finite() && left && right && fresh
        })
        .collect();
    if out.is_empty() {
        vec![argmin(v)]
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normal_mle_is_sample_mean() {
        let x = [0.3, -1.2, 2.5, 0.9, -0.4, 1.7, 0.05];
        let r = solve_mle(&x, &DensityModel::normal(), 1e-13).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        assert!((r.theta_hat - mean).abs() < 1e-12);
        assert!(r.gradient_at_solution.abs() <= 1e-13);
        assert!(!r.multimodal_flag);
    }

    #[test]
    fn identical_values() {
        for m in [DensityModel::normal(), DensityModel::logistic(), DensityModel::student_t(3.0).unwrap()] {
            let r = solve_mle(&[2.5; 9], &m, 1e-12).unwrap();
            assert!((r.theta_hat - 2.5).abs() < 1e-12, "{}", m.name());
        }
    }

    #[test]
    fn logistic_solution_is_grid_minimum() {
        let x = [0.1, 3.2, -0.7, 1.9, 0.4, -2.2, 5.1, 0.8];
        let m = DensityModel::logistic();
        let r = solve_mle(&x, &m, 1e-12).unwrap();
        assert!(r.gradient_at_solution.abs() <= 1e-12);
        let obj = Objective { sample: &x, model: &m };
        let fine_best = (0..=20000)
            .map(|i| -5.0 + i as f64 * 5e-4)
            .min_by(|a, b| obj.contrast(*a).total_cmp(&obj.contrast(*b)))
            .unwrap();
        assert!((fine_best - r.theta_hat).abs() < 1e-3);
        assert!(r.contrast <= obj.contrast(fine_best) + 1e-15);
    }

    #[test]
    fn student_t_bimodal_sample_is_flagged() {
        let x = [-10.0, -10.1, -9.9, 10.0, 10.1, 9.9];
        let r = solve_mle(&x, &DensityModel::student_t(1.0).unwrap(), 1e-10).unwrap();
        assert!(r.multimodal_flag);
        assert!(r.theta_hat.abs() > 5.0);
    }

    #[test]
    fn rejects_bad_input() {
        let m = DensityModel::normal();
        assert!(solve_mle(&[], &m, 1e-10).is_err());
        assert!(solve_mle(&[1.0, f64::NAN], &m, 1e-10).is_err());
        assert!(solve_mle(&[1.0], &m, 0.0).is_err());
    }

    #[test]
    fn far_from_origin() {
        let x: Vec<f64> = [0.3, -0.2, 0.5, 0.1].iter().map(|v| v + 1e4).collect();
        let r = solve_mle(&x, &DensityModel::logistic(), 1e-10).unwrap();
        assert!((r.theta_hat - 1e4).abs() < 1.0);
        assert!(r.gradient_at_solution.abs() <= 1e-10);
    }

    proptest! {
        #[test]
        fn location_equivariance(
            xs in proptest::collection::vec(-5.0f64..5.0, 3..30),
            c in -50.0f64..50.0,
        ) {
            let m = DensityModel::logistic();
            let r0 = solve_mle(&xs, &m, 1e-12).unwrap();
            let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
            let r1 = solve_mle(&shifted, &m, 1e-12).unwrap();
            prop_assert!((r1.theta_hat - r0.theta_hat - c).abs() < 1e-8);
        }
    }
}

//! Consistency check between the Edgeworth and Cornish-Fisher tables.
//!
//! If both expansions are correct through order k, then
//! G^{(k)}(Q^{(k)}(v)) − v = O(n^{-k/2}) uniformly on compact v-sets. A
//! transcription error in block k shows up as a residual decaying more
//! slowly than that.

use serde::Serialize;

use super::{CornishFisher, Edgeworth, ExpansionOrder};
use crate::error::{Error, Result};
use crate::moments::MomentSet;
use crate::special::norm_quantile;

/// Residuals at or below this level are treated as round-off.
pub const RESIDUAL_FLOOR: f64 = 1e-13;
/// Allowed excess of the fitted slope over −k/2.
pub const SLOPE_SLACK: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderResidual {
    pub order: u8,
    /// max_v |G^{(k)}(Q^{(k)}(v)) − v| for each n of the grid.
    pub residual: Vec<f64>,
    /// max_v |G^{(k)}(Φ⁻¹(v)) − v|, the error of the uncorrected quantile.
    pub baseline: Vec<f64>,
    /// Least-squares slope of log residual against log n over the three
    /// largest sizes, when at least two of them exceed the round-off floor.
    pub slope: Option<f64>,
    pub expected_slope: f64,
    pub shortfall: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionReport {
    pub n_grid: Vec<usize>,
    pub v_points: usize,
    pub orders: Vec<OrderResidual>,
    /// Lowest order whose residual decays too slowly.
    pub suspected_block: Option<u8>,
}

impl CompositionReport {
    pub fn order(&self, k: u8) -> Option<&OrderResidual> {
        self.orders.iter().find(|o| o.order == k)
    }
}

/// Runs the check for orders 1..=`order` over n, 2n, 4n, 8n, 16n. Lower-order
/// contamination of the fitted slopes fades with n; n of a few thousand
/// separates n^{-2} from n^{-5/2} cleanly.
pub fn compose_check(moments: &MomentSet, n: usize, order: ExpansionOrder, v_grid: &[f64]) -> Result<CompositionReport> {
    let grid: Vec<usize> = (0..5).map(|i| n << i).collect();
    compose_check_grid(moments, &grid, order, v_grid)
}

pub fn compose_check_grid(
    moments: &MomentSet,
    n_grid: &[usize],
    order: ExpansionOrder,
    v_grid: &[f64],
) -> Result<CompositionReport> {
    if n_grid.is_empty() || v_grid.is_empty() {
        return Err(Error::invalid("composition check needs non-empty n and v grids"));
    }
    if let Some(v) = v_grid.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
        return Err(Error::invalid(format!("probability must lie in (0, 1), got {v}")));
    }
    let g = Edgeworth::new(moments);
    let q = CornishFisher::new(moments);
    let k_max = order.get() as usize;
    let mut residual = vec![vec![0.0f64; n_grid.len()]; k_max];
    let mut baseline = vec![vec![0.0f64; n_grid.len()]; k_max];
    for (j, &n) in n_grid.iter().enumerate() {
        for &v in v_grid {
            let quant = q.all_orders(n, v)?;
            let z = norm_quantile(v);
            let at_z = g.all_orders(n, z)?;
            for k in 0..k_max {
                let composed = g.all_orders(n, quant[k])?[k].value;
                residual[k][j] = residual[k][j].max((composed - v).abs());
                baseline[k][j] = baseline[k][j].max((at_z[k].value - v).abs());
            }
        }
    }
    let orders: Vec<OrderResidual> = (0..k_max)
        .map(|k| {
            let expected_slope = -((k + 1) as f64) / 2.0;
            let slope = fitted_slope(n_grid, &residual[k]);
            let shortfall = slope.is_some_and(|s| s > expected_slope + SLOPE_SLACK);
            OrderResidual {
                order: k as u8 + 1,
                residual: residual[k].clone(),
                baseline: baseline[k].clone(),
                slope,
                expected_slope,
                shortfall,
            }
        })
        .collect();
    let suspected_block = orders.iter().find(|o| o.shortfall).map(|o| o.order);
    Ok(CompositionReport {
        n_grid: n_grid.to_vec(),
        v_points: v_grid.len(),
        orders,
        suspected_block,
    })
}

fn fitted_slope(n_grid: &[usize], residual: &[f64]) -> Option<f64> {
    let skip = n_grid.len().saturating_sub(3);
    let pts: Vec<(f64, f64)> = n_grid
        .iter()
        .zip(residual)
        .skip(skip)
        .filter(|(_, r)| **r > RESIDUAL_FLOOR)
        .map(|(n, r)| ((*n as f64).ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    Some(crate::montecarlo::stats::ols_slope(&pts))
}

/// Equally spaced probabilities in [lo, hi].
pub fn probability_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.5 * (lo + hi)];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Eta;

    fn grid() -> Vec<f64> {
        probability_grid(0.05, 0.95, 37)
    }

    #[test]
    fn gaussian_residuals_vanish() {
        let r = compose_check(&MomentSet::from_eta(1.0, Eta::GAUSSIAN), 10, ExpansionOrder::MAX, &grid()).unwrap();
        for o in &r.orders {
            assert!(o.residual.iter().all(|v| *v < 1e-14));
        }
        assert_eq!(r.suspected_block, None);
    }

    #[test]
    fn symmetric_eta_decays_at_theoretical_rate() {
        let eta = Eta::from_array([1.8, 0.0, 1.8, 0.0, 0.0, 27.0 / 7.0, 54.0 / 35.0, 207.0 / 35.0, 72.0 / 35.0]);
        let r = compose_check_grid(&MomentSet::from_eta(1.0 / 3.0, eta), &[100, 200, 400, 800, 1600], ExpansionOrder::MAX, &grid())
            .unwrap();
        assert_eq!(r.suspected_block, None, "{r:#?}");
        let o3 = r.order(3).unwrap();
        assert!(o3.residual[0] / o3.residual[2] >= 4.0);
    }

    #[test]
    fn asymmetric_eta_exposes_order_five_block() {
        // η₃ ≠ 0 and η₄ ≠ η₃ make the z⁹ n⁻² leftover nonzero
        let eta = Eta::from_array([1.6, 0.9, 2.4, 0.7, 0.8, 9.0, 4.0, 3.5, 2.5]);
        let r = compose_check_grid(&MomentSet::from_eta(1.0, eta), &[3200, 6400, 12800, 25600, 51200], ExpansionOrder::MAX, &grid())
            .unwrap();
        assert_eq!(r.suspected_block, Some(5), "{r:#?}");
        for k in 2..=4 {
            assert!(!r.order(k).unwrap().shortfall);
        }
    }

    #[test]
    fn rejects_bad_probabilities() {
        let m = MomentSet::from_eta(1.0, Eta::GAUSSIAN);
        assert!(compose_check(&m, 10, ExpansionOrder::MAX, &[0.5, 1.0]).is_err());
        assert!(compose_check(&m, 10, ExpansionOrder::MAX, &[]).is_err());
    }
}

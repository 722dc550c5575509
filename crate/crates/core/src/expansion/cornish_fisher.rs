//! Cornish-Fisher quantiles of √(nI)(θ̂ − θ₀).

use super::{root_inverse, CoefficientTable, ExpansionOrder};
use crate::error::{Error, Result};
use crate::moments::MomentSet;
use crate::special::norm_quantile;

#[derive(Debug, Clone)]
pub struct CornishFisher {
    table: CoefficientTable,
}

impl CornishFisher {
    pub fn new(moments: &MomentSet) -> Self {
        Self {
            table: CoefficientTable::cornish_fisher(&moments.eta),
        }
    }

    pub fn coefficients(&self) -> &CoefficientTable {
        &self.table
    }

    /// Quantiles at orders 1..=5.
    pub fn all_orders(&self, n: usize, v: f64) -> Result<[f64; 5]> {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::invalid(format!("probability must lie in (0, 1), got {v}")));
        }
        let h = root_inverse(n)?;
        let z = norm_quantile(v);
        let mut out = [z; 5];
        let mut acc = z;
        let mut scale = 1.0;
        for o in 2..=5u8 {
            scale *= h;
            acc += scale * self.table.polynomial(o, z);
            out[o as usize - 1] = acc;
        }
        Ok(out)
    }

    pub fn quantile(&self, n: usize, order: ExpansionOrder, v: f64) -> Result<f64> {
        Ok(self.all_orders(n, v)?[order.index()])
    }
}

pub fn cornish_fisher_quantile(moments: &MomentSet, n: usize, order: ExpansionOrder, v: f64) -> Result<f64> {
    CornishFisher::new(moments).quantile(n, order, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Eta;

    #[test]
    fn gaussian_collapses_to_probit() {
        let q = CornishFisher::new(&MomentSet::from_eta(1.0, Eta::GAUSSIAN));
        for i in 1..100 {
            let v = i as f64 / 100.0;
            for z in q.all_orders(10, v).unwrap() {
                assert!((z - norm_quantile(v)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_probabilities_outside_unit_interval() {
        let m = MomentSet::from_eta(1.0, Eta::GAUSSIAN);
        for v in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(cornish_fisher_quantile(&m, 10, ExpansionOrder::MAX, v).is_err());
        }
    }

    #[test]
    fn order_two_shift_sign() {
        // positive η₃ moves every quantile to the right at order 2
        let m = MomentSet::from_eta(1.0, Eta::from_array([2.0, 0.6, 3.0, 0.0, 0.0, 15.0, 8.0, 6.0, 6.0]));
        let q = CornishFisher::new(&m);
        let z = q.all_orders(16, 0.3).unwrap();
        assert!(z[1] > z[0]);
        assert!((z[1] - z[0] - 0.25 * 0.6 * (z[0] * z[0] + 2.0) / 12.0).abs() < 1e-14);
    }
}

//! Edgeworth approximation to the CDF of √(nI)(θ̂ − θ₀).

use serde::Serialize;

use super::{root_inverse, CoefficientTable, ExpansionOrder};
use crate::error::Result;
use crate::moments::MomentSet;
use crate::special::{norm_cdf, norm_pdf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeworthValue {
    /// The raw truncated series; may leave [0, 1] for small n or large |x|.
    pub value: f64,
    pub out_of_range: bool,
}

impl EdgeworthValue {
    fn new(value: f64) -> Self {
        Self {
            value,
            out_of_range: !(0.0..=1.0).contains(&value),
        }
    }

    pub fn clamped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}

/// Evaluator holding the coefficient table for one moment set.
#[derive(Debug, Clone)]
pub struct Edgeworth {
    table: CoefficientTable,
}

impl Edgeworth {
    pub fn new(moments: &MomentSet) -> Self {
        Self {
            table: CoefficientTable::edgeworth(&moments.eta),
        }
    }

    pub fn coefficients(&self) -> &CoefficientTable {
        &self.table
    }

    /// G_n^{(k)}(x) for k = 1..=5.
    pub fn all_orders(&self, n: usize, x: f64) -> Result<[EdgeworthValue; 5]> {
        let h = root_inverse(n)?;
        let base = norm_cdf(x);
        let dens = norm_pdf(x);
        let mut out = [EdgeworthValue::new(base); 5];
        let mut acc = 0.0;
        let mut scale = 1.0;
        for o in 2..=5u8 {
            scale *= h;
            acc += scale * self.table.polynomial(o, x);
            out[o as usize - 1] = EdgeworthValue::new(base + dens * acc);
        }
        Ok(out)
    }

    pub fn cdf(&self, n: usize, order: ExpansionOrder, x: f64) -> Result<EdgeworthValue> {
        Ok(self.all_orders(n, x)?[order.index()])
    }

    /// d/dx of the order-k approximation.
    pub fn density(&self, n: usize, order: ExpansionOrder, x: f64) -> Result<f64> {
        let h = root_inverse(n)?;
        let mut acc = 1.0;
        let mut scale = 1.0;
        for o in 2..=order.get() {
            scale *= h;
            let p = self.table.polynomial(o, x);
            let dp = derivative(&self.table, o, x);
            acc += scale * (dp - x * p);
        }
        Ok(norm_pdf(x) * acc)
    }
}

fn derivative(table: &CoefficientTable, order: u8, x: f64) -> f64 {
    (1..=super::coefficients::MAX_POWER)
        .rev()
        .fold(0.0, |acc, p| acc * x + p as f64 * table.coefficient(order, p))
}

/// One-shot evaluation; builds the coefficient table on each call.
pub fn edgeworth_cdf(moments: &MomentSet, n: usize, order: ExpansionOrder, x: f64) -> Result<EdgeworthValue> {
    Edgeworth::new(moments).cdf(n, order, x)
}

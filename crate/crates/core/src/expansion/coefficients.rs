//! Correction-polynomial coefficients as exact rational η-monomials.
//!
//! The Edgeworth expansion of the standardized MLE reads
//!
//! ```text
//! G_n(x) = Φ(x) + φ(x) Σ_{o=2..5} n^{-(o-1)/2} P_o(x)
//! ```
//!
//! and the Cornish-Fisher expansion of its quantiles, with z = Φ⁻¹(v),
//!
//! ```text
//! G_n^{-1}(v) = z + Σ_{o=2..5} n^{-(o-1)/2} Q_o(z).
//! ```
//!
//! Each coefficient of x^p in P_o (or z^p in Q_o) is a sum of terms
//! `num/den · Π η_i`. A term's `factors` lists η indices with multiplicity,
//! so `&[3, 4, 4]` is η₃η₄².

use serde::Serialize;

use crate::moments::Eta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Term {
    pub order: u8,
    pub power: u8,
    pub num: i64,
    pub den: i64,
    pub factors: &'static [u8],
}

const fn t(order: u8, power: u8, num: i64, den: i64, factors: &'static [u8]) -> Term {
    Term {
        order,
        power,
        num,
        den,
        factors,
    }
}

impl Term {
    pub fn ratio(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn evaluate(&self, eta: &Eta) -> f64 {
        self.factors.iter().fold(self.ratio(), |acc, &i| acc * eta[i as usize])
    }
}

/// Highest polynomial power appearing in either table.
pub const MAX_POWER: usize = 11;

/// Terms of P_2 … P_5.
pub static EDGEWORTH_TERMS: &[Term] = &[
    // n^{-1/2}: −η₃(x² + 2)/12
    t(2, 2, -1, 12, &[3]),
    t(2, 0, -1, 6, &[3]),
    // n^{-1}
    t(3, 5, -1, 288, &[3, 3]),
    t(3, 3, 1, 8, &[]),
    t(3, 3, -1, 6, &[2]),
    t(3, 3, 5, 72, &[4]),
    t(3, 3, 1, 72, &[3, 3]),
    t(3, 1, -1, 24, &[4]),
    // source writes this factor as "η3^2"; read as η₃²
    t(3, 1, 1, 24, &[3, 3]),
    t(3, 1, 1, 8, &[]),
    // n^{-3/2}
    t(4, 8, -1, 10368, &[3, 3, 3]),
    t(4, 6, 1, 96, &[3]),
    t(4, 6, -1, 72, &[2, 3]),
    t(4, 6, 19, 10368, &[3, 3, 3]),
    t(4, 6, 5, 864, &[3, 4]),
    t(4, 4, -1, 72, &[3, 4]),
    t(4, 4, -1, 30, &[5]),
    t(4, 4, 19, 1728, &[3, 3, 3]),
    t(4, 4, 1, 8, &[6]),
    t(4, 2, 35, 864, &[3, 3, 3]),
    t(4, 2, 1, 32, &[3]),
    t(4, 2, 1, 80, &[5]),
    t(4, 2, -5, 96, &[3, 4]),
    t(4, 0, -5, 48, &[3, 4]),
    t(4, 0, 35, 432, &[3, 3, 3]),
    t(4, 0, 1, 16, &[3]),
    t(4, 0, 1, 40, &[5]),
    // n^{-2}
    t(5, 11, -1, 497664, &[3, 3, 3, 3]),
    t(5, 9, 43, 497664, &[3, 3, 3, 3]),
    t(5, 9, -1, 1728, &[2, 3, 3]),
    t(5, 9, 1, 2304, &[3, 3]),
    // Transcribed as given (η₃η₄²). The composition residual shows the
    // z⁹ n⁻² term only cancels with η₃²η₄ here; left as is and reported by
    // the composition diagnostic. Vanishes whenever η₃ = 0.
    t(5, 9, 5, 20736, &[3, 4, 4]),
    t(5, 7, -5, 1152, &[3, 3]),
    t(5, 7, 1, 3456, &[3, 3, 3, 3]),
    t(5, 7, 1, 192, &[2, 3, 3]),
    t(5, 7, 1, 96, &[3, 6]),
    t(5, 7, -1, 360, &[3, 5]),
    t(5, 7, -11, 3456, &[3, 3, 4]),
    t(5, 7, -1, 72, &[2, 2]),
    t(5, 7, 1, 48, &[2]),
    t(5, 7, 5, 432, &[2, 4]),
    t(5, 7, -1, 128, &[]),
    t(5, 7, -5, 576, &[4]),
    t(5, 7, -25, 10368, &[4, 4]),
    t(5, 5, -13, 24, &[2]),
    t(5, 5, 205, 576, &[4]),
    t(5, 5, 1, 120, &[9]),
    t(5, 5, -1, 240, &[8]),
    t(5, 5, 61, 120, &[10]),
    t(5, 5, -731, 3600, &[7]),
    t(5, 5, 23, 3456, &[4, 4]),
    t(5, 5, -1, 72, &[2, 4]),
    t(5, 5, 287, 2304, &[3, 3]),
    t(5, 5, -5, 6912, &[3, 3, 3, 3]),
    t(5, 5, 7, 384, &[]),
    t(5, 5, -7, 768, &[3, 3, 4]),
    t(5, 5, -1, 12, &[3, 6]),
    t(5, 5, 23, 960, &[3, 5]),
    t(5, 5, 1, 48, &[2, 3, 3]),
    t(5, 3, 23, 48, &[2]),
    t(5, 3, -181, 576, &[4]),
    t(5, 3, 1, 24, &[8]),
    t(5, 3, -5, 12, &[10]),
    t(5, 3, 53, 360, &[7]),
    t(5, 3, 7, 1152, &[4, 4]),
    t(5, 3, -1, 48, &[2, 4]),
    t(5, 3, -77, 576, &[3, 3]),
    t(5, 3, -35, 3456, &[3, 3, 3, 3]),
    t(5, 3, 5, 1728, &[3, 3, 4]),
    t(5, 3, -1, 6, &[3, 6]),
    t(5, 3, 1, 24, &[3, 5]),
    t(5, 3, 5, 144, &[2, 3, 3]),
    t(5, 3, 5, 384, &[]),
    t(5, 1, 1, 64, &[4]),
    t(5, 1, 1, 240, &[7]),
    t(5, 1, -5, 384, &[4, 4]),
    t(5, 1, -1, 64, &[3, 3]),
    t(5, 1, -35, 1152, &[3, 3, 3, 3]),
    t(5, 1, 1, 128, &[]),
    t(5, 1, 35, 576, &[3, 3, 4]),
    t(5, 1, -1, 48, &[3, 5]),
];

/// Terms of Q_2 … Q_5.
pub static CORNISH_FISHER_TERMS: &[Term] = &[
    // n^{-1/2}: η₃(z² + 2)/12. The grouping η₃z²/12 + 2 does not invert the
    // first Edgeworth correction; the +2 belongs inside the η₃ factor.
    t(2, 2, 1, 12, &[3]),
    t(2, 0, 1, 6, &[3]),
    // n^{-1}
    t(3, 3, -1, 72, &[3, 3]),
    t(3, 3, -5, 72, &[4]),
    t(3, 3, 1, 6, &[2]),
    t(3, 3, -1, 8, &[]),
    t(3, 1, -1, 36, &[3, 3]),
    t(3, 1, 1, 24, &[4]),
    t(3, 1, -1, 8, &[]),
    // n^{-3/2}
    t(4, 4, -1, 144, &[3, 4]),
    t(4, 4, 1, 24, &[2, 3]),
    t(4, 4, -1, 48, &[3]),
    t(4, 4, -19, 1728, &[3, 3, 3]),
    t(4, 4, -1, 8, &[6]),
    t(4, 4, 1, 30, &[5]),
    t(4, 2, 1, 48, &[3, 4]),
    t(4, 2, 1, 12, &[2, 3]),
    t(4, 2, -5, 48, &[3]),
    t(4, 2, -67, 1296, &[3, 3, 3]),
    t(4, 2, -1, 80, &[5]),
    t(4, 0, -113, 1296, &[3, 3, 3]),
    t(4, 0, -1, 40, &[5]),
    t(4, 0, 1, 9, &[3, 4]),
    t(4, 0, -1, 12, &[3]),
    // n^{-2}
    t(5, 5, 7, 16, &[2]),
    t(5, 5, -59, 192, &[4]),
    t(5, 5, -23, 192, &[3, 3]),
    t(5, 5, -61, 120, &[10]),
    t(5, 5, -1, 16, &[2, 4]),
    t(5, 5, 731, 3600, &[7]),
    t(5, 5, 1, 240, &[8]),
    t(5, 5, -1, 120, &[9]),
    t(5, 5, 19, 1728, &[3, 3, 4]),
    t(5, 5, -7, 288, &[2, 3, 3]),
    t(5, 5, -17, 1440, &[3, 5]),
    t(5, 5, 1, 24, &[3, 6]),
    t(5, 5, 1, 12, &[2, 2]),
    t(5, 5, 37, 3456, &[4, 4]),
    t(5, 5, 1, 1728, &[3, 3, 3, 3]),
    t(5, 5, 5, 384, &[]),
    t(5, 3, 1, 24, &[]),
    t(5, 3, -9, 16, &[2]),
    t(5, 3, 1, 3, &[4]),
    t(5, 3, 85, 576, &[3, 3]),
    t(5, 3, 5, 12, &[10]),
    t(5, 3, 7, 144, &[2, 4]),
    t(5, 3, -53, 360, &[7]),
    t(5, 3, -1, 24, &[8]),
    t(5, 3, 11, 1728, &[3, 3, 4]),
    t(5, 3, -1, 24, &[2, 3, 3]),
    t(5, 3, -7, 360, &[3, 5]),
    t(5, 3, 1, 12, &[3, 6]),
    t(5, 3, -1, 54, &[4, 4]),
    t(5, 3, 19, 3888, &[3, 3, 3, 3]),
    t(5, 1, 1, 128, &[]),
    t(5, 1, -5, 192, &[4]),
    t(5, 1, 1, 288, &[3, 3]),
    t(5, 1, -1, 240, &[7]),
    t(5, 1, -5, 96, &[3, 3, 4]),
    t(5, 1, 1, 72, &[2, 3, 3]),
    t(5, 1, 1, 60, &[3, 5]),
    t(5, 1, 17, 1152, &[4, 4]),
    t(5, 1, 65, 3888, &[3, 3, 3, 3]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    Edgeworth,
    CornishFisher,
}

impl TableKind {
    pub fn terms(self) -> &'static [Term] {
        match self {
            TableKind::Edgeworth => EDGEWORTH_TERMS,
            TableKind::CornishFisher => CORNISH_FISHER_TERMS,
        }
    }
}

/// Numeric coefficients c(o, p) for orders 2..=5 and powers 0..=11,
/// together with the recipe they were assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    kind: TableKind,
    values: [[f64; MAX_POWER + 1]; 4],
}

pub type EdgeworthCoefficients = CoefficientTable;

impl CoefficientTable {
    pub fn new(kind: TableKind, eta: &Eta) -> Self {
        let mut values = [[0.0; MAX_POWER + 1]; 4];
        for term in kind.terms() {
            values[term.order as usize - 2][term.power as usize] += term.evaluate(eta);
        }
        Self { kind, values }
    }

    pub fn edgeworth(eta: &Eta) -> Self {
        Self::new(TableKind::Edgeworth, eta)
    }

    pub fn cornish_fisher(eta: &Eta) -> Self {
        Self::new(TableKind::CornishFisher, eta)
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn recipe(&self) -> &'static [Term] {
        self.kind.terms()
    }

    /// c(o, p); zero outside the table.
    pub fn coefficient(&self, order: u8, power: usize) -> f64 {
        if !(2..=5).contains(&order) || power > MAX_POWER {
            return 0.0;
        }
        self.values[order as usize - 2][power]
    }

    /// Powers carrying at least one recipe term at `order`.
    pub fn displayed_powers(&self, order: u8) -> Vec<usize> {
        let mut p: Vec<usize> = self
            .recipe()
            .iter()
            .filter(|t| t.order == order)
            .map(|t| t.power as usize)
            .collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    /// P_o(x) (or Q_o(z)).
    pub fn polynomial(&self, order: u8, x: f64) -> f64 {
        if !(2..=5).contains(&order) {
            return 0.0;
        }
        self.values[order as usize - 2]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }

    /// Every (order, power, value) in the table, displayed powers only.
    pub fn entries(&self) -> Vec<(u8, usize, f64)> {
        (2..=5u8)
            .flat_map(|o| {
                self.displayed_powers(o)
                    .into_iter()
                    .map(move |p| (o, p, self.coefficient(o, p)))
            })
            .collect()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// sup over |x| ≤ `half_width` of |P_o(x) φ(x)|, by a fine grid; bounds the
    /// step between consecutive Edgeworth truncations.
    pub fn correction_bound(&self, order: u8, half_width: f64) -> f64 {
        let steps = 4000;
        (0..=steps)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / steps as f64)
            .map(|x| (self.polynomial(order, x) * crate::special::norm_pdf(x)).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    fn exact_coefficient(kind: TableKind, order: u8, power: u8, eta: &[i128; 11]) -> Q {
        kind.terms()
            .iter()
            .filter(|t| t.order == order && t.power == power)
            .map(|t| {
                t.factors
                    .iter()
                    .fold(Q::new(t.num as i128, t.den as i128), |acc, &i| acc * Q::from_integer(eta[i as usize]))
            })
            .sum()
    }

    const GAUSS_INT: [i128; 11] = [0, 0, 2, 0, 3, 0, 0, 15, 8, 6, 6];

    #[test]
    fn gaussian_collapse_is_exact_in_rationals() {
        for kind in [TableKind::Edgeworth, TableKind::CornishFisher] {
            for order in 2..=5u8 {
                for power in 0..=MAX_POWER as u8 {
                    let c = exact_coefficient(kind, order, power, &GAUSS_INT);
                    assert_eq!(c, Q::from_integer(0), "{kind:?} order {order} power {power}");
                }
            }
        }
    }

    #[test]
    fn quoted_gaussian_sums() {
        // order-3 cubic: 1/8 − η₂/6 + 5η₄/72 + η₃²/72
        let cubic = Q::new(1, 8) - Q::new(2, 6) + Q::new(15, 72);
        assert_eq!(cubic, Q::from_integer(0));
        assert_eq!(exact_coefficient(TableKind::Edgeworth, 3, 3, &GAUSS_INT), cubic);
        // order-5 x⁷
        let x7 = Q::new(-4, 72) + Q::new(2, 48) + Q::new(30, 432) - Q::new(1, 128) - Q::new(15, 576)
            - Q::new(225, 10368);
        assert_eq!(x7, Q::from_integer(0));
    }

    #[test]
    fn displayed_powers_match_layout() {
        let e = CoefficientTable::edgeworth(&Eta::GAUSSIAN);
        assert_eq!(e.displayed_powers(2), vec![0, 2]);
        assert_eq!(e.displayed_powers(3), vec![1, 3, 5]);
        assert_eq!(e.displayed_powers(4), vec![0, 2, 4, 6, 8]);
        assert_eq!(e.displayed_powers(5), vec![1, 3, 5, 7, 9, 11]);
        let q = CoefficientTable::cornish_fisher(&Eta::GAUSSIAN);
        assert_eq!(q.displayed_powers(2), vec![0, 2]);
        assert_eq!(q.displayed_powers(3), vec![1, 3]);
        assert_eq!(q.displayed_powers(4), vec![0, 2, 4]);
        assert_eq!(q.displayed_powers(5), vec![1, 3, 5]);
    }

    #[test]
    fn gaussian_collapse_in_floating_point() {
        for table in [
            CoefficientTable::edgeworth(&Eta::GAUSSIAN),
            CoefficientTable::cornish_fisher(&Eta::GAUSSIAN),
        ] {
            assert!(table.max_abs_coefficient() < 1e-12);
        }
    }

    #[test]
    fn first_inverse_relation_holds_symbolically() {
        // Q_2 = −P_2 and Q_3 = P_2 P_2' − z P_2²/2 − P_3 as polynomials, for an
        // arbitrary η with rational entries.
        let eta = Eta::from_array([1.5, 0.75, 2.5, 0.3, -0.2, 9.0, 1.25, 4.0, 2.0]);
        let p = CoefficientTable::edgeworth(&eta);
        let q = CoefficientTable::cornish_fisher(&eta);
        for i in -10..=10 {
            let z = 0.3 * i as f64;
            let p2 = p.polynomial(2, z);
            let dp2 = -eta.eta3 * z / 6.0;
            assert!((q.polynomial(2, z) + p2).abs() < 1e-14);
            let want = p2 * dp2 - 0.5 * z * p2 * p2 - p.polynomial(3, z);
            assert!((q.polynomial(3, z) - want).abs() < 1e-12);
        }
    }
}

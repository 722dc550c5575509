//! Study configuration.
//!
//! Key set (TOML or JSON):
//!
//! | key                  | meaning                                             | default        |
//! |----------------------|-----------------------------------------------------|----------------|
//! | `family`             | `{ name = "...", params = { ... } }`                | required       |
//! | `n_grid`             | strictly increasing sample sizes                    | required       |
//! | `replications`       | replicates per sample size, at least 100            | required       |
//! | `base_seed`          | 64-bit seed; replicate r uses `base_seed ^ r`       | 0              |
//! | `orders`             | expansion orders to compare                         | `[1,2,3,4,5]`  |
//! | `eval_grid`          | `"start:stop:step"` or a list of points             | `"-4:4:0.01"`  |
//! | `epsilon_exponent`   | tail threshold (log n)^(2+e)/√n / n²                | 0.5            |
//! | `solver_tol`         | MLE score tolerance                                 | 1e-12          |
//! | `quadrature_tol`     | moment quadrature tolerance                         | 1e-10          |
//! | `chunk_size`         | replicates per work item                            | 1024           |
//! | `max_failure_rate`   | abort threshold for solver failures                 | 0.01           |
//! | `allow_failed_conditions` | run even if a regularity condition fails       | false          |

use serde::{Deserialize, Serialize};

use crate::density::FamilySpec;
use crate::error::{Error, Result};
use crate::expansion::ExpansionOrder;

/// An evaluation grid, either an inclusive `start:stop:step` range or an
/// explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range(String),
    Points(Vec<f64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Range("-4:4:0.01".into())
    }
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            GridSpec::Range(s) => parse_grid(s)?,
            GridSpec::Points(p) => p.clone(),
        };
        if pts.is_empty() || pts.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("grid must contain finite points"));
        }
        if pts.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("grid must be sorted"));
        }
        Ok(pts)
    }
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("bad number `{t}` in grid `{s}`")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect(),
        3 => {
            let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(h > 0.0) || b < a {
                return Err(Error::invalid(format!("grid `{s}` needs step > 0 and stop >= start")));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            if count > 10_000_000 {
                return Err(Error::invalid(format!("grid `{s}` is too large")));
            }
            Ok((0..count).map(|i| a + i as f64 * h).collect())
        }
        _ => Err(Error::invalid(format!("grid `{s}` must be start:stop:step or a list"))),
    }
}

fn default_orders() -> Vec<ExpansionOrder> {
    ExpansionOrder::all().collect()
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_solver_tol() -> f64 {
    1e-12
}
fn default_quadrature_tol() -> f64 {
    crate::moments::DEFAULT_TOL
}
fn default_chunk() -> usize {
    1024
}
fn default_failure_rate() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub family: FamilySpec,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_orders")]
    pub orders: Vec<ExpansionOrder>,
    #[serde(default)]
    pub eval_grid: GridSpec,
    #[serde(default = "default_epsilon")]
    pub epsilon_exponent: f64,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_quadrature_tol")]
    pub quadrature_tol: f64,
    #[serde(default = "default_chunk")]
    pub chunk_size: usize,
    #[serde(default = "default_failure_rate")]
    pub max_failure_rate: f64,
    #[serde(default)]
    pub allow_failed_conditions: bool,
}

impl SimulationConfig {
    pub fn new(family: FamilySpec, n_grid: Vec<usize>, replications: usize, base_seed: u64) -> Self {
        Self {
            family,
            n_grid,
            replications,
            base_seed,
            orders: default_orders(),
            eval_grid: GridSpec::default(),
            epsilon_exponent: default_epsilon(),
            solver_tol: default_solver_tol(),
            quadrature_tol: default_quadrature_tol(),
            chunk_size: default_chunk(),
            max_failure_rate: default_failure_rate(),
            allow_failed_conditions: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 100 {
            return Err(Error::invalid("replications must be at least 100"));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(Error::invalid("n_grid must be non-empty with positive sizes"));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("n_grid must be strictly increasing"));
        }
        if self.orders.is_empty() {
            return Err(Error::invalid("at least one expansion order is required"));
        }
        if !(self.solver_tol > 0.0) || !(self.quadrature_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if !self.epsilon_exponent.is_finite() {
            return Err(Error::invalid("epsilon_exponent must be finite"));
        }
        if self.chunk_size == 0 {
            return Err(Error::invalid("chunk_size must be positive"));
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(Error::invalid("max_failure_rate must lie in [0, 1]"));
        }
        self.eval_grid.points()?;
        Ok(())
    }

    /// Sorted, de-duplicated orders.
    pub fn sorted_orders(&self) -> Vec<ExpansionOrder> {
        let mut o = self.orders.clone();
        o.sort();
        o.dedup();
        o
    }

    /// The threshold ε_n/n² with ε_n = (log n)^(2+e)/√n.
    pub fn tail_threshold(&self, n: usize) -> f64 {
        let nf = n as f64;
        nf.ln().powf(2.0 + self.epsilon_exponent) / nf.sqrt() / (nf * nf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(parse_grid("-3:3:0.5").unwrap().len(), 13);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert_eq!(parse_grid("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_grid("-4:4:0.01").unwrap().len(), 801);
        assert!(parse_grid("1:0:0.5").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:b").is_err());
    }

    #[test]
    fn validation() {
        let base = SimulationConfig::new(FamilySpec::new("logistic"), vec![10, 20], 100, 1);
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.replications = 99;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.n_grid = vec![20, 20];
        assert!(c.validate().is_err());
        let mut c = base;
        c.eval_grid = GridSpec::Points(vec![1.0, 0.0]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_defaults() {
        let c: SimulationConfig =
            serde_json::from_str(r#"{"family":{"name":"logistic"},"n_grid":[25],"replications":200}"#).unwrap();
        assert_eq!(c.orders.len(), 5);
        assert_eq!(c.epsilon_exponent, 0.5);
        assert_eq!(c.eval_grid.points().unwrap().len(), 801);
    }

    #[test]
    fn tail_threshold_value() {
        let c = SimulationConfig::new(FamilySpec::new("logistic"), vec![100], 100, 0);
        let want = 100f64.ln().powf(2.5) / 10.0 / 1e4;
        assert!((c.tail_threshold(100) - want).abs() < 1e-18);
    }
}

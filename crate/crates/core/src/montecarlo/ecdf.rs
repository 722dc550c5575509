//! Empirical CDFs and their distance to a predicted distribution function.

#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// F(x−) = #{X < x}/M.
    pub fn left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v < x) as f64 / self.len().max(1) as f64
    }

    /// F(x) = #{X ≤ x}/M.
    pub fn right(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.len().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub sup_norm: f64,
    pub l1: f64,
}

/// Max and mean over `grid` of max(|F(x−) − G(x)|, |F(x) − G(x)|).
pub fn ecdf_distance(ecdf: &Ecdf, prediction: impl Fn(f64) -> f64, grid: &[f64]) -> Distance {
    let mut sup: f64 = 0.0;
    let mut sum = 0.0;
    for &x in grid {
        let g = prediction(x);
        let d = (ecdf.left(x) - g).abs().max((ecdf.right(x) - g).abs());
        sup = sup.max(d);
        sum += d;
    }
    Distance {
        sup_norm: sup,
        l1: if grid.is_empty() { 0.0 } else { sum / grid.len() as f64 },
    }
}

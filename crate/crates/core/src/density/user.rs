//! User-supplied families: an expression string for f, or a tabulated grid
//! of f and its first six derivatives.

use std::io::Read;

use std::str::FromStr;

use meval::{ContextProvider, Expr, FuncEvalError};

use super::numeric::numeric_derivative;
use super::{DerivativeMode, LocationFamily, Support, MAX_ORDER};
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// Column order of a tabulated family CSV (header row required).
pub const TABULATED_COLUMNS: [&str; 8] = ["x", "f", "f1", "f2", "f3", "f4", "f5", "f6"];

const CDF_TOL: f64 = 1e-12;

/// Density given as an expression in `x`, normalized by quadrature over the
/// support. Derivatives use the numeric fallback.
///
/// Syntax: `+ - * / ^` with the usual precedence (`-x^2` is `-(x^2)`),
/// parentheses, the constants `pi` and `e`, and the functions `exp`, `ln`,
/// `sqrt`, `abs`, `sin`, `cos`, `tan`, `asin`, `acos`, `atan`, `sinh`,
/// `cosh`, `tanh`, `asinh`, `acosh`, `atanh`, `floor`, `ceil`, `round`,
/// `signum`, `atan2(y, x)`, `max(..)` and `min(..)`.
#[derive(Debug, Clone)]
pub struct ExpressionFamily {
    source: String,
    expr: Expr,
    norm: f64,
    support: Support,
    scale: f64,
    symmetric: bool,
}

impl ExpressionFamily {
    pub fn new(source: &str, support: Support, scale: f64, symmetric: bool) -> Result<Self> {
        let expr = Expr::from_str(source).map_err(|e| Error::Family(format!("expression `{source}`: {e}")))?;
        let others: Vec<&str> = expr
            .iter()
            .filter_map(|t| match t {
                meval::tokenizer::Token::Var(v) if v != "x" && v != "pi" && v != "e" => Some(v.as_str()),
                _ => None,
            })
            .collect();
        if !others.is_empty() {
            return Err(Error::Family(format!(
                "expression must use the single variable `x`, found {others:?}"
            )));
        }
        if let Err(e) = expr.eval_with_context(Point(0.0)) {
            return Err(Error::Family(format!("expression `{source}`: {e}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Family(format!("length scale must be positive, got {scale}")));
        }
        let mut fam = Self {
            source: source.to_string(),
            expr,
            norm: 1.0,
            support,
            scale,
            symmetric,
        };
        let mass = Quadrature::with_tolerance(CDF_TOL)
            .integrate(|x| fam.raw(x), support.lower, support.upper)
            .map_err(|e| Error::Family(format!("cannot normalize `{source}`: {e}")))?
            .value;
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Family(format!("`{source}` has non-positive mass {mass}")));
        }
        fam.norm = 1.0 / mass;
        Ok(fam)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn raw(&self, x: f64) -> f64 {
        match self.expr.eval_with_context(Point(x)) {
            Ok(y) if y.is_finite() && y > 0.0 => y,
            _ => 0.0,
        }
    }
}

/// Evaluation context binding `x`, without allocation.
#[derive(Clone, Copy)]
struct Point(f64);

impl ContextProvider for Point {
    fn get_var(&self, name: &str) -> Option<f64> {
        match name {
            "x" => Some(self.0),
            "pi" => Some(std::f64::consts::PI),
            "e" => Some(std::f64::consts::E),
            _ => None,
        }
    }

    fn eval_func(&self, name: &str, args: &[f64]) -> std::result::Result<f64, FuncEvalError> {
        let one = |f: fn(f64) -> f64| match args {
            [a] => Ok(f(*a)),
            [] => Err(FuncEvalError::TooFewArguments),
            _ => Err(FuncEvalError::TooManyArguments),
        };
        match name {
            "exp" => one(f64::exp),
            "ln" => one(f64::ln),
            "sqrt" => one(f64::sqrt),
            "abs" => one(f64::abs),
            "sin" => one(f64::sin),
            "cos" => one(f64::cos),
            "tan" => one(f64::tan),
            "asin" => one(f64::asin),
            "acos" => one(f64::acos),
            "atan" => one(f64::atan),
            "sinh" => one(f64::sinh),
            "cosh" => one(f64::cosh),
            "tanh" => one(f64::tanh),
            "asinh" => one(f64::asinh),
            "acosh" => one(f64::acosh),
            "atanh" => one(f64::atanh),
            "floor" => one(f64::floor),
            "ceil" => one(f64::ceil),
            "round" => one(f64::round),
            "signum" => one(f64::signum),
            "atan2" => match args {
                [y, x] => Ok(y.atan2(*x)),
                _ => Err(FuncEvalError::NumberArgs(2)),
            },
            "max" | "min" if args.is_empty() => Err(FuncEvalError::TooFewArguments),
            "max" => Ok(args.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            "min" => Ok(args.iter().copied().fold(f64::INFINITY, f64::min)),
            _ => Err(FuncEvalError::UnknownFunction),
        }
    }
}

impl LocationFamily for ExpressionFamily {
    fn name(&self) -> String {
        format!("expression({})", self.source)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.raw(x) * self.norm
    }

    fn derivative_ratios(&self, x: f64) -> [f64; MAX_ORDER] {
        let f = self.pdf(x);
        let mut out = [0.0; MAX_ORDER];
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = numeric_derivative(|t| self.pdf(t), j + 1, x, self.scale).value / f;
        }
        out
    }

    fn cdf(&self, x: f64) -> f64 {
        cdf_by_quadrature(|t| self.pdf(t), self.support, x)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        invert_cdf(|x| self.cdf(x), self.support, self.scale, p)
    }

    fn support(&self) -> Support {
        self.support
    }

    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::NumericFallback
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn length_scale(&self) -> f64 {
        self.scale
    }
}

fn cdf_by_quadrature<F: Fn(f64) -> f64>(pdf: F, support: Support, x: f64) -> f64 {
    if x <= support.lower {
        return 0.0;
    }
    if x >= support.upper {
        return 1.0;
    }
    let q = Quadrature::with_tolerance(CDF_TOL);
    // integrate the shorter tail for accuracy
    let left = q.integrate(&pdf, support.lower, x).map(|r| r.value);
    match left {
        Ok(v) if v <= 0.5 => v.max(0.0),
        _ => {
            let right = q.integrate(&pdf, x, support.upper).map(|r| r.value).unwrap_or(f64::NAN);
            (1.0 - right).clamp(0.0, 1.0)
        }
    }
}

fn invert_cdf<F: Fn(f64) -> f64>(cdf: F, support: Support, scale: f64, p: f64) -> Result<f64> {
    let fail = || Error::InversionFailure { p };
    let mut lo = if support.lower.is_finite() { support.lower } else { -scale };
    let mut hi = if support.upper.is_finite() { support.upper } else { scale };
    let mut step = scale;
    for _ in 0..200 {
        if support.lower.is_finite() || cdf(lo) < p {
            break;
        }
        hi = hi.min(lo);
        lo -= step;
        step *= 2.0;
    }
    step = scale;
    for _ in 0..200 {
        if support.upper.is_finite() || cdf(hi) > p {
            break;
        }
        lo = lo.max(hi);
        hi += step;
        step *= 2.0;
    }
    if !(cdf(lo) <= p && cdf(hi) >= p) {
        return Err(fail());
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    if x.is_finite() {
        Ok(x)
    } else {
        Err(fail())
    }
}

/// Density tabulated on a grid with its first six derivatives. Between
/// nodes each function is expanded in a Taylor series about the nearest
/// node, which keeps f, f', …, f⁽⁶⁾ mutually consistent.
#[derive(Debug, Clone)]
pub struct TabulatedFamily {
    label: String,
    xs: Vec<f64>,
    // rows of [f, f1, …, f6], already divided by the tabulated mass
    rows: Vec<[f64; MAX_ORDER + 1]>,
    // cumulative mass at each node
    cum: Vec<f64>,
    symmetric: bool,
}

impl TabulatedFamily {
    pub fn from_csv_path(path: &std::path::Path, symmetric: bool) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(file, &path.display().to_string(), symmetric)
    }

    /// Reads a CSV with header `x,f,f1,f2,f3,f4,f5,f6`.
    pub fn from_reader<R: Read>(reader: R, label: &str, symmetric: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        let names: Vec<&str> = header.iter().collect();
        if names != TABULATED_COLUMNS {
            return Err(Error::Family(format!(
                "tabulated family header must be {TABULATED_COLUMNS:?}, found {names:?}"
            )));
        }
        let mut xs = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let mut vals = [0.0; MAX_ORDER + 2];
            for (k, v) in vals.iter_mut().enumerate() {
                *v = rec[k]
                    .parse()
                    .map_err(|_| Error::Family(format!("non-numeric entry `{}`", &rec[k])))?;
            }
            xs.push(vals[0]);
            let mut row = [0.0; MAX_ORDER + 1];
            row.copy_from_slice(&vals[1..]);
            rows.push(row);
        }
        Self::from_rows(label, xs, rows, symmetric)
    }

    pub fn from_rows(
        label: &str,
        xs: Vec<f64>,
        mut rows: Vec<[f64; MAX_ORDER + 1]>,
        symmetric: bool,
    ) -> Result<Self> {
        if xs.len() < 3 || xs.len() != rows.len() {
            return Err(Error::Family("tabulated family needs at least 3 rows".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Family("tabulated x values must be strictly increasing".into()));
        }
        if rows.iter().any(|r| r.iter().any(|v| !v.is_finite()) || r[0] < 0.0) {
            return Err(Error::Family("tabulated values must be finite with f >= 0".into()));
        }
        let mut fam = Self {
            label: label.to_string(),
            xs,
            rows: rows.clone(),
            cum: Vec::new(),
            symmetric,
        };
        let q = Quadrature::with_tolerance(1e-13);
        let mut cum = vec![0.0];
        for w in fam.xs.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let a = q.integrate(|x| fam.eval(0, x), w[0], mid).map_err(quad_err)?.value;
            let b = q.integrate(|x| fam.eval(0, x), mid, w[1]).map_err(quad_err)?.value;
            cum.push(cum.last().unwrap() + a + b);
        }
        let mass = *cum.last().unwrap();
        if !(mass > 0.0) {
            return Err(Error::Family("tabulated density has zero mass".into()));
        }
        for r in rows.iter_mut() {
            for v in r.iter_mut() {
                *v /= mass;
            }
        }
        fam.rows = rows;
        fam.cum = cum.into_iter().map(|c| c / mass).collect();
        Ok(fam)
    }

    fn nearest(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&v| v < x);
        if i == 0 {
            0
        } else if i >= self.xs.len() {
            self.xs.len() - 1
        } else if x - self.xs[i - 1] <= self.xs[i] - x {
            i - 1
        } else {
            i
        }
    }

    fn eval(&self, m: usize, x: f64) -> f64 {
        let i = self.nearest(x);
        let h = x - self.xs[i];
        let row = &self.rows[i];
        let mut sum = 0.0;
        let mut term = 1.0;
        for (k, &coef) in row.iter().enumerate().skip(m) {
            if k > m {
                term *= h / (k - m) as f64;
            }
            sum += coef * term;
        }
        sum
    }
}

fn quad_err(e: crate::quadrature::QuadError) -> Error {
    Error::Family(format!("tabulated density integration failed: {e}"))
}

impl LocationFamily for TabulatedFamily {
    fn name(&self) -> String {
        format!("tabulated({})", self.label)
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < self.xs[0] || x > *self.xs.last().unwrap() {
            return 0.0;
        }
        self.eval(0, x).max(0.0)
    }

    fn derivative_ratios(&self, x: f64) -> [f64; MAX_ORDER] {
        let f = self.eval(0, x);
        let mut out = [0.0; MAX_ORDER];
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = self.eval(j + 1, x) / f;
        }
        out
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let q = Quadrature::with_tolerance(1e-13);
        let mid = 0.5 * (self.xs[i] + self.xs[i + 1]);
        let part = if x <= mid {
            q.integrate(|t| self.eval(0, t), self.xs[i], x).map(|r| r.value)
        } else {
            let a = q.integrate(|t| self.eval(0, t), self.xs[i], mid).map(|r| r.value);
            let b = q.integrate(|t| self.eval(0, t), mid, x).map(|r| r.value);
            a.and_then(|a| b.map(|b| a + b))
        };
        (self.cum[i] + part.unwrap_or(f64::NAN)).clamp(0.0, 1.0)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        let s = self.support();
        invert_cdf(|x| self.cdf(x), s, (s.upper - s.lower) / 4.0, p)
    }

    fn support(&self) -> Support {
        Support {
            lower: self.xs[0],
            upper: *self.xs.last().unwrap(),
        }
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn length_scale(&self) -> f64 {
        (self.xs.last().unwrap() - self.xs[0]) / 20.0
    }
}

//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature.
//!
//! Semi-infinite ranges are mapped onto (0, 1] with `x = a + (1 - t) / t`,
//! which turns polynomially or exponentially decaying tails into integrands
//! that are bounded near `t = 0`. The whole real line is split at the origin.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_980_302,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Value and error estimate of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadError {
    /// Refinement hit the subdivision limit before meeting the tolerance.
    Stalled {
        value: f64,
        abs_error: f64,
        subdivisions: usize,
    },
    /// The integrand returned NaN or ±∞.
    NonFinite { x: f64 },
}

impl std::fmt::Display for QuadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QuadError::Stalled {
                value,
                abs_error,
                subdivisions,
            } => write!(
                f,
                "refinement stalled after {subdivisions} subdivisions (value {value:e}, error {abs_error:e})"
            ),
            QuadError::NonFinite { x } => write!(f, "integrand is not finite at x = {x:e}"),
        }
    }
}

impl std::error::Error for QuadError {}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_subdivisions: 2000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

impl Quadrature {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]`; either end may be infinite.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<Integral, QuadError>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate_dyn(&f, a, b)
    }

    fn integrate_dyn(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<Integral, QuadError> {
        if a == b {
            return Ok(Integral {
                value: 0.0,
                abs_error: 0.0,
                evaluations: 0,
            });
        }
        if a > b {
            return self.integrate_dyn(f, b, a).map(|r| Integral {
                value: -r.value,
                ..r
            });
        }
        match (a.is_finite(), b.is_finite()) {
            (true, true) => self.adaptive(f, a, b),
            (true, false) => self.adaptive(
                &|t: f64| {
                    let x = a + (1.0 - t) / t;
                    scaled(f(x), 1.0 / (t * t), x)
                },
                0.0,
                1.0,
            ),
            (false, true) => self.adaptive(
                &|t: f64| {
                    let x = b - (1.0 - t) / t;
                    scaled(f(x), 1.0 / (t * t), x)
                },
                0.0,
                1.0,
            ),
            (false, false) => {
                let half = Quadrature {
                    abs_tol: 0.5 * self.abs_tol,
                    ..*self
                };
                let lo = half.integrate_dyn(f, f64::NEG_INFINITY, 0.0)?;
                let hi = half.integrate_dyn(f, 0.0, f64::INFINITY)?;
                Ok(Integral {
                    value: lo.value + hi.value,
                    abs_error: lo.abs_error + hi.abs_error,
                    evaluations: lo.evaluations + hi.evaluations,
                })
            }
        }
    }

    fn adaptive<F>(&self, f: &F, a: f64, b: f64) -> Result<Integral, QuadError>
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        let mut heap = BinaryHeap::new();
        let first = kronrod21(f, a, b)?;
        let mut evaluations = 21;
        heap.push(Segment {
            a,
            b,
            value: first.0,
            error: first.1,
        });
        let mut subdivisions = 0;
        let (mut run_value, mut run_error) = first;
        loop {
            if run_error <= self.abs_tol.max(self.rel_tol * run_value.abs()) {
                let (value, error) = totals(&heap);
                return Ok(Integral {
                    value,
                    abs_error: error,
                    evaluations,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if subdivisions >= self.max_subdivisions || mid <= worst.a || mid >= worst.b {
                heap.push(worst);
                let (value, abs_error) = totals(&heap);
                return Err(QuadError::Stalled {
                    value,
                    abs_error,
                    subdivisions,
                });
            }
            let left = kronrod21(f, worst.a, mid)?;
            let right = kronrod21(f, mid, worst.b)?;
            evaluations += 42;
            subdivisions += 1;
            run_value += left.0 + right.0 - worst.value;
            run_error += left.1 + right.1 - worst.error;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: left.0,
                error: left.1,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: right.0,
                error: right.1,
            });
        }
    }
}

fn scaled(fx: f64, jacobian: f64, x: f64) -> f64 {
    // The mapped integrand is 0 · ∞ at the far end when f has already
    // underflowed; treat that as 0.
    if fx == 0.0 || x.is_infinite() {
        0.0
    } else {
        fx * jacobian
    }
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    // Summed in left-to-right order so the result does not depend on heap
    // layout.
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|p, q| p.a.total_cmp(&q.a));
    segs.iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
}

fn kronrod21<F>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64, QuadError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite { x })
        }
    };

    let fc = eval(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv = [(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

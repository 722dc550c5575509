//! Remainder and Edgeworth studies by simulation (θ₀ = 0 throughout).

use serde::Serialize;

use super::config::SimulationConfig;
use super::ecdf::{ecdf_distance, Ecdf};
use super::sampling::{replicate_seed, sample_iid};
use super::stats::{dkw_floor, ols_slope, quantile_sorted, wilson_interval, Z95};
use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::expansion::stochastic::truncations;
use crate::expansion::{compute_xi, Edgeworth, ExpansionOrder, XiVector};
use crate::mle::{solve_mle_with, MleOptions};
use crate::moments::conditions::{validate_conditions, ConditionReport};
use crate::moments::{compute_moment_set_with, MomentSet};

/// Replicates handed to the worker pool between two flushes to the sink.
const CHUNKS_PER_BATCH: usize = 64;

/// Quantile levels reported for each remainder.
pub const REMAINDER_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Order of the remainder used by the tail diagnostic.
pub const TAIL_ORDER: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub replicate: usize,
    pub seed: u64,
    pub theta_hat: f64,
    /// √(nI) θ̂.
    pub standardized: f64,
    pub xi: XiVector,
    /// γ^(k) = √n θ̂ − (expansion through order k), k = 1..=5.
    pub remainders: [f64; 5],
    pub multimodal: bool,
}

/// Computes one replicate.
pub fn replicate(
    model: &DensityModel,
    moments: &MomentSet,
    n: usize,
    seed: u64,
    replicate: usize,
    solver: &MleOptions,
) -> Result<ReplicationResult> {
    let x = sample_iid(model, n, seed)?;
    let fit = solve_mle_with(&x, model, solver)?;
    let xi = compute_xi(&x, 0.0, model, &moments.a)?;
    let tr = truncations(&xi, &moments.a)?;
    let scaled = (n as f64).sqrt() * fit.theta_hat;
    let remainders = tr.map(|t| scaled - t);
    if remainders.iter().any(|r| !r.is_finite()) {
        return Err(Error::invalid("non-finite remainder"));
    }
    Ok(ReplicationResult {
        replicate,
        seed,
        theta_hat: fit.theta_hat,
        standardized: (n as f64 * moments.fisher).sqrt() * fit.theta_hat,
        xi,
        remainders,
        multimodal: fit.multimodal_flag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderDistance {
    pub order: u8,
    pub sup_norm: f64,
    pub l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderSummary {
    pub order: u8,
    pub median_abs: f64,
    pub max_abs: f64,
    /// Quantiles of γ^(k) at [`REMAINDER_LEVELS`].
    pub quantiles: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFraction {
    pub order: u8,
    pub threshold: f64,
    pub exceedances: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSizeReport {
    pub n: usize,
    pub completed: usize,
    pub failures: usize,
    pub multimodal: usize,
    pub distances: Vec<OrderDistance>,
    /// Sup distances do not increase with the order by more than the DKW floor.
    pub distances_monotone_within_dkw: bool,
    /// Grid points where some expansion left [0, 1].
    pub out_of_range_points: usize,
    pub remainders: Vec<RemainderSummary>,
    pub tail: TailFraction,
}

impl SampleSizeReport {
    pub fn distance(&self, order: u8) -> Option<&OrderDistance> {
        self.distances.iter().find(|d| d.order == order)
    }

    pub fn remainder(&self, order: u8) -> Option<&RemainderSummary> {
        self.remainders.iter().find(|r| r.order == order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemainderSlope {
    pub order: u8,
    /// Least-squares slope of log median |γ^(k)| on log n; absent when fewer
    /// than two medians are positive.
    pub slope: Option<f64>,
    /// −k/2, the rate of the first omitted term.
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailTrend {
    /// No later n has a tail fraction significantly above an earlier one.
    pub nonincreasing: bool,
    /// Consecutive (n_i, n_j) pairs whose 95% intervals are separated upward.
    pub violations: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub family: String,
    pub moments: MomentSet,
    pub conditions: ConditionReport,
    pub replications: usize,
    pub base_seed: u64,
    pub orders: Vec<u8>,
    pub eval_points: usize,
    pub epsilon_exponent: f64,
    pub dkw_floor: f64,
    pub per_n: Vec<SampleSizeReport>,
    pub remainder_slopes: Vec<RemainderSlope>,
    pub tail_trend: TailTrend,
}

impl ComparisonReport {
    pub fn at(&self, n: usize) -> Option<&SampleSizeReport> {
        self.per_n.iter().find(|r| r.n == n)
    }

    pub fn slope(&self, order: u8) -> Option<f64> {
        self.remainder_slopes.iter().find(|s| s.order == order).and_then(|s| s.slope)
    }
}

/// ECDF and predictions on the evaluation grid for one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfTable {
    pub n: usize,
    pub grid: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// (order, raw G_n^{(k)} on the grid).
    pub predictions: Vec<(u8, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub report: ComparisonReport,
    pub tables: Vec<EcdfTable>,
}

/// Receives each successful replicate, in replicate order, for each n.
pub type ReplicateSink<'a> = dyn FnMut(usize, &ReplicationResult) -> Result<()> + Send + 'a;

pub fn run_study(config: &SimulationConfig, exec: Execution) -> Result<StudyOutput> {
    run_study_with(config, exec, &mut |_, _| Ok(()))
}

pub fn run_study_with(config: &SimulationConfig, exec: Execution, sink: &mut ReplicateSink<'_>) -> Result<StudyOutput> {
    config.validate()?;
    let model = config.family.build()?;
    run_study_for(&model, config, exec, sink)
}

/// Runs a study for an already built model; `config.family` is ignored.
pub fn run_study_for(
    model: &DensityModel,
    config: &SimulationConfig,
    exec: Execution,
    sink: &mut ReplicateSink<'_>,
) -> Result<StudyOutput> {
    config.validate()?;
    let model = model.clone();
    let conditions = validate_conditions(&model);
    if conditions.any_fail() && !config.allow_failed_conditions {
        let failed: Vec<String> = conditions
            .conditions
            .iter()
            .filter(|c| c.verdict == crate::moments::conditions::Verdict::Fail)
            .map(|c| format!("({}) {}", c.condition, c.detail))
            .collect();
        return Err(Error::ConditionsFailed(failed.join("; ")));
    }
    let moments = compute_moment_set_with(&model, config.quadrature_tol, exec)?;
    let grid = config.eval_grid.points()?;
    let orders = config.sorted_orders();
    let solver = MleOptions {
        tol: config.solver_tol,
        ..MleOptions::default()
    };
    let edgeworth = Edgeworth::new(&moments);

    let mut per_n = Vec::with_capacity(config.n_grid.len());
    let mut tables = Vec::with_capacity(config.n_grid.len());
    for &n in &config.n_grid {
        let outcome = exec.install(|| simulate_n(config, &model, &moments, &solver, n, exec, &mut *sink))?;
        let (report, table) = summarize(config, &edgeworth, &grid, &orders, n, outcome)?;
        per_n.push(report);
        tables.push(table);
    }

    let remainder_slopes = (1..=5u8)
        .map(|k| {
            let pts: Vec<(f64, f64)> = per_n
                .iter()
                .filter_map(|r| {
                    let m = r.remainder(k)?.median_abs;
                    (m > 0.0 && m.is_finite()).then(|| ((r.n as f64).ln(), m.ln()))
                })
                .collect();
            RemainderSlope {
                order: k,
                slope: (pts.len() >= 2).then(|| ols_slope(&pts)),
                expected: -(k as f64) / 2.0,
            }
        })
        .collect();
    let violations: Vec<(usize, usize)> = per_n
        .windows(2)
        .filter(|w| w[1].tail.ci_low > w[0].tail.ci_high)
        .map(|w| (w[0].n, w[1].n))
        .collect();

    Ok(StudyOutput {
        report: ComparisonReport {
            family: model.name(),
            moments,
            conditions,
            replications: config.replications,
            base_seed: config.base_seed,
            orders: orders.iter().map(|o| o.get()).collect(),
            eval_points: grid.len(),
            epsilon_exponent: config.epsilon_exponent,
            dkw_floor: dkw_floor(config.replications),
            per_n,
            remainder_slopes,
            tail_trend: TailTrend {
                nonincreasing: violations.is_empty(),
                violations,
            },
        },
        tables,
    })
}

/// Per-replicate scalars kept after streaming.
struct Outcome {
    standardized: Vec<f64>,
    remainders: Vec<[f64; 5]>,
    failures: usize,
    multimodal: usize,
}

fn simulate_n(
    config: &SimulationConfig,
    model: &DensityModel,
    moments: &MomentSet,
    solver: &MleOptions,
    n: usize,
    exec: Execution,
    sink: &mut ReplicateSink<'_>,
) -> Result<Outcome> {
    let m = config.replications;
    let chunk = config.chunk_size;
    let n_chunks = m.div_ceil(chunk);
    let allowed = (config.max_failure_rate * m as f64).floor() as usize;
    let mut out = Outcome {
        standardized: Vec::with_capacity(m),
        remainders: Vec::with_capacity(m),
        failures: 0,
        multimodal: 0,
    };
    let mut first = 0;
    while first < n_chunks {
        let count = CHUNKS_PER_BATCH.min(n_chunks - first);
        let batch: Vec<Vec<Option<ReplicationResult>>> = exec.map_installed(count, |c| {
            let lo = (first + c) * chunk;
            let hi = (lo + chunk).min(m);
            (lo..hi)
                .map(|r| replicate(model, moments, n, replicate_seed(config.base_seed, r), r, solver).ok())
                .collect()
        });
        for rep in batch.into_iter().flatten() {
            match rep {
                Some(r) => {
                    sink(n, &r)?;
                    out.standardized.push(r.standardized);
                    out.remainders.push(r.remainders);
                    out.multimodal += r.multimodal as usize;
                }
                None => out.failures += 1,
            }
        }
        if out.failures > allowed {
            return Err(Error::StudyAborted {
                n,
                failures: out.failures,
                attempted: ((first + count) * chunk).min(m),
            });
        }
        first += count;
    }
    Ok(out)
}

fn summarize(
    config: &SimulationConfig,
    edgeworth: &Edgeworth,
    grid: &[f64],
    orders: &[ExpansionOrder],
    n: usize,
    outcome: Outcome,
) -> Result<(SampleSizeReport, EcdfTable)> {
    let completed = outcome.standardized.len();
    let ecdf = Ecdf::new(outcome.standardized);

    let mut predictions: Vec<(u8, Vec<f64>)> = orders.iter().map(|o| (o.get(), Vec::with_capacity(grid.len()))).collect();
    let mut out_of_range_points = 0;
    for &x in grid {
        let all = edgeworth.all_orders(n, x)?;
        out_of_range_points += all.iter().any(|v| v.out_of_range) as usize;
        for (o, col) in predictions.iter_mut() {
            col.push(all[*o as usize - 1].value);
        }
    }
    let distances: Vec<OrderDistance> = predictions
        .iter()
        .map(|(o, col)| {
            let lookup = |x: f64| {
                let i = grid.partition_point(|g| *g < x);
                col[i]
            };
            let d = ecdf_distance(&ecdf, lookup, grid);
            OrderDistance {
                order: *o,
                sup_norm: d.sup_norm,
                l1: d.l1,
            }
        })
        .collect();
    let floor = dkw_floor(config.replications);
    let distances_monotone_within_dkw = distances.windows(2).all(|w| w[1].sup_norm <= w[0].sup_norm + floor);

    let remainders: Vec<RemainderSummary> = (0..5)
        .map(|k| {
            let mut signed: Vec<f64> = outcome.remainders.iter().map(|r| r[k]).collect();
            signed.sort_by(f64::total_cmp);
            let mut abs: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
            abs.sort_by(f64::total_cmp);
            RemainderSummary {
                order: k as u8 + 1,
                median_abs: quantile_sorted(&abs, 0.5),
                max_abs: abs.last().copied().unwrap_or(f64::NAN),
                quantiles: REMAINDER_LEVELS.iter().map(|&p| quantile_sorted(&signed, p)).collect(),
            }
        })
        .collect();

    let threshold = config.tail_threshold(n);
    let exceedances = outcome
        .remainders
        .iter()
        .filter(|r| r[TAIL_ORDER as usize - 1].abs() >= threshold)
        .count();
    let (ci_low, ci_high) = wilson_interval(exceedances, completed, Z95);
    let tail = TailFraction {
        order: TAIL_ORDER,
        threshold,
        exceedances,
        fraction: if completed == 0 { 0.0 } else { exceedances as f64 / completed as f64 },
        ci_low,
        ci_high,
    };

    let table = EcdfTable {
        n,
        grid: grid.to_vec(),
        left: grid.iter().map(|&x| ecdf.left(x)).collect(),
        right: grid.iter().map(|&x| ecdf.right(x)).collect(),
        predictions,
    };
    Ok((
        SampleSizeReport {
            n,
            completed,
            failures: outcome.failures,
            multimodal: outcome.multimodal,
            distances,
            distances_monotone_within_dkw,
            out_of_range_points,
            remainders,
            tail,
        },
        table,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::FamilySpec;

    fn small(name: &str) -> SimulationConfig {
        let mut c = SimulationConfig::new(FamilySpec::new(name), vec![10, 20], 300, 11);
        c.chunk_size = 37;
        c.eval_grid = super::super::config::GridSpec::Range("-3:3:0.25".into());
        c
    }

    #[test]
    fn normal_pipeline_is_identity() {
        let out = run_study(&small("normal"), Execution::Sequential).unwrap();
        for r in &out.report.per_n {
            assert_eq!(r.failures, 0);
            for s in &r.remainders {
                assert!(s.max_abs < 1e-10, "{s:?}");
            }
            let phi = r.distance(1).unwrap().sup_norm;
            for d in &r.distances {
                assert!((d.sup_norm - phi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_report() {
        let c = small("logistic");
        let a = run_study(&c, Execution::Sequential).unwrap();
        let b = run_study(&c, Execution::Parallel { workers: 3 }).unwrap();
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
    }

    #[test]
    fn sink_sees_replicates_in_order() {
        let c = small("logistic");
        let mut seen = Vec::new();
        run_study_with(&c, Execution::Parallel { workers: 2 }, &mut |n, r| {
            seen.push((n, r.replicate));
            Ok(())
        })
        .unwrap();
        let want: Vec<(usize, usize)> = [10, 20].iter().flat_map(|&n| (0..300).map(move |r| (n, r))).collect();
        assert_eq!(seen, want);
    }

    #[test]
    fn failing_conditions_block_study() {
        let mut c = small("expression");
        c.family = FamilySpec::new("expression").with_param("expr", "1/(1+x^2)");
        assert!(matches!(run_study(&c, Execution::Sequential), Err(Error::ConditionsFailed(_))));
    }
}

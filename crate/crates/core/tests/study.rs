mod common;

use common::{BrokenQuantile, Gumbel};
use mle_expansion::error::Error;
use mle_expansion::expansion::compute_xi;
use mle_expansion::moments::compute_moment_set;
use mle_expansion::montecarlo::{replicate_seed, run_study, run_study_for, sample_iid, SimulationConfig};
use mle_expansion::{DensityModel, Execution, ExpansionOrder, FamilySpec};

fn config(n_grid: Vec<usize>, m: usize, seed: u64) -> SimulationConfig {
    SimulationConfig::new(FamilySpec::new("logistic"), n_grid, m, seed)
}

#[test]
fn xi_has_mean_zero() {
    let model = DensityModel::logistic();
    let a = compute_moment_set(&model, 1e-12).unwrap().a;
    let reps = 10_000;
    let mut sum = [0.0; 6];
    let mut sq = [0.0; 6];
    for r in 0..reps {
        let x = sample_iid(&model, 1000, replicate_seed(77, r)).unwrap();
        let xi = compute_xi(&x, 0.0, &model, &a).unwrap();
        for j in 0..6 {
            sum[j] += xi.xi[j];
            sq[j] += xi.xi[j] * xi.xi[j];
        }
    }
    for j in 0..6 {
        let mean = sum[j] / reps as f64;
        let sd = (sq[j] / reps as f64 - mean * mean).sqrt();
        assert!(mean.abs() <= 3.0 * sd / 100.0, "xi{}: mean {mean}, sd {sd}", j + 1);
    }
}

#[test]
fn heavy_failure_rate_aborts() {
    let model = DensityModel::new(BrokenQuantile { cut: 0.02 });
    let cfg = config(vec![20], 500, 3);
    let err = run_study_for(&model, &cfg, Execution::Sequential, &mut |_, _| Ok(())).unwrap_err();
    assert!(matches!(err, Error::StudyAborted { n: 20, .. }), "{err}");
}

#[test]
fn rare_failures_are_counted_and_skipped() {
    let model = DensityModel::new(BrokenQuantile { cut: 5e-5 });
    let cfg = config(vec![20], 2000, 3);
    let mut seen = 0usize;
    let out = run_study_for(&model, &cfg, Execution::Sequential, &mut |_, _| {
        seen += 1;
        Ok(())
    })
    .unwrap();
    let r = &out.report.per_n[0];
    assert!(r.failures > 0 && r.failures <= 20, "{} failures", r.failures);
    assert_eq!(r.completed + r.failures, 2000);
    assert_eq!(seen, r.completed);
}

#[test]
fn sink_error_stops_the_study() {
    let cfg = config(vec![10], 200, 1);
    let model = DensityModel::logistic();
    let err = run_study_for(&model, &cfg, Execution::Sequential, &mut |_, r| {
        if r.replicate == 50 {
            Err(Error::InvalidArgument("stop".into()))
        } else {
            Ok(())
        }
    })
    .unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run_study(&config(vec![10], 50, 1), Execution::Sequential).is_err());
    assert!(run_study(&config(vec![20, 10], 200, 1), Execution::Sequential).is_err());
    let mut c = config(vec![10], 200, 1);
    c.orders.clear();
    assert!(run_study(&c, Execution::Sequential).is_err());
}

// At n = 20 the Gumbel skewness correction is several times the Monte Carlo
// noise at M = 20000, so the first correction must visibly help.
#[test]
fn gumbel_edgeworth_beats_normal_approximation() {
    let mut cfg = config(vec![20, 40], 20_000, 11);
    cfg.orders = vec![ExpansionOrder::new(1).unwrap(), ExpansionOrder::new(2).unwrap()];
    cfg.quadrature_tol = 1e-10;
    cfg.allow_failed_conditions = true;
    let out = run_study_for(&DensityModel::new(Gumbel), &cfg, Execution::Auto, &mut |_, _| Ok(())).unwrap();
    let floor = out.report.dkw_floor;
    for r in &out.report.per_n {
        let d1 = r.distance(1).unwrap().sup_norm;
        let d2 = r.distance(2).unwrap().sup_norm;
        eprintln!("n={}: d1 {d1:.4}, d2 {d2:.4}, floor {floor:.4}", r.n);
        assert!(d2 + floor < d1, "n={}: d1 {d1}, d2 {d2}, floor {floor}", r.n);
        assert!(r.distance(2).unwrap().l1 < r.distance(1).unwrap().l1);
    }
}

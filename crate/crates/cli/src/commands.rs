use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use mle_expansion::density::{DensityCheck, DerivativeMode};
use mle_expansion::expansion::{compose_check, CoefficientTable, CornishFisher, Edgeworth};
use mle_expansion::mle::{solve_mle, MleResult};
use mle_expansion::moments::{compute_moment_set_with, validate_conditions, ConditionReport};
use mle_expansion::montecarlo::{parse_grid, run_study_with, sample_iid, GridSpec, ReplicationResult, SimulationConfig};
use mle_expansion::{Execution, ExpansionOrder, FamilySpec, MomentSet};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cli::*;
use crate::error::{CliError, CliResult, Status};
use crate::format::{sig, to_json};
use crate::manifest::{OutputSet, RunManifest};

pub fn dispatch(command: Command) -> CliResult<Status> {
    match command {
        Command::Moments(a) => moments(a),
        Command::Cdf(a) => cdf(a),
        Command::Quantile(a) => quantile(a),
        Command::Mle(a) => mle(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
        Command::CollapseCheck(a) => collapse_check(a),
        Command::ComposeCheck(a) => compose(a),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn family_spec(f: &FamilyArgs) -> CliResult<FamilySpec> {
    let spec = FamilySpec::new(f.family.as_deref().unwrap_or("normal")).parse_params(f.params.iter().map(String::as_str))?;
    absolute_table_path(spec)
}

/// Tabulated families are recorded with an absolute table path so that a
/// manifest replays from any directory.
fn absolute_table_path(mut spec: FamilySpec) -> CliResult<FamilySpec> {
    if let Some(p) = spec.params.get("table") {
        let abs = std::fs::canonicalize(p).map_err(|e| usage(format!("table `{p}`: {e}")))?;
        spec.params.insert("table".into(), abs.display().to_string());
    }
    Ok(spec)
}

fn order(k: u8) -> CliResult<ExpansionOrder> {
    ExpansionOrder::new(k).map_err(|_| usage(format!("--order must be in 1..=5, got {k}")))
}

/// Settings from `--manifest` if given, otherwise from the flags.
fn resolve<T: DeserializeOwned>(command: &str, out: &OutputArgs, from_flags: impl FnOnce() -> CliResult<T>) -> CliResult<T> {
    let Some(path) = &out.manifest else {
        return from_flags();
    };
    let m = RunManifest::load(path).map_err(|e| usage(format!("cannot read manifest {}: {e}", path.display())))?;
    if m.command != command {
        return Err(usage(format!(
            "manifest {} records command `{}`, not `{command}`",
            path.display(),
            m.command
        )));
    }
    serde_json::from_value(m.config).map_err(|e| usage(format!("manifest {}: {e}", path.display())))
}

/// Destination of a command's outputs: stdout, or a directory with a manifest.
struct Outputs {
    set: Option<OutputSet>,
    workers: Option<usize>,
}

impl Outputs {
    fn open(out: &OutputArgs) -> CliResult<Self> {
        Ok(Self {
            set: out.out_dir.as_deref().map(OutputSet::create).transpose()?,
            workers: out.workers,
        })
    }

    fn emit(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        match &mut self.set {
            Some(s) => s.write(name, bytes)?,
            None => std::io::stdout().write_all(bytes)?,
        }
        Ok(())
    }

    fn finish<T: Serialize>(self, command: &str, run: &T, seed: Option<u64>) -> CliResult<()> {
        if let Some(set) = self.set {
            set.finish(command, serde_json::to_value(run)?, seed, self.workers)?;
        }
        Ok(())
    }
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| CliError::Run(e.to_string()))
}

fn header(fixed: &[&str]) -> Vec<String> {
    fixed.iter().map(|s| s.to_string()).collect()
}

fn order_columns(k: u8) -> Vec<String> {
    (1..=k).map(|o| format!("value_order{o}")).collect()
}

fn moment_set(family: &FamilySpec, tol: f64, workers: Option<usize>) -> CliResult<MomentSet> {
    let model = family.build()?;
    Ok(compute_moment_set_with(&model, tol, Execution::from_workers(workers))?)
}

#[derive(Debug, Serialize, Deserialize)]
struct MomentsRun {
    family: FamilySpec,
    tol: f64,
    precision: u32,
}

fn moments(a: MomentsArgs) -> CliResult<Status> {
    let run: MomentsRun = resolve("moments", &a.output, || {
        Ok(MomentsRun {
            family: family_spec(&a.family)?,
            tol: a.tol,
            precision: a.output.precision,
        })
    })?;
    let p = run.precision as usize;
    let m = moment_set(&run.family, run.tol, a.output.workers)?;
    let mut out = Outputs::open(&a.output)?;
    if a.json || out.set.is_some() {
        out.emit("moments.json", to_json(&m, p)?.as_bytes())?;
    }
    if !a.json || out.set.is_some() {
        let rows = m.rows().into_iter().map(|(name, v, e)| vec![name, sig(v, p), sig(e, p)]);
        out.emit("moments.csv", &csv_bytes(&header(&["name", "value", "est_error"]), rows)?)?;
    }
    out.finish("moments", &run, None)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize, Deserialize)]
struct CdfRun {
    family: FamilySpec,
    tol: f64,
    n: usize,
    order: u8,
    grid: String,
    clamp_cdf: bool,
    precision: u32,
}

fn cdf(a: CdfArgs) -> CliResult<Status> {
    let run: CdfRun = resolve("cdf", &a.output, || {
        Ok(CdfRun {
            family: family_spec(&a.family)?,
            tol: a.tol,
            n: a.n,
            order: a.order,
            grid: a.grid.clone(),
            clamp_cdf: a.clamp_cdf,
            precision: a.output.precision,
        })
    })?;
    let p = run.precision as usize;
    let k = order(run.order)?.get();
    let grid = parse_grid(&run.grid)?;
    let g = Edgeworth::new(&moment_set(&run.family, run.tol, a.output.workers)?);
    let mut rows = Vec::with_capacity(grid.len());
    for &x in &grid {
        let all = g.all_orders(run.n, x)?;
        let used = &all[..k as usize];
        let mut row = vec![sig(x, p)];
        row.extend(used.iter().map(|v| sig(if run.clamp_cdf { v.clamped() } else { v.value }, p)));
        row.push((used.iter().any(|v| v.out_of_range) as u8).to_string());
        rows.push(row);
    }
    let mut cols = header(&["x"]);
    cols.extend(order_columns(k));
    cols.push("out_of_range_flag".into());
    let mut out = Outputs::open(&a.output)?;
    out.emit("cdf.csv", &csv_bytes(&cols, rows)?)?;
    out.finish("cdf", &run, None)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize, Deserialize)]
struct QuantileRun {
    family: FamilySpec,
    tol: f64,
    n: usize,
    order: u8,
    grid: String,
    precision: u32,
}

fn quantile(a: QuantileArgs) -> CliResult<Status> {
    let run: QuantileRun = resolve("quantile", &a.output, || {
        Ok(QuantileRun {
            family: family_spec(&a.family)?,
            tol: a.tol,
            n: a.n,
            order: a.order,
            grid: a.grid.clone(),
            precision: a.output.precision,
        })
    })?;
    let p = run.precision as usize;
    let k = order(run.order)?.get();
    let grid = parse_grid(&run.grid)?;
    let q = CornishFisher::new(&moment_set(&run.family, run.tol, a.output.workers)?);
    let mut rows = Vec::with_capacity(grid.len());
    for &v in &grid {
        let all = q.all_orders(run.n, v)?;
        let mut row = vec![sig(v, p)];
        row.extend(all[..k as usize].iter().map(|z| sig(*z, p)));
        rows.push(row);
    }
    let mut cols = header(&["v"]);
    cols.extend(order_columns(k));
    let mut out = Outputs::open(&a.output)?;
    out.emit("quantile.csv", &csv_bytes(&cols, rows)?)?;
    out.finish("quantile", &run, None)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize, Deserialize)]
struct MleRun {
    family: FamilySpec,
    tol: f64,
    data: Option<PathBuf>,
    n: Option<usize>,
    seed: u64,
    theta: f64,
    precision: u32,
}

#[derive(Debug, Serialize)]
struct MleReport {
    n: usize,
    #[serde(flatten)]
    fit: MleResult,
}

fn read_numbers(path: &Path) -> CliResult<Vec<f64>> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| usage(format!("{}: `{t}` is not a number", path.display()))))
        .collect()
}

fn mle(a: MleArgs) -> CliResult<Status> {
    let run: MleRun = resolve("mle", &a.output, || {
        let data = match &a.data {
            Some(p) if p != Path::new("-") => Some(std::fs::canonicalize(p).map_err(|e| usage(format!("{}: {e}", p.display())))?),
            other => other.clone(),
        };
        if data.is_none() && a.n.is_none() {
            return Err(usage("mle needs --data FILE or --n N"));
        }
        Ok(MleRun {
            family: family_spec(&a.family)?,
            tol: a.tol,
            data,
            n: a.n,
            seed: a.seed,
            theta: a.theta,
            precision: a.output.precision,
        })
    })?;
    let p = run.precision as usize;
    let model = run.family.build()?;
    let sample = match (&run.data, run.n) {
        (Some(path), _) => read_numbers(path)?,
        (None, Some(n)) => sample_iid(&model.shifted(run.theta), n, run.seed)?,
        (None, None) => return Err(usage("mle needs --data FILE or --n N")),
    };
    let fit = solve_mle(&sample, &model, run.tol)?;
    let report = MleReport { n: sample.len(), fit };
    let mut out = Outputs::open(&a.output)?;
    out.emit("mle.json", to_json(&report, p)?.as_bytes())?;
    let seed = run.data.is_none().then_some(run.seed);
    out.finish("mle", &run, seed)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize, Deserialize)]
struct SimulateRun {
    study: SimulationConfig,
    precision: u32,
}

const DEFAULT_N_GRID: [usize; 5] = [25, 50, 100, 200, 400];
const DEFAULT_REPLICATIONS: usize = 10_000;
const DEFAULT_SEED: u64 = 1;

fn simulation_config(a: &SimulateArgs) -> CliResult<SimulationConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            toml::from_str::<SimulationConfig>(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => SimulationConfig::new(FamilySpec::new("normal"), DEFAULT_N_GRID.to_vec(), DEFAULT_REPLICATIONS, DEFAULT_SEED),
    };
    if a.family.family.is_some() {
        cfg.family = family_spec(&a.family)?;
    } else if !a.family.params.is_empty() {
        cfg.family = cfg.family.clone().parse_params(a.family.params.iter().map(String::as_str))?;
    }
    cfg.family = absolute_table_path(cfg.family)?;
    if let Some(n) = &a.n {
        cfg.n_grid = n.clone();
    }
    if let Some(m) = a.reps {
        cfg.replications = m;
    }
    if let Some(s) = a.seed {
        cfg.base_seed = s;
    }
    if let Some(k) = a.order {
        cfg.orders = order(k)?.up_to().collect();
    }
    if let Some(g) = &a.grid {
        cfg.eval_grid = GridSpec::Range(g.clone());
    }
    if let Some(t) = a.tol {
        cfg.solver_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Streams per-replicate rows into `remainders_<n>.csv`.
struct RemainderFiles<'a> {
    dir: &'a Path,
    precision: usize,
    current: Option<(usize, csv::Writer<File>)>,
    written: Vec<String>,
}

impl RemainderFiles<'_> {
    fn file_name(n: usize) -> String {
        format!("remainders_{n}.csv")
    }

    fn push(&mut self, n: usize, r: &ReplicationResult) -> mle_expansion::Result<()> {
        if self.current.as_ref().map(|c| c.0) != Some(n) {
            self.close()?;
            let name = Self::file_name(n);
            let mut w = csv::Writer::from_path(self.dir.join(&name))?;
            let mut cols = header(&["replicate", "seed", "theta_hat", "standardized", "multimodal"]);
            cols.extend((1..=5).map(|k| format!("remainder_{k}")));
            w.write_record(&cols)?;
            self.written.push(name);
            self.current = Some((n, w));
        }
        let p = self.precision;
        let w = &mut self.current.as_mut().expect("open writer").1;
        let mut row = vec![
            r.replicate.to_string(),
            r.seed.to_string(),
            sig(r.theta_hat, p),
            sig(r.standardized, p),
            r.multimodal.to_string(),
        ];
        row.extend(r.remainders.iter().map(|g| sig(*g, p)));
        w.write_record(&row)?;
        Ok(())
    }

    fn close(&mut self) -> mle_expansion::Result<()> {
        if let Some((_, mut w)) = self.current.take() {
            w.flush()?;
        }
        Ok(())
    }
}

fn simulate(a: SimulateArgs) -> CliResult<Status> {
    let run: SimulateRun = resolve("simulate", &a.output, || {
        Ok(SimulateRun {
            study: simulation_config(&a)?,
            precision: a.output.precision,
        })
    })?;
    if a.output.out_dir.is_none() {
        return Err(usage("simulate writes several files and needs --out-dir DIR"));
    }
    run.study.validate()?;
    let p = run.precision as usize;
    let mut out = Outputs::open(&a.output)?;
    let set = out.set.as_mut().expect("output directory");
    let dir = set.path("");
    let mut files = RemainderFiles {
        dir: &dir,
        precision: p,
        current: None,
        written: Vec::new(),
    };
    let result = run_study_with(&run.study, Execution::from_workers(a.output.workers), &mut |n, r| files.push(n, r));
    files.close()?;
    let study = result?;
    for name in &files.written {
        set.register(name);
    }

    set.write("report.json", to_json(&study.report, p)?.as_bytes())?;
    for t in &study.tables {
        let k_cols: Vec<String> = t.predictions.iter().map(|(o, _)| format!("value_order{o}")).collect();
        let mut cols = header(&["x", "ecdf_left", "ecdf_right"]);
        cols.extend(k_cols);
        let rows = (0..t.grid.len()).map(|i| {
            let mut row = vec![sig(t.grid[i], p), sig(t.left[i], p), sig(t.right[i], p)];
            row.extend(t.predictions.iter().map(|(_, col)| sig(col[i], p)));
            row
        });
        set.write(&format!("ecdf_{}.csv", t.n), &csv_bytes(&cols, rows)?)?;

        let mut long = Vec::with_capacity(t.grid.len() * (t.predictions.len() + 1));
        for (i, &x) in t.grid.iter().enumerate() {
            long.push(vec![sig(x, p), "ecdf".into(), sig(t.right[i], p)]);
        }
        for (o, col) in &t.predictions {
            for (i, &x) in t.grid.iter().enumerate() {
                long.push(vec![sig(x, p), o.to_string(), sig(col[i], p)]);
            }
        }
        set.write(&format!("plot_{}.csv", t.n), &csv_bytes(&header(&["x", "order", "value"]), long)?)?;
    }
    out.finish("simulate", &run, Some(run.study.base_seed))?;
    eprintln!(
        "mlexp: {} sample sizes x {} replications; DKW floor {}",
        run.study.n_grid.len(),
        run.study.replications,
        sig(study.report.dkw_floor, 4)
    );
    Ok(Status::Ok)
}

#[derive(Debug, Serialize, Deserialize)]
struct ValidateRun {
    family: FamilySpec,
    tol: f64,
    precision: u32,
}

#[derive(Debug, Serialize)]
struct ValidationReport {
    family: String,
    derivative_mode: DerivativeMode,
    symmetric: bool,
    density: DensityCheck,
    density_ok: bool,
    conditions: ConditionReport,
    moments: Option<MomentSet>,
    moment_error: Option<String>,
    invariant_violations: Vec<String>,
    passed: bool,
}

/// Derivative-transcription tolerance; numeric fallbacks are only as good as
/// their differences.
fn derivative_tolerance(mode: DerivativeMode) -> f64 {
    match mode {
        DerivativeMode::Analytic => 1e-6,
        DerivativeMode::NumericFallback => 1e-3,
    }
}

fn validate(a: ValidateArgs) -> CliResult<Status> {
    let run: ValidateRun = resolve("validate", &a.output, || {
        Ok(ValidateRun {
            family: family_spec(&a.family)?,
            tol: a.tol,
            precision: a.output.precision,
        })
    })?;
    let model = run.family.build()?;
    let mode = model.derivative_mode();
    let density = model.check_invariants(run.tol.max(1e-12));
    let density_ok = density.passes(1e-6, derivative_tolerance(mode));
    let conditions = validate_conditions(&model);
    let (moments, moment_error) = match compute_moment_set_with(&model, run.tol, Execution::from_workers(a.output.workers)) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let invariant_violations = moments
        .as_ref()
        .map(|m| m.invariant_violations(100.0 * run.tol))
        .unwrap_or_default();
    let passed = density_ok && !conditions.any_fail() && moment_error.is_none() && invariant_violations.is_empty();
    let report = ValidationReport {
        family: model.name(),
        derivative_mode: mode,
        symmetric: model.is_symmetric(),
        density,
        density_ok,
        conditions,
        moments,
        moment_error,
        invariant_violations,
        passed,
    };
    let mut out = Outputs::open(&a.output)?;
    out.emit("validate.json", to_json(&report, run.precision as usize)?.as_bytes())?;
    out.finish("validate", &run, None)?;
    Ok(if passed {
        Status::Ok
    } else {
        Status::Failed(format!("family `{}` did not pass validation", report.family))
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct CollapseRun {
    family: FamilySpec,
    tol: f64,
    threshold: f64,
    precision: u32,
}

fn collapse_check(a: CollapseArgs) -> CliResult<Status> {
    let run: CollapseRun = resolve("collapse-check", &a.output, || {
        Ok(CollapseRun {
            family: family_spec(&a.family)?,
            tol: a.tol,
            threshold: a.threshold,
            precision: a.output.precision,
        })
    })?;
    let p = run.precision as usize;
    let m = moment_set(&run.family, run.tol, a.output.workers)?;
    let tables = [
        ("edgeworth", CoefficientTable::edgeworth(&m.eta)),
        ("cornish-fisher", CoefficientTable::cornish_fisher(&m.eta)),
    ];
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (name, t) in &tables {
        for (o, pw, c) in t.entries() {
            worst = worst.max(c.abs());
            rows.push(vec![name.to_string(), o.to_string(), pw.to_string(), sig(c, p)]);
        }
    }
    let mut out = Outputs::open(&a.output)?;
    out.emit("collapse.csv", &csv_bytes(&header(&["table", "order", "power", "coefficient"]), rows)?)?;
    out.finish("collapse-check", &run, None)?;
    eprintln!("mlexp: max |coefficient| = {} (threshold {})", sig(worst, p), sig(run.threshold, p));
    Ok(if worst < run.threshold {
        Status::Ok
    } else {
        Status::Failed(format!("max |coefficient| {} is not below {}", sig(worst, p), sig(run.threshold, p)))
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ComposeRun {
    family: FamilySpec,
    tol: f64,
    n: usize,
    order: u8,
    grid: String,
    precision: u32,
}

fn compose(a: ComposeArgs) -> CliResult<Status> {
    let run: ComposeRun = resolve("compose-check", &a.output, || {
        Ok(ComposeRun {
            family: family_spec(&a.family)?,
            tol: a.tol,
            n: a.n,
            order: a.order,
            grid: a.grid.clone(),
            precision: a.output.precision,
        })
    })?;
    let k = order(run.order)?;
    let v = parse_grid(&run.grid)?;
    let m = moment_set(&run.family, run.tol, a.output.workers)?;
    let report = compose_check(&m, run.n, k, &v)?;
    let mut out = Outputs::open(&a.output)?;
    out.emit("compose.json", to_json(&report, run.precision as usize)?.as_bytes())?;
    out.finish("compose-check", &run, None)?;
    Ok(match report.suspected_block {
        None => Status::Ok,
        Some(b) => Status::Failed(format!("residual decays too slowly from order {b} on")),
    })
}

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use tracing::info;

use super::config::{CampaignConfig, Method, RetrainMode};
use super::{csv_error, ensure_dir};
use crate::bench::{make_instance, FunctionId, ObjectiveSpec};
use crate::de::{optimize, ControlParams, GenerationRecord, RunConfig, RunTrace};
use crate::error::{Error, Result};
use crate::metric::compute_alpha;
use crate::predictor::{append_and_retrain, run_predictive, Predictor, TrainingRecord, TrainingStore};
use crate::shade::optimize_shade;
use crate::stats::wilcoxon;

/// A matched test: every method runs on the same instance with the same seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TestKey {
    pub function: FunctionId,
    pub dim: usize,
    pub instance: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodResult {
    pub alpha: f64,
    pub n_g: u64,
    /// Every evaluation charged to the instance, feature sampling included.
    pub evaluations: u64,
    pub final_best: f64,
    pub params: Option<ControlParams>,
    #[serde(skip)]
    pub curve: Vec<GenerationRecord>,
}

/// A method's result on one key, or the error it failed with.
pub type Outcome = std::result::Result<MethodResult, String>;

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub key: TestKey,
    /// Aligned with [`ComparisonReport::methods`].
    pub outcomes: Vec<Outcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WilcoxonRow {
    pub method_a: String,
    pub method_b: String,
    pub n: usize,
    pub w: f64,
    pub p: f64,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub methods: Vec<Method>,
    pub rows: Vec<ComparisonRow>,
    pub wilcoxon: Vec<WilcoxonRow>,
    /// The store after predictive runs were appended, when any ran.
    pub updated_store: Option<TrainingStore>,
}

impl ComparisonReport {
    pub fn method_index(&self, m: Method) -> Option<usize> {
        self.methods.iter().position(|&x| x == m)
    }

    pub fn wilcoxon_for(&self, a: Method, b: Method) -> Option<&WilcoxonRow> {
        self.wilcoxon
            .iter()
            .find(|r| r.method_a == a.name() && r.method_b == b.name())
    }
}

fn keys(cfg: &CampaignConfig) -> Vec<TestKey> {
    let mut keys = Vec::new();
    for spec in cfg.specs() {
        for instance in cfg.evaluation_instances() {
            for &seed in &cfg.seeds {
                keys.push(TestKey {
                    function: spec.function,
                    dim: spec.dim,
                    instance,
                    seed,
                });
            }
        }
    }
    keys.sort();
    keys
}

fn result_from_trace(trace: &RunTrace, params: Option<ControlParams>) -> Result<MethodResult> {
    let score = compute_alpha(trace)?;
    Ok(MethodResult {
        alpha: score.alpha,
        n_g: score.n_g,
        evaluations: trace.total_evaluations(),
        final_best: trace.final_best(),
        params,
        curve: trace.improvements(),
    })
}

fn run_fixed(key: &TestKey, method: Method, params: Option<ControlParams>, budget: u64) -> Result<MethodResult> {
    let mut instance = make_instance(ObjectiveSpec::new(key.function, key.dim), key.instance)?;
    let cfg = RunConfig { budget, seed: key.seed };
    match method {
        Method::Shade => {
            let trace = optimize_shade(&mut instance, &cfg)?;
            result_from_trace(&trace, None)
        }
        _ => {
            let params = params.unwrap_or_else(|| ControlParams::literature(key.dim));
            let trace = optimize(&mut instance, &params, &cfg)?;
            result_from_trace(&trace, Some(params))
        }
    }
}

fn run_predictive_key(key: &TestKey, predictor: &Predictor, cfg: &CampaignConfig) -> Result<(MethodResult, TrainingRecord)> {
    let mut instance = make_instance(ObjectiveSpec::new(key.function, key.dim), key.instance)?;
    let run = run_predictive(&mut instance, predictor, cfg.sigma, cfg.budget, key.seed)?;
    debug_assert_eq!(run.trace.total_evaluations(), instance_evals(&instance));
    let result = result_from_trace(&run.trace, Some(run.recommendation.params))?;
    Ok((result, run.record))
}

fn instance_evals(instance: &crate::bench::ObjectiveInstance) -> u64 {
    use crate::bench::Objective;
    instance.evaluations()
}

/// Pairs reported in the Wilcoxon table: predictive against every other
/// method when present, otherwise every ordered pair in listing order.
pub fn method_pairs(methods: &[Method]) -> Vec<(usize, usize)> {
    if let Some(p) = methods.iter().position(|&m| m == Method::Predictive) {
        (0..methods.len()).filter(|&i| i != p).map(|i| (p, i)).collect()
    } else {
        (0..methods.len())
            .flat_map(|i| (i + 1..methods.len()).map(move |j| (i, j)))
            .collect()
    }
}

/// Signed-rank test on `α_a − α_b` over the keys where both methods succeeded.
pub fn pair_wilcoxon(rows: &[ComparisonRow], a: usize, b: usize, names: (&str, &str)) -> Result<WilcoxonRow> {
    let diffs: Vec<f64> = rows
        .iter()
        .filter_map(|r| match (&r.outcomes[a], &r.outcomes[b]) {
            (Ok(x), Ok(y)) => Some(x.alpha - y.alpha),
            _ => None,
        })
        .collect();
    if diffs.is_empty() {
        return Err(Error::Pairing(format!("no successful pairs for {} vs {}", names.0, names.1)));
    }
    let res = wilcoxon(&diffs)?;
    Ok(WilcoxonRow {
        method_a: names.0.to_string(),
        method_b: names.1.to_string(),
        n: res.n,
        w: res.w,
        p: res.p_value,
    })
}

fn wilcoxon_table(methods: &[Method], rows: &[ComparisonRow]) -> Result<Vec<WilcoxonRow>> {
    method_pairs(methods)
        .into_iter()
        .map(|(a, b)| pair_wilcoxon(rows, a, b, (methods[a].name(), methods[b].name())))
        .collect()
}

fn dedup_methods(methods: &[Method]) -> Vec<Method> {
    let mut out: Vec<Method> = Vec::new();
    for &m in methods {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

/// Runs every requested method on every test key and writes the report files.
pub fn cmd_compare(cfg: &CampaignConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    let methods = dedup_methods(&cfg.methods);
    let store = if methods.iter().any(|m| m.needs_store()) {
        let path = cfg.store_path();
        let store = TrainingStore::read_jsonl(&path)?;
        if store.is_empty() {
            return Err(Error::Pairing(format!("store {} has no records", path.display())));
        }
        Some(store)
    } else {
        None
    };
    let keys = keys(cfg);
    let opts = cfg.recommend_options();
    info!(keys = keys.len(), methods = methods.len(), "comparing");

    let best_of_training = match &store {
        Some(s) => Some(Predictor::fit(s, 1, &opts)?.recommend(&s.records()[0].features).params),
        None => None,
    };

    let mut columns: Vec<Vec<Outcome>> = Vec::with_capacity(methods.len());
    let mut updated_store = None;
    for &method in &methods {
        let column: Vec<Outcome> = match method {
            Method::Predictive => {
                let mut store = store.clone().expect("store loaded for predictive");
                let (column, _) = predictive_column(cfg, &keys, &mut store)?;
                updated_store = Some(store);
                column
            }
            _ => {
                let params = match method {
                    Method::BestOfTraining => best_of_training,
                    _ => None,
                };
                cfg.with_pool(|| {
                    keys.par_iter()
                        .map(|k| {
                            let params = params.or_else(|| (method == Method::Literature).then(|| ControlParams::literature(k.dim)));
                            run_fixed(k, method, params, cfg.budget).map_err(|e| e.to_string())
                        })
                        .collect()
                })?
            }
        };
        columns.push(column);
    }

    let rows: Vec<ComparisonRow> = keys
        .iter()
        .enumerate()
        .map(|(i, &key)| ComparisonRow {
            key,
            outcomes: columns.iter().map(|c| c[i].clone()).collect(),
        })
        .collect();
    let wilcoxon = wilcoxon_table(&methods, &rows)?;
    let report = ComparisonReport {
        methods,
        rows,
        wilcoxon,
        updated_store,
    };
    write_report(cfg, &report)?;
    Ok(report)
}

fn predictive_column(
    cfg: &CampaignConfig,
    keys: &[TestKey],
    store: &mut TrainingStore,
) -> Result<(Vec<Outcome>, usize)> {
    let opts = cfg.recommend_options();
    let mut predictor = Predictor::fit(store, cfg.kappa, &opts)?;
    match cfg.retrain {
        RetrainMode::PerRun => {
            let mut column = Vec::with_capacity(keys.len());
            for key in keys {
                match run_predictive_key(key, &predictor, cfg) {
                    Ok((result, record)) => {
                        predictor = append_and_retrain(store, record, cfg.kappa, &opts)?;
                        column.push(Ok(result));
                    }
                    Err(e) => column.push(Err(e.to_string())),
                }
            }
            Ok((column, keys.len()))
        }
        RetrainMode::PerBatch => {
            let results: Vec<Result<(MethodResult, TrainingRecord)>> =
                cfg.with_pool(|| keys.par_iter().map(|k| run_predictive_key(k, &predictor, cfg)).collect())?;
            let mut column = Vec::with_capacity(keys.len());
            let mut batch = Vec::new();
            for r in results {
                match r {
                    Ok((result, record)) => {
                        batch.push(record);
                        column.push(Ok(result));
                    }
                    Err(e) => column.push(Err(e.to_string())),
                }
            }
            store.append(batch)?;
            Ok((column, 1))
        }
    }
}

fn write_report(cfg: &CampaignConfig, report: &ComparisonReport) -> Result<()> {
    ensure_dir(&cfg.out)?;
    write_alpha_csv(&cfg.out.join("alpha.csv"), report)?;
    write_wilcoxon_csv(&cfg.out.join("wilcoxon.csv"), &report.wilcoxon)?;
    write_curves(&cfg.out.join("curves"), report)?;
    if let Some(store) = &report.updated_store {
        store.write_jsonl(&cfg.out.join("store_updated.jsonl"))?;
    }
    Ok(())
}

const KEY_COLUMNS: [&str; 4] = ["function", "dim", "instance", "seed"];

fn write_alpha_csv(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<String> = KEY_COLUMNS.iter().map(|s| s.to_string()).collect();
    for m in &report.methods {
        header.push(format!("{}_alpha", m.name()));
        header.push(format!("{}_evals", m.name()));
    }
    header.push("failures".into());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for row in &report.rows {
        let mut rec = vec![
            row.key.function.name().to_string(),
            row.key.dim.to_string(),
            row.key.instance.to_string(),
            row.key.seed.to_string(),
        ];
        let mut failures = Vec::new();
        for (m, o) in report.methods.iter().zip(&row.outcomes) {
            match o {
                Ok(r) => {
                    rec.push(r.alpha.to_string());
                    rec.push(r.evaluations.to_string());
                }
                Err(e) => {
                    rec.push(String::new());
                    rec.push(String::new());
                    failures.push(format!("{}: {}", m.name(), e));
                }
            }
        }
        rec.push(failures.join("; "));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_wilcoxon_csv(path: &Path, rows: &[WilcoxonRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["method_a", "method_b", "n", "W", "p"])
        .map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record([r.method_a.clone(), r.method_b.clone(), r.n.to_string(), r.w.to_string(), r.p.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_curves(dir: &Path, report: &ComparisonReport) -> Result<()> {
    ensure_dir(dir)?;
    let mut groups: BTreeMap<(FunctionId, usize, u64), Vec<&ComparisonRow>> = BTreeMap::new();
    for row in &report.rows {
        groups
            .entry((row.key.function, row.key.dim, row.key.seed))
            .or_default()
            .push(row);
    }
    for ((function, dim, seed), rows) in groups {
        let path = dir.join(format!("{}_{}_{}.csv", function.name(), dim, seed));
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(["method", "instance", "evals", "best"])
            .map_err(|e| csv_error(&path, e))?;
        for row in rows {
            for (m, o) in report.methods.iter().zip(&row.outcomes) {
                let Ok(r) = o else { continue };
                for g in &r.curve {
                    w.write_record([
                        m.name().to_string(),
                        row.key.instance.to_string(),
                        g.evaluations.to_string(),
                        g.best.to_string(),
                    ])
                    .map_err(|e| csv_error(&path, e))?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Parses an `alpha.csv` back into methods and rows. Curves and parameters
/// are not stored there and come back empty.
pub fn read_alpha_csv(path: &Path) -> Result<(Vec<Method>, Vec<ComparisonRow>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    if header.len() < 5 || header.iter().take(4).ne(KEY_COLUMNS.iter().copied()) {
        return Err(parse_err(1, "unexpected alpha.csv header".into()));
    }
    let methods = header
        .iter()
        .skip(4)
        .filter_map(|h| h.strip_suffix("_alpha"))
        .map(str::parse)
        .collect::<Result<Vec<Method>>>()?;
    if header.len() != 4 + 2 * methods.len() + 1 {
        return Err(parse_err(1, "alpha.csv header does not pair alpha/evals columns".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let num = |j: usize| -> Result<u64> { field(j).parse().map_err(|e| parse_err(line, format!("column {j}: {e}"))) };
        let key = TestKey {
            function: field(0).parse()?,
            dim: num(1)? as usize,
            instance: num(2)?,
            seed: num(3)?,
        };
        let mut outcomes = Vec::with_capacity(methods.len());
        for m in 0..methods.len() {
            let a = field(4 + 2 * m);
            if a.is_empty() {
                outcomes.push(Err("failed".to_string()));
                continue;
            }
            let alpha: f64 = a.parse().map_err(|e| parse_err(line, format!("alpha: {e}")))?;
            outcomes.push(Ok(MethodResult {
                alpha,
                n_g: 0,
                evaluations: num(5 + 2 * m)?,
                final_best: f64::NAN,
                params: None,
                curve: Vec::new(),
            }));
        }
        rows.push(ComparisonRow { key, outcomes });
    }
    Ok((methods, rows))
}

/// Re-derives `wilcoxon.csv` from `<dir>/alpha.csv`.
pub fn cmd_report(dir: &Path) -> Result<Vec<WilcoxonRow>> {
    let (methods, rows) = read_alpha_csv(&dir.join("alpha.csv"))?;
    let table = wilcoxon_table(&methods, &rows)?;
    write_wilcoxon_csv(&dir.join("wilcoxon.csv"), &table)?;
    Ok(table)
}

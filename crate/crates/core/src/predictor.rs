//! Global memory of `(p, β, α)` observations and the cluster-based recommender.
//!
//! Records are clustered on `β`; within each cluster the records are ranked by
//! α and the component-wise mean parameters of the best `max(1, ⌈m/10⌉)` are
//! the recommendation for new functions classified into that cluster.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::bench::{make_instance, ObjectiveInstance, ObjectiveSpec};
use crate::cluster::{ClusterModel, FitOptions};
use crate::de::{optimize, ControlParams, RunConfig, RunTrace};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureConfig, FeatureVector};
use crate::metric::{compute_alpha, PerformanceScore};
use crate::sampling::{lhs_params, ParamRanges, SeededRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub function_id: String,
    pub dim: usize,
    pub instance_seed: u64,
    pub run_seed: u64,
    pub sigma: usize,
    /// Unix seconds at creation.
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingRecord {
    pub params: ControlParams,
    pub features: FeatureVector,
    pub alpha: f64,
    pub meta: RecordMeta,
}

/// On-disk layout of one record; field order is the JSON-lines column order.
#[derive(Serialize, Deserialize)]
struct StoreLine {
    p1: f64,
    p2: f64,
    p3: usize,
    beta1: f64,
    beta2: f64,
    beta3: f64,
    alpha: f64,
    function_id: String,
    dim: usize,
    instance_seed: u64,
    run_seed: u64,
    sigma: usize,
    timestamp: u64,
}

impl TrainingRecord {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.alpha.is_finite() {
            return Err(Error::contract("record alpha must be finite"));
        }
        if !self.features.is_finite() {
            return Err(Error::contract("record features must be finite"));
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> String {
        let line = StoreLine {
            p1: self.params.crossover,
            p2: self.params.weight,
            p3: self.params.population,
            beta1: self.features.beta1,
            beta2: self.features.beta2,
            beta3: self.features.beta3,
            alpha: self.alpha,
            function_id: self.meta.function_id.clone(),
            dim: self.meta.dim,
            instance_seed: self.meta.instance_seed,
            run_seed: self.meta.run_seed,
            sigma: self.meta.sigma,
            timestamp: self.meta.timestamp,
        };
        serde_json::to_string(&line).expect("record serializes")
    }

    pub fn from_json_line(s: &str) -> std::result::Result<Self, String> {
        let l: StoreLine = serde_json::from_str(s).map_err(|e| e.to_string())?;
        Ok(TrainingRecord {
            params: ControlParams::new(l.p1, l.p2, l.p3),
            features: FeatureVector::new(l.beta1, l.beta2, l.beta3),
            alpha: l.alpha,
            meta: RecordMeta {
                function_id: l.function_id,
                dim: l.dim,
                instance_seed: l.instance_seed,
                run_seed: l.run_seed,
                sigma: l.sigma,
                timestamp: l.timestamp,
            },
        })
    }
}

/// Append-only record list. `version` counts append batches.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingStore {
    records: Vec<TrainingRecord>,
    version: u64,
}

impl TrainingStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[TrainingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// Appends a batch; an empty batch is a no-op.
    pub fn append(&mut self, batch: impl IntoIterator<Item = TrainingRecord>) -> Result<()> {
        let batch: Vec<TrainingRecord> = batch.into_iter().collect();
        if batch.is_empty() {
            return Ok(());
        }
        for r in &batch {
            r.validate()?;
        }
        self.records.extend(batch);
        self.version += 1;
        Ok(())
    }

    /// Highest-α record, earliest on ties.
    pub fn best_record(&self) -> Option<&TrainingRecord> {
        self.records
            .iter()
            .reduce(|best, r| if r.alpha > best.alpha { r } else { best })
    }

    pub fn features(&self) -> Vec<FeatureVector> {
        self.records.iter().map(|r| r.features).collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_json_line());
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(self.to_jsonl().as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Appends records to an existing JSON-lines file without rewriting it.
    pub fn append_jsonl(path: &Path, records: &[TrainingRecord]) -> Result<()> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for r in records {
            writeln!(w, "{}", r.to_json_line()).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Loads a store; a non-empty file counts as one append batch.
    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut records = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec = TrainingRecord::from_json_line(&line).map_err(|message| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            })?;
            records.push(rec);
        }
        let mut store = TrainingStore::new();
        store.append(records)?;
        Ok(store)
    }
}

pub fn now_timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Off-line training campaign over `(spec, instance, param set, seed)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingPlan {
    pub specs: Vec<ObjectiveSpec>,
    pub instances: Vec<u64>,
    pub n_param_sets: usize,
    pub ranges: ParamRanges,
    pub sigma: usize,
    pub seeds: Vec<u64>,
    pub budget: u64,
    /// Seeds the per-(function, dim, instance) parameter design.
    pub design_seed: u64,
}

impl TrainingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::contract("training suite is empty"));
        }
        if self.budget <= self.sigma as u64 {
            return Err(Error::contract(format!(
                "budget {} must exceed sigma {}",
                self.budget, self.sigma
            )));
        }
        Ok(())
    }
}

/// Extracts β with σ evaluations, runs DE with the remaining budget and
/// scores α over the combined cost.
pub fn scored_run(
    instance: &mut ObjectiveInstance,
    params: &ControlParams,
    sigma: usize,
    budget: u64,
    seed: u64,
) -> Result<(FeatureVector, RunTrace, PerformanceScore)> {
    if budget <= sigma as u64 {
        return Err(Error::contract(format!("budget {budget} must exceed sigma {sigma}")));
    }
    let features = extract_features(instance, &FeatureConfig { sigma, seed })?;
    let trace = optimize(
        instance,
        params,
        &RunConfig {
            budget: budget - sigma as u64,
            seed,
        },
    )?;
    let score = compute_alpha(&trace)?;
    Ok((features, trace, score))
}

fn param_design(spec: &ObjectiveSpec, instance: u64, plan: &TrainingPlan) -> Result<Vec<ControlParams>> {
    let label = format!("params/{}/{}/{}", spec.function.name(), spec.dim, instance);
    let mut rng = SeededRng::substream(plan.design_seed, &label);
    lhs_params(plan.n_param_sets, &plan.ranges, &mut rng)
}

/// Runs the plan on the current rayon pool. Record order is
/// spec, instance, parameter set, seed regardless of scheduling.
pub fn build_training_set(plan: &TrainingPlan) -> Result<TrainingStore> {
    plan.validate()?;
    let mut work = Vec::new();
    for spec in &plan.specs {
        for &instance in &plan.instances {
            let design = param_design(spec, instance, plan)?;
            for params in design {
                for &seed in &plan.seeds {
                    work.push((*spec, instance, params, seed));
                }
            }
        }
    }
    let timestamp = now_timestamp();
    let records = work
        .par_iter()
        .map(|&(spec, instance_seed, params, seed)| {
            let mut instance = make_instance(spec, instance_seed)?;
            let (features, _, score) = scored_run(&mut instance, &params, plan.sigma, plan.budget, seed)?;
            Ok(TrainingRecord {
                params,
                features,
                alpha: score.alpha,
                meta: RecordMeta {
                    function_id: spec.function.name().to_string(),
                    dim: spec.dim,
                    instance_seed,
                    run_seed: seed,
                    sigma: plan.sigma,
                    timestamp,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut store = TrainingStore::new();
    store.append(records)?;
    Ok(store)
}

/// Size of the top set for a cluster of `m` records.
pub fn top_set_size(m: usize) -> usize {
    m.div_ceil(10).max(1)
}

/// Component-wise mean of the given parameters; the population is rounded
/// half away from zero and floored at the minimum population.
pub fn mean_params<'a>(params: impl IntoIterator<Item = &'a ControlParams>) -> Option<ControlParams> {
    let (mut cr, mut f, mut np, mut n) = (0.0, 0.0, 0.0, 0usize);
    for p in params {
        cr += p.crossover;
        f += p.weight;
        np += p.population as f64;
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let n = n as f64;
    Some(ControlParams {
        crossover: cr / n,
        weight: f / n,
        population: ((np / n).round() as usize).max(ControlParams::MIN_POPULATION),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecommendOptions {
    pub fit: FitOptions,
    /// Seeds k-means++.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSummary {
    /// Record indices in the cluster, best α first (stable on ties).
    pub members: Vec<usize>,
    pub top: Vec<usize>,
    pub params: Option<ControlParams>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recommendation {
    pub params: ControlParams,
    pub cluster: usize,
    /// Record indices the mean was taken over.
    pub top: Vec<usize>,
}

/// A clustering of a store snapshot with the per-cluster recommendations.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictor {
    pub model: ClusterModel,
    pub clusters: Vec<ClusterSummary>,
    global: ClusterSummary,
    pub store_version: u64,
}

fn ranked_summary(store: &TrainingStore, mut members: Vec<usize>) -> ClusterSummary {
    let records = store.records();
    members.sort_by(|&a, &b| records[b].alpha.total_cmp(&records[a].alpha));
    let top: Vec<usize> = members.iter().take(top_set_size(members.len())).copied().collect();
    let params = if members.is_empty() {
        None
    } else {
        mean_params(top.iter().map(|&i| &records[i].params))
    };
    ClusterSummary { members, top, params }
}

impl Predictor {
    /// Fits κ clusters on every stored β. κ above the record count is clamped.
    pub fn fit(store: &TrainingStore, kappa: usize, opts: &RecommendOptions) -> Result<Self> {
        if store.is_empty() {
            return Err(Error::NoData);
        }
        if kappa == 0 {
            return Err(Error::contract("kappa must be >= 1"));
        }
        if kappa > store.len() {
            warn!(kappa, records = store.len(), "kappa exceeds record count; clamping");
        }
        let mut rng = SeededRng::substream(opts.seed, "cluster");
        let model = ClusterModel::fit(&store.features(), kappa, &opts.fit, &mut rng)?;
        let mut members = vec![Vec::new(); model.k];
        for (i, r) in store.records().iter().enumerate() {
            members[model.classify(&r.features)].push(i);
        }
        let clusters = members.into_iter().map(|m| ranked_summary(store, m)).collect();
        let global = ranked_summary(store, (0..store.len()).collect());
        Ok(Predictor {
            model,
            clusters,
            global,
            store_version: store.version(),
        })
    }

    /// Parameters for a function with features `beta`. A cluster without
    /// members falls back to the top set of the whole store.
    pub fn recommend(&self, beta: &FeatureVector) -> Recommendation {
        let cluster = self.model.classify(beta);
        let summary = match &self.clusters[cluster] {
            s if s.params.is_some() => s,
            _ => &self.global,
        };
        Recommendation {
            params: summary.params.expect("non-empty store"),
            cluster,
            top: summary.top.clone(),
        }
    }
}

pub fn recommend(
    store: &TrainingStore,
    kappa: usize,
    beta: &FeatureVector,
    opts: &RecommendOptions,
) -> Result<Recommendation> {
    Ok(Predictor::fit(store, kappa, opts)?.recommend(beta))
}

#[derive(Clone, Debug)]
pub struct PredictiveRun {
    pub trace: RunTrace,
    pub score: PerformanceScore,
    pub record: TrainingRecord,
    pub recommendation: Recommendation,
}

/// Samples fresh features (σ evaluations), picks parameters with `predictor`
/// and optimizes with the remaining `budget − σ` evaluations.
pub fn run_predictive(
    instance: &mut ObjectiveInstance,
    predictor: &Predictor,
    sigma: usize,
    budget: u64,
    seed: u64,
) -> Result<PredictiveRun> {
    if budget <= sigma as u64 {
        return Err(Error::contract(format!("budget {budget} must exceed sigma {sigma}")));
    }
    let features = extract_features(instance, &FeatureConfig { sigma, seed })?;
    let recommendation = predictor.recommend(&features);
    let trace = optimize(
        instance,
        &recommendation.params,
        &RunConfig {
            budget: budget - sigma as u64,
            seed,
        },
    )?;
    let score = compute_alpha(&trace)?;
    let record = TrainingRecord {
        params: recommendation.params,
        features,
        alpha: score.alpha,
        meta: RecordMeta {
            function_id: instance.spec.function.name().to_string(),
            dim: instance.spec.dim,
            instance_seed: instance.instance_seed,
            run_seed: seed,
            sigma,
            timestamp: now_timestamp(),
        },
    };
    Ok(PredictiveRun {
        trace,
        score,
        record,
        recommendation,
    })
}

/// Appends `record` and refits the clustering on the grown store.
pub fn append_and_retrain(
    store: &mut TrainingStore,
    record: TrainingRecord,
    kappa: usize,
    opts: &RecommendOptions,
) -> Result<Predictor> {
    store.append([record])?;
    Predictor::fit(store, kappa.min(store.len()), opts)
}

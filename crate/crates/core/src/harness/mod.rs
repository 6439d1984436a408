//! Campaign orchestration behind the command-line tool: training, method
//! comparison, feature tables and report regeneration.
//!
//! Output layout under the configured directory:
//!
//! ```text
//! <out>/store.jsonl            training store
//! <out>/suite.json             functions, dimensions and domains used
//! <out>/alpha.csv              one row per test key, α and evaluations per method
//! <out>/wilcoxon.csv           method_a,method_b,n,W,p
//! <out>/curves/<f>_<D>_<s>.csv improvement-only convergence rows
//! <out>/features.csv           β and cluster per (function, D, instance, σ)
//! ```

mod compare;
mod config;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use tracing::info;

use crate::bench::{make_instance, suite_listing, FunctionId};
use crate::cluster::ClusterModel;
use crate::de::ControlParams;
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureConfig, FeatureVector};
use crate::predictor::{build_training_set, Predictor, Recommendation, RecommendOptions, TrainingPlan, TrainingStore};
use crate::sampling::SeededRng;

pub use compare::{
    cmd_compare, cmd_report, method_pairs, pair_wilcoxon, read_alpha_csv, ComparisonReport, ComparisonRow,
    MethodResult, Outcome, TestKey, WilcoxonRow,
};
pub use config::{default_out_dir, CampaignConfig, Method, RetrainMode, DATA_ENV, EVAL_INSTANCE_OFFSET};

pub(crate) fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

impl CampaignConfig {
    pub fn recommend_options(&self) -> RecommendOptions {
        let mut opts = RecommendOptions {
            seed: self.cluster_seed,
            ..RecommendOptions::default()
        };
        opts.fit.scale = self.feature_scaling;
        opts
    }

    pub fn training_plan(&self) -> TrainingPlan {
        TrainingPlan {
            specs: self.specs(),
            instances: self.training_instances(),
            n_param_sets: self.n_param_sets,
            ranges: self.ranges.clone(),
            sigma: self.sigma,
            seeds: self.seeds.clone(),
            budget: self.budget,
            design_seed: self.design_seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainSummary {
    pub records: usize,
    pub best_alpha: f64,
    pub best_params: ControlParams,
    pub store_path: PathBuf,
}

/// Builds the training store and writes it to the configured store path.
pub fn cmd_train(cfg: &CampaignConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    let plan = cfg.training_plan();
    info!(
        specs = plan.specs.len(),
        instances = plan.instances.len(),
        param_sets = plan.n_param_sets,
        seeds = plan.seeds.len(),
        "training"
    );
    let store = cfg.with_pool(|| build_training_set(&plan))??;
    let path = cfg.store_path();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    store.write_jsonl(&path)?;
    write_suite_listing(cfg)?;
    let best = store.best_record().ok_or(Error::NoData)?;
    Ok(TrainSummary {
        records: store.len(),
        best_alpha: best.alpha,
        best_params: best.params,
        store_path: path,
    })
}

fn write_suite_listing(cfg: &CampaignConfig) -> Result<()> {
    let path = cfg.out.join("suite.json");
    let listing = suite_listing(&cfg.specs());
    let text = serde_json::to_string_pretty(&listing).expect("listing serializes");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureRow {
    pub function: FunctionId,
    pub dim: usize,
    pub instance: u64,
    pub sigma: usize,
    pub features: FeatureVector,
    pub cluster: usize,
}

/// β for every (function, dimension, training instance, σ) with its cluster
/// at κ; clusters are fitted separately for each σ.
pub fn cmd_features(cfg: &CampaignConfig) -> Result<Vec<FeatureRow>> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    let seed = cfg.seeds[0];
    let mut work = Vec::new();
    for &sigma in &cfg.feature_sigmas() {
        if sigma < 2 {
            return Err(Error::Config("feature sigmas must be >= 2".into()));
        }
        for spec in cfg.specs() {
            for instance in cfg.training_instances() {
                work.push((spec, instance, sigma));
            }
        }
    }
    let betas = cfg.with_pool(|| {
        work.par_iter()
            .map(|&(spec, instance, sigma)| {
                let mut obj = make_instance(spec, instance)?;
                extract_features(&mut obj, &FeatureConfig { sigma, seed })
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut rows: Vec<FeatureRow> = work
        .iter()
        .zip(&betas)
        .map(|(&(spec, instance, sigma), &features)| FeatureRow {
            function: spec.function,
            dim: spec.dim,
            instance,
            sigma,
            features,
            cluster: 0,
        })
        .collect();
    let opts = cfg.recommend_options();
    for sigma in cfg.feature_sigmas() {
        let idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].sigma == sigma).collect();
        let feats: Vec<FeatureVector> = idx.iter().map(|&i| rows[i].features).collect();
        let mut rng = SeededRng::substream(opts.seed, "cluster");
        let model = ClusterModel::fit(&feats, cfg.kappa, &opts.fit, &mut rng)?;
        for &i in &idx {
            rows[i].cluster = model.classify(&rows[i].features);
        }
    }

    let path = cfg.out.join("features.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    w.write_record(["function", "dim", "instance", "sigma", "beta1", "beta2", "beta3", "cluster"])
        .map_err(|e| csv_error(&path, e))?;
    for r in &rows {
        w.write_record([
            r.function.name().to_string(),
            r.dim.to_string(),
            r.instance.to_string(),
            r.sigma.to_string(),
            r.features.beta1.to_string(),
            r.features.beta2.to_string(),
            r.features.beta3.to_string(),
            r.cluster.to_string(),
        ])
        .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

/// One-shot recommendation from a stored training set.
pub fn cmd_recommend(store_path: &Path, kappa: usize, beta: &FeatureVector, opts: &RecommendOptions) -> Result<Recommendation> {
    let store = TrainingStore::read_jsonl(store_path)?;
    let predictor = Predictor::fit(&store, kappa, opts)?;
    Ok(predictor.recommend(beta))
}

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::{FunctionId, ObjectiveSpec, Suite};
use crate::error::{Error, Result};
use crate::sampling::ParamRanges;

/// Environment variable naming the default output directory.
pub const DATA_ENV: &str = "TUNESEER_DATA";

/// Instance seeds at or above this offset are reserved for evaluation runs.
pub const EVAL_INSTANCE_OFFSET: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Literature,
    BestOfTraining,
    Shade,
    Predictive,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Literature => "literature",
            Method::BestOfTraining => "best-of-training",
            Method::Shade => "shade",
            Method::Predictive => "predictive",
        }
    }

    pub fn needs_store(self) -> bool {
        matches!(self, Method::BestOfTraining | Method::Predictive)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literature" => Ok(Method::Literature),
            "best-of-training" => Ok(Method::BestOfTraining),
            "shade" => Ok(Method::Shade),
            "predictive" => Ok(Method::Predictive),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetrainMode {
    /// Append each predictive run's record and refit before the next run.
    PerRun,
    /// Fit once, run every key, append all records afterwards.
    PerBatch,
}

impl FromStr for RetrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-run" => Ok(RetrainMode::PerRun),
            "per-batch" => Ok(RetrainMode::PerBatch),
            other => Err(Error::Config(format!("unknown retrain mode `{other}`"))),
        }
    }
}

/// Everything a `train`, `compare` or `features` invocation needs.
///
/// Loaded from JSON; every key is optional and falls back to [`Default`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub suite: Suite,
    /// Subset of the suite's functions; empty means all of them.
    pub functions: Vec<FunctionId>,
    pub dims: Vec<usize>,
    /// Instances per function.
    pub instances: usize,
    pub seeds: Vec<u64>,
    pub budget: u64,
    pub sigma: usize,
    pub kappa: usize,
    pub methods: Vec<Method>,
    pub out: PathBuf,
    /// Training store; defaults to `<out>/store.jsonl`.
    pub store: Option<PathBuf>,
    /// Rayon worker threads; 0 uses every core.
    pub workers: usize,
    pub feature_scaling: bool,
    pub retrain: RetrainMode,
    pub n_param_sets: usize,
    pub ranges: ParamRanges,
    pub design_seed: u64,
    pub cluster_seed: u64,
    /// Evaluate on the training instance seeds instead of disjoint ones.
    pub same_instances: bool,
    /// Sample counts for the `features` table; empty means `[sigma]`.
    pub feature_sigmas: Vec<usize>,
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(DATA_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("tuneseer-data"))
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            suite: Suite::Training,
            functions: Vec::new(),
            dims: vec![2, 10, 20],
            instances: 3,
            seeds: (1..=30).collect(),
            budget: 10_000,
            sigma: 1_000,
            kappa: 10,
            methods: vec![Method::Literature, Method::BestOfTraining, Method::Shade, Method::Predictive],
            out: default_out_dir(),
            store: None,
            workers: 0,
            feature_scaling: true,
            retrain: RetrainMode::PerRun,
            n_param_sets: 30,
            ranges: ParamRanges::default(),
            design_seed: 2019,
            cluster_seed: 0,
            same_instances: false,
            feature_sigmas: Vec::new(),
        }
    }
}

impl CampaignConfig {
    /// Desk-scale training preset: every training function at {2, 10, 20}
    /// dimensions, 3 instances, 30 parameter sets, 5 seeds.
    pub fn desk_training() -> Self {
        CampaignConfig {
            seeds: (1..=5).collect(),
            ..Self::default()
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(Error::Config("dims must be non-empty and each >= 2".into()));
        }
        if let Some(f) = self.functions.iter().find(|f| !self.suite.functions().contains(f)) {
            return Err(Error::Config(format!("function `{f}` is not in the {:?} suite", self.suite)));
        }
        if self.instances == 0 {
            return Err(Error::Config("instances must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("seeds must be pairwise distinct".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must be non-empty".into()));
        }
        if self.kappa == 0 {
            return Err(Error::Config("kappa must be >= 1".into()));
        }
        if self.sigma < 2 {
            return Err(Error::Config("sigma must be >= 2".into()));
        }
        if self.budget <= self.sigma as u64 {
            return Err(Error::Config("budget must exceed sigma".into()));
        }
        if self.n_param_sets == 0 {
            return Err(Error::Config("n_param_sets must be >= 1".into()));
        }
        Ok(())
    }

    /// Every (function, dimension) pair the campaign covers.
    pub fn specs(&self) -> Vec<ObjectiveSpec> {
        self.suite
            .specs(&self.dims)
            .into_iter()
            .filter(|s| self.functions.is_empty() || self.functions.contains(&s.function))
            .collect()
    }

    pub fn store_path(&self) -> PathBuf {
        self.store.clone().unwrap_or_else(|| self.out.join("store.jsonl"))
    }

    pub fn training_instances(&self) -> Vec<u64> {
        (1..=self.instances as u64).collect()
    }

    pub fn evaluation_instances(&self) -> Vec<u64> {
        if self.same_instances {
            self.training_instances()
        } else {
            (1..=self.instances as u64).map(|i| EVAL_INSTANCE_OFFSET + i).collect()
        }
    }

    pub fn feature_sigmas(&self) -> Vec<usize> {
        if self.feature_sigmas.is_empty() {
            vec![self.sigma]
        } else {
            self.feature_sigmas.clone()
        }
    }

    /// Runs `f` on a rayon pool sized by `workers`.
    pub fn with_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        Ok(pool.install(f))
    }
}

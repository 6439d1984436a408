//! Feature-predictive control-parameter selection for differential evolution.
//!
//! A training campaign runs DE with a Latin hypercube of control parameters
//! over a benchmark suite and records `(p, β, α)`: the parameters, a cheap
//! three-number landscape feature vector, and an efficiency score. New
//! functions are sampled, classified by k-means++ on `β`, and optimized with
//! the mean parameters of the best records in their cluster.

pub mod bench;
pub mod cluster;
pub mod de;
pub mod error;
pub mod features;
pub mod harness;
pub mod metric;
pub mod predictor;
pub mod sampling;
pub mod shade;
pub mod stats;

pub use bench::{make_instance, FunctionId, Objective, ObjectiveInstance, ObjectiveSpec, SearchDomain, Suite};
pub use cluster::{ClusterModel, FitOptions};
pub use de::{optimize, ControlParams, RunConfig, RunTrace};
pub use error::{Error, Result};
pub use features::{extract_features, FeatureConfig, FeatureVector};
pub use metric::{compute_alpha, PerformanceScore};
pub use predictor::{recommend, run_predictive, Predictor, TrainingRecord, TrainingStore};
pub use sampling::SeededRng;
pub use shade::optimize_shade;
pub use stats::{wilcoxon, WilcoxonResult};

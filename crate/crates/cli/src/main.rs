use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tracing_subscriber::EnvFilter;
use tuneseer::harness::{
    cmd_compare, cmd_features, cmd_recommend, cmd_report, cmd_train, CampaignConfig, Method, RetrainMode, DATA_ENV,
};
use tuneseer::bench::suite_listing;
use tuneseer::{Error, FeatureVector, Result, Suite};

#[derive(Parser)]
#[command(name = "tuneseer", version, about = "Feature-driven parameter tuning for differential evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the parameter-design campaign and write the training store.
    Train(CampaignArgs),
    /// Run every method on the evaluation keys and write alpha/wilcoxon/curves.
    Compare(CampaignArgs),
    /// Tabulate features and cluster labels for the suite.
    Features(CampaignArgs),
    /// Recommend parameters for one feature vector.
    Recommend(RecommendArgs),
    /// Rebuild wilcoxon.csv from an existing alpha.csv.
    Report {
        #[arg(long, env = DATA_ENV, default_value = "tuneseer-data")]
        out: PathBuf,
    },
    /// Print the functions and domains of a suite as JSON.
    Suite {
        #[arg(long, default_value = "training")]
        suite: Suite,
        #[arg(long, value_delimiter = ',', default_value = "2,10,20")]
        dims: Vec<usize>,
    },
}

#[derive(Args)]
struct CampaignArgs {
    /// JSON config; flags given on the command line override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    suite: Option<Suite>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Either a count `N` (seeds 1..=N) or a comma list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    sigma: Option<usize>,
    #[arg(long)]
    kappa: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long, env = DATA_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    no_feature_scaling: bool,
    #[arg(long)]
    retrain: Option<RetrainMode>,
    #[arg(long)]
    param_sets: Option<usize>,
    /// Evaluate on the training instance seeds.
    #[arg(long)]
    same_instances: bool,
}

#[derive(Args)]
struct RecommendArgs {
    #[arg(long)]
    store: PathBuf,
    /// β as `dim,iqr,skew`.
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    #[arg(long, default_value_t = 10)]
    kappa: usize,
    #[arg(long)]
    no_feature_scaling: bool,
    #[arg(long, default_value_t = 0)]
    cluster_seed: u64,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let parse = |t: &str| t.trim().parse::<u64>().map_err(|e| Error::Config(format!("bad seed `{t}`: {e}")));
    if s.contains(',') {
        s.split(',').map(parse).collect()
    } else {
        Ok((1..=parse(s)?).collect())
    }
}

impl CampaignArgs {
    fn resolve(self, base: CampaignConfig) -> Result<CampaignConfig> {
        let mut cfg = match &self.config {
            Some(p) => CampaignConfig::from_json_file(p)?,
            None => base,
        };
        if let Some(v) = self.suite {
            cfg.suite = v;
        }
        if let Some(v) = self.dims {
            cfg.dims = v;
        }
        if let Some(v) = self.seeds {
            cfg.seeds = parse_seeds(&v)?;
        }
        if let Some(v) = self.instances {
            cfg.instances = v;
        }
        if let Some(v) = self.budget {
            cfg.budget = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.kappa {
            cfg.kappa = v;
        }
        if let Some(v) = self.methods {
            cfg.methods = v;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        if let Some(v) = self.store {
            cfg.store = Some(v);
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if self.no_feature_scaling {
            cfg.feature_scaling = false;
        }
        if let Some(v) = self.retrain {
            cfg.retrain = v;
        }
        if let Some(v) = self.param_sets {
            cfg.n_param_sets = v;
        }
        if self.same_instances {
            cfg.same_instances = true;
        }
        Ok(cfg)
    }
}

fn parse_beta(s: &str) -> Result<FeatureVector> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad beta component `{t}`: {e}"))))
        .collect::<Result<_>>()?;
    match parts[..] {
        [a, b, c] => Ok(FeatureVector::new(a, b, c)),
        _ => Err(Error::Config(format!("beta needs 3 components, got {}", parts.len()))),
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.resolve(CampaignConfig::desk_training())?;
            let summary = cmd_train(&cfg)?;
            print_json(&serde_json::to_value(&summary).expect("summary"));
        }
        Command::Compare(args) => {
            let base = CampaignConfig {
                suite: Suite::Holdout,
                ..CampaignConfig::default()
            };
            let cfg = args.resolve(base)?;
            let report = cmd_compare(&cfg)?;
            let failures: usize = report
                .rows
                .iter()
                .map(|r| r.outcomes.iter().filter(|o| o.is_err()).count())
                .sum();
            print_json(&json!({
                "keys": report.rows.len(),
                "failures": failures,
                "wilcoxon": report.wilcoxon,
                "out": cfg.out,
            }));
        }
        Command::Features(args) => {
            let cfg = args.resolve(CampaignConfig::default())?;
            let rows = cmd_features(&cfg)?;
            eprintln!("{} rows written to {}", rows.len(), cfg.out.join("features.csv").display());
        }
        Command::Recommend(args) => {
            let beta = parse_beta(&args.beta)?;
            let cfg = CampaignConfig {
                feature_scaling: !args.no_feature_scaling,
                cluster_seed: args.cluster_seed,
                ..CampaignConfig::default()
            };
            let rec = cmd_recommend(&args.store, args.kappa, &beta, &cfg.recommend_options())?;
            print_json(&json!({
                "p1": rec.params.crossover,
                "p2": rec.params.weight,
                "p3": rec.params.population,
                "cluster": rec.cluster,
                "top_set": rec.top.len(),
            }));
        }
        Command::Report { out } => {
            let rows = cmd_report(&out)?;
            print_json(&serde_json::to_value(&rows).expect("rows"));
        }
        Command::Suite { suite, dims } => {
            print_json(&suite_listing(&suite.specs(&dims)));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    // Usage errors are configuration errors (exit 1); clap alone would use 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

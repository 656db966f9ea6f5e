//! Command-line definitions and their resolution into run settings.
//!
//! Every setting can come from a flag, from the `--config` file (same name
//! as the long flag) or from its default, in that order of precedence.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use siterank_core::eval::{CvConfig, Ranker};
use siterank_core::mobility::RatioVariant;
use siterank_core::models::{ModelSpec, RankNetConfig, RidgeConfig};
use siterank_core::synth::{
    ChainSpec, CityConfig, Clusters, Colocation, Planted, TransitionMode,
};
use siterank_core::{FeatureKind, LatLon};

use crate::commands::{self, RunConfig};
use crate::config::{parse_list, parse_weights, ConfigFile};

#[derive(Debug, Parser)]
#[command(name = "siterank", version, about = "Rank candidate areas for new retail stores")]
pub struct Cli {
    /// Flat `key = value` file; keys are long flag names. Flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for areas, experiments and cities [default: all cores].
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for every random choice [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic city as venues.csv and checkins.csv.
    Generate(GenerateArgs),
    /// Check-in CCDF, per-chain totals and transition-distance CDF as JSON.
    Stats(DataArgs),
    /// Category co-location coefficients (kappa) as CSV.
    Coefficients(DataArgs),
    /// Category transition ratios (rho) as CSV.
    TransitionRatios(RatioArgs),
    /// Feature vectors of candidate areas or chain stores as CSV.
    Features(FeatureArgs),
    /// Repeated random-holdout evaluation of a ranker on one chain, as JSON.
    Evaluate(EvalArgs),
    /// Fit a ridge or RankNet model on every store of a chain and save it.
    Train(TrainArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Venues CSV with header id,lat,lon,category,chain.
    #[arg(long)]
    pub venues: Option<PathBuf>,
    /// Check-ins CSV with header user,venue,timestamp.
    #[arg(long)]
    pub checkins: Option<PathBuf>,
    /// Drop transitions whose check-ins are further apart in seconds [default: no limit].
    #[arg(long)]
    pub max_gap_s: Option<i64>,
    /// Chain label; comma-separated for several [default: every chain where allowed].
    #[arg(long)]
    pub chain: Option<String>,
    /// Candidate-area radius in meters [default: 200].
    #[arg(long)]
    pub radius: Option<f64>,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `pair` normalizes by N_a * N_b, `destination` by N_b only [default: pair].
    #[arg(long)]
    pub rho_variant: Option<String>,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Candidate areas CSV with header id,lat,lon,category [default: the chain's stores].
    #[arg(long)]
    pub areas: Option<PathBuf>,
    /// Saved model; adds a score column.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// A feature name, `ridge`, `ranknet` or `oracle` [default: ridge].
    #[arg(long)]
    pub ranker: Option<String>,
    /// Comma-separated features for ridge and ranknet [default: all eight].
    #[arg(long)]
    pub features: Option<String>,
    /// Ridge penalty [default: 1e-8].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// RankNet hidden units [default: 10].
    #[arg(long)]
    pub hidden: Option<usize>,
    /// RankNet learning rate [default: 0.01].
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// RankNet epochs [default: 100].
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated NDCG cutoffs [default: 10].
    #[arg(long)]
    pub k: Option<String>,
    /// Comma-separated Accuracy@X% thresholds [default: 5,10,15,20,30].
    #[arg(long)]
    pub x: Option<String>,
    /// Number of random holdouts [default: 1000].
    #[arg(long)]
    pub n_experiments: Option<usize>,
    /// Percentage of stores held out per experiment [default: 33].
    #[arg(long)]
    pub test_percent: Option<usize>,
    /// Random orderings for the baseline NDCG [default: 10000].
    #[arg(long)]
    pub baseline_trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Number of cities, each with the next seed [default: 1].
    #[arg(long)]
    pub cities: Option<usize>,
    /// Venues outside the chain [default: 2000].
    #[arg(long)]
    pub n_venues: Option<usize>,
    /// Box width in km [default: 5].
    #[arg(long)]
    pub width_km: Option<f64>,
    /// Box height in km [default: 5].
    #[arg(long)]
    pub height_km: Option<f64>,
    /// South-west corner latitude [default: 40.7].
    #[arg(long)]
    pub origin_lat: Option<f64>,
    /// South-west corner longitude [default: -74.02].
    #[arg(long)]
    pub origin_lon: Option<f64>,
    /// Categories as name:weight pairs [default: Food,Shop,Nightlife,Office,Park].
    #[arg(long)]
    pub categories: Option<String>,
    /// Number of Gaussian clusters [default: none].
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Share of venues placed in clusters [default: 0.5].
    #[arg(long)]
    pub cluster_share: Option<f64>,
    /// Cluster standard deviation in meters [default: 500].
    #[arg(long)]
    pub cluster_sigma_m: Option<f64>,
    /// Co-location rules as follower>anchor pairs, comma-separated [default: none].
    #[arg(long)]
    pub colocate: Option<String>,
    /// Share of followers placed near an anchor [default: 0.8].
    #[arg(long)]
    pub colocate_share: Option<f64>,
    /// Maximum follower-anchor distance in meters [default: 60].
    #[arg(long)]
    pub colocate_spread_m: Option<f64>,
    /// Chain label [default: no chain].
    #[arg(long)]
    pub chain: Option<String>,
    /// Chain store count [default: 100].
    #[arg(long)]
    pub stores: Option<usize>,
    /// Chain category [default: Coffee].
    #[arg(long)]
    pub chain_category: Option<String>,
    /// Pareto exponent of check-ins per venue [default: 2].
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Smallest base check-in count [default: 1].
    #[arg(long)]
    pub min_checkins: Option<f64>,
    /// Largest base check-in count [default: 10000].
    #[arg(long)]
    pub max_checkins: Option<u64>,
    /// Distance decay of move destinations in meters [default: 300].
    #[arg(long)]
    pub decay_m: Option<f64>,
    /// Probability that a check-in starts a move [default: 0.5].
    #[arg(long)]
    pub transition_fraction: Option<f64>,
    /// Deal check-ins to this many users instead of sampling moves [default: off].
    #[arg(long)]
    pub round_robin_users: Option<usize>,
    /// Category affinities as from>to:weight, comma-separated [default: all 1].
    #[arg(long)]
    pub affinity: Option<String>,
    /// Planted store popularity as feature:weight pairs [default: off].
    #[arg(long)]
    pub planted: Option<String>,
    /// Planted popularity intercept [default: 500].
    #[arg(long)]
    pub planted_base: Option<f64>,
    /// Planted popularity scale per standard deviation [default: 150].
    #[arg(long)]
    pub planted_spread: Option<f64>,
    /// Radius used for planted features in meters [default: 200].
    #[arg(long)]
    pub radius: Option<f64>,
}

/// Every key a config file may contain.
pub const CONFIG_KEYS: &[&str] = &[
    "jobs", "seed", "venues", "checkins", "max-gap-s", "chain", "radius", "rho-variant",
    "areas", "model", "ranker", "features", "gamma", "hidden", "learning-rate", "epochs", "k",
    "x", "n-experiments", "test-percent", "baseline-trials", "out-dir", "cities", "n-venues",
    "width-km", "height-km", "origin-lat", "origin-lon", "categories", "clusters",
    "cluster-share", "cluster-sigma-m", "colocate", "colocate-share", "colocate-spread-m",
    "stores", "chain-category", "exponent", "min-checkins", "max-checkins", "decay-m",
    "transition-fraction", "round-robin-users", "affinity", "planted", "planted-base",
    "planted-spread",
];

pub fn load_config(cli: &Cli) -> Result<ConfigFile> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    file.check_keys(CONFIG_KEYS)?;
    Ok(file)
}

pub fn seed(cli: &Cli, file: &ConfigFile) -> Result<u64> {
    file.get("seed", cli.seed, 0)
}

pub fn jobs(cli: &Cli, file: &ConfigFile) -> Result<Option<usize>> {
    let j = file.pick("jobs", cli.jobs)?;
    if j == Some(0) {
        bail!("--jobs must be positive");
    }
    Ok(j)
}

fn feature_list(s: &str) -> Result<Vec<FeatureKind>> {
    if s.trim() == "all" {
        return Ok(FeatureKind::ALL.to_vec());
    }
    let v: Vec<FeatureKind> = parse_list(s)?;
    if v.is_empty() {
        bail!("empty feature list");
    }
    Ok(v)
}

pub fn run_config(a: &DataArgs, file: &ConfigFile, seed: u64) -> Result<RunConfig> {
    let venues = file
        .pick("venues", a.venues.clone())?
        .ok_or_else(|| anyhow!("--venues is required"))?;
    let checkins = file
        .pick("checkins", a.checkins.clone())?
        .ok_or_else(|| anyhow!("--checkins is required"))?;
    let mut cfg = RunConfig::new(venues, checkins);
    cfg.max_gap_s = file.pick("max-gap-s", a.max_gap_s)?;
    if let Some(c) = file.pick::<String>("chain", a.chain.clone())? {
        cfg.chains = parse_list(&c)?;
    }
    cfg.radius_m = file.get("radius", a.radius, siterank_core::DEFAULT_RADIUS_M)?;
    if !(cfg.radius_m > 0.0) {
        bail!("radius must be positive");
    }
    cfg.cv.radius_m = cfg.radius_m;
    cfg.cv.seed = seed;
    Ok(cfg)
}

pub fn rho_variant(a: &RatioArgs, file: &ConfigFile) -> Result<RatioVariant> {
    match file.get("rho-variant", a.rho_variant.clone(), "pair".to_string())?.as_str() {
        "pair" => Ok(RatioVariant::Pair),
        "destination" => Ok(RatioVariant::Destination),
        other => bail!("unknown rho variant {other:?}; use pair or destination"),
    }
}

pub fn ranker(a: &ModelArgs, file: &ConfigFile) -> Result<Ranker> {
    let name = file.get("ranker", a.ranker.clone(), "ridge".to_string())?;
    let features = feature_list(&file.get("features", a.features.clone(), "all".to_string())?)?;
    let ridge = RidgeConfig {
        gamma: file.get("gamma", a.gamma, siterank_core::DEFAULT_RIDGE_GAMMA)?,
    };
    let d = RankNetConfig::default();
    let ranknet = RankNetConfig {
        hidden: file.get("hidden", a.hidden, d.hidden)?,
        learning_rate: file.get("learning-rate", a.learning_rate, d.learning_rate)?,
        epochs: file.get("epochs", a.epochs, d.epochs)?,
        seed: 0,
    };
    Ok(match name.as_str() {
        "oracle" => Ranker::Oracle,
        "ridge" => Ranker::Model {
            spec: ModelSpec::Ridge(ridge),
            features,
        },
        "ranknet" => Ranker::Model {
            spec: ModelSpec::RankNet(ranknet),
            features,
        },
        other => Ranker::Feature(other.parse().map_err(|e| anyhow!("ranker {other:?}: {e}"))?),
    })
}

pub fn eval_config(a: &EvalArgs, file: &ConfigFile, seed: u64) -> Result<RunConfig> {
    let mut cfg = run_config(&a.data, file, seed)?;
    cfg.ranker = ranker(&a.model, file)?;
    let d = CvConfig::default();
    if let Some(k) = file.pick::<String>("k", a.k.clone())? {
        cfg.cv.k_list = parse_list(&k)?;
    }
    if let Some(x) = file.pick::<String>("x", a.x.clone())? {
        cfg.cv.x_list = parse_list(&x)?;
    }
    cfg.cv.n_experiments = file.get("n-experiments", a.n_experiments, d.n_experiments)?;
    cfg.cv.test_percent = file.get("test-percent", a.test_percent, d.test_percent)?;
    cfg.cv.baseline_trials = file.get("baseline-trials", a.baseline_trials, d.baseline_trials)?;
    Ok(cfg)
}

fn pairs(s: &str) -> Result<Vec<(String, String, f64)>> {
    parse_weights(s)?
        .into_iter()
        .map(|(pair, w)| {
            let (a, b) = pair
                .split_once('>')
                .ok_or_else(|| anyhow!("{pair:?} is not of the form from>to"))?;
            Ok((a.trim().to_string(), b.trim().to_string(), w))
        })
        .collect()
}

pub fn city_config(a: &GenerateArgs, file: &ConfigFile, seed: u64) -> Result<(CityConfig, PathBuf, usize)> {
    let d = CityConfig::default();
    let out = file
        .pick("out-dir", a.out_dir.clone())?
        .ok_or_else(|| anyhow!("--out-dir is required"))?;
    let cities = file.get("cities", a.cities, 1)?;
    let mut cfg = CityConfig {
        origin: LatLon::new(
            file.get("origin-lat", a.origin_lat, d.origin.lat)?,
            file.get("origin-lon", a.origin_lon, d.origin.lon)?,
        ),
        width_km: file.get("width-km", a.width_km, d.width_km)?,
        height_km: file.get("height-km", a.height_km, d.height_km)?,
        venues: file.get("n-venues", a.n_venues, d.venues)?,
        exponent: file.get("exponent", a.exponent, d.exponent)?,
        min_checkins: file.get("min-checkins", a.min_checkins, d.min_checkins)?,
        max_checkins: file.get("max-checkins", a.max_checkins, d.max_checkins)?,
        decay_m: file.get("decay-m", a.decay_m, d.decay_m)?,
        seed,
        ..d
    };
    if let Some(c) = file.pick::<String>("categories", a.categories.clone())? {
        cfg.categories = parse_weights(&c)?;
    }
    if let Some(n) = file.pick("clusters", a.clusters)? {
        cfg.clusters = Some(Clusters {
            count: n,
            share: file.get("cluster-share", a.cluster_share, 0.5)?,
            sigma_m: file.get("cluster-sigma-m", a.cluster_sigma_m, 500.0)?,
        });
    }
    if let Some(rules) = file.pick::<String>("colocate", a.colocate.clone())? {
        let share = file.get("colocate-share", a.colocate_share, 0.8)?;
        let spread_m = file.get("colocate-spread-m", a.colocate_spread_m, 60.0)?;
        for (follower, anchor, _) in pairs(&rules)? {
            cfg.colocation.push(Colocation {
                follower,
                anchor,
                share,
                spread_m,
            });
        }
    }
    if let Some(label) = file.pick::<String>("chain", a.chain.clone())? {
        cfg.chain = Some(ChainSpec {
            label,
            stores: file.get("stores", a.stores, 100)?,
            category: file.get("chain-category", a.chain_category.clone(), "Coffee".to_string())?,
        });
    }
    cfg.transitions = match file.pick("round-robin-users", a.round_robin_users)? {
        Some(users) => TransitionMode::RoundRobin { users },
        None => TransitionMode::Direct {
            fraction: file.get("transition-fraction", a.transition_fraction, 0.5)?,
        },
    };
    if let Some(aff) = file.pick::<String>("affinity", a.affinity.clone())? {
        cfg.affinity = pairs(&aff)?;
    }
    if let Some(p) = file.pick::<String>("planted", a.planted.clone())? {
        let weights = parse_weights(&p)?
            .into_iter()
            .map(|(k, w)| Ok((k.parse().map_err(|e| anyhow!("{k:?}: {e}"))?, w)))
            .collect::<Result<Vec<(FeatureKind, f64)>>>()?;
        cfg.planted = Some(Planted {
            weights,
            base: file.get("planted-base", a.planted_base, 500.0)?,
            spread: file.get("planted-spread", a.planted_spread, 150.0)?,
            radius_m: file.get("radius", a.radius, siterank_core::DEFAULT_RADIUS_M)?,
        });
    }
    cfg.validate().context("invalid city configuration")?;
    Ok((cfg, out, cities))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs the parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let file = load_config(&cli)?;
    let seed = seed(&cli, &file)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs(&cli, &file)? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    pool.install(|| match &cli.command {
        Command::Generate(a) => {
            let (cfg, out, cities) = city_config(a, &file, seed)?;
            for p in commands::cmd_generate(&cfg, &out, cities)? {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Stats(a) => {
            let cfg = run_config(a, &file, seed)?;
            emit(a.out.as_ref(), &commands::cmd_stats(&cfg)?)
        }
        Command::Coefficients(a) => {
            let cfg = run_config(a, &file, seed)?;
            emit(a.out.as_ref(), &commands::cmd_coefficients(&cfg)?)
        }
        Command::TransitionRatios(a) => {
            let mut cfg = run_config(&a.data, &file, seed)?;
            cfg.rho_variant = rho_variant(a, &file)?;
            emit(a.data.out.as_ref(), &commands::cmd_transition_ratios(&cfg)?)
        }
        Command::Features(a) => {
            let cfg = run_config(&a.data, &file, seed)?;
            let areas = file.pick("areas", a.areas.clone())?;
            let model = file.pick("model", a.model.clone())?;
            let text = commands::cmd_features(&cfg, areas.as_deref(), model.as_deref())?;
            emit(a.data.out.as_ref(), &text)
        }
        Command::Evaluate(a) => {
            let cfg = eval_config(a, &file, seed)?;
            emit(a.data.out.as_ref(), &commands::evaluate_json(&cfg)?)
        }
        Command::Train(a) => {
            let mut cfg = run_config(&a.data, &file, seed)?;
            cfg.ranker = ranker(&a.model, &file)?;
            let model = commands::cmd_train(&cfg)?;
            match &a.data.out {
                Some(p) => commands::save_model(p, &model),
                None => emit(None, &(serde_json::to_string_pretty(&model)? + "\n")),
            }
        }
    })
}

//! The work behind each subcommand, as functions of resolved settings.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use siterank_core::eval::{self, CvConfig, EvalReport, Ranker};
use siterank_core::features::FeatureExtractor;
use siterank_core::ingest::dataset_stats;
use siterank_core::mobility::RatioVariant;
use siterank_core::models::{ModelFile, ModelSpec, Pipeline};
use siterank_core::synth::{generate_city, CityConfig};
use siterank_core::{CandidateArea, Dataset, FeatureVector};

use crate::io;
use crate::report;

/// Settings shared by the commands that read a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub venues: PathBuf,
    pub checkins: PathBuf,
    pub max_gap_s: Option<i64>,
    pub chains: Vec<String>,
    pub radius_m: f64,
    pub ranker: Ranker,
    pub cv: CvConfig,
    pub rho_variant: RatioVariant,
}

impl RunConfig {
    pub fn new(venues: impl Into<PathBuf>, checkins: impl Into<PathBuf>) -> Self {
        Self {
            venues: venues.into(),
            checkins: checkins.into(),
            max_gap_s: None,
            chains: Vec::new(),
            radius_m: siterank_core::DEFAULT_RADIUS_M,
            ranker: Ranker::Oracle,
            cv: CvConfig::default(),
            rho_variant: RatioVariant::default(),
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        io::load_dataset(&self.venues, &self.checkins, self.max_gap_s).map_err(Into::into)
    }

    fn single_chain(&self) -> Result<&str> {
        match self.chains.as_slice() {
            [one] => Ok(one),
            [] => bail!("a chain is required"),
            _ => bail!("exactly one chain is required, got {}", self.chains.len()),
        }
    }
}

/// Writes `venues.csv` and `checkins.csv` into `dir`, or into `city-NNN`
/// subdirectories with seeds `seed, seed + 1, ...` when `cities > 1`.
pub fn cmd_generate(cfg: &CityConfig, dir: &Path, cities: usize) -> Result<Vec<PathBuf>> {
    if cities == 0 {
        bail!("city count must be positive");
    }
    cfg.validate()?;
    let targets: Vec<(PathBuf, CityConfig)> = (0..cities)
        .map(|i| {
            let path = if cities == 1 {
                dir.to_path_buf()
            } else {
                dir.join(format!("city-{i:03}"))
            };
            let seed = cfg.seed.wrapping_add(i as u64);
            (path, CityConfig { seed, ..cfg.clone() })
        })
        .collect();
    targets
        .par_iter()
        .map(|(path, c)| {
            let d = generate_city(c)?;
            fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
            io::write_venues(io::create(&path.join("venues.csv"))?, &d.venues)?;
            io::write_checkins(io::create(&path.join("checkins.csv"))?, &d.checkins)?;
            Ok(path.clone())
        })
        .collect()
}

/// Stats JSON for the selected chains, or every chain when none is selected.
pub fn cmd_stats(cfg: &RunConfig) -> Result<String> {
    let d = cfg.load()?;
    let chains: Vec<&str> = cfg.chains.iter().map(String::as_str).collect();
    let r = dataset_stats(&d, &chains)?;
    Ok(report::stats_json(&r))
}

/// The κ table as CSV.
pub fn cmd_coefficients(cfg: &RunConfig) -> Result<String> {
    let d = cfg.load()?;
    let fx = FeatureExtractor::new(&d, cfg.radius_m);
    let mut out = Vec::new();
    io::write_kappa(&mut out, &fx.jensen)?;
    Ok(String::from_utf8(out)?)
}

/// The ρ table as CSV.
pub fn cmd_transition_ratios(cfg: &RunConfig) -> Result<String> {
    let d = cfg.load()?;
    let catalog = siterank_core::Catalog::new(&d);
    let tables = siterank_core::mobility::transition_tables(&catalog);
    let mut out = Vec::new();
    io::write_rho(&mut out, &tables, cfg.rho_variant)?;
    Ok(String::from_utf8(out)?)
}

/// Feature vectors as CSV, for explicit candidate areas or for every store of
/// the selected chains. With a model, a `score` column is appended.
pub fn cmd_features(
    cfg: &RunConfig,
    areas: Option<&Path>,
    model: Option<&Path>,
) -> Result<String> {
    let d = cfg.load()?;
    let fx = FeatureExtractor::new(&d, cfg.radius_m);
    let areas: Vec<CandidateArea> = match areas {
        Some(p) => io::parse_areas(p, cfg.radius_m)?,
        None => {
            if cfg.chains.is_empty() {
                bail!("give --areas or at least one chain");
            }
            let mut all = Vec::new();
            for c in &cfg.chains {
                all.extend(fx.store_areas(c)?);
            }
            all
        }
    };
    let vectors: Vec<FeatureVector> = areas
        .par_iter()
        .map(|a| fx.vector(a))
        .collect::<siterank_core::Result<_>>()?;
    let mut out = Vec::new();
    io::write_features(&mut out, &vectors)?;
    let text = String::from_utf8(out)?;
    match model {
        None => Ok(text),
        Some(p) => {
            let pipeline = load_model(p)?;
            let mut lines = text.lines();
            let mut scored = format!("{},score\n", lines.next().unwrap_or_default());
            for (line, v) in lines.zip(&vectors) {
                scored.push_str(&format!("{line},{}\n", pipeline.score(v)?));
            }
            Ok(scored)
        }
    }
}

/// Repeated random holdout over one chain. Experiments run on the current
/// rayon pool; results do not depend on its size.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvalReport> {
    let d = cfg.load()?;
    let chain = cfg.single_chain()?;
    let prepared = eval::prepare(&d, chain, &cfg.cv)?;
    let experiments = (0..cfg.cv.n_experiments)
        .into_par_iter()
        .map(|i| eval::run_experiment(&prepared, &cfg.ranker, &cfg.cv, i))
        .collect::<siterank_core::Result<Vec<_>>>()?;
    Ok(eval::aggregate(&prepared, &cfg.ranker, &cfg.cv, experiments)?)
}

pub fn evaluate_json(cfg: &RunConfig) -> Result<String> {
    Ok(report::eval_json(&cmd_evaluate(cfg)?))
}

/// Fits the configured model on every store of the chain.
pub fn cmd_train(cfg: &RunConfig) -> Result<ModelFile> {
    let Ranker::Model { spec, features } = &cfg.ranker else {
        bail!("only ridge and ranknet rankers can be saved as models");
    };
    let d = cfg.load()?;
    let fx = FeatureExtractor::new(&d, cfg.radius_m);
    let vectors = fx.store_vectors(cfg.single_chain()?)?;
    let spec = match spec {
        ModelSpec::RankNet(c) => ModelSpec::RankNet(siterank_core::models::RankNetConfig {
            seed: c.seed.wrapping_add(cfg.cv.seed),
            ..c.clone()
        }),
        other => other.clone(),
    };
    Ok(Pipeline::fit(&vectors, features, &spec)?.to_file())
}

pub fn save_model(path: &Path, model: &ModelFile) -> Result<()> {
    let mut s = serde_json::to_string_pretty(model)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<Pipeline> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ModelFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Pipeline::from_file(file))
}

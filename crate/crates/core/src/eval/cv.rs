use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::metrics::{accuracy_at_x, ndcg_at_k, random_baseline};
use crate::features::FeatureExtractor;
use crate::model::{Dataset, FeatureKind, FeatureVector, RankedList};
use crate::models::{rank_by_score, ModelSpec, Pipeline};

/// How test areas are scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranker {
    /// Rank by one raw feature value; nothing is trained.
    Feature(FeatureKind),
    /// Train a model on the training areas over a feature subset.
    Model {
        spec: ModelSpec,
        features: Vec<FeatureKind>,
    },
    /// Rank by the true popularity. Useful as an upper bound.
    Oracle,
}

impl Ranker {
    pub fn name(&self) -> String {
        match self {
            Ranker::Feature(k) => k.name().to_string(),
            Ranker::Oracle => "oracle".to_string(),
            Ranker::Model { spec, features } => {
                let model = match spec {
                    ModelSpec::Ridge(_) => "ridge",
                    ModelSpec::RankNet(_) => "ranknet",
                };
                let subset = if features.as_slice() == FeatureKind::ALL {
                    "all".to_string()
                } else {
                    features
                        .iter()
                        .map(|f| f.name())
                        .collect::<Vec<_>>()
                        .join("+")
                };
                alloc::format!("{model}[{subset}]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub radius_m: f64,
    pub k_list: Vec<usize>,
    /// Accuracy@X% thresholds, in percent.
    pub x_list: Vec<f64>,
    pub n_experiments: usize,
    pub seed: u64,
    /// Share of store areas held out per experiment, in percent.
    pub test_percent: usize,
    pub baseline_trials: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            radius_m: crate::DEFAULT_RADIUS_M,
            k_list: alloc::vec![10],
            x_list: alloc::vec![5.0, 10.0, 15.0, 20.0, 30.0],
            n_experiments: 1000,
            seed: 0,
            test_percent: 33,
            baseline_trials: 10_000,
        }
    }
}

/// `ceil(percent / 100 * n)` in exact integer arithmetic.
pub fn test_size(n: usize, percent: usize) -> usize {
    (n * percent).div_ceil(100)
}

/// One random holdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub index: usize,
    pub seed: u64,
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub predicted: RankedList,
    pub truth: RankedList,
    /// `(k, NDCG@k)` in `CvConfig::k_list` order.
    pub ndcg: Vec<(usize, f64)>,
    /// Ground-truth rank of the top predicted area.
    pub top_hit_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ranker: String,
    pub chain: String,
    pub r: f64,
    pub n_experiments: usize,
    pub test_size: usize,
    pub ndcg: Vec<(usize, f64)>,
    pub accuracy: Vec<(f64, f64)>,
    pub baseline: Vec<(usize, f64)>,
    pub seed: u64,
    pub experiments: Vec<Experiment>,
}

/// Store feature vectors for one chain, computed once and shared by every
/// experiment. Each store's area excludes only that store.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub chain: String,
    pub vectors: Vec<FeatureVector>,
    pub test_size: usize,
}

/// Validates the configuration and computes the chain's store vectors.
pub fn prepare(d: &Dataset, chain: &str, cfg: &CvConfig) -> Result<Prepared> {
    let fx = FeatureExtractor::new(d, cfg.radius_m);
    let vectors = fx.store_vectors(chain)?;
    prepare_vectors(chain, vectors, cfg)
}

pub(crate) fn prepare_vectors(
    chain: &str,
    vectors: Vec<FeatureVector>,
    cfg: &CvConfig,
) -> Result<Prepared> {
    const MIN_STORES: usize = 4;
    if vectors.len() < MIN_STORES {
        return Err(Error::TooFewStores {
            chain: chain.to_string(),
            stores: vectors.len(),
            required: MIN_STORES,
        });
    }
    if cfg.n_experiments == 0 {
        return Err(Error::InvalidConfig("n_experiments must be positive".into()));
    }
    if cfg.test_percent == 0 || cfg.test_percent >= 100 {
        return Err(Error::InvalidConfig(alloc::format!(
            "test share {}% is outside (0, 100)",
            cfg.test_percent
        )));
    }
    let size = test_size(vectors.len(), cfg.test_percent);
    for &k in &cfg.k_list {
        if k == 0 || k > size {
            return Err(Error::KOutOfRange { k, len: size });
        }
    }
    for &x in &cfg.x_list {
        if !(x > 0.0 && x <= 100.0) {
            return Err(Error::InvalidConfig(alloc::format!("X = {x} is outside (0, 100]")));
        }
    }
    Ok(Prepared {
        chain: chain.to_string(),
        vectors,
        test_size: size,
    })
}

/// Runs experiment `index`: sample the test areas with seed `cfg.seed + index`,
/// train on the rest when the ranker needs it, rank the test areas and score.
pub fn run_experiment(
    prepared: &Prepared,
    ranker: &Ranker,
    cfg: &CvConfig,
    index: usize,
) -> Result<Experiment> {
    let seed = cfg.seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = prepared.vectors.len();
    let mut test_idx = index::sample(&mut rng, n, prepared.test_size).into_vec();
    test_idx.sort_unstable();
    let mut in_test = alloc::vec![false; n];
    test_idx.iter().for_each(|&i| in_test[i] = true);

    let test: Vec<&FeatureVector> = test_idx.iter().map(|&i| &prepared.vectors[i]).collect();
    let train: Vec<FeatureVector> = (0..n)
        .filter(|&i| !in_test[i])
        .map(|i| prepared.vectors[i].clone())
        .collect();

    let target = |v: &FeatureVector| v.y.unwrap_or(0) as f64;
    let scores: Vec<(String, f64)> = match ranker {
        Ranker::Feature(k) => test.iter().map(|v| (v.area.id.clone(), v.get(*k))).collect(),
        Ranker::Oracle => test.iter().map(|v| (v.area.id.clone(), target(v))).collect(),
        Ranker::Model { spec, features } => {
            let spec = match spec {
                ModelSpec::RankNet(c) => ModelSpec::RankNet(crate::models::RankNetConfig {
                    seed: c.seed.wrapping_add(seed),
                    ..c.clone()
                }),
                other => other.clone(),
            };
            let pipeline = Pipeline::fit(&train, features, &spec)?;
            test.iter()
                .map(|v| Ok((v.area.id.clone(), pipeline.score(v)?)))
                .collect::<Result<_>>()?
        }
    };
    let predicted = rank_by_score(&scores)?;
    let truth_scores: Vec<(String, f64)> =
        test.iter().map(|v| (v.area.id.clone(), target(v))).collect();
    let truth = rank_by_score(&truth_scores)?;

    let ndcg = cfg
        .k_list
        .iter()
        .map(|&k| Ok((k, ndcg_at_k(&predicted, &truth, k)?)))
        .collect::<Result<Vec<_>>>()?;
    let top = predicted.first().ok_or(Error::NotAPermutation)?;
    let top_hit_rank = truth.rank(top).ok_or(Error::NotAPermutation)?;

    Ok(Experiment {
        index,
        seed,
        train: train.iter().map(|v| v.area.id.clone()).collect(),
        test: test.iter().map(|v| v.area.id.clone()).collect(),
        predicted,
        truth,
        ndcg,
        top_hit_rank,
    })
}

/// Averages experiments in the order given.
pub fn aggregate(
    prepared: &Prepared,
    ranker: &Ranker,
    cfg: &CvConfig,
    experiments: Vec<Experiment>,
) -> Result<EvalReport> {
    let count = experiments.len() as f64;
    let ndcg = cfg
        .k_list
        .iter()
        .enumerate()
        .map(|(slot, &k)| (k, experiments.iter().map(|e| e.ndcg[slot].1).sum::<f64>() / count))
        .collect();
    let accuracy = cfg
        .x_list
        .iter()
        .map(|&x| Ok((x, accuracy_at_x(&experiments, x)?)))
        .collect::<Result<Vec<_>>>()?;
    let baseline = cfg
        .k_list
        .iter()
        .map(|&k| {
            Ok((
                k,
                random_baseline(prepared.test_size, k, cfg.baseline_trials, cfg.seed)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        ranker: ranker.name(),
        chain: prepared.chain.clone(),
        r: cfg.radius_m,
        n_experiments: experiments.len(),
        test_size: prepared.test_size,
        ndcg,
        accuracy,
        baseline,
        seed: cfg.seed,
        experiments,
    })
}

/// Repeated random holdout over the stores of `chain`, run sequentially.
pub fn cross_validate(
    d: &Dataset,
    chain: &str,
    ranker: &Ranker,
    cfg: &CvConfig,
) -> Result<EvalReport> {
    let prepared = prepare(d, chain, cfg)?;
    let experiments = (0..cfg.n_experiments)
        .map(|i| run_experiment(&prepared, ranker, cfg, i))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&prepared, ranker, cfg, experiments)
}

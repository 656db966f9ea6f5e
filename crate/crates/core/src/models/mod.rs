//! Feature normalization, supervised scorers and score-based ranking.

mod normalize;
mod ranknet;
mod ridge;

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use normalize::Normalizer;
pub use ranknet::{pairwise_loss, RankNetConfig, RankNetModel};
pub use ridge::RidgeModel;

use crate::error::{Error, Result};
use crate::model::{FeatureKind, FeatureVector, RankedList};

/// Orders ids by descending score, ties by ascending id.
pub fn rank_by_score(scores: &[(String, f64)]) -> Result<RankedList> {
    let mut order: Vec<&(String, f64)> = scores.iter().collect();
    order.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        o => o,
    });
    RankedList::new(order.into_iter().map(|(id, _)| id.clone()).collect())
}

/// What a fitted pipeline applies after normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelFile {
    Ridge {
        features: Vec<FeatureKind>,
        weights: RidgeModel,
        normalizer: Normalizer,
        config: RidgeConfig,
        seed: Option<u64>,
    },
    #[serde(rename = "ranknet")]
    RankNet {
        features: Vec<FeatureKind>,
        weights: RankNetModel,
        normalizer: Normalizer,
        config: RankNetConfig,
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeConfig {
    pub gamma: f64,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            gamma: crate::DEFAULT_RIDGE_GAMMA,
        }
    }
}

/// A scorer trained on normalized features of a fixed subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub features: Vec<FeatureKind>,
    pub normalizer: Normalizer,
    pub scorer: Scorer,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scorer {
    Ridge(RidgeModel),
    RankNet(RankNetModel),
}

/// Which supervised model to train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Ridge(RidgeConfig),
    #[serde(rename = "ranknet")]
    RankNet(RankNetConfig),
}

impl Pipeline {
    /// Fits the normalizer on `train` and the model on the normalized rows.
    /// Every training vector must carry a target `y`.
    pub fn fit(train: &[FeatureVector], features: &[FeatureKind], spec: &ModelSpec) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidConfig("empty feature subset".into()));
        }
        let rows: Vec<Vec<f64>> = train.iter().map(|v| v.select(features)).collect();
        let y = train
            .iter()
            .map(|v| v.y.map(|y| y as f64))
            .collect::<Option<Vec<f64>>>()
            .ok_or(Error::EmptyTrainingSet("training vector without target"))?;
        let normalizer = Normalizer::fit(&rows)?;
        let z = normalizer.transform_all(&rows)?;
        let scorer = match spec {
            ModelSpec::Ridge(cfg) => Scorer::Ridge(RidgeModel::fit(&z, &y, cfg.gamma)?),
            ModelSpec::RankNet(cfg) => Scorer::RankNet(RankNetModel::train(&z, &y, cfg)?),
        };
        Ok(Self {
            features: features.to_vec(),
            normalizer,
            scorer,
        })
    }

    pub fn score(&self, v: &FeatureVector) -> Result<f64> {
        let z = self.normalizer.transform(&v.select(&self.features))?;
        match &self.scorer {
            Scorer::Ridge(m) => m.predict(&z),
            Scorer::RankNet(m) => m.predict(&z),
        }
    }

    pub fn to_file(&self) -> ModelFile {
        match &self.scorer {
            Scorer::Ridge(m) => ModelFile::Ridge {
                features: self.features.clone(),
                weights: m.clone(),
                normalizer: self.normalizer.clone(),
                config: RidgeConfig { gamma: m.gamma },
                seed: None,
            },
            Scorer::RankNet(m) => ModelFile::RankNet {
                features: self.features.clone(),
                weights: m.clone(),
                normalizer: self.normalizer.clone(),
                config: m.config.clone(),
                seed: Some(m.config.seed),
            },
        }
    }

    pub fn from_file(file: ModelFile) -> Self {
        match file {
            ModelFile::Ridge {
                features,
                weights,
                normalizer,
                ..
            } => Self {
                features,
                normalizer,
                scorer: Scorer::Ridge(weights),
            },
            ModelFile::RankNet {
                features,
                weights,
                normalizer,
                ..
            } => Self {
                features,
                normalizer,
                scorer: Scorer::RankNet(weights),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn scored(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
        pairs.iter().map(|(a, s)| (a.to_string(), *s)).collect()
    }

    #[test]
    fn descending_scores() {
        let r = rank_by_score(&scored(&[("b", 1.0), ("a", 2.0)])).unwrap();
        assert_eq!(r.ids(), ["a", "b"]);
    }

    #[test]
    fn ties_follow_id_order() {
        let r = rank_by_score(&scored(&[("c", 0.5), ("a", 0.5), ("b", 0.5)])).unwrap();
        assert_eq!(r.ids(), ["a", "b", "c"]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(rank_by_score(&scored(&[("a", 0.5), ("a", 0.1)])).is_err());
    }

    proptest! {
        #[test]
        fn monotone_transform_keeps_ranking(scores in proptest::collection::vec(-50.0f64..50.0, 1..30)) {
            let ids: Vec<(String, f64)> = scores
                .iter()
                .enumerate()
                .map(|(i, s)| (alloc::format!("a{i:03}"), *s))
                .collect();
            let base = rank_by_score(&ids).unwrap();
            let top = ids.iter().max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0))).unwrap();
            prop_assert_eq!(base.rank(&top.0), Some(1));
            let transformed: Vec<(String, f64)> =
                ids.iter().map(|(id, s)| (id.clone(), libm::exp(*s / 10.0) * 3.0 + 1.0)).collect();
            prop_assert_eq!(rank_by_score(&transformed).unwrap(), base);
        }
    }
}

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankNetConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for RankNetConfig {
    fn default() -> Self {
        Self {
            hidden: 10,
            learning_rate: 0.01,
            epochs: 100,
            seed: 0,
        }
    }
}

/// Pairwise cross-entropy `-p * o + ln(1 + e^o)` for score difference `o`
/// and target probability `p` that the first item ranks higher.
pub fn pairwise_loss(o: f64, target: f64) -> f64 {
    -target * o + softplus(o)
}

fn softplus(o: f64) -> f64 {
    o.max(0.0) + libm::log1p(libm::exp(-o.abs()))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

/// One-hidden-layer network scoring a feature row, trained on ordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankNetModel {
    pub input_dim: usize,
    /// Row-major `hidden x input_dim`.
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub config: RankNetConfig,
    /// Mean pairwise loss after each epoch.
    pub loss_history: Vec<f64>,
}

impl RankNetModel {
    /// Trains on every pair with different targets, the higher target first.
    ///
    /// Plain stochastic gradient descent, one update per pair, pair order
    /// reshuffled each epoch. Deterministic given `config.seed`.
    pub fn train<R: AsRef<[f64]>>(x: &[R], y: &[f64], config: &RankNetConfig) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::EmptyTrainingSet("ranknet needs at least two rows"));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if config.hidden == 0 || !(config.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "ranknet hidden = {}, learning rate = {}",
                config.hidden,
                config.learning_rate
            )));
        }
        let dim = x[0].as_ref().len();
        for r in x {
            if r.as_ref().len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.as_ref().len(),
                });
            }
        }

        let mut pairs = Vec::new();
        for i in 0..y.len() {
            for j in 0..y.len() {
                if y[i] > y[j] {
                    pairs.push((i, j));
                }
            }
        }
        if pairs.is_empty() {
            return Err(Error::NoTrainablePairs);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let scale = 1.0 / libm::sqrt(dim.max(1) as f64);
        let hidden = config.hidden;
        let mut model = Self {
            input_dim: dim,
            hidden_weights: (0..hidden * dim).map(|_| rng.gen_range(-scale..scale)).collect(),
            hidden_bias: (0..hidden).map(|_| rng.gen_range(-0.1..0.1)).collect(),
            output_weights: (0..hidden).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            config: config.clone(),
            loss_history: Vec::with_capacity(config.epochs),
        };

        let mut act_a = alloc::vec![0.0; hidden];
        let mut act_b = alloc::vec![0.0; hidden];
        for _ in 0..config.epochs {
            pairs.shuffle(&mut rng);
            for &(a, b) in &pairs {
                let (xa, xb) = (x[a].as_ref(), x[b].as_ref());
                let o = model.forward(xa, &mut act_a) - model.forward(xb, &mut act_b);
                // d loss / d o with target probability 1
                let lambda = sigmoid(o) - 1.0;
                model.step(xa, xb, &act_a, &act_b, lambda);
            }
            let loss = pairs
                .iter()
                .map(|&(a, b)| {
                    pairwise_loss(model.score(x[a].as_ref()) - model.score(x[b].as_ref()), 1.0)
                })
                .sum::<f64>()
                / pairs.len() as f64;
            model.loss_history.push(loss);
        }
        Ok(model)
    }

    fn forward(&self, x: &[f64], act: &mut [f64]) -> f64 {
        let mut out = 0.0;
        for (h, a) in act.iter_mut().enumerate() {
            let row = &self.hidden_weights[h * self.input_dim..(h + 1) * self.input_dim];
            let z = self.hidden_bias[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            *a = sigmoid(z);
            out += self.output_weights[h] * *a;
        }
        out
    }

    fn step(&mut self, xa: &[f64], xb: &[f64], act_a: &[f64], act_b: &[f64], lambda: f64) {
        let lr = self.config.learning_rate;
        let dim = self.input_dim;
        for h in 0..act_a.len() {
            let v = self.output_weights[h];
            let ga = v * act_a[h] * (1.0 - act_a[h]);
            let gb = v * act_b[h] * (1.0 - act_b[h]);
            self.output_weights[h] -= lr * lambda * (act_a[h] - act_b[h]);
            self.hidden_bias[h] -= lr * lambda * (ga - gb);
            let row = &mut self.hidden_weights[h * dim..(h + 1) * dim];
            for ((w, pa), pb) in row.iter_mut().zip(xa).zip(xb) {
                *w -= lr * lambda * (ga * pa - gb * pb);
            }
        }
    }

    /// Network output `H(x)`; higher means ranked earlier.
    pub fn score(&self, x: &[f64]) -> f64 {
        let mut act = alloc::vec![0.0; self.hidden_bias.len()];
        self.forward(x, &mut act)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(self.score(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn monotone(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 - n as f64 / 2.0) / 5.0]).collect();
        let y = (0..n).map(|i| (i * i) as f64).collect();
        (x, y)
    }

    fn pair_accuracy(m: &RankNetModel, x: &[Vec<f64>], y: &[f64]) -> f64 {
        let (mut ok, mut total) = (0, 0);
        for i in 0..y.len() {
            for j in 0..y.len() {
                if y[i] > y[j] {
                    total += 1;
                    if m.score(&x[i]) > m.score(&x[j]) {
                        ok += 1;
                    }
                }
            }
        }
        ok as f64 / total as f64
    }

    #[test]
    fn loss_at_zero_is_ln_two() {
        assert_eq!(pairwise_loss(0.0, 1.0), core::f64::consts::LN_2);
        assert!((pairwise_loss(30.0, 1.0)).abs() < 1e-12);
        assert!((pairwise_loss(-30.0, 1.0) - 30.0).abs() < 1e-12);
        assert!((pairwise_loss(2.0, 0.0) - softplus(2.0)).abs() < 1e-15);
    }

    #[test]
    fn learns_monotone_order() {
        let (x, y) = monotone(20);
        let m = RankNetModel::train(&x, &y, &RankNetConfig::default()).unwrap();
        assert!(pair_accuracy(&m, &x, &y) >= 0.95);
        assert!(m.loss_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn seeded_runs_match() {
        let (x, y) = monotone(12);
        let cfg = RankNetConfig {
            seed: 42,
            ..RankNetConfig::default()
        };
        let a = RankNetModel::train(&x, &y, &cfg).unwrap();
        let b = RankNetModel::train(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
        let c = RankNetModel::train(&x, &y, &RankNetConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.hidden_weights, c.hidden_weights);
    }

    #[test]
    fn equal_targets_cannot_train() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert_eq!(
            RankNetModel::train(&x, &[5.0, 5.0, 5.0], &RankNetConfig::default()),
            Err(Error::NoTrainablePairs)
        );
        assert!(RankNetModel::train(&x[..1], &[1.0], &RankNetConfig::default()).is_err());
    }
}

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::Experiment;
use crate::model::RankedList;

/// Linear relevance from the ground-truth position: 1 for the first area,
/// `1 / |L|` for the last.
pub fn relevance(id: &str, truth: &RankedList) -> Result<f64> {
    let rank = truth
        .rank(id)
        .ok_or_else(|| Error::UnknownArea(id.into()))?;
    Ok(relevance_at(rank, truth.len()))
}

fn relevance_at(rank: usize, len: usize) -> f64 {
    (len - rank + 1) as f64 / len as f64
}

fn gain(rel: f64) -> f64 {
    libm::exp2(rel) - 1.0
}

fn discount(position: usize) -> f64 {
    libm::log2(position as f64 + 1.0)
}

/// NDCG@k of `predicted` against the ground-truth order `truth`.
///
/// Gains are `2^rel - 1` with [`relevance`], discounted by `log2(i + 1)` at
/// 1-based position `i`, and normalized by the DCG of `truth` itself.
pub fn ndcg_at_k(predicted: &RankedList, truth: &RankedList, k: usize) -> Result<f64> {
    let len = truth.len();
    if k == 0 || k > len {
        return Err(Error::KOutOfRange { k, len });
    }
    if predicted.len() != len {
        return Err(Error::NotAPermutation);
    }
    let ranks = truth.ranks();
    let mut dcg = 0.0;
    for (i, id) in predicted.ids().iter().take(k).enumerate() {
        let rank = *ranks.get(id.as_str()).ok_or(Error::NotAPermutation)?;
        dcg += gain(relevance_at(rank, len)) / discount(i + 1);
    }
    Ok(dcg / ideal_dcg(len, k))
}

fn ideal_dcg(len: usize, k: usize) -> f64 {
    (1..=k)
        .map(|i| gain(relevance_at(i, len)) / discount(i))
        .sum()
}

/// Smallest number of top positions that covers `x` percent of `len`; never 0.
pub fn top_fraction_cutoff(x: f64, len: usize) -> usize {
    let raw = libm::ceil(x * len as f64 / 100.0 - 1e-9);
    (raw.max(1.0) as usize).min(len.max(1))
}

/// Fraction of experiments whose top predicted area is within the top `x`%
/// of the ground truth.
pub fn accuracy_at_x(experiments: &[Experiment], x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 100.0) {
        return Err(Error::InvalidConfig(alloc::format!("X = {x} is outside (0, 100]")));
    }
    if experiments.is_empty() {
        return Ok(0.0);
    }
    let hits = experiments
        .iter()
        .filter(|e| e.top_hit_rank <= top_fraction_cutoff(x, e.truth.len()))
        .count();
    Ok(hits as f64 / experiments.len() as f64)
}

/// Monte Carlo mean NDCG@k of uniformly random orderings of `len` areas.
pub fn random_baseline(len: usize, k: usize, trials: usize, seed: u64) -> Result<f64> {
    if k == 0 || k > len {
        return Err(Error::KOutOfRange { k, len });
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("random baseline needs at least one trial".into()));
    }
    let gains: Vec<f64> = (1..=len).map(|r| gain(relevance_at(r, len))).collect();
    let discounts: Vec<f64> = (1..=k).map(discount).collect();
    let ideal = ideal_dcg(len, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..len).collect();
    let mut total = 0.0;
    for _ in 0..trials {
        let (head, _) = order.partial_shuffle(&mut rng, k);
        let dcg: f64 = head
            .iter()
            .zip(&discounts)
            .map(|(&r, d)| gains[r] / d)
            .sum();
        total += dcg / ideal;
    }
    Ok(total / trials as f64)
}

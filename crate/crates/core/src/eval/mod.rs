//! Ranking metrics and the repeated random-holdout evaluation over store areas.

mod cv;
mod metrics;

pub use cv::{
    aggregate, cross_validate, prepare, run_experiment, test_size, CvConfig, EvalReport,
    Experiment, Prepared, Ranker,
};
pub use metrics::{
    accuracy_at_x, ndcg_at_k, random_baseline, relevance, top_fraction_cutoff,
};

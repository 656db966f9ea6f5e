use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown chain `{0}`")]
    UnknownChain(String),

    #[error("unknown venue `{0}`")]
    UnknownVenue(String),

    #[error("unknown area `{0}`")]
    UnknownArea(String),

    #[error("chain `{chain}` has {stores} stores, at least {required} are required")]
    TooFewStores {
        chain: String,
        stores: usize,
        required: usize,
    },

    #[error("k = {k} is out of range for a list of {len} areas (need 1 <= k <= {len})")]
    KOutOfRange { k: usize, len: usize },

    #[error("radius mismatch: area uses {area} m, coefficient tables were built for {tables} m")]
    RadiusMismatch { area: f64, tables: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training set is empty or too small: {0}")]
    EmptyTrainingSet(&'static str),

    #[error("all training targets are equal; no pairs to learn from")]
    NoTrainablePairs,

    #[error("normal equations are singular (try ridge_gamma > 0)")]
    Singular,

    #[error("rankings are not permutations of the same candidate set")]
    NotAPermutation,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

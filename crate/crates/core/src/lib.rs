//! Retail site selection from venue and check-in data.
//!
//! Candidate areas (disks around prospective store locations) are described by
//! eight features: four geographic ones computed from the placement and type of
//! surrounding venues, and four mobility ones computed from check-ins and the
//! transitions between consecutive check-ins of the same user. Areas are then
//! ranked either by a single feature or by a supervised model (ridge
//! regression or a pairwise RankNet), and rankings are scored against the
//! observed popularity of the stores with NDCG@k and Accuracy@X%.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. File formats, the command-line interface and parallel execution
//! live in the `siterank` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod catalog;
pub mod error;
pub mod eval;
pub mod features;
pub mod geo;
pub mod ingest;
pub mod mobility;
pub mod model;
pub mod models;
pub mod spatial;
pub mod synth;

pub use catalog::Catalog;
pub use error::{Error, Result};
pub use model::{
    CandidateArea, CategoryId, CheckIn, Dataset, FeatureKind, FeatureVector, LatLon, RankedList,
    Transition, Venue, VenueId, Violation,
};

/// Default candidate-area radius in meters.
pub const DEFAULT_RADIUS_M: f64 = 200.0;

/// Default ridge penalty.
pub const DEFAULT_RIDGE_GAMMA: f64 = 1e-8;

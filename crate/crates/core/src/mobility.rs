//! Mobility features built from check-ins and user transitions, and the
//! category-level transition probability and ratio tables.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, Neighborhood};
use crate::model::{CandidateArea, CategoryId};
use crate::spatial::haversine_distance;

/// Total check-ins at the venues inside the area.
pub fn area_popularity(area: &CandidateArea, catalog: &Catalog<'_>) -> f64 {
    area_popularity_of(catalog, &catalog.neighborhood(area))
}

/// Transitions with both endpoints inside the area.
pub fn transition_density(area: &CandidateArea, catalog: &Catalog<'_>) -> f64 {
    flows(catalog, &catalog.neighborhood(area), area).0
}

/// Transitions from a venue farther than `r` to a venue inside the area.
pub fn incoming_flow(area: &CandidateArea, catalog: &Catalog<'_>) -> f64 {
    flows(catalog, &catalog.neighborhood(area), area).1
}

pub(crate) fn area_popularity_of(catalog: &Catalog<'_>, hood: &Neighborhood) -> f64 {
    hood.members
        .iter()
        .map(|&m| catalog.checkins(m))
        .sum::<u64>() as f64
}

/// `(interior, incoming)` transition counts. Transitions touching the focal
/// venue never count: the focal venue is not in `hood`, and sources equal to it
/// are skipped. A source at exactly distance `r` is neither inside nor outside.
pub(crate) fn flows(catalog: &Catalog<'_>, hood: &Neighborhood, area: &CandidateArea) -> (f64, f64) {
    let mut interior = 0u64;
    let mut incoming = 0u64;
    for &n in &hood.members {
        for &m in catalog.incoming(n) {
            if Some(m) == hood.focal {
                continue;
            }
            if hood.contains(m) {
                interior += 1;
            } else if haversine_distance(catalog.location(m), area.center) > area.radius_m {
                incoming += 1;
            }
        }
    }
    (interior as f64, incoming as f64)
}

/// Which normalization to apply when turning `sigma` into a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioVariant {
    /// `sigma * (N - N_a) / (N_a * N_b)`.
    #[default]
    Pair,
    /// `sigma * (N - N_a) / N_b`: sigma over the share of `b` among the venues
    /// a category-`a` venue can move to.
    Destination,
}

/// Category-level transition probabilities and ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionTables {
    categories: Vec<CategoryId>,
    sizes: Vec<u64>,
    total: u64,
    /// Row-major `[from * k + to]`.
    sigma: Vec<f64>,
}

impl TransitionTables {
    pub fn categories(&self) -> &[CategoryId] {
        &self.categories
    }

    fn idx(&self, c: &CategoryId) -> Option<usize> {
        self.categories.binary_search(c).ok()
    }

    /// Mean fraction of a category-`from` venue's check-ins followed by a move
    /// to a category-`to` venue.
    pub fn sigma(&self, from: &CategoryId, to: &CategoryId) -> Option<f64> {
        let (a, b) = (self.idx(from)?, self.idx(to)?);
        Some(self.sigma[a * self.categories.len() + b])
    }

    pub fn rho(&self, from: &CategoryId, to: &CategoryId) -> Option<f64> {
        self.rho_with(from, to, RatioVariant::Pair)
    }

    pub fn rho_with(&self, from: &CategoryId, to: &CategoryId, variant: RatioVariant) -> Option<f64> {
        let (a, b) = (self.idx(from)?, self.idx(to)?);
        Some(self.ratio(a, b, variant))
    }

    fn ratio(&self, a: usize, b: usize, variant: RatioVariant) -> f64 {
        let sigma = self.sigma[a * self.categories.len() + b];
        let rest = self.total as f64 - self.sizes[a] as f64;
        let denom = match variant {
            RatioVariant::Pair => self.sizes[a] as f64 * self.sizes[b] as f64,
            RatioVariant::Destination => self.sizes[b] as f64,
        };
        sigma * rest / denom
    }

    /// All `(from, to, sigma, rho)` rows in category order.
    pub fn rows(
        &self,
        variant: RatioVariant,
    ) -> impl Iterator<Item = (&CategoryId, &CategoryId, f64, f64)> + '_ {
        let k = self.categories.len();
        (0..k * k).map(move |i| {
            let (a, b) = (i / k, i % k);
            (
                &self.categories[a],
                &self.categories[b],
                self.sigma[i],
                self.ratio(a, b, variant),
            )
        })
    }

    pub(crate) fn sigma_at(&self, from: usize, to: usize) -> f64 {
        self.sigma[from * self.categories.len() + to]
    }
}

/// Builds `sigma` as the arithmetic mean, over venues of the source category
/// with at least one check-in, of `transitions(p -> category b) / C_p`.
pub fn transition_tables(catalog: &Catalog<'_>) -> TransitionTables {
    let k = catalog.categories().len();
    let mut sums = vec![0.0f64; k * k];
    let mut active = vec![0u64; k];
    let mut per_dest = vec![0u64; k];

    for p in 0..catalog.venue_count() {
        let cp = catalog.checkins(p);
        if cp == 0 {
            continue;
        }
        let a = catalog.category_of(p);
        active[a] += 1;
        per_dest.iter_mut().for_each(|x| *x = 0);
        for &n in catalog.outgoing(p) {
            per_dest[catalog.category_of(n)] += 1;
        }
        for (b, &t) in per_dest.iter().enumerate() {
            if t > 0 {
                sums[a * k + b] += t as f64 / cp as f64;
            }
        }
    }

    let sigma = sums
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let n = active[i / k];
            if n == 0 {
                0.0
            } else {
                s / n as f64
            }
        })
        .collect();

    TransitionTables {
        categories: catalog.categories().to_vec(),
        sizes: catalog.category_sizes().to_vec(),
        total: catalog.venue_count() as u64,
        sigma,
    }
}

/// Check-ins at neighboring venues weighted by the probability that a visit
/// there is followed by a move to the target category.
pub fn transition_quality(
    area: &CandidateArea,
    catalog: &Catalog<'_>,
    tables: &TransitionTables,
) -> f64 {
    transition_quality_of(catalog, &catalog.neighborhood(area), area, tables)
}

pub(crate) fn transition_quality_of(
    catalog: &Catalog<'_>,
    hood: &Neighborhood,
    area: &CandidateArea,
    tables: &TransitionTables,
) -> f64 {
    let Some(target) = tables.idx(&area.target_category) else {
        return 0.0;
    };
    hood.members
        .iter()
        .filter_map(|&m| {
            let source = tables.idx(&catalog.venue(m).category)?;
            Some(tables.sigma_at(source, target) * catalog.checkins(m) as f64)
        })
        .sum()
}

//! Index-based view of a [`Dataset`] used by the feature code.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{CandidateArea, CategoryId, Dataset, LatLon, Venue, VenueId};
use crate::spatial::{build_index, SpatialIndex};

/// A dataset with venues, categories and transitions resolved to dense indices.
///
/// Venue indices follow `dataset.venues`; category indices follow the sorted
/// category set. Transitions whose endpoints do not resolve are dropped.
#[derive(Debug, Clone)]
pub struct Catalog<'a> {
    dataset: &'a Dataset,
    index: SpatialIndex,
    categories: Vec<CategoryId>,
    category_sizes: Vec<u64>,
    venue_category: Vec<usize>,
    counts: Vec<u64>,
    by_id: BTreeMap<&'a VenueId, usize>,
    transitions: Vec<(usize, usize)>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl<'a> Catalog<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        let categories: Vec<CategoryId> = dataset.categories.iter().cloned().collect();
        let venue_category: Vec<usize> = dataset
            .venues
            .iter()
            .map(|v| categories.binary_search(&v.category).unwrap_or(0))
            .collect();
        let mut category_sizes = vec![0u64; categories.len()];
        for &c in &venue_category {
            category_sizes[c] += 1;
        }
        let by_id: BTreeMap<&VenueId, usize> = dataset
            .venues
            .iter()
            .enumerate()
            .map(|(i, v)| (&v.id, i))
            .collect();
        let counts = dataset
            .venues
            .iter()
            .map(|v| dataset.checkin_count(&v.id))
            .collect();

        let n = dataset.venues.len();
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        let mut transitions = Vec::with_capacity(dataset.transitions.len());
        for t in &dataset.transitions {
            if let (Some(&m), Some(&k)) = (by_id.get(&t.from), by_id.get(&t.to)) {
                outgoing[m].push(k);
                incoming[k].push(m);
                transitions.push((m, k));
            }
        }

        Self {
            dataset,
            index: build_index(&dataset.venues),
            categories,
            category_sizes,
            venue_category,
            counts,
            by_id,
            transitions,
            incoming,
            outgoing,
        }
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn index(&self) -> &SpatialIndex {
        &self.index
    }

    pub fn venue_count(&self) -> usize {
        self.venue_category.len()
    }

    pub fn venue(&self, i: usize) -> &'a Venue {
        &self.dataset.venues[i]
    }

    pub fn location(&self, i: usize) -> LatLon {
        self.index.point(i)
    }

    pub fn venue_index(&self, id: &VenueId) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn categories(&self) -> &[CategoryId] {
        &self.categories
    }

    pub fn category_index(&self, c: &CategoryId) -> Option<usize> {
        self.categories.binary_search(c).ok()
    }

    /// Number of venues of each category.
    pub fn category_sizes(&self) -> &[u64] {
        &self.category_sizes
    }

    pub fn category_of(&self, venue: usize) -> usize {
        self.venue_category[venue]
    }

    /// Check-in count `C_p` of venue `i`.
    pub fn checkins(&self, venue: usize) -> u64 {
        self.counts[venue]
    }

    /// Resolved transitions as `(from, to)` venue indices.
    pub fn transitions(&self) -> &[(usize, usize)] {
        &self.transitions
    }

    /// Sources of the transitions arriving at `venue`, one entry per transition.
    pub fn incoming(&self, venue: usize) -> &[usize] {
        &self.incoming[venue]
    }

    /// Destinations of the transitions leaving `venue`, one entry per transition.
    pub fn outgoing(&self, venue: usize) -> &[usize] {
        &self.outgoing[venue]
    }

    /// Resolves the area's focal venue; `Ok(None)` when the area has none.
    pub fn focal(&self, area: &CandidateArea) -> Result<Option<usize>> {
        match &area.focal_venue {
            None => Ok(None),
            Some(id) => self
                .venue_index(id)
                .map(Some)
                .ok_or_else(|| Error::UnknownVenue(id.0.clone())),
        }
    }

    /// Venues strictly inside the area's disk, focal venue excluded.
    ///
    /// An unresolvable focal venue excludes nothing.
    pub fn neighborhood(&self, area: &CandidateArea) -> Neighborhood {
        let focal = self.focal(area).ok().flatten();
        self.disk(area.center, area.radius_m, focal)
    }

    /// Venues strictly within `r` of `center`, except `exclude`.
    pub fn disk(&self, center: LatLon, r: f64, exclude: Option<usize>) -> Neighborhood {
        let mut members = self.index.query(center, r);
        if let Some(x) = exclude {
            members.retain(|&i| i != x);
        }
        Neighborhood {
            members,
            focal: exclude,
        }
    }

    /// Per-category neighbor counts of `members`.
    pub fn category_counts(&self, members: &[usize]) -> Vec<u64> {
        let mut out = vec![0u64; self.categories.len()];
        for &m in members {
            out[self.venue_category[m]] += 1;
        }
        out
    }
}

/// The venues inside a disk, sorted by venue index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    pub members: Vec<usize>,
    /// The venue left out of `members`, if any.
    pub focal: Option<usize>,
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, venue: usize) -> bool {
        self.members.binary_search(&venue).is_ok()
    }
}

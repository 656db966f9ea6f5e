//! Domain types shared by every module.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::derive_transitions;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Opaque venue identifier, unique within a [`Dataset`].
    VenueId
);
string_id!(
    /// Venue category label. Categories form a flat set.
    CategoryId
);

/// A point on the sphere in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn in_range(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Venue {
    pub id: VenueId,
    pub location: LatLon,
    pub category: CategoryId,
    pub chain: Option<String>,
}

impl Venue {
    pub fn new(id: impl Into<VenueId>, lat: f64, lon: f64, category: impl Into<CategoryId>) -> Self {
        Self {
            id: id.into(),
            location: LatLon::new(lat, lon),
            category: category.into(),
            chain: None,
        }
    }

    pub fn with_chain(mut self, chain: impl Into<String>) -> Self {
        self.chain = Some(chain.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckIn {
    pub user: String,
    pub venue: VenueId,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
}

impl CheckIn {
    pub fn new(user: impl Into<String>, venue: impl Into<VenueId>, timestamp: i64) -> Self {
        Self {
            user: user.into(),
            venue: venue.into(),
            timestamp,
        }
    }
}

/// Two consecutive check-ins of one user at different venues.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub from: VenueId,
    pub to: VenueId,
    pub user: String,
    pub t_from: i64,
    pub t_to: i64,
}

/// The immutable world every feature reads from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub venues: Vec<Venue>,
    pub checkins: Vec<CheckIn>,
    pub transitions: Vec<Transition>,
    pub categories: BTreeSet<CategoryId>,
    pub checkin_counts: BTreeMap<VenueId, u64>,
}

impl Dataset {
    /// Builds a dataset, deriving transitions with no gap limit.
    pub fn new(venues: Vec<Venue>, checkins: Vec<CheckIn>) -> Self {
        Self::with_max_gap(venues, checkins, None)
    }

    /// Builds a dataset, deriving transitions whose gap is at most `max_gap_s` seconds.
    pub fn with_max_gap(venues: Vec<Venue>, checkins: Vec<CheckIn>, max_gap_s: Option<i64>) -> Self {
        let transitions = derive_transitions(&checkins, max_gap_s);
        let categories = venues.iter().map(|v| v.category.clone()).collect();
        let mut checkin_counts: BTreeMap<VenueId, u64> =
            venues.iter().map(|v| (v.id.clone(), 0)).collect();
        for c in &checkins {
            if let Some(n) = checkin_counts.get_mut(&c.venue) {
                *n += 1;
            }
        }
        Self {
            venues,
            checkins,
            transitions,
            categories,
            checkin_counts,
        }
    }

    pub fn checkin_count(&self, venue: &VenueId) -> u64 {
        self.checkin_counts.get(venue).copied().unwrap_or(0)
    }

    pub fn venue(&self, id: &VenueId) -> Option<&Venue> {
        self.venues.iter().find(|v| &v.id == id)
    }

    /// Venues belonging to `chain`, in dataset order.
    pub fn chain_venues<'a>(&'a self, chain: &'a str) -> impl Iterator<Item = &'a Venue> + 'a {
        self.venues
            .iter()
            .filter(move |v| v.chain.as_deref() == Some(chain))
    }

    /// Distinct chain labels, sorted.
    pub fn chains(&self) -> BTreeSet<&str> {
        self.venues.iter().filter_map(|v| v.chain.as_deref()).collect()
    }
}

/// A broken [`Dataset`] invariant and the id that breaks it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    DuplicateVenueId(VenueId),
    EmptyCategory(VenueId),
    CoordinateOutOfRange(VenueId),
    UnresolvedVenue(VenueId),
    CountMismatch(VenueId),
    CategorySetMismatch(CategoryId),
    InvalidTransition { from: VenueId, to: VenueId },
    TransitionNotDerivable { from: VenueId, to: VenueId },
}

/// Lists every broken invariant of `d`; empty when the dataset is well formed.
///
/// Transitions must appear among the adjacent check-in pairs derived with no
/// gap limit, so datasets built with a `max_gap_s` also validate.
pub fn validate_dataset(d: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |v: Violation, out: &mut Vec<Violation>| {
        if seen.insert(v.clone()) {
            out.push(v);
        }
    };

    let mut ids = BTreeSet::new();
    for v in &d.venues {
        if !ids.insert(&v.id) {
            push(Violation::DuplicateVenueId(v.id.clone()), &mut out);
        }
        if v.category.0.is_empty() {
            push(Violation::EmptyCategory(v.id.clone()), &mut out);
        }
        if !v.location.in_range() || !v.location.lat.is_finite() || !v.location.lon.is_finite() {
            push(Violation::CoordinateOutOfRange(v.id.clone()), &mut out);
        }
    }

    let mut actual: BTreeMap<&VenueId, u64> = ids.iter().map(|id| (*id, 0)).collect();
    for c in &d.checkins {
        match actual.get_mut(&c.venue) {
            Some(n) => *n += 1,
            None => push(Violation::UnresolvedVenue(c.venue.clone()), &mut out),
        }
    }
    for (id, n) in &actual {
        if d.checkin_counts.get(*id) != Some(n) {
            push(Violation::CountMismatch((*id).clone()), &mut out);
        }
    }
    for id in d.checkin_counts.keys() {
        if !actual.contains_key(id) {
            push(Violation::CountMismatch(id.clone()), &mut out);
        }
    }

    let present: BTreeSet<&CategoryId> = d.venues.iter().map(|v| &v.category).collect();
    for c in d.categories.iter().filter(|c| !present.contains(c)) {
        push(Violation::CategorySetMismatch(c.clone()), &mut out);
    }
    for c in present.iter().filter(|c| !d.categories.contains(**c)) {
        push(Violation::CategorySetMismatch((*c).clone()), &mut out);
    }

    let mut derivable: BTreeMap<&Transition, usize> = BTreeMap::new();
    let derived = derive_transitions(&d.checkins, None);
    for t in &derived {
        *derivable.entry(t).or_default() += 1;
    }
    for t in &d.transitions {
        for end in [&t.from, &t.to] {
            if !ids.contains(end) {
                push(Violation::UnresolvedVenue(end.clone()), &mut out);
            }
        }
        if t.from == t.to || t.t_to < t.t_from {
            push(
                Violation::InvalidTransition {
                    from: t.from.clone(),
                    to: t.to.clone(),
                },
                &mut out,
            );
        }
        match derivable.get_mut(t) {
            Some(n) if *n > 0 => *n -= 1,
            _ => push(
                Violation::TransitionNotDerivable {
                    from: t.from.clone(),
                    to: t.to.clone(),
                },
                &mut out,
            ),
        }
    }
    out
}

/// A disk of `radius_m` around a prospective store location.
///
/// When `focal_venue` is set, that venue together with its check-ins and
/// transitions is treated as if it did not exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateArea {
    pub id: String,
    pub center: LatLon,
    pub radius_m: f64,
    pub focal_venue: Option<VenueId>,
    pub target_category: CategoryId,
}

impl CandidateArea {
    pub fn new(
        id: impl Into<String>,
        center: LatLon,
        radius_m: f64,
        target_category: impl Into<CategoryId>,
    ) -> Self {
        Self {
            id: id.into(),
            center,
            radius_m,
            focal_venue: None,
            target_category: target_category.into(),
        }
    }

    /// The area around an existing store, with the store itself excluded.
    pub fn around_store(store: &Venue, radius_m: f64) -> Self {
        Self {
            id: store.id.0.clone(),
            center: store.location,
            radius_m,
            focal_venue: Some(store.id.clone()),
            target_category: store.category.clone(),
        }
    }
}

/// The eight area features in their canonical slot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Density,
    Entropy,
    Competitiveness,
    JensenQuality,
    AreaPopularity,
    TransitionDensity,
    IncomingFlow,
    TransitionQuality,
}

impl FeatureKind {
    pub const COUNT: usize = 8;

    pub const ALL: [FeatureKind; Self::COUNT] = [
        FeatureKind::Density,
        FeatureKind::Entropy,
        FeatureKind::Competitiveness,
        FeatureKind::JensenQuality,
        FeatureKind::AreaPopularity,
        FeatureKind::TransitionDensity,
        FeatureKind::IncomingFlow,
        FeatureKind::TransitionQuality,
    ];

    pub const GEOGRAPHIC: [FeatureKind; 4] = [
        FeatureKind::Density,
        FeatureKind::Entropy,
        FeatureKind::Competitiveness,
        FeatureKind::JensenQuality,
    ];

    pub const MOBILITY: [FeatureKind; 4] = [
        FeatureKind::AreaPopularity,
        FeatureKind::TransitionDensity,
        FeatureKind::IncomingFlow,
        FeatureKind::TransitionQuality,
    ];

    pub fn slot(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Density => "density",
            FeatureKind::Entropy => "entropy",
            FeatureKind::Competitiveness => "competitiveness",
            FeatureKind::JensenQuality => "jensen_quality",
            FeatureKind::AreaPopularity => "area_popularity",
            FeatureKind::TransitionDensity => "transition_density",
            FeatureKind::IncomingFlow => "incoming_flow",
            FeatureKind::TransitionQuality => "transition_quality",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown feature `{s}`")))
    }
}

/// Feature values of one candidate area plus, when known, its observed popularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub area: CandidateArea,
    pub x: [f64; FeatureKind::COUNT],
    /// Check-in count of the focal store.
    pub y: Option<u64>,
}

impl FeatureVector {
    pub fn get(&self, kind: FeatureKind) -> f64 {
        self.x[kind.slot()]
    }

    /// Values of `kinds`, in the order given.
    pub fn select(&self, kinds: &[FeatureKind]) -> Vec<f64> {
        kinds.iter().map(|k| self.x[k.slot()]).collect()
    }
}

impl Index<FeatureKind> for FeatureVector {
    type Output = f64;

    fn index(&self, kind: FeatureKind) -> &f64 {
        &self.x[kind.slot()]
    }
}

/// Area ids in rank order; `rank(ids[i]) == i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedList {
    ids: Vec<String>,
}

impl RankedList {
    /// Fails with [`Error::NotAPermutation`] on duplicate ids.
    pub fn new(ids: Vec<String>) -> Result<Self> {
        let unique: BTreeSet<&String> = ids.iter().collect();
        if unique.len() != ids.len() {
            return Err(Error::NotAPermutation);
        }
        Ok(Self { ids })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn first(&self) -> Option<&str> {
        self.ids.first().map(String::as_str)
    }

    /// 1-based position of `id`.
    pub fn rank(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id).map(|i| i + 1)
    }

    /// Map from id to 1-based rank.
    pub fn ranks(&self) -> BTreeMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i + 1))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn three_venues() -> Dataset {
        let venues = vec![
            Venue::new("a", 40.0, -73.0, "Cafe"),
            Venue::new("b", 40.001, -73.0, "Bar"),
            Venue::new("c", 40.002, -73.0, "Cafe").with_chain("X"),
        ];
        let checkins = vec![
            CheckIn::new("u1", "a", 10),
            CheckIn::new("u1", "b", 20),
            CheckIn::new("u2", "c", 15),
        ];
        Dataset::new(venues, checkins)
    }

    #[test]
    fn well_formed_dataset_has_no_violations() {
        assert_eq!(validate_dataset(&three_venues()), vec![]);
    }

    #[test]
    fn unknown_checkin_venue_is_reported() {
        let mut d = three_venues();
        d.checkins.push(CheckIn::new("u3", "v99", 5));
        assert_eq!(
            validate_dataset(&d),
            vec![Violation::UnresolvedVenue("v99".into())]
        );
    }

    #[test]
    fn count_mismatch_is_reported() {
        let mut d = three_venues();
        d.checkins.push(CheckIn::new("u9", "a", 1));
        d.checkins.push(CheckIn::new("u8", "a", 1));
        d.checkins.push(CheckIn::new("u7", "a", 1));
        // four check-ins at `a`, map claims five
        d.checkin_counts.insert("a".into(), 5);
        assert_eq!(validate_dataset(&d), vec![Violation::CountMismatch("a".into())]);
    }

    #[test]
    fn duplicate_and_bad_coordinates() {
        let mut d = three_venues();
        d.venues.push(Venue::new("a", 95.0, 0.0, ""));
        let v = validate_dataset(&d);
        assert!(v.contains(&Violation::DuplicateVenueId("a".into())));
        assert!(v.contains(&Violation::EmptyCategory("a".into())));
        assert!(v.contains(&Violation::CoordinateOutOfRange("a".into())));
        assert!(v.contains(&Violation::CategorySetMismatch("".into())));
    }

    #[test]
    fn fabricated_transition_is_not_derivable() {
        let mut d = three_venues();
        d.transitions.push(Transition {
            from: "b".into(),
            to: "c".into(),
            user: "u1".into(),
            t_from: 20,
            t_to: 30,
        });
        assert_eq!(
            validate_dataset(&d),
            vec![Violation::TransitionNotDerivable {
                from: "b".into(),
                to: "c".into()
            }]
        );
    }

    #[test]
    fn counts_match_checkins() {
        let d = three_venues();
        assert_eq!(d.checkin_count(&"a".into()), 1);
        assert_eq!(d.checkin_count(&"c".into()), 1);
        assert_eq!(d.transitions.len(), 1);
    }

    #[test]
    fn feature_kind_names_round_trip() {
        for k in FeatureKind::ALL {
            assert_eq!(k.name().parse::<FeatureKind>().unwrap(), k);
        }
        assert!("bogus".parse::<FeatureKind>().is_err());
    }

    #[test]
    fn ranked_list_rejects_duplicates() {
        assert!(RankedList::new(vec!["a".into(), "a".into()]).is_err());
        let r = RankedList::new(vec!["b".into(), "a".into()]).unwrap();
        assert_eq!(r.rank("a"), Some(2));
        assert_eq!(r.rank("z"), None);
    }
}

//! Assembly of the eight-slot feature vector for candidate areas.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::geo::{self, JensenCoefficients};
use crate::mobility::{self, TransitionTables};
use crate::model::{CandidateArea, Dataset, FeatureKind, FeatureVector};

/// Computes every feature of `area` from one neighborhood query.
///
/// `y` is the focal venue's check-in count when the area has one. Errors when
/// the coefficient radius differs from the area radius or the focal venue is
/// unknown.
pub fn feature_vector(
    area: &CandidateArea,
    catalog: &Catalog<'_>,
    coeffs: &JensenCoefficients,
    tables: &TransitionTables,
) -> Result<FeatureVector> {
    geo::check_radius(area, coeffs)?;
    let focal = catalog.focal(area)?;
    let hood = catalog.neighborhood(area);
    let counts = catalog.category_counts(&hood.members);
    let (interior, incoming) = mobility::flows(catalog, &hood, area);

    let mut x = [0.0; FeatureKind::COUNT];
    x[FeatureKind::Density.slot()] = hood.len() as f64;
    x[FeatureKind::Entropy.slot()] = geo::entropy_of(&counts);
    x[FeatureKind::Competitiveness.slot()] = geo::competitiveness_of(catalog, &hood, area);
    x[FeatureKind::JensenQuality.slot()] = geo::jensen_quality_of(catalog, &hood, area, coeffs);
    x[FeatureKind::AreaPopularity.slot()] = mobility::area_popularity_of(catalog, &hood);
    x[FeatureKind::TransitionDensity.slot()] = interior;
    x[FeatureKind::IncomingFlow.slot()] = incoming;
    x[FeatureKind::TransitionQuality.slot()] =
        mobility::transition_quality_of(catalog, &hood, area, tables);

    Ok(FeatureVector {
        area: area.clone(),
        x,
        y: focal.map(|f| catalog.checkins(f)),
    })
}

/// A catalog together with the coefficient tables for one radius.
#[derive(Debug, Clone)]
pub struct FeatureExtractor<'a> {
    pub catalog: Catalog<'a>,
    pub jensen: JensenCoefficients,
    pub transitions: TransitionTables,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(dataset: &'a Dataset, radius_m: f64) -> Self {
        let catalog = Catalog::new(dataset);
        let jensen = geo::jensen_coefficients(&catalog, radius_m);
        let transitions = mobility::transition_tables(&catalog);
        Self {
            catalog,
            jensen,
            transitions,
        }
    }

    pub fn radius_m(&self) -> f64 {
        self.jensen.r
    }

    pub fn vector(&self, area: &CandidateArea) -> Result<FeatureVector> {
        feature_vector(area, &self.catalog, &self.jensen, &self.transitions)
    }

    /// Areas around every store of `chain`, each with its own store excluded.
    pub fn store_areas(&self, chain: &str) -> Result<Vec<CandidateArea>> {
        let areas: Vec<CandidateArea> = self
            .catalog
            .dataset()
            .chain_venues(chain)
            .map(|v| CandidateArea::around_store(v, self.radius_m()))
            .collect();
        if areas.is_empty() {
            return Err(Error::UnknownChain(chain.to_string()));
        }
        Ok(areas)
    }

    /// Feature vectors of every store area of `chain`, in dataset order.
    pub fn store_vectors(&self, chain: &str) -> Result<Vec<FeatureVector>> {
        self.store_areas(chain)?
            .iter()
            .map(|a| self.vector(a))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CheckIn, LatLon, Venue};
    use alloc::format;
    use alloc::vec;

    #[test]
    fn empty_city_gives_zero_vector() {
        let d = Dataset::default();
        let fx = FeatureExtractor::new(&d, 200.0);
        let area = CandidateArea::new("l", LatLon::new(40.0, -74.0), 200.0, "Cafe");
        let v = fx.vector(&area).unwrap();
        assert_eq!(v.x, [0.0; 8]);
        assert_eq!(v.y, None);
    }

    #[test]
    fn radius_mismatch() {
        let d = Dataset::default();
        let fx = FeatureExtractor::new(&d, 200.0);
        let area = CandidateArea::new("l", LatLon::new(40.0, -74.0), 150.0, "Cafe");
        assert!(matches!(fx.vector(&area), Err(Error::RadiusMismatch { .. })));
    }

    #[test]
    fn unknown_focal_venue() {
        let d = Dataset::default();
        let fx = FeatureExtractor::new(&d, 200.0);
        let mut area = CandidateArea::new("l", LatLon::new(40.0, -74.0), 200.0, "Cafe");
        area.focal_venue = Some("ghost".into());
        assert_eq!(fx.vector(&area), Err(Error::UnknownVenue("ghost".into())));
    }

    /// Two stores at identical coordinates: each area excludes only its own
    /// store, so the other store is a neighbor of both.
    #[test]
    fn colocated_stores_see_each_other() {
        let venues = vec![
            Venue::new("s1", 40.0, -74.0, "Cafe").with_chain("C"),
            Venue::new("s2", 40.0, -74.0, "Cafe").with_chain("C"),
            Venue::new("n", 40.0005, -74.0, "Bar"),
        ];
        let mut checkins = vec![];
        for i in 0..3 {
            checkins.push(CheckIn::new(format!("a{i}"), "s1", i));
        }
        for i in 0..3 {
            checkins.push(CheckIn::new(format!("b{i}"), "s2", i));
        }
        checkins.push(CheckIn::new("b9", "s2", 99));
        let d = Dataset::new(venues, checkins);
        let fx = FeatureExtractor::new(&d, 200.0);
        let v = fx.store_vectors("C").unwrap();
        // oracle: each area sees {other store (Cafe, 3 or 4 check-ins), n (Bar, 0)}
        assert_eq!(v[0].get(FeatureKind::Density), 2.0);
        assert_eq!(v[0].get(FeatureKind::Entropy), 1.0);
        assert_eq!(v[0].get(FeatureKind::Competitiveness), -0.5);
        assert_eq!(v[0].get(FeatureKind::AreaPopularity), 4.0);
        assert_eq!(v[1].get(FeatureKind::AreaPopularity), 3.0);
        // area popularity reads the other store, so compare the remaining slots
        for k in FeatureKind::ALL {
            if k != FeatureKind::AreaPopularity && k != FeatureKind::TransitionQuality {
                assert_eq!(v[0].get(k), v[1].get(k), "{k}");
            }
        }
        assert_eq!((v[0].y, v[1].y), (Some(3), Some(4)));
    }

    /// Same center, focal stores with different check-in counts in otherwise
    /// identical worlds: x is identical, y differs.
    #[test]
    fn focal_checkins_change_y_only() {
        let build = |store_checkins: i64| {
            let venues = vec![
                Venue::new("s", 40.0, -74.0, "Cafe").with_chain("C"),
                Venue::new("n1", 40.0005, -74.0, "Bar"),
                Venue::new("n2", 40.0, -74.001, "Gym"),
                Venue::new("far", 40.02, -74.0, "Bar"),
            ];
            let mut checkins = vec![
                CheckIn::new("u", "far", 0),
                CheckIn::new("u", "n1", 10),
                CheckIn::new("u", "n2", 20),
                CheckIn::new("u", "s", 30),
                CheckIn::new("w", "n2", 5),
            ];
            for i in 0..store_checkins {
                checkins.push(CheckIn::new(format!("solo{i}"), "s", i));
            }
            Dataset::new(venues, checkins)
        };
        let (d1, d2) = (build(2), build(9));
        let (f1, f2) = (FeatureExtractor::new(&d1, 200.0), FeatureExtractor::new(&d2, 200.0));
        let v1 = f1.store_vectors("C").unwrap().remove(0);
        let v2 = f2.store_vectors("C").unwrap().remove(0);
        assert_eq!(v1.x, v2.x);
        assert_eq!((v1.y, v2.y), (Some(3), Some(10)));
        // n1 and n2 inside, far -> n1 incoming, n1 -> n2 interior
        assert_eq!(v1.get(FeatureKind::Density), 2.0);
        assert_eq!(v1.get(FeatureKind::TransitionDensity), 1.0);
        assert_eq!(v1.get(FeatureKind::IncomingFlow), 1.0);
        assert_eq!(v1.get(FeatureKind::AreaPopularity), 3.0);
    }

    #[test]
    fn unknown_chain() {
        let d = Dataset::new(vec![Venue::new("a", 0.0, 0.0, "Cafe")], vec![]);
        let fx = FeatureExtractor::new(&d, 200.0);
        assert_eq!(fx.store_vectors("Z"), Err(Error::UnknownChain("Z".into())));
    }
}

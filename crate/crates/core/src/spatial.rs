//! Great-circle distance and exact radius queries.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::model::{LatLon, Venue};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

const METERS_PER_DEGREE: f64 = EARTH_RADIUS_M * core::f64::consts::PI / 180.0;

/// Haversine distance in meters.
pub fn haversine_distance(a: LatLon, b: LatLon) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();

    let s_phi = libm::sin(dphi / 2.0);
    let s_lambda = libm::sin(dlambda / 2.0);
    let h = s_phi * s_phi + libm::cos(phi1) * libm::cos(phi2) * s_lambda * s_lambda;
    2.0 * EARTH_RADIUS_M * libm::asin(libm::sqrt(h.min(1.0)))
}

/// Uniform lat/lon grid over a set of points.
///
/// `radius_query` returns exactly the points at distance `< r`; the grid only
/// prunes candidates, membership is always decided by [`haversine_distance`].
#[derive(Debug, Clone, Default)]
pub struct SpatialIndex {
    points: Vec<LatLon>,
    cell_deg: f64,
    cells: BTreeMap<(i64, i64), Vec<u32>>,
}

impl SpatialIndex {
    /// Default grid cell edge, matching the default candidate radius.
    pub const DEFAULT_CELL_M: f64 = 200.0;

    pub fn new(points: Vec<LatLon>, cell_m: f64) -> Self {
        let cell_deg = cell_m.max(1.0) / METERS_PER_DEGREE;
        let mut cells: BTreeMap<(i64, i64), Vec<u32>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(cell_of(*p, cell_deg)).or_default().push(i as u32);
        }
        Self {
            points,
            cell_deg,
            cells,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> LatLon {
        self.points[i]
    }

    /// Indices of all points with `dist(point, center) < r`, ascending.
    pub fn query(&self, center: LatLon, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(center, r, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Calls `f(index, distance)` for every point strictly within `r` of `center`.
    /// Visiting order is unspecified.
    pub fn for_each_within(&self, center: LatLon, r: f64, mut f: impl FnMut(usize, f64)) {
        if self.points.is_empty() || !(r > 0.0) {
            return;
        }
        let mut test = |i: usize| {
            let d = haversine_distance(center, self.points[i]);
            if d < r {
                f(i, d);
            }
        };

        let Some((lat_lo, lat_hi, lon_lo, lon_hi)) = bounding_box(center, r) else {
            (0..self.points.len()).for_each(&mut test);
            return;
        };
        let (r0, c0) = cell_of(LatLon::new(lat_lo, lon_lo), self.cell_deg);
        let (r1, c1) = cell_of(LatLon::new(lat_hi, lon_hi), self.cell_deg);
        let span = ((r1 - r0 + 1) as u128) * ((c1 - c0 + 1) as u128);
        if span > self.cells.len() as u128 {
            for (&(row, col), members) in &self.cells {
                if (r0..=r1).contains(&row) && (c0..=c1).contains(&col) {
                    members.iter().for_each(|&i| test(i as usize));
                }
            }
            return;
        }
        for row in r0..=r1 {
            for (_, members) in self.cells.range((row, c0)..=(row, c1)) {
                members.iter().for_each(|&i| test(i as usize));
            }
        }
    }
}

/// Index over venue coordinates, in venue order.
pub fn build_index(venues: &[Venue]) -> SpatialIndex {
    SpatialIndex::new(
        venues.iter().map(|v| v.location).collect(),
        SpatialIndex::DEFAULT_CELL_M,
    )
}

/// Venues strictly within `r` meters of `center`.
pub fn radius_query<'a>(
    index: &SpatialIndex,
    venues: &'a [Venue],
    center: LatLon,
    r: f64,
) -> Vec<&'a Venue> {
    index.query(center, r).into_iter().map(|i| &venues[i]).collect()
}

fn cell_of(p: LatLon, cell_deg: f64) -> (i64, i64) {
    (
        libm::floor(p.lat / cell_deg) as i64,
        libm::floor(p.lon / cell_deg) as i64,
    )
}

/// Lat/lon box containing the spherical cap of radius `r`, or `None` when the
/// cap touches a pole or wraps the antimeridian.
fn bounding_box(center: LatLon, r: f64) -> Option<(f64, f64, f64, f64)> {
    const SLACK_DEG: f64 = 1e-9;
    let ang = r / EARTH_RADIUS_M;
    if ang >= core::f64::consts::FRAC_PI_2 {
        return None;
    }
    let dlat = ang.to_degrees() + SLACK_DEG;
    let lat_lo = center.lat - dlat;
    let lat_hi = center.lat + dlat;
    if lat_lo <= -90.0 || lat_hi >= 90.0 {
        return None;
    }
    let ratio = libm::sin(ang) / libm::cos(center.lat.to_radians());
    if ratio >= 1.0 {
        return None;
    }
    let dlon = libm::asin(ratio).to_degrees() + SLACK_DEG;
    let lon_lo = center.lon - dlon;
    let lon_hi = center.lon + dlon;
    if lon_lo < -180.0 || lon_hi > 180.0 {
        return None;
    }
    Some((lat_lo, lat_hi, lon_lo, lon_hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent route: chord length between unit vectors.
    fn chord_distance(a: LatLon, b: LatLon) -> f64 {
        let v = |p: LatLon| {
            let (la, lo) = (p.lat.to_radians(), p.lon.to_radians());
            [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
        };
        let (x, y) = (v(a), v(b));
        let c = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        2.0 * EARTH_RADIUS_M * (c / 2.0).asin()
    }

    #[test]
    fn identical_points_are_zero_apart() {
        let p = LatLon::new(40.75, -73.98);
        assert_eq!(haversine_distance(p, p), 0.0);
    }

    #[test]
    fn one_degree_of_longitude_at_forty_north() {
        let d = haversine_distance(LatLon::new(40.0, -73.0), LatLon::new(40.0, -74.0));
        assert_relative_eq!(d, 85_179.808_950_288_98, max_relative = 1e-9);
    }

    #[test]
    fn antipodes_are_half_a_circumference_apart() {
        let d = haversine_distance(LatLon::new(0.0, 0.0), LatLon::new(0.0, 180.0));
        assert_relative_eq!(d, core::f64::consts::PI * EARTH_RADIUS_M, max_relative = 1e-12);
        assert_relative_eq!(d, 20_015_086.796, epsilon = 1e-2);
    }

    #[test]
    fn empty_index_answers_nothing() {
        let idx = build_index(&[]);
        assert!(idx.query(LatLon::new(0.0, 0.0), 1e7).is_empty());
    }

    #[test]
    fn single_venue_found_at_its_own_location() {
        let venues = vec![Venue::new("a", 40.7, -73.9, "Cafe")];
        let idx = build_index(&venues);
        let hits = radius_query(&idx, &venues, LatLon::new(40.7, -73.9), 1.0);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].id.as_str(), "a");
    }

    #[test]
    fn boundary_is_excluded() {
        let a = LatLon::new(40.0, -73.0);
        let b = LatLon::new(40.0, -73.001);
        let d = haversine_distance(a, b);
        let idx = SpatialIndex::new(vec![b], 200.0);
        assert!(idx.query(a, d).is_empty());
        assert_eq!(idx.query(a, d * (1.0 + 1e-12)), vec![0]);
    }

    #[test]
    fn huge_radius_returns_everything() {
        let pts = vec![
            LatLon::new(40.0, -73.0),
            LatLon::new(-33.0, 151.0),
            LatLon::new(89.9, 10.0),
            LatLon::new(0.0, 179.99),
        ];
        let idx = SpatialIndex::new(pts, 200.0);
        assert_eq!(idx.query(LatLon::new(0.0, 0.0), 2.1e7), vec![0, 1, 2, 3]);
    }

    #[test]
    fn index_matches_linear_scan_on_random_city() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<LatLon> = (0..1000)
            .map(|_| LatLon::new(rng.gen_range(40.70..40.80), rng.gen_range(-74.03..-73.93)))
            .collect();
        let idx = SpatialIndex::new(pts.clone(), 200.0);
        for _ in 0..100 {
            let c = LatLon::new(rng.gen_range(40.69..40.81), rng.gen_range(-74.04..-73.92));
            let r = rng.gen_range(10.0..3000.0);
            let brute: Vec<usize> = (0..pts.len())
                .filter(|&i| haversine_distance(c, pts[i]) < r)
                .collect();
            assert_eq!(idx.query(c, r), brute);
        }
    }

    proptest! {
        #[test]
        fn haversine_agrees_with_chord(
            lat1 in -89.0f64..89.0, lon1 in -179.0f64..179.0,
            lat2 in -89.0f64..89.0, lon2 in -179.0f64..179.0,
        ) {
            let (a, b) = (LatLon::new(lat1, lon1), LatLon::new(lat2, lon2));
            let d = haversine_distance(a, b);
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, haversine_distance(b, a));
            prop_assert!((d - chord_distance(a, b)).abs() < 1e-3);
        }

        #[test]
        fn radius_queries_are_monotone_and_exact(
            seed in 0u64..1000, r1 in 1.0f64..2000.0, extra in 0.0f64..2000.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<LatLon> = (0..200)
                .map(|_| LatLon::new(rng.gen_range(40.70..40.72), rng.gen_range(-74.0..-73.98)))
                .collect();
            let idx = SpatialIndex::new(pts.clone(), 150.0);
            let c = pts[0];
            let small = idx.query(c, r1);
            let large = idx.query(c, r1 + extra);
            prop_assert!(small.iter().all(|i| large.contains(i)));
            let brute: Vec<usize> = (0..pts.len()).filter(|&i| haversine_distance(c, pts[i]) < r1).collect();
            prop_assert_eq!(small, brute);
        }
    }
}

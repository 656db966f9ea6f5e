//! Seeded synthetic cities with controllable popularity, co-location and
//! movement structure.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::distributions::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Pareto};

use crate::error::{Error, Result};
use crate::features::FeatureExtractor;
use crate::model::{CheckIn, Dataset, FeatureKind, LatLon, Venue};
use crate::models::Normalizer;
use crate::spatial::{haversine_distance, SpatialIndex, EARTH_RADIUS_M};

const METERS_PER_DEGREE: f64 = EARTH_RADIUS_M * core::f64::consts::PI / 180.0;
const EPOCH_START: i64 = 1_300_000_000;
const EPOCH_SPAN: i64 = 90 * 24 * 3600;

/// Gaussian hot spots that attract a share of venues.
#[derive(Debug, Clone, PartialEq)]
pub struct Clusters {
    pub count: usize,
    /// Fraction of venues placed in a cluster instead of uniformly.
    pub share: f64,
    pub sigma_m: f64,
}

/// Places a share of `follower` venues close to random `anchor` venues.
#[derive(Debug, Clone, PartialEq)]
pub struct Colocation {
    pub follower: String,
    pub anchor: String,
    pub share: f64,
    pub spread_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub label: String,
    pub stores: usize,
    pub category: String,
}

/// Store popularity as `round(base + spread * sum(w * z))` over z-scored
/// store features, clamped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub weights: Vec<(FeatureKind, f64)>,
    pub base: f64,
    pub spread: f64,
    pub radius_m: f64,
}

impl Planted {
    /// Features that do not depend on the chain's own check-ins.
    pub const ALLOWED: [FeatureKind; 6] = [
        FeatureKind::Density,
        FeatureKind::Entropy,
        FeatureKind::Competitiveness,
        FeatureKind::JensenQuality,
        FeatureKind::TransitionDensity,
        FeatureKind::IncomingFlow,
    ];
}

/// How check-ins become transitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionMode {
    /// Each check-in starts a sampled move with probability `fraction`; each
    /// move is a dedicated two-check-in user.
    Direct { fraction: f64 },
    /// Check-ins are shuffled in time and dealt to `users` users in turn.
    RoundRobin { users: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CityConfig {
    /// South-west corner of the box.
    pub origin: LatLon,
    pub width_km: f64,
    pub height_km: f64,
    pub venues: usize,
    /// Category names with relative weights.
    pub categories: Vec<(String, f64)>,
    pub clusters: Option<Clusters>,
    pub colocation: Vec<Colocation>,
    pub chain: Option<ChainSpec>,
    /// Pareto tail exponent of the check-in count density.
    pub exponent: f64,
    pub min_checkins: f64,
    pub max_checkins: u64,
    /// When set, chain stores get planted popularity and stay out of
    /// transitions.
    pub planted: Option<Planted>,
    pub transitions: TransitionMode,
    pub decay_m: f64,
    /// `(from, to, weight)`; pairs not listed weigh 1.
    pub affinity: Vec<(String, String, f64)>,
    pub seed: u64,
}

impl Default for CityConfig {
    fn default() -> Self {
        Self {
            origin: LatLon::new(40.70, -74.02),
            width_km: 5.0,
            height_km: 5.0,
            venues: 2000,
            categories: ["Food", "Shop", "Nightlife", "Office", "Park"]
                .iter()
                .map(|c| (c.to_string(), 1.0))
                .collect(),
            clusters: None,
            colocation: Vec::new(),
            chain: None,
            exponent: 2.0,
            min_checkins: 1.0,
            max_checkins: 10_000,
            planted: None,
            transitions: TransitionMode::Direct { fraction: 0.5 },
            decay_m: 300.0,
            affinity: Vec::new(),
            seed: 0,
        }
    }
}

impl CityConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.venues == 0 {
            return bad("venue count must be positive".into());
        }
        if !(self.width_km > 0.0 && self.height_km > 0.0) {
            return bad("bounding box must have positive size".into());
        }
        let north_east = self.to_latlon(self.width_km * 1000.0, self.height_km * 1000.0);
        if !self.origin.in_range() || !north_east.in_range() {
            return bad("bounding box leaves the coordinate range".into());
        }
        if self.categories.is_empty()
            || self.categories.iter().any(|(c, w)| c.is_empty() || !(*w > 0.0))
        {
            return bad("categories need non-empty names and positive weights".into());
        }
        if !(self.exponent > 1.0) {
            return bad(format!("power-law exponent {} must exceed 1", self.exponent));
        }
        if !(self.min_checkins >= 1.0) || (self.max_checkins as f64) < self.min_checkins {
            return bad("check-in bounds must satisfy 1 <= min <= max".into());
        }
        if !(self.decay_m > 0.0) {
            return bad("decay scale must be positive".into());
        }
        match self.transitions {
            TransitionMode::Direct { fraction } if !(0.0..=1.0).contains(&fraction) => {
                return bad(format!("transition fraction {fraction} is outside [0, 1]"));
            }
            TransitionMode::RoundRobin { users: 0 } => {
                return bad("round-robin needs at least one user".into());
            }
            _ => {}
        }
        if let Some(c) = &self.clusters {
            if c.count == 0 || !(0.0..=1.0).contains(&c.share) || !(c.sigma_m > 0.0) {
                return bad("clusters need a count, a share in [0, 1] and sigma > 0".into());
            }
        }
        let known = |c: &str| self.categories.iter().any(|(k, _)| k == c);
        for c in &self.colocation {
            if !known(&c.follower) || !known(&c.anchor) || c.follower == c.anchor {
                return bad(format!("co-location {} near {} is invalid", c.follower, c.anchor));
            }
            if !(0.0..=1.0).contains(&c.share) || !(c.spread_m > 0.0) {
                return bad("co-location needs a share in [0, 1] and spread > 0".into());
            }
        }
        for (a, b, w) in &self.affinity {
            let chain_cat = self.chain.as_ref().map(|c| c.category.as_str());
            let ok = |c: &str| known(c) || Some(c) == chain_cat;
            if !ok(a) || !ok(b) || !(*w >= 0.0) {
                return bad(format!("affinity {a} -> {b} is invalid"));
            }
        }
        if let Some(ch) = &self.chain {
            if ch.label.is_empty() || ch.category.is_empty() || ch.stores == 0 {
                return bad("chain needs a label, a category and stores".into());
            }
        }
        if let Some(p) = &self.planted {
            if self.chain.is_none() {
                return bad("planted popularity needs a chain".into());
            }
            if p.weights.is_empty() || !(p.radius_m > 0.0) || !(p.spread >= 0.0) {
                return bad("planted popularity needs weights, radius and spread".into());
            }
            if let Some((k, _)) = p.weights.iter().find(|(k, _)| !Planted::ALLOWED.contains(k)) {
                return bad(format!("{k} depends on store check-ins and cannot be planted"));
            }
        }
        Ok(())
    }

    fn to_latlon(&self, east_m: f64, north_m: f64) -> LatLon {
        let lat = self.origin.lat + north_m / METERS_PER_DEGREE;
        let cos = libm::cos(self.origin.lat.to_radians()).max(1e-6);
        LatLon::new(lat, self.origin.lon + east_m / (METERS_PER_DEGREE * cos))
    }
}

struct Placed {
    category: String,
    at: (f64, f64),
    claimed: bool,
}

struct Placer<'a> {
    cfg: &'a CityConfig,
    width: f64,
    height: f64,
    centers: Vec<(f64, f64)>,
}

impl Placer<'_> {
    fn uniform(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        (rng.gen::<f64>() * self.width, rng.gen::<f64>() * self.height)
    }

    fn clamp(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (x.clamp(0.0, self.width), y.clamp(0.0, self.height))
    }

    fn around(&self, rng: &mut ChaCha8Rng, (cx, cy): (f64, f64), sigma: f64) -> (f64, f64) {
        let n = Normal::new(0.0, sigma).expect("positive sigma");
        for _ in 0..16 {
            let (x, y) = (cx + n.sample(rng), cy + n.sample(rng));
            if (0.0..=self.width).contains(&x) && (0.0..=self.height).contains(&y) {
                return (x, y);
            }
        }
        self.uniform(rng)
    }

    fn near(&self, rng: &mut ChaCha8Rng, (cx, cy): (f64, f64), spread: f64) -> (f64, f64) {
        let d = spread * libm::sqrt(rng.gen::<f64>());
        let a = rng.gen::<f64>() * core::f64::consts::TAU;
        self.clamp((cx + d * libm::cos(a), cy + d * libm::sin(a)))
    }

    /// Followers prefer anchors that no follower has claimed yet.
    fn place(&self, rng: &mut ChaCha8Rng, category: &str, placed: &mut [Placed]) -> (f64, f64) {
        for rule in self.cfg.colocation.iter().filter(|c| c.follower == category) {
            if rng.gen::<f64>() < rule.share {
                let anchors: Vec<usize> = (0..placed.len())
                    .filter(|&i| placed[i].category == rule.anchor)
                    .collect();
                let free: Vec<usize> =
                    anchors.iter().copied().filter(|&i| !placed[i].claimed).collect();
                let pool = if free.is_empty() { &anchors } else { &free };
                if !pool.is_empty() {
                    let a = pool[rng.gen_range(0..pool.len())];
                    placed[a].claimed = true;
                    return self.near(rng, placed[a].at, rule.spread_m);
                }
            }
        }
        if let Some(cl) = &self.cfg.clusters {
            if rng.gen::<f64>() < cl.share {
                let c = self.centers[rng.gen_range(0..self.centers.len())];
                return self.around(rng, c, cl.sigma_m);
            }
        }
        self.uniform(rng)
    }
}

/// Builds a city from `cfg`. Identical configurations give identical datasets.
///
/// Venues are uniform in the box unless clusters or co-location rules apply.
/// Base check-in counts are `floor` of a Pareto draw capped at
/// `max_checkins`. In [`TransitionMode::Direct`] the destination of each move
/// is drawn with probability proportional to `exp(-d / decay_m)` times the
/// category affinity, and every destination visit adds one check-in there.
pub fn generate_city(cfg: &CityConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let placer = {
        let mut p = Placer {
            cfg,
            width: cfg.width_km * 1000.0,
            height: cfg.height_km * 1000.0,
            centers: Vec::new(),
        };
        if let Some(cl) = &cfg.clusters {
            p.centers = (0..cl.count).map(|_| p.uniform(&mut rng)).collect();
        }
        p
    };

    let weights = WeightedIndex::new(cfg.categories.iter().map(|(_, w)| *w))
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let cats: Vec<String> = (0..cfg.venues)
        .map(|_| cfg.categories[weights.sample(&mut rng)].0.clone())
        .collect();
    let is_follower = |c: &str| cfg.colocation.iter().any(|r| r.follower == c);

    let mut placed: Vec<Placed> = Vec::with_capacity(cfg.venues);
    let mut slots: Vec<(usize, (f64, f64))> = Vec::with_capacity(cfg.venues);
    for pass_followers in [false, true] {
        for (i, c) in cats.iter().enumerate() {
            if is_follower(c) == pass_followers {
                let p = placer.place(&mut rng, c, &mut placed);
                placed.push(Placed {
                    category: c.clone(),
                    at: p,
                    claimed: false,
                });
                slots.push((i, p));
            }
        }
    }
    slots.sort_by_key(|s| s.0);

    let mut venues: Vec<Venue> = slots
        .iter()
        .map(|&(i, (x, y))| {
            let at = cfg.to_latlon(x, y);
            Venue::new(format!("v{i:05}"), at.lat, at.lon, cats[i].as_str())
        })
        .collect();
    let regular = venues.len();
    if let Some(ch) = &cfg.chain {
        for s in 0..ch.stores {
            let (x, y) = placer.place(&mut rng, &ch.category, &mut placed);
            let at = cfg.to_latlon(x, y);
            venues.push(
                Venue::new(format!("{}-{s:04}", ch.label), at.lat, at.lon, ch.category.as_str())
                    .with_chain(ch.label.as_str()),
            );
        }
    }

    let pareto = Pareto::new(cfg.min_checkins, cfg.exponent - 1.0)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let planted = cfg.planted.is_some();
    let base: Vec<u64> = (0..venues.len())
        .map(|i| {
            if planted && i >= regular {
                0
            } else {
                (libm::floor(pareto.sample(&mut rng)) as u64).min(cfg.max_checkins)
            }
        })
        .collect();
    let movable = if planted { regular } else { venues.len() };

    let mut checkins = match cfg.transitions {
        TransitionMode::Direct { fraction } => {
            direct_checkins(cfg, &venues, &base, movable, fraction, &mut rng)
        }
        TransitionMode::RoundRobin { users } => {
            round_robin_checkins(&venues, &base, users, &mut rng)
        }
    };

    if let (Some(p), Some(ch)) = (&cfg.planted, &cfg.chain) {
        let draft = Dataset::new(venues.clone(), checkins.clone());
        let vectors = FeatureExtractor::new(&draft, p.radius_m).store_vectors(&ch.label)?;
        let kinds: Vec<FeatureKind> = p.weights.iter().map(|(k, _)| *k).collect();
        let rows: Vec<Vec<f64>> = vectors.iter().map(|v| v.select(&kinds)).collect();
        let z = Normalizer::fit(&rows)?.transform_all(&rows)?;
        for (v, zr) in vectors.iter().zip(&z) {
            let s: f64 = p.weights.iter().zip(zr).map(|((_, w), z)| w * z).sum();
            let y = libm::round(p.base + p.spread * s).max(0.0) as u64;
            for j in 0..y {
                checkins.push(CheckIn::new(
                    format!("{}#{j}", v.area.id),
                    v.area.id.as_str(),
                    EPOCH_START + rng.gen_range(0..EPOCH_SPAN),
                ));
            }
        }
    }

    Ok(Dataset::new(venues, checkins))
}

fn affinity(cfg: &CityConfig, from: &str, to: &str) -> f64 {
    cfg.affinity
        .iter()
        .find(|(a, b, _)| a == from && b == to)
        .map_or(1.0, |t| t.2)
}

fn direct_checkins(
    cfg: &CityConfig,
    venues: &[Venue],
    base: &[u64],
    movable: usize,
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<CheckIn> {
    // Beyond twelve decay lengths a uniform city holds under 1e-4 of the weight.
    let reach = 12.0 * cfg.decay_m;
    let points: Vec<LatLon> = venues[..movable].iter().map(|v| v.location).collect();
    let index = SpatialIndex::new(points.clone(), reach.min(5000.0));
    let mut out = Vec::new();
    let mut mover = 0usize;
    for (s, v) in venues.iter().enumerate() {
        let mut starts = 0u64;
        if s < movable && fraction > 0.0 {
            starts = (0..base[s]).filter(|_| rng.gen::<f64>() < fraction).count() as u64;
        }
        let mut dest = None;
        if starts > 0 {
            let near: Vec<(usize, f64)> = index
                .query(v.location, reach)
                .into_iter()
                .filter(|&d| d != s)
                .map(|d| {
                    let w = libm::exp(-haversine_distance(v.location, points[d]) / cfg.decay_m)
                        * affinity(cfg, v.category.as_str(), venues[d].category.as_str());
                    (d, w)
                })
                .collect();
            if let Ok(w) = WeightedIndex::new(near.iter().map(|n| n.1)) {
                dest = Some((near, w));
            }
        }
        let moves = if dest.is_some() { starts } else { 0 };
        for _ in 0..moves {
            let (near, w) = dest.as_ref().expect("destinations exist");
            let d = near[w.sample(rng)].0;
            let t = EPOCH_START + rng.gen_range(0..EPOCH_SPAN);
            let user = format!("m{mover}");
            mover += 1;
            out.push(CheckIn::new(user.as_str(), v.id.clone(), t));
            out.push(CheckIn::new(user, venues[d].id.clone(), t + rng.gen_range(60..7200)));
        }
        for j in moves..base[s] {
            out.push(CheckIn::new(
                format!("{}#{j}", v.id.as_str()),
                v.id.clone(),
                EPOCH_START + rng.gen_range(0..EPOCH_SPAN),
            ));
        }
    }
    out
}

fn round_robin_checkins(
    venues: &[Venue],
    base: &[u64],
    users: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<CheckIn> {
    let mut events: Vec<(i64, usize)> = Vec::new();
    for (i, &c) in base.iter().enumerate() {
        for _ in 0..c {
            events.push((EPOCH_START + rng.gen_range(0..EPOCH_SPAN), i));
        }
    }
    events.sort_unstable();
    events
        .iter()
        .enumerate()
        .map(|(j, &(t, i))| CheckIn::new(format!("u{}", j % users), venues[i].id.clone(), t))
        .collect()
}

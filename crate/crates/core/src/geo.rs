//! Geographic features: density, neighbor entropy, competitiveness and the
//! co-location quality built on Jensen's inter-category coefficients.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, Neighborhood};
use crate::error::{Error, Result};
use crate::model::{CandidateArea, CategoryId};

/// Number of venues inside the area.
pub fn density(area: &CandidateArea, catalog: &Catalog<'_>) -> f64 {
    catalog.neighborhood(area).len() as f64
}

/// Shannon entropy, in bits, of the category counts inside the area.
/// An empty area has entropy 0.
pub fn entropy(area: &CandidateArea, catalog: &Catalog<'_>) -> f64 {
    entropy_of(&catalog.category_counts(&catalog.neighborhood(area).members))
}

/// Minus the share of neighbors sharing the target category; 0 for an empty area.
pub fn competitiveness(area: &CandidateArea, catalog: &Catalog<'_>) -> f64 {
    let hood = catalog.neighborhood(area);
    competitiveness_of(catalog, &hood, area)
}

pub(crate) fn entropy_of(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let h = -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * libm::log2(p)
        })
        .sum::<f64>();
    // a single category gives -0.0
    h.max(0.0)
}

pub(crate) fn competitiveness_of(
    catalog: &Catalog<'_>,
    hood: &Neighborhood,
    area: &CandidateArea,
) -> f64 {
    if hood.is_empty() {
        return 0.0;
    }
    let Some(target) = catalog.category_index(&area.target_category) else {
        return 0.0;
    };
    let same = hood
        .members
        .iter()
        .filter(|&&m| catalog.category_of(m) == target)
        .count();
    if same == 0 {
        0.0
    } else {
        -(same as f64) / hood.len() as f64
    }
}

/// Inter-category attraction coefficients at radius `r`.
///
/// `kappa(a, b)` measures how often venues of category `b` are found within `r`
/// of venues of category `a`, relative to uniform random placement; values
/// above 1 mean attraction. `baseline_mean(a, b)` is the average number of
/// category-`a` neighbors around venues of category `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JensenCoefficients {
    pub r: f64,
    categories: Vec<CategoryId>,
    /// Row-major `[from * k + to]`.
    kappa: Vec<f64>,
    /// Row-major `[from * k + to]`: summed category-`from` neighbor counts
    /// over venues of category `to`.
    neighbor_sums: Vec<f64>,
    category_sizes: Vec<u64>,
}

impl JensenCoefficients {
    /// Assembles a table from explicit values (row-major `[from * k + to]`).
    ///
    /// The baseline means are taken as given; they carry no per-venue detail,
    /// so focal-venue adjustment treats every category as having `sizes[c]` venues.
    pub fn from_parts(
        r: f64,
        categories: Vec<CategoryId>,
        kappa: Vec<f64>,
        baseline_mean: Vec<f64>,
        sizes: Vec<u64>,
    ) -> Self {
        let k = categories.len();
        assert_eq!(kappa.len(), k * k);
        assert_eq!(baseline_mean.len(), k * k);
        assert_eq!(sizes.len(), k);
        let neighbor_sums = baseline_mean
            .iter()
            .enumerate()
            .map(|(i, &m)| m * sizes[i % k] as f64)
            .collect();
        Self {
            r,
            categories,
            kappa,
            neighbor_sums,
            category_sizes: sizes,
        }
    }

    pub fn categories(&self) -> &[CategoryId] {
        &self.categories
    }

    fn idx(&self, c: &CategoryId) -> Option<usize> {
        self.categories.binary_search(c).ok()
    }

    pub fn kappa(&self, from: &CategoryId, to: &CategoryId) -> Option<f64> {
        let (a, b) = (self.idx(from)?, self.idx(to)?);
        Some(self.kappa[a * self.categories.len() + b])
    }

    pub fn baseline_mean(&self, from: &CategoryId, to: &CategoryId) -> Option<f64> {
        let (a, b) = (self.idx(from)?, self.idx(to)?);
        let n = self.category_sizes[b];
        Some(if n == 0 {
            0.0
        } else {
            self.neighbor_sums[a * self.categories.len() + b] / n as f64
        })
    }

    /// All `(from, to, kappa, baseline_mean)` rows in category order.
    pub fn rows(&self) -> impl Iterator<Item = (&CategoryId, &CategoryId, f64, f64)> + '_ {
        let k = self.categories.len();
        (0..k * k).map(move |i| {
            let (a, b) = (i / k, i % k);
            let n = self.category_sizes[b];
            let mean = if n == 0 {
                0.0
            } else {
                self.neighbor_sums[i] / n as f64
            };
            (&self.categories[a], &self.categories[b], self.kappa[i], mean)
        })
    }
}

/// Computes the coefficient table over every venue of the catalog.
///
/// For each pair `(a, b)` the sum runs over venues `p` of category `a`, adding
/// `N_b(p) / (N(p) - N_a(p))` where neighbor counts exclude `p` itself; venues
/// whose neighborhood holds only category-`a` venues are skipped. The sum is
/// scaled by `(N - N_a) / (N_a * N_b)`.
pub fn jensen_coefficients(catalog: &Catalog<'_>, r: f64) -> JensenCoefficients {
    let k = catalog.categories().len();
    let sizes = catalog.category_sizes().to_vec();
    let total = catalog.venue_count() as f64;
    let mut ratio_sums = vec![0.0f64; k * k];
    let mut neighbor_sums = vec![0.0f64; k * k];

    for p in 0..catalog.venue_count() {
        let hood = catalog.disk(catalog.location(p), r, Some(p));
        let counts = catalog.category_counts(&hood.members);
        let own = catalog.category_of(p);
        for (a, &c) in counts.iter().enumerate() {
            neighbor_sums[a * k + own] += c as f64;
        }
        let others = hood.len() as u64 - counts[own];
        if others == 0 {
            continue;
        }
        for (b, &c) in counts.iter().enumerate() {
            ratio_sums[own * k + b] += c as f64 / others as f64;
        }
    }

    let mut kappa = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            let scale = (total - sizes[a] as f64) / (sizes[a] as f64 * sizes[b] as f64);
            kappa[a * k + b] = scale * ratio_sums[a * k + b];
        }
    }

    JensenCoefficients {
        r,
        categories: catalog.categories().to_vec(),
        kappa,
        neighbor_sums,
        category_sizes: sizes,
    }
}

/// Co-location quality of the area for a venue of the target category.
///
/// Sums `ln(kappa(c, target)) * (N_c(area) - mean_c)` over categories with a
/// positive coefficient. When the area has a focal venue, the baseline means
/// are recomputed as if that venue did not exist.
pub fn jensen_quality(
    area: &CandidateArea,
    catalog: &Catalog<'_>,
    coeffs: &JensenCoefficients,
) -> Result<f64> {
    check_radius(area, coeffs)?;
    let hood = catalog.neighborhood(area);
    Ok(jensen_quality_of(catalog, &hood, area, coeffs))
}

pub(crate) fn check_radius(area: &CandidateArea, coeffs: &JensenCoefficients) -> Result<()> {
    if area.radius_m != coeffs.r {
        return Err(Error::RadiusMismatch {
            area: area.radius_m,
            tables: coeffs.r,
        });
    }
    Ok(())
}

pub(crate) fn jensen_quality_of(
    catalog: &Catalog<'_>,
    hood: &Neighborhood,
    area: &CandidateArea,
    coeffs: &JensenCoefficients,
) -> f64 {
    let Some(target) = coeffs.idx(&area.target_category) else {
        return 0.0;
    };
    let k = coeffs.categories.len();
    let mut counts = vec![0u64; k];
    for &m in &hood.members {
        if let Some(c) = coeffs.idx(&catalog.venue(m).category) {
            counts[c] += 1;
        }
    }
    let focal = hood
        .focal
        .and_then(|f| coeffs.idx(&catalog.venue(f).category));

    let mut quality = 0.0;
    for (c, &observed) in counts.iter().enumerate() {
        let kappa = coeffs.kappa[c * k + target];
        if !(kappa > 0.0) {
            continue;
        }
        let mut sum = coeffs.neighbor_sums[c * k + target];
        let mut n = coeffs.category_sizes[target] as f64;
        if let Some(fc) = focal {
            // The focal venue sits at the area center, so `counts` are its own
            // neighbor counts: drop its term from the mean, and drop it as a
            // neighbor of every target-category venue around it.
            if fc == target {
                sum -= observed as f64;
                n -= 1.0;
            }
            if fc == c {
                sum -= counts[target] as f64;
            }
        }
        let mean = if n > 0.0 { sum / n } else { 0.0 };
        quality += libm::log(kappa) * (observed as f64 - mean);
    }
    quality
}

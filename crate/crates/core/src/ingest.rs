//! Transition derivation and dataset statistics.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CheckIn, Dataset, Transition, Venue, VenueId};
use crate::spatial::haversine_distance;

/// Transitions between consecutive check-ins of each user.
///
/// Each user's check-ins are ordered by `(timestamp, venue id)`. Every adjacent
/// pair at two different venues becomes a transition, unless the gap exceeds
/// `max_gap_s`. A repeated check-in at the same venue yields nothing but still
/// becomes the new predecessor, so `A, A, B` gives one `A -> B` starting at the
/// second `A`. Output is ordered by user, then time.
pub fn derive_transitions(checkins: &[CheckIn], max_gap_s: Option<i64>) -> Vec<Transition> {
    let mut by_user: BTreeMap<&str, Vec<&CheckIn>> = BTreeMap::new();
    for c in checkins {
        by_user.entry(c.user.as_str()).or_default().push(c);
    }

    let mut out = Vec::new();
    for (user, mut seq) in by_user {
        seq.sort_by(|a, b| (a.timestamp, &a.venue).cmp(&(b.timestamp, &b.venue)));
        for pair in seq.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.venue == b.venue {
                continue;
            }
            if max_gap_s.is_some_and(|gap| b.timestamp - a.timestamp > gap) {
                continue;
            }
            out.push(Transition {
                from: a.venue.clone(),
                to: b.venue.clone(),
                user: user.to_string(),
                t_from: a.timestamp,
                t_to: b.timestamp,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub label: String,
    pub places: usize,
    pub checkins: u64,
    /// Mean check-ins per place.
    pub mean_checkins: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    /// `(c, P[C_p >= c])` for every distinct per-venue check-in count `c`.
    pub ccdf: Vec<(u64, f64)>,
    pub chains: Vec<ChainStats>,
    /// Per chain: `(meters, cumulative fraction)` over incoming transition lengths.
    pub transition_cdf: BTreeMap<String, Vec<(f64, f64)>>,
}

/// Summary statistics for the whole dataset and for each requested chain.
/// An empty `chains` slice selects every chain in the dataset.
pub fn dataset_stats(d: &Dataset, chains: &[&str]) -> Result<StatsReport> {
    let known = d.chains();
    let selected: Vec<&str> = if chains.is_empty() {
        known.iter().copied().collect()
    } else {
        for c in chains {
            if !known.contains(c) {
                return Err(Error::UnknownChain(c.to_string()));
            }
        }
        chains.to_vec()
    };

    let counts: Vec<u64> = d.venues.iter().map(|v| d.checkin_count(&v.id)).collect();
    let ccdf = survival(&counts);

    let by_id: BTreeMap<&VenueId, &Venue> = d.venues.iter().map(|v| (&v.id, v)).collect();
    let mut chain_stats = Vec::new();
    let mut transition_cdf = BTreeMap::new();
    for label in selected {
        let members: Vec<&Venue> = d.chain_venues(label).collect();
        let total: u64 = members.iter().map(|v| d.checkin_count(&v.id)).sum();
        chain_stats.push(ChainStats {
            label: label.to_string(),
            places: members.len(),
            checkins: total,
            mean_checkins: total as f64 / members.len() as f64,
        });

        let mut lengths: Vec<f64> = d
            .transitions
            .iter()
            .filter_map(|t| {
                let to = by_id.get(&t.to)?;
                let from = by_id.get(&t.from)?;
                (to.chain.as_deref() == Some(label))
                    .then(|| haversine_distance(from.location, to.location))
            })
            .collect();
        lengths.sort_by(f64::total_cmp);
        let n = lengths.len() as f64;
        let cdf = lengths
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, (i + 1) as f64 / n))
            .collect();
        transition_cdf.insert(label.to_string(), cdf);
    }

    Ok(StatsReport {
        ccdf,
        chains: chain_stats,
        transition_cdf,
    })
}

fn survival(values: &[u64]) -> Vec<(u64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        out.push((v, (sorted.len() - i) as f64 / n));
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn pairs(ts: &[Transition]) -> Vec<(&str, &str, i64)> {
        ts.iter()
            .map(|t| (t.from.as_str(), t.to.as_str(), t.t_from))
            .collect()
    }

    #[test]
    fn simple_chain() {
        let c = vec![
            CheckIn::new("u", "A", 1),
            CheckIn::new("u", "B", 2),
            CheckIn::new("u", "C", 3),
        ];
        assert_eq!(
            pairs(&derive_transitions(&c, None)),
            vec![("A", "B", 1), ("B", "C", 2)]
        );
    }

    #[test]
    fn repeated_venue_keeps_the_chain() {
        let c = vec![
            CheckIn::new("u", "A", 1),
            CheckIn::new("u", "A", 2),
            CheckIn::new("u", "B", 3),
        ];
        // adjacent pairs by hand: (A@1,A@2) same venue, (A@2,B@3) -> A->B at t=2
        assert_eq!(pairs(&derive_transitions(&c, None)), vec![("A", "B", 2)]);
    }

    #[test]
    fn users_never_mix() {
        let c = vec![
            CheckIn::new("u", "A", 1),
            CheckIn::new("v", "B", 2),
            CheckIn::new("u", "C", 3),
            CheckIn::new("v", "D", 4),
        ];
        let t = derive_transitions(&c, None);
        assert_eq!(pairs(&t), vec![("A", "C", 1), ("B", "D", 2)]);
        assert_eq!(t[0].user, "u");
        assert_eq!(t[1].user, "v");
    }

    #[test]
    fn ties_break_by_venue_id_and_gaps_filter() {
        let c = vec![
            CheckIn::new("u", "B", 5),
            CheckIn::new("u", "A", 5),
            CheckIn::new("u", "C", 100),
        ];
        assert_eq!(
            pairs(&derive_transitions(&c, None)),
            vec![("A", "B", 5), ("B", "C", 5)]
        );
        assert_eq!(pairs(&derive_transitions(&c, Some(10))), vec![("A", "B", 5)]);
    }

    #[test]
    fn chain_mean_checkins() {
        let venues = vec![
            Venue::new("x1", 40.0, -73.0, "Cafe").with_chain("X"),
            Venue::new("x2", 40.01, -73.0, "Cafe").with_chain("X"),
            Venue::new("o", 40.02, -73.0, "Bar"),
        ];
        let checkins = (0..6)
            .map(|i| CheckIn::new(format!("u{i}"), if i < 2 { "x1" } else { "x2" }, i))
            .collect();
        let r = dataset_stats(&Dataset::new(venues, checkins), &["X"]).unwrap();
        assert_eq!(r.chains[0].places, 2);
        assert_eq!(r.chains[0].checkins, 6);
        assert_eq!(r.chains[0].mean_checkins, 3.0);
        assert!(r.transition_cdf["X"].is_empty());
    }

    #[test]
    fn unknown_chain_is_an_error() {
        let d = Dataset::new(vec![Venue::new("a", 0.0, 0.0, "Cafe")], vec![]);
        assert_eq!(
            dataset_stats(&d, &["Nope"]),
            Err(Error::UnknownChain("Nope".into()))
        );
    }

    #[test]
    fn ccdf_of_known_counts() {
        assert_eq!(
            survival(&[1, 1, 2, 5]),
            vec![(1, 1.0), (2, 0.5), (5, 0.25)]
        );
        assert!(survival(&[]).is_empty());
    }

    #[test]
    fn transition_cdf_uses_incoming_lengths() {
        let venues = vec![
            Venue::new("s", 40.0, -73.0, "Cafe").with_chain("S"),
            Venue::new("a", 40.0, -73.001, "Bar"),
            Venue::new("b", 40.0, -73.01, "Bar"),
        ];
        let checkins = vec![
            CheckIn::new("u", "a", 1),
            CheckIn::new("u", "s", 2),
            CheckIn::new("w", "b", 1),
            CheckIn::new("w", "s", 2),
            CheckIn::new("w", "a", 3),
        ];
        let r = dataset_stats(&Dataset::new(venues, checkins), &[]).unwrap();
        let cdf = &r.transition_cdf["S"];
        assert_eq!(cdf.len(), 2);
        assert!(cdf[0].0 < cdf[1].0);
        assert_eq!(cdf[1].1, 1.0);
        assert!((cdf[0].0 - 85.18).abs() < 0.1);
    }

    proptest! {
        #[test]
        fn transition_count_is_bounded(
            raw in proptest::collection::vec((0u8..4, 0u8..5, 0i64..50), 0..60),
            gap in proptest::option::of(0i64..20),
        ) {
            let c: Vec<CheckIn> = raw
                .iter()
                .map(|&(u, v, t)| CheckIn::new(format!("u{u}"), format!("v{v}"), t))
                .collect();
            let users: alloc::collections::BTreeSet<&str> = c.iter().map(|x| x.user.as_str()).collect();
            let t = derive_transitions(&c, gap);
            prop_assert!(t.len() <= c.len() - users.len());
            prop_assert!(t.iter().all(|x| x.from != x.to && x.t_to >= x.t_from));

            let mut shuffled = c.clone();
            shuffled.reverse();
            prop_assert_eq!(derive_transitions(&shuffled, gap), t);
        }

        #[test]
        fn ccdf_is_non_increasing(counts in proptest::collection::vec(0u64..100, 1..50)) {
            let s = survival(&counts);
            prop_assert_eq!(s[0].1, 1.0);
            prop_assert!(s.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1));
            prop_assert!(s.iter().all(|&(_, f)| (0.0..=1.0).contains(&f)));
        }
    }
}

//! JSON documents written by the command-line tool.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use siterank_core::eval::EvalReport;
use siterank_core::ingest::{ChainStats, StatsReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Pairs written as a JSON object in their given order.
struct Keyed<'a, K>(&'a [(K, f64)]);

impl<K: KeyText> Serialize for Keyed<'_, K> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(&k.key_text(), v)?;
        }
        m.end()
    }
}

trait KeyText {
    fn key_text(&self) -> String;
}

impl KeyText for usize {
    fn key_text(&self) -> String {
        self.to_string()
    }
}

impl KeyText for f64 {
    fn key_text(&self) -> String {
        if self.fract() == 0.0 {
            format!("{}", *self as i64)
        } else {
            self.to_string()
        }
    }
}

#[derive(Serialize)]
struct EvalDoc<'a> {
    version: u32,
    ranker: &'a str,
    chain: &'a str,
    r: f64,
    n_experiments: usize,
    test_size: usize,
    ndcg: Keyed<'a, usize>,
    accuracy: Keyed<'a, f64>,
    baseline: Keyed<'a, usize>,
    seed: u64,
}

pub fn eval_json(r: &EvalReport) -> String {
    let doc = EvalDoc {
        version: SCHEMA_VERSION,
        ranker: &r.ranker,
        chain: &r.chain,
        r: r.r,
        n_experiments: r.n_experiments,
        test_size: r.test_size,
        ndcg: Keyed(&r.ndcg),
        accuracy: Keyed(&r.accuracy),
        baseline: Keyed(&r.baseline),
        seed: r.seed,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct StatsDoc<'a> {
    version: u32,
    ccdf: &'a [(u64, f64)],
    chains: &'a [ChainStats],
    transition_cdf: &'a std::collections::BTreeMap<String, Vec<(f64, f64)>>,
}

pub fn stats_json(r: &StatsReport) -> String {
    let doc = StatsDoc {
        version: SCHEMA_VERSION,
        ccdf: &r.ccdf,
        chains: &r.chains,
        transition_cdf: &r.transition_cdf,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_keys_keep_order() {
        let r = EvalReport {
            ranker: "density".into(),
            chain: "C".into(),
            r: 200.0,
            n_experiments: 3,
            test_size: 10,
            ndcg: vec![(10, 0.5), (5, 0.25)],
            accuracy: vec![(5.0, 0.1), (12.5, 0.2)],
            baseline: vec![(10, 0.4), (5, 0.3)],
            seed: 9,
            experiments: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&eval_json(&r)).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["ndcg"]["10"], 0.5);
        assert_eq!(v["accuracy"]["12.5"], 0.2);
        assert_eq!(v["accuracy"]["5"], 0.1);
        let text = eval_json(&r);
        assert!(text.find("\"10\"").unwrap() < text.find("\"5\"").unwrap());
    }
}

//! Significance-filtered signed snapshots and the aggregate network.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::country::Country;
use crate::graph::{Sign, SignedDegree, SignedDigraph};
use crate::preference::PreferenceScore;
use crate::tsv::{fmt_f64, fmt_opt, TsvWriter};

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Holm step-down adjusted p-values, returned in input order.
///
/// Ties in `p` are broken by input position, so callers wanting a different
/// deterministic order should sort first.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    holm_adjust_ordered(p, &order)
}

fn holm_adjust_ordered(p: &[f64], order: &[usize]) -> Vec<f64> {
    let m = p.len();
    let mut adj = vec![0.0; m];
    let mut running = 0.0f64;
    for (j, &i) in order.iter().enumerate() {
        let v = ((m - j) as f64 * p[i]).min(1.0);
        running = running.max(v);
        adj[i] = running;
    }
    adj
}

/// Applies Holm's correction to one year's family of scores and signs the
/// significant ones by `auc - 0.5`. Order of the input is preserved.
pub fn holm_filter(mut scores: Vec<PreferenceScore>, alpha: f64) -> Vec<PreferenceScore> {
    let p: Vec<f64> = scores.iter().map(|s| s.p_raw).collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        p[a].total_cmp(&p[b])
            .then_with(|| scores[a].source.cmp(&scores[b].source))
            .then_with(|| scores[a].target.cmp(&scores[b].target))
    });
    let adj = holm_adjust_ordered(&p, &order);
    for (s, a) in scores.iter_mut().zip(adj) {
        s.p_adjusted = Some(a);
        s.sign = if a <= alpha {
            match s.auc.partial_cmp(&0.5) {
                Some(Ordering::Greater) => 1,
                Some(Ordering::Less) => -1,
                _ => 0,
            }
        } else {
            0
        };
    }
    scores
}

/// Attributes of a significant edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotEdge {
    pub sign: Sign,
    pub auc: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

/// One year's signed directed network.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDigraphSnapshot {
    pub year: i32,
    pub nodes: BTreeSet<Country>,
    pub edges: BTreeMap<(Country, Country), SnapshotEdge>,
}

impl SignedDigraphSnapshot {
    pub fn to_graph(&self) -> SignedDigraph {
        SignedDigraph::from_edges(
            self.nodes.iter().cloned(),
            self.edges.iter().map(|((s, t), e)| (s.clone(), t.clone(), e.sign)),
        )
    }

    pub fn positive_edges(&self) -> BTreeSet<(Country, Country)> {
        self.edges
            .iter()
            .filter(|(_, e)| e.sign == Sign::Positive)
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn count_sign(&self, sign: Sign) -> usize {
        self.edges.values().filter(|e| e.sign == sign).count()
    }
}

/// Builds the snapshot from Holm-filtered scores. Self pairs are ignored.
pub fn build_snapshot(scores: &[PreferenceScore], year: i32) -> SignedDigraphSnapshot {
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeMap::new();
    for s in scores {
        let Some(sign) = Sign::from_i8(s.sign) else { continue };
        if s.source == s.target {
            continue;
        }
        nodes.insert(s.source.clone());
        nodes.insert(s.target.clone());
        edges.insert(
            (s.source.clone(), s.target.clone()),
            SnapshotEdge {
                sign,
                auc: s.auc,
                p_raw: s.p_raw,
                p_adjusted: s.p_adjusted.unwrap_or(f64::NAN),
            },
        );
    }
    SignedDigraphSnapshot { year, nodes, edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AggregateEdge {
    pub sign: Sign,
    pub last_year: i32,
}

/// Union of snapshots; each edge carries its most recent sign.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateNetwork {
    pub nodes: BTreeSet<Country>,
    pub edges: BTreeMap<(Country, Country), AggregateEdge>,
}

impl AggregateNetwork {
    pub fn to_graph(&self) -> SignedDigraph {
        SignedDigraph::from_edges(
            self.nodes.iter().cloned(),
            self.edges.iter().map(|((s, t), e)| (s.clone(), t.clone(), e.sign)),
        )
    }

    /// Re-expresses the aggregate as a snapshot-like layer stamped with each
    /// edge's last year; aggregating it alone reproduces the aggregate.
    pub fn as_snapshots(&self) -> Vec<SignedDigraphSnapshot> {
        let mut by_year: BTreeMap<i32, SignedDigraphSnapshot> = BTreeMap::new();
        for ((s, t), e) in &self.edges {
            let snap = by_year.entry(e.last_year).or_insert_with(|| SignedDigraphSnapshot {
                year: e.last_year,
                nodes: BTreeSet::new(),
                edges: BTreeMap::new(),
            });
            snap.nodes.insert(s.clone());
            snap.nodes.insert(t.clone());
            snap.edges.insert(
                (s.clone(), t.clone()),
                SnapshotEdge {
                    sign: e.sign,
                    auc: f64::NAN,
                    p_raw: f64::NAN,
                    p_adjusted: f64::NAN,
                },
            );
        }
        by_year.into_values().collect()
    }
}

/// Folds time-ordered snapshots into the aggregate network. Snapshots are
/// applied in ascending year order regardless of input order.
pub fn aggregate(snapshots: &[SignedDigraphSnapshot]) -> AggregateNetwork {
    let mut ordered: Vec<&SignedDigraphSnapshot> = snapshots.iter().collect();
    ordered.sort_by_key(|s| s.year);
    let mut agg = AggregateNetwork::default();
    for snap in ordered {
        agg.nodes.extend(snap.nodes.iter().cloned());
        for (k, e) in &snap.edges {
            agg.edges.insert(
                k.clone(),
                AggregateEdge {
                    sign: e.sign,
                    last_year: snap.year,
                },
            );
        }
    }
    agg
}

/// A change of sign between two successive appearances of an edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignFlip {
    pub source: Country,
    pub target: Country,
    pub year: i32,
    pub from: Sign,
    pub to: Sign,
}

pub fn sign_flips(snapshots: &[SignedDigraphSnapshot]) -> Vec<SignFlip> {
    let mut ordered: Vec<&SignedDigraphSnapshot> = snapshots.iter().collect();
    ordered.sort_by_key(|s| s.year);
    let mut last: BTreeMap<&(Country, Country), Sign> = BTreeMap::new();
    let mut flips = Vec::new();
    for snap in ordered {
        for (k, e) in &snap.edges {
            if let Some(prev) = last.insert(k, e.sign) {
                if prev != e.sign {
                    flips.push(SignFlip {
                        source: k.0.clone(),
                        target: k.1.clone(),
                        year: snap.year,
                        from: prev,
                        to: e.sign,
                    });
                }
            }
        }
    }
    flips
}

/// Fraction of year-t positive edges present (positive) again in year t+1,
/// for every consecutive pair of snapshots. `None` when year t has none.
pub fn persistence(snapshots: &[SignedDigraphSnapshot]) -> Vec<(i32, Option<f64>)> {
    let mut ordered: Vec<&SignedDigraphSnapshot> = snapshots.iter().collect();
    ordered.sort_by_key(|s| s.year);
    ordered
        .windows(2)
        .map(|w| {
            let a = w[0].positive_edges();
            let b = w[1].positive_edges();
            let frac = if a.is_empty() {
                None
            } else {
                Some(a.intersection(&b).count() as f64 / a.len() as f64)
            };
            (w[0].year, frac)
        })
        .collect()
}

/// Signed degree sequence keyed by country.
pub fn degree_sequence(graph: &SignedDigraph) -> BTreeMap<Country, SignedDegree> {
    graph.nodes().iter().cloned().zip(graph.signed_degrees()).collect()
}

pub fn snapshot_tsv(snap: &SignedDigraphSnapshot) -> String {
    let mut w = TsvWriter::new(&["source", "target", "sign", "auc", "p_raw", "p_adjusted"]);
    for ((s, t), e) in &snap.edges {
        w.row([
            s.to_string(),
            t.to_string(),
            e.sign.as_i8().to_string(),
            fmt_f64(e.auc),
            fmt_f64(e.p_raw),
            fmt_f64(e.p_adjusted),
        ]);
    }
    w.finish()
}

pub fn aggregate_tsv(agg: &AggregateNetwork) -> String {
    let mut w = TsvWriter::new(&["source", "target", "sign", "last_year"]);
    for ((s, t), e) in &agg.edges {
        w.row([s.to_string(), t.to_string(), e.sign.as_i8().to_string(), e.last_year.to_string()]);
    }
    w.finish()
}

pub fn persistence_tsv(rows: &[(i32, Option<f64>)]) -> String {
    let mut w = TsvWriter::new(&["year", "positive_persistence"]);
    for (y, f) in rows {
        w.row([y.to_string(), fmt_opt(*f)]);
    }
    w.finish()
}

pub fn flips_tsv(flips: &[SignFlip]) -> String {
    let mut w = TsvWriter::new(&["source", "target", "year", "from", "to"]);
    for f in flips {
        w.row([
            f.source.to_string(),
            f.target.to_string(),
            f.year.to_string(),
            f.from.as_i8().to_string(),
            f.to.as_i8().to_string(),
        ]);
    }
    w.finish()
}

#[derive(Serialize)]
struct JsonNode<'a> {
    id: &'a str,
}

#[derive(Serialize)]
struct JsonLink<'a> {
    source: &'a str,
    target: &'a str,
    sign: i8,
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    directed: bool,
    nodes: Vec<JsonNode<'a>>,
    links: Vec<JsonLink<'a>>,
}

/// Node-link JSON document for external layout tools.
pub fn graph_json(graph: &SignedDigraph) -> String {
    let doc = JsonGraph {
        directed: true,
        nodes: graph.nodes().iter().map(|c| JsonNode { id: c.as_str() }).collect(),
        links: graph
            .edges()
            .map(|(s, t, sign)| JsonLink {
                source: graph.nodes()[s].as_str(),
                target: graph.nodes()[t].as_str(),
                sign: sign.as_i8(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
    s.push('\n');
    s
}

/// Plain `source target sign` edge list.
pub fn edge_list(graph: &SignedDigraph) -> String {
    let mut out = String::new();
    for (s, t, sign) in graph.edges() {
        out.push_str(&format!("{} {} {}\n", graph.nodes()[s], graph.nodes()[t], sign.as_i8()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn score(source: &str, target: &str, auc: f64, p: f64) -> PreferenceScore {
        PreferenceScore {
            source: Country::new(source),
            target: Country::new(target),
            year: 2000,
            n_target: 10,
            n_other: 10,
            auc,
            u_stat: auc * 100.0,
            var_delong: 0.01,
            z: 0.0,
            p_raw: p,
            p_adjusted: None,
            sign: 0,
        }
    }

    #[test]
    fn holm_three_tests() {
        let scores = vec![score("A", "B", 0.7, 0.001), score("A", "C", 0.3, 0.02), score("B", "C", 0.6, 0.004)];
        let out = holm_filter(scores, 0.01);
        let signs: Vec<i8> = out.iter().map(|s| s.sign).collect();
        assert_eq!(signs, vec![1, 0, 1]);
        let adj: Vec<f64> = out.iter().map(|s| s.p_adjusted.unwrap()).collect();
        assert!((adj[0] - 0.003).abs() < 1e-15);
        assert!((adj[2] - 0.008).abs() < 1e-15);
        assert!((adj[1] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn holm_edge_cases() {
        let out = holm_filter(vec![score("A", "B", 0.9, 1.0), score("B", "A", 0.1, 1.0)], 0.01);
        assert!(out.iter().all(|s| s.sign == 0));
        let out = holm_filter(vec![score("A", "B", 0.2, 0.009)], 0.01);
        assert_eq!(out[0].sign, -1);
        assert!(holm_filter(Vec::new(), 0.01).is_empty());
    }

    #[test]
    fn snapshot_from_filtered_scores() {
        assert!(build_snapshot(&[], 2000).edges.is_empty());
        let scores = holm_filter(
            vec![score("A", "B", 0.7, 1e-6), score("A", "C", 0.3, 1e-5), score("B", "C", 0.6, 0.5)],
            0.01,
        );
        let snap = build_snapshot(&scores, 2000);
        assert_eq!(snap.edges.len(), 2);
        assert_eq!(snap.nodes.len(), 3);
        assert_eq!(snap.edges[&(Country::new("A"), Country::new("C"))].sign, Sign::Negative);
    }

    fn snap(year: i32, edges: &[(&str, &str, Sign)]) -> SignedDigraphSnapshot {
        let mut nodes = BTreeSet::new();
        let mut map = BTreeMap::new();
        for (s, t, sign) in edges {
            nodes.insert(Country::new(*s));
            nodes.insert(Country::new(*t));
            map.insert(
                (Country::new(*s), Country::new(*t)),
                SnapshotEdge {
                    sign: *sign,
                    auc: 0.5,
                    p_raw: 0.0,
                    p_adjusted: 0.0,
                },
            );
        }
        SignedDigraphSnapshot { year, nodes, edges: map }
    }

    #[test]
    fn aggregate_takes_most_recent_sign() {
        use Sign::*;
        let snaps = vec![
            snap(2005, &[("A", "B", Positive), ("C", "D", Negative)]),
            snap(2010, &[("A", "B", Negative)]),
            snap(2012, &[("C", "D", Negative)]),
        ];
        let agg = aggregate(&snaps);
        let ab = agg.edges[&(Country::new("A"), Country::new("B"))];
        assert_eq!((ab.sign, ab.last_year), (Negative, 2010));
        let flips = sign_flips(&snaps);
        assert_eq!(flips.len(), 1);
        assert_eq!((flips[0].from, flips[0].to, flips[0].year), (Positive, Negative, 2010));
        assert_eq!(aggregate(&agg.as_snapshots()), agg);
    }

    #[test]
    fn persistence_examples() {
        use Sign::*;
        let a = snap(2000, &[("A", "B", Positive), ("B", "C", Positive), ("C", "A", Positive)]);
        let b = snap(2001, &[("A", "B", Positive), ("B", "C", Positive), ("A", "C", Negative)]);
        let c = snap(2002, &[("X", "Y", Positive)]);
        let d = snap(2003, &[("X", "Y", Negative)]);
        let e = snap(2004, &[]);
        let p = persistence(&[a.clone(), b, c, d, e]);
        assert!((p[0].1.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p[1].1, Some(0.0));
        assert_eq!(p[2].1, Some(0.0));
        assert_eq!(p[3].1, None);
        let same = persistence(&[a.clone(), SignedDigraphSnapshot { year: 2001, ..a }]);
        assert_eq!(same[0].1, Some(1.0));
    }

    #[test]
    fn json_export_has_signs() {
        let g = snap(2000, &[("A", "B", Sign::Negative)]).to_graph();
        let doc: serde_json::Value = serde_json::from_str(&graph_json(&g)).unwrap();
        assert_eq!(doc["links"][0]["sign"], -1);
        assert_eq!(doc["nodes"].as_array().unwrap().len(), 2);
        assert_eq!(edge_list(&g), "A B -1\n");
    }

    proptest! {
        #[test]
        fn holm_monotone_and_dominates_bonferroni(p in prop::collection::vec(0.0f64..1.0, 1..40), alpha in 0.001f64..0.2) {
            let adj = holm_adjust(&p);
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
            for w in order.windows(2) {
                prop_assert!(adj[w[0]] <= adj[w[1]]);
            }
            let m = p.len() as f64;
            for i in 0..p.len() {
                prop_assert!(adj[i] >= p[i]);
                if (p[i] * m).min(1.0) <= alpha {
                    prop_assert!(adj[i] <= alpha);
                }
            }
        }
    }
}

//! Weak structural balance of signed directed networks over semi-cycles, with
//! a signed degree-preserving null ensemble.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::country::Country;
use crate::graph::{Sign, SignedDigraph};
use crate::par::{self, Execution};
use crate::tsv::{fmt_f64, TsvWriter};

pub const DEFAULT_ENSEMBLE: usize = 100;
pub const DEFAULT_SWAPS_PER_EDGE: usize = 20;

/// Which triads count as semi-cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SemicycleKind {
    /// `i -> j`, `j -> k` and the shortcut `i -> k`.
    #[default]
    Transitive,
    /// `i -> j`, `j -> k`, `k -> i`, counted once per rotation class.
    Cyclic,
}

/// A semi-cycle over nodes `(i, j, k)`; `signs` are the signs of `i -> j`,
/// `j -> k` and the closing edge (`i -> k` or `k -> i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Semicycle {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub signs: [Sign; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Balance {
    Balanced,
    Unbalanced,
}

/// Weak balance: only triads with exactly one negative edge are unbalanced.
pub fn classify_weak_balance(signs: [Sign; 3]) -> Balance {
    if signs.iter().filter(|&&s| s == Sign::Negative).count() == 1 {
        Balance::Unbalanced
    } else {
        Balance::Balanced
    }
}

fn dense(graph: &SignedDigraph) -> Vec<Option<Sign>> {
    let n = graph.node_count();
    let mut m = vec![None; n * n];
    for (s, t, sign) in graph.edges() {
        m[s * n + t] = Some(sign);
    }
    m
}

fn semicycles_from(graph: &SignedDigraph, adj: &[Option<Sign>], kind: SemicycleKind, i: usize) -> Vec<Semicycle> {
    let n = graph.node_count();
    let mut out = Vec::new();
    for &(j, sij) in graph.out_edges(i) {
        for &(k, sjk) in graph.out_edges(j) {
            if k == i {
                continue;
            }
            match kind {
                SemicycleKind::Transitive => {
                    if let Some(sik) = adj[i * n + k] {
                        out.push(Semicycle { i, j, k, signs: [sij, sjk, sik] });
                    }
                }
                SemicycleKind::Cyclic => {
                    if i < j && i < k {
                        if let Some(ski) = adj[k * n + i] {
                            out.push(Semicycle { i, j, k, signs: [sij, sjk, ski] });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Every semi-cycle of the given kind, ordered by `(i, j, k)`.
pub fn enumerate_semicycles(graph: &SignedDigraph, kind: SemicycleKind, exec: Execution) -> Vec<Semicycle> {
    let adj = dense(graph);
    let per_node = par::map_range(exec, graph.node_count(), |i| semicycles_from(graph, &adj, kind, i));
    let mut all: Vec<Semicycle> = per_node.into_iter().flatten().collect();
    all.sort();
    all
}

pub fn enumerate_transitive_semicycles(graph: &SignedDigraph) -> Vec<Semicycle> {
    enumerate_semicycles(graph, SemicycleKind::Transitive, Execution::Sequential)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct BalanceCounts {
    pub total: usize,
    pub balanced: usize,
    pub unbalanced: usize,
}

pub fn count_balance(cycles: &[Semicycle]) -> BalanceCounts {
    let balanced = cycles
        .iter()
        .filter(|c| classify_weak_balance(c.signs) == Balance::Balanced)
        .count();
    BalanceCounts {
        total: cycles.len(),
        balanced,
        unbalanced: cycles.len() - balanced,
    }
}

/// Per node, balanced semi-cycles it belongs to over all semi-cycles it
/// belongs to. Nodes on no semi-cycle are absent.
pub fn node_fractions(n: usize, cycles: &[Semicycle]) -> BTreeMap<usize, f64> {
    let mut tot = vec![0usize; n];
    let mut bal = vec![0usize; n];
    for c in cycles {
        let b = classify_weak_balance(c.signs) == Balance::Balanced;
        for v in [c.i, c.j, c.k] {
            tot[v] += 1;
            if b {
                bal[v] += 1;
            }
        }
    }
    (0..n)
        .filter(|&v| tot[v] > 0)
        .map(|v| (v, bal[v] as f64 / tot[v] as f64))
        .collect()
}

pub fn node_balance_fraction(graph: &SignedDigraph, kind: SemicycleKind) -> BTreeMap<Country, f64> {
    let cycles = enumerate_semicycles(graph, kind, Execution::Sequential);
    node_fractions(graph.node_count(), &cycles)
        .into_iter()
        .map(|(v, f)| (graph.nodes()[v].clone(), f))
        .collect()
}

/// Mean of the node-level balance fractions; `None` when no node is on a semi-cycle.
pub fn mean_node_balance(graph: &SignedDigraph, kind: SemicycleKind, exec: Execution) -> Option<f64> {
    let cycles = enumerate_semicycles(graph, kind, exec);
    let fr = node_fractions(graph.node_count(), &cycles);
    (!fr.is_empty()).then(|| fr.values().sum::<f64>() / fr.len() as f64)
}

/// Rewires one sign class by directed double-edge swaps. `occupied` holds
/// every ordered pair currently carrying an edge of either sign.
fn rewire_class(
    edges: &mut [(usize, usize)],
    occupied: &mut BTreeSet<(usize, usize)>,
    attempts: usize,
    rng: &mut ChaCha8Rng,
) {
    let m = edges.len();
    if m < 2 {
        return;
    }
    for _ in 0..attempts {
        let x = rng.random_range(0..m);
        let mut y = rng.random_range(0..m - 1);
        if y >= x {
            y += 1;
        }
        let (a, b) = edges[x];
        let (c, d) = edges[y];
        if a == c || b == d || a == d || c == b {
            continue;
        }
        if occupied.contains(&(a, d)) || occupied.contains(&(c, b)) {
            continue;
        }
        occupied.remove(&(a, b));
        occupied.remove(&(c, d));
        occupied.insert((a, d));
        occupied.insert((c, b));
        edges[x] = (a, d);
        edges[y] = (c, b);
    }
}

fn randomize_one(graph: &SignedDigraph, swaps_per_edge: usize, rng: &mut ChaCha8Rng) -> SignedDigraph {
    let mut pos: Vec<(usize, usize)> = Vec::new();
    let mut neg: Vec<(usize, usize)> = Vec::new();
    for (s, t, sign) in graph.edges() {
        match sign {
            Sign::Positive => pos.push((s, t)),
            Sign::Negative => neg.push((s, t)),
        }
    }
    let mut occupied: BTreeSet<(usize, usize)> = pos.iter().chain(&neg).copied().collect();
    let pos_attempts = swaps_per_edge * pos.len();
    let neg_attempts = swaps_per_edge * neg.len();
    rewire_class(&mut pos, &mut occupied, pos_attempts, rng);
    rewire_class(&mut neg, &mut occupied, neg_attempts, rng);
    let edges: BTreeMap<(usize, usize), Sign> = pos
        .into_iter()
        .map(|e| (e, Sign::Positive))
        .chain(neg.into_iter().map(|e| (e, Sign::Negative)))
        .collect();
    SignedDigraph::from_indexed(graph.nodes().to_vec(), edges)
}

/// Ensemble of graphs with every node's signed in/out degrees preserved.
/// Member `i` draws from stream `i` of `seed`, so output does not depend on
/// the execution mode.
pub fn randomize_signed(
    graph: &SignedDigraph,
    n_networks: usize,
    swaps_per_edge: usize,
    seed: u64,
    exec: Execution,
) -> Vec<SignedDigraph> {
    for sign in [Sign::Positive, Sign::Negative] {
        let m = graph.count_sign(sign);
        if m < 2 {
            log::warn!("sign class {} has {m} edge(s); left unrewired", sign.as_i8());
        }
    }
    par::map_range(exec, n_networks, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        randomize_one(graph, swaps_per_edge, &mut rng)
    })
}

#[derive(Debug, Clone, Copy)]
pub struct BalanceOptions {
    pub kind: SemicycleKind,
    pub ensemble: usize,
    pub swaps_per_edge: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for BalanceOptions {
    fn default() -> Self {
        BalanceOptions {
            kind: SemicycleKind::Transitive,
            ensemble: DEFAULT_ENSEMBLE,
            swaps_per_edge: DEFAULT_SWAPS_PER_EDGE,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub kind: SemicycleKind,
    pub total_semicycles: usize,
    pub balanced: usize,
    pub unbalanced: usize,
    pub balanced_fraction: Option<f64>,
    pub node_fraction: BTreeMap<Country, f64>,
    pub mean_node_balance: Option<f64>,
    pub ensemble_size: usize,
    pub ensemble_mean: Option<f64>,
    pub ensemble_std: Option<f64>,
    pub seed: u64,
}

pub fn balance_report(graph: &SignedDigraph, opts: &BalanceOptions) -> BalanceReport {
    let cycles = enumerate_semicycles(graph, opts.kind, opts.exec);
    let counts = count_balance(&cycles);
    let fr = node_fractions(graph.node_count(), &cycles);
    let mean = (!fr.is_empty()).then(|| fr.values().sum::<f64>() / fr.len() as f64);
    let ensemble = randomize_signed(graph, opts.ensemble, opts.swaps_per_edge, opts.seed, opts.exec);
    let member_means: Vec<f64> = ensemble
        .iter()
        .filter_map(|g| mean_node_balance(g, opts.kind, Execution::Sequential))
        .collect();
    let k = member_means.len() as f64;
    let ens_mean = (!member_means.is_empty()).then(|| member_means.iter().sum::<f64>() / k);
    let ens_std = ens_mean.filter(|_| member_means.len() > 1).map(|mu| {
        (member_means.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    });
    BalanceReport {
        kind: opts.kind,
        total_semicycles: counts.total,
        balanced: counts.balanced,
        unbalanced: counts.unbalanced,
        balanced_fraction: (counts.total > 0).then(|| counts.balanced as f64 / counts.total as f64),
        node_fraction: fr.into_iter().map(|(v, f)| (graph.nodes()[v].clone(), f)).collect(),
        mean_node_balance: mean,
        ensemble_size: opts.ensemble,
        ensemble_mean: ens_mean,
        ensemble_std: ens_std,
        seed: opts.seed,
    }
}

pub fn balance_report_json(r: &BalanceReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

pub fn node_balance_tsv(r: &BalanceReport) -> String {
    let mut w = TsvWriter::new(&["country", "balance_fraction"]);
    for (c, f) in &r.node_fraction {
        w.row([c.to_string(), fmt_f64(*f)]);
    }
    w.finish()
}

/// Two factions: positive edges inside, negative across. Every semi-cycle of
/// such a graph is balanced. Nodes are `F{i:02}`; node `i` is in faction `i % 2`.
pub fn planted_balanced_graph(n: usize, p: f64, rng: &mut impl Rng) -> SignedDigraph {
    let nodes: Vec<Country> = (0..n).map(|i| Country::new(format!("F{i:02}"))).collect();
    let mut edges = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                let sign = if i % 2 == j % 2 { Sign::Positive } else { Sign::Negative };
                edges.insert((i, j), sign);
            }
        }
    }
    SignedDigraph::from_indexed(nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Sign::{Negative as N, Positive as P};

    fn graph(n: usize, edges: &[(usize, usize, Sign)]) -> SignedDigraph {
        let nodes = (0..n).map(|i| Country::new(format!("C{i}"))).collect();
        SignedDigraph::from_indexed(nodes, edges.iter().map(|&(s, t, g)| ((s, t), g)).collect())
    }

    fn brute(g: &SignedDigraph, kind: SemicycleKind) -> Vec<Semicycle> {
        let n = g.node_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let (Some(a), Some(b)) = (g.sign(i, j), g.sign(j, k)) else { continue };
                    let close = match kind {
                        SemicycleKind::Transitive => g.sign(i, k),
                        SemicycleKind::Cyclic if i < j && i < k => g.sign(k, i),
                        SemicycleKind::Cyclic => None,
                    };
                    if let Some(c) = close {
                        out.push(Semicycle { i, j, k, signs: [a, b, c] });
                    }
                }
            }
        }
        out
    }

    #[test]
    fn definitions() {
        assert_eq!(enumerate_transitive_semicycles(&graph(3, &[(0, 1, P), (1, 2, P), (0, 2, P)])).len(), 1);
        let cyc = graph(3, &[(0, 1, P), (1, 2, P), (2, 0, P)]);
        assert!(enumerate_transitive_semicycles(&cyc).is_empty());
        assert_eq!(enumerate_semicycles(&cyc, SemicycleKind::Cyclic, Execution::Sequential).len(), 1);
        let mut all = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    all.push((i, j, if (i + j) % 2 == 0 { P } else { N }));
                }
            }
        }
        let g = graph(3, &all);
        assert_eq!(enumerate_transitive_semicycles(&g).len(), 6);
        assert_eq!(enumerate_transitive_semicycles(&g), brute(&g, SemicycleKind::Transitive));
    }

    #[test]
    fn weak_balance_table() {
        assert_eq!(classify_weak_balance([P, P, N]), Balance::Unbalanced);
        assert_eq!(classify_weak_balance([N, N, N]), Balance::Balanced);
        assert_eq!(classify_weak_balance([P, P, P]), Balance::Balanced);
        assert_eq!(classify_weak_balance([N, P, N]), Balance::Balanced);
    }

    #[test]
    fn node_fraction_examples() {
        let g = graph(4, &[(0, 1, P), (1, 2, P), (0, 2, P), (2, 3, P), (1, 3, P)]);
        let f = node_balance_fraction(&g, SemicycleKind::Transitive);
        assert!(f.values().all(|&x| x == 1.0));
        let g = graph(4, &[(0, 1, P), (1, 2, P), (0, 2, N)]);
        let f = node_balance_fraction(&g, SemicycleKind::Transitive);
        assert_eq!(f.len(), 3);
        assert!(f.values().all(|&x| x == 0.0));
        assert!(!f.contains_key(&Country::new("C3")));
    }

    #[test]
    fn mixed_five_node_fractions() {
        let g = graph(
            5,
            &[(0, 1, P), (1, 2, N), (0, 2, N), (2, 3, P), (0, 3, P), (1, 3, P), (3, 4, N), (1, 4, P), (4, 0, P)],
        );
        let cycles = brute(&g, SemicycleKind::Transitive);
        let mut tot = [0usize; 5];
        let mut bal = [0usize; 5];
        for c in &cycles {
            let neg = c.signs.iter().filter(|&&s| s == N).count();
            for v in [c.i, c.j, c.k] {
                tot[v] += 1;
                bal[v] += (neg != 1) as usize;
            }
        }
        let f = node_fractions(5, &enumerate_transitive_semicycles(&g));
        for v in 0..5 {
            if tot[v] > 0 {
                assert_eq!(f[&v], bal[v] as f64 / tot[v] as f64);
            } else {
                assert!(!f.contains_key(&v));
            }
        }
    }

    #[test]
    fn tiny_classes_left_alone() {
        let g = graph(4, &[(0, 1, P), (2, 3, N)]);
        for member in randomize_signed(&g, 5, 20, 1, Execution::Sequential) {
            assert_eq!(member, g);
        }
    }

    #[test]
    fn ensemble_independent_of_execution() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = planted_balanced_graph(20, 0.3, &mut rng);
        let a = randomize_signed(&g, 8, 20, 4, Execution::Sequential);
        let b = randomize_signed(&g, 8, 20, 4, Execution::default());
        assert_eq!(a, b);
        assert_ne!(a[0], g);
    }

    #[test]
    fn planted_balance_degrades_under_rewiring() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = planted_balanced_graph(30, 0.25, &mut rng);
        let r = balance_report(&g, &BalanceOptions { ensemble: 20, ..Default::default() });
        assert_eq!(r.mean_node_balance, Some(1.0));
        assert!(r.ensemble_mean.unwrap() < 1.0);
        assert_eq!(r.balanced + r.unbalanced, r.total_semicycles);
    }

    fn arb_graph() -> impl Strategy<Value = SignedDigraph> {
        (3usize..14, prop::collection::vec((0usize..14, 0usize..14, any::<bool>()), 0..80)).prop_map(|(n, e)| {
            let edges: Vec<(usize, usize, Sign)> = e
                .into_iter()
                .filter(|(a, b, _)| *a < n && *b < n && a != b)
                .map(|(a, b, s)| (a, b, if s { P } else { N }))
                .collect();
            graph(n, &edges)
        })
    }

    proptest! {
        #[test]
        fn enumeration_matches_brute_force(g in arb_graph()) {
            for kind in [SemicycleKind::Transitive, SemicycleKind::Cyclic] {
                let fast = enumerate_semicycles(&g, kind, Execution::default());
                let mut slow = brute(&g, kind);
                slow.sort();
                prop_assert_eq!(&fast, &slow);
                let c = count_balance(&fast);
                prop_assert_eq!(c.balanced + c.unbalanced, c.total);
            }
        }

        #[test]
        fn randomization_preserves_signed_degrees(g in arb_graph(), seed in 0u64..1000) {
            let want = g.signed_degrees();
            for member in randomize_signed(&g, 3, 20, seed, Execution::Sequential) {
                prop_assert_eq!(member.signed_degrees(), want.clone());
                prop_assert_eq!(member.edge_count(), g.edge_count());
            }
        }
    }
}

//! Index-based directed graphs shared by the network algorithms.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::country::Country;

/// Sign of a preference edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Positive => 1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Negative),
            1 => Some(Sign::Positive),
            _ => None,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// Signed in/out degree components of one node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedDegree {
    pub out_pos: usize,
    pub in_pos: usize,
    pub out_neg: usize,
    pub in_neg: usize,
}

/// Directed signed graph without self-loops; at most one sign per ordered pair.
///
/// Nodes are kept in sorted order so that every derived computation is
/// independent of the order in which edges were supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDigraph {
    nodes: Vec<Country>,
    edges: BTreeMap<(usize, usize), Sign>,
    out: Vec<Vec<(usize, Sign)>>,
}

impl SignedDigraph {
    /// Builds a graph from `(source, target, sign)` triples. Extra isolated
    /// nodes may be supplied through `nodes`. Self-loops are ignored; a later
    /// duplicate of an ordered pair overwrites the earlier sign.
    pub fn from_edges<I>(nodes: impl IntoIterator<Item = Country>, edges: I) -> Self
    where
        I: IntoIterator<Item = (Country, Country, Sign)>,
    {
        let edges: Vec<_> = edges.into_iter().filter(|(s, t, _)| s != t).collect();
        let mut set: BTreeSet<Country> = nodes.into_iter().collect();
        for (s, t, _) in &edges {
            set.insert(s.clone());
            set.insert(t.clone());
        }
        let nodes: Vec<Country> = set.into_iter().collect();
        let lookup: BTreeMap<&Country, usize> =
            nodes.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let mut map = BTreeMap::new();
        for (s, t, sign) in &edges {
            map.insert((lookup[s], lookup[t]), *sign);
        }
        Self::from_indexed(nodes, map)
    }

    /// Builds a graph over `nodes` (assumed sorted and unique) from indexed edges.
    pub fn from_indexed(nodes: Vec<Country>, edges: BTreeMap<(usize, usize), Sign>) -> Self {
        let mut out = vec![Vec::new(); nodes.len()];
        for (&(s, t), &sign) in &edges {
            debug_assert!(s != t, "self-loop");
            out[s].push((t, sign));
        }
        SignedDigraph { nodes, edges, out }
    }

    pub fn nodes(&self) -> &[Country] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, c: &Country) -> Option<usize> {
        self.nodes.binary_search(c).ok()
    }

    pub fn sign(&self, s: usize, t: usize) -> Option<Sign> {
        self.edges.get(&(s, t)).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Sign)> + '_ {
        self.edges.iter().map(|(&(s, t), &sign)| (s, t, sign))
    }

    /// Out-neighbours of `s` in ascending index order.
    pub fn out_edges(&self, s: usize) -> &[(usize, Sign)] {
        &self.out[s]
    }

    pub fn count_sign(&self, sign: Sign) -> usize {
        self.edges.values().filter(|&&s| s == sign).count()
    }

    pub fn signed_degrees(&self) -> Vec<SignedDegree> {
        let mut deg = vec![SignedDegree::default(); self.nodes.len()];
        for (s, t, sign) in self.edges() {
            match sign {
                Sign::Positive => {
                    deg[s].out_pos += 1;
                    deg[t].in_pos += 1;
                }
                Sign::Negative => {
                    deg[s].out_neg += 1;
                    deg[t].in_neg += 1;
                }
            }
        }
        deg
    }

    /// The unsigned subgraph of edges with the given sign, restricted to nodes
    /// incident to at least one such edge.
    pub fn sign_subgraph(&self, sign: Sign) -> Digraph {
        Digraph::from_edges(
            self.edges()
                .filter(|&(_, _, s)| s == sign)
                .map(|(s, t, _)| (self.nodes[s].clone(), self.nodes[t].clone())),
        )
    }
}

/// Unsigned simple digraph (no self-loops, no multi-edges) with sorted nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    nodes: Vec<Country>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Digraph {
    pub fn from_edges(edges: impl IntoIterator<Item = (Country, Country)>) -> Self {
        Self::with_nodes(std::iter::empty(), edges)
    }

    pub fn with_nodes(
        nodes: impl IntoIterator<Item = Country>,
        edges: impl IntoIterator<Item = (Country, Country)>,
    ) -> Self {
        let pairs: BTreeSet<(Country, Country)> =
            edges.into_iter().filter(|(s, t)| s != t).collect();
        let mut set: BTreeSet<Country> = nodes.into_iter().collect();
        for (s, t) in &pairs {
            set.insert(s.clone());
            set.insert(t.clone());
        }
        let nodes: Vec<Country> = set.into_iter().collect();
        let idx = |c: &Country| nodes.binary_search(c).expect("node present");
        let indexed: Vec<(usize, usize)> = pairs.iter().map(|(s, t)| (idx(s), idx(t))).collect();
        Self::from_indexed(nodes, indexed)
    }

    /// `nodes` must be sorted and unique; duplicate edges and self-loops are dropped.
    pub fn from_indexed(nodes: Vec<Country>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let n = nodes.len();
        let set: BTreeSet<(usize, usize)> = edges.into_iter().filter(|(s, t)| s != t).collect();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for &(s, t) in &set {
            out[s].push(t);
            inc[t].push(s);
        }
        for l in inc.iter_mut() {
            l.sort_unstable();
        }
        Digraph {
            nodes,
            out,
            inc,
            edge_count: set.len(),
        }
    }

    pub fn nodes(&self) -> &[Country] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(s, ts)| ts.iter().map(move |&t| (s, t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Country {
        Country::new(s)
    }

    #[test]
    fn node_order_is_canonical() {
        let a = SignedDigraph::from_edges(
            [],
            [(c("B"), c("A"), Sign::Positive), (c("C"), c("B"), Sign::Negative)],
        );
        let b = SignedDigraph::from_edges(
            [],
            [(c("C"), c("B"), Sign::Negative), (c("B"), c("A"), Sign::Positive)],
        );
        assert_eq!(a, b);
        assert_eq!(a.nodes(), &[c("A"), c("B"), c("C")]);
    }

    #[test]
    fn degrees_and_subgraphs() {
        let g = SignedDigraph::from_edges(
            [c("Z")],
            [
                (c("A"), c("B"), Sign::Positive),
                (c("A"), c("C"), Sign::Negative),
                (c("C"), c("A"), Sign::Positive),
                (c("A"), c("A"), Sign::Positive),
            ],
        );
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 3);
        let d = g.signed_degrees();
        assert_eq!(d[0], SignedDegree { out_pos: 1, in_pos: 1, out_neg: 1, in_neg: 0 });
        let pos = g.sign_subgraph(Sign::Positive);
        assert_eq!(pos.node_count(), 3);
        assert_eq!(pos.edge_count(), 2);
        assert_eq!(pos.in_neighbors(0), &[2]);
    }
}

//! PageRank centrality, its normalized entropy, and block-to-block link
//! probabilities on signed snapshots.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::community::BlockPartition;
use crate::country::Country;
use crate::error::{Error, Result};
use crate::graph::{Digraph, Sign};
use crate::netbuild::SignedDigraphSnapshot;
use crate::tsv::{fmt_f64, fmt_opt, TsvWriter};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityVector {
    pub year: i32,
    pub damping: f64,
    pub scores: BTreeMap<Country, f64>,
}

/// Power-iteration PageRank with uniform teleportation; dangling nodes spread
/// their mass uniformly. Scores follow edge direction, so cited countries gain.
pub fn pagerank(graph: &Digraph, damping: f64, tol: f64) -> Result<Vec<f64>> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Data("PageRank of an empty graph".into()));
    }
    if !(0.0..1.0).contains(&damping) {
        return Err(Error::Config(format!("damping {damping} outside [0, 1)")));
    }
    let nf = n as f64;
    let outdeg: Vec<f64> = (0..n).map(|v| graph.out_neighbors(v).len() as f64).collect();
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..MAX_ITER {
        let dangling: f64 = (0..n).filter(|&v| outdeg[v] == 0.0).map(|v| x[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for (v, nv) in next.iter_mut().enumerate() {
            let inflow: f64 = graph.in_neighbors(v).iter().map(|&u| x[u] / outdeg[u]).sum();
            *nv = base + damping * inflow;
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let diff: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if diff < tol {
            return Ok(x);
        }
    }
    Err(Error::Numeric(format!("PageRank did not converge to {tol} in {MAX_ITER} iterations")))
}

/// PageRank on the positive subgraph of a snapshot.
pub fn snapshot_centrality(snap: &SignedDigraphSnapshot, damping: f64) -> Result<CentralityVector> {
    let g = snap.to_graph().sign_subgraph(Sign::Positive);
    let pr = pagerank(&g, damping, DEFAULT_TOL)?;
    Ok(CentralityVector {
        year: snap.year,
        damping,
        scores: g.nodes().iter().cloned().zip(pr).collect(),
    })
}

/// Shannon entropy divided by `ln N`.
pub fn normalized_entropy(p: &[f64]) -> Result<f64> {
    if p.len() < 2 {
        return Err(Error::Undefined(format!("normalized entropy needs at least 2 nodes, got {}", p.len())));
    }
    // An even spread is exactly 1 even where the rounded sum would miss it.
    if p.iter().all(|&x| x == p[0]) && p[0] > 0.0 {
        return Ok(1.0);
    }
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    Ok((h / (p.len() as f64).ln()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityLinkStats {
    pub year: i32,
    pub sign: Sign,
    pub blocks: usize,
    /// Row-major `blocks x blocks` matrix of source-block to target-block probabilities;
    /// `None` where the block pair has no ordered node pair in the snapshot.
    pub probability: Vec<Option<f64>>,
}

impl CommunityLinkStats {
    pub fn get(&self, r: usize, s: usize) -> Option<f64> {
        self.probability[r * self.blocks + s]
    }
}

/// Share of ordered node pairs (i in r, j in s, i != j) among the snapshot's
/// nodes that carry an edge of `sign`.
pub fn community_link_probability(
    snap: &SignedDigraphSnapshot,
    partition: &BlockPartition,
    sign: Sign,
) -> Result<CommunityLinkStats> {
    let b = partition.blocks;
    let mut size = vec![0usize; b];
    for c in &snap.nodes {
        let blk = partition
            .block_of(c)
            .ok_or_else(|| Error::Data(format!("country {c} has no block label")))?;
        size[blk] += 1;
    }
    let mut count = vec![0usize; b * b];
    for ((s, t), e) in &snap.edges {
        if e.sign == sign {
            let (r, q) = (partition.block_of(s).expect("checked"), partition.block_of(t).expect("checked"));
            count[r * b + q] += 1;
        }
    }
    let probability = (0..b * b)
        .map(|k| {
            let (r, q) = (k / b, k % b);
            let pairs = if r == q { size[r] * size[r].saturating_sub(1) } else { size[r] * size[q] };
            (pairs > 0).then(|| count[k] as f64 / pairs as f64)
        })
        .collect();
    Ok(CommunityLinkStats {
        year: snap.year,
        sign,
        blocks: b,
        probability,
    })
}

pub fn centrality_tsv(c: &CentralityVector) -> String {
    let mut w = TsvWriter::new(&["country", "pagerank"]);
    for (k, v) in &c.scores {
        w.row([k.to_string(), fmt_f64(*v)]);
    }
    w.finish()
}

pub fn entropy_tsv(rows: &[(i32, Option<f64>)]) -> String {
    let mut w = TsvWriter::new(&["year", "h_norm"]);
    for (y, h) in rows {
        w.row([y.to_string(), fmt_opt(*h)]);
    }
    w.finish()
}

pub fn community_probs_tsv(stats: &[CommunityLinkStats]) -> String {
    let mut w = TsvWriter::new(&["year", "r", "s", "sign", "probability"]);
    for st in stats {
        for r in 0..st.blocks {
            for s in 0..st.blocks {
                w.row([
                    st.year.to_string(),
                    r.to_string(),
                    s.to_string(),
                    st.sign.as_i8().to_string(),
                    fmt_opt(st.get(r, s)),
                ]);
            }
        }
    }
    w.finish()
}

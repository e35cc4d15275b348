//! Bistable pairs, simple cycles with repression parity, and feed-forward loops.

use super::{Polarity, RegGraph, MAX_ANALYZED_NODES};
use crate::model::{FflType, OscillationExpectation};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ring {
    pub nodes: Vec<String>,
    pub length: usize,
    pub repression_count: usize,
    pub expected: OscillationExpectation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ffl {
    pub a: String,
    pub b: String,
    pub c: String,
    pub ffl_type: FflType,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MotifReport {
    /// False when the graph exceeds the cycle-enumeration bound; rings are then empty.
    pub analyzed: bool,
    pub bistable: bool,
    pub bistable_pairs: Vec<(String, String)>,
    pub oscillator_rings: Vec<Ring>,
    pub ffls: Vec<Ffl>,
}

impl MotifReport {
    /// Longest ring with its expectation, the value a ring generator declares.
    pub fn main_ring(&self) -> Option<&Ring> {
        self.oscillator_rings.iter().max_by_key(|r| r.length)
    }
}

pub fn detect_motifs(g: &RegGraph) -> MotifReport {
    let n = g.nodes.len();
    let id = |v: usize| g.nodes[v].id.clone();
    let mut report = MotifReport { analyzed: n <= MAX_ANALYZED_NODES, ..Default::default() };

    for u in 0..n {
        for v in u + 1..n {
            if g.has_edge(u, v, Polarity::Repression) && g.has_edge(v, u, Polarity::Repression) {
                report.bistable_pairs.push((id(u), id(v)));
            }
        }
    }
    report.bistable = !report.bistable_pairs.is_empty();

    if report.analyzed {
        // Each simple cycle is found once, from its smallest node.
        let mut path_edges = Vec::new();
        let mut on_path = vec![false; n];
        for s in 0..n {
            on_path[s] = true;
            cycles_from(g, s, s, &mut on_path, &mut path_edges, &mut report.oscillator_rings);
            on_path[s] = false;
        }
    }

    for e1 in &g.edges {
        for e2 in g.edges.iter().filter(|e| e.src == e1.dst) {
            let (a, b, c) = (e1.src, e1.dst, e2.dst);
            if a == b || b == c || a == c {
                continue;
            }
            for e3 in g.edges.iter().filter(|e| e.src == a && e.dst == c) {
                use Polarity::*;
                let ffl_type = match (e1.polarity, e2.polarity, e3.polarity) {
                    (Activation, Activation, Activation) => FflType::C1,
                    (Activation, Repression, Activation) => FflType::I1,
                    _ => FflType::Other,
                };
                report.ffls.push(Ffl { a: id(a), b: id(b), c: id(c), ffl_type });
            }
        }
    }
    report
}

fn cycles_from(
    g: &RegGraph,
    start: usize,
    v: usize,
    on_path: &mut Vec<bool>,
    path: &mut Vec<usize>,
    out: &mut Vec<Ring>,
) {
    for (ei, e) in g.edges.iter().enumerate() {
        if e.src != v || e.dst < start {
            continue;
        }
        path.push(ei);
        if e.dst == start {
            let repression_count = path.iter().filter(|&&i| g.edges[i].polarity == Polarity::Repression).count();
            out.push(Ring {
                nodes: path.iter().map(|&i| g.nodes[g.edges[i].src].id.clone()).collect(),
                length: path.len(),
                repression_count,
                expected: if repression_count % 2 == 1 {
                    OscillationExpectation::Yes
                } else {
                    OscillationExpectation::BifurcationDependent
                },
            });
        } else if !on_path[e.dst] {
            on_path[e.dst] = true;
            cycles_from(g, start, e.dst, on_path, path, out);
            on_path[e.dst] = false;
        }
        path.pop();
    }
}

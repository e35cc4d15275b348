//! Labeled directed-graph isomorphism by VF2-style backtracking.

use super::{NodeRole, Polarity, RegGraph};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsoMode {
    /// Node roles and edge polarities must match.
    RoleLabeled,
    /// Additionally the part identities of each node must match.
    PartAware,
}

fn bit(p: Polarity) -> u8 {
    match p {
        Polarity::Activation => 1,
        Polarity::Repression => 2,
    }
}

struct Prepared<'a> {
    n: usize,
    labels: Vec<(NodeRole, &'a str)>,
    /// Polarity bitmask per ordered pair, row-major.
    adj: Vec<u8>,
    sig: Vec<Signature<'a>>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Signature<'a> {
    role: NodeRole,
    label: &'a str,
    out: [usize; 4],
    inc: [usize; 4],
    self_loop: u8,
}

fn prepare(g: &RegGraph, mode: IsoMode) -> Prepared<'_> {
    let n = g.nodes.len();
    let labels: Vec<(NodeRole, &str)> = g
        .nodes
        .iter()
        .map(|v| (v.role, if mode == IsoMode::PartAware { v.label.as_str() } else { "" }))
        .collect();
    let mut adj = vec![0u8; n * n];
    for e in &g.edges {
        adj[e.src * n + e.dst] |= bit(e.polarity);
    }
    let sig = (0..n)
        .map(|u| {
            let mut out = [0; 4];
            let mut inc = [0; 4];
            for w in 0..n {
                if w != u {
                    out[adj[u * n + w] as usize] += 1;
                    inc[adj[w * n + u] as usize] += 1;
                }
            }
            Signature { role: labels[u].0, label: labels[u].1, out, inc, self_loop: adj[u * n + u] }
        })
        .collect();
    Prepared { n, labels, adj, sig }
}

pub fn isomorphic(g1: &RegGraph, g2: &RegGraph, mode: IsoMode) -> bool {
    let a = prepare(g1, mode);
    let b = prepare(g2, mode);
    if a.n != b.n {
        return false;
    }
    let count = |p: &Prepared| p.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>();
    if count(&a) != count(&b) {
        return false;
    }
    let mut sa = a.sig.clone();
    let mut sb = b.sig.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return false;
    }
    // Most constrained nodes first: highest degree, then rarest signature.
    let mut order: Vec<usize> = (0..a.n).collect();
    let rarity = |u: usize| a.sig.iter().filter(|s| **s == a.sig[u]).count();
    order.sort_by_key(|&u| {
        let s = &a.sig[u];
        (rarity(u), usize::MAX - (s.out[1] + s.out[2] + s.out[3] + s.inc[1] + s.inc[2] + s.inc[3]))
    });
    let mut map = vec![usize::MAX; a.n];
    let mut used = vec![false; b.n];
    extend(&a, &b, &order, 0, &mut map, &mut used)
}

fn extend(a: &Prepared, b: &Prepared, order: &[usize], depth: usize, map: &mut [usize], used: &mut [bool]) -> bool {
    if depth == order.len() {
        return true;
    }
    let u = order[depth];
    let n = a.n;
    for v in 0..b.n {
        if used[v] || a.sig[u] != b.sig[v] || a.labels[u] != b.labels[v] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&w| {
            let x = map[w];
            a.adj[u * n + w] == b.adj[v * n + x] && a.adj[w * n + u] == b.adj[x * n + v]
        });
        if !consistent {
            continue;
        }
        map[u] = v;
        used[v] = true;
        if extend(a, b, order, depth + 1, map, used) {
            return true;
        }
        used[v] = false;
        map[u] = usize::MAX;
    }
    false
}

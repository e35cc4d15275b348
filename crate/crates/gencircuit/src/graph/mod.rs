//! Regulatory graphs: extraction from documents, complexity tuple, motifs,
//! labeled isomorphism and dedup fingerprints.

mod iso;
mod motifs;

pub use iso::{isomorphic, IsoMode};
pub use motifs::{detect_motifs, Ffl, MotifReport, Ring};

use crate::model::{CircuitDocument, Interaction, InteractionType, Role};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

/// Cycle enumeration and exhaustive path search are bounded to this many nodes.
pub const MAX_ANALYZED_NODES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Cassette,
    Promoter,
    Cds,
    Reporter,
}

impl NodeRole {
    pub fn token(self) -> &'static str {
        match self {
            NodeRole::Cassette => "cassette",
            NodeRole::Promoter => "promoter",
            NodeRole::Cds => "cds",
            NodeRole::Reporter => "reporter",
        }
    }

    fn parse(s: &str) -> Option<NodeRole> {
        Some(match s {
            "cassette" => NodeRole::Cassette,
            "promoter" => NodeRole::Promoter,
            "cds" => NodeRole::Cds,
            "reporter" => NodeRole::Reporter,
            _ => return None,
        })
    }

    pub fn is_cassette(self) -> bool {
        matches!(self, NodeRole::Cassette | NodeRole::Reporter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Activation,
    Repression,
}

impl Polarity {
    pub fn sign(self) -> char {
        match self {
            Polarity::Activation => '+',
            Polarity::Repression => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub role: NodeRole,
    /// Part identities used by part-aware matching.
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("interaction `{0}` does not resolve to a CDS regulator and a promoter target")]
    Unresolved(String),
    #[error("edge list line {0}: {1}")]
    Parse(usize, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Kappa {
    pub d: usize,
    pub f: usize,
    pub b: u8,
    pub n: usize,
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.d, self.f, self.b, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityClass {
    Minimal,
    Simple,
    Moderate,
    Cascaded,
    Feedback,
}

impl ComplexityClass {
    pub const ALL: [ComplexityClass; 5] = [
        ComplexityClass::Minimal,
        ComplexityClass::Simple,
        ComplexityClass::Moderate,
        ComplexityClass::Cascaded,
        ComplexityClass::Feedback,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ComplexityClass::Minimal => "minimal",
            ComplexityClass::Simple => "simple",
            ComplexityClass::Moderate => "moderate",
            ComplexityClass::Cascaded => "cascaded",
            ComplexityClass::Feedback => "feedback",
        }
    }
}

impl Kappa {
    pub fn class(&self) -> ComplexityClass {
        if self.b == 1 {
            ComplexityClass::Feedback
        } else if self.d == 0 {
            ComplexityClass::Minimal
        } else if self.d == 1 && self.n <= 2 {
            ComplexityClass::Simple
        } else if self.d <= 2 {
            ComplexityClass::Moderate
        } else {
            ComplexityClass::Cascaded
        }
    }
}

impl RegGraph {
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn has_edge(&self, src: usize, dst: usize, polarity: Polarity) -> bool {
        self.edges.contains(&Edge { src, dst, polarity })
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.src == v).map(|e| e.dst)
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.dst == v).map(|e| e.src).collect::<BTreeSet<_>>().len()
    }

    /// Distinct successor lists, self-loops included.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![BTreeSet::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.src].insert(e.dst);
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn has_cycle(&self) -> bool {
        topo_order(&self.adjacency()).is_none()
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for n in &self.nodes {
            writeln!(s, "node {} {}", n.id, n.role.token()).unwrap();
        }
        for e in &self.edges {
            writeln!(s, "edge {} {} {}", self.nodes[e.src].id, self.nodes[e.dst].id, e.polarity.sign()).unwrap();
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<RegGraph, GraphError> {
        let mut g = RegGraph::default();
        for (i, line) in text.lines().enumerate() {
            let t: Vec<&str> = line.split_whitespace().collect();
            let err = |m: &str| GraphError::Parse(i + 1, m.to_string());
            match t.as_slice() {
                [] => {}
                ["node", id, role] => {
                    let role = NodeRole::parse(role).ok_or_else(|| err("unknown role"))?;
                    g.nodes.push(Node { id: id.to_string(), role, label: String::new() });
                }
                ["edge", a, b, pol] => {
                    let src = g.index_of(a).ok_or_else(|| err("unknown source"))?;
                    let dst = g.index_of(b).ok_or_else(|| err("unknown target"))?;
                    let polarity = match *pol {
                        "+" => Polarity::Activation,
                        "-" => Polarity::Repression,
                        _ => return Err(err("polarity must be + or -")),
                    };
                    g.edges.push(Edge { src, dst, polarity });
                }
                _ => return Err(err("expected `node ID ROLE` or `edge SRC DST +|-`")),
            }
        }
        Ok(g)
    }
}

/// Kahn ordering; `None` when the graph has a cycle (self-loops included).
fn topo_order(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut indeg = vec![0usize; n];
    for succ in adj {
        for &v in succ {
            indeg[v] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = stack.pop() {
        order.push(u);
        for &v in &adj[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                stack.push(v);
            }
        }
    }
    (order.len() == n).then_some(order)
}

pub fn extract_regulatory_graph(doc: &CircuitDocument) -> Result<RegGraph, GraphError> {
    extract_filtered(doc, |_| true)
}

/// Extraction restricted to the regulatory interactions accepted by `keep`.
pub fn extract_filtered(doc: &CircuitDocument, keep: impl Fn(&Interaction) -> bool) -> Result<RegGraph, GraphError> {
    let mut g = RegGraph::default();
    // part component id -> node index
    let mut home: BTreeMap<&str, usize> = BTreeMap::new();
    let regulatory: Vec<&Interaction> = doc
        .interactions()
        .map(|(_, i)| i)
        .filter(|i| i.itype.is_regulatory() && keep(i))
        .collect();
    let regulators: BTreeSet<&str> = regulatory.iter().flat_map(|i| i.regulators()).collect();

    for region in doc.leaf_regions() {
        let idx = g.nodes.len();
        let mut regulates = false;
        let mut label = Vec::new();
        for f in &region.features {
            home.entry(f.child.as_str()).or_insert(idx);
            regulates |= regulators.contains(f.child.as_str());
            label.push(doc.get(&f.child).map(|c| c.display_name()).unwrap_or(&f.child));
        }
        let has_cds = region.features.iter().any(|f| doc.get(&f.child).is_some_and(|c| c.has_role(Role::Cds)));
        let role = if has_cds && !regulates { NodeRole::Reporter } else { NodeRole::Cassette };
        g.nodes.push(Node { id: region.id.clone(), role, label: label.join("|") });
    }
    for c in doc.components.values() {
        if home.contains_key(c.id.as_str()) || c.is_region() {
            continue;
        }
        let role = if c.has_role(Role::Promoter) || c.has_role(Role::Operator) {
            NodeRole::Promoter
        } else if c.has_role(Role::Cds) {
            NodeRole::Cds
        } else {
            continue;
        };
        home.insert(c.id.as_str(), g.nodes.len());
        g.nodes.push(Node { id: c.id.clone(), role, label: c.display_name().to_string() });
    }

    let mut edges = BTreeSet::new();
    for i in regulatory {
        let polarity = match i.itype {
            InteractionType::Inhibition => Polarity::Repression,
            _ => Polarity::Activation,
        };
        let is = |id: &str, roles: &[Role]| doc.get(id).is_some_and(|c| roles.iter().any(|r| c.has_role(*r)));
        let regs: Vec<&str> = i.regulators().collect();
        let targets: Vec<&str> = i.regulated().collect();
        if regs.is_empty()
            || targets.is_empty()
            || !regs.iter().all(|r| is(r, &[Role::Cds]) && home.contains_key(r))
            || !targets.iter().all(|t| is(t, &[Role::Promoter, Role::Operator]) && home.contains_key(t))
        {
            return Err(GraphError::Unresolved(i.id.clone()));
        }
        for r in &regs {
            for t in &targets {
                edges.insert(Edge { src: home[r], dst: home[t], polarity });
            }
        }
    }
    g.edges = edges.into_iter().collect();
    Ok(g)
}

fn longest_simple_path_and_cycle(adj: &[Vec<usize>]) -> (usize, usize) {
    fn dfs(v: usize, start: usize, len: usize, adj: &[Vec<usize>], seen: &mut Vec<bool>, best: &mut (usize, usize)) {
        best.0 = best.0.max(len);
        for &w in &adj[v] {
            if w == start {
                best.1 = best.1.max(len + 1);
            } else if !seen[w] {
                seen[w] = true;
                dfs(w, start, len + 1, adj, seen, best);
                seen[w] = false;
            }
        }
    }
    let mut best = (0, 0);
    let mut seen = vec![false; adj.len()];
    for s in 0..adj.len() {
        seen[s] = true;
        dfs(s, s, 0, adj, &mut seen, &mut best);
        seen[s] = false;
    }
    best
}

fn dag_longest_path(adj: &[Vec<usize>], order: &[usize]) -> usize {
    let mut dist = vec![0usize; adj.len()];
    for &u in order {
        for &v in &adj[u] {
            dist[v] = dist[v].max(dist[u] + 1);
        }
    }
    dist.into_iter().max().unwrap_or(0)
}

/// Strongly connected components (Tarjan), returned as component id per node.
fn scc(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    struct St<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on: Vec<bool>,
        stack: Vec<usize>,
        comp: Vec<usize>,
        next: usize,
        ncomp: usize,
    }
    fn visit(s: &mut St, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on[v] = true;
        for i in 0..s.adj[v].len() {
            let w = s.adj[v][i];
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            while let Some(w) = s.stack.pop() {
                s.on[w] = false;
                s.comp[w] = s.ncomp;
                if w == v {
                    break;
                }
            }
            s.ncomp += 1;
        }
    }
    let n = adj.len();
    let mut s = St {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on: vec![false; n],
        stack: Vec::new(),
        comp: vec![0; n],
        next: 0,
        ncomp: 0,
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    (s.comp, s.ncomp)
}

pub fn complexity(g: &RegGraph) -> Kappa {
    let adj = g.adjacency();
    let n = g.nodes.iter().filter(|v| v.role.is_cassette()).count();
    let f = (0..g.nodes.len())
        .filter(|&v| g.nodes[v].role != NodeRole::Cds)
        .map(|v| g.in_degree(v))
        .max()
        .unwrap_or(0);
    let d = match topo_order(&adj) {
        Some(order) => dag_longest_path(&adj, &order),
        None if g.nodes.len() <= MAX_ANALYZED_NODES => {
            let (path, cycle) = longest_simple_path_and_cycle(&adj);
            path.max(cycle)
        }
        None => {
            // Condensation: a cyclic component contributes its cycle length (its size).
            let (comp, k) = scc(&adj);
            let mut size = vec![0usize; k];
            for &c in &comp {
                size[c] += 1;
            }
            let mut weight: Vec<usize> = size.iter().map(|&s| if s > 1 { s } else { 0 }).collect();
            for e in &g.edges {
                if e.src == e.dst && size[comp[e.src]] == 1 {
                    weight[comp[e.src]] = 1;
                }
            }
            let mut cadj = vec![BTreeSet::new(); k];
            for e in &g.edges {
                if comp[e.src] != comp[e.dst] {
                    cadj[comp[e.src]].insert(comp[e.dst]);
                }
            }
            let cadj: Vec<Vec<usize>> = cadj.into_iter().map(|s| s.into_iter().collect()).collect();
            let order = topo_order(&cadj).expect("condensation is acyclic");
            let mut dist: Vec<usize> = weight.clone();
            for &u in &order {
                for &v in &cadj[u] {
                    dist[v] = dist[v].max(dist[u] + 1 + weight[v]);
                }
            }
            dist.into_iter().max().unwrap_or(0)
        }
    };
    Kappa { d, f, b: g.has_cycle() as u8, n }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, b| (h ^ *b as u64).wrapping_mul(FNV_PRIME))
}

/// Hash of the sorted node-role and (source role, target role, polarity) multisets.
pub fn fingerprint_graph(g: &RegGraph) -> u64 {
    let mut roles: Vec<&str> = g.nodes.iter().map(|n| n.role.token()).collect();
    roles.sort_unstable();
    let mut edges: Vec<(&str, &str, char)> = g
        .edges
        .iter()
        .map(|e| (g.nodes[e.src].role.token(), g.nodes[e.dst].role.token(), e.polarity.sign()))
        .collect();
    edges.sort_unstable();
    let mut s = String::new();
    for r in roles {
        write!(s, "n:{r};").unwrap();
    }
    for (a, b, p) in edges {
        write!(s, "e:{a}>{b}{p};").unwrap();
    }
    fnv1a(s.as_bytes())
}

/// Fingerprint of a document's regulatory graph. Documents whose graph cannot
/// be extracted hash their component role multiset instead.
pub fn fingerprint(doc: &CircuitDocument) -> u64 {
    match extract_regulatory_graph(doc) {
        Ok(g) => fingerprint_graph(&g),
        Err(_) => {
            let mut roles: Vec<String> =
                doc.components.values().map(|c| format!("{}:{:?}", c.entity_type, c.roles)).collect();
            roles.sort();
            fnv1a(format!("unresolved;{}", roles.join(";")).as_bytes())
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Builds a graph of `n` cassette nodes from (src, dst, repression?) triples.
    pub fn graph(n: usize, edges: &[(usize, usize, bool)]) -> RegGraph {
        let nodes = (0..n)
            .map(|i| Node { id: format!("n{i}"), role: NodeRole::Cassette, label: format!("L{i}") })
            .collect();
        let edges = edges
            .iter()
            .map(|&(src, dst, rep)| Edge {
                src,
                dst,
                polarity: if rep { Polarity::Repression } else { Polarity::Activation },
            })
            .collect();
        RegGraph { nodes, edges }
    }

    pub fn ring(k: usize) -> RegGraph {
        let e: Vec<_> = (0..k).map(|i| (i, (i + 1) % k, true)).collect();
        graph(k, &e)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn kappa_rows() {
        assert_eq!(complexity(&graph(1, &[])), Kappa { d: 0, f: 0, b: 0, n: 1 });
        assert_eq!(complexity(&ring(3)), Kappa { d: 3, f: 1, b: 1, n: 3 });
        assert_eq!(complexity(&ring(5)), Kappa { d: 5, f: 1, b: 1, n: 5 });
        assert_eq!(complexity(&ring(2)), Kappa { d: 2, f: 1, b: 1, n: 2 });
        let nor = graph(3, &[(0, 2, true), (1, 2, true)]);
        assert_eq!(complexity(&nor), Kappa { d: 1, f: 2, b: 0, n: 3 });
        let ffl = graph(3, &[(0, 1, false), (0, 2, false), (1, 2, false)]);
        assert_eq!(complexity(&ffl), Kappa { d: 2, f: 2, b: 0, n: 3 });
    }

    #[test]
    fn self_loop_is_feedback() {
        let g = graph(1, &[(0, 0, true)]);
        let k = complexity(&g);
        assert_eq!(k.b, 1);
        assert_eq!(k.d, 1);
    }

    #[test]
    fn large_cyclic_graph_uses_condensation() {
        // 14-node chain feeding a 2-cycle.
        let mut e: Vec<_> = (0..13).map(|i| (i, i + 1, true)).collect();
        e.push((13, 12, true));
        let k = complexity(&graph(14, &e));
        assert_eq!(k.b, 1);
        assert_eq!(k.d, 14);
    }

    #[test]
    fn classes() {
        assert_eq!(Kappa { d: 0, f: 0, b: 0, n: 1 }.class(), ComplexityClass::Minimal);
        assert_eq!(Kappa { d: 1, f: 1, b: 0, n: 2 }.class(), ComplexityClass::Simple);
        assert_eq!(Kappa { d: 1, f: 2, b: 0, n: 3 }.class(), ComplexityClass::Moderate);
        assert_eq!(Kappa { d: 3, f: 2, b: 0, n: 6 }.class(), ComplexityClass::Cascaded);
        assert_eq!(Kappa { d: 2, f: 1, b: 1, n: 2 }.class(), ComplexityClass::Feedback);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = graph(3, &[(0, 2, true), (1, 2, false)]);
        let text = g.to_edge_list();
        assert_eq!(text, "node n0 cassette\nnode n1 cassette\nnode n2 cassette\nedge n0 n2 -\nedge n1 n2 +\n");
        let back = RegGraph::from_edge_list(&text).unwrap();
        assert_eq!(back.edges, g.edges);
    }

    #[test]
    fn fingerprint_distinguishes_toggle_and_not() {
        let toggle = graph(2, &[(0, 1, true), (1, 0, true)]);
        let mut not = graph(2, &[(0, 1, true)]);
        not.nodes[1].role = NodeRole::Reporter;
        assert_ne!(fingerprint_graph(&toggle), fingerprint_graph(&not));
    }
}

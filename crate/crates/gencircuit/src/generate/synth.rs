//! NOR/NOT network synthesis. Up to three inputs the search is exhaustive
//! (fewest gates, then shallowest); four-input functions use greedy Shannon
//! factorization.

use super::GenError;
use crate::logic::{GateTopology, TopoNode};
use crate::model::TruthTable;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Hard cap on gates explored by the exhaustive search.
pub const MAX_GATES: usize = 8;

fn var_mask(n: usize, i: usize) -> u32 {
    (0..1u32 << n).filter(|r| r >> (n - 1 - i) & 1 == 1).fold(0, |m, r| m | 1 << r)
}

fn full(n: usize) -> u32 {
    ((1u64 << (1u64 << n)) - 1) as u32
}

/// True if `mask` is constant or ignores some input.
pub fn is_degenerate(n: usize, mask: u32) -> bool {
    if mask == 0 || mask == full(n) {
        return true;
    }
    (0..n).any(|i| {
        let shift = 1 << (n - 1 - i);
        let v = var_mask(n, i);
        // Cofactors agree on every row pair differing in input i.
        (mask & !v) << shift & v == mask & v && (mask & v) >> shift & !v == mask & !v
    })
}

/// A gate reads one node (NOT) or two nodes (NOR2); node indices count
/// inputs first, then earlier gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Gate(usize, usize);

#[derive(Debug, Clone)]
struct Network {
    gates: Vec<Gate>,
    depth: usize,
}

struct Search {
    n: usize,
    target: u32,
    full: u32,
    size: usize,
    values: Vec<u32>,
    depths: Vec<usize>,
    uses: Vec<usize>,
    gates: Vec<Gate>,
    best: Option<Network>,
}

impl Search {
    fn dangling(&self) -> usize {
        (self.n..self.values.len()).filter(|&v| self.uses[v] == 0).count()
    }

    fn dfs(&mut self) {
        let k = self.gates.len();
        let remaining = self.size - k;
        if remaining == 0 {
            let out = self.values.len() - 1;
            if self.values[out] == self.target && self.dangling() == 1 {
                let depth = self.depths[out];
                if self.best.as_ref().is_none_or(|b| depth < b.depth) {
                    self.best = Some(Network { gates: self.gates.clone(), depth });
                }
            }
            return;
        }
        if self.dangling() > remaining + 1 {
            return;
        }
        let nodes = self.values.len();
        for a in 0..nodes {
            for b in a..nodes {
                let g = Gate(a, b);
                // Independent neighbours come in canonical order.
                if let Some(prev) = self.gates.last() {
                    let last = nodes - 1;
                    if a != last && b != last && g < *prev {
                        continue;
                    }
                }
                let v = !(self.values[a] | self.values[b]) & self.full;
                if self.values.contains(&v) {
                    continue;
                }
                if remaining == 1 && v != self.target {
                    continue;
                }
                let d = 1 + self.depths[a].max(self.depths[b]);
                if let Some(best) = &self.best {
                    if remaining == 1 && d >= best.depth {
                        continue;
                    }
                }
                self.values.push(v);
                self.depths.push(d);
                self.uses.push(0);
                self.uses[a] += 1;
                if b != a {
                    self.uses[b] += 1;
                }
                self.gates.push(g);
                self.dfs();
                self.gates.pop();
                self.uses[a] -= 1;
                if b != a {
                    self.uses[b] -= 1;
                }
                self.uses.pop();
                self.depths.pop();
                self.values.pop();
                if self.best.as_ref().is_some_and(|b| b.depth == 1) {
                    return;
                }
            }
        }
    }
}

fn exhaustive(n: usize, target: u32, budget: usize) -> Option<Network> {
    // Minimal network if found, and the largest size already ruled out.
    type Memo = Mutex<HashMap<(usize, u32), (Option<Network>, usize)>>;
    static MEMO: OnceLock<Memo> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    let limit = budget.min(MAX_GATES);
    let mut start = 1;
    if let Some((hit, searched)) = memo.lock().unwrap().get(&(n, target)) {
        if let Some(net) = hit {
            return (net.gates.len() <= budget).then(|| net.clone());
        }
        if *searched >= limit {
            return None;
        }
        start = searched + 1;
    }
    let mut found = None;
    for size in start..=limit {
        let mut s = Search {
            n,
            target,
            full: full(n),
            size,
            values: (0..n).map(|i| var_mask(n, i)).collect(),
            depths: vec![0; n],
            uses: vec![0; n],
            gates: Vec::new(),
            best: None,
        };
        s.dfs();
        if s.best.is_some() {
            found = s.best;
            break;
        }
    }
    memo.lock().unwrap().insert((n, target), (found.clone(), limit));
    found
}

/// Greedy Shannon construction over node masks with a function cache.
struct Shannon {
    n: usize,
    full: u32,
    gates: Vec<Gate>,
    cache: HashMap<u32, usize>,
}

impl Shannon {
    fn new(n: usize) -> Shannon {
        let cache = (0..n).map(|i| (var_mask(n, i), i)).collect();
        Shannon { n, full: full(n), gates: Vec::new(), cache }
    }

    fn nor(&mut self, a: usize, b: usize) -> usize {
        let (a, b) = (a.min(b), a.max(b));
        let v = !(self.value(a) | self.value(b)) & self.full;
        if let Some(&id) = self.cache.get(&v) {
            return id;
        }
        self.gates.push(Gate(a, b));
        let id = self.n + self.gates.len() - 1;
        self.cache.insert(v, id);
        id
    }

    fn neg(&mut self, a: usize) -> usize {
        self.nor(a, a)
    }

    fn value(&self, id: usize) -> u32 {
        if id < self.n {
            var_mask(self.n, id)
        } else {
            let Gate(a, b) = self.gates[id - self.n];
            !(self.value(a) | self.value(b)) & self.full
        }
    }

    /// Node computing `f`, which must be non-constant.
    fn build(&mut self, f: u32) -> usize {
        if let Some(&id) = self.cache.get(&f) {
            return id;
        }
        let nf = !f & self.full;
        if let Some(&id) = self.cache.get(&nf) {
            return self.neg(id);
        }
        let i = (0..self.n)
            .find(|&i| {
                let v = var_mask(self.n, i);
                let shift = 1 << (self.n - 1 - i);
                (f & !v) << shift & v != f & v || (f & v) >> shift & !v != f & !v
            })
            .expect("non-constant function depends on some input");
        let v = var_mask(self.n, i);
        // Cofactors spread over all rows so they are functions of the same inputs.
        let shift = 1 << (self.n - 1 - i);
        let f1 = (f & v) | ((f & v) >> shift);
        let f0 = (f & !v) | ((f & !v) << shift);
        let x = i;
        let (zero, one) = (0, self.full);
        let out = match (f0, f1) {
            (a, b) if a == zero && b == one => x,
            (a, b) if a == one && b == zero => self.neg(x),
            // ¬x ∧ f0
            (_, b) if b == zero => {
                let nf0 = self.build_neg(f0);
                self.nor(x, nf0)
            }
            // x ∨ f0
            (_, b) if b == one => {
                let g0 = self.build(f0);
                let t = self.nor(x, g0);
                self.neg(t)
            }
            // x ∧ f1
            (a, _) if a == zero => {
                let nx = self.neg(x);
                let nf1 = self.build_neg(f1);
                self.nor(nx, nf1)
            }
            // ¬x ∨ f1
            (a, _) if a == one => {
                let nx = self.neg(x);
                let g1 = self.build(f1);
                let t = self.nor(nx, g1);
                self.neg(t)
            }
            _ => {
                let nx = self.neg(x);
                let nf1 = self.build_neg(f1);
                let nf0 = self.build_neg(f0);
                let hi = self.nor(nx, nf1);
                let lo = self.nor(x, nf0);
                let t = self.nor(hi, lo);
                self.neg(t)
            }
        };
        self.cache.insert(f, out);
        out
    }

    fn build_neg(&mut self, f: u32) -> usize {
        let nf = !f & self.full;
        if let Some(&id) = self.cache.get(&nf) {
            return id;
        }
        let id = self.build(f);
        self.neg(id)
    }
}

fn shannon(n: usize, target: u32) -> Network {
    let mut s = Shannon::new(n);
    let out = s.build(target);
    // Keep only gates reachable from the output.
    let mut keep = vec![false; s.gates.len()];
    let mut stack = vec![out];
    while let Some(v) = stack.pop() {
        if v >= n && !keep[v - n] {
            keep[v - n] = true;
            let Gate(a, b) = s.gates[v - n];
            stack.extend([a, b]);
        }
    }
    let mut remap = vec![0usize; n + s.gates.len()];
    for (i, r) in remap.iter_mut().enumerate().take(n) {
        *r = i;
    }
    let mut gates = Vec::new();
    for (k, g) in s.gates.iter().enumerate() {
        if keep[k] {
            remap[n + k] = n + gates.len();
            gates.push(Gate(remap[g.0], remap[g.1]));
        }
    }
    let mut depths = vec![0usize; n + gates.len()];
    for (k, g) in gates.iter().enumerate() {
        depths[n + k] = 1 + depths[g.0].max(depths[g.1]);
    }
    let depth = depths.last().copied().unwrap_or(0);
    Network { gates, depth }
}

fn to_topology(inputs: &[String], net: &Network) -> GateTopology {
    let n = inputs.len();
    let name = |v: usize| if v < n { inputs[v].clone() } else { format!("g{}", v - n + 1) };
    let mut nodes: Vec<TopoNode> = inputs.iter().map(TopoNode::sensor).collect();
    for (k, g) in net.gates.iter().enumerate() {
        let ins = if g.0 == g.1 { vec![name(g.0)] } else { vec![name(g.0), name(g.1)] };
        let refs: Vec<&str> = ins.iter().map(String::as_str).collect();
        let mut node = TopoNode::gate(format!("g{}", k + 1), &refs);
        node.is_output = k + 1 == net.gates.len();
        nodes.push(node);
    }
    GateTopology { nodes }
}

/// Smallest NOR/NOT network (fan-in at most 2) computing output 0 of `table`
/// within `budget` gates. Sensors are named after the table inputs and gates
/// `g1..gk` in dependency order, the last being the output.
pub fn synthesize_nor_network(table: &TruthTable, budget: usize) -> Result<GateTopology, GenError> {
    let n = table.inputs.len();
    if !(1..=4).contains(&n) || table.outputs.len() != 1 {
        return Err(GenError::Invalid(format!("synthesis needs 1 to 4 inputs and one output, got {n} inputs")));
    }
    let mask = table.mask(0) as u32;
    if is_degenerate(n, mask) {
        return Err(GenError::Degenerate(format!("output mask {mask:#x} is constant or ignores an input")));
    }
    let net = if n <= 3 {
        exhaustive(n, mask, budget)
    } else {
        Some(shannon(n, mask)).filter(|net| net.gates.len() <= budget)
    };
    let net = net.ok_or_else(|| GenError::Budget(format!("no NOR network within {budget} gates for mask {mask:#x}")))?;
    Ok(to_topology(&table.inputs, &net))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        ["a", "b", "c", "d"][..n].iter().map(|s| s.to_string()).collect()
    }

    fn table(n: usize, f: impl Fn(&[bool]) -> bool) -> TruthTable {
        TruthTable::from_fn(names(n), vec!["y".into()], |v| vec![f(v)])
    }

    fn check(t: &TruthTable, budget: usize) -> GateTopology {
        let topo = synthesize_nor_network(t, budget).unwrap();
        topo.validate().unwrap();
        assert_eq!(topo.truth_table().mask(0), t.mask(0));
        topo
    }

    #[test]
    fn small_cases() {
        let not = check(&table(1, |v| !v[0]), 8);
        assert_eq!((not.gates().len(), not.depth()), (1, 1));
        let nor = check(&table(2, |v| !(v[0] || v[1])), 8);
        assert_eq!(nor.gates().len(), 1);
        let and = check(&table(2, |v| v[0] && v[1]), 8);
        assert_eq!((and.gates().len(), and.depth()), (3, 2));
        let or = check(&table(2, |v| v[0] || v[1]), 8);
        assert_eq!(or.gates().len(), 2);
    }

    #[test]
    fn nand2_needs_depth_three() {
        let t = check(&table(2, |v| !(v[0] && v[1])), 8);
        assert_eq!((t.gates().len(), t.depth()), (4, 3));
        // Depth 2 is impossible: the output would be a NOR over inputs and
        // first-level gates, and none of those pairs gives NAND.
        let full = full(2);
        let lits: Vec<u32> = (0..2).map(|i| var_mask(2, i)).collect();
        let mut level1: Vec<u32> = Vec::new();
        for a in 0..2 {
            for b in a..2 {
                level1.push(!(lits[a] | lits[b]) & full);
            }
        }
        let mut nodes = lits.clone();
        nodes.extend(&level1);
        for a in 0..nodes.len() {
            for b in a..nodes.len() {
                assert_ne!(!(nodes[a] | nodes[b]) & full, t.truth_table().mask(0) as u32);
            }
        }
    }

    #[test]
    fn degenerate_rejected() {
        assert!(matches!(synthesize_nor_network(&table(2, |_| true), 8), Err(GenError::Degenerate(_))));
        assert!(matches!(synthesize_nor_network(&table(2, |v| v[0]), 8), Err(GenError::Degenerate(_))));
        assert!(!is_degenerate(2, 0b0110));
    }

    #[test]
    fn majority_and_xor3() {
        let maj = check(&table(3, |v| (v[0] as u8 + v[1] as u8 + v[2] as u8) >= 2), 8);
        assert!(maj.depth() >= 3);
        let budget = synthesize_nor_network(&table(3, |v| v[0] ^ v[1] ^ v[2]), 4);
        assert!(matches!(budget, Err(GenError::Budget(_))));
    }

    #[test]
    fn all_two_input_functions() {
        for mask in 0u64..16 {
            let t = TruthTable::from_mask(names(2), "y", mask);
            match synthesize_nor_network(&t, 8) {
                Ok(topo) => assert_eq!(topo.truth_table().mask(0), mask),
                Err(GenError::Degenerate(_)) => assert!(is_degenerate(2, mask as u32)),
                Err(e) => panic!("{mask:#x}: {e}"),
            }
        }
    }

    #[test]
    fn four_input_shannon() {
        for mask in [0x6996u64, 0x8000, 0x7ffe, 0x1e87, 0xcafe] {
            let t = TruthTable::from_mask(names(4), "y", mask);
            let topo = synthesize_nor_network(&t, 200).unwrap();
            assert_eq!(topo.truth_table().mask(0), mask);
        }
    }
}

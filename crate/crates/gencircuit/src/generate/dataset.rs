//! Dataset assembly: class-balanced generation, part-aware deduplication and
//! isomorphism-disjoint train/val/test splits.

use super::circuits::{generate_cascaded, generate_circuit, GenParams};
use super::synth::{is_degenerate, synthesize_nor_network};
use super::GenError;
use crate::graph::{extract_regulatory_graph, fingerprint_graph, isomorphic, ComplexityClass, IsoMode, RegGraph};
use crate::model::{CircuitSpec, CircuitType, PartsLibrary, Tier, TruthTable};
use crate::rng::{mix, SplitMix64};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn token(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub total: usize,
    /// Fractions for minimal, simple, moderate, cascaded and feedback.
    pub class_mix: [f64; 5],
    /// Train, val and test fractions.
    pub split: [f64; 3],
    pub tier: Tier,
    /// Generation attempts allowed per requested circuit before a shortfall is reported.
    pub attempts_per_item: usize,
    /// Largest NOR network a cascade may use (one repressor per gate).
    pub gate_budget: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            total: 1000,
            class_mix: [0.10, 0.15, 0.30, 0.20, 0.25],
            split: [0.80, 0.10, 0.10],
            tier: Tier::Training,
            attempts_per_item: 60,
            gate_budget: 5,
        }
    }
}

impl DatasetConfig {
    pub fn check(&self) -> Result<(), GenError> {
        let ok = |xs: &[f64]| xs.iter().all(|x| (0.0..=1.0).contains(x)) && (xs.iter().sum::<f64>() - 1.0).abs() < 1e-9;
        if !ok(&self.class_mix) || !ok(&self.split) {
            return Err(GenError::Invalid("class mix and split fractions must each sum to 1".into()));
        }
        if self.tier != Tier::Training {
            return Err(GenError::Invalid("datasets draw from the training tier only".into()));
        }
        Ok(())
    }

    /// Exact per-class targets: rounded shares with the remainder moved to the
    /// classes with the largest rounding loss.
    pub fn class_targets(&self) -> [usize; 5] {
        apportion(self.total, &self.class_mix)
    }
}

fn apportion(total: usize, fracs: &[f64]) -> [usize; 5] {
    let mut out = [0usize; 5];
    let raw: Vec<f64> = fracs.iter().map(|f| f * total as f64).collect();
    for (o, r) in out.iter_mut().zip(&raw) {
        *o = r.round() as usize;
    }
    let mut sum: usize = out[..fracs.len()].iter().sum();
    let mut order: Vec<usize> = (0..fracs.len()).collect();
    while sum != total {
        if sum < total {
            order.sort_by(|&a, &b| (raw[b] - out[b] as f64).total_cmp(&(raw[a] - out[a] as f64)));
            out[order[0]] += 1;
            sum += 1;
        } else {
            order.sort_by(|&a, &b| (out[b] as f64 - raw[b]).total_cmp(&(out[a] as f64 - raw[a])));
            out[order[0]] -= 1;
            sum -= 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub requested: usize,
    pub generated: usize,
    pub class_targets: BTreeMap<String, usize>,
    pub class_counts: BTreeMap<String, usize>,
    pub type_counts: BTreeMap<String, usize>,
    pub kappa_histogram: BTreeMap<String, usize>,
    pub split_counts: BTreeMap<String, usize>,
    pub split_classes: BTreeMap<String, usize>,
    /// Circuits per class that could not be generated without duplicates.
    pub shortfall: BTreeMap<String, usize>,
    pub duplicates_rejected: usize,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub circuits: Vec<CircuitSpec>,
    /// Split of each circuit, parallel to `circuits`.
    pub assignment: Vec<Split>,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn split(&self, s: Split) -> Vec<&CircuitSpec> {
        self.circuits.iter().zip(&self.assignment).filter(|(_, a)| **a == s).map(|(c, _)| c).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DedupOutcome {
    /// Indices of retained circuits, in input order.
    pub kept: Vec<usize>,
    /// (duplicate, keeper) index pairs.
    pub removed_pairs: Vec<(usize, usize)>,
}

/// Buckets graphs by fingerprint and confirms candidates by isomorphism.
struct IsoIndex {
    mode: IsoMode,
    buckets: HashMap<u64, Vec<(usize, RegGraph)>>,
}

impl IsoIndex {
    fn new(mode: IsoMode) -> IsoIndex {
        IsoIndex { mode, buckets: HashMap::new() }
    }

    fn find(&self, g: &RegGraph) -> Option<usize> {
        self.buckets.get(&fingerprint_graph(g))?.iter().find(|(_, h)| isomorphic(g, h, self.mode)).map(|(i, _)| *i)
    }

    fn insert(&mut self, key: usize, g: RegGraph) {
        self.buckets.entry(fingerprint_graph(&g)).or_default().push((key, g));
    }
}

/// Keeps the first circuit of each isomorphism class. Circuits whose graph
/// cannot be extracted are always kept.
pub fn deduplicate(circuits: &[CircuitSpec], mode: IsoMode) -> DedupOutcome {
    let mut index = IsoIndex::new(mode);
    let mut out = DedupOutcome::default();
    for (i, c) in circuits.iter().enumerate() {
        let Ok(g) = extract_regulatory_graph(&c.document) else {
            out.kept.push(i);
            continue;
        };
        match index.find(&g) {
            Some(keeper) => out.removed_pairs.push((i, keeper)),
            None => {
                index.insert(i, g);
                out.kept.push(i);
            }
        }
    }
    out
}

fn candidate(class: ComplexityClass, seed: u64, lib: &PartsLibrary, budget: usize) -> Result<CircuitSpec, GenError> {
    let mut rng = SplitMix64::new(seed);
    let child = rng.next_u64();
    let params = |t: CircuitType| GenParams::new(t, child);
    match class {
        ComplexityClass::Minimal => generate_circuit(&params(CircuitType::Cassette), lib),
        ComplexityClass::Simple => generate_circuit(&params(CircuitType::NotGate), lib),
        ComplexityClass::Moderate => {
            let t = *rng.pick(&[CircuitType::TwoInputGate, CircuitType::Branched, CircuitType::Ffl]);
            generate_circuit(&params(t), lib)
        }
        ComplexityClass::Feedback => {
            let mut p = params(CircuitType::Toggle);
            match rng.below(3) {
                0 => {}
                k => {
                    p.circuit_type = CircuitType::Oscillator;
                    p.ring = Some(if k == 1 { 3 } else { 5 });
                }
            }
            generate_circuit(&p, lib)
        }
        ComplexityClass::Cascaded => {
            let n = 2 + rng.below(3);
            let rows = 1u64 << n;
            let mask = rng.next_u64() & ((1u64 << rows) - 1);
            if is_degenerate(n, mask as u32) {
                return Err(GenError::Degenerate(format!("{mask:#x}")));
            }
            let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
            let table = TruthTable::from_mask(names, "y", mask);
            // Cheap depth filter before gate assignment.
            let topo = synthesize_nor_network(&table, budget)?;
            if !(3..=4).contains(&topo.depth()) {
                return Err(GenError::Invalid(format!("depth {} outside 3..=4", topo.depth())));
            }
            generate_cascaded(&table, lib, child, budget)
        }
    }
}

/// Builds a class-balanced dataset of distinct (part-aware) circuits and
/// assigns whole role-labeled isomorphism classes to splits.
pub fn build_dataset(config: &DatasetConfig, lib: &PartsLibrary, seed: u64) -> Result<Dataset, GenError> {
    config.check()?;
    let lib = lib.filter_tier(config.tier);
    let targets = config.class_targets();
    let mut circuits: Vec<CircuitSpec> = Vec::new();
    let mut graphs: Vec<RegGraph> = Vec::new();
    let mut seen = IsoIndex::new(IsoMode::PartAware);
    let mut shortfall = BTreeMap::new();
    let mut duplicates = 0usize;
    let mut attempt = 0u64;
    for (ci, class) in ComplexityClass::ALL.into_iter().enumerate() {
        let mut made = 0;
        let budget = targets[ci] * config.attempts_per_item;
        let mut tries = 0;
        while made < targets[ci] && tries < budget {
            tries += 1;
            let s = mix(seed, attempt);
            attempt += 1;
            let Ok(spec) = candidate(class, s, &lib, config.gate_budget) else { continue };
            if spec.kappa.class() != class {
                continue;
            }
            let Ok(g) = extract_regulatory_graph(&spec.document) else { continue };
            if seen.find(&g).is_some() {
                duplicates += 1;
                continue;
            }
            seen.insert(circuits.len(), g.clone());
            graphs.push(g);
            circuits.push(spec);
            made += 1;
        }
        if made < targets[ci] {
            shortfall.insert(class.token().to_string(), targets[ci] - made);
        }
    }

    // Role-labeled isomorphism classes, largest first, each to the split
    // currently furthest below its target.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut role_index = IsoIndex::new(IsoMode::RoleLabeled);
    for (i, g) in graphs.iter().enumerate() {
        match role_index.find(g) {
            Some(k) => classes[k].push(i),
            None => {
                role_index.insert(classes.len(), g.clone());
                classes.push(vec![i]);
            }
        }
    }
    classes.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let split_targets = apportion(circuits.len(), &config.split);
    let mut filled = [0usize; 3];
    let mut assignment = vec![Split::Train; circuits.len()];
    let mut split_classes = [0usize; 3];
    for members in &classes {
        let s = (0..3)
            .max_by(|&a, &b| {
                let da = split_targets[a] as i64 - filled[a] as i64;
                let db = split_targets[b] as i64 - filled[b] as i64;
                da.cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        filled[s] += members.len();
        split_classes[s] += 1;
        for &i in members {
            assignment[i] = Split::ALL[s];
        }
    }

    let count = |f: &dyn Fn(&CircuitSpec) -> String| {
        let mut m = BTreeMap::new();
        for c in &circuits {
            *m.entry(f(c)).or_insert(0) += 1;
        }
        m
    };
    let manifest = Manifest {
        seed,
        requested: config.total,
        generated: circuits.len(),
        class_targets: ComplexityClass::ALL.iter().zip(targets).map(|(c, t)| (c.token().to_string(), t)).collect(),
        class_counts: count(&|c| c.kappa.class().token().to_string()),
        type_counts: count(&|c| c.circuit_type.token().to_string()),
        kappa_histogram: count(&|c| c.kappa.to_string()),
        split_counts: Split::ALL.iter().zip(filled).map(|(s, n)| (s.token().to_string(), n)).collect(),
        split_classes: Split::ALL.iter().zip(split_classes).map(|(s, n)| (s.token().to_string(), n)).collect(),
        shortfall,
        duplicates_rejected: duplicates,
    };
    Ok(Dataset { circuits, assignment, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::extract_regulatory_graph;

    #[test]
    fn apportion_exact() {
        assert_eq!(apportion(1000, &[0.10, 0.15, 0.30, 0.20, 0.25]), [100, 150, 300, 200, 250]);
        assert_eq!(apportion(7, &[0.10, 0.15, 0.30, 0.20, 0.25]).iter().sum::<usize>(), 7);
        assert_eq!(apportion(10, &[0.8, 0.1, 0.1])[..3], [8, 1, 1]);
    }

    #[test]
    fn minimal_only() {
        let cfg = DatasetConfig { total: 10, class_mix: [1.0, 0.0, 0.0, 0.0, 0.0], ..Default::default() };
        let lib = PartsLibrary::builtin();
        let ds = build_dataset(&cfg, &lib, 5).unwrap();
        assert_eq!(ds.circuits.len(), 10);
        assert!(ds.circuits.iter().all(|c| c.circuit_type == CircuitType::Cassette));
        let again = build_dataset(&cfg, &lib, 5).unwrap();
        assert_eq!(serde_json::to_string(&ds.manifest).unwrap(), serde_json::to_string(&again.manifest).unwrap());
    }

    #[test]
    fn dedup_modes() {
        let lib = PartsLibrary::builtin();
        let mut a = GenParams::new(CircuitType::Toggle, 1);
        a.repressors = Some(vec!["LacI".into(), "TetR".into()]);
        let mut b = a.clone();
        b.repressors = Some(vec!["BM3R1".into(), "AmtR".into()]);
        let ta = generate_circuit(&a, &lib).unwrap();
        let tb = generate_circuit(&b, &lib).unwrap();
        let mut renamed = ta.clone();
        renamed.document = ta.document.renamed(|id| format!("x_{id}"));
        let list = vec![ta.clone(), tb, renamed];
        let part = deduplicate(&list, IsoMode::PartAware);
        assert_eq!(part.kept, vec![0, 1]);
        assert_eq!(part.removed_pairs, vec![(2, 0)]);
        let role = deduplicate(&list, IsoMode::RoleLabeled);
        assert_eq!(role.kept, vec![0]);
        let g = extract_regulatory_graph(&list[0].document).unwrap();
        assert!(isomorphic(&g, &g, IsoMode::PartAware));
    }
}

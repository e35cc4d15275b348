//! Functional evaluation: symbolic steady-state logic over documents, Hill
//! response functions, fixed-point signal propagation over NOR topologies and
//! gate compatibility.

use crate::graph::extract_regulatory_graph;
use crate::model::{
    input_vectors, CircuitDocument, Component, HillParams, Interaction, InteractionType, PartsLibrary, Role,
    TruthRow, TruthTable,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// ON/OFF output thresholds in RPU.
pub const ON_THRESHOLD: f64 = 0.5;
pub const OFF_THRESHOLD: f64 = 0.1;
pub const CONVERGENCE_TOL: f64 = 1e-6;

pub type InputAssignment = BTreeMap<String, bool>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LogicError {
    #[error("regulatory graph has a cycle; steady-state logic is undefined")]
    UnsupportedTopology,
    #[error("cannot extract regulatory graph: {0}")]
    Extraction(String),
    #[error("input `{0}` does not name a promoter in the circuit")]
    UndeclaredInput(String),
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("node `{0}` has no response function assigned")]
    Unassigned(String),
    #[error("no fixed point after {0} iterations")]
    NotConverged(usize),
}

// ---------------------------------------------------------------------------
// Symbolic evaluation over documents

fn name_of(doc: &CircuitDocument, id: &str) -> String {
    doc.get(id).map(|c| c.display_name().to_string()).unwrap_or_else(|| id.to_string())
}

fn is_promoter_like(c: &Component) -> bool {
    c.has_role(Role::Promoter) || c.has_role(Role::Operator)
}

/// Interactions (regulatory only) that target component `id`.
fn acting_on<'a>(doc: &'a CircuitDocument, id: &'a str) -> impl Iterator<Item = &'a Interaction> + 'a {
    doc.interactions()
        .map(|(_, i)| i)
        .filter(move |i| i.itype.is_regulatory() && i.regulated().any(|t| t == id))
}

/// A promoter's declared regulation takes effect only when at least one
/// declared regulator is a library cognate. Promoters unknown to the library
/// are taken at face value.
pub fn promoter_effective(doc: &CircuitDocument, lib: &PartsLibrary, promoter_id: &str) -> bool {
    let pname = name_of(doc, promoter_id);
    if lib.by_name(&pname).is_none() {
        return true;
    }
    acting_on(doc, promoter_id)
        .flat_map(|i| i.regulators())
        .any(|r| lib.regulates(&name_of(doc, r), &pname))
}

pub fn effective_interaction(doc: &CircuitDocument, lib: &PartsLibrary, i: &Interaction) -> bool {
    i.itype.is_regulatory() && i.regulated().all(|t| promoter_effective(doc, lib, t))
}

/// Names of reporter proteins encoded in the circuit's cassettes, sorted.
pub fn reporter_names(doc: &CircuitDocument, lib: &PartsLibrary) -> Vec<String> {
    let mut out = BTreeSet::new();
    for region in doc.leaf_regions() {
        for f in &region.features {
            if let Some(c) = doc.get(&f.child) {
                if c.has_role(Role::Cds) && lib.by_name(c.display_name()).is_some_and(|p| p.is_reporter()) {
                    out.insert(c.display_name().to_string());
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Promoter names present in the document.
pub fn promoter_names(doc: &CircuitDocument) -> BTreeSet<String> {
    doc.components.values().filter(|c| c.has_role(Role::Promoter)).map(|c| c.display_name().to_string()).collect()
}

struct PromoterModel {
    name: String,
    effective: bool,
    inducible_without_activator: bool,
    /// Independent inhibitions: each is a set of inhibitor names, any present represses.
    independent: Vec<Vec<String>>,
    /// Cooperative groups: repressed only when every member is present.
    cooperative: BTreeMap<String, Vec<String>>,
    stimulations: Vec<Vec<String>>,
}

struct RegionModel {
    promoters: Vec<usize>,
    operators: Vec<usize>,
    products: Vec<String>,
}

/// Symbolic steady-state model of a document: promoter states follow
/// base ∧ ¬repressed ∧ all stimulations, proteins are present by name.
pub struct LogicModel {
    promoters: Vec<PromoterModel>,
    regions: Vec<RegionModel>,
}

impl LogicModel {
    pub fn build(doc: &CircuitDocument, lib: &PartsLibrary) -> Result<LogicModel, LogicError> {
        let g = extract_regulatory_graph(doc).map_err(|e| LogicError::Extraction(e.to_string()))?;
        if g.has_cycle() {
            return Err(LogicError::UnsupportedTopology);
        }
        let mut index = BTreeMap::new();
        let mut promoters = Vec::new();
        for c in doc.components.values().filter(|c| is_promoter_like(c)) {
            let effective = promoter_effective(doc, lib, &c.id);
            let mut pm = PromoterModel {
                name: c.display_name().to_string(),
                effective,
                inducible_without_activator: false,
                independent: Vec::new(),
                cooperative: BTreeMap::new(),
                stimulations: Vec::new(),
            };
            let mut cognate_activator = false;
            if effective {
                for i in acting_on(doc, &c.id) {
                    let regs: Vec<String> = i.regulators().map(|r| name_of(doc, r)).collect();
                    match (i.itype, &i.cooperative_group) {
                        (InteractionType::Inhibition, Some(g)) => pm.cooperative.entry(g.clone()).or_default().extend(regs),
                        (InteractionType::Inhibition, None) => pm.independent.push(regs),
                        _ => {
                            cognate_activator |= regs.iter().any(|r| lib.regulates(r, &pm.name));
                            pm.stimulations.push(regs);
                        }
                    }
                }
            }
            pm.inducible_without_activator =
                lib.by_name(&pm.name).is_some_and(|p| p.is_inducible()) && !cognate_activator;
            index.insert(c.id.clone(), promoters.len());
            promoters.push(pm);
        }
        let mut regions = Vec::new();
        for r in doc.leaf_regions() {
            let mut rm = RegionModel { promoters: Vec::new(), operators: Vec::new(), products: Vec::new() };
            for f in &r.features {
                let Some(c) = doc.get(&f.child) else { continue };
                if c.has_role(Role::Promoter) {
                    rm.promoters.push(index[&c.id]);
                } else if c.has_role(Role::Operator) {
                    rm.operators.push(index[&c.id]);
                } else if c.has_role(Role::Cds) {
                    rm.products.push(c.display_name().to_string());
                }
            }
            regions.push(rm);
        }
        Ok(LogicModel { promoters, regions })
    }

    fn repressed(&self, p: &PromoterModel, present: &BTreeSet<String>) -> bool {
        p.independent.iter().any(|regs| regs.iter().any(|r| present.contains(r)))
            || p.cooperative.values().any(|regs| !regs.is_empty() && regs.iter().all(|r| present.contains(r)))
    }

    fn promoter_on(&self, p: &PromoterModel, inputs: &InputAssignment, present: &BTreeSet<String>) -> bool {
        let base = match inputs.get(&p.name) {
            Some(bit) => *bit,
            None => !p.inducible_without_activator,
        };
        base && !self.repressed(p, present)
            && p.stimulations.iter().all(|regs| regs.iter().any(|r| present.contains(r)))
    }

    /// Fixed point of protein presence for one input assignment.
    pub fn present(&self, inputs: &InputAssignment) -> Result<BTreeSet<String>, LogicError> {
        for name in inputs.keys() {
            if !self.promoters.iter().any(|p| &p.name == name) {
                return Err(LogicError::UndeclaredInput(name.clone()));
            }
        }
        let mut present = BTreeSet::new();
        for _ in 0..self.regions.len() + 2 {
            let mut next = BTreeSet::new();
            for r in &self.regions {
                let on = r.promoters.iter().any(|&p| self.promoter_on(&self.promoters[p], inputs, &present))
                    && r.operators.iter().all(|&o| {
                        let op = &self.promoters[o];
                        !op.effective || !self.repressed(op, &present)
                    });
                if on {
                    next.extend(r.products.iter().cloned());
                }
            }
            if next == present {
                return Ok(present);
            }
            present = next;
        }
        Ok(present)
    }
}

/// Reporter outputs for one input assignment, keyed by reporter name.
pub fn eval_truth_table(
    doc: &CircuitDocument,
    lib: &PartsLibrary,
    inputs: &InputAssignment,
) -> Result<BTreeMap<String, bool>, LogicError> {
    let model = LogicModel::build(doc, lib)?;
    let present = model.present(inputs)?;
    Ok(reporter_names(doc, lib).into_iter().map(|r| {
        let on = present.contains(&r);
        (r, on)
    }).collect())
}

/// Full table over the named inputs; an output is 1 when its protein is present.
pub fn circuit_truth_table(
    doc: &CircuitDocument,
    lib: &PartsLibrary,
    inputs: &[String],
    outputs: &[String],
) -> Result<TruthTable, LogicError> {
    let model = LogicModel::build(doc, lib)?;
    let mut rows = Vec::new();
    for v in input_vectors(inputs.len()) {
        let assignment: InputAssignment = inputs.iter().cloned().zip(v.iter().copied()).collect();
        let present = model.present(&assignment)?;
        rows.push(TruthRow { outputs: outputs.iter().map(|o| present.contains(o)).collect(), inputs: v });
    }
    Ok(TruthTable { inputs: inputs.to_vec(), outputs: outputs.to_vec(), rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteProfile {
    pub expression_level: f64,
    pub inducible: bool,
    pub repressible: bool,
    pub inducer: Option<String>,
}

/// Static expression profile of the reporter cassettes: summed
/// promoter × RBS strength of those not under effective repression.
pub fn cassette_profile(doc: &CircuitDocument, lib: &PartsLibrary) -> CassetteProfile {
    let mut prof = CassetteProfile { expression_level: 0.0, inducible: false, repressible: false, inducer: None };
    for region in doc.leaf_regions() {
        let parts: Vec<&Component> = region.features.iter().filter_map(|f| doc.get(&f.child)).collect();
        let is_reporter = parts
            .iter()
            .any(|c| c.has_role(Role::Cds) && lib.by_name(c.display_name()).is_some_and(|p| p.is_reporter()));
        if !is_reporter {
            continue;
        }
        let promoter = parts.iter().find(|c| c.has_role(Role::Promoter));
        let rbs = parts.iter().find(|c| c.has_role(Role::Rbs));
        let (Some(p), Some(r)) = (promoter, rbs) else { continue };
        let repressed = promoter_effective(doc, lib, &p.id)
            && acting_on(doc, &p.id).any(|i| i.itype == InteractionType::Inhibition);
        let lp = lib.by_name(p.display_name());
        if let Some(lp) = lp {
            prof.inducible |= lp.is_inducible();
            prof.repressible |= lp.is_repressible();
            if prof.inducer.is_none() {
                prof.inducer = lp.inducer().map(str::to_string);
            }
        }
        if !repressed {
            let ps = lp.map(|x| x.strength()).unwrap_or(0.0);
            let rs = lib.by_name(r.display_name()).map(|x| x.strength()).unwrap_or(0.0);
            prof.expression_level += ps * rs;
        }
    }
    prof
}

// ---------------------------------------------------------------------------
// NOR topologies and Hill propagation

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopoNode {
    pub id: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub is_output: bool,
    #[serde(default)]
    pub is_sensor: bool,
    /// Repressed only when all inputs are high (min instead of sum).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub cooperative: bool,
}

impl TopoNode {
    pub fn sensor(id: impl Into<String>) -> TopoNode {
        TopoNode { id: id.into(), inputs: Vec::new(), is_output: false, is_sensor: true, cooperative: false }
    }

    pub fn gate(id: impl Into<String>, inputs: &[&str]) -> TopoNode {
        TopoNode {
            id: id.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            is_output: false,
            is_sensor: false,
            cooperative: false,
        }
    }
}

/// DAG of NOR gates (a 1-input NOR is a NOT) fed by sensors.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateTopology {
    pub nodes: Vec<TopoNode>,
}

impl GateTopology {
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn sensors(&self) -> Vec<&str> {
        self.nodes.iter().filter(|n| n.is_sensor).map(|n| n.id.as_str()).collect()
    }

    pub fn gates(&self) -> Vec<&str> {
        self.nodes.iter().filter(|n| !n.is_sensor).map(|n| n.id.as_str()).collect()
    }

    pub fn output(&self) -> Option<&str> {
        self.nodes.iter().find(|n| n.is_output).map(|n| n.id.as_str())
    }

    pub fn validate(&self) -> Result<(), LogicError> {
        let err = |m: String| Err(LogicError::Topology(m));
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) {
                return err(format!("duplicate node `{}`", n.id));
            }
            if n.is_sensor && !n.inputs.is_empty() {
                return err(format!("sensor `{}` has inputs", n.id));
            }
            if !n.is_sensor && (n.inputs.is_empty() || n.inputs.len() > 3) {
                return err(format!("gate `{}` has fan-in {}", n.id, n.inputs.len()));
            }
            for i in &n.inputs {
                if self.index_of(i).is_none() {
                    return err(format!("`{}` reads unknown node `{i}`", n.id));
                }
            }
        }
        if self.nodes.iter().filter(|n| n.is_output).count() != 1 {
            return err("exactly one output node required".into());
        }
        if self.order().is_none() {
            return err("topology has a cycle".into());
        }
        Ok(())
    }

    /// Node indices in dependency order, `None` if cyclic.
    pub fn order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let before = order.len();
            for v in 0..n {
                if !done[v] && self.nodes[v].inputs.iter().all(|i| self.index_of(i).is_some_and(|u| done[u])) {
                    done[v] = true;
                    order.push(v);
                }
            }
            if order.len() == before {
                return None;
            }
        }
        Some(order)
    }

    /// Gates on the longest sensor-to-output path.
    pub fn depth(&self) -> usize {
        let Some(order) = self.order() else { return 0 };
        let mut level = vec![0usize; self.nodes.len()];
        for v in order {
            let n = &self.nodes[v];
            if !n.is_sensor {
                level[v] = 1 + n.inputs.iter().map(|i| level[self.index_of(i).unwrap()]).max().unwrap_or(0);
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Boolean value of every node; `bits` follow `sensors()` order.
    pub fn eval_nodes(&self, bits: &[bool]) -> Vec<bool> {
        let sensors = self.sensors();
        let mut val = vec![false; self.nodes.len()];
        for v in self.order().expect("acyclic topology") {
            let n = &self.nodes[v];
            val[v] = if n.is_sensor {
                bits[sensors.iter().position(|s| *s == n.id).unwrap()]
            } else {
                let ins = n.inputs.iter().map(|i| val[self.index_of(i).unwrap()]);
                if n.cooperative {
                    !ins.fold(true, |a, b| a && b)
                } else {
                    !ins.fold(false, |a, b| a || b)
                }
            };
        }
        val
    }

    pub fn eval(&self, bits: &[bool]) -> bool {
        let out = self.index_of(self.output().expect("output node")).unwrap();
        self.eval_nodes(bits)[out]
    }

    pub fn truth_table(&self) -> TruthTable {
        let inputs: Vec<String> = self.sensors().iter().map(|s| s.to_string()).collect();
        let out = self.output().unwrap_or("y").to_string();
        TruthTable::from_fn(inputs, vec![out], |v| vec![self.eval(v)])
    }
}

/// Repressor response: y = y_min + (y_max − y_min)·Kⁿ/(Kⁿ + xⁿ).
pub fn hill(p: &HillParams, x: f64) -> f64 {
    let kn = p.k.powf(p.n);
    p.y_min + (p.y_max - p.y_min) * kn / (kn + x.max(0.0).powf(p.n))
}

/// Output range of the upstream gate must reach into [K/10, 10K] of the downstream one.
pub fn check_gate_compatibility(upstream: &HillParams, downstream: &HillParams) -> bool {
    upstream.y_min <= downstream.k * 10.0 && downstream.k / 10.0 <= upstream.y_max
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorLevels {
    pub off_rpu: f64,
    pub on_rpu: f64,
}

impl Default for SensorLevels {
    fn default() -> Self {
        SensorLevels { off_rpu: 0.01, on_rpu: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpuState {
    pub values: BTreeMap<String, f64>,
    pub iterations: usize,
}

/// Synchronous fixed-point iteration from zero. Gate inputs add; cooperative
/// gates take the minimum of their inputs.
pub fn propagate_signals(
    topo: &GateTopology,
    assignment: &BTreeMap<String, HillParams>,
    sensors: &BTreeMap<String, f64>,
) -> Result<RpuState, LogicError> {
    let n = topo.nodes.len();
    let idx: Vec<Vec<usize>> = topo
        .nodes
        .iter()
        .map(|v| v.inputs.iter().map(|i| topo.index_of(i).ok_or_else(|| LogicError::Topology(i.clone()))).collect())
        .collect::<Result<_, _>>()?;
    let mut params = Vec::with_capacity(n);
    let mut x = vec![0.0; n];
    for (v, node) in topo.nodes.iter().enumerate() {
        if node.is_sensor {
            x[v] = *sensors.get(&node.id).ok_or_else(|| LogicError::Unassigned(node.id.clone()))?;
            params.push(None);
        } else {
            params.push(Some(*assignment.get(&node.id).ok_or_else(|| LogicError::Unassigned(node.id.clone()))?));
        }
    }
    let max_iter = 10 * topo.depth() + 100;
    for it in 1..=max_iter {
        let mut next = x.clone();
        let mut delta: f64 = 0.0;
        for v in 0..n {
            if let Some(p) = &params[v] {
                let ins = idx[v].iter().map(|&u| x[u]);
                let input = if topo.nodes[v].cooperative { ins.fold(f64::INFINITY, f64::min) } else { ins.sum() };
                next[v] = hill(p, input);
                delta = delta.max((next[v] - x[v]).abs());
            }
        }
        x = next;
        if delta < CONVERGENCE_TOL {
            let values = topo.nodes.iter().map(|v| v.id.clone()).zip(x).collect();
            return Ok(RpuState { values, iterations: it });
        }
    }
    Err(LogicError::NotConverged(max_iter))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatedRow {
    pub inputs: Vec<bool>,
    pub output_rpu: f64,
    /// `None` marks a margin failure (between the OFF and ON thresholds).
    pub output: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatedTable {
    pub inputs: Vec<String>,
    pub rows: Vec<PropagatedRow>,
}

impl PropagatedTable {
    pub fn margin_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.output.is_none()).count()
    }

    /// Row-wise agreement with a symbolic table; margin failures never agree.
    pub fn agreement(&self, table: &TruthTable) -> Vec<bool> {
        self.rows
            .iter()
            .map(|r| match (r.output, table.lookup(&r.inputs)) {
                (Some(b), Some(want)) => want.first() == Some(&b),
                _ => false,
            })
            .collect()
    }
}

pub fn classify(rpu: f64) -> Option<bool> {
    if rpu > ON_THRESHOLD {
        Some(true)
    } else if rpu < OFF_THRESHOLD {
        Some(false)
    } else {
        None
    }
}

pub fn truth_table_from_propagation(
    topo: &GateTopology,
    assignment: &BTreeMap<String, HillParams>,
    levels: SensorLevels,
) -> Result<PropagatedTable, LogicError> {
    topo.validate()?;
    let sensors = topo.sensors();
    let out = topo.output().unwrap().to_string();
    let mut rows = Vec::new();
    for v in input_vectors(sensors.len()) {
        let s: BTreeMap<String, f64> = sensors
            .iter()
            .zip(&v)
            .map(|(id, b)| (id.to_string(), if *b { levels.on_rpu } else { levels.off_rpu }))
            .collect();
        let state = propagate_signals(topo, assignment, &s)?;
        let rpu = state.values[&out];
        rows.push(PropagatedRow { inputs: v, output_rpu: rpu, output: classify(rpu) });
    }
    Ok(PropagatedTable { inputs: sensors.iter().map(|s| s.to_string()).collect(), rows })
}

/// Hill parameters of the named repressors for each topology gate.
pub fn params_for(
    assignment: &BTreeMap<String, String>,
    lib: &PartsLibrary,
) -> Option<BTreeMap<String, HillParams>> {
    assignment.iter().map(|(node, rep)| Some((node.clone(), lib.by_name(rep)?.hill?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(y_min: f64, y_max: f64, k: f64, n: f64) -> HillParams {
        HillParams::new(y_min, y_max, k, n).unwrap()
    }

    fn not_topology() -> GateTopology {
        let mut g = TopoNode::gate("g", &["a"]);
        g.is_output = true;
        GateTopology { nodes: vec![TopoNode::sensor("a"), g] }
    }

    #[test]
    fn hill_reference_points() {
        let h = p(0.02, 2.5, 0.3, 2.0);
        assert!((hill(&h, 0.0) - 2.5).abs() < 1e-12);
        assert!((hill(&h, 0.3) - (0.02 + 2.48 / 2.0)).abs() < 1e-12);
        assert!(hill(&h, 30.0) - 0.02 < 0.01 * 2.48);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let y = hill(&h, i as f64 * 0.05);
            assert!(y < prev);
            prev = y;
        }
    }

    #[test]
    fn single_not_node() {
        let topo = not_topology();
        let a: BTreeMap<_, _> = [("g".to_string(), p(0.02, 2.5, 0.3, 2.0))].into();
        let off = propagate_signals(&topo, &a, &[("a".to_string(), 0.01)].into()).unwrap();
        assert!(off.values["g"] > 0.5);
        let on = propagate_signals(&topo, &a, &[("a".to_string(), 3.0)].into()).unwrap();
        assert!(on.values["g"] < 0.1);
        assert!(on.iterations <= topo.depth() + 1);
        let t = truth_table_from_propagation(&topo, &a, SensorLevels::default()).unwrap();
        assert_eq!(t.margin_failures(), 0);
        assert_eq!(t.rows.iter().map(|r| r.output).collect::<Vec<_>>(), vec![Some(true), Some(false)]);
    }

    #[test]
    fn sensors_only() {
        let mut s = TopoNode::sensor("a");
        s.is_output = true;
        let topo = GateTopology { nodes: vec![s] };
        let st = propagate_signals(&topo, &BTreeMap::new(), &[("a".to_string(), 3.0)].into()).unwrap();
        assert_eq!(st.iterations, 1);
        assert_eq!(st.values["a"], 3.0);
        let t = truth_table_from_propagation(&topo, &BTreeMap::new(), SensorLevels::default()).unwrap();
        assert_eq!(t.rows.iter().map(|r| r.output).collect::<Vec<_>>(), vec![Some(false), Some(true)]);
    }

    #[test]
    fn incompatible_gate_has_margin_failure() {
        // The downstream threshold sits far above the upstream output range.
        let mut g2 = TopoNode::gate("g2", &["g1"]);
        g2.is_output = true;
        let topo = GateTopology { nodes: vec![TopoNode::sensor("a"), TopoNode::gate("g1", &["a"]), g2] };
        let up = p(0.01, 0.05, 0.3, 2.0);
        let down = p(0.02, 0.3, 10.0, 2.0);
        assert!(!check_gate_compatibility(&up, &down));
        let a: BTreeMap<_, _> = [("g1".to_string(), up), ("g2".to_string(), down)].into();
        let t = truth_table_from_propagation(&topo, &a, SensorLevels::default()).unwrap();
        assert!(t.margin_failures() > 0);
    }

    #[test]
    fn compatibility_intervals() {
        assert!(check_gate_compatibility(&p(0.01, 3.0, 1.0, 2.0), &p(0.01, 1.0, 0.2, 2.0)));
        assert!(!check_gate_compatibility(&p(0.01, 0.05, 1.0, 2.0), &p(0.01, 1.0, 10.0, 2.0)));
        assert!(check_gate_compatibility(&p(0.01, 0.1, 1.0, 2.0), &p(0.01, 1.0, 1.0, 2.0)));
    }

    #[test]
    fn topology_validation() {
        let mut t = not_topology();
        t.validate().unwrap();
        t.nodes[1].inputs.push("g".into());
        assert!(t.validate().is_err());
        assert_eq!(not_topology().depth(), 1);
        assert_eq!(not_topology().truth_table().mask(0), 0b01);
    }
}

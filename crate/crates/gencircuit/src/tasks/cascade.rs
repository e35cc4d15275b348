//! Cascade faults for propagation debugging and the checks a corrected
//! cascade must pass.

use crate::logic::{
    circuit_truth_table, params_for, truth_table_from_propagation, GateTopology, SensorLevels,
};
use crate::model::{CircuitDocument, CircuitSpec, InteractionType, ParticipationRole, PartsLibrary};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CascadeFault {
    /// A gate's repressor replaced by one with an incompatible response.
    GateSwap,
    EdgeRemoval,
    PolarityInversion,
}

#[derive(Debug, Clone)]
pub struct FaultyCascade {
    pub fault: CascadeFault,
    pub document: CircuitDocument,
    /// Ids that count as a correct fault location.
    pub locations: Vec<String>,
    pub observation: String,
}

/// Topology gate owning a cassette or part id such as `g2_1_cds`.
pub fn gate_of(id: &str) -> Option<&str> {
    let region = id.strip_suffix("_cds").or_else(|| id.strip_suffix("_p")).unwrap_or(id);
    if region == "output" {
        return Some("output");
    }
    let (gate, copy) = region.rsplit_once('_')?;
    copy.parse::<usize>().ok().map(|_| gate)
}

/// Repressor of each topology gate as realized in `doc` (first copy's CDS).
pub fn assignment_from_document(doc: &CircuitDocument, topo: &GateTopology) -> Option<BTreeMap<String, String>> {
    topo.gates()
        .into_iter()
        .map(|g| {
            let cds = doc.get(&format!("{g}_1_cds"))?;
            Some((g.to_string(), cds.display_name().to_string()))
        })
        .collect()
}

/// Row-wise check of a cascade document: symbolic logic must reproduce the
/// reference table and the realized gates must propagate with clean margins.
pub fn cascade_rows(reference: &CircuitSpec, doc: &CircuitDocument, lib: &PartsLibrary) -> Option<Vec<RowCheck>> {
    let want = reference.ground_truth.truth_table.as_ref()?;
    let topo = reference.ground_truth.topology.as_ref()?;
    let symbolic = circuit_truth_table(doc, lib, &want.inputs, &want.outputs).ok()?;
    let params = assignment_from_document(doc, topo).and_then(|a| params_for(&a, lib));
    let numeric = params.and_then(|p| truth_table_from_propagation(topo, &p, SensorLevels::default()).ok());
    let rows = want
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| RowCheck {
            inputs: row.inputs.clone(),
            expected: row.outputs[0],
            symbolic: symbolic.rows[r].outputs[0],
            rpu: numeric.as_ref().map(|t| t.rows[r].output_rpu),
            numeric: numeric.as_ref().and_then(|t| t.rows[r].output),
        })
        .collect();
    Some(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub inputs: Vec<bool>,
    pub expected: bool,
    pub symbolic: bool,
    pub rpu: Option<f64>,
    pub numeric: Option<bool>,
}

impl RowCheck {
    pub fn passes(&self) -> bool {
        self.symbolic == self.expected && self.numeric == Some(self.expected)
    }

    fn observation(&self) -> String {
        let bits: String = self.inputs.iter().map(|b| if *b { '1' } else { '0' }).collect();
        let want = on_off(self.expected);
        if self.symbolic != self.expected {
            return format!("output is {} for input state {bits} when it should be {want}", on_off(self.symbolic));
        }
        match (self.numeric, self.rpu) {
            (Some(b), Some(rpu)) => format!("output is {} ({rpu:.3} RPU) for input state {bits} when it should be {want}", on_off(b)),
            (None, Some(rpu)) => format!("output is intermediate ({rpu:.3} RPU) for input state {bits} when it should be {want}"),
            _ => format!("output for input state {bits} cannot be resolved"),
        }
    }
}

fn on_off(b: bool) -> &'static str {
    if b {
        "ON"
    } else {
        "OFF"
    }
}

fn rename_parts(doc: &CircuitDocument, map: &BTreeMap<String, String>) -> CircuitDocument {
    let mut out = doc.clone();
    for c in out.components.values_mut() {
        if let Some(new) = c.name.as_ref().and_then(|n| map.get(n)) {
            c.name = Some(new.clone());
        }
    }
    out
}

fn gate_swaps(spec: &CircuitSpec, lib: &PartsLibrary) -> Vec<(CircuitDocument, Vec<String>)> {
    let gt = &spec.ground_truth;
    let (Some(topo), Some(asg)) = (&gt.topology, &gt.assignment) else { return Vec::new() };
    let cognate = |rep: &str| {
        let id = &lib.by_name(rep)?.id;
        Some(lib.cognate_promoter(id)?.name.clone())
    };
    let promoters = crate::logic::promoter_names(&spec.document);
    let library = crate::anneal::training_gate_library(lib);
    let mut out = Vec::new();
    for g in topo.gates() {
        let old = &asg[g];
        for new in library.keys().filter(|r| *r != old) {
            let (Some(old_p), Some(new_p)) = (cognate(old), cognate(new)) else { continue };
            let mut map = BTreeMap::from([(old.clone(), new.clone()), (old_p.clone(), new_p.clone())]);
            let mut locations = vec![g.to_string()];
            if let Some((h, _)) = asg.iter().find(|(_, r)| *r == new) {
                map.insert(new.clone(), old.clone());
                map.insert(new_p, old_p);
                locations.push(h.clone());
            } else if promoters.contains(&new_p) {
                continue;
            }
            out.push((rename_parts(&spec.document, &map), locations));
        }
    }
    out
}

fn edge_edits(spec: &CircuitSpec, invert: bool) -> Vec<(CircuitDocument, Vec<String>)> {
    let mut out = Vec::new();
    for (parent, i) in spec.document.interactions() {
        if i.itype != InteractionType::Inhibition {
            continue;
        }
        let mut locations = vec![i.id.clone()];
        for id in i.regulators().chain(i.regulated()) {
            if let Some(g) = gate_of(id) {
                if !locations.iter().any(|l| l == g) {
                    locations.push(g.to_string());
                }
            }
        }
        let mut doc = spec.document.clone();
        let owner = doc.components.get_mut(&parent.id).unwrap();
        let pos = owner.interactions.iter().position(|x| x.id == i.id).unwrap();
        if invert {
            let x = &mut owner.interactions[pos];
            x.itype = InteractionType::Stimulation;
            for p in &mut x.participations {
                p.role = match p.role {
                    ParticipationRole::Inhibitor => ParticipationRole::Stimulator,
                    ParticipationRole::Inhibited => ParticipationRole::Stimulated,
                    r => r,
                };
            }
        } else {
            owner.interactions.remove(pos);
        }
        out.push((doc, locations));
    }
    out
}

/// Applies one controlled fault whose effect shows in at least one row.
pub fn inject_cascade_fault(spec: &CircuitSpec, seed: u64, lib: &PartsLibrary) -> Option<FaultyCascade> {
    let mut rng = SplitMix64::new(seed);
    let mut kinds = [CascadeFault::GateSwap, CascadeFault::EdgeRemoval, CascadeFault::PolarityInversion];
    rng.shuffle(&mut kinds);
    for fault in kinds {
        let mut candidates = match fault {
            CascadeFault::GateSwap => gate_swaps(spec, lib),
            CascadeFault::EdgeRemoval => edge_edits(spec, false),
            CascadeFault::PolarityInversion => edge_edits(spec, true),
        };
        rng.shuffle(&mut candidates);
        for (document, locations) in candidates {
            let Some(rows) = cascade_rows(spec, &document, lib) else { continue };
            if let Some(bad) = rows.iter().find(|r| !r.passes()) {
                let observation = bad.observation();
                return Some(FaultyCascade { fault, document, locations, observation });
            }
        }
    }
    None
}

//! Perturbation operators that derive new circuits from a seed circuit.

use super::circuits::{derive_ground_truth, finish, Builder};
use super::GenError;
use crate::graph::{extract_regulatory_graph, isomorphic, IsoMode};
use crate::logic::{params_for, truth_table_from_propagation, SensorLevels};
use crate::model::{CircuitDocument, CircuitSpec, CircuitType, PartKind, PartsLibrary, PerturbationStep, Role, Tier};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbOp {
    IsoFunctional,
    ClassPreserving,
    TopologyAugment,
    TopologyAblate,
}

impl PerturbOp {
    pub const ALL: [PerturbOp; 4] =
        [PerturbOp::IsoFunctional, PerturbOp::ClassPreserving, PerturbOp::TopologyAugment, PerturbOp::TopologyAblate];

    pub fn token(self) -> &'static str {
        match self {
            PerturbOp::IsoFunctional => "iso_functional",
            PerturbOp::ClassPreserving => "class_preserving",
            PerturbOp::TopologyAugment => "topology_augment",
            PerturbOp::TopologyAblate => "topology_ablate",
        }
    }
}

impl fmt::Display for PerturbOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for PerturbOp {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        PerturbOp::ALL.into_iter().find(|o| o.token() == s).ok_or_else(|| format!("unknown operator `{s}`"))
    }
}

/// Applies `op` `chain_len` times (1 to 3). Ground truth is recomputed from
/// the perturbed document and the steps are appended to its history.
pub fn perturb(
    spec: &CircuitSpec,
    op: PerturbOp,
    chain_len: usize,
    seed: u64,
    lib: &PartsLibrary,
) -> Result<CircuitSpec, GenError> {
    check_chain(chain_len)?;
    let mut rng = SplitMix64::new(seed);
    let mut cur = spec.clone();
    for _ in 0..chain_len {
        cur = apply(&cur, op, &mut rng, lib)?;
    }
    Ok(cur)
}

/// Chain of operators drawn uniformly from those applicable at each step.
pub fn perturb_random(spec: &CircuitSpec, chain_len: usize, seed: u64, lib: &PartsLibrary) -> Result<CircuitSpec, GenError> {
    check_chain(chain_len)?;
    let mut rng = SplitMix64::new(seed);
    let mut cur = spec.clone();
    for _ in 0..chain_len {
        let mut ops = PerturbOp::ALL.to_vec();
        rng.shuffle(&mut ops);
        let mut next = None;
        for op in ops {
            let mut trial = rng.fork();
            if let Ok(s) = apply(&cur, op, &mut trial, lib) {
                next = Some(s);
                break;
            }
        }
        cur = next.ok_or_else(|| GenError::Inapplicable("no perturbation operator applies".into()))?;
    }
    Ok(cur)
}

fn check_chain(chain_len: usize) -> Result<(), GenError> {
    if !(1..=3).contains(&chain_len) {
        return Err(GenError::Invalid(format!("chain length {chain_len} outside 1..=3")));
    }
    Ok(())
}

fn names_in(doc: &CircuitDocument) -> Vec<String> {
    doc.components.values().filter_map(|c| c.name.clone()).collect()
}

fn training(lib: &PartsLibrary, f: impl Fn(&crate::model::Part) -> bool) -> Vec<String> {
    lib.all().filter(|p| p.tier == Tier::Training && !p.synthetic && f(p)).map(|p| p.name.clone()).collect()
}

fn rename_all(doc: &mut CircuitDocument, from: &str, to: &str) {
    for c in doc.components.values_mut() {
        if c.name.as_deref() == Some(from) {
            c.name = Some(to.to_string());
        }
    }
}

fn apply(spec: &CircuitSpec, op: PerturbOp, rng: &mut SplitMix64, lib: &PartsLibrary) -> Result<CircuitSpec, GenError> {
    let mut doc = spec.document.clone();
    let mut gt = spec.ground_truth.clone();
    let none = |why: &str| GenError::Inapplicable(format!("{op}: {why}"));
    let (target, annotation) = match op {
        PerturbOp::IsoFunctional => {
            let used = names_in(&doc);
            let mut present: Vec<String> = training(lib, |p| p.is_repressor()).into_iter().filter(|r| used.contains(r)).collect();
            let unused: Vec<String> = training(lib, |p| p.is_repressor()).into_iter().filter(|r| !used.contains(r)).collect();
            rng.shuffle(&mut present);
            let mut done = None;
            'outer: for old in &present {
                let old_p = cognate_name(lib, old);
                for new in &unused {
                    let new_p = cognate_name(lib, new);
                    if used.contains(&new_p) {
                        continue;
                    }
                    let mut trial = doc.clone();
                    rename_all(&mut trial, old, new);
                    rename_all(&mut trial, &old_p, &new_p);
                    if let Some(asg) = &mut gt.assignment {
                        let mut asg2 = asg.clone();
                        asg2.values_mut().filter(|v| *v == old).for_each(|v| *v = new.clone());
                        let clean = gt.topology.as_ref().zip(params_for(&asg2, lib)).is_some_and(|(topo, params)| {
                            truth_table_from_propagation(topo, &params, SensorLevels::default())
                                .is_ok_and(|t| t.margin_failures() == 0)
                        });
                        if !clean {
                            continue;
                        }
                        *asg = asg2;
                    }
                    doc = trial;
                    done = Some((old.clone(), format!("swapped repressor pair {old}/{old_p} for {new}/{new_p}")));
                    break 'outer;
                }
            }
            match done {
                Some(d) => d,
                None => {
                    let terms = training(lib, |p| p.kind == PartKind::Terminator);
                    let mut ids: Vec<String> =
                        doc.components.values().filter(|c| c.has_role(Role::Terminator)).map(|c| c.id.clone()).collect();
                    if ids.is_empty() {
                        return Err(none("no repressor pair or terminator to swap"));
                    }
                    rng.shuffle(&mut ids);
                    let id = ids[0].clone();
                    let old = doc.get(&id).unwrap().display_name().to_string();
                    let alts: Vec<&String> = terms.iter().filter(|t| **t != old).collect();
                    let new = (*rng.pick(&alts)).clone();
                    doc.components.get_mut(&id).unwrap().name = Some(new.clone());
                    (id, format!("swapped terminator {old} for {new}"))
                }
            }
        }
        PerturbOp::ClassPreserving => {
            let used = names_in(&doc);
            let constitutive = training(lib, |p| p.is_constitutive());
            let inducible = training(lib, |p| p.is_inducible());
            let mut ids: Vec<String> = doc
                .components
                .values()
                .filter(|c| c.has_role(Role::Promoter))
                .filter(|c| constitutive.iter().chain(&inducible).any(|n| n == c.display_name()))
                .map(|c| c.id.clone())
                .collect();
            if ids.is_empty() {
                return Err(none("no constitutive or inducible promoter"));
            }
            rng.shuffle(&mut ids);
            let id = ids[0].clone();
            let old = doc.get(&id).unwrap().display_name().to_string();
            let pool = if constitutive.contains(&old) { &inducible } else { &constitutive };
            let alts: Vec<&String> = pool.iter().filter(|n| !used.contains(n)).collect();
            if alts.is_empty() {
                return Err(none("no unused promoter of the other class"));
            }
            let new = (*rng.pick(&alts)).clone();
            // Every copy of the promoter changes so the input stays one signal.
            rename_all(&mut doc, &old, &new);
            if let Some(t) = &mut gt.truth_table {
                t.inputs.iter_mut().filter(|i| **i == old).for_each(|i| *i = new.clone());
            }
            if let Some(topo) = &mut gt.topology {
                for n in &mut topo.nodes {
                    if n.id == old {
                        n.id = new.clone();
                    }
                    n.inputs.iter_mut().filter(|i| **i == old).for_each(|i| *i = new.clone());
                }
            }
            (id, format!("promoter {old} replaced by {new}"))
        }
        PerturbOp::TopologyAugment => {
            if spec.circuit_type == CircuitType::Cascade {
                return Err(none("cascade topology is fixed by its gate assignment"));
            }
            let repressors: Vec<(String, String)> = doc
                .components
                .values()
                .filter(|c| c.has_role(Role::Cds) && lib.by_name(c.display_name()).is_some_and(|p| p.is_repressor()))
                .map(|c| (c.id.clone(), c.display_name().to_string()))
                .collect();
            if repressors.is_empty() {
                return Err(none("no repressor to read out"));
            }
            let (cds, name) = rng.pick(&repressors).clone();
            let used = names_in(&doc);
            let reporters = training(lib, |p| p.is_reporter());
            let fresh: Vec<&String> = reporters.iter().filter(|r| !used.contains(r)).collect();
            let reporter = if fresh.is_empty() { rng.pick(&reporters).clone() } else { (*rng.pick(&fresh)).clone() };
            let rbs = training(lib, |p| p.kind == PartKind::Rbs);
            let terms = training(lib, |p| p.kind == PartKind::Terminator);
            let id = (1..).map(|k| format!("readout_{k}")).find(|id| doc.get(id).is_none()).unwrap();
            let mut b = Builder::from_doc(doc);
            b.cassette(&id, &cognate_name(lib, &name), rng.pick(&rbs), &reporter, rng.pick(&terms));
            let iid = (1..).map(|k| format!("aug{k}")).find(|i| b.doc.interaction(i).is_none()).unwrap();
            let owner = if b.doc.get(super::TOP_REGION).is_some() { super::TOP_REGION.to_string() } else { id.clone() };
            let i = crate::model::Interaction::new(iid, crate::model::InteractionType::Inhibition)
                .with(crate::model::ParticipationRole::Inhibitor, cds.clone())
                .with(crate::model::ParticipationRole::Inhibited, format!("{id}_p"));
            b.doc.components.get_mut(&owner).unwrap().interactions.push(i);
            doc = b.doc;
            (id.clone(), format!("added {reporter} readout of {name}"))
        }
        PerturbOp::TopologyAblate => {
            if spec.circuit_type == CircuitType::Cascade {
                return Err(none("cascade topology is fixed by its gate assignment"));
            }
            let mut ids: Vec<String> =
                doc.interactions().filter(|(_, i)| i.itype.is_regulatory()).map(|(_, i)| i.id.clone()).collect();
            if ids.is_empty() {
                return Err(none("no regulatory interaction"));
            }
            rng.shuffle(&mut ids);
            let id = ids[0].clone();
            for c in doc.components.values_mut() {
                c.interactions.retain(|i| i.id != id);
            }
            let after = derive_ground_truth(spec.circuit_type, &doc, lib, &gt);
            let defect = describe_defect(spec, &after);
            (id.clone(), format!("removed interaction {id}: {defect}"))
        }
    };
    let after = derive_ground_truth(spec.circuit_type, &doc, lib, &gt);
    gt = after;
    gt.perturbations.push(PerturbationStep { operator: op.token().to_string(), target, annotation });
    let description = format!("{} Perturbed by {}.", spec.description.trim_end_matches('.'), op.token());
    let out = finish(spec.circuit_type, doc, gt, description)?;
    if op == PerturbOp::IsoFunctional {
        let (a, b) = (extract_regulatory_graph(&spec.document), extract_regulatory_graph(&out.document));
        if !matches!((a, b), (Ok(a), Ok(b)) if isomorphic(&a, &b, IsoMode::RoleLabeled)) {
            return Err(GenError::Invalid("iso_functional changed the regulatory topology".into()));
        }
    }
    Ok(out)
}

fn cognate_name(lib: &PartsLibrary, repressor: &str) -> String {
    lib.by_name(repressor)
        .and_then(|p| lib.cognate_promoter(&p.id))
        .map(|p| p.name.clone())
        .unwrap_or_default()
}

fn describe_defect(before: &CircuitSpec, after: &crate::model::GroundTruth) -> String {
    let gt = &before.ground_truth;
    if gt.bistable == Some(true) && after.bistable != Some(true) {
        return "bistability lost".into();
    }
    if gt.cycle_length.is_some() && after.cycle_length.is_none() {
        return "feedback ring broken, no oscillation".into();
    }
    match (&gt.truth_table, &after.truth_table) {
        (Some(a), Some(b)) if a.rows != b.rows => format!("truth table changed from {} to {}", a.tuples(), b.tuples()),
        (Some(_), None) => "logic no longer evaluable".into(),
        _ => "regulation removed without logic change".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_circuit, GenParams, PromoterClass};

    #[test]
    fn toggle_iso_functional_and_ablate() {
        let lib = PartsLibrary::builtin();
        let spec = generate_circuit(&GenParams::new(CircuitType::Toggle, 3), &lib).unwrap();
        let iso = perturb(&spec, PerturbOp::IsoFunctional, 1, 1, &lib).unwrap();
        let (a, b) = (extract_regulatory_graph(&spec.document).unwrap(), extract_regulatory_graph(&iso.document).unwrap());
        assert!(isomorphic(&a, &b, IsoMode::RoleLabeled));
        assert!(!isomorphic(&a, &b, IsoMode::PartAware));
        assert_eq!(iso.ground_truth.bistable, Some(true));
        let ablated = perturb(&spec, PerturbOp::TopologyAblate, 1, 1, &lib).unwrap();
        assert_eq!(ablated.ground_truth.bistable, Some(false));
        assert_eq!(ablated.ground_truth.perturbations.len(), 1);
    }

    #[test]
    fn cassette_class_flip() {
        let lib = PartsLibrary::builtin();
        let mut params = GenParams::new(CircuitType::Cassette, 8);
        params.promoter_class = Some(PromoterClass::Constitutive);
        let spec = generate_circuit(&params, &lib).unwrap();
        assert_eq!(spec.ground_truth.inducible, Some(false));
        let out = perturb(&spec, PerturbOp::ClassPreserving, 1, 4, &lib).unwrap();
        assert_eq!(out.ground_truth.inducible, Some(true));
    }

    #[test]
    fn iso_functional_keeps_truth_table() {
        let lib = PartsLibrary::builtin();
        for seed in 0..10 {
            let spec = generate_circuit(&GenParams::new(CircuitType::TwoInputGate, seed), &lib).unwrap();
            let out = perturb(&spec, PerturbOp::IsoFunctional, 1, seed, &lib).unwrap();
            assert_eq!(out.ground_truth.truth_table, spec.ground_truth.truth_table);
        }
    }
}

//! Specification elements for natural-language tasks, and the phrasing bank
//! that turns them into text.

use crate::model::{CircuitDocument, CircuitType, InteractionType, Role, SpecRecord};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "snake_case")]
pub enum SpecElement {
    /// A part with this role and library name must appear.
    Part { role: Role, name: String },
    /// An interaction of this type where all `regulators` act on `target`.
    Interaction { itype: InteractionType, regulators: Vec<String>, target: String },
    /// Some cassette lists exactly these parts in this order.
    Order { names: Vec<String> },
}

const PART_ROLES: [Role; 5] = [Role::Promoter, Role::Rbs, Role::Cds, Role::Terminator, Role::Operator];

fn part_role(doc: &CircuitDocument, id: &str) -> Option<Role> {
    let c = doc.get(id)?;
    PART_ROLES.into_iter().find(|r| c.has_role(*r))
}

fn name_of(doc: &CircuitDocument, id: &str) -> String {
    doc.get(id).map_or(id, |c| c.display_name()).to_string()
}

/// Parts, interactions and orderings of a reference document.
pub fn extract_elements(doc: &CircuitDocument) -> Vec<SpecElement> {
    let mut parts = Vec::new();
    let mut orders = Vec::new();
    for region in doc.leaf_regions() {
        let mut names = Vec::new();
        for f in &region.features {
            if let Some(role) = part_role(doc, &f.child) {
                parts.push(SpecElement::Part { role, name: name_of(doc, &f.child) });
            }
            names.push(name_of(doc, &f.child));
        }
        orders.push(SpecElement::Order { names });
    }
    let mut interactions = Vec::new();
    for (_, i) in doc.interactions() {
        let mut regulators: Vec<String> = i.regulators().map(|r| name_of(doc, r)).collect();
        regulators.sort();
        regulators.dedup();
        for target in i.regulated() {
            interactions.push(SpecElement::Interaction { itype: i.itype, regulators: regulators.clone(), target: name_of(doc, target) });
        }
    }
    parts.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    parts.into_iter().chain(interactions).chain(orders).collect()
}

/// Per-element satisfaction. Repeated part elements need as many copies.
pub fn satisfied(elements: &[SpecElement], doc: &CircuitDocument) -> Vec<bool> {
    let mut have: BTreeMap<(Role, String), usize> = BTreeMap::new();
    for c in doc.components.values() {
        if let Some(role) = PART_ROLES.into_iter().find(|r| c.has_role(*r)) {
            *have.entry((role, c.display_name().to_string())).or_default() += 1;
        }
    }
    let orders: Vec<Vec<String>> = doc
        .leaf_regions()
        .iter()
        .map(|r| r.features.iter().map(|f| name_of(doc, &f.child)).collect())
        .collect();
    let mut used: BTreeMap<(Role, String), usize> = BTreeMap::new();
    elements
        .iter()
        .map(|e| match e {
            SpecElement::Part { role, name } => {
                let key = (*role, name.clone());
                let n = used.entry(key.clone()).or_default();
                *n += 1;
                have.get(&key).copied().unwrap_or(0) >= *n
            }
            SpecElement::Interaction { itype, regulators, target } => doc.interactions().any(|(_, i)| {
                i.itype == *itype
                    && i.regulated().any(|t| name_of(doc, t) == *target)
                    && regulators.iter().all(|r| i.regulators().any(|x| name_of(doc, x) == *r))
            }),
            SpecElement::Order { names } => orders.iter().any(|o| o == names),
        })
        .collect()
}

fn role_word(role: Role) -> &'static str {
    match role {
        Role::Promoter => "promoter",
        Role::Rbs => "ribosome binding site",
        Role::Cds => "coding sequence",
        Role::Terminator => "terminator",
        Role::Operator => "operator",
        Role::EngineeredRegion => "region",
    }
}

fn verb(itype: InteractionType) -> &'static str {
    match itype {
        InteractionType::Inhibition => "repress",
        InteractionType::Stimulation => "activate",
        InteractionType::GeneticProduction => "produce",
    }
}

fn render(e: &SpecElement, template: usize) -> String {
    match e {
        SpecElement::Part { role, name } => match template {
            0 => format!("Include the {} {name}.", role_word(*role)),
            1 => format!("The design uses {name} as a {}.", role_word(*role)),
            _ => format!("One {} should be {name}.", role_word(*role)),
        },
        SpecElement::Interaction { itype, regulators, target } => {
            let who = regulators.join(" together with ");
            let (v, s) = (verb(*itype), if regulators.len() == 1 { "s" } else { "" });
            match template {
                0 => format!("{who} must {v} the promoter {target}."),
                1 => format!("The promoter {target} is under {} by {who}.", noun(*itype)),
                _ => format!("{who} {v}{s} {target}."),
            }
        }
        SpecElement::Order { names } => match template {
            0 => format!("Assemble one cassette as {} in that order.", names.join(", ")),
            1 => format!("One transcription unit reads {}.", names.join(" then ")),
            _ => format!("Place {} consecutively in a single cassette.", names.join(", ")),
        },
    }
}

fn noun(itype: InteractionType) -> &'static str {
    match itype {
        InteractionType::Inhibition => "repression",
        InteractionType::Stimulation => "activation",
        InteractionType::GeneticProduction => "production",
    }
}

pub fn type_phrase(t: CircuitType) -> &'static str {
    match t {
        CircuitType::Cassette => "an expression cassette",
        CircuitType::NotGate => "a NOT gate",
        CircuitType::TwoInputGate => "a two-input logic gate",
        CircuitType::Toggle => "a toggle switch",
        CircuitType::Branched => "a branched circuit with one master regulator",
        CircuitType::Ffl => "a feed-forward loop",
        CircuitType::Oscillator => "a ring oscillator",
        CircuitType::Cascade => "a cascaded NOR circuit",
    }
}

/// Natural-language prompt covering every element, phrasing drawn from the seed.
pub fn describe_elements(t: CircuitType, elements: &[SpecElement], rng: &mut SplitMix64) -> String {
    let opening = match rng.below(3) {
        0 => format!("Build {}.", type_phrase(t)),
        1 => format!("Write a construction script for {}.", type_phrase(t)),
        _ => format!("The target is {}.", type_phrase(t)),
    };
    let mut out = vec![opening];
    out.extend(elements.iter().map(|e| render(e, rng.below(3))));
    out.join(" ")
}

/// Behavioural requirements only, no part names.
pub fn functional_spec(rec: &SpecRecord) -> String {
    let gt = &rec.ground_truth;
    let mut s = vec![format!("Design {} with {} cassettes.", type_phrase(rec.circuit_type), rec.expected.leaves)];
    if let Some(t) = &gt.truth_table {
        s.push(format!(
            "Inputs {} and outputs {} must follow the truth table {}.",
            t.inputs.join(", "),
            t.outputs.join(", "),
            t.tuples()
        ));
    }
    if let Some(level) = gt.expression_level {
        s.push(format!("The reporter should express at level {level:.3}."));
    }
    if let Some(inducer) = &gt.inducer {
        s.push(format!("Expression should respond to {inducer}."));
    } else if gt.inducible == Some(false) {
        s.push("Expression should be constitutive.".into());
    }
    if gt.bistable == Some(true) {
        s.push("The circuit must have two stable states.".into());
    }
    if let Some(k) = gt.cycle_length {
        s.push(format!("It needs a repression ring of length {k}."));
    }
    if let Some(f) = gt.ffl_type {
        s.push(format!("The loop must be of type {f:?}."));
    }
    s.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_circuit, GenParams};
    use crate::model::PartsLibrary;

    #[test]
    fn reference_satisfies_everything() {
        let lib = PartsLibrary::builtin();
        for t in CircuitType::ALL {
            let spec = generate_circuit(&{
                let mut p = GenParams::new(t, 3);
                if t == CircuitType::Cascade {
                    p.function = Some(crate::model::TruthTable::from_mask(vec!["a".into(), "b".into()], "y", 0b1000));
                }
                p
            }, &lib)
            .unwrap();
            let el = extract_elements(&spec.document);
            assert!(satisfied(&el, &spec.document).iter().all(|b| *b), "{t}");
        }
    }

    #[test]
    fn missing_part_detected() {
        let lib = PartsLibrary::builtin();
        let spec = generate_circuit(&GenParams::new(CircuitType::Cassette, 1), &lib).unwrap();
        let el = extract_elements(&spec.document);
        let mut doc = spec.document.clone();
        doc.components.get_mut("cassette_rbs").unwrap().name = Some("NOPE".into());
        let ok = satisfied(&el, &doc);
        assert!(ok.iter().any(|b| !b));
        let mut rng = SplitMix64::new(0);
        let text = describe_elements(CircuitType::Cassette, &el, &mut rng);
        assert!(text.contains(spec.document.get("cassette_rbs").unwrap().display_name()));
    }
}

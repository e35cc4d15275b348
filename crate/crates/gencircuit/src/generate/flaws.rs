//! Flaw injection. Level 1 edits the script text, Level 2 breaks a document
//! invariant, Levels 3 and 4 keep the document valid but change its behaviour.

use super::circuits::Builder;
use super::GenError;
use crate::graph::extract_regulatory_graph;
use crate::model::{
    CircuitDocument, CircuitSpec, Component, FlawRecord, FlawType, InteractionType, Orientation,
    ParticipationRole, PartsLibrary, Role, Tier,
};
use crate::rng::SplitMix64;
use crate::script::{emit_script, run_script};
use crate::verifier::{functional_score, verify_validity};

/// Flaws that can be injected into `spec`. Independent of the seed.
pub fn applicable_flaws(spec: &CircuitSpec, lib: &PartsLibrary) -> Vec<FlawType> {
    FlawType::ALL.into_iter().filter(|f| inject_flaw(spec, *f, 0, lib).is_ok()).collect()
}

/// Returns a copy of `spec` carrying one flaw. The flawed spec keeps the
/// reference ground truth and expected counts and records the flaw.
pub fn inject_flaw(spec: &CircuitSpec, flaw: FlawType, seed: u64, lib: &PartsLibrary) -> Result<CircuitSpec, GenError> {
    let mut rng = SplitMix64::new(seed);
    let (script, document, location) = match flaw.level() {
        1 => {
            let (script, location) = script_flaw(spec, flaw, &mut rng)?;
            let document = run_script(&script).unwrap_or_else(|_| spec.document.clone());
            (script, document, location)
        }
        2 => {
            let (doc, location) = structural_flaw(&spec.document, flaw, &mut rng)?;
            (emit_script(&doc), doc, location)
        }
        _ => {
            let (doc, location) = functional_flaw(spec, flaw, &mut rng, lib)?;
            (emit_script(&doc), doc, location)
        }
    };
    let mut out = spec.clone();
    out.script = script;
    out.document = document;
    out.ground_truth.flaw = Some(FlawRecord {
        flaw_type: flaw,
        level: flaw.level(),
        location,
        symptom: flaw.symptom().to_string(),
    });
    Ok(out)
}

fn inapplicable(flaw: FlawType, why: &str) -> GenError {
    GenError::Inapplicable(format!("{flaw}: {why}"))
}

fn leaf_ids(doc: &CircuitDocument) -> Vec<String> {
    doc.leaf_regions().iter().map(|c| c.id.clone()).collect()
}

fn part_with_role(doc: &CircuitDocument, region: &str, role: Role) -> Option<String> {
    doc.get(region)?.features.iter().find(|f| doc.get(&f.child).is_some_and(|c| c.has_role(role))).map(|f| f.child.clone())
}

fn fresh_id(doc: &CircuitDocument, stem: &str) -> String {
    (1..).map(|k| format!("{stem}_{k}")).find(|id| doc.get(id).is_none()).unwrap()
}

fn script_flaw(spec: &CircuitSpec, flaw: FlawType, rng: &mut SplitMix64) -> Result<(String, String), GenError> {
    let doc = &spec.document;
    let lines: Vec<&str> = spec.script.lines().collect();
    let join = |ls: Vec<String>| ls.join("\n") + "\n";
    match flaw {
        FlawType::MissingTerminator => {
            let mut leaves = leaf_ids(doc);
            rng.shuffle(&mut leaves);
            for r in leaves {
                if let Some(t) = part_with_role(doc, &r, Role::Terminator) {
                    let target = format!("sub {r} {t}");
                    if lines.contains(&target.as_str()) {
                        let kept = lines.iter().filter(|l| **l != target).map(|l| l.to_string()).collect();
                        return Ok((join(kept), t));
                    }
                }
            }
            Err(inapplicable(flaw, "no terminator"))
        }
        FlawType::DuplicateComponent => {
            let decls: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].starts_with("component ")).collect();
            if decls.is_empty() {
                return Err(inapplicable(flaw, "no component declarations"));
            }
            let at = *rng.pick(&decls);
            let id = lines[at].split_whitespace().nth(1).unwrap_or_default().to_string();
            let mut out: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
            out.insert(at + 1, lines[at].to_string());
            Ok((join(out), id))
        }
        FlawType::EmptyFeature => {
            let leaves = leaf_ids(doc);
            if leaves.is_empty() {
                return Err(inapplicable(flaw, "no cassette"));
            }
            let region = rng.pick(&leaves).clone();
            let id = fresh_id(doc, "empty");
            let mut out: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
            out.push(format!("component {id} dna"));
            out.push(format!("sub {region} {id}"));
            Ok((join(out), id))
        }
        _ => unreachable!("not a script-level flaw"),
    }
}

fn structural_flaw(doc: &CircuitDocument, flaw: FlawType, rng: &mut SplitMix64) -> Result<(CircuitDocument, String), GenError> {
    let mut doc = doc.clone();
    let mut leaves: Vec<String> =
        doc.leaf_regions().iter().filter(|c| c.features.len() >= 2).map(|c| c.id.clone()).collect();
    if leaves.is_empty() {
        return Err(inapplicable(flaw, "no multi-part cassette"));
    }
    rng.shuffle(&mut leaves);
    let region = leaves[0].clone();
    match flaw {
        FlawType::WrongPartOrder => {
            let c = doc.components.get_mut(&region).unwrap();
            let i = rng.below(c.features.len() - 1);
            let swap = |x: usize| if x == i { i + 1 } else if x == i + 1 { i } else { x };
            for k in &mut c.constraints {
                k.subject = swap(k.subject);
                k.object = swap(k.object);
            }
            Ok((doc, region))
        }
        FlawType::MissingConstraint => {
            let c = doc.components.get_mut(&region).unwrap();
            if c.constraints.is_empty() {
                return Err(inapplicable(flaw, "no constraints"));
            }
            let k = rng.below(c.constraints.len());
            c.constraints.remove(k);
            Ok((doc, region))
        }
        FlawType::OrphanComponent => {
            let parts: Vec<Component> = doc.components[&region]
                .features
                .iter()
                .filter_map(|f| doc.get(&f.child).cloned())
                .collect();
            let mut copy = rng.pick(&parts).clone();
            copy.id = fresh_id(&doc, "orphan");
            let id = copy.id.clone();
            doc.add(copy).map_err(|e| GenError::Invalid(e.to_string()))?;
            Ok((doc, id))
        }
        FlawType::WrongOrientation => {
            let c = doc.components.get_mut(&region).unwrap();
            let k = rng.below(c.features.len());
            c.features[k].orientation = match c.features[k].orientation {
                Orientation::Forward => Orientation::Reverse,
                Orientation::Reverse => Orientation::Forward,
            };
            let child = c.features[k].child.clone();
            Ok((doc, child))
        }
        _ => unreachable!("not a validity flaw"),
    }
}

type Candidate = Box<dyn Fn(&CircuitDocument) -> Option<CircuitDocument>>;

/// Tries candidates in seeded order and keeps the first observable one.
fn functional_flaw(
    spec: &CircuitSpec,
    flaw: FlawType,
    rng: &mut SplitMix64,
    lib: &PartsLibrary,
) -> Result<(CircuitDocument, String), GenError> {
    let doc = &spec.document;
    let mut cands = candidates(spec, flaw, rng, lib);
    rng.shuffle(&mut cands);
    for (location, edit) in cands {
        let Some(flawed) = edit(doc) else { continue };
        if run_script(&emit_script(&flawed)).is_err() || !verify_validity(&flawed).passed {
            continue;
        }
        if functional_score(spec, &flawed, lib) < 1.0 {
            return Ok((flawed, location));
        }
    }
    Err(inapplicable(flaw, &format!("no observable target in a {}", spec.circuit_type)))
}

fn rename(id: String, name: String) -> Candidate {
    Box::new(move |d: &CircuitDocument| {
        let mut d = d.clone();
        d.components.get_mut(&id)?.name = Some(name.clone());
        Some(d)
    })
}

fn regulator_cds(doc: &CircuitDocument) -> Vec<String> {
    let mut out: Vec<String> = doc
        .interactions()
        .flat_map(|(_, i)| i.regulators().map(str::to_string).collect::<Vec<_>>())
        .filter(|r| doc.get(r).is_some_and(|c| c.has_role(Role::Cds)))
        .collect();
    out.sort();
    out.dedup();
    out
}

fn training_names(lib: &PartsLibrary, f: impl Fn(&crate::model::Part) -> bool) -> Vec<String> {
    lib.all().filter(|p| p.tier == Tier::Training && !p.synthetic && f(p)).map(|p| p.name.clone()).collect()
}

fn candidates(spec: &CircuitSpec, flaw: FlawType, rng: &mut SplitMix64, lib: &PartsLibrary) -> Vec<(String, Candidate)> {
    let doc = &spec.document;
    let mut out: Vec<(String, Candidate)> = Vec::new();
    match flaw {
        FlawType::MismatchedPair => {
            let repressors = training_names(lib, |p| p.is_repressor());
            for cds in regulator_cds(doc) {
                let current = doc.get(&cds).unwrap().display_name().to_string();
                let targets: Vec<String> = doc
                    .interactions()
                    .filter(|(_, i)| i.regulators().any(|r| r == cds))
                    .flat_map(|(_, i)| i.regulated().map(|t| doc.get(t).map(|c| c.display_name().to_string())).collect::<Vec<_>>())
                    .flatten()
                    .collect();
                for r in &repressors {
                    if *r != current && !targets.iter().any(|t| lib.regulates(r, t)) {
                        out.push((cds.clone(), rename(cds.clone(), r.clone())));
                    }
                }
            }
        }
        FlawType::WrongInducer => {
            let inducible = training_names(lib, |p| p.is_inducible());
            for c in doc.components.values().filter(|c| c.has_role(Role::Promoter)) {
                if inducible.iter().any(|n| n == c.display_name()) {
                    for other in inducible.iter().filter(|n| *n != c.display_name()) {
                        out.push((c.id.clone(), rename(c.id.clone(), other.clone())));
                    }
                }
            }
        }
        FlawType::InvertedLogic => {
            for (_, i) in doc.interactions().filter(|(_, i)| i.itype.is_regulatory()) {
                let id = i.id.clone();
                out.push((
                    id.clone(),
                    Box::new(move |d: &CircuitDocument| {
                        let mut d = d.clone();
                        let i = d.components.values_mut().flat_map(|c| c.interactions.iter_mut()).find(|i| i.id == id)?;
                        let flip = |r: ParticipationRole| match r {
                            ParticipationRole::Inhibitor => ParticipationRole::Stimulator,
                            ParticipationRole::Inhibited => ParticipationRole::Stimulated,
                            ParticipationRole::Stimulator => ParticipationRole::Inhibitor,
                            ParticipationRole::Stimulated => ParticipationRole::Inhibited,
                            other => other,
                        };
                        i.itype = match i.itype {
                            InteractionType::Inhibition => InteractionType::Stimulation,
                            _ => InteractionType::Inhibition,
                        };
                        i.cooperative_group = None;
                        for p in &mut i.participations {
                            p.role = flip(p.role);
                        }
                        Some(d)
                    }),
                ));
            }
        }
        FlawType::MissingInteraction | FlawType::IncompleteFeedback => {
            if flaw == FlawType::IncompleteFeedback && spec.kappa.b != 1 {
                return out;
            }
            for (_, i) in doc.interactions().filter(|(_, i)| i.itype.is_regulatory()) {
                let id = i.id.clone();
                let feedback = flaw == FlawType::IncompleteFeedback;
                out.push((
                    id.clone(),
                    Box::new(move |d: &CircuitDocument| {
                        let before = extract_regulatory_graph(d).ok()?;
                        let mut d = d.clone();
                        for c in d.components.values_mut() {
                            c.interactions.retain(|i| i.id != id);
                        }
                        // A feedback edge removal must reduce the cyclic structure.
                        if feedback {
                            let after = extract_regulatory_graph(&d).ok()?;
                            if after.has_cycle() && crate::graph::complexity(&after).d >= crate::graph::complexity(&before).d {
                                return None;
                            }
                        }
                        Some(d)
                    }),
                ));
            }
        }
        FlawType::PromoterLeak => {
            let promoters = training_names(lib, |p| p.is_constitutive());
            let rbs = training_names(lib, |p| p.kind == crate::model::PartKind::Rbs);
            let terms = training_names(lib, |p| p.kind == crate::model::PartKind::Terminator);
            let (r, t) = (rng.pick(&rbs).clone(), rng.pick(&terms).clone());
            if spec.circuit_type.is_feedback() {
                for (_, i) in doc.interactions().filter(|(_, i)| i.itype == InteractionType::Inhibition) {
                    for reg in i.regulators() {
                        let Some(name) = doc.get(reg).map(|c| c.display_name().to_string()) else { continue };
                        for p in &promoters {
                            let (iid, name, p, r, t) = (i.id.clone(), name.clone(), p.clone(), r.clone(), t.clone());
                            out.push((
                                "leak".into(),
                                Box::new(move |d: &CircuitDocument| {
                                    let mut b = Builder::from_doc(d.clone());
                                    b.cassette("leak", &p, &r, &name, &t);
                                    let mut d = b.doc;
                                    let i = d
                                        .components
                                        .values_mut()
                                        .flat_map(|c| c.interactions.iter_mut())
                                        .find(|i| i.id == iid)?;
                                    i.participations.insert(
                                        0,
                                        crate::model::Participation {
                                            role: ParticipationRole::Inhibitor,
                                            target: "leak_cds".into(),
                                        },
                                    );
                                    Some(d)
                                }),
                            ));
                        }
                    }
                }
            } else {
                let mut outputs = crate::logic::reporter_names(doc, lib);
                outputs.dedup();
                for name in outputs {
                    for p in &promoters {
                        let (name, p, r, t) = (name.clone(), p.clone(), r.clone(), t.clone());
                        out.push((
                            "leak".into(),
                            Box::new(move |d: &CircuitDocument| {
                                if d.get("leak").is_some() {
                                    return None;
                                }
                                let mut b = Builder::from_doc(d.clone());
                                b.cassette("leak", &p, &r, &name, &t);
                                Some(b.doc)
                            }),
                        ));
                    }
                }
            }
        }
        FlawType::ExtraRegulation => {
            let cds: Vec<String> = doc
                .components
                .values()
                .filter(|c| c.has_role(Role::Cds) && lib.by_name(c.display_name()).is_some_and(|p| p.is_repressor()))
                .map(|c| c.id.clone())
                .collect();
            let promoters: Vec<String> =
                doc.components.values().filter(|c| c.has_role(Role::Promoter)).map(|c| c.id.clone()).collect();
            for r in &cds {
                for p in &promoters {
                    let already = doc
                        .interactions()
                        .any(|(_, i)| i.regulators().any(|x| x == r) && i.regulated().any(|x| x == p));
                    if already {
                        continue;
                    }
                    let (r, p) = (r.clone(), p.clone());
                    out.push((
                        "extra_inh".into(),
                        Box::new(move |d: &CircuitDocument| {
                            if d.interaction("extra_inh").is_some() {
                                return None;
                            }
                            let owner = if d.get(super::TOP_REGION).is_some() {
                                super::TOP_REGION.to_string()
                            } else {
                                d.parents_of(&p).next()?.id.clone()
                            };
                            let mut d = d.clone();
                            let i = crate::model::Interaction::new("extra_inh", InteractionType::Inhibition)
                                .with(ParticipationRole::Inhibitor, r.clone())
                                .with(ParticipationRole::Inhibited, p.clone());
                            d.components.get_mut(&owner)?.interactions.push(i);
                            Some(d)
                        }),
                    ));
                }
            }
        }
        _ => unreachable!("not a functional flaw"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_circuit, GenParams};
    use crate::logic::eval_truth_table;
    use crate::model::CircuitType;
    use crate::script::ExecErrorKind;

    fn lib() -> PartsLibrary {
        PartsLibrary::builtin()
    }

    #[test]
    fn toggle_incomplete_feedback() {
        let lib = lib();
        let spec = generate_circuit(&GenParams::new(CircuitType::Toggle, 7), &lib).unwrap();
        let flawed = inject_flaw(&spec, FlawType::IncompleteFeedback, 3, &lib).unwrap();
        let rec = flawed.ground_truth.flaw.as_ref().unwrap();
        assert_eq!(rec.symptom, "No oscillation / no bistability");
        assert_eq!(flawed.document.interactions().count(), 1);
        assert!(flawed.document.interaction(&rec.location).is_none());
    }

    #[test]
    fn cassette_missing_terminator() {
        let lib = lib();
        let spec = generate_circuit(&GenParams::new(CircuitType::Cassette, 1), &lib).unwrap();
        let flawed = inject_flaw(&spec, FlawType::MissingTerminator, 1, &lib).unwrap();
        let rec = flawed.ground_truth.flaw.unwrap();
        assert_eq!(rec.symptom, "Transcriptional read-through");
        assert_eq!(rec.location, "cassette_t");
        assert_eq!(run_script(&flawed.script).unwrap_err().kind, ExecErrorKind::Dangling);
    }

    #[test]
    fn not_inverted_logic_flips_output() {
        let lib = lib();
        let spec = generate_circuit(&GenParams::new(CircuitType::NotGate, 11), &lib).unwrap();
        let flawed = inject_flaw(&spec, FlawType::InvertedLogic, 0, &lib).unwrap();
        let (_, i) = flawed.document.interactions().next().unwrap();
        assert_eq!(i.itype, InteractionType::Stimulation);
        let table = spec.ground_truth.truth_table.as_ref().unwrap();
        for row in &table.rows {
            let inputs = table.inputs.iter().cloned().zip(row.inputs.iter().copied()).collect();
            let got = eval_truth_table(&flawed.document, &lib, &inputs).unwrap();
            assert_ne!(got[&table.outputs[0]], row.outputs[0]);
        }
    }

    #[test]
    fn level_two_breaks_validity_only() {
        let lib = lib();
        let spec = generate_circuit(&GenParams::new(CircuitType::NotGate, 5), &lib).unwrap();
        for f in [FlawType::WrongPartOrder, FlawType::MissingConstraint, FlawType::OrphanComponent, FlawType::WrongOrientation] {
            let flawed = inject_flaw(&spec, f, 9, &lib).unwrap();
            let doc = run_script(&flawed.script).unwrap();
            assert!(!verify_validity(&doc).passed, "{f}");
        }
    }
}

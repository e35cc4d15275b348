//! Task construction from a reference circuit.

use super::cascade::inject_cascade_fault;
use super::elements::{describe_elements, extract_elements, functional_spec};
use super::{inapplicable, Answer, MaskLevel, Payload, Substitution, TaskError, TaskInstance, TaskKind};
use crate::anneal::training_gate_library;
use crate::generate::inject_flaw;
use crate::model::{CircuitDocument, CircuitSpec, FlawType, Part, PartKind, PartsLibrary, Role, Tier};
use crate::rng::SplitMix64;
use crate::script::emit_script;
use crate::verifier::evaluate_script;
use std::collections::BTreeSet;

pub const MASK_TOKEN: &str = "<MASK>";
const MASKED_ID: &str = "masked";

fn instance(spec: &CircuitSpec, task: TaskKind, seed: u64, payload: Payload, answer: Answer) -> TaskInstance {
    TaskInstance {
        task,
        circuit_type: spec.circuit_type,
        seed,
        tau: task.tau(),
        payload,
        reference_script: spec.script.clone(),
        reference: spec.record(),
        answer,
    }
}

/// Builds an instance of `task` from `spec`. Options the task leaves open
/// (flaw, elided block, substitution, masked part) are drawn from `seed`.
pub fn make_task(spec: &CircuitSpec, task: TaskKind, seed: u64, lib: &PartsLibrary) -> Result<TaskInstance, TaskError> {
    if !task.applies_to(spec.circuit_type) {
        return Err(inapplicable(task, spec, "excluded by the task applicability matrix"));
    }
    let mut rng = SplitMix64::new(seed);
    match task {
        TaskKind::T1 | TaskKind::T6 => {
            let levels = if task == TaskKind::T1 { 1..=2 } else { 3..=4 };
            let mut flaws: Vec<FlawType> = FlawType::ALL.into_iter().filter(|f| levels.contains(&f.level())).collect();
            rng.shuffle(&mut flaws);
            for f in flaws {
                if let Ok(t) = make_flaw_task(spec, task, f, seed, lib) {
                    return Ok(t);
                }
            }
            Err(inapplicable(task, spec, "no flaw of the required level applies"))
        }
        TaskKind::T2 => {
            let blocks = blocks(spec);
            let (label, lo, hi) = rng.pick(&blocks).clone();
            let lines: Vec<&str> = spec.script.lines().collect();
            let mut partial: Vec<String> = lines[..lo].iter().map(|s| s.to_string()).collect();
            partial.push(format!("# [MISSING: {label}]"));
            partial.extend(lines[hi..].iter().map(|s| s.to_string()));
            let payload = Payload::Completion { partial_script: partial.join("\n") + "\n", block: label };
            Ok(instance(spec, task, seed, payload, Answer::None))
        }
        TaskKind::T3 => {
            let (instruction, edits) = substitution(spec, lib, &mut rng)
                .ok_or_else(|| inapplicable(task, spec, "no part has an alternative in the library"))?;
            let payload = Payload::Substitution { script: spec.script.clone(), instruction };
            Ok(instance(spec, task, seed, payload, Answer::Edits { edits }))
        }
        TaskKind::T4 => {
            let elements = extract_elements(&spec.document);
            let text = describe_elements(spec.circuit_type, &elements, &mut rng);
            Ok(instance(spec, task, seed, Payload::Description { text }, Answer::Elements { elements }))
        }
        TaskKind::T5 => {
            let table = spec
                .ground_truth
                .truth_table
                .as_ref()
                .ok_or_else(|| inapplicable(task, spec, "no truth table in the ground truth"))?;
            let payload = Payload::Prediction {
                script: spec.script.clone(),
                inputs: table.inputs.clone(),
                outputs: table.outputs.clone(),
                rows: table.rows.iter().map(|r| r.inputs.clone()).collect(),
            };
            Ok(instance(spec, task, seed, payload, Answer::None))
        }
        TaskKind::T7 | TaskKind::DenovoIso => {
            Ok(instance(spec, task, seed, Payload::Design { text: functional_spec(&spec.record()) }, Answer::None))
        }
        TaskKind::T8 => {
            let gt = &spec.ground_truth;
            let (Some(topology), Some(table)) = (&gt.topology, &gt.truth_table) else {
                return Err(inapplicable(task, spec, "no gate topology in the ground truth"));
            };
            let payload =
                Payload::Assignment { table: table.clone(), topology: topology.clone(), library: training_gate_library(lib) };
            Ok(instance(spec, task, seed, payload, Answer::None))
        }
        TaskKind::T9 => {
            let fault = inject_cascade_fault(spec, seed, lib)
                .ok_or_else(|| inapplicable(task, spec, "no controlled fault changes an output row"))?;
            let payload = Payload::CascadeDebug {
                script: emit_script(&fault.document),
                table: spec.ground_truth.truth_table.clone().unwrap(),
                observation: fault.observation,
            };
            Ok(instance(spec, task, seed, payload, Answer::Fault { fault: fault.fault, locations: fault.locations }))
        }
        TaskKind::MaskedPart | TaskKind::MaskedType | TaskKind::MaskedFunction => {
            let candidates = maskable(spec, lib);
            if candidates.is_empty() {
                return Err(inapplicable(task, spec, "no library part to mask"));
            }
            let id = rng.pick(&candidates).clone();
            let mut t = make_masked_task(spec, task, &id, lib)?;
            t.seed = seed;
            Ok(t)
        }
    }
}

/// T1 or T6 instance carrying a specific flaw.
pub fn make_flaw_task(
    spec: &CircuitSpec,
    task: TaskKind,
    flaw: FlawType,
    seed: u64,
    lib: &PartsLibrary,
) -> Result<TaskInstance, TaskError> {
    let wanted = match task {
        TaskKind::T1 => flaw.level() <= 2,
        TaskKind::T6 => flaw.level() >= 3,
        _ => false,
    };
    if !wanted {
        return Err(inapplicable(task, spec, format!("flaw {flaw} (level {}) is not used by this task", flaw.level())));
    }
    let flawed = inject_flaw(spec, flaw, seed, lib).map_err(|e| inapplicable(task, spec, e.to_string()))?;
    let record = flawed.ground_truth.flaw.clone().unwrap();
    let payload = if task == TaskKind::T1 {
        let ev = evaluate_script(&flawed.script, spec.expected, lib);
        let error_output = match (&ev.exec_error, &ev.validity) {
            (Some(e), _) => e.to_string(),
            (None, Some(v)) => v.diagnostics.join("\n"),
            _ => String::new(),
        };
        Payload::Repair { script: flawed.script.clone(), error_output }
    } else {
        Payload::Debug { script: flawed.script.clone(), symptom: record.symptom.clone() }
    };
    Ok(instance(spec, task, seed, payload, Answer::Flaw { flaw, location: record.location }))
}

/// Contiguous statement blocks of the reference script: the ordering
/// constraints, the interactions, or one cassette's declarations.
fn blocks(spec: &CircuitSpec) -> Vec<(String, usize, usize)> {
    let lines: Vec<&str> = spec.script.lines().collect();
    let keyword = |l: &str| l.split_whitespace().next().unwrap_or("").to_string();
    let run = |keys: &[&str]| {
        let idx: Vec<usize> = (0..lines.len()).filter(|i| keys.contains(&keyword(lines[*i]).as_str())).collect();
        let (lo, hi) = (*idx.first()?, *idx.last()? + 1);
        (hi - lo == idx.len()).then_some((lo, hi))
    };
    let mut out = Vec::new();
    if let Some((lo, hi)) = run(&["precedes"]) {
        out.push(("ordering constraints".to_string(), lo, hi));
    }
    if let Some((lo, hi)) = run(&["interaction", "participation"]) {
        out.push(("interactions".to_string(), lo, hi));
    }
    for region in spec.document.leaf_regions() {
        let mut ids: BTreeSet<&str> = region.features.iter().map(|f| f.child.as_str()).collect();
        ids.insert(&region.id);
        let idx: Vec<usize> = (0..lines.len())
            .filter(|i| {
                let t: Vec<&str> = lines[*i].split_whitespace().collect();
                t.len() >= 2 && matches!(t[0], "component" | "roles" | "name") && ids.contains(t[1])
            })
            .collect();
        if let (Some(lo), Some(hi)) = (idx.first(), idx.last()) {
            if hi + 1 - lo == idx.len() {
                out.push((format!("cassette {} declarations", region.id), *lo, hi + 1));
            }
        }
    }
    out
}

fn training_names(lib: &PartsLibrary, f: impl Fn(&Part) -> bool) -> Vec<String> {
    lib.all().filter(|p| p.tier == Tier::Training && !p.synthetic && f(p)).map(|p| p.name.clone()).collect()
}

/// A single-part swap (RBS or terminator) or a repressor/promoter pair swap.
fn substitution(spec: &CircuitSpec, lib: &PartsLibrary, rng: &mut SplitMix64) -> Option<(String, Vec<Substitution>)> {
    let doc = &spec.document;
    let names: BTreeSet<&str> = doc.components.values().filter_map(|c| c.name.as_deref()).collect();
    let mut options: Vec<(String, Vec<Substitution>)> = Vec::new();
    for (role, kind, word) in [(Role::Rbs, PartKind::Rbs, "RBS"), (Role::Terminator, PartKind::Terminator, "terminator")] {
        let alternatives = training_names(lib, |p| p.kind == kind);
        for c in doc.components.values().filter(|c| c.has_role(role)) {
            let from = c.display_name().to_string();
            let others: Vec<&String> = alternatives.iter().filter(|a| **a != from).collect();
            if others.is_empty() {
                continue;
            }
            let to = rng.pick(&others).to_string();
            let text = format!("Replace the {word} {} ({from}) with {to}. Change nothing else.", c.id);
            options.push((text, vec![Substitution { component: c.id.clone(), from, to }]));
        }
    }
    let cognate = |rep: &Part| lib.cognate_promoter(&rep.id).map(|p| p.name.clone());
    let used: Vec<&Part> = lib.repressors().into_iter().filter(|r| names.contains(r.name.as_str())).collect();
    let free: Vec<&Part> = lib
        .repressors()
        .into_iter()
        .filter(|r| r.tier == Tier::Training && !names.contains(r.name.as_str()))
        .filter(|r| cognate(r).is_some_and(|p| !names.contains(p.as_str())))
        .collect();
    for old in used {
        let Some(old_p) = cognate(old) else { continue };
        if free.is_empty() || !names.contains(old_p.as_str()) {
            continue;
        }
        let new = *rng.pick(&free);
        let new_p = cognate(new).unwrap();
        let edits: Vec<Substitution> = doc
            .components
            .values()
            .filter_map(|c| {
                let n = c.name.as_deref()?;
                let to = if n == old.name { &new.name } else if n == old_p { &new_p } else { return None };
                Some(Substitution { component: c.id.clone(), from: n.to_string(), to: to.clone() })
            })
            .collect();
        let text = format!(
            "Replace the repressor {} with {} and its cognate promoter {old_p} with {new_p} everywhere. Change nothing else.",
            old.name, new.name
        );
        options.push((text, edits));
    }
    if options.is_empty() {
        return None;
    }
    let k = rng.below(options.len());
    Some(options.swap_remove(k))
}

fn maskable(spec: &CircuitSpec, lib: &PartsLibrary) -> Vec<String> {
    spec.document
        .leaf_regions()
        .iter()
        .flat_map(|r| r.features.iter())
        .filter(|f| spec.document.get(&f.child).is_some_and(|c| lib.by_name(c.display_name()).is_some()))
        .map(|f| f.child.clone())
        .collect()
}

/// Functional class used for function-level masking.
pub fn functional_class(part: &Part) -> &'static str {
    match part.kind {
        PartKind::Promoter if part.is_repressible() => "repressible_promoter",
        PartKind::Promoter if part.has("activatable") => "activatable_promoter",
        PartKind::Promoter if part.is_inducible() => "inducible_promoter",
        PartKind::Promoter => "constitutive_promoter",
        PartKind::Cds if part.is_reporter() => "reporter",
        PartKind::Cds if part.is_repressor() => "repressor",
        PartKind::Cds if part.is_activator() => "activator",
        PartKind::Cds => "coding_sequence",
        PartKind::Rbs => "rbs",
        PartKind::Terminator => "terminator",
        PartKind::Operator => "operator",
    }
}

/// Masks component `component_id` of `spec`. The component is renamed so
/// its id does not give the answer away.
pub fn make_masked_task(
    spec: &CircuitSpec,
    task: TaskKind,
    component_id: &str,
    lib: &PartsLibrary,
) -> Result<TaskInstance, TaskError> {
    let level = match task {
        TaskKind::MaskedPart => MaskLevel::Part,
        TaskKind::MaskedType => MaskLevel::Type,
        TaskKind::MaskedFunction => MaskLevel::Function,
        _ => return Err(inapplicable(task, spec, "not a masked-prediction task")),
    };
    if !task.applies_to(spec.circuit_type) {
        return Err(inapplicable(task, spec, "excluded by the task applicability matrix"));
    }
    let comp = spec
        .document
        .get(component_id)
        .ok_or_else(|| inapplicable(task, spec, format!("no component `{component_id}`")))?;
    let part = lib
        .by_name(comp.display_name())
        .ok_or_else(|| inapplicable(task, spec, format!("`{component_id}` is not a library part")))?;
    let answer = match level {
        MaskLevel::Part => part.name.clone(),
        MaskLevel::Type => part.kind.role().token().to_string(),
        MaskLevel::Function => functional_class(part).to_string(),
    };
    let masked: CircuitDocument =
        spec.document.renamed(|id| if id == component_id { MASKED_ID.to_string() } else { id.to_string() });
    let script: Vec<String> = emit_script(&masked)
        .lines()
        .map(|l| {
            let t: Vec<&str> = l.split_whitespace().collect();
            let hide = t.len() >= 2
                && t[1] == MASKED_ID
                && (t[0] == "name" || (t[0] == "roles" && level == MaskLevel::Type));
            if hide {
                format!("{} {MASKED_ID} {MASK_TOKEN}", t[0])
            } else {
                l.to_string()
            }
        })
        .collect();
    let payload = Payload::Masked { script: script.join("\n") + "\n", level };
    Ok(instance(spec, task, 0, payload, Answer::Masked { component: component_id.to_string(), answer }))
}

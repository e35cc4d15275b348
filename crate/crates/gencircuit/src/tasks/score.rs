//! Submission parsing and per-task function rewards.

use super::cascade::cascade_rows;
use super::curriculum::CurriculumState;
use super::elements::satisfied;
use super::{bits, Answer, Payload, Substitution, TaskInstance, TaskKind};
use crate::anneal::training_gate_library;
use crate::graph::{extract_filtered, extract_regulatory_graph, isomorphic, IsoMode};
use crate::logic::{effective_interaction, params_for, truth_table_from_propagation, SensorLevels};
use crate::model::{CircuitDocument, CircuitSpec, FlawType, PartsLibrary};
use crate::script::{emit_script, parse_script, ExecError, ExecErrorKind};
use crate::verifier::{evaluate_script, functional_score, hierarchical_reward, Evaluation, RewardBreakdown};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A submission split into its script and directives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Submission {
    pub script: String,
    pub flaw: Option<String>,
    pub location: Option<String>,
    pub predictions: Vec<(Vec<bool>, Vec<bool>)>,
    pub assignments: Vec<(String, String)>,
    pub ranking: Vec<String>,
    /// Malformed or unknown directives.
    pub problems: Vec<String>,
}

fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

pub fn parse_submission(text: &str) -> Submission {
    let mut sub = Submission::default();
    let mut script = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        let Some(directive) = trimmed.strip_prefix('@') else {
            script.push(line);
            continue;
        };
        let mut words = directive.split_whitespace();
        let key = words.next().unwrap_or("");
        let rest: Vec<&str> = words.collect();
        let bad = |sub: &mut Submission| sub.problems.push(format!("line {}: malformed @{key}", n + 1));
        match (key, rest.as_slice()) {
            ("flaw", [f]) => sub.flaw = Some(f.to_string()),
            ("location", [l]) => sub.location = Some(l.to_string()),
            ("predict", [i, "->", o]) => match (parse_bits(i), parse_bits(o)) {
                (Some(i), Some(o)) => sub.predictions.push((i, o)),
                _ => bad(&mut sub),
            },
            ("assign", [node, gate]) => sub.assignments.push((node.to_string(), gate.to_string())),
            ("rank", list) if !list.is_empty() => sub.ranking.extend(list.iter().map(|s| s.to_string())),
            ("flaw" | "location" | "predict" | "assign" | "rank", _) => bad(&mut sub),
            _ => sub.problems.push(format!("line {}: unknown directive @{key}", n + 1)),
        }
    }
    sub.script = script.join("\n");
    sub
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub f_task: f64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReward {
    pub task: TaskKind,
    pub breakdown: RewardBreakdown,
    pub tau: f64,
    pub success: bool,
    pub diagnostics: Vec<String>,
}

/// Levels 1 to 4 plus the function score, before gating.
struct Scored {
    levels: [f64; 4],
    f_task: f64,
    diagnostics: Vec<String>,
}

fn evaluate(script: &str, spec: &CircuitSpec, lib: &PartsLibrary) -> Evaluation {
    let empty = parse_script(script).is_ok_and(|s| s.statements.is_empty());
    if empty {
        let exec_error = ExecError { kind: ExecErrorKind::Parse, line: 0, message: "empty program".into() };
        return Evaluation { document: None, exec_error: Some(exec_error), validity: None, structural: None, semantic: None };
    }
    evaluate_script(script, spec.expected, lib)
}

fn flag(b: bool) -> f64 {
    b as u8 as f64
}

fn effective_topology_matches(reference: &CircuitSpec, doc: &CircuitDocument, lib: &PartsLibrary) -> bool {
    let Ok(want) = extract_regulatory_graph(&reference.document) else { return false };
    let Ok(got) = extract_filtered(doc, |i| effective_interaction(doc, lib, i)) else { return false };
    isomorphic(&got, &want, IsoMode::RoleLabeled)
}

/// Same parts in the same cassette layouts and a part-aware isomorphic
/// regulatory graph; component ids may differ.
pub fn documents_equivalent(a: &CircuitDocument, b: &CircuitDocument) -> bool {
    fn layout(doc: &CircuitDocument) -> Vec<String> {
        let mut out: Vec<String> = doc
            .leaf_regions()
            .iter()
            .map(|r| {
                let parts: Vec<String> = r
                    .features
                    .iter()
                    .map(|f| {
                        let c = doc.get(&f.child);
                        let roles: Vec<&str> = c.map(|c| c.roles.iter().map(|x| x.token()).collect()).unwrap_or_default();
                        let name = c.map_or("?", |c| c.display_name());
                        format!("{}:{name}:{:?}", roles.join(","), f.orientation)
                    })
                    .collect();
                let mut cons: Vec<(usize, usize)> = r.constraints.iter().map(|k| (k.subject, k.object)).collect();
                cons.sort();
                format!("{}|{cons:?}", parts.join(" "))
            })
            .collect();
        out.sort();
        out
    }
    if layout(a) != layout(b) {
        return false;
    }
    match (extract_regulatory_graph(a), extract_regulatory_graph(b)) {
        (Ok(ga), Ok(gb)) => isomorphic(&ga, &gb, IsoMode::PartAware),
        _ => false,
    }
}

fn apply_edits(doc: &CircuitDocument, edits: &[Substitution]) -> CircuitDocument {
    let mut out = doc.clone();
    for e in edits {
        if let Some(c) = out.components.get_mut(&e.component) {
            c.name = Some(e.to.clone());
        }
    }
    out
}

fn score(task: &TaskInstance, text: &str, lib: &PartsLibrary) -> Scored {
    let sub = parse_submission(text);
    let mut diagnostics = sub.problems.clone();
    let reference = match task.reference_spec() {
        Ok(r) => r,
        Err(e) => return Scored { levels: [0.0; 4], f_task: 0.0, diagnostics: vec![e.to_string()] },
    };
    if task.task.is_prediction() {
        let present = match task.task {
            TaskKind::T5 => !sub.predictions.is_empty(),
            TaskKind::T8 => !sub.assignments.is_empty(),
            _ => !sub.ranking.is_empty(),
        };
        if !present {
            diagnostics.push("required directives missing".into());
            return Scored { levels: [0.0; 4], f_task: 0.0, diagnostics };
        }
        let f_task = score_prediction(task, &reference, &sub, lib, &mut diagnostics);
        return Scored { levels: [1.0; 4], f_task, diagnostics };
    }

    let ev = evaluate(&sub.script, &reference, lib);
    if let Some(e) = &ev.exec_error {
        diagnostics.push(format!("execution failed: {e}"));
    }
    if let Some(v) = ev.validity.as_ref().filter(|v| !v.passed) {
        diagnostics.extend(v.diagnostics.iter().map(|d| format!("invalid: {d}")));
    }
    let levels = [ev.exec(), ev.valid(), ev.structural_score(), ev.semantic_score()];
    let runs_valid = ev.exec() == 1.0 && ev.valid() == 1.0;
    let doc = ev.document.as_ref();
    let flaw_indicators = |diagnostics: &mut Vec<String>| {
        let Answer::Flaw { flaw, location } = &task.answer else { return (false, false) };
        let ty = sub.flaw.as_deref().and_then(|f| f.parse::<FlawType>().ok()) == Some(*flaw);
        let loc = sub.location.as_deref() == Some(location.as_str());
        if !ty {
            diagnostics.push("flaw type incorrect or missing".into());
        }
        if !loc {
            diagnostics.push("flaw location incorrect or missing".into());
        }
        (ty, loc)
    };
    let f_task = match task.task {
        TaskKind::T1 => {
            let (ty, loc) = flaw_indicators(&mut diagnostics);
            0.3 * flag(ty) + 0.3 * flag(loc) + 0.4 * flag(runs_valid)
        }
        TaskKind::T2 => flag(doc.is_some_and(|d| documents_equivalent(d, &reference.document))),
        TaskKind::T3 => {
            let Answer::Edits { edits } = &task.answer else { return Scored { levels, f_task: 0.0, diagnostics } };
            match doc {
                Some(d) => {
                    let name = |id: &str| d.get(id).map(|c| c.display_name().to_string());
                    let replaced = edits.iter().all(|e| name(&e.component).is_some_and(|n| n != e.from));
                    let correct = edits.iter().all(|e| name(&e.component).as_deref() == Some(e.to.as_str()));
                    let expected = apply_edits(&reference.document, edits);
                    let untouched = d.components == expected.components;
                    if !untouched {
                        diagnostics.push("document differs from the requested substitution".into());
                    }
                    flag(replaced) * flag(correct) * flag(untouched)
                }
                None => 0.0,
            }
        }
        TaskKind::T4 => {
            let Answer::Elements { elements } = &task.answer else { return Scored { levels, f_task: 0.0, diagnostics } };
            match doc {
                Some(d) if !elements.is_empty() => {
                    let ok = satisfied(elements, d);
                    let missed = ok.iter().filter(|b| !**b).count();
                    if missed > 0 {
                        diagnostics.push(format!("{missed} of {} specification elements unmet", ok.len()));
                    }
                    (ok.len() - missed) as f64 / ok.len() as f64
                }
                _ => 0.0,
            }
        }
        TaskKind::T6 => {
            let (ty, loc) = flaw_indicators(&mut diagnostics);
            let functional = doc.is_some_and(|d| (functional_score(&reference, d, lib) - 1.0).abs() < 1e-9);
            0.3 * flag(ty) + 0.2 * flag(loc) + 0.2 * flag(runs_valid) + 0.3 * flag(runs_valid && functional)
        }
        TaskKind::T7 => {
            let topo = doc.is_some_and(|d| effective_topology_matches(&reference, d, lib));
            0.4 * flag(topo) + 0.3 * ev.structural_score() + 0.3 * ev.semantic_score()
        }
        TaskKind::DenovoIso => flag(doc.is_some_and(|d| effective_topology_matches(&reference, d, lib))),
        TaskKind::T9 => {
            let Answer::Fault { locations, .. } = &task.answer else { return Scored { levels, f_task: 0.0, diagnostics } };
            let loc = sub.location.as_ref().is_some_and(|l| locations.contains(l));
            if !loc {
                diagnostics.push("fault location incorrect or missing".into());
            }
            let rows = doc.and_then(|d| cascade_rows(&reference, d, lib));
            let failing = rows.as_ref().map(|r| r.iter().filter(|x| !x.passes()).count());
            match failing {
                Some(0) => {}
                Some(n) => diagnostics.push(format!("{n} output states still wrong")),
                None => diagnostics.push("corrected cascade cannot be evaluated".into()),
            }
            0.4 * flag(loc) + 0.6 * flag(failing == Some(0))
        }
        _ => 0.0,
    };
    Scored { levels, f_task, diagnostics }
}

fn score_prediction(
    task: &TaskInstance,
    reference: &CircuitSpec,
    sub: &Submission,
    lib: &PartsLibrary,
    diagnostics: &mut Vec<String>,
) -> f64 {
    match (&task.task, &task.payload) {
        (TaskKind::T5, _) => {
            let Some(table) = &reference.ground_truth.truth_table else { return 0.0 };
            let predicted: BTreeMap<&Vec<bool>, &Vec<bool>> = sub.predictions.iter().map(|(i, o)| (i, o)).collect();
            let right = table.rows.iter().filter(|r| predicted.get(&r.inputs) == Some(&&r.outputs)).count();
            right as f64 / table.rows.len() as f64
        }
        (TaskKind::T8, Payload::Assignment { topology, .. }) => {
            let library = training_gate_library(lib);
            let asg: BTreeMap<String, String> = sub.assignments.iter().cloned().collect();
            for g in topology.gates() {
                match asg.get(g) {
                    None => diagnostics.push(format!("gate {g} unassigned")),
                    Some(r) if !library.contains_key(r) => diagnostics.push(format!("`{r}` is not a library gate")),
                    _ => {}
                }
            }
            let complete: Option<BTreeMap<String, String>> =
                topology.gates().into_iter().map(|g| Some((g.to_string(), asg.get(g)?.clone()))).collect();
            let Some(params) = complete.and_then(|a| params_for(&a, lib)) else { return 0.0 };
            match truth_table_from_propagation(topology, &params, SensorLevels::default()) {
                Ok(t) => {
                    let ok = t.agreement(&topology.truth_table());
                    ok.iter().filter(|b| **b).count() as f64 / ok.len() as f64
                }
                Err(e) => {
                    diagnostics.push(format!("propagation failed: {e}"));
                    0.0
                }
            }
        }
        (_, Payload::Masked { .. }) => {
            let Answer::Masked { answer, .. } = &task.answer else { return 0.0 };
            let hit = |k: usize| sub.ranking.iter().take(k).any(|r| r.eq_ignore_ascii_case(answer));
            diagnostics.push(format!("top-1 {}, top-5 {}", hit(1), hit(5)));
            flag(hit(1))
        }
        _ => 0.0,
    }
}

/// Task-specific function score in [0, 1]. Malformed submissions score 0
/// with a diagnostic.
pub fn score_function_reward(task: &TaskInstance, submission: &str, lib: &PartsLibrary) -> TaskScore {
    let s = score(task, submission, lib);
    TaskScore { f_task: s.f_task, diagnostics: s.diagnostics }
}

/// Full gated reward under the current stage's weights.
pub fn total_reward(task: &TaskInstance, submission: &str, state: &CurriculumState, lib: &PartsLibrary) -> TaskReward {
    let s = score(task, submission, lib);
    let [e, v, st, se] = s.levels;
    let breakdown = hierarchical_reward(e, v, st, se, s.f_task, state.weights()).expect("scores and weights in range");
    TaskReward {
        task: task.task,
        success: breakdown.total >= task.tau - 1e-12,
        tau: task.tau,
        breakdown,
        diagnostics: s.diagnostics,
    }
}

/// A submission that solves `task` exactly, built from the hidden reference.
pub fn reference_submission(task: &TaskInstance) -> String {
    let mut out = String::new();
    match &task.answer {
        Answer::Flaw { flaw, location } => out += &format!("@flaw {flaw}\n@location {location}\n"),
        Answer::Fault { locations, .. } => out += &format!("@location {}\n", locations[0]),
        Answer::Masked { answer, .. } => return format!("@rank {answer}\n"),
        _ => {}
    }
    match &task.payload {
        Payload::Prediction { .. } => {
            for r in task.reference.ground_truth.truth_table.iter().flat_map(|t| &t.rows) {
                out += &format!("@predict {} -> {}\n", bits(&r.inputs), bits(&r.outputs));
            }
            out
        }
        Payload::Assignment { .. } => {
            for (node, gate) in task.reference.ground_truth.assignment.iter().flatten() {
                out += &format!("@assign {node} {gate}\n");
            }
            out
        }
        _ => match (&task.answer, task.reference_spec()) {
            (Answer::Edits { edits }, Ok(spec)) => out + &emit_script(&apply_edits(&spec.document, edits)),
            _ => out + &task.reference_script,
        },
    }
}

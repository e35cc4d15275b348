//! Verification levels 2 to 4 (validity, structure, semantics), functional
//! conformance against a reference spec, and reward assembly.

use crate::graph::{detect_motifs, extract_filtered, extract_regulatory_graph, isomorphic, IsoMode};
use crate::logic::{self, cassette_profile, circuit_truth_table, effective_interaction, SensorLevels};
use crate::model::{
    CircuitDocument, CircuitSpec, CircuitType, EntityType, InteractionType, ParticipationRole, PartsLibrary, Role,
};
use crate::script::{run_script, ExecError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Engineered-region and leaf-cassette counts a circuit should have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ExpectedCounts {
    pub regions: usize,
    pub leaves: usize,
}

impl ExpectedCounts {
    pub fn new(regions: usize, leaves: usize) -> Self {
        ExpectedCounts { regions, leaves }
    }

    /// Counts for `leaves` cassettes wrapped in one top-level region.
    pub fn wrapped(leaves: usize) -> Self {
        ExpectedCounts { regions: leaves + 1, leaves }
    }

    /// Fixed table values. `gate` selects the two-input variant and `ring`
    /// the oscillator length; cascades depend on the synthesized topology.
    pub fn for_type(t: CircuitType, gate: Option<&str>, ring: Option<usize>) -> Option<ExpectedCounts> {
        Some(match t {
            CircuitType::Cassette => ExpectedCounts::new(1, 1),
            CircuitType::NotGate | CircuitType::Toggle => ExpectedCounts::wrapped(2),
            CircuitType::Branched | CircuitType::Ffl => ExpectedCounts::wrapped(3),
            CircuitType::TwoInputGate => match gate? {
                "NOR" | "NAND" => ExpectedCounts::wrapped(3),
                "OR" => ExpectedCounts::wrapped(4),
                "AND" => ExpectedCounts::wrapped(5),
                _ => return None,
            },
            CircuitType::Oscillator => ExpectedCounts::wrapped(ring?),
            CircuitType::Cascade => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: u8,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(check_id: u8, failures: Vec<String>, ok: &str) -> CheckResult {
        if failures.is_empty() {
            CheckResult { check_id, passed: true, detail: ok.to_string() }
        } else {
            CheckResult { check_id, passed: false, detail: failures.join("; ") }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub score: f64,
    pub checks: Vec<CheckResult>,
}

impl LevelReport {
    fn from_checks(checks: Vec<CheckResult>) -> LevelReport {
        let score = checks.iter().filter(|c| c.passed).count() as f64 / checks.len() as f64;
        LevelReport { score, checks }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub passed: bool,
    pub diagnostics: Vec<String>,
}

fn containment_cycle(doc: &CircuitDocument) -> Option<String> {
    // 0 = unvisited, 1 = on stack, 2 = done
    fn visit<'a>(doc: &'a CircuitDocument, id: &'a str, mark: &mut BTreeMap<&'a str, u8>) -> Option<String> {
        match mark.get(id) {
            Some(1) => return Some(id.to_string()),
            Some(2) => return None,
            _ => {}
        }
        mark.insert(id, 1);
        if let Some(c) = doc.get(id) {
            for f in &c.features {
                if let Some(hit) = visit(doc, &f.child, mark) {
                    return Some(hit);
                }
            }
        }
        mark.insert(id, 2);
        None
    }
    let mut mark = BTreeMap::new();
    doc.components.keys().find_map(|id| visit(doc, id, &mut mark))
}

pub fn verify_validity(doc: &CircuitDocument) -> ValidityReport {
    let mut diag = Vec::new();
    if let Err(e) = doc.check_references() {
        diag.push(e.to_string());
    }
    for (_, i) in doc.interactions() {
        let count = |r: ParticipationRole| i.targets(r).count();
        let ok = match i.itype {
            InteractionType::Inhibition => {
                count(ParticipationRole::Inhibitor) >= 1 && count(ParticipationRole::Inhibited) == 1
            }
            InteractionType::Stimulation => {
                count(ParticipationRole::Stimulator) >= 1 && count(ParticipationRole::Stimulated) == 1
            }
            InteractionType::GeneticProduction => {
                count(ParticipationRole::Template) == 1 && count(ParticipationRole::Product) == 1
            }
        };
        if !ok {
            diag.push(format!("interaction `{}` has invalid participant arity", i.id));
        }
    }
    let contained = doc.contained_ids();
    if !doc.regions().any(|r| !contained.contains(r.id.as_str())) {
        diag.push("no top-level engineered region".into());
    }
    if let Some(id) = containment_cycle(doc) {
        diag.push(format!("containment cycle through `{id}`"));
    }
    for c in doc.components.values() {
        if c.entity_type == EntityType::Dna && c.roles.is_empty() {
            diag.push(format!("component `{}` has no role", c.id));
        }
        if c.is_region() && c.features.is_empty() {
            diag.push(format!("region `{}` has no features", c.id));
        }
        if c.entity_type == EntityType::Dna && !c.is_region() && !contained.contains(c.id.as_str()) {
            diag.push(format!("component `{}` is not part of any region", c.id));
        }
        if c.features.len() >= 2 && !c.features.iter().any(|f| doc.get(&f.child).is_some_and(|k| k.is_region())) {
            let got: BTreeSet<(usize, usize)> = c.constraints.iter().map(|k| (k.subject, k.object)).collect();
            let want: BTreeSet<(usize, usize)> = (1..c.features.len()).map(|i| (i - 1, i)).collect();
            if got != want || got.len() != c.constraints.len() {
                diag.push(format!("ordering constraints of `{}` do not form the feature chain", c.id));
            }
        }
        if c.features.windows(2).any(|w| w[0].orientation != w[1].orientation) {
            diag.push(format!("mixed orientation inside `{}`", c.id));
        }
    }
    ValidityReport { passed: diag.is_empty(), diagnostics: diag }
}

const CASSETTE_ORDER: [Role; 4] = [Role::Promoter, Role::Rbs, Role::Cds, Role::Terminator];

fn role_of(doc: &CircuitDocument, id: &str) -> Option<Role> {
    doc.get(id).and_then(|c| c.roles.first().copied())
}

/// Raw mean of the five structural checks; gating by validity happens when
/// the reward is assembled.
pub fn verify_structural(doc: &CircuitDocument, expected: ExpectedCounts, lib: &PartsLibrary) -> LevelReport {
    let regions = doc.regions().count();
    let leaves = doc.leaf_regions();
    let mut checks = Vec::new();

    let mut f = Vec::new();
    if regions != expected.regions {
        f.push(format!("{regions} engineered regions, expected {}", expected.regions));
    }
    checks.push(CheckResult::new(1, f, "region count matches"));

    let mut f = Vec::new();
    if leaves.len() != expected.leaves {
        f.push(format!("{} leaf cassettes, expected {}", leaves.len(), expected.leaves));
    }
    for l in &leaves {
        if l.features.len() != 4 {
            f.push(format!("`{}` has {} subcomponents", l.id, l.features.len()));
        }
    }
    checks.push(CheckResult::new(2, f, "every cassette has 4 subcomponents"));

    let mut f = Vec::new();
    for l in &leaves {
        let n = l.features.len();
        let mut next = vec![None; n];
        let mut indeg = vec![0; n];
        for k in &l.constraints {
            next[k.subject] = Some(k.object);
            indeg[k.object] += 1;
        }
        let start = (0..n).find(|&i| indeg[i] == 0);
        let mut chain = Vec::new();
        let mut cur = start;
        while let Some(i) = cur {
            if chain.contains(&i) || chain.len() > n {
                break;
            }
            chain.push(i);
            cur = next[i];
        }
        let roles: Vec<Option<Role>> = chain.iter().map(|&i| role_of(doc, &l.features[i].child)).collect();
        let want: Vec<Option<Role>> = CASSETTE_ORDER.iter().map(|r| Some(*r)).collect();
        if roles != want || l.constraints.len() != 3 {
            f.push(format!("`{}` ordering does not reconstruct promoter, rbs, cds, terminator", l.id));
        }
    }
    checks.push(CheckResult::new(3, f, "ordering reconstructs promoter, rbs, cds, terminator"));

    let mut f = Vec::new();
    for l in &leaves {
        for (pos, want) in CASSETTE_ORDER.iter().enumerate() {
            let got = l.features.get(pos).and_then(|sc| role_of(doc, &sc.child));
            if got != Some(*want) {
                f.push(format!("`{}` position {} is not {}", l.id, pos + 1, want));
            }
        }
    }
    checks.push(CheckResult::new(4, f, "roles correct at each position"));

    let mut f = Vec::new();
    for l in &leaves {
        for sc in &l.features {
            let Some(c) = doc.get(&sc.child) else { continue };
            if c.entity_type == EntityType::Dna && !c.is_region() {
                match &c.name {
                    Some(n) if lib.by_name(n).is_some() => {}
                    Some(n) => f.push(format!("`{}` names unknown part `{n}`", c.id)),
                    None => f.push(format!("`{}` has no part name", c.id)),
                }
            }
        }
    }
    checks.push(CheckResult::new(5, f, "all parts found in library"));
    LevelReport::from_checks(checks)
}

pub fn verify_semantic(doc: &CircuitDocument, lib: &PartsLibrary) -> LevelReport {
    let mut checks = Vec::new();
    let has = |id: &str, roles: &[Role]| doc.get(id).is_some_and(|c| roles.iter().any(|r| c.has_role(*r)));
    let part = |id: &str| doc.get(id).and_then(|c| lib.by_name(c.display_name()));

    let mut f = Vec::new();
    for c in doc.components.values() {
        if c.entity_type == EntityType::Dna && !c.is_region() && !c.roles.iter().any(|r| r.is_part_role()) {
            f.push(format!("`{}` lacks a part role", c.id));
        }
    }
    checks.push(CheckResult::new(1, f, "every part has a valid role"));

    let mut f = Vec::new();
    for (_, i) in doc.interactions() {
        let allowed = i.itype.allowed_roles();
        for p in &i.participations {
            if !allowed.contains(&p.role) {
                f.push(format!("`{}` is {} but has a {} participant", i.id, i.itype, p.role));
            }
        }
    }
    checks.push(CheckResult::new(2, f, "interaction types consistent"));

    let mut f = Vec::new();
    for (_, i) in doc.interactions() {
        for p in &i.participations {
            let ok = match p.role {
                ParticipationRole::Inhibitor | ParticipationRole::Stimulator => {
                    has(&p.target, &[Role::Cds]) || doc.get(&p.target).is_some_and(|c| c.entity_type == EntityType::Protein)
                }
                ParticipationRole::Inhibited | ParticipationRole::Stimulated => {
                    has(&p.target, &[Role::Promoter, Role::Operator])
                }
                ParticipationRole::Template => has(&p.target, &[Role::Cds]),
                ParticipationRole::Product => true,
            };
            if !ok {
                f.push(format!("`{}` {} `{}` has the wrong kind", i.id, p.role, p.target));
            }
        }
    }
    checks.push(CheckResult::new(3, f, "participation roles valid"));

    let mut f = Vec::new();
    let mut inhibitors: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (_, i) in doc.interactions().filter(|(_, i)| i.itype == InteractionType::Inhibition) {
        for t in i.regulated() {
            inhibitors.entry(t).or_default().extend(i.regulators());
        }
    }
    for (prom, regs) in &inhibitors {
        let pname = doc.get(prom).map(|c| c.display_name()).unwrap_or(prom);
        let cognate = regs.iter().any(|r| lib.regulates(doc.get(r).map(|c| c.display_name()).unwrap_or(r), pname));
        if !cognate {
            f.push(format!("`{prom}` ({pname}) has no cognate inhibitor"));
        }
    }
    checks.push(CheckResult::new(4, f, "every inhibited promoter has a cognate inhibitor"));

    let mut f = Vec::new();
    let regulators: BTreeSet<&str> = doc.interactions().flat_map(|(_, i)| i.regulators()).collect();
    let templates: BTreeSet<&str> = doc.interactions().flat_map(|(_, i)| i.targets(ParticipationRole::Template)).collect();
    for l in doc.leaf_regions() {
        for sc in &l.features {
            let Some(p) = part(&sc.child) else { continue };
            if p.is_reporter() && (regulators.contains(sc.child.as_str()) || templates.contains(sc.child.as_str())) {
                f.push(format!("reporter `{}` acts as a regulator", sc.child));
            }
            if p.is_repressor() && !regulators.contains(sc.child.as_str()) {
                f.push(format!("repressor `{}` sits in an output cassette", sc.child));
            }
        }
    }
    checks.push(CheckResult::new(5, f, "reporter and repressor positions consistent"));
    LevelReport::from_checks(checks)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("reward weights must be nonnegative and sum to 1, got {0:?}")]
    Weights([f64; 5]),
    #[error("level score {0} outside [0, 1]")]
    Score(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_exec: f64,
    pub r_valid: f64,
    pub r_struct: f64,
    pub r_sem: f64,
    pub r_func: f64,
    pub f_task: f64,
    pub total: f64,
    pub weights: [f64; 5],
}

impl RewardBreakdown {
    pub fn levels(&self) -> [f64; 5] {
        [self.r_exec, self.r_valid, self.r_struct, self.r_sem, self.r_func]
    }
}

pub fn check_weights(w: &[f64; 5]) -> Result<(), ConfigError> {
    if w.iter().any(|x| *x < 0.0 || !x.is_finite()) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(ConfigError::Weights(*w));
    }
    Ok(())
}

/// Multiplicative gating: validity needs execution, structure and semantics
/// need validity, function needs both structure and semantics.
pub fn hierarchical_reward(
    exec: f64,
    valid: f64,
    structural: f64,
    semantic: f64,
    f_task: f64,
    weights: [f64; 5],
) -> Result<RewardBreakdown, ConfigError> {
    check_weights(&weights)?;
    for s in [exec, valid, structural, semantic, f_task] {
        if !(0.0..=1.0).contains(&s) {
            return Err(ConfigError::Score(s));
        }
    }
    let r_exec = exec;
    let r_valid = r_exec * valid;
    let r_struct = r_valid * structural;
    let r_sem = r_valid * semantic;
    let r_func = r_struct * r_sem * f_task;
    let levels = [r_exec, r_valid, r_struct, r_sem, r_func];
    let total = levels.iter().zip(&weights).map(|(r, w)| r * w).sum();
    Ok(RewardBreakdown { r_exec, r_valid, r_struct, r_sem, r_func, f_task, total, weights })
}

/// Outcome of levels 1 to 4 for one script.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub document: Option<CircuitDocument>,
    pub exec_error: Option<ExecError>,
    pub validity: Option<ValidityReport>,
    pub structural: Option<LevelReport>,
    pub semantic: Option<LevelReport>,
}

impl Evaluation {
    pub fn exec(&self) -> f64 {
        self.document.is_some() as u8 as f64
    }

    pub fn valid(&self) -> f64 {
        self.validity.as_ref().is_some_and(|v| v.passed) as u8 as f64
    }

    pub fn structural_score(&self) -> f64 {
        self.structural.as_ref().map_or(0.0, |r| r.score)
    }

    pub fn semantic_score(&self) -> f64 {
        self.semantic.as_ref().map_or(0.0, |r| r.score)
    }

    pub fn reward(&self, f_task: f64, weights: [f64; 5]) -> Result<RewardBreakdown, ConfigError> {
        hierarchical_reward(self.exec(), self.valid(), self.structural_score(), self.semantic_score(), f_task, weights)
    }
}

pub fn evaluate_document(doc: CircuitDocument, expected: ExpectedCounts, lib: &PartsLibrary) -> Evaluation {
    let validity = verify_validity(&doc);
    let structural = verify_structural(&doc, expected, lib);
    let semantic = verify_semantic(&doc, lib);
    Evaluation {
        document: Some(doc),
        exec_error: None,
        validity: Some(validity),
        structural: Some(structural),
        semantic: Some(semantic),
    }
}

pub fn evaluate_script(text: &str, expected: ExpectedCounts, lib: &PartsLibrary) -> Evaluation {
    match run_script(text) {
        Ok(doc) => evaluate_document(doc, expected, lib),
        Err(e) => Evaluation { document: None, exec_error: Some(e), validity: None, structural: None, semantic: None },
    }
}

/// How well `doc` reproduces the behaviour declared by `reference`, in [0, 1].
///
/// Cassettes: mean of expression level, inducibility and inducer matches.
/// Steady-state circuits: fraction of truth-table rows reproduced (cascade
/// rows also need clean Hill margins). Feedback circuits: mean of effective
/// topology match and motif agreement.
pub fn functional_score(reference: &CircuitSpec, doc: &CircuitDocument, lib: &PartsLibrary) -> f64 {
    let gt = &reference.ground_truth;
    match reference.circuit_type {
        CircuitType::Cassette => {
            let prof = cassette_profile(doc, lib);
            let level = gt.expression_level.is_some_and(|e| (e - prof.expression_level).abs() < 1e-9);
            let inducible = gt.inducible == Some(prof.inducible);
            let inducer = gt.inducer == prof.inducer;
            (level as u8 + inducible as u8 + inducer as u8) as f64 / 3.0
        }
        t if t.has_steady_state_logic() => {
            let Some(want) = &gt.truth_table else { return 0.0 };
            let Ok(got) = circuit_truth_table(doc, lib, &want.inputs, &want.outputs) else { return 0.0 };
            let mut ok: Vec<bool> = want.rows.iter().zip(&got.rows).map(|(a, b)| a == b).collect();
            if t == CircuitType::Cascade {
                let numeric = gt.topology.as_ref().zip(gt.assignment.as_ref()).and_then(|(topo, asg)| {
                    let params = logic::params_for(asg, lib)?;
                    let tt = logic::truth_table_from_propagation(topo, &params, SensorLevels::default()).ok()?;
                    Some(tt.agreement(&topo.truth_table()))
                });
                match numeric {
                    Some(rows) if rows.len() == ok.len() => ok.iter_mut().zip(rows).for_each(|(a, b)| *a &= b),
                    _ => return 0.0,
                }
            }
            ok.iter().filter(|b| **b).count() as f64 / want.rows.len().max(1) as f64
        }
        _ => {
            let Ok(reference_graph) = extract_regulatory_graph(&reference.document) else { return 0.0 };
            let Ok(g) = extract_filtered(doc, |i| effective_interaction(doc, lib, i)) else { return 0.0 };
            let topology = isomorphic(&g, &reference_graph, IsoMode::RoleLabeled);
            let report = detect_motifs(&g);
            let motif = match reference.circuit_type {
                CircuitType::Toggle => Some(report.bistable) == gt.bistable,
                _ => report.main_ring().is_some_and(|r| {
                    Some(r.length) == gt.cycle_length && Some(r.expected) == gt.oscillation_expected
                }),
            };
            (topology as u8 + motif as u8) as f64 / 2.0
        }
    }
}

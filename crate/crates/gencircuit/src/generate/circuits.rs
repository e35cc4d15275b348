//! Generators for every circuit type. Each returns a spec whose ground truth
//! is computed alongside the document.

use super::synth::synthesize_nor_network;
use super::GenError;
use crate::anneal::{assign_gates, training_gate_library, AnnealSchedule};
use crate::graph::{complexity, detect_motifs, extract_regulatory_graph};
use crate::logic::{circuit_truth_table, GateTopology, SensorLevels};
use crate::model::{
    CircuitDocument, CircuitSpec, CircuitType, Component, Constraint, EntityType, FflType, GroundTruth,
    Interaction, InteractionType, OscillationExpectation, Part, ParticipationRole, PartsLibrary, Role,
    SubComponent, Tier, TruthTable,
};
use crate::rng::SplitMix64;
use crate::script::emit_script;
use crate::verifier::ExpectedCounts;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub const NAMESPACE: &str = "https://gencircuit.example/";
pub const TOP_REGION: &str = "circuit";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Nor,
    And,
    Or,
    Nand,
}

impl GateKind {
    pub const ALL: [GateKind; 4] = [GateKind::Nor, GateKind::And, GateKind::Or, GateKind::Nand];

    pub fn token(self) -> &'static str {
        match self {
            GateKind::Nor => "NOR",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
        }
    }

    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::Nor => !(a || b),
            GateKind::And => a && b,
            GateKind::Or => a || b,
            GateKind::Nand => !(a && b),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for GateKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        GateKind::ALL
            .into_iter()
            .find(|g| g.token().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown gate `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromoterClass {
    Constitutive,
    Inducible,
}

/// Generation parameters. Unset options are drawn from the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub circuit_type: CircuitType,
    pub seed: u64,
    pub gate: Option<GateKind>,
    pub ffl: Option<FflType>,
    /// Oscillator ring length.
    pub ring: Option<usize>,
    /// Explicit repressor names, in role order.
    pub repressors: Option<Vec<String>>,
    pub promoter_class: Option<PromoterClass>,
    /// Cascade target function.
    pub function: Option<TruthTable>,
    /// Largest NOR network a cascade may use.
    pub gate_budget: usize,
}

impl GenParams {
    pub fn new(circuit_type: CircuitType, seed: u64) -> GenParams {
        GenParams {
            circuit_type,
            seed,
            gate: None,
            ffl: None,
            ring: None,
            repressors: None,
            promoter_class: None,
            function: None,
            gate_budget: 5,
        }
    }
}

/// Draws parts for one circuit from the training tier.
pub(crate) struct Palette<'a> {
    pub lib: &'a PartsLibrary,
    pub rng: SplitMix64,
}

impl<'a> Palette<'a> {
    fn training(&self, f: impl Fn(&Part) -> bool) -> Vec<&'a Part> {
        self.lib.all().filter(|p| p.tier == Tier::Training && !p.synthetic && f(p)).collect()
    }

    pub fn rbs(&mut self) -> String {
        let all = self.training(|p| p.kind == crate::model::PartKind::Rbs);
        self.rng.pick(&all).name.clone()
    }

    /// Half the time the double terminator, otherwise one of the others.
    pub fn terminator(&mut self) -> String {
        let all = self.training(|p| p.kind == crate::model::PartKind::Terminator);
        let double: Vec<&Part> = all.iter().copied().filter(|p| p.has("double")).collect();
        let other: Vec<&Part> = all.iter().copied().filter(|p| !p.has("double")).collect();
        if !double.is_empty() && (other.is_empty() || self.rng.chance(0.5)) {
            self.rng.pick(&double).name.clone()
        } else {
            self.rng.pick(&other).name.clone()
        }
    }

    pub fn reporter(&mut self) -> String {
        let all = self.training(|p| p.is_reporter());
        self.rng.pick(&all).name.clone()
    }

    pub fn constitutive(&mut self) -> String {
        let all = self.training(|p| p.is_constitutive());
        self.rng.pick(&all).name.clone()
    }

    /// Promoters usable as circuit inputs.
    pub fn input_promoters(&self) -> Vec<String> {
        self.training(|p| p.is_constitutive() || p.is_inducible()).iter().map(|p| p.name.clone()).collect()
    }

    pub fn distinct_inputs(&mut self, k: usize) -> Result<Vec<String>, GenError> {
        let mut all = self.input_promoters();
        if all.len() < k {
            return Err(GenError::Capacity(format!("{k} input promoters requested, {} available", all.len())));
        }
        self.rng.shuffle(&mut all);
        all.truncate(k);
        Ok(all)
    }

    /// `k` distinct repressors: the explicit list when given, else drawn from the training pairs.
    pub fn repressors(&mut self, explicit: &Option<Vec<String>>, k: usize) -> Result<Vec<String>, GenError> {
        if let Some(list) = explicit {
            if list.len() < k {
                return Err(GenError::Capacity(format!("{k} repressors required, {} given", list.len())));
            }
            for r in &list[..k] {
                if self.lib.by_name(r).is_none_or(|p| !p.is_repressor()) {
                    return Err(GenError::Invalid(format!("`{r}` is not a repressor")));
                }
            }
            return Ok(list[..k].to_vec());
        }
        let mut pool: Vec<String> = self
            .lib
            .repressors()
            .into_iter()
            .filter(|p| p.tier == Tier::Training)
            .map(|p| p.name.clone())
            .collect();
        if pool.len() < k {
            return Err(GenError::Capacity(format!(
                "{k} orthogonal repressors required, the training tier has {}",
                pool.len()
            )));
        }
        self.rng.shuffle(&mut pool);
        pool.truncate(k);
        Ok(pool)
    }

    pub fn cognate(&self, repressor: &str) -> String {
        let id = &self.lib.by_name(repressor).expect("repressor in library").id;
        self.lib.cognate_promoter(id).expect("cognate pair").name.clone()
    }
}

/// Incremental document construction with role-based ids.
pub(crate) struct Builder {
    pub doc: CircuitDocument,
    top: Option<String>,
    interactions: usize,
}

impl Builder {
    pub fn new(wrapped: bool) -> Builder {
        let mut doc = CircuitDocument::new(NAMESPACE);
        let top = wrapped.then(|| {
            let mut c = Component::new(TOP_REGION, EntityType::Dna);
            c.roles.push(Role::EngineeredRegion);
            doc.add(c).unwrap();
            TOP_REGION.to_string()
        });
        Builder { doc, top, interactions: 0 }
    }

    /// Continues editing an existing document; new cassettes join the top region.
    pub fn from_doc(doc: CircuitDocument) -> Builder {
        let top = doc.get(TOP_REGION).map(|c| c.id.clone());
        Builder { doc, top, interactions: 0 }
    }

    /// Adds cassette `id` with parts `id_p`, `id_rbs`, `id_cds`, `id_t`.
    pub fn cassette(&mut self, id: &str, promoter: &str, rbs: &str, cds: &str, term: &str) -> String {
        let mut region = Component::new(id, EntityType::Dna);
        region.roles.push(Role::EngineeredRegion);
        for (suffix, role, name) in
            [("p", Role::Promoter, promoter), ("rbs", Role::Rbs, rbs), ("cds", Role::Cds, cds), ("t", Role::Terminator, term)]
        {
            let pid = format!("{id}_{suffix}");
            let mut c = Component::new(pid.clone(), EntityType::Dna);
            c.roles.push(role);
            c.name = Some(name.to_string());
            self.doc.add(c).unwrap();
            region.features.push(SubComponent::new(pid));
        }
        region.constraints = (1..4).map(|i| Constraint { subject: i - 1, object: i }).collect();
        self.doc.add(region).unwrap();
        if let Some(top) = &self.top {
            self.doc.components.get_mut(top).unwrap().features.push(SubComponent::new(id));
        }
        id.to_string()
    }

    fn owner(&self, fallback: &str) -> String {
        self.top.clone().unwrap_or_else(|| fallback.to_string())
    }

    pub fn regulate(&mut self, itype: InteractionType, regulators: &[String], target: &str, coop: Option<&str>) -> String {
        self.interactions += 1;
        let (reg_role, target_role) = match itype {
            InteractionType::Inhibition => (ParticipationRole::Inhibitor, ParticipationRole::Inhibited),
            _ => (ParticipationRole::Stimulator, ParticipationRole::Stimulated),
        };
        let prefix = if itype == InteractionType::Inhibition { "inh" } else { "stim" };
        let id = format!("{prefix}{}", self.interactions);
        let mut i = Interaction::new(id.clone(), itype);
        for r in regulators {
            i = i.with(reg_role, r.clone());
        }
        i = i.with(target_role, target);
        i.cooperative_group = coop.map(str::to_string);
        let owner = self.owner(target);
        self.doc.components.get_mut(&owner).unwrap().interactions.push(i);
        id
    }

    pub fn inhibit(&mut self, regulator: &str, target: &str) -> String {
        self.regulate(InteractionType::Inhibition, &[regulator.to_string()], target, None)
    }

    pub fn stimulate(&mut self, regulator: &str, target: &str) -> String {
        self.regulate(InteractionType::Stimulation, &[regulator.to_string()], target, None)
    }
}

fn p_of(cassette: &str) -> String {
    format!("{cassette}_p")
}

fn cds_of(cassette: &str) -> String {
    format!("{cassette}_cds")
}

/// Completes a spec: script, kappa and counts come from the document itself.
pub(crate) fn finish(
    circuit_type: CircuitType,
    doc: CircuitDocument,
    ground_truth: GroundTruth,
    description: String,
) -> Result<CircuitSpec, GenError> {
    let g = extract_regulatory_graph(&doc).map_err(|e| GenError::Invalid(e.to_string()))?;
    let kappa = complexity(&g);
    let expected = ExpectedCounts::new(doc.regions().count(), doc.leaf_regions().len());
    Ok(CircuitSpec { circuit_type, script: emit_script(&doc), document: doc, ground_truth, description, kappa, expected })
}

pub fn generate_circuit(params: &GenParams, lib: &PartsLibrary) -> Result<CircuitSpec, GenError> {
    let mut pal = Palette { lib, rng: SplitMix64::new(params.seed) };
    match params.circuit_type {
        CircuitType::Cassette => cassette(params, &mut pal),
        CircuitType::NotGate => not_gate(params, &mut pal),
        CircuitType::TwoInputGate => {
            let gate = params.gate.unwrap_or_else(|| *pal.rng.pick(&GateKind::ALL));
            two_input_gate(params, gate, &mut pal)
        }
        CircuitType::Toggle => toggle(params, &mut pal),
        CircuitType::Branched => branched(&mut pal),
        CircuitType::Ffl => {
            let t = params.ffl.unwrap_or_else(|| if pal.rng.chance(0.5) { FflType::C1 } else { FflType::I1 });
            ffl(params, t, &mut pal)
        }
        CircuitType::Oscillator => {
            let k = params.ring.unwrap_or_else(|| if pal.rng.chance(0.5) { 3 } else { 5 });
            let reps = pal.repressors(&params.repressors, k)?;
            oscillator_ring(&reps, &mut pal)
        }
        CircuitType::Cascade => {
            let f = params.function.clone().ok_or_else(|| GenError::Invalid("cascade needs a target function".into()))?;
            generate_cascaded(&f, lib, params.seed, params.gate_budget)
        }
    }
}

fn cassette(params: &GenParams, pal: &mut Palette) -> Result<CircuitSpec, GenError> {
    let class = params.promoter_class.unwrap_or_else(|| {
        if pal.rng.chance(0.7) {
            PromoterClass::Constitutive
        } else {
            PromoterClass::Inducible
        }
    });
    let promoter = match class {
        PromoterClass::Constitutive => pal.constitutive(),
        PromoterClass::Inducible => {
            let all = pal.training(|p| p.is_inducible());
            pal.rng.pick(&all).name.clone()
        }
    };
    let (rbs, cds, term) = (pal.rbs(), pal.reporter(), pal.terminator());
    let mut b = Builder::new(false);
    b.cassette("cassette", &promoter, &rbs, &cds, &term);
    let lp = pal.lib.by_name(&promoter).unwrap();
    let gt = GroundTruth {
        expression_level: Some(lp.strength() * pal.lib.by_name(&rbs).unwrap().strength()),
        inducible: Some(lp.is_inducible()),
        repressible: Some(lp.is_repressible()),
        inducer: lp.inducer().map(str::to_string),
        ..Default::default()
    };
    let how = match lp.inducer() {
        Some(i) => format!("the {i}-inducible promoter {promoter}"),
        None => format!("the constitutive promoter {promoter}"),
    };
    let desc = format!("An expression cassette that expresses {cds} from {how} with RBS {rbs} and terminator {term}.");
    finish(CircuitType::Cassette, b.doc, gt, desc)
}

fn logic_truth(doc: &CircuitDocument, lib: &PartsLibrary, inputs: &[String], outputs: &[String]) -> Result<TruthTable, GenError> {
    circuit_truth_table(doc, lib, inputs, outputs).map_err(|e| GenError::Invalid(e.to_string()))
}

fn not_gate(params: &GenParams, pal: &mut Palette) -> Result<CircuitSpec, GenError> {
    let rep = pal.repressors(&params.repressors, 1)?.remove(0);
    let input = pal.distinct_inputs(1)?.remove(0);
    let reporter = pal.reporter();
    let mut b = Builder::new(true);
    let (r1, t1, r2, t2) = (pal.rbs(), pal.terminator(), pal.rbs(), pal.terminator());
    b.cassette("input", &input, &r1, &rep, &t1);
    b.cassette("output", &pal.cognate(&rep), &r2, &reporter, &t2);
    b.inhibit(&cds_of("input"), &p_of("output"));
    let table = TruthTable::from_fn(vec![input.clone()], vec![reporter.clone()], |v| vec![!v[0]]);
    let gt = GroundTruth { truth_table: Some(table), gate_type: Some("NOT".into()), ..Default::default() };
    let desc = format!("A NOT gate: input promoter {input} drives {rep}, which represses the promoter of the {reporter} reporter.");
    finish(CircuitType::NotGate, b.doc, gt, desc)
}

fn two_input_gate(params: &GenParams, gate: GateKind, pal: &mut Palette) -> Result<CircuitSpec, GenError> {
    let nrep = match gate {
        GateKind::Nor | GateKind::Nand => 2,
        GateKind::Or => 3,
        GateKind::And => 4,
    };
    let reps = pal.repressors(&params.repressors, nrep)?;
    let inputs = pal.distinct_inputs(2)?;
    let reporter = pal.reporter();
    let mut b = Builder::new(true);
    let cas = |b: &mut Builder, pal: &mut Palette, id: &str, prom: &str, cds: &str| {
        let (r, t) = (pal.rbs(), pal.terminator());
        b.cassette(id, prom, &r, cds, &t);
    };
    cas(&mut b, pal, "input_a", &inputs[0], &reps[0]);
    cas(&mut b, pal, "input_b", &inputs[1], &reps[1]);
    let desc;
    match gate {
        GateKind::Nor | GateKind::Nand => {
            cas(&mut b, pal, "output", &pal.cognate(&reps[0]), &reporter);
            let coop = (gate == GateKind::Nand).then_some("nand");
            for src in ["input_a", "input_b"] {
                b.regulate(InteractionType::Inhibition, &[cds_of(src)], &p_of("output"), coop);
            }
            desc = if gate == GateKind::Nor {
                format!(
                    "A NOR gate: {} and {} each repress the output promoter driving {reporter}; inputs are {} and {}.",
                    reps[0], reps[1], inputs[0], inputs[1]
                )
            } else {
                format!(
                    "A NAND gate: {} and {} bind cooperatively so the {reporter} output is off only when both inputs {} and {} are on.",
                    reps[0], reps[1], inputs[0], inputs[1]
                )
            };
        }
        GateKind::Or => {
            cas(&mut b, pal, "inter", &pal.cognate(&reps[0]), &reps[2]);
            cas(&mut b, pal, "output", &pal.cognate(&reps[2]), &reporter);
            b.inhibit(&cds_of("input_a"), &p_of("inter"));
            b.inhibit(&cds_of("input_b"), &p_of("inter"));
            b.inhibit(&cds_of("inter"), &p_of("output"));
            desc = format!(
                "An OR gate built as NOT(NOR): {} and {} repress an intermediate {} cassette, which represses the {reporter} output; inputs are {} and {}.",
                reps[0], reps[1], reps[2], inputs[0], inputs[1]
            );
        }
        GateKind::And => {
            cas(&mut b, pal, "not_a", &pal.cognate(&reps[0]), &reps[2]);
            cas(&mut b, pal, "not_b", &pal.cognate(&reps[1]), &reps[3]);
            cas(&mut b, pal, "output", &pal.cognate(&reps[2]), &reporter);
            b.inhibit(&cds_of("input_a"), &p_of("not_a"));
            b.inhibit(&cds_of("input_b"), &p_of("not_b"));
            b.inhibit(&cds_of("not_a"), &p_of("output"));
            b.inhibit(&cds_of("not_b"), &p_of("output"));
            desc = format!(
                "An AND gate built as NOR of inverted inputs: {} and {} invert the inputs {} and {}, and {} and {} repress the {reporter} output.",
                reps[0], reps[1], inputs[0], inputs[1], reps[2], reps[3]
            );
        }
    }
    let table = TruthTable::from_fn(inputs.clone(), vec![reporter], |v| vec![gate.eval(v[0], v[1])]);
    let gt = GroundTruth { truth_table: Some(table), gate_type: Some(gate.token().into()), ..Default::default() };
    finish(CircuitType::TwoInputGate, b.doc, gt, desc)
}

fn toggle(params: &GenParams, pal: &mut Palette) -> Result<CircuitSpec, GenError> {
    let reps = pal.repressors(&params.repressors, 2)?;
    let mut b = Builder::new(true);
    let (r1, t1, r2, t2) = (pal.rbs(), pal.terminator(), pal.rbs(), pal.terminator());
    b.cassette("cassette_1", &pal.cognate(&reps[1]), &r1, &reps[0], &t1);
    b.cassette("cassette_2", &pal.cognate(&reps[0]), &r2, &reps[1], &t2);
    b.inhibit(&cds_of("cassette_1"), &p_of("cassette_2"));
    b.inhibit(&cds_of("cassette_2"), &p_of("cassette_1"));
    let gt = GroundTruth {
        stable_states: Some(vec![
            format!("{} high, {} low", reps[0], reps[1]),
            format!("{} low, {} high", reps[0], reps[1]),
        ]),
        bistable: Some(true),
        motif_type: Some("mutual_repression".into()),
        ..Default::default()
    };
    let desc = format!("A toggle switch: {} and {} repress each other's promoters, giving two stable states.", reps[0], reps[1]);
    finish(CircuitType::Toggle, b.doc, gt, desc)
}

fn branched(pal: &mut Palette) -> Result<CircuitSpec, GenError> {
    let arac = activator(pal.lib)?;
    let pbad = pal.lib.get(&arac.regulation.as_ref().unwrap().cognate_id).unwrap().name.clone();
    let mut reporters: Vec<String> = pal.training(|p| p.is_reporter()).iter().map(|p| p.name.clone()).collect();
    pal.rng.shuffle(&mut reporters);
    reporters.truncate(2);
    let mut b = Builder::new(true);
    let master = pal.constitutive();
    let (r, t) = (pal.rbs(), pal.terminator());
    b.cassette("master", &master, &r, &arac.name, &t);
    for (k, rep) in reporters.iter().enumerate() {
        let id = format!("branch_{}", k + 1);
        let (r, t) = (pal.rbs(), pal.terminator());
        b.cassette(&id, &pbad, &r, rep, &t);
        b.stimulate(&cds_of("master"), &p_of(&id));
    }
    let mut outputs = reporters.clone();
    outputs.sort();
    let table = TruthTable::from_fn(vec![pbad.clone()], outputs.clone(), |v| vec![v[0]; 2]);
    let gt = GroundTruth {
        truth_table: Some(table),
        motif_type: Some("branched_activation".into()),
        ..Default::default()
    };
    let desc = format!(
        "A branched activation motif: {} from {master} activates two {pbad} cassettes expressing {} and {} in parallel.",
        arac.name, reporters[0], reporters[1]
    );
    finish(CircuitType::Branched, b.doc, gt, desc)
}

fn activator(lib: &PartsLibrary) -> Result<&Part, GenError> {
    lib.all()
        .find(|p| p.is_activator() && p.regulation.is_some() && !p.synthetic)
        .ok_or_else(|| GenError::Capacity("no activator with a cognate promoter".into()))
}

fn ffl(params: &GenParams, t: FflType, pal: &mut Palette) -> Result<CircuitSpec, GenError> {
    let arac = activator(pal.lib)?;
    let pbad = pal.lib.get(&arac.regulation.as_ref().unwrap().cognate_id).unwrap().name.clone();
    let hybrids: Vec<&Part> = pal.lib.extras.values().filter(|p| p.has("synthetic_hybrid")).collect();
    let act_by = |p: &Part, id: &str| p.listed("activatable-by:").contains(&id);
    let reporter = pal.reporter();
    let mut b = Builder::new(true);
    let (r, tt) = (pal.rbs(), pal.terminator());
    b.cassette("node_a", &pal.constitutive(), &r, &arac.name, &tt);
    let (b_cds, hybrid, desc, table);
    match t {
        FflType::C1 => {
            let h = hybrids
                .iter()
                .find(|h| act_by(h, &arac.id) && h.listed("activatable-by:").len() == 2)
                .ok_or_else(|| GenError::Capacity("no doubly activatable hybrid promoter".into()))?;
            let second = h.listed("activatable-by:").into_iter().find(|id| *id != arac.id).unwrap();
            b_cds = pal.lib.name_of(second).to_string();
            hybrid = h.name.clone();
            table = TruthTable::from_fn(vec![pbad.clone()], vec![reporter.clone()], |v| vec![v[0]]);
            desc = format!(
                "A coherent type-1 feed-forward loop: {} activates {pbad} expressing {b_cds}, and both activate the hybrid promoter {hybrid} driving {reporter}.",
                arac.name
            );
        }
        _ => {
            let usable: Vec<(&Part, String)> = hybrids
                .iter()
                .filter(|h| act_by(h, &arac.id))
                .flat_map(|h| h.listed("repressible-by:").into_iter().map(move |r| (*h, r.to_string())))
                .collect();
            if usable.is_empty() {
                return Err(GenError::Capacity("no activatable and repressible hybrid promoter".into()));
            }
            let chosen = match &params.repressors {
                Some(list) => usable
                    .iter()
                    .find(|(_, r)| pal.lib.name_of(r) == list[0])
                    .ok_or_else(|| GenError::Invalid(format!("no hybrid promoter repressible by `{}`", list[0])))?,
                None => pal.rng.pick(&usable),
            };
            b_cds = pal.lib.name_of(&chosen.1).to_string();
            hybrid = chosen.0.name.clone();
            table = TruthTable::from_fn(vec![pbad.clone()], vec![reporter.clone()], |v| vec![!v[0]]);
            desc = format!(
                "An incoherent type-1 feed-forward loop: {} activates {pbad} expressing {b_cds} and the hybrid promoter {hybrid} driving {reporter}, which {b_cds} represses.",
                arac.name
            );
        }
    }
    let (r, tt) = (pal.rbs(), pal.terminator());
    b.cassette("node_b", &pbad, &r, &b_cds, &tt);
    let (r, tt) = (pal.rbs(), pal.terminator());
    b.cassette("node_c", &hybrid, &r, &reporter, &tt);
    b.stimulate(&cds_of("node_a"), &p_of("node_b"));
    b.stimulate(&cds_of("node_a"), &p_of("node_c"));
    if t == FflType::C1 {
        b.stimulate(&cds_of("node_b"), &p_of("node_c"));
    } else {
        b.inhibit(&cds_of("node_b"), &p_of("node_c"));
    }
    let gt = GroundTruth {
        truth_table: Some(table),
        ffl_type: Some(if t == FflType::C1 { FflType::C1 } else { FflType::I1 }),
        motif_type: Some("feed_forward_loop".into()),
        ..Default::default()
    };
    finish(CircuitType::Ffl, b.doc, gt, desc)
}

/// Repression ring over the given repressors: cassette i is driven by the
/// cognate promoter of repressor i+1 (cyclically).
pub fn oscillator_ring(reps: &[String], pal: &mut Palette) -> Result<CircuitSpec, GenError> {
    let k = reps.len();
    if k < 2 {
        return Err(GenError::Invalid("a ring needs at least 2 repressors".into()));
    }
    let mut b = Builder::new(true);
    for i in 0..k {
        let (r, t) = (pal.rbs(), pal.terminator());
        b.cassette(&format!("node_{}", i + 1), &pal.cognate(&reps[(i + 1) % k]), &r, &reps[i], &t);
    }
    for i in 0..k {
        // Repressor i blocks its cognate promoter, which drives cassette i-1.
        let target = format!("node_{}", (i + k - 1) % k + 1);
        b.inhibit(&cds_of(&format!("node_{}", i + 1)), &p_of(&target));
    }
    let expected = if k % 2 == 1 { OscillationExpectation::Yes } else { OscillationExpectation::BifurcationDependent };
    let gt = GroundTruth {
        cycle_length: Some(k),
        oscillation_expected: Some(expected),
        bistable: Some(k == 2),
        motif_type: Some("repression_ring".into()),
        ..Default::default()
    };
    let desc = format!("A {k}-node repression ring oscillator over {}.", reps.join(", "));
    finish(CircuitType::Oscillator, b.doc, gt, desc)
}

/// Ring generator over an explicit repressor order, for any length.
pub fn generate_ring(reps: &[String], lib: &PartsLibrary, seed: u64) -> Result<CircuitSpec, GenError> {
    let mut pal = Palette { lib, rng: SplitMix64::new(seed) };
    oscillator_ring(reps, &mut pal)
}

/// Realizes `f` as a NOR cascade: synthesis, gate assignment by annealing
/// over the training repressors, then one cassette per gate input.
pub fn generate_cascaded(f: &TruthTable, lib: &PartsLibrary, seed: u64, budget: usize) -> Result<CircuitSpec, GenError> {
    let mut pal = Palette { lib, rng: SplitMix64::new(seed) };
    let n = f.inputs.len();
    let sensors = pal.distinct_inputs(n)?;
    let sensor_table = TruthTable::from_mask(sensors.clone(), "y", f.mask(0));
    let topo = synthesize_nor_network(&sensor_table, budget)?;
    let gates: Vec<String> = topo.gates().iter().map(|s| s.to_string()).collect();
    let library = training_gate_library(lib);
    if library.len() < gates.len() {
        return Err(GenError::Capacity(format!("{} gates exceed the {} available repressors", gates.len(), library.len())));
    }
    let schedule = AnnealSchedule { seed: pal.rng.next_u64(), ..AnnealSchedule::default() };
    let result = assign_gates(&topo, &library, &sensor_table, SensorLevels::default(), &schedule)
        .map_err(|e| GenError::Assignment(e.to_string()))?;
    if !result.success {
        return Err(GenError::Assignment("no assignment meets the output margins".into()));
    }
    let assignment = result.assignment;
    let reporter = pal.reporter();
    build_cascade_document(&topo, &assignment, &reporter, &mut pal).and_then(|doc| {
        let table = logic_truth(&doc, lib, &sensors, std::slice::from_ref(&reporter))?;
        if table.mask(0) != f.mask(0) {
            return Err(GenError::Invalid("realized cascade disagrees with the target function".into()));
        }
        let gt = GroundTruth {
            truth_table: Some(table),
            gate_type: Some(format!("cascade_{:0w$x}", f.mask(0), w = (1usize << n).div_ceil(4))),
            topology: Some(topo.clone()),
            assignment: Some(assignment.clone()),
            ..Default::default()
        };
        let desc = format!(
            "A {}-gate NOR cascade over inputs {} computing output mask {:#x} on {reporter}, using {}.",
            gates.len(),
            sensors.join(", "),
            f.mask(0),
            assignment.values().cloned().collect::<Vec<_>>().join(", ")
        );
        finish(CircuitType::Cascade, doc, gt, desc)
    })
}

pub(crate) fn build_cascade_document(
    topo: &GateTopology,
    assignment: &BTreeMap<String, String>,
    reporter: &str,
    pal: &mut Palette,
) -> Result<CircuitDocument, GenError> {
    let mut b = Builder::new(true);
    // gate id -> CDS ids of its copies; promoter ids reading each gate
    let mut copies: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut readers: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let order = topo.order().ok_or_else(|| GenError::Invalid("cyclic topology".into()))?;
    for v in order {
        let node = &topo.nodes[v];
        if node.is_sensor {
            continue;
        }
        let rep = &assignment[&node.id];
        for (k, input) in node.inputs.iter().enumerate() {
            let src = &topo.nodes[topo.index_of(input).unwrap()];
            let promoter = if src.is_sensor { src.id.clone() } else { pal.cognate(&assignment[&src.id]) };
            let id = format!("{}_{}", node.id, k + 1);
            let (r, t) = (pal.rbs(), pal.terminator());
            b.cassette(&id, &promoter, &r, rep, &t);
            copies.entry(node.id.clone()).or_default().push(cds_of(&id));
            if !src.is_sensor {
                readers.entry(src.id.clone()).or_default().push(p_of(&id));
            }
        }
    }
    let out = topo.output().unwrap().to_string();
    let (r, t) = (pal.rbs(), pal.terminator());
    b.cassette("output", &pal.cognate(&assignment[&out]), &r, reporter, &t);
    readers.entry(out).or_default().push(p_of("output"));
    for (gate, targets) in &readers {
        for target in targets {
            b.regulate(InteractionType::Inhibition, &copies[gate], target, None);
        }
    }
    Ok(b.doc)
}

/// Motif and logic ground truth recomputed from a document, used after edits.
pub fn derive_ground_truth(
    circuit_type: CircuitType,
    doc: &CircuitDocument,
    lib: &PartsLibrary,
    previous: &GroundTruth,
) -> GroundTruth {
    let mut gt = previous.clone();
    match circuit_type {
        CircuitType::Cassette => {
            let prof = crate::logic::cassette_profile(doc, lib);
            gt.expression_level = Some(prof.expression_level);
            gt.inducible = Some(prof.inducible);
            gt.repressible = Some(prof.repressible);
            gt.inducer = prof.inducer;
        }
        t if t.has_steady_state_logic() => {
            if let Some(old) = &previous.truth_table {
                let promoters = crate::logic::promoter_names(doc);
                let inputs: Vec<String> = old.inputs.iter().filter(|i| promoters.contains(*i)).cloned().collect();
                let outputs = crate::logic::reporter_names(doc, lib);
                gt.truth_table = circuit_truth_table(doc, lib, &inputs, &outputs).ok();
            }
        }
        _ => {
            if let Ok(g) = extract_regulatory_graph(doc) {
                let report = detect_motifs(&g);
                gt.bistable = Some(report.bistable);
                if let Some(ring) = report.main_ring() {
                    gt.cycle_length = Some(ring.length);
                    gt.oscillation_expected = Some(ring.expected);
                } else {
                    gt.cycle_length = None;
                    gt.oscillation_expected = None;
                }
            }
        }
    }
    gt
}

//! Gate assignment (technology mapping) by simulated annealing, with an
//! exhaustive oracle for small instances.

use crate::logic::{propagate_signals, GateTopology, LogicError, SensorLevels, OFF_THRESHOLD, ON_THRESHOLD};
use crate::model::{input_vectors, HillParams, PartsLibrary, Tier, TruthTable};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Response functions available for assignment, keyed by gate id.
pub type GateLibrary = BTreeMap<String, HillParams>;

/// Topology node id to gate id.
pub type GateAssignment = BTreeMap<String, String>;

/// Training-tier repressors with characterized responses, keyed by name.
pub fn training_gate_library(lib: &PartsLibrary) -> GateLibrary {
    lib.repressors()
        .into_iter()
        .filter(|p| p.tier == Tier::Training)
        .filter_map(|p| Some((p.name.clone(), p.hill?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnnealError {
    #[error("gate library has {have} gates, topology needs {need}")]
    Capacity { have: usize, need: usize },
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("gate `{0}` is not in the library")]
    UnknownGate(String),
    #[error("truth table has {got} rows, topology needs {want}")]
    TableShape { got: usize, want: usize },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub t0: f64,
    pub beta: f64,
    pub iters: usize,
    pub seed: u64,
    /// One physical gate per node.
    pub injective: bool,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule { t0: 1.0, beta: 0.995, iters: 2000, seed: 0, injective: true }
    }
}

impl AnnealSchedule {
    pub fn check(&self) -> Result<(), AnnealError> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) || !(0.0 < self.beta && self.beta < 1.0) {
            return Err(AnnealError::Schedule(format!("t0 = {}, beta = {}", self.t0, self.beta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssignmentScore {
    pub min_on: f64,
    pub max_off: f64,
    /// `min_on / max_off`; infinite when `max_off` is zero.
    pub objective: f64,
    /// All ON rows above the ON threshold and all OFF rows below the OFF threshold.
    pub meets_margins: bool,
}

impl AssignmentScore {
    fn log_objective(&self) -> f64 {
        self.objective.ln()
    }
}

/// Propagates every input vector and summarizes the output separation.
/// Rows of `table` follow binary counting order over the topology sensors.
pub fn score_assignment(
    topo: &GateTopology,
    assignment: &GateAssignment,
    library: &GateLibrary,
    table: &TruthTable,
    levels: SensorLevels,
) -> Result<AssignmentScore, AnnealError> {
    let params: BTreeMap<String, HillParams> = assignment
        .iter()
        .map(|(node, gate)| library.get(gate).map(|p| (node.clone(), *p)).ok_or_else(|| AnnealError::UnknownGate(gate.clone())))
        .collect::<Result<_, _>>()?;
    score_params(topo, &params, table, levels)
}

fn score_params(
    topo: &GateTopology,
    params: &BTreeMap<String, HillParams>,
    table: &TruthTable,
    levels: SensorLevels,
) -> Result<AssignmentScore, AnnealError> {
    let sensors = topo.sensors();
    let out = topo.output().ok_or_else(|| LogicError::Topology("no output node".into()))?.to_string();
    let vectors = input_vectors(sensors.len());
    if table.rows.len() != vectors.len() {
        return Err(AnnealError::TableShape { got: table.rows.len(), want: vectors.len() });
    }
    let (mut min_on, mut max_off) = (f64::INFINITY, 0.0f64);
    let mut margins = true;
    for (v, row) in vectors.iter().zip(&table.rows) {
        let s: BTreeMap<String, f64> = sensors
            .iter()
            .zip(v)
            .map(|(id, b)| (id.to_string(), if *b { levels.on_rpu } else { levels.off_rpu }))
            .collect();
        let y = propagate_signals(topo, params, &s)?.values[&out];
        if row.outputs[0] {
            min_on = min_on.min(y);
            margins &= y > ON_THRESHOLD;
        } else {
            max_off = max_off.max(y);
            margins &= y < OFF_THRESHOLD;
        }
    }
    let objective = if max_off == 0.0 { f64::INFINITY } else { min_on / max_off };
    Ok(AssignmentScore { min_on, max_off, objective, meets_margins: margins })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub assignment: GateAssignment,
    pub score: AssignmentScore,
    /// Best-seen objective after each iteration.
    pub trace: Vec<f64>,
    pub success: bool,
}

struct Problem<'a> {
    topo: &'a GateTopology,
    gates: Vec<&'a str>,
    params: Vec<HillParams>,
    nodes: Vec<String>,
    table: &'a TruthTable,
    levels: SensorLevels,
}

impl<'a> Problem<'a> {
    fn new(
        topo: &'a GateTopology,
        library: &'a GateLibrary,
        table: &'a TruthTable,
        levels: SensorLevels,
        injective: bool,
    ) -> Result<Problem<'a>, AnnealError> {
        topo.validate()?;
        let nodes: Vec<String> = topo.gates().iter().map(|s| s.to_string()).collect();
        if library.is_empty() || (injective && library.len() < nodes.len()) {
            return Err(AnnealError::Capacity { have: library.len(), need: nodes.len() });
        }
        Ok(Problem {
            topo,
            gates: library.keys().map(String::as_str).collect(),
            params: library.values().copied().collect(),
            nodes,
            table,
            levels,
        })
    }

    fn score(&self, choice: &[usize]) -> Result<AssignmentScore, AnnealError> {
        let params = self.nodes.iter().cloned().zip(choice.iter().map(|&g| self.params[g])).collect();
        score_params(self.topo, &params, self.table, self.levels)
    }

    fn assignment(&self, choice: &[usize]) -> GateAssignment {
        self.nodes.iter().cloned().zip(choice.iter().map(|&g| self.gates[g].to_string())).collect()
    }
}

/// Metropolis annealing on ln(objective). Proposals swap two nodes' gates
/// or move one node to an unused gate.
pub fn assign_gates(
    topo: &GateTopology,
    library: &GateLibrary,
    table: &TruthTable,
    levels: SensorLevels,
    schedule: &AnnealSchedule,
) -> Result<AnnealResult, AnnealError> {
    schedule.check()?;
    let prob = Problem::new(topo, library, table, levels, schedule.injective)?;
    let mut rng = SplitMix64::new(schedule.seed);
    let (k, m) = (prob.nodes.len(), prob.gates.len());
    let mut cur: Vec<usize> = if schedule.injective {
        let mut all: Vec<usize> = (0..m).collect();
        rng.shuffle(&mut all);
        all.truncate(k);
        all
    } else {
        (0..k).map(|_| rng.below(m)).collect()
    };
    let mut cur_score = prob.score(&cur)?;
    let mut best = (cur.clone(), cur_score);
    let mut trace = Vec::with_capacity(schedule.iters);
    let mut temp = schedule.t0;
    for _ in 0..schedule.iters {
        let mut next = cur.clone();
        let unused: Vec<usize> = if schedule.injective {
            (0..m).filter(|g| !cur.contains(g)).collect()
        } else {
            (0..m).collect()
        };
        if k >= 2 && (unused.is_empty() || rng.chance(0.5)) {
            let a = rng.below(k);
            let b = (a + 1 + rng.below(k - 1)) % k;
            next.swap(a, b);
        } else if !unused.is_empty() && k >= 1 {
            next[rng.below(k)] = *rng.pick(&unused);
        }
        if next != cur {
            let s = prob.score(&next)?;
            let (new, old) = (s.log_objective(), cur_score.log_objective());
            let delta = if new == old { 0.0 } else { new - old };
            if delta >= 0.0 || rng.next_f64() < (delta / temp).exp() {
                cur = next;
                cur_score = s;
                if better(&cur_score, &best.1) {
                    best = (cur.clone(), cur_score);
                }
            }
        }
        trace.push(best.1.objective);
        temp *= schedule.beta;
    }
    Ok(AnnealResult { assignment: prob.assignment(&best.0), score: best.1, trace, success: best.1.meets_margins })
}

fn better(a: &AssignmentScore, b: &AssignmentScore) -> bool {
    a.objective > b.objective || (a.objective == b.objective && a.meets_margins && !b.meets_margins)
}

/// Best of `restarts` independent chains, seeded `mix(seed, r)`.
pub fn assign_with_restarts(
    topo: &GateTopology,
    library: &GateLibrary,
    table: &TruthTable,
    levels: SensorLevels,
    schedule: &AnnealSchedule,
    restarts: usize,
) -> Result<AnnealResult, AnnealError> {
    let mut best: Option<AnnealResult> = None;
    for r in 0..restarts.max(1) {
        let s = AnnealSchedule { seed: crate::rng::mix(schedule.seed, r as u64), ..*schedule };
        let res = assign_gates(topo, library, table, levels, &s)?;
        if best.as_ref().is_none_or(|b| better(&res.score, &b.score)) {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Exhaustive optimum over all (injective) assignments.
pub fn exhaustive_assign(
    topo: &GateTopology,
    library: &GateLibrary,
    table: &TruthTable,
    levels: SensorLevels,
    injective: bool,
) -> Result<(GateAssignment, AssignmentScore), AnnealError> {
    let prob = Problem::new(topo, library, table, levels, injective)?;
    let (k, m) = (prob.nodes.len(), prob.gates.len());
    let mut best: Option<(Vec<usize>, AssignmentScore)> = None;
    let mut choice = vec![0usize; k];
    fn walk(
        prob: &Problem,
        pos: usize,
        m: usize,
        injective: bool,
        choice: &mut Vec<usize>,
        best: &mut Option<(Vec<usize>, AssignmentScore)>,
    ) -> Result<(), AnnealError> {
        if pos == choice.len() {
            let s = prob.score(choice)?;
            if best.as_ref().is_none_or(|(_, b)| better(&s, b)) {
                *best = Some((choice.clone(), s));
            }
            return Ok(());
        }
        for g in 0..m {
            if injective && choice[..pos].contains(&g) {
                continue;
            }
            choice[pos] = g;
            walk(prob, pos + 1, m, injective, choice, best)?;
        }
        Ok(())
    }
    walk(&prob, 0, m, injective, &mut choice, &mut best)?;
    let (c, s) = best.expect("non-empty search space");
    Ok((prob.assignment(&c), s))
}

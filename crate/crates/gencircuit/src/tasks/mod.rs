//! Task instances built from generated circuits, submission scoring,
//! curriculum control and evaluation metrics.
//!
//! A submission is plain text: construction-language statements plus
//! directive lines starting with `@`:
//!
//! ```text
//! @flaw missing_terminator
//! @location cassette_t
//! @predict 01 -> 1
//! @assign g1 LacI
//! @rank B0034 B0032
//! ```

mod cascade;
mod curriculum;
mod elements;
mod make;
mod metrics;
mod score;

pub use cascade::{assignment_from_document, cascade_rows, inject_cascade_fault, CascadeFault, FaultyCascade, RowCheck};
pub use curriculum::{
    curriculum_step, sample_task_type, CurriculumState, PROMOTION_THRESHOLDS, STAGE_WEIGHTS, TASK_SAMPLING,
};
pub use elements::{describe_elements, extract_elements, functional_spec, satisfied, SpecElement};
pub use make::{make_flaw_task, make_masked_task, make_task};
pub use metrics::{delta_gen, pass_at_k, tsr, MetricsError, Outcome};
pub use score::{
    documents_equivalent, parse_submission, reference_submission, score_function_reward, total_reward, Submission,
    TaskReward, TaskScore,
};

use crate::anneal::GateLibrary;
use crate::logic::GateTopology;
use crate::model::{CircuitSpec, CircuitType, FlawType, SpecRecord, TruthTable};
use crate::script::run_script;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    MaskedPart,
    MaskedType,
    MaskedFunction,
    DenovoIso,
}

impl TaskKind {
    pub const ALL: [TaskKind; 13] = [
        TaskKind::T1,
        TaskKind::T2,
        TaskKind::T3,
        TaskKind::T4,
        TaskKind::T5,
        TaskKind::T6,
        TaskKind::T7,
        TaskKind::T8,
        TaskKind::T9,
        TaskKind::MaskedPart,
        TaskKind::MaskedType,
        TaskKind::MaskedFunction,
        TaskKind::DenovoIso,
    ];

    /// The procedural training tasks, in sampling-table order.
    pub const TRAINING: [TaskKind; 7] =
        [TaskKind::T1, TaskKind::T2, TaskKind::T3, TaskKind::T4, TaskKind::T5, TaskKind::T6, TaskKind::T7];

    pub fn token(self) -> &'static str {
        match self {
            TaskKind::T1 => "t1",
            TaskKind::T2 => "t2",
            TaskKind::T3 => "t3",
            TaskKind::T4 => "t4",
            TaskKind::T5 => "t5",
            TaskKind::T6 => "t6",
            TaskKind::T7 => "t7",
            TaskKind::T8 => "t8",
            TaskKind::T9 => "t9",
            TaskKind::MaskedPart => "masked_part",
            TaskKind::MaskedType => "masked_type",
            TaskKind::MaskedFunction => "masked_function",
            TaskKind::DenovoIso => "denovo_iso",
        }
    }

    /// Success threshold: 0.9 where only complete correctness counts.
    pub fn tau(self) -> f64 {
        match self {
            TaskKind::T1 | TaskKind::T2 | TaskKind::T6 => 0.9,
            TaskKind::MaskedPart | TaskKind::MaskedType | TaskKind::MaskedFunction => 0.9,
            _ => 0.8,
        }
    }

    /// Answers are directives rather than a construction script.
    pub fn is_prediction(self) -> bool {
        matches!(self, TaskKind::T5 | TaskKind::T8 | TaskKind::MaskedPart | TaskKind::MaskedType | TaskKind::MaskedFunction)
    }

    pub fn applies_to(self, t: CircuitType) -> bool {
        match self {
            TaskKind::T5 => t.has_steady_state_logic(),
            TaskKind::T8 | TaskKind::T9 => t == CircuitType::Cascade,
            TaskKind::MaskedPart | TaskKind::MaskedType | TaskKind::MaskedFunction | TaskKind::DenovoIso => {
                t != CircuitType::Cascade
            }
            _ => true,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for TaskKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.to_ascii_lowercase();
        TaskKind::ALL.into_iter().find(|k| k.token() == lower).ok_or_else(|| format!("unknown task `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaskError {
    #[error("task {task} does not apply to {circuit_type} circuits: {reason}")]
    Inapplicable { task: TaskKind, circuit_type: CircuitType, reason: String },
    #[error("curriculum: {0}")]
    Curriculum(String),
    #[error("task record: {0}")]
    Record(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskLevel {
    Part,
    Type,
    Function,
}

/// One requested part change: component `component` goes from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub component: String,
    pub from: String,
    pub to: String,
}

/// What the solver sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Repair { script: String, error_output: String },
    Completion { partial_script: String, block: String },
    Substitution { script: String, instruction: String },
    Description { text: String },
    Prediction { script: String, inputs: Vec<String>, outputs: Vec<String>, rows: Vec<Vec<bool>> },
    Debug { script: String, symptom: String },
    Design { text: String },
    Assignment { table: TruthTable, topology: GateTopology, library: GateLibrary },
    CascadeDebug { script: String, table: TruthTable, observation: String },
    Masked { script: String, level: MaskLevel },
}

/// What the scorer needs beyond the reference circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Answer {
    None,
    Flaw { flaw: FlawType, location: String },
    Edits { edits: Vec<Substitution> },
    Elements { elements: Vec<SpecElement> },
    Fault { fault: CascadeFault, locations: Vec<String> },
    Masked { component: String, answer: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub task: TaskKind,
    pub circuit_type: CircuitType,
    pub seed: u64,
    pub tau: f64,
    pub payload: Payload,
    pub reference_script: String,
    pub reference: SpecRecord,
    pub answer: Answer,
}

impl TaskInstance {
    /// Rebuilds the reference spec from the stored script.
    pub fn reference_spec(&self) -> Result<CircuitSpec, TaskError> {
        let doc = run_script(&self.reference_script).map_err(|e| TaskError::Record(e.to_string()))?;
        Ok(CircuitSpec::from_record(self.reference.clone(), doc, self.reference_script.clone()))
    }

    /// Prompt text shown to a solver.
    pub fn prompt(&self) -> String {
        let head = format!("[{}] {} circuit\n", self.task, self.circuit_type);
        let body = match &self.payload {
            Payload::Repair { script, error_output } => {
                format!("This script fails:\n{script}\nError output:\n{error_output}\nReturn @flaw, @location and the repaired script.")
            }
            Payload::Completion { partial_script, block } => {
                format!("Complete the missing {block}:\n{partial_script}")
            }
            Payload::Substitution { script, instruction } => format!("{instruction}\n{script}"),
            Payload::Description { text } | Payload::Design { text } => text.clone(),
            Payload::Prediction { script, inputs, outputs, rows } => {
                let states: Vec<String> = rows.iter().map(|r| bits(r)).collect();
                format!(
                    "{script}\nInputs ({}) take the states {}. Predict outputs ({}) with one @predict line per state.",
                    inputs.join(", "),
                    states.join(" "),
                    outputs.join(", ")
                )
            }
            Payload::Debug { script, symptom } => {
                format!("{script}\nObserved: {symptom}.\nReturn @flaw, @location and the corrected script.")
            }
            Payload::Assignment { table, topology, library } => {
                let nodes: Vec<String> = topology
                    .nodes
                    .iter()
                    .map(|n| if n.is_sensor { format!("{} (sensor)", n.id) } else { format!("{} = NOR({})", n.id, n.inputs.join(", ")) })
                    .collect();
                let gates: Vec<String> = library
                    .iter()
                    .map(|(g, h)| format!("{g}: y_min={} y_max={} K={} n={}", h.y_min, h.y_max, h.k, h.n))
                    .collect();
                format!(
                    "Truth table {}.\nTopology:\n{}\nGates:\n{}\nReturn one @assign line per gate.",
                    table.tuples(),
                    nodes.join("\n"),
                    gates.join("\n")
                )
            }
            Payload::CascadeDebug { script, table, observation } => format!(
                "{script}\nSpecified truth table {}.\nObserved: {observation}.\nReturn @location of the faulty gate and the corrected script.",
                table.tuples()
            ),
            Payload::Masked { script, level } => {
                format!("{script}\nPredict the masked component's {level:?} as a ranked @rank list.")
            }
        };
        head + &body
    }
}

pub(crate) fn bits(v: &[bool]) -> String {
    v.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

pub(crate) fn inapplicable(task: TaskKind, spec: &CircuitSpec, reason: impl Into<String>) -> TaskError {
    TaskError::Inapplicable { task, circuit_type: spec.circuit_type, reason: reason.into() }
}

/// Whether tasks of `kind` can be built for circuits like `spec` (before any flaw search).
pub fn applicable(kind: TaskKind, spec: &CircuitSpec) -> bool {
    kind.applies_to(spec.circuit_type)
}

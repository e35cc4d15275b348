//! Circuit document model, parts library, canonical format and `CircuitSpec` records
//! shared by the generator, verifier and task modules.

pub mod canonical;
pub mod document;
pub mod ontology;
pub mod parts;

pub use canonical::{deserialize_document, serialize_document, DocError};
pub use document::{
    CircuitDocument, Component, Constraint, Interaction, Orientation, Participation, RefError, SubComponent,
};
pub use ontology::{EntityType, InteractionType, ParticipationRole, Role};
pub use parts::{
    load_parts_library, HillParams, LibraryError, LibrarySource, Part, PartKind, PartsLibrary, Regulation,
    RegulationMode, Tier,
};

use crate::graph::Kappa;
use crate::logic::GateTopology;
use crate::verifier::ExpectedCounts;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitType {
    Cassette,
    NotGate,
    TwoInputGate,
    Toggle,
    Branched,
    Ffl,
    Oscillator,
    Cascade,
}

impl CircuitType {
    pub const ALL: [CircuitType; 8] = [
        CircuitType::Cassette,
        CircuitType::NotGate,
        CircuitType::TwoInputGate,
        CircuitType::Toggle,
        CircuitType::Branched,
        CircuitType::Ffl,
        CircuitType::Oscillator,
        CircuitType::Cascade,
    ];

    pub fn token(self) -> &'static str {
        match self {
            CircuitType::Cassette => "cassette",
            CircuitType::NotGate => "not_gate",
            CircuitType::TwoInputGate => "two_input_gate",
            CircuitType::Toggle => "toggle",
            CircuitType::Branched => "branched",
            CircuitType::Ffl => "ffl",
            CircuitType::Oscillator => "oscillator",
            CircuitType::Cascade => "cascade",
        }
    }

    /// Steady-state input/output mapping exists (logic prediction applies).
    pub fn has_steady_state_logic(self) -> bool {
        matches!(
            self,
            CircuitType::NotGate | CircuitType::TwoInputGate | CircuitType::Branched | CircuitType::Ffl | CircuitType::Cascade
        )
    }

    pub fn is_feedback(self) -> bool {
        matches!(self, CircuitType::Toggle | CircuitType::Oscillator)
    }
}

impl fmt::Display for CircuitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for CircuitType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        CircuitType::ALL
            .iter()
            .copied()
            .find(|t| t.token() == s || (s == "not" && *t == CircuitType::NotGate))
            .ok_or_else(|| format!("unknown circuit type `{s}`"))
    }
}

/// One row of a truth table. Inputs are listed in `TruthTable::inputs` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRow {
    pub inputs: Vec<bool>,
    pub outputs: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTable {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Rows in binary counting order, first input most significant.
    pub rows: Vec<TruthRow>,
}

pub fn input_vectors(n: usize) -> Vec<Vec<bool>> {
    (0..1usize << n).map(|r| (0..n).map(|i| r >> (n - 1 - i) & 1 == 1).collect()).collect()
}

impl TruthTable {
    pub fn from_fn(inputs: Vec<String>, outputs: Vec<String>, f: impl Fn(&[bool]) -> Vec<bool>) -> TruthTable {
        let rows = input_vectors(inputs.len())
            .into_iter()
            .map(|v| {
                let outputs = f(&v);
                TruthRow { inputs: v, outputs }
            })
            .collect();
        TruthTable { inputs, outputs, rows }
    }

    /// Single-output table from a bitmask: bit r is the output of row r.
    pub fn from_mask(inputs: Vec<String>, output: impl Into<String>, mask: u64) -> TruthTable {
        TruthTable::from_fn(inputs, vec![output.into()], |v| {
            let r = v.iter().fold(0usize, |acc, b| acc << 1 | *b as usize);
            vec![mask >> r & 1 == 1]
        })
    }

    /// Bitmask of output `k` (bit r = row r).
    pub fn mask(&self, k: usize) -> u64 {
        self.rows.iter().enumerate().fold(0, |m, (r, row)| m | (row.outputs[k] as u64) << r)
    }

    pub fn lookup(&self, inputs: &[bool]) -> Option<&[bool]> {
        self.rows.iter().find(|r| r.inputs == inputs).map(|r| r.outputs.as_slice())
    }

    /// Compact `(in..., out...)` tuples, e.g. `(0,1),(1,0)`.
    pub fn tuples(&self) -> String {
        let bit = |b: &bool| if *b { "1" } else { "0" };
        self.rows
            .iter()
            .map(|r| {
                let cells: Vec<&str> = r.inputs.iter().chain(r.outputs.iter()).map(bit).collect();
                format!("({})", cells.join(","))
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscillationExpectation {
    Yes,
    BifurcationDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FflType {
    C1,
    I1,
    #[serde(rename = "other")]
    Other,
}

macro_rules! flaw_types {
    ($($var:ident => $tok:literal, $level:literal, $symptom:literal;)+) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum FlawType { $($var),+ }

        impl FlawType {
            pub const ALL: [FlawType; 14] = [$(FlawType::$var),+];

            pub fn token(self) -> &'static str {
                match self { $(FlawType::$var => $tok),+ }
            }

            pub fn level(self) -> u8 {
                match self { $(FlawType::$var => $level),+ }
            }

            pub fn symptom(self) -> &'static str {
                match self { $(FlawType::$var => $symptom),+ }
            }
        }

        impl FromStr for FlawType {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($tok => Ok(FlawType::$var),)+
                    _ => Err(format!("unknown flaw type `{s}`")),
                }
            }
        }
    };
}

flaw_types! {
    MissingTerminator => "missing_terminator", 1, "Transcriptional read-through";
    DuplicateComponent => "duplicate_component", 1, "Validation/parsing error";
    EmptyFeature => "empty_feature", 1, "Validation failure";
    WrongPartOrder => "wrong_part_order", 2, "Circuit malfunction";
    MissingConstraint => "missing_constraint", 2, "Ambiguous assembly order";
    OrphanComponent => "orphan_component", 2, "Disconnected component";
    WrongOrientation => "wrong_orientation", 2, "Circuit malfunction";
    MismatchedPair => "mismatched_pair", 3, "No repression observed";
    WrongInducer => "wrong_inducer", 3, "No response to inducer";
    InvertedLogic => "inverted_logic", 3, "Inverted output behavior";
    MissingInteraction => "missing_interaction", 3, "No regulation observed";
    IncompleteFeedback => "incomplete_feedback", 4, "No oscillation / no bistability";
    PromoterLeak => "promoter_leak", 4, "Always-on expression";
    ExtraRegulation => "extra_regulation", 4, "Unexpected interference";
}

impl fmt::Display for FlawType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlawRecord {
    pub flaw_type: FlawType,
    pub level: u8,
    /// Component or interaction id the flaw was applied to.
    pub location: String,
    pub symptom: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationStep {
    pub operator: String,
    pub target: String,
    pub annotation: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_table: Option<TruthTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_states: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bistable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillation_expected: Option<OscillationExpectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ffl_type: Option<FflType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motif_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inducible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repressible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inducer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<GateTopology>,
    /// Topology node id -> repressor name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flaw: Option<FlawRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbations: Vec<PerturbationStep>,
}

/// A generated circuit with everything needed to verify it.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub circuit_type: CircuitType,
    pub document: CircuitDocument,
    pub script: String,
    pub ground_truth: GroundTruth,
    pub description: String,
    pub kappa: Kappa,
    pub expected: ExpectedCounts,
}

/// Everything in a spec except the document and script, for on-disk records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRecord {
    pub circuit_type: CircuitType,
    pub description: String,
    pub kappa: Kappa,
    pub expected: ExpectedCounts,
    pub ground_truth: GroundTruth,
}

impl CircuitSpec {
    pub fn record(&self) -> SpecRecord {
        SpecRecord {
            circuit_type: self.circuit_type,
            description: self.description.clone(),
            kappa: self.kappa,
            expected: self.expected,
            ground_truth: self.ground_truth.clone(),
        }
    }

    pub fn from_record(rec: SpecRecord, document: CircuitDocument, script: String) -> CircuitSpec {
        CircuitSpec {
            circuit_type: rec.circuit_type,
            document,
            script,
            ground_truth: rec.ground_truth,
            description: rec.description,
            kappa: rec.kappa,
            expected: rec.expected,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_table_row_order() {
        let t = TruthTable::from_fn(vec!["a".into(), "b".into()], vec!["y".into()], |v| vec![!(v[0] || v[1])]);
        assert_eq!(t.tuples(), "(0,0,1),(0,1,0),(1,0,0),(1,1,0)");
        assert_eq!(t.mask(0), 0b0001);
        assert_eq!(TruthTable::from_mask(t.inputs.clone(), "y", 0b0001), t);
    }

    #[test]
    fn flaw_table_levels() {
        let levels: Vec<u8> = FlawType::ALL.iter().map(|f| f.level()).collect();
        assert_eq!(levels, vec![1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4]);
        for f in FlawType::ALL {
            assert_eq!(f.token().parse::<FlawType>().unwrap(), f);
            assert!(!f.symptom().is_empty());
        }
    }

    #[test]
    fn circuit_type_tokens() {
        for t in CircuitType::ALL {
            assert_eq!(t.token().parse::<CircuitType>().unwrap(), t);
        }
    }
}

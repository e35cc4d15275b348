//! Procedural circuit generation: per-type generators, NOR synthesis for
//! cascades, flaw injection, perturbation, deduplication and dataset assembly.

mod circuits;
mod dataset;
mod flaws;
mod perturb;
mod synth;

pub use circuits::{
    derive_ground_truth, generate_cascaded, generate_circuit, generate_ring, GateKind, GenParams, PromoterClass,
    NAMESPACE, TOP_REGION,
};
pub use dataset::{build_dataset, deduplicate, Dataset, DatasetConfig, DedupOutcome, Manifest, Split};
pub use flaws::{applicable_flaws, inject_flaw};
pub use perturb::{perturb, perturb_random, PerturbOp};
pub use synth::{is_degenerate, synthesize_nor_network, MAX_GATES};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("capacity: {0}")]
    Capacity(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("degenerate function: {0}")]
    Degenerate(String),
    #[error("gate budget exceeded: {0}")]
    Budget(String),
    #[error("gate assignment failed: {0}")]
    Assignment(String),
    #[error("not applicable: {0}")]
    Inapplicable(String),
}

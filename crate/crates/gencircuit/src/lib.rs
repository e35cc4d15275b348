//! Procedural genetic-circuit benchmarks with a five-level verification reward.
//!
//! The pipeline: a generator builds a [`model::CircuitSpec`] (document, script,
//! ground truth); a candidate script is executed ([`script`]), validated and
//! checked structurally and semantically ([`verifier`]), evaluated functionally
//! ([`logic`], [`graph`]) and the level scores are combined into a reward.

pub mod anneal;
pub mod generate;
pub mod graph;
pub mod logic;
pub mod model;
pub mod refine;
pub mod rng;
pub mod script;
pub mod tasks;
pub mod verifier;

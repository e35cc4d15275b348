//! On-disk circuit directories and per-type generation helpers.

use anyhow::{bail, Context, Result};
use gencircuit::generate::{generate_cascaded, generate_circuit, is_degenerate, GateKind, GenParams};
use gencircuit::model::{
    deserialize_document, serialize_document, CircuitSpec, CircuitType, FflType, PartsLibrary, SpecRecord, TruthTable,
};
use gencircuit::rng::{mix, SplitMix64};
use std::fs;
use std::path::{Path, PathBuf};

pub const DOCUMENT_FILE: &str = "document.gcd";
pub const SCRIPT_FILE: &str = "script.gcs";
pub const RECORD_FILE: &str = "record.json";

/// Options shared by every generated circuit of one run.
#[derive(Debug, Clone, Default)]
pub struct TypeOptions {
    pub gate: Option<GateKind>,
    pub ffl: Option<FflType>,
    pub ring: Option<usize>,
    /// Cascade function as a truth-table mask over `inputs` inputs.
    pub function: Option<u64>,
    pub inputs: usize,
    pub gate_budget: usize,
}

/// Cascades draw a random non-degenerate function unless one is given and
/// retry with fresh seeds until gate assignment succeeds.
pub fn generate_typed(t: CircuitType, seed: u64, opts: &TypeOptions, lib: &PartsLibrary) -> Result<CircuitSpec> {
    if t != CircuitType::Cascade {
        let params = GenParams { gate: opts.gate, ffl: opts.ffl, ring: opts.ring, ..GenParams::new(t, seed) };
        return generate_circuit(&params, lib).with_context(|| format!("generating {t} with seed {seed}"));
    }
    let n = opts.inputs;
    let rows = 1u64 << n;
    let mut last = None;
    for attempt in 0..64 {
        let mut rng = SplitMix64::new(mix(seed, attempt));
        let mask = match opts.function {
            Some(m) => m,
            None => loop {
                let m = rng.next_u64() & ((1u64 << rows) - 1);
                if !is_degenerate(n, m as u32) {
                    break m;
                }
            },
        };
        let names = (0..n).map(|i| format!("x{i}")).collect();
        let table = TruthTable::from_mask(names, "y", mask);
        match generate_cascaded(&table, lib, rng.next_u64(), opts.gate_budget) {
            Ok(spec) => return Ok(spec),
            Err(e) => last = Some(e),
        }
    }
    bail!("no cascade could be realized for seed {seed}: {}", last.unwrap())
}

pub fn circuit_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("circuit_{index:04}"))
}

pub fn write_circuit(dir: &Path, spec: &CircuitSpec) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join(DOCUMENT_FILE), serialize_document(&spec.document))?;
    fs::write(dir.join(SCRIPT_FILE), &spec.script)?;
    fs::write(dir.join(RECORD_FILE), to_json(&spec.record())?)?;
    Ok(())
}

pub fn read_circuit(dir: &Path) -> Result<CircuitSpec> {
    let read = |name: &str| fs::read(dir.join(name)).with_context(|| format!("reading {}", dir.join(name).display()));
    let record: SpecRecord = serde_json::from_slice(&read(RECORD_FILE)?).context("parsing circuit record")?;
    let document = deserialize_document(&read(DOCUMENT_FILE)?).context("parsing circuit document")?;
    let script = String::from_utf8(read(SCRIPT_FILE)?).context("script is not UTF-8")?;
    Ok(CircuitSpec::from_record(record, document, script))
}

/// Circuit directories under `root`, sorted by name.
pub fn list_circuits(root: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .with_context(|| format!("reading {}", root.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join(RECORD_FILE).exists())
        .collect();
    dirs.sort();
    Ok(dirs)
}

pub fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

//! `gencircuit` command-line front end.
//!
//! Exit codes: 0 on success (including low scores), 1 on domain errors,
//! 2 on usage errors.

mod commands;
mod store;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "gencircuit", version, about = "Generate, verify and score genetic-circuit benchmarks")]
pub struct Cli {
    /// Seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for batch work (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// JSON file of default flags per subcommand, e.g. {"refine": {"pool": 500}}.
    /// Flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate circuits of one type, or a class-balanced dataset.
    Generate(GenerateArgs),
    /// Run the five verification levels on a circuit directory.
    Verify(VerifyArgs),
    /// Score a submission against a task record, or print a circuit's truth table.
    Score(ScoreArgs),
    /// Task success rate, pass@k and generalization gap.
    Metrics(MetricsArgs),
    /// Assign repressors to a NOR topology by simulated annealing.
    Assign(AssignArgs),
    /// Find isomorphic duplicates among generated circuits.
    Dedup(DedupArgs),
    /// Pool-based refinement with the surrogate scorer.
    Refine(RefineArgs),
    /// Build task instances from generated circuits.
    Tasks(TasksArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Circuit type (cassette, not_gate, two_input_gate, toggle, branched, ffl, oscillator, cascade).
    #[arg(long = "type", conflicts_with = "total", required_unless_present = "total")]
    pub circuit_type: Option<String>,
    #[arg(long, default_value_t = 1, conflicts_with = "total")]
    pub count: usize,
    /// Build a dataset of this many circuits with the default class mix and splits.
    #[arg(long)]
    pub total: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Gate for two_input_gate (NOR, AND, OR, NAND).
    #[arg(long)]
    pub gate: Option<String>,
    /// FFL subtype (c1 or i1).
    #[arg(long)]
    pub ffl: Option<String>,
    /// Oscillator ring length.
    #[arg(long)]
    pub ring: Option<usize>,
    /// Cascade function as a hexadecimal truth-table mask.
    #[arg(long)]
    pub function: Option<String>,
    /// Cascade input count.
    #[arg(long, default_value_t = 2)]
    pub inputs: usize,
    #[arg(long, default_value_t = 5)]
    pub gate_budget: usize,
    /// Apply this many random perturbation operators to each circuit.
    #[arg(long, default_value_t = 0)]
    pub perturb: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub circuit: PathBuf,
    /// Verify this script against the circuit instead of its own.
    #[arg(long)]
    pub candidate: Option<PathBuf>,
    /// Curriculum stage whose weights combine the levels.
    #[arg(long, default_value_t = 4, conflicts_with = "weights")]
    pub stage: u8,
    /// Five comma-separated level weights.
    #[arg(long, value_delimiter = ',', num_args = 5)]
    pub weights: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long, requires = "submission", conflicts_with = "truth_table", required_unless_present = "truth_table")]
    pub task: Option<PathBuf>,
    #[arg(long)]
    pub submission: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub stage: u8,
    /// Print the symbolic truth table of a circuit directory with per-row margins.
    #[arg(long)]
    pub truth_table: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Whitespace columns `problem split reward tau` per line.
    #[arg(long, conflicts_with_all = ["n", "c"], required_unless_present = "n")]
    pub results: Option<PathBuf>,
    /// Pass@k values to report.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5, 10])]
    pub k: Vec<usize>,
    /// Samples per problem for a direct pass@k evaluation.
    #[arg(long, requires = "c")]
    pub n: Option<usize>,
    /// Correct samples for a direct pass@k evaluation.
    #[arg(long, requires = "n")]
    pub c: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AssignArgs {
    /// Topology JSON; synthesized from the truth table when absent.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// Lines `hill <gate> <y_min> <y_max> <K> <n>`; training repressors when absent.
    #[arg(long)]
    pub gates: Option<PathBuf>,
    /// Lines `<input bits> <output bit>` in counting order, or a JSON truth table.
    #[arg(long)]
    pub truth_table: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.995)]
    pub beta: f64,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Also run the exhaustive search and report its optimum.
    #[arg(long)]
    pub exhaustive: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DedupMode {
    PartAware,
    RoleLabeled,
}

#[derive(Args, Debug)]
pub struct DedupArgs {
    /// Directory of generated circuits.
    pub dir: PathBuf,
    #[arg(long, value_enum, default_value_t = DedupMode::PartAware)]
    pub mode: DedupMode,
}

#[derive(Args, Debug)]
pub struct RefineArgs {
    /// Surrogate weights file; seeded random weights when absent.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub pool: usize,
    #[arg(long, default_value_t = 0.15)]
    pub elite: f64,
    #[arg(long, default_value_t = 0.3)]
    pub mutation: f64,
    #[arg(long, default_value_t = 0.10)]
    pub fresh: f64,
    #[arg(long, default_value_t = 8)]
    pub iterations: usize,
    #[arg(long, default_value_t = 20.0)]
    pub fc_target: f64,
    /// Fold-change sigmoid scale (default fc_target / 5).
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub b_scale: f64,
    /// Write the weights used to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TasksArgs {
    /// Task kind (t1..t9, masked_part, masked_type, masked_function, denovo_iso);
    /// sampled from the curriculum stage when absent.
    #[arg(long)]
    pub kind: Option<String>,
    /// Restrict to one circuit type.
    #[arg(long = "type")]
    pub circuit_type: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub stage: u8,
    #[arg(long)]
    pub out: PathBuf,
}

/// Post-parse validation failure; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Splices flags from `--config` in right after the subcommand name so that
/// later command-line flags override them.
fn with_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let pos = argv.iter().position(|a| a == "--config");
    let path = match pos.and_then(|p| argv.get(p + 1)) {
        Some(p) => PathBuf::from(p),
        None => return Ok(argv),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("config {}: {e}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))?;
    let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let Some(sub_at) = argv.iter().position(|a| names.iter().any(|n| a == n.as_str())) else { return Ok(argv) };
    let sub = argv[sub_at].to_string_lossy().into_owned();
    let mut extra = Vec::new();
    if let Some(flags) = value.get(&sub).and_then(|v| v.as_object()) {
        for (k, v) in flags {
            let flag = format!("--{}", k.replace('_', "-"));
            match v {
                serde_json::Value::Bool(true) => extra.push(flag.into()),
                serde_json::Value::Bool(false) | serde_json::Value::Null => {}
                serde_json::Value::String(s) => extra.extend([flag.into(), s.into()]),
                serde_json::Value::Array(xs) => {
                    let joined: Vec<String> = xs.iter().map(|x| x.to_string().trim_matches('"').to_string()).collect();
                    extra.extend([flag.into(), joined.join(",").into()]);
                }
                other => extra.extend([flag.into(), other.to_string().into()]),
            }
        }
    } else if !value.is_object() {
        return Err(format!("config {}: expected an object keyed by subcommand", path.display()));
    }
    let mut out = argv[..=sub_at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub_at + 1..]);
    Ok(out)
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match with_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let matches = match Cli::command().args_override_self(true).try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}\n\n{}", Cli::command().render_usage());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

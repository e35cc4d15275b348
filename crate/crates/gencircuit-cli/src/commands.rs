//! Subcommand implementations. Everything machine-readable goes to stdout as
//! `key value` lines or whitespace columns; diagnostics go to stderr.

use crate::store::{self, TypeOptions};
use crate::{usage, AssignArgs, Cli, Command, DedupArgs, DedupMode, GenerateArgs, MetricsArgs, RefineArgs, ScoreArgs};
use crate::{TasksArgs, VerifyArgs};
use anyhow::{anyhow, bail, Context, Result};
use gencircuit::anneal::{assign_with_restarts, exhaustive_assign, training_gate_library, AnnealSchedule, GateLibrary};
use gencircuit::generate::{build_dataset, deduplicate, perturb_random, synthesize_nor_network, DatasetConfig, MAX_GATES};
use gencircuit::graph::IsoMode;
use gencircuit::logic::{circuit_truth_table, GateTopology, SensorLevels, OFF_THRESHOLD, ON_THRESHOLD};
use gencircuit::model::{input_vectors, CircuitSpec, CircuitType, FflType, HillParams, PartsLibrary, TruthRow, TruthTable};
use gencircuit::refine::{
    refine_pool, DesignSpace, RefineConfig, RefineError, RewardThresholds, SurrogateWeights, SyntheticScorer,
    CATEGORY_NAMES,
};
use gencircuit::rng::{mix, SplitMix64};
use gencircuit::tasks::{
    cascade_rows, make_task, pass_at_k, reference_submission, sample_task_type, total_reward, tsr, delta_gen,
    CurriculumState, Outcome, TaskInstance, TaskKind,
};
use gencircuit::verifier::{evaluate_script, functional_score};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub fn run(cli: &Cli) -> Result<()> {
    let lib = PartsLibrary::builtin();
    let out = match &cli.command {
        Command::Generate(a) => generate(cli.seed, a, &lib)?,
        Command::Verify(a) => verify(a, &lib)?,
        Command::Score(a) => score(a, &lib)?,
        Command::Metrics(a) => metrics(a)?,
        Command::Assign(a) => assign(cli.seed, a, &lib)?,
        Command::Dedup(a) => dedup(a)?,
        Command::Refine(a) => refine(cli.seed, a)?,
        Command::Tasks(a) => tasks(cli.seed, a, &lib)?,
    };
    print!("{out}");
    Ok(())
}

fn parse_type(s: &str) -> Result<CircuitType> {
    s.parse().map_err(|e: String| usage(e))
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

fn type_options(a: &GenerateArgs, t: CircuitType) -> Result<TypeOptions> {
    let only = |flag: &str, set: bool, want: CircuitType| {
        if set && t != want {
            Err(usage(format!("--{flag} only applies to {want} circuits")))
        } else {
            Ok(())
        }
    };
    only("gate", a.gate.is_some(), CircuitType::TwoInputGate)?;
    only("ffl", a.ffl.is_some(), CircuitType::Ffl)?;
    only("ring", a.ring.is_some(), CircuitType::Oscillator)?;
    only("function", a.function.is_some(), CircuitType::Cascade)?;
    let gate = a.gate.as_deref().map(|g| g.parse().map_err(|e: String| usage(e))).transpose()?;
    let ffl = match a.ffl.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None => None,
        Some("c1") => Some(FflType::C1),
        Some("i1") => Some(FflType::I1),
        Some(other) => return Err(usage(format!("unknown FFL subtype `{other}` (c1 or i1)"))),
    };
    if !(1..=4).contains(&a.inputs) {
        return Err(usage("--inputs must be between 1 and 4"));
    }
    let function = match &a.function {
        None => None,
        Some(h) => {
            let m = u64::from_str_radix(h.trim_start_matches("0x"), 16).map_err(|_| usage(format!("bad mask `{h}`")))?;
            if m >> (1u64 << a.inputs) != 0 {
                return Err(usage(format!("mask {h} has bits beyond {} rows", 1 << a.inputs)));
            }
            Some(m)
        }
    };
    Ok(TypeOptions { gate, ffl, ring: a.ring, function, inputs: a.inputs, gate_budget: a.gate_budget })
}

fn generate(seed: u64, a: &GenerateArgs, lib: &PartsLibrary) -> Result<String> {
    if let Some(total) = a.total {
        return generate_dataset(seed, total, a, lib);
    }
    let t = parse_type(a.circuit_type.as_deref().unwrap())?;
    let opts = type_options(a, t)?;
    if a.count == 0 {
        return Err(usage("--count must be positive"));
    }
    let specs: Vec<CircuitSpec> = (0..a.count)
        .into_par_iter()
        .map(|i| {
            let s = mix(seed, i as u64);
            let spec = store::generate_typed(t, s, &opts, lib)?;
            if a.perturb == 0 {
                return Ok(spec);
            }
            perturb_random(&spec, a.perturb, mix(s, u64::MAX), lib).with_context(|| format!("perturbing circuit {i}"))
        })
        .collect::<Result<_>>()?;

    let mut out = String::new();
    let mut entries = Vec::new();
    let (mut kappa_hist, mut classes) = (BTreeMap::new(), BTreeMap::new());
    for (i, spec) in specs.iter().enumerate() {
        let dir = store::circuit_dir(&a.out, i);
        store::write_circuit(&dir, spec)?;
        let name = dir.file_name().unwrap().to_string_lossy().into_owned();
        let class = spec.kappa.class().token();
        *kappa_hist.entry(spec.kappa.to_string()).or_insert(0usize) += 1;
        *classes.entry(class).or_insert(0usize) += 1;
        let _ = writeln!(out, "{name} {} {} {class}", spec.circuit_type, spec.kappa);
        entries.push(serde_json::json!({ "dir": name, "type": spec.circuit_type, "kappa": spec.kappa.to_string(), "class": class }));
    }
    let manifest = serde_json::json!({
        "seed": seed,
        "type": t,
        "count": a.count,
        "perturbation_steps": a.perturb,
        "class_counts": classes,
        "kappa_histogram": kappa_hist,
        "circuits": entries,
    });
    fs::write(a.out.join("manifest.json"), store::to_json(&manifest)?)?;
    Ok(out)
}

fn generate_dataset(seed: u64, total: usize, a: &GenerateArgs, lib: &PartsLibrary) -> Result<String> {
    if total == 0 {
        return Err(usage("--total must be positive"));
    }
    if a.gate.is_some() || a.ffl.is_some() || a.ring.is_some() || a.function.is_some() || a.perturb > 0 {
        return Err(usage("type options cannot be combined with --total"));
    }
    let config = DatasetConfig { total, gate_budget: a.gate_budget, ..DatasetConfig::default() };
    let data = build_dataset(&config, lib, seed)?;
    let mut entries = Vec::new();
    let mut out = String::new();
    for (i, (spec, split)) in data.circuits.iter().zip(&data.assignment).enumerate() {
        let dir = store::circuit_dir(&a.out, i);
        store::write_circuit(&dir, spec)?;
        let name = dir.file_name().unwrap().to_string_lossy().into_owned();
        let class = spec.kappa.class().token();
        let _ = writeln!(out, "{name} {} {} {class} {}", spec.circuit_type, spec.kappa, split.token());
        entries.push(serde_json::json!({ "dir": name, "type": spec.circuit_type, "class": class, "split": split.token() }));
    }
    let mut manifest = serde_json::to_value(&data.manifest)?;
    manifest["circuits"] = serde_json::Value::Array(entries);
    fs::write(a.out.join("manifest.json"), store::to_json(&manifest)?)?;
    for (class, missing) in &data.manifest.shortfall {
        eprintln!("warning: {missing} {class} circuits could not be generated");
    }
    Ok(out)
}

fn verify(a: &VerifyArgs, lib: &PartsLibrary) -> Result<String> {
    let weights = match &a.weights {
        Some(w) => [w[0], w[1], w[2], w[3], w[4]],
        None => CurriculumState::new(a.stage).map_err(|e| usage(e.to_string()))?.weights(),
    };
    let spec = store::read_circuit(&a.circuit)?;
    let script = match &a.candidate {
        Some(p) => store::read_text(p)?,
        None => spec.script.clone(),
    };
    let ev = evaluate_script(&script, spec.expected, lib);
    let f_task = ev.document.as_ref().map_or(0.0, |d| functional_score(&spec, d, lib));
    let b = ev.reward(f_task, weights).map_err(|e| usage(e.to_string()))?;

    let mut out = String::new();
    let _ = writeln!(out, "circuit {}", a.circuit.display());
    let _ = writeln!(out, "type {}", spec.circuit_type);
    let _ = writeln!(out, "level1_exec {}", ev.exec());
    if let Some(e) = &ev.exec_error {
        let _ = writeln!(out, "exec_error line {} {:?} {}", e.line, e.kind, e.message);
    }
    let _ = writeln!(out, "level2_valid {}", ev.valid());
    for d in ev.validity.iter().flat_map(|v| &v.diagnostics) {
        let _ = writeln!(out, "validity_diagnostic {d}");
    }
    for (label, report) in [("level3_struct", &ev.structural), ("level4_sem", &ev.semantic)] {
        let _ = writeln!(out, "{label} {}", report.as_ref().map_or(0.0, |r| r.score));
        for c in report.iter().flat_map(|r| &r.checks) {
            let status = if c.passed { "pass" } else { "fail" };
            let _ = writeln!(out, "check {label} c{} {status} {}", c.check_id, c.detail);
        }
    }
    let _ = writeln!(out, "f_task {f_task}");
    write_breakdown(&mut out, &b);
    Ok(out)
}

fn write_breakdown(out: &mut String, b: &gencircuit::verifier::RewardBreakdown) {
    for (k, v) in [
        ("r_exec", b.r_exec),
        ("r_valid", b.r_valid),
        ("r_struct", b.r_struct),
        ("r_sem", b.r_sem),
        ("r_func", b.r_func),
        ("total", b.total),
    ] {
        let _ = writeln!(out, "{k} {v}");
    }
    let w: Vec<String> = b.weights.iter().map(|x| x.to_string()).collect();
    let _ = writeln!(out, "weights {}", w.join(","));
}

fn score(a: &ScoreArgs, lib: &PartsLibrary) -> Result<String> {
    if let Some(dir) = &a.truth_table {
        return truth_table_report(dir, lib);
    }
    let state = CurriculumState::new(a.stage).map_err(|e| usage(e.to_string()))?;
    let task_path = a.task.as_ref().unwrap();
    let task: TaskInstance =
        serde_json::from_str(&store::read_text(task_path)?).with_context(|| format!("parsing {}", task_path.display()))?;
    let submission = store::read_text(a.submission.as_ref().unwrap())?;
    let r = total_reward(&task, &submission, &state, lib);
    let mut out = String::new();
    let _ = writeln!(out, "task {}", r.task);
    let _ = writeln!(out, "f_task {}", r.breakdown.f_task);
    write_breakdown(&mut out, &r.breakdown);
    let _ = writeln!(out, "tau {}", r.tau);
    let _ = writeln!(out, "success {}", r.success);
    for d in &r.diagnostics {
        let _ = writeln!(out, "diagnostic {d}");
    }
    Ok(out)
}

fn truth_table_report(dir: &Path, lib: &PartsLibrary) -> Result<String> {
    let spec = store::read_circuit(dir)?;
    let want = spec
        .ground_truth
        .truth_table
        .as_ref()
        .ok_or_else(|| anyhow!("{} circuits have no steady-state truth table", spec.circuit_type))?;
    let got = circuit_truth_table(&spec.document, lib, &want.inputs, &want.outputs)?;
    let numeric = cascade_rows(&spec, &spec.document, lib);
    let mut out = String::new();
    let _ = writeln!(out, "inputs {}", want.inputs.join(" "));
    let _ = writeln!(out, "outputs {}", want.outputs.join(" "));
    let _ = writeln!(out, "# inputs symbolic expected rpu numeric margin");
    for (r, (g, w)) in got.rows.iter().zip(&want.rows).enumerate() {
        let (rpu, num, margin) = match numeric.as_ref().map(|rows| &rows[r]) {
            Some(row) => {
                let rpu = row.rpu.map_or("-".into(), |v| format!("{v:.6}"));
                let num = row.numeric.map_or("-".into(), |b| (b as u8).to_string());
                let margin = row.rpu.map_or("-".into(), |v| {
                    format!("{:.6}", if row.expected { v - ON_THRESHOLD } else { OFF_THRESHOLD - v })
                });
                (rpu, num, margin)
            }
            None => ("-".into(), "-".into(), "-".into()),
        };
        let _ = writeln!(out, "row {} {} {} {rpu} {num} {margin}", bits(&g.inputs), bits(&g.outputs), bits(&w.outputs));
    }
    let agree = got.rows == want.rows;
    let _ = writeln!(out, "matches {agree}");
    Ok(out)
}

fn metrics(a: &MetricsArgs) -> Result<String> {
    if a.k.contains(&0) {
        return Err(usage("--k values must be positive"));
    }
    let mut out = String::new();
    if let (Some(n), Some(c)) = (a.n, a.c) {
        for &k in &a.k {
            let _ = writeln!(out, "pass@{k} {}", pass_at_k(n, c, k)?);
        }
        return Ok(out);
    }
    let path = a.results.as_ref().unwrap();
    let text = store::read_text(path)?;
    // problem -> split and outcomes
    let mut problems: BTreeMap<String, (String, Vec<Outcome>)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let [problem, split, reward, tau] = cols[..] else {
            bail!("{} line {}: expected `problem split reward tau`", path.display(), i + 1);
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| anyhow!("{} line {}: bad number `{s}`", path.display(), i + 1));
        let o = Outcome { reward: num(reward)?, tau: num(tau)? };
        let entry = problems.entry(problem.to_string()).or_insert_with(|| (split.to_string(), Vec::new()));
        if entry.0 != split {
            bail!("{} line {}: problem `{problem}` appears in two splits", path.display(), i + 1);
        }
        entry.1.push(o);
    }
    let all: Vec<Outcome> = problems.values().flat_map(|(_, o)| o.iter().copied()).collect();
    let _ = writeln!(out, "samples {}", all.len());
    let _ = writeln!(out, "problems {}", problems.len());
    let _ = writeln!(out, "tsr {}", tsr(&all)?);
    let mut by_split: BTreeMap<&str, Vec<Outcome>> = BTreeMap::new();
    for (split, o) in problems.values() {
        by_split.entry(split.as_str()).or_default().extend(o);
    }
    let mut split_tsr = BTreeMap::new();
    for (split, o) in &by_split {
        let v = tsr(o)?;
        split_tsr.insert(*split, v);
        let _ = writeln!(out, "tsr.{split} {v}");
    }
    for &k in &a.k {
        let vals: Vec<f64> = problems
            .values()
            .filter(|(_, o)| o.len() >= k)
            .map(|(_, o)| pass_at_k(o.len(), o.iter().filter(|x| x.success()).count(), k))
            .collect::<Result<_, _>>()?;
        if vals.is_empty() {
            let _ = writeln!(out, "pass@{k} - 0");
        } else {
            let _ = writeln!(out, "pass@{k} {} {}", vals.iter().sum::<f64>() / vals.len() as f64, vals.len());
        }
    }
    if let (Some(p), Some(r)) = (split_tsr.get("procedural"), split_tsr.get("real")) {
        let _ = writeln!(out, "delta_gen {}", delta_gen(*p, *r));
    }
    Ok(out)
}

fn parse_table(text: &str) -> Result<TruthTable> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).context("parsing truth-table JSON");
    }
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let parse_bits = |s: &str| -> Result<Vec<bool>> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(anyhow!("truth table line {}: bad bit `{c}`", i + 1)),
                })
                .collect()
        };
        let cols: Vec<&str> = line.split_whitespace().collect();
        let [ins, outs] = cols[..] else { bail!("truth table line {}: expected `<inputs> <output>`", i + 1) };
        rows.push(TruthRow { inputs: parse_bits(ins)?, outputs: parse_bits(outs)? });
    }
    let n = rows.first().map_or(0, |r| r.inputs.len());
    if n == 0 || rows.iter().map(|r| r.inputs.clone()).ne(input_vectors(n)) || rows.iter().any(|r| r.outputs.len() != 1) {
        bail!("truth table must list all {} input states in counting order with one output bit", 1usize << n.max(1));
    }
    Ok(TruthTable { inputs: (0..n).map(|i| format!("x{i}")).collect(), outputs: vec!["y".into()], rows })
}

fn parse_gates(text: &str) -> Result<GateLibrary> {
    let mut lib = GateLibrary::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let ["hill", name, rest @ ..] = &cols[..] else { bail!("gates line {}: expected `hill <gate> ...`", i + 1) };
        let v: Vec<f64> = rest.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(|_| anyhow!("gates line {}: bad number", i + 1))?;
        let [y_min, y_max, k, n] = v[..] else { bail!("gates line {}: expected 4 parameters", i + 1) };
        let p = HillParams::new(y_min, y_max, k, n).map_err(|e| anyhow!("gates line {}: {e}", i + 1))?;
        if lib.insert(name.to_string(), p).is_some() {
            bail!("gates line {}: duplicate gate `{name}`", i + 1);
        }
    }
    Ok(lib)
}

fn assign(seed: u64, a: &AssignArgs, lib: &PartsLibrary) -> Result<String> {
    let schedule = AnnealSchedule { t0: a.t0, beta: a.beta, iters: a.iters, seed, injective: true };
    schedule.check().map_err(|e| usage(e.to_string()))?;
    let table = parse_table(&store::read_text(&a.truth_table)?)?;
    let topo: GateTopology = match &a.topology {
        Some(p) => serde_json::from_str(&store::read_text(p)?).context("parsing topology JSON")?,
        None => synthesize_nor_network(&table, MAX_GATES)?,
    };
    topo.validate()?;
    let gates = match &a.gates {
        Some(p) => parse_gates(&store::read_text(p)?)?,
        None => training_gate_library(lib),
    };
    let levels = SensorLevels::default();
    let res = assign_with_restarts(&topo, &gates, &table, levels, &schedule, a.restarts)?;
    let mut out = String::new();
    for (node, gate) in &res.assignment {
        let _ = writeln!(out, "assign {node} {gate}");
    }
    let s = &res.score;
    let _ = writeln!(out, "min_on {}", s.min_on);
    let _ = writeln!(out, "max_off {}", s.max_off);
    let _ = writeln!(out, "objective {}", s.objective);
    let _ = writeln!(out, "meets_margins {}", s.meets_margins);
    let _ = writeln!(out, "success {}", res.success);
    if let (Some(first), Some(last)) = (res.trace.first(), res.trace.last()) {
        let _ = writeln!(out, "trace {} {first} {last}", res.trace.len());
    }
    if a.exhaustive {
        let (_, best) = exhaustive_assign(&topo, &gates, &table, levels, true)?;
        let _ = writeln!(out, "oracle_objective {}", best.objective);
        let hit = best.objective == s.objective || (best.objective - s.objective).abs() <= 1e-9;
        let _ = writeln!(out, "oracle_match {hit}");
    }
    Ok(out)
}

fn dedup(a: &DedupArgs) -> Result<String> {
    let dirs = store::list_circuits(&a.dir)?;
    let specs: Vec<CircuitSpec> = dirs.par_iter().map(|d| store::read_circuit(d)).collect::<Result<_>>()?;
    let mode = match a.mode {
        DedupMode::PartAware => IsoMode::PartAware,
        DedupMode::RoleLabeled => IsoMode::RoleLabeled,
    };
    let res = deduplicate(&specs, mode);
    let name = |i: usize| dirs[i].file_name().unwrap().to_string_lossy().into_owned();
    let mut out = String::new();
    for (dup, keeper) in &res.removed_pairs {
        let _ = writeln!(out, "duplicate {} of {}", name(*dup), name(*keeper));
    }
    let _ = writeln!(out, "kept {}", res.kept.len());
    let _ = writeln!(out, "removed {}", res.removed_pairs.len());
    Ok(out)
}

fn refine(seed: u64, a: &RefineArgs) -> Result<String> {
    if !(a.fc_target > 0.0) || !(a.b_scale > 0.0) || a.s.is_some_and(|s| !(s > 0.0)) {
        return Err(usage("--fc-target, --s and --b-scale must be positive"));
    }
    let config = RefineConfig {
        pool_size: a.pool,
        elite_frac: a.elite,
        mutation_rate: a.mutation,
        fresh_frac: a.fresh,
        iterations: a.iterations,
        seed,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let weights = match &a.weights {
        Some(p) => SurrogateWeights::parse(&store::read_text(p)?).with_context(|| format!("loading {}", p.display()))?,
        None => SurrogateWeights::random(mix(seed, 0x5eed)),
    };
    let mut thresholds = RewardThresholds::new(a.fc_target);
    thresholds.b_scale = a.b_scale;
    if let Some(s) = a.s {
        thresholds.s = s;
    }
    let scorer = SyntheticScorer::new(weights, thresholds);
    let res = refine_pool(&config, |c| scorer.score(c), &DesignSpace::classic()).map_err(|e| match e {
        RefineError::Config(m) => usage(m),
        e => e.into(),
    })?;
    let mut out = String::from("iter mean_score elite_mean best\n");
    for h in &res.history {
        let _ = writeln!(out, "{} {:.6} {:.6} {:.6}", h.iter, h.mean_score, h.elite_mean, h.best);
    }
    let parts: Vec<String> = CATEGORY_NAMES.iter().zip(res.best.choices()).map(|(n, c)| format!("{n}={c}")).collect();
    let _ = writeln!(out, "best_composition {}", parts.join(" "));
    let (basal, induced) = scorer.expression(&res.best)?;
    let _ = writeln!(out, "best_basal {basal:.6}");
    let _ = writeln!(out, "best_induced {induced:.6}");
    if let Some(p) = &a.out {
        fs::write(p, scorer.weights.to_text()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(out)
}

fn tasks(seed: u64, a: &TasksArgs, lib: &PartsLibrary) -> Result<String> {
    let state = CurriculumState::new(a.stage).map_err(|e| usage(e.to_string()))?;
    let kind: Option<TaskKind> = a.kind.as_deref().map(|k| k.parse().map_err(|e: String| usage(e))).transpose()?;
    let only: Option<CircuitType> = a.circuit_type.as_deref().map(parse_type).transpose()?;
    if let (Some(k), Some(t)) = (kind, only) {
        if !k.applies_to(t) {
            return Err(usage(format!("task {k} does not apply to {t} circuits")));
        }
    }
    if a.count == 0 {
        return Err(usage("--count must be positive"));
    }
    let opts = TypeOptions { inputs: 2, gate_budget: 5, ..TypeOptions::default() };
    let built: Vec<TaskInstance> = (0..a.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitMix64::new(mix(seed, i as u64));
            for _ in 0..200 {
                let k = kind.unwrap_or_else(|| sample_task_type(&state, &mut rng));
                let types: Vec<CircuitType> =
                    CircuitType::ALL.into_iter().filter(|t| k.applies_to(*t) && only.is_none_or(|o| o == *t)).collect();
                if types.is_empty() {
                    continue;
                }
                let t = *rng.pick(&types);
                let Ok(spec) = store::generate_typed(t, rng.next_u64(), &opts, lib) else { continue };
                if let Ok(task) = make_task(&spec, k, rng.next_u64(), lib) {
                    return Ok(task);
                }
            }
            bail!("could not build task {i} after 200 attempts")
        })
        .collect::<Result<_>>()?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut out = String::new();
    let mut index = Vec::new();
    for (i, task) in built.iter().enumerate() {
        let stem = format!("task_{i:04}");
        fs::write(a.out.join(format!("{stem}.json")), store::to_json(task)?)?;
        fs::write(a.out.join(format!("{stem}.prompt.txt")), task.prompt())?;
        fs::write(a.out.join(format!("{stem}.answer.txt")), reference_submission(task))?;
        let _ = writeln!(out, "{stem} {} {} {}", task.task, task.circuit_type, task.tau);
        index.push(serde_json::json!({ "file": format!("{stem}.json"), "task": task.task, "type": task.circuit_type }));
    }
    let manifest = serde_json::json!({ "seed": seed, "stage": a.stage, "count": a.count, "tasks": index });
    fs::write(a.out.join("tasks.json"), store::to_json(&manifest)?)?;
    Ok(out)
}

use gencircuit::generate::{generate_cascaded, generate_circuit, GateKind, GenError, GenParams};
use gencircuit::graph::{detect_motifs, extract_regulatory_graph};
use gencircuit::logic::eval_truth_table;
use gencircuit::model::{CircuitSpec, CircuitType, FflType, OscillationExpectation, PartsLibrary, TruthTable};
use gencircuit::verifier::{evaluate_script, functional_score};

fn self_verify(spec: &CircuitSpec, lib: &PartsLibrary) -> Result<(), String> {
    let ev = evaluate_script(&spec.script, spec.expected, lib);
    let levels = [ev.exec(), ev.valid(), ev.structural_score(), ev.semantic_score()];
    if levels != [1.0; 4] {
        return Err(format!("levels {levels:?}: {ev:?}"));
    }
    let f = functional_score(spec, ev.document.as_ref().unwrap(), lib);
    if f != 1.0 {
        return Err(format!("f_task = {f}"));
    }
    Ok(())
}

#[test]
fn every_type_self_verifies() {
    let lib = PartsLibrary::builtin();
    for t in CircuitType::ALL {
        if t == CircuitType::Cascade {
            continue;
        }
        for seed in 0..40 {
            let spec = generate_circuit(&GenParams::new(t, seed), &lib).unwrap();
            self_verify(&spec, &lib).unwrap_or_else(|e| panic!("{t} seed {seed}: {e}\n{}", spec.script));
        }
    }
}

#[test]
fn cascades_self_verify() {
    let lib = PartsLibrary::builtin();
    let names = |n: usize| (0..n).map(|i| format!("x{i}")).collect::<Vec<_>>();
    // (a | b) & !c fits in two gates
    for (n, mask) in [(2, 0b0111u64), (2, 0b1000), (2, 0b1001), (2, 0b0010), (3, 0x54)] {
        let table = TruthTable::from_mask(names(n), "y", mask);
        let spec = generate_cascaded(&table, &lib, 3, 8).unwrap_or_else(|e| panic!("{mask:#x}: {e}"));
        self_verify(&spec, &lib).unwrap_or_else(|e| panic!("{mask:#x}: {e}"));
    }
    // majority and parity need more repressors than the library characterizes
    for mask in [0xe8u64, 0x16, 0x7e] {
        let table = TruthTable::from_mask(names(3), "y", mask);
        let err = generate_cascaded(&table, &lib, 3, 8).unwrap_err();
        assert!(matches!(err, GenError::Capacity(_) | GenError::Budget(_)), "{mask:#x}: {err}");
    }
}

#[test]
fn nand2_cascade_depth() {
    let lib = PartsLibrary::builtin();
    let t = TruthTable::from_mask(vec!["a".into(), "b".into()], "y", 0b0111);
    let spec = generate_cascaded(&t, &lib, 1, 8).unwrap();
    assert_eq!(spec.kappa.d, 3);
    assert_eq!(spec.ground_truth.topology.as_ref().unwrap().gates().len(), 4);
}

#[test]
fn majority_cascade_is_deep() {
    let lib = PartsLibrary::builtin();
    let names = vec!["a".into(), "b".into(), "c".into()];
    let t = TruthTable::from_fn(names, vec!["y".into()], |v| vec![v.iter().filter(|b| **b).count() >= 2]);
    match generate_cascaded(&t, &lib, 2, 8) {
        Ok(spec) => assert!(spec.kappa.d >= 3),
        Err(e) => eprintln!("majority cascade: {e}"),
    }
}

#[test]
fn constant_function_rejected() {
    let lib = PartsLibrary::builtin();
    let t = TruthTable::from_mask(vec!["a".into(), "b".into()], "y", 0b1111);
    assert!(generate_cascaded(&t, &lib, 1, 8).is_err());
}

#[test]
fn gate_truth_tables() {
    let lib = PartsLibrary::builtin();
    for gate in GateKind::ALL {
        for seed in 0..10 {
            let mut p = GenParams::new(CircuitType::TwoInputGate, seed);
            p.gate = Some(gate);
            let spec = generate_circuit(&p, &lib).unwrap();
            let table = spec.ground_truth.truth_table.as_ref().unwrap();
            for row in &table.rows {
                let inputs = table.inputs.iter().cloned().zip(row.inputs.iter().copied()).collect();
                let out = eval_truth_table(&spec.document, &lib, &inputs).unwrap();
                assert_eq!(out[&table.outputs[0]], gate.eval(row.inputs[0], row.inputs[1]), "{gate} seed {seed}");
            }
        }
    }
}

#[test]
fn oscillator_and_or_examples() {
    let lib = PartsLibrary::builtin();
    let mut p = GenParams::new(CircuitType::Oscillator, 42);
    p.ring = Some(3);
    let spec = generate_circuit(&p, &lib).unwrap();
    assert_eq!(spec.document.leaf_regions().len(), 3);
    assert_eq!(spec.ground_truth.oscillation_expected, Some(OscillationExpectation::Yes));
    let report = detect_motifs(&extract_regulatory_graph(&spec.document).unwrap());
    assert_eq!(report.main_ring().unwrap().length, 3);

    let mut p = GenParams::new(CircuitType::TwoInputGate, 5);
    p.gate = Some(GateKind::Or);
    let spec = generate_circuit(&p, &lib).unwrap();
    assert_eq!(spec.document.leaf_regions().len(), 4);
    assert_eq!(spec.document.interactions().count(), 3);

    let mut p = GenParams::new(CircuitType::Oscillator, 1);
    p.ring = Some(7);
    assert!(generate_circuit(&p, &lib).is_err());
}

#[test]
fn toggle_is_deterministic() {
    let lib = PartsLibrary::builtin();
    let a = generate_circuit(&GenParams::new(CircuitType::Toggle, 99), &lib).unwrap();
    let b = generate_circuit(&GenParams::new(CircuitType::Toggle, 99), &lib).unwrap();
    assert_eq!(a.script, b.script);
    assert_eq!(a.document, b.document);
}

#[test]
fn ffl_types_match_motifs() {
    let lib = PartsLibrary::builtin();
    for t in [FflType::C1, FflType::I1] {
        let mut p = GenParams::new(CircuitType::Ffl, 4);
        p.ffl = Some(t);
        let spec = generate_circuit(&p, &lib).unwrap();
        let report = detect_motifs(&extract_regulatory_graph(&spec.document).unwrap());
        assert_eq!(report.ffls.len(), 1);
        assert_eq!(report.ffls[0].ffl_type, t);
    }
}

use gencircuit::generate::{generate_circuit, GenParams};
use gencircuit::model::{deserialize_document, serialize_document, CircuitType, PartsLibrary};
use gencircuit::script::{emit_script, run_script};
use gencircuit::tasks::STAGE_WEIGHTS;
use gencircuit::verifier::hierarchical_reward;
use proptest::prelude::*;

const TYPES: [CircuitType; 7] = [
    CircuitType::Cassette,
    CircuitType::NotGate,
    CircuitType::TwoInputGate,
    CircuitType::Toggle,
    CircuitType::Branched,
    CircuitType::Ffl,
    CircuitType::Oscillator,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn document_bytes_round_trip(t in 0..TYPES.len(), seed in any::<u64>(), prefix in "[a-z]{1,4}") {
        let lib = PartsLibrary::builtin();
        let spec = generate_circuit(&GenParams::new(TYPES[t], seed), &lib).unwrap();
        for doc in [spec.document.clone(), spec.document.renamed(|id| format!("{prefix}_{id}"))] {
            let bytes = serialize_document(&doc);
            let back = deserialize_document(&bytes).unwrap();
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(serialize_document(&back), bytes);
        }
    }

    #[test]
    fn emitted_script_rebuilds_document(t in 0..TYPES.len(), seed in any::<u64>()) {
        let lib = PartsLibrary::builtin();
        let spec = generate_circuit(&GenParams::new(TYPES[t], seed), &lib).unwrap();
        let rebuilt = run_script(&emit_script(&spec.document)).unwrap();
        prop_assert_eq!(&rebuilt, &spec.document);
        prop_assert_eq!(run_script(&spec.script).unwrap(), rebuilt);
    }

    #[test]
    fn reward_gating(
        exec in prop::bool::ANY,
        valid in prop::bool::ANY,
        s in 0.0..=1.0f64,
        m in 0.0..=1.0f64,
        f in 0.0..=1.0f64,
        stage in 0..4usize,
    ) {
        let r = hierarchical_reward(exec as u8 as f64, valid as u8 as f64, s, m, f, STAGE_WEIGHTS[stage]).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.total));
        prop_assert!(r.r_func <= r.r_struct.min(r.r_sem) + 1e-15);
        prop_assert!(r.r_struct <= r.r_valid && r.r_sem <= r.r_valid && r.r_valid <= r.r_exec);
        if !(exec && valid) || s == 0.0 || m == 0.0 {
            prop_assert_eq!(r.r_func, 0.0);
        }
        if !exec {
            prop_assert_eq!(r.total, 0.0);
        }
    }

    #[test]
    fn scripts_never_panic(t in 0..TYPES.len(), seed in any::<u64>(), cut in any::<prop::sample::Index>(), junk in "[ -~\n]{0,40}") {
        let lib = PartsLibrary::builtin();
        let spec = generate_circuit(&GenParams::new(TYPES[t], seed), &lib).unwrap();
        let at = cut.index(spec.script.len() + 1);
        let at = (0..=at).rev().find(|i| spec.script.is_char_boundary(*i)).unwrap();
        let mangled = format!("{}{junk}{}", &spec.script[..at], &spec.script[at..]);
        let _ = run_script(&mangled);
    }
}

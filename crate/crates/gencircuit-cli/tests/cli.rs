use std::path::Path;
use std::process::{Command, Output};

fn gencircuit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gencircuit")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn generate_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = gencircuit(tmp.path(), &["generate", "--type", "toggle", "--count", "10", "--seed", "42", "--out", out]);
        assert!(o.status.success());
    }
    let a = tree(&tmp.path().join("a"));
    assert_eq!(a.len(), 10 * 3 + 1);
    assert_eq!(a, tree(&tmp.path().join("b")));
}

#[test]
fn jobs_do_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    gencircuit(tmp.path(), &["--jobs", "1", "generate", "--type", "cascade", "--count", "4", "--out", "a"]);
    gencircuit(tmp.path(), &["--jobs", "4", "generate", "--type", "cascade", "--count", "4", "--out", "b"]);
    assert_eq!(tree(&tmp.path().join("a")), tree(&tmp.path().join("b")));
}

#[test]
fn verify_generated_circuit() {
    let tmp = tempfile::tempdir().unwrap();
    gencircuit(tmp.path(), &["generate", "--type", "oscillator", "--count", "4", "--out", "d"]);
    let o = gencircuit(tmp.path(), &["verify", "d/circuit_0003"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for level in ["level1_exec 1", "level2_valid 1", "f_task 1", "total 1"] {
        assert!(text.lines().any(|l| l.starts_with(level)), "missing {level:?} in\n{text}");
    }
}

#[test]
fn empty_submission_scores_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(gencircuit(tmp.path(), &["tasks", "--kind", "t1", "--count", "1", "--out", "t"]).status.success());
    std::fs::write(tmp.path().join("empty.txt"), "").unwrap();
    let o = gencircuit(tmp.path(), &["score", "--task", "t/task_0000.json", "--submission", "empty.txt"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "total 0"), "{}", stdout(&o));

    let o = gencircuit(tmp.path(), &["score", "--task", "t/task_0000.json", "--submission", "t/task_0000.answer.txt"]);
    assert!(stdout(&o).lines().any(|l| l == "success true"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(gencircuit(tmp.path(), &["generate"]).status.code(), Some(2));
    assert_eq!(gencircuit(tmp.path(), &["bogus"]).status.code(), Some(2));
    assert_eq!(gencircuit(tmp.path(), &["generate", "--type", "nonsense", "--out", "x"]).status.code(), Some(2));
    assert_eq!(gencircuit(tmp.path(), &["metrics", "--n", "5", "--c", "7"]).status.code(), Some(1));
    assert_eq!(gencircuit(tmp.path(), &["verify", "missing"]).status.code(), Some(1));
    assert_eq!(gencircuit(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn metrics_direct_pass_at_k() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gencircuit(tmp.path(), &["metrics", "--n", "10", "--c", "3", "--k", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("pass@1 0.3"), "{}", stdout(&o));
}

#[test]
fn config_file_defaults_and_override() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), r#"{"refine": {"pool": 50, "iterations": 2}}"#).unwrap();
    let o = gencircuit(tmp.path(), &["--config", "cfg.json", "refine"]);
    assert!(o.status.success());
    let rows = stdout(&o).lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count();
    assert_eq!(rows, 2);
    let o = gencircuit(tmp.path(), &["--config", "cfg.json", "refine", "--iterations", "3"]);
    let rows = stdout(&o).lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count();
    assert_eq!(rows, 3);
}

#[test]
fn assign_xor_matches_exhaustive() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("xor.tt"), "00 0\n01 1\n10 1\n11 0\n").unwrap();
    let o = gencircuit(tmp.path(), &["assign", "--truth-table", "xor.tt", "--exhaustive", "--restarts", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().any(|l| l == "oracle_match true"), "{}", stdout(&o));
}

#[test]
fn dedup_finds_copied_circuit() {
    let tmp = tempfile::tempdir().unwrap();
    gencircuit(tmp.path(), &["generate", "--type", "toggle", "--count", "2", "--out", "d"]);
    let src = tmp.path().join("d/circuit_0000");
    let dst = tmp.path().join("d/circuit_0002");
    std::fs::create_dir(&dst).unwrap();
    for e in std::fs::read_dir(&src).unwrap() {
        let p = e.unwrap().path();
        std::fs::copy(&p, dst.join(p.file_name().unwrap())).unwrap();
    }
    let o = gencircuit(tmp.path(), &["dedup", "d"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("duplicate"), "{}", stdout(&o));
}

use gencircuit::script::run_script;
use gencircuit::verifier::verify_validity;

fn dsl_example() -> String {
    let readme = include_str!("../../../README.md");
    let start = readme.find("```text\n").unwrap() + "```text\n".len();
    let len = readme[start..].find("```").unwrap();
    readme[start..start + len].to_string()
}

#[test]
fn readme_example_executes_but_is_not_valid() {
    let script = dsl_example();
    assert_eq!(script.lines().count(), 8);
    let doc = run_script(&script).unwrap();
    assert_eq!(doc.components.len(), 2);
    let report = verify_validity(&doc);
    assert!(!report.passed, "{report:?}");
}

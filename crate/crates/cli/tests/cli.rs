use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compath"))
        .args(args)
        .env_remove("OPENPATH_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compose_reproduces_worked_composite() {
    let (m, n) = (fixture("worked_m.json"), fixture("worked_n.json"));
    let expected = std::fs::read_to_string(fixture("worked_composite.json")).unwrap();
    assert_eq!(stdout(&["compose", path(&m), path(&n)]), expected);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let table = stdout(&["compose", path(&m), path(&n), "-o", path(&out)]);
    assert!(table.contains("c~d"));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), expected);
}

#[test]
fn identity_matrix_solves_to_itself() {
    let f = fixture("identity3.json");
    for algo in ["fw", "series", "square"] {
        assert_eq!(stdout(&["solve", path(&f), "--algo", algo]), std::fs::read_to_string(&f).unwrap());
    }
}

#[test]
fn compositional_and_glued_plans_agree() {
    let plan = fixture("chain_plan.json");
    let fast = stdout(&["solve", "--expr", path(&plan), "--mode", "compositional", "--check-oracle"]);
    let glued = stdout(&["solve", "--expr", path(&plan), "--mode", "glued"]);
    assert_eq!(fast, glued);
}

#[test]
fn edgeless_graph_exports_header_only() {
    assert_eq!(stdout(&["export-dot", path(&fixture("edgeless.json"))]), "digraph G {\n}\n");
}

#[test]
fn dot_round_trips_through_graph_format() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    std::fs::write(&dot, stdout(&["export-dot", path(&fixture("loop_g.json"))])).unwrap();
    let graph = dir.path().join("g.json");
    stdout(&["graph", "import-dot", path(&dot), "-o", path(&graph)]);
    assert_eq!(stdout(&["export-dot", path(&graph)]), std::fs::read_to_string(&dot).unwrap());
}

#[test]
fn intro_net_reaches_two_tokens_in_p2() {
    let out = stdout(&["net", "reach", path(&fixture("intro_net.json")), "--marking", "p1 + p2", "--depth", "2"]);
    assert!(out.contains(r#"{"marking": {"p2": 2}, "witness": ["t1", "t2"]}"#), "{out}");
}

#[test]
fn functionality_is_reported() {
    assert_eq!(stdout(&["check-functional", path(&fixture("open_p.json"))]), "functional\n");
    assert_eq!(stdout(&["check-functional", path(&fixture("open_q.json"))]), "not functional\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"quantale\": ").unwrap();

    assert_eq!(code(&["solve"]), 1);
    assert_eq!(code(&["solve", "/definitely/missing.json"]), 1);
    assert_eq!(code(&["graph", "paths", path(&fixture("loop_g.json"))]), 1, "K is required");
    assert_eq!(code(&["solve", path(&bad)]), 2);
    assert_eq!(code(&["compose", path(&fixture("worked_m.json")), path(&fixture("identity3.json"))]), 3);
    assert_eq!(code(&["solve", path(&fixture("worked_m.json")), "--algo", "series", "--max-iters", "1"]), 4);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn generation_is_seeded() {
    let a = stdout(&["gen", "matrix", "--seed", "7"]);
    let b = stdout(&["gen", "matrix", "--seed", "7"]);
    assert_eq!(a, b);

    let dir = tempfile::tempdir().unwrap();
    stdout(&["gen", "pair", "--quantale", "capacity", "--out-dir", path(dir.path())]);
    let (l, r) = (dir.path().join("left.json"), dir.path().join("right.json"));
    let glued = stdout(&["compose", path(&l), path(&r)]);
    assert!(glued.contains("\"quantale\": \"capacity\""));
    stdout(&["binomial-check", path(&l), path(&r), "--max-power", "4"]);
}

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carve-lab")).args(args).output().unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn count_and_bound() {
    let o = run(&["count", "--n", "3", "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains('7'), "{}", stdout(&o));
    let o = run(&["bound", "--widths", "3,1", "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("14"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--n", "x", "--d", "2"]).status.code(), Some(2));
    // multiplicative neurons cannot be carved exactly
    assert_eq!(run(&["carve", "--net", &data("attention.json")]).status.code(), Some(1));
    assert_eq!(run(&["carve", "--net", "/nonexistent/net.json"]).status.code(), Some(1));
}

#[test]
fn carve_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = run(&["carve", "--net", &data("fig1_skip.json"), "--box=-5,5,-5,5", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows - 1, 14);
}

#[test]
fn seeded_runs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (p, seed) in [(&a, "3"), (&b, "3"), (&c, "4")] {
        let o = run(&["goe", "--n", "1..3", "--trials", "5000", "--seed", seed, "--csv", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn manifest_replays() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let manifest = dir.path().join("run.cfg");
    let o = run(&[
        "sat", "--N", "12", "--alpha", "3:5:1", "--trials", "10", "--seed", "9",
        "--csv", first.to_str().unwrap(), "--manifest", manifest.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["--config", manifest.to_str().unwrap(), "--csv", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(first).unwrap(), std::fs::read(second).unwrap());
}

#[test]
fn dimacs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let unsat = dir.path().join("u.cnf");
    std::fs::write(&unsat, "c tiny\np cnf 1 2\n1 0\n-1 0\n").unwrap();
    let o = run(&["sat", "--dimacs", unsat.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "s UNSATISFIABLE"), "{}", stdout(&o));
    let sat = dir.path().join("s.cnf");
    std::fs::write(&sat, "p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
    let o = run(&["sat", "--dimacs", sat.to_str().unwrap()]);
    let s = stdout(&o);
    assert!(s.lines().any(|l| l == "s SATISFIABLE"), "{s}");
    assert!(s.lines().any(|l| l.starts_with("v ") && l.contains("-1") && l.contains(" 2")), "{s}");
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const E1: &str = "mmlp 1
agents 2
constraints 1
objectives 1
c 0 0 1.0 1 1
c 1 0 1.0 1 2
o 0 0 1.0 2 1
o 1 0 1.0 2 2
";

const E2: &str = "mmlp 1
agents 2
constraints 1
objectives 1
c 0 0 1.0 1 1
c 1 0 2.0 1 2
o 0 0 1.0 2 1
o 1 0 1.0 2 2
";

const SINGLE: &str = "mmlp 1
agents 1
constraints 1
objectives 1
c 0 0 2.0 1 1
o 0 0 1.0 2 1
";

/// One agent in an objective but in no constraint.
const UNBOUNDED: &str = "mmlp 1
agents 1
constraints 0
objectives 1
o 0 0 1.0 1 1
";

fn mmlp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmlp"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(o: &Output, key: &str) -> Option<String> {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")).map(str::to_string))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn solution(text: &str) -> Vec<f64> {
    text.lines()
        .filter_map(|l| l.strip_prefix("x "))
        .map(|l| l.split(' ').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| {
        let path = dir.path().join(name);
        let o = mmlp(&[
            "generate",
            "--agents",
            "2",
            "--delta-i",
            "2",
            "--delta-k",
            "2",
            "--seed",
            "1",
            "--normalized",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read_to_string(path).unwrap()
    };
    let a = out("a.mmlp");
    assert_eq!(a, out("b.mmlp"));
    // Same shape as E1: one constraint and one objective over both agents.
    assert!(a.contains("agents 2\nconstraints 1\nobjectives 1\n"));
    assert_eq!(a.lines().filter(|l| l.starts_with("c ")).count(), 2);
    assert_eq!(
        a.lines()
            .filter(|l| l.starts_with("o ") && l.contains(" 1.0 "))
            .count(),
        2
    );
}

#[test]
fn generate_rejects_bad_flags() {
    assert_eq!(
        mmlp(&[
            "generate",
            "--agents",
            "0",
            "--delta-i",
            "2",
            "--delta-k",
            "2"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(mmlp(&["generate", "--agents", "x"]).status.code(), Some(2));
    assert_eq!(mmlp(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn solve_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.txt");
    let e1 = write(dir.path(), "e1.mmlp", E1);
    let o = mmlp(&[
        "solve",
        "--in",
        &e1,
        "--r",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(value(&o, "omega").as_deref(), Some("1.0"));
    assert_eq!(value(&o, "R").as_deref(), Some("3"));
    let x = solution(&fs::read_to_string(&out).unwrap());
    assert!(x.iter().all(|v| (v - 0.5).abs() < 1e-6), "{x:?}");

    let e2 = write(dir.path(), "e2.mmlp", E2);
    let o = mmlp(&["solve", "--in", &e2, "--r", "2"]);
    assert!(o.status.success());
    let x = solution(&stdout(&o));
    assert!(
        (x[0] - 0.5).abs() < 1e-6 && (x[1] - 0.25).abs() < 1e-6,
        "{x:?}"
    );
    let omega: f64 = value(&o, "omega").unwrap().parse().unwrap();
    assert!((omega - 0.75).abs() < 1e-6);
}

#[test]
fn solve_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        mmlp(&["solve", "--in", "/nonexistent/e1.mmlp"])
            .status
            .code(),
        Some(2)
    );
    let u = write(dir.path(), "u.mmlp", UNBOUNDED);
    let o = mmlp(&["solve", "--in", &u]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unbounded_agents 0"));
    let e1 = write(dir.path(), "e1.mmlp", E1);
    assert_eq!(
        mmlp(&["solve", "--in", &e1, "--r", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn exact_examples() {
    let dir = tempfile::tempdir().unwrap();
    for (text, want) in [(E1, 1.0), (E2, 1.0), (SINGLE, 0.5)] {
        let f = write(dir.path(), "i.mmlp", text);
        let o = mmlp(&["exact", "--in", &f]);
        assert!(o.status.success());
        let omega: f64 = value(&o, "omega").unwrap().parse().unwrap();
        assert!((omega - want).abs() < 1e-9, "{omega} vs {want}");
    }
}

#[test]
fn verify_passes_and_catches_injections() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = write(dir.path(), "e1.mmlp", E1);
    let reports = dir.path().join("reports");
    let o = mmlp(&[
        "verify",
        "--in",
        &e1,
        "--r",
        "3",
        "--report-dir",
        reports.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("instance e1 passed true ratio 1.0 ratio_bound 1.5"));
    let tsv = fs::read_to_string(reports.join("report.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 2);
    for inject in ["solution", "g-table"] {
        let o = mmlp(&[
            "verify",
            "--in",
            &e1,
            "--r",
            "3",
            "--inject",
            inject,
            "--report-dir",
            reports.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
        assert!(reports.join("e1.counterexample.mmlp").exists());
    }
}

#[test]
fn verify_sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "sweep.toml",
        "R = 2\nseed = 3\n\n[sweep]\ncount = 5\nagents = 10\ndelta_i = 3\ndelta_k = 2\n",
    );
    let o = mmlp(&["--config", &config, "verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(value(&o, "instances").as_deref(), Some("5"));
    // Flags win over the config.
    let o = mmlp(&["--config", &config, "verify", "--sweep", "2", "--r", "3"]);
    assert_eq!(value(&o, "instances").as_deref(), Some("2"));
    let bad = write(
        dir.path(),
        "bad.toml",
        "R = 3\ninstances = [\"missing.mmlp\"]\n",
    );
    assert_eq!(mmlp(&["--config", &bad, "verify"]).status.code(), Some(2));
}

#[test]
fn normalize_writes_instance_and_backmap() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "i.mmlp",
        "mmlp 1
agents 3
constraints 1
objectives 1
c 0 0 1.0 1 1
c 1 0 1.0 1 2
c 2 0 1.0 1 3
o 0 0 1.0 2 1
o 1 0 1.0 2 2
o 2 0 1.0 2 3
",
    );
    let out = dir.path().join("n.mmlp");
    let o = mmlp(&["normalize", "--in", &f, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(value(&o, "multiplier").as_deref(), Some("1.5"));
    assert_eq!(value(&o, "constraints").as_deref(), Some("3"));
    let sidecar = fs::read_to_string(dir.path().join("n.mmlp.backmap")).unwrap();
    assert!(sidecar.starts_with("mmlp-backmap 1\nmultiplier 1.5\n"));
    let n = fs::read_to_string(out).unwrap();
    let o = mmlp(&["exact", "--in", &write(dir.path(), "copy.mmlp", &n)]);
    assert!(o.status.success());
}

#[test]
fn thread_cap_is_respected() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = write(dir.path(), "e1.mmlp", E1);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_mmlp"))
            .args(["solve", "--in", &e1])
            .env("MMLP_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert!(one.status.success());
    assert_eq!(stdout(&one), stdout(&run("4")));
    assert_eq!(run("zero").status.code(), Some(2));
}

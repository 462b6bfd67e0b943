use std::path::PathBuf;
use std::process::{Command, Output};

fn sheaf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sheaf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sheaf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn truthval_of_negation() {
    let o = sheaf(&["truthval", "~R(s)"]);
    assert_eq!(stdout(&o), "{}\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn hierarchy_counts() {
    let o = sheaf(&["hierarchy", "--alpha", "2", "--counts"]);
    assert_eq!(stdout(&o), "p: 3\nq: 2\n");
    let o = sheaf(&[
        "--fixture",
        "p1",
        "hierarchy",
        "--alpha",
        "2",
        "--counts",
        "--format",
        "lines",
    ]);
    assert_eq!(stdout(&o), "count.m\t2\n");
}

#[test]
fn excluded_middle_not_forced() {
    let o = sheaf(&["force", "--at", "p", "R(s) | ~R(s)"]);
    assert_eq!(stdout(&o), "not forced\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn sheaf_files() {
    let path = scratch(
        "s2.sheaf",
        "node p\nnode q\nle p q\nsort p: 0\nsort q: 0\nmap p q: 0 -> 0\nrel R/1 p:\nrel R q: (0)\nsection s: p->0 q->0\n",
    );
    let p = path.to_str().unwrap();
    let o = sheaf(&["--sheaf", p, "truthset", "R(s)"]);
    assert_eq!(stdout(&o), "{q}\n");
    let o = sheaf(&["--sheaf", p, "validate"]);
    assert_eq!(stdout(&o), "valid\n");
    let bad = scratch("bad.sheaf", "node p\nsort p: 0\nrel R p: (7)\n");
    assert_eq!(
        sheaf(&["--sheaf", bad.to_str().unwrap(), "validate"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn goedel_translation() {
    let o = sheaf(&["goedel", "R(x) | ~R(x)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with('~'));
}

#[test]
fn verification_commands() {
    let o = sheaf(&["chi-check", "--k", "1", "--node", "p"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("verified\n"));
    let o = sheaf(&[
        "collapse",
        "--point",
        "q",
        "--check-fundamental",
        "--depth",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = sheaf(&[
        "cohen-demo",
        "--steps",
        "5",
        "--seed",
        "3",
        "--format",
        "lines",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("entries\t10\n"));
}

#[test]
fn collapse_at_a_non_generic_point_fails_verification() {
    // the point filter at p contains only the whole site, which does not decide R(s)
    let o = sheaf(&[
        "collapse",
        "--point",
        "p",
        "--check-fundamental",
        "--depth",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(sheaf(&["truthval", "R(("]).status.code(), Some(2));
    assert_eq!(
        sheaf(&["force", "--at", "nowhere", "R(s)"]).status.code(),
        Some(2)
    );
    assert_eq!(sheaf(&["hierarchy", "--alpha", "7"]).status.code(), Some(2));
    assert_eq!(
        sheaf(&["--fixture", "cycle", "hierarchy", "--alpha", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(sheaf(&["bogus"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let a = stdout(&sheaf(&["hierarchy", "--alpha", "2"]));
    let b = stdout(&sheaf(&["hierarchy", "--alpha", "2"]));
    assert_eq!(a, b);
    assert!(a.starts_with("p: 3 sets\n"));
}

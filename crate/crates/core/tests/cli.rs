use std::path::Path;
use std::process::{Command, Output};

fn streamspan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamspan")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for f in [&a, &b] {
        assert!(streamspan(&["gen", "--gnp", "100", "0.3", "--seed", "7", "-o", path(f)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn complete_weighted_graph_has_all_pairs() {
    let o = streamspan(&["gen", "--complete", "20", "--weights", "1:100"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("20 190 weighted"));
    assert_eq!(text.lines().count(), 191);
}

#[test]
fn build_reports_counters_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g");
    let s = dir.path().join("s");
    assert!(streamspan(&["gen", "--gnp", "80", "0.2", "--weights", "1:50", "-o", path(&g)]).status.success());

    let o = streamspan(&["build", "--model", "single-pass", "-k", "2", "-i", path(&g), "--check-invariants"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("prune_scan_total=") && text.contains("hook_edge_count="), "{text}");

    let report = dir.path().join("r");
    let o = streamspan(&[
        "build",
        "--model",
        "streamsort",
        "-k",
        "3",
        "-i",
        path(&g),
        "-o",
        path(&s),
        "--report",
        path(&report),
        "--check-invariants",
        "--storage",
        "temp-files",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    let passes: usize = text.lines().find_map(|l| l.strip_prefix("total_passes=")).unwrap().parse().unwrap();
    assert!(passes <= 30);
    assert!(text.contains("property_p=pass"));

    let o = streamspan(&["verify", "--graph", path(&g), "--spanner", path(&s), "-k", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn sorted_weighted_rejects_unsorted_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g");
    std::fs::write(&g, "3 2 weighted\n1 2 5\n2 3 1\n").unwrap();
    let o = streamspan(&["build", "--model", "sorted-weighted", "-k", "3", "-i", path(&g)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("weight order"));
    let o = streamspan(&["build", "--model", "sorted-weighted", "-k", "3", "-i", path(&g), "--presort"]);
    assert!(o.status.success());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cycle = dir.path().join("c");
    let p = dir.path().join("p");
    std::fs::write(&cycle, "5 5 unweighted\n1 2\n2 3\n3 4\n4 5\n5 1\n").unwrap();
    std::fs::write(&p, "5 4 unweighted\n1 2\n2 3\n3 4\n4 5\n").unwrap();
    assert!(streamspan(&["verify", "--graph", path(&cycle), "--spanner", path(&cycle), "-t", "1"]).status.success());
    let o = streamspan(&["verify", "--graph", path(&cycle), "--spanner", path(&p), "-t", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness=1,5"));
    assert!(streamspan(&["verify", "--graph", path(&cycle), "--spanner", path(&p), "-t", "5"]).status.success());
}

#[test]
fn batch_mode_prints_a_table() {
    let o = streamspan(&["verify", "--gnp", "60", "0.2", "--seeds", "4", "-k", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("seed m spanner_size"));
    assert!(text.contains("runs=4") && text.ends_with("result=pass\n"));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert!(!streamspan(&["build", "--model", "single-pass", "-k", "0"]).status.success());
    assert!(!streamspan(&["gen"]).status.success());
}

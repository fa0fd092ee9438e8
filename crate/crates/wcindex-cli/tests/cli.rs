//! End-to-end tests of the binary: stream separation, exit codes, and
//! the worked example from the library documentation.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcindex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_text(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn golden_example_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "t.txt", "acbccbacccddabdaabcdccbccdaa");
    let index = dir.path().join("t.wcidx");

    let build = run(&[
        "build",
        path_str(&text),
        path_str(&index),
        "--variant",
        "tradeoff",
        "--beta",
        "2",
        "--k",
        "3",
        "--opt",
        "6",
    ]);
    assert_eq!(build.status.code(), Some(0), "{}", stderr_of(&build));
    // The summary is diagnostics; results stay on stdout.
    assert!(stdout_of(&build).is_empty());
    assert!(stderr_of(&build).contains("stored_strings="));

    let query = run(&["query", path_str(&index), "b*{0,4}cc*{3,5}d", "--stats"]);
    assert_eq!(query.status.code(), Some(0), "{}", stderr_of(&query));
    assert_eq!(stdout_of(&query), "3 11\n3 15\n6 15\n18 26\n");
    assert!(stderr_of(&query).contains("lcp_queries="));

    // Identical invocations produce identical bytes.
    let again = run(&["query", path_str(&index), "b*{0,4}cc*{3,5}d"]);
    assert_eq!(again.stdout, query.stdout);

    let verify = run(&["verify", path_str(&index), "b*{0,4}cc*{3,5}d"]);
    assert_eq!(verify.status.code(), Some(0), "{}", stderr_of(&verify));
    assert!(stderr_of(&verify).contains("4 occurrences agree"));
}

#[test]
fn wildcard_only_patterns_print_start_positions() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "t.txt", "bananas\n");
    let index = dir.path().join("t.wcidx");
    let build = run(&["build", path_str(&text), path_str(&index)]);
    assert_eq!(build.status.code(), Some(0), "{}", stderr_of(&build));
    // The trailing newline is not part of the text.
    assert!(stderr_of(&build).contains("n=7"));

    let query = run(&["query", path_str(&index), "a*a"]);
    assert_eq!(query.status.code(), Some(0));
    assert_eq!(stdout_of(&query), "2\n4\n");
}

#[test]
fn stats_reports_the_stored_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "t.txt", "bananas");
    let index = dir.path().join("t.wcidx");
    let build = run(&[
        "build",
        path_str(&text),
        path_str(&index),
        "--variant",
        "linear-time",
        "--k",
        "1",
        "--g",
        "3",
        "--chi",
        "2",
    ]);
    assert_eq!(build.status.code(), Some(0), "{}", stderr_of(&build));

    let stats = run(&["stats", path_str(&index)]);
    assert_eq!(stats.status.code(), Some(0));
    let got = stdout_of(&stats);
    assert!(got.contains("variant=linear-time"), "{got}");
    assert!(got.contains("g=3"), "{got}");
    assert!(got.contains("fallback_chi=2"), "{got}");

    let tab = run(&["stats", path_str(&index), "--format", "tabular"]);
    assert!(stdout_of(&tab).contains("variant                 linear-time"));
}

#[test]
fn exit_codes_partition_the_failure_modes() {
    let dir = tempfile::tempdir().unwrap();
    let text = write_text(dir.path(), "t.txt", "bananas");
    let index = dir.path().join("t.wcidx");
    let build = run(&[
        "build",
        path_str(&text),
        path_str(&index),
        "--variant",
        "tradeoff",
        "--beta",
        "2",
        "--k",
        "1",
    ]);
    assert_eq!(build.status.code(), Some(0), "{}", stderr_of(&build));

    // 1: flag combinations the variant cannot accept, parse errors.
    let usage = run(&["build", path_str(&text), path_str(&index), "--beta", "2"]);
    assert_eq!(usage.status.code(), Some(1));
    let missing_flag = run(&[
        "build",
        path_str(&text),
        path_str(&index),
        "--variant",
        "tradeoff",
    ]);
    assert_eq!(missing_flag.status.code(), Some(1));
    let parse = run(&["query", path_str(&index), "a*{3,1}a"]);
    assert_eq!(parse.status.code(), Some(1));
    let range = run(&[
        "build",
        path_str(&text),
        path_str(&index),
        "--variant",
        "tradeoff",
        "--beta",
        "9",
        "--k",
        "1",
    ]);
    assert_eq!(range.status.code(), Some(1));

    // 2: gap budgets, named in the message.
    let budget = run(&["query", path_str(&index), "a*a*a"]);
    assert_eq!(budget.status.code(), Some(2));
    assert!(stderr_of(&budget).contains("k=1"));

    // 3: refusals — construction guard, malformed files, oracle cap.
    let guard = run(&[
        "build",
        path_str(&text),
        dir.path().join("g.wcidx").to_str().unwrap(),
        "--variant",
        "tradeoff",
        "--beta",
        "1",
        "--k",
        "5",
        "--guard",
        "10",
    ]);
    assert_eq!(guard.status.code(), Some(3));

    let bytes = std::fs::read(&index).unwrap();
    let corrupt = dir.path().join("c.wcidx");
    std::fs::write(&corrupt, &bytes[..20]).unwrap();
    let load = run(&["query", path_str(&corrupt), "a"]);
    assert_eq!(load.status.code(), Some(3));

    let alien = dir.path().join("a.wcidx");
    let mut wrong = bytes.clone();
    wrong[0] ^= 0xff;
    std::fs::write(&alien, &wrong).unwrap();
    let magic = run(&["query", path_str(&alien), "a"]);
    assert_eq!(magic.status.code(), Some(3));
    assert!(stderr_of(&magic).contains("magic"));

    let simple = dir.path().join("s.wcidx");
    let b2 = run(&["build", path_str(&text), path_str(&simple)]);
    assert_eq!(b2.status.code(), Some(0));
    let cap = run(&["verify", path_str(&simple), "a*{0,70}a*{0,70}s"]);
    assert_eq!(cap.status.code(), Some(3));
    assert!(stderr_of(&cap).contains("oracle refused"));

    // 4: filesystem problems.
    let missing = run(&["query", dir.path().join("no.wcidx").to_str().unwrap(), "a"]);
    assert_eq!(missing.status.code(), Some(4));
}

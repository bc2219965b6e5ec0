//! End-to-end tests of the `mnc` binary: output formats, exit codes, and
//! trace-file round-trips.

use std::path::Path;
use std::process::{Command, Output};

fn mnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mnc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn run_min_array() {
    let out = mnc(&["run", "min", "--array", "5,2,8"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "min = 2, steps = 4\n");
}

#[test]
fn run_sort_array() {
    let out = mnc(&["run", "sort", "--array", "3,1,2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "sorted = 1,2,3\nsteps = 6\n");
}

#[test]
fn run_astar_canonical() {
    let out = mnc(&["run", "astar", "--instance", "canonical"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("path = S\u{2192}B\u{2192}D\u{2192}G, cost = 8"), "{text}");
}

#[test]
fn run_astar_from_instance_file() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("instances/canonical.txt");
    let out = mnc(&["run", "astar", "--instance", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("cost = 8"));
}

#[test]
fn run_with_check_and_strict_flags() {
    let out = mnc(&[
        "run", "min", "--array", "9,4,7,1", "--check", "--strict-addresses",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "min = 1, steps = 5\n");
}

#[test]
fn parse_error_exits_2() {
    let out = mnc(&["run", "min", "--array", "1,x,3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mnc(&["run", "min", "--array", "1,2", "--tau", "-0.5"]);
    assert_eq!(out.status.code(), Some(2));
    // clap usage errors share the parse exit code
    let out = mnc(&["run", "unknown-program"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_termination_exits_4() {
    let out = mnc(&["run", "min", "--array", "5,2,8", "--max-steps", "2"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn trace_files_are_deterministic_and_round_trip() {
    let dir = std::env::temp_dir().join(format!("mnc-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("a.trace");
    let b = dir.join("b.trace");
    for path in [&a, &b] {
        let out = mnc(&[
            "run",
            "sort",
            "--array",
            "4,-1,3.5,0",
            "--snapshots",
            "--trace",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let text_a = std::fs::read(&a).unwrap();
    let text_b = std::fs::read(&b).unwrap();
    assert_eq!(text_a, text_b, "repeated runs must produce identical bytes");

    let parsed = mnc::format::parse_trace(std::str::from_utf8(&text_a).unwrap()).unwrap();
    let rewritten = mnc::format::write_trace(&parsed);
    assert_eq!(rewritten.as_bytes(), text_a.as_slice());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn inspect_reports_the_published_interfaces() {
    let out = mnc(&["inspect", "min"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("modules = 3"));
    assert!(text.contains("read_heads = 3"));
    assert!(text.contains("write_heads = 2"));

    let out = mnc(&["inspect", "sort"]);
    assert!(stdout(&out).contains("write_heads = 3"));

    let out = mnc(&["inspect", "astar"]);
    let text = stdout(&out);
    assert!(text.contains("modules = 6"));
    assert!(text.contains("module ExpandAction table entries"));
}

#[test]
fn inspect_networks_dump_is_parseable_structure() {
    let out = mnc(&["inspect", "min", "--networks"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("network input 3"));
    assert!(text.contains("weights [["));
}

#[test]
fn verify_subcommand_passes() {
    let out = mnc(&["verify", "min", "--seed", "3", "--count", "40"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("40/40"));

    let out = mnc(&["verify", "sort", "--seed", "3", "--count", "20"]);
    assert!(out.status.success());

    let out = mnc(&["verify", "astar"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("trace equivalence"));
}

//! End-to-end runs of the `noncausal` binary: exit codes, report output,
//! and determinism.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn noncausal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noncausal"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("the process exits normally")
}

fn write(dir: &TempDir, name: &str, contents: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).expect("temp files are writable");
    path.to_str().expect("temp paths are UTF-8").to_string()
}

const CLOSED_NOT: &str = "version 1\ninputs 1\ng0 = NOT in0\noutputs g0\n";
const CONST_1011: &str =
    "version 1\ninputs 4\ng0 = CONST1\ng1 = CONST0\noutputs g0 g1 g0 g0\n";
const CONST_0110: &str =
    "version 1\ninputs 4\ng0 = CONST0\ng1 = CONST1\noutputs g0 g1 g1 g0\n";

#[test]
fn factor_12_lists_the_prime_powers() {
    let out = noncausal(&["--output", "report", "factor", "12"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let report: serde_json::Value = serde_json::from_str(&text).expect("report is JSON");
    assert_eq!(report["kind"], "factorization");
    assert_eq!(report["status"], "factored");
    assert_eq!(report["factors"], serde_json::json!([[3, 1], [2, 2]]));
    assert_eq!(report["display"], "3 * 2^2");
}

#[test]
fn closed_not_reports_no_fixed_point_with_exit_two() {
    let dir = TempDir::new().unwrap();
    let nl = write(&dir, "not.nl", CLOSED_NOT);
    let out = noncausal(&["fixpoints", &nl]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("verdict: no_fixed_point"));
    assert!(stderr(&out).is_empty(), "verdicts are not error paths");
}

#[test]
fn decide_constant_accepts_with_the_payload_as_witness() {
    let dir = TempDir::new().unwrap();
    let nl = write(&dir, "const1011.nl", CONST_1011);
    let out = noncausal(&["decide", &nl]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("accepted: true"));
    assert!(text.contains("witness: 011"));
}

#[test]
fn decide_rejection_exits_one() {
    let dir = TempDir::new().unwrap();
    let nl = write(&dir, "const0110.nl", CONST_0110);
    let out = noncausal(&["decide", &nl]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("accepted: false"));
    assert!(stdout(&out).contains("witness: 110"));
}

#[test]
fn decide_on_an_inconsistent_circuit_exits_two_with_the_verdict() {
    let dir = TempDir::new().unwrap();
    let nl = write(&dir, "not.nl", CLOSED_NOT);
    let out = noncausal(&["decide", &nl]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("verdict: no_fixed_point"));
}

#[test]
fn usage_errors_exit_three_with_a_single_stderr_line() {
    let out = noncausal(&["frobnicate"]);
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: usage: "), "got {err:?}");
    assert!(stdout(&out).is_empty());
}

#[test]
fn missing_files_exit_three_with_an_io_line() {
    let out = noncausal(&["validate", "/nonexistent/missing.nl"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("error: io: "));
}

#[test]
fn malformed_netlists_exit_three_with_a_parse_line() {
    let dir = TempDir::new().unwrap();
    let nl = write(&dir, "bad.nl", "version 1\ninputs 1\ng0 = XOR in0 in0\noutputs g0\n");
    let out = noncausal(&["validate", &nl]);
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: parse: "), "got {err:?}");
}

#[test]
fn close_refuses_mismatched_boundaries() {
    let dir = TempDir::new().unwrap();
    let nl = write(&dir, "open.nl", "version 1\ninputs 2\ng0 = AND in0 in1\noutputs g0\n");
    let out = noncausal(&["close", &nl]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("error: shape: "));
}

#[test]
fn bad_engine_and_mode_values_exit_three() {
    let dir = TempDir::new().unwrap();
    let nl = write(&dir, "not.nl", CLOSED_NOT);
    let engine = noncausal(&["fixpoints", &nl, "--engine", "bogus"]);
    assert_eq!(code(&engine), 3);
    assert!(stderr(&engine).starts_with("error: usage: "));
    let mode = noncausal(&["factor", "12", "--mode", "bogus"]);
    assert_eq!(code(&mode), 3);
    assert!(stderr(&mode).starts_with("error: usage: "));
}

#[test]
fn factor_of_a_prime_in_paper_strict_mode_exits_two() {
    let out = noncausal(&["--output", "report", "factor", "13", "--mode", "paper-strict"]);
    assert_eq!(code(&out), 2);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["status"], "no_fixed_point");
    assert_eq!(report["mode"], "paper-strict");
    assert!(report.get("factors").is_none());
}

#[test]
fn factor_below_two_is_a_usage_error() {
    let out = noncausal(&["factor", "1"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("error: usage: "));
}

#[test]
fn reruns_are_byte_identical() {
    let first = noncausal(&["--output", "report", "factor", "30"]);
    let second = noncausal(&["--output", "report", "factor", "30"]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(code(&first), code(&second));
}

#[test]
fn the_seed_never_reaches_a_verdict() {
    let dir = TempDir::new().unwrap();
    let nl = write(&dir, "not.nl", CLOSED_NOT);
    let a = noncausal(&["--seed", "1", "--output", "report", "fixpoints", &nl]);
    let b = noncausal(&["--seed", "999", "--output", "report", "fixpoints", &nl]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&a), 2);
    assert_eq!(code(&b), 2);
}

#[test]
fn timing_is_opt_in_and_default_output_has_no_timing_field() {
    let out = noncausal(&["--output", "report", "factor", "12"]);
    assert!(!stdout(&out).contains("timing_ms"));
    let timed = noncausal(&["--output", "report", "--timing", "factor", "12"]);
    assert!(stdout(&timed).contains("timing_ms"));
}

#[test]
fn fixpoints_limit_lists_the_enumeration() {
    let dir = TempDir::new().unwrap();
    let nl = write(
        &dir,
        "id2.nl",
        "version 1\ninputs 2\ng0 = AND in0 in0\ng1 = OR in1 in1\noutputs g0 g1\n",
    );
    let out = noncausal(&["--output", "report", "fixpoints", &nl, "--limit", "3"]);
    assert_eq!(code(&out), 2);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "multiple");
    assert_eq!(report["fixed_points"], serde_json::json!(["00", "01", "10"]));
    assert_eq!(report["counterexamples"], serde_json::json!(["00", "01"]));
}

fn write_pair_manifest(dir: &TempDir) -> String {
    // yes(x, w): w == x bitwise; no: constantly false.
    write(
        dir,
        "yes.nl",
        "version 1\ninputs 4\n\
         g0 = TABLE in0 in2 : 1 0 0 1\n\
         g1 = TABLE in1 in3 : 1 0 0 1\n\
         g2 = AND g0 g1\noutputs g2\n",
    );
    write(dir, "no.nl", "version 1\ninputs 4\ng0 = CONST0\noutputs g0\n");
    write(
        dir,
        "pair.json",
        r#"{"version": 1, "kind": "decision", "instance_bits": 2, "witness_bits": 2, "yes": "yes.nl", "no": "no.nl"}"#,
    )
}

#[test]
fn construct_decision_emits_a_netlist_that_decides() {
    let dir = TempDir::new().unwrap();
    let manifest = write_pair_manifest(&dir);
    let out = noncausal(&["construct", "decision", &manifest, "--instance", "10"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let built = write(&dir, "built.nl", &stdout(&out));
    let decision = noncausal(&["decide", &built]);
    assert_eq!(code(&decision), 0);
    assert!(stdout(&decision).contains("accepted: true"));
    assert!(stdout(&decision).contains("witness: 10"));
}

#[test]
fn construct_kind_must_match_the_manifest() {
    let dir = TempDir::new().unwrap();
    let manifest = write_pair_manifest(&dir);
    let out = noncausal(&["construct", "search", &manifest, "--instance", "10"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("error: usage: "));
}

#[test]
fn construct_search_netlist_has_the_solution_as_its_fixed_point() {
    let dir = TempDir::new().unwrap();
    write(
        &dir,
        "pred.nl",
        "version 1\ninputs 4\n\
         g0 = TABLE in0 in2 : 1 0 0 1\n\
         g1 = TABLE in1 in3 : 1 0 0 1\n\
         g2 = AND g0 g1\noutputs g2\n",
    );
    let manifest = write(
        &dir,
        "rel.json",
        r#"{"version": 1, "kind": "search", "instance_bits": 2, "solution_bits": 2, "predicate": "pred.nl"}"#,
    );
    let out = noncausal(&["construct", "search", &manifest, "--instance", "01"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let built = write(&dir, "built.nl", &stdout(&out));
    let fixed = noncausal(&["--output", "report", "fixpoints", &built]);
    assert_eq!(code(&fixed), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&fixed)).unwrap();
    assert_eq!(report["verdict"], "consistent");
    assert_eq!(report["fixed_point"], "01");
}

#[test]
fn ctc_check_flags_the_identity_process() {
    let dir = TempDir::new().unwrap();
    write(&dir, "id.nl", "version 1\ninputs 1\ng0 = AND in0 in0\noutputs g0\n");
    let manifest = write(
        &dir,
        "setup.json",
        r#"{"version": 1, "parties": [{"input_bits": 1, "output_bits": 1}], "process": "id.nl"}"#,
    );
    let out = noncausal(&["--output", "report", "ctc", "check", &manifest]);
    assert_eq!(code(&out), 2);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "violation");
    assert_eq!(report["violation_kind"], "no_fixed_point");
    assert_eq!(report["operations"], serde_json::json!([[1, 0]]));
}

#[test]
fn ctc_check_accepts_a_constant_process_with_locals() {
    let dir = TempDir::new().unwrap();
    write(&dir, "zero.nl", "version 1\ninputs 1\ng0 = CONST0\noutputs g0\n");
    write(&dir, "local.nl", "version 1\ninputs 1\ng0 = NOT in0\noutputs g0\n");
    let manifest = write(
        &dir,
        "setup.json",
        r#"{"version": 1, "parties": [{"input_bits": 1, "output_bits": 1}], "process": "zero.nl", "locals": ["local.nl"]}"#,
    );
    let out = noncausal(&["ctc", "check", &manifest]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("verdict: consistent"));
}

#[test]
fn ctc_check_rejects_locals_of_the_wrong_shape() {
    let dir = TempDir::new().unwrap();
    write(&dir, "zero.nl", "version 1\ninputs 1\ng0 = CONST0\noutputs g0\n");
    write(
        &dir,
        "wide.nl",
        "version 1\ninputs 2\ng0 = AND in0 in1\noutputs g0\n",
    );
    let manifest = write(
        &dir,
        "setup.json",
        r#"{"version": 1, "parties": [{"input_bits": 1, "output_bits": 1}], "process": "zero.nl", "locals": ["wide.nl"]}"#,
    );
    let out = noncausal(&["ctc", "check", &manifest]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("error: shape: "));
}

#[test]
fn ctc_search_with_no_hit_exits_one() {
    let out = noncausal(&["--output", "report", "ctc", "search-noncausal", "--parties", "1", "--bits", "1"]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["found"], false);
    assert!(report.get("table").is_none());
}

#[test]
fn manifest_version_mismatches_exit_three() {
    let dir = TempDir::new().unwrap();
    let manifest = write(
        &dir,
        "setup.json",
        r#"{"version": 99, "parties": [], "process": "w.nl"}"#,
    );
    let out = noncausal(&["ctc", "check", &manifest]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("error: manifest: "));
}

#[test]
fn help_and_version_exit_zero() {
    let help = noncausal(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("Usage:"));
    let version = noncausal(&["--version"]);
    assert_eq!(code(&version), 0);
}

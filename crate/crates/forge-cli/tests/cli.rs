//! End-to-end checks of the command-line surface: session execution,
//! exit codes, and report files.

use std::process::Command;

use forge_cli::runner::{run_tasks, Outcome, RunOptions};
use forge_cli::session::{parse_session, serialize_session};

#[test]
fn run_reports_grade_and_exits_cleanly() {
    let text = "ring Q[x,y,z] grevlex\nideal I = x, y\ntask grade I\n";
    let s = parse_session(text).unwrap();
    let rep = run_tasks(&s, RunOptions::default());
    assert_eq!(rep.exit_code(), 0);
    assert_eq!(rep.json["tasks"][0]["result"]["grade"], "2");
}

#[test]
fn truncated_resolution_is_a_check_failure() {
    let text = "ring Q[x,y,z] grevlex\nideal m = x, y, z\ntask resolve m max_len=1\n";
    let s = parse_session(text).unwrap();
    let rep = run_tasks(&s, RunOptions::default());
    assert_eq!(rep.outcome, Outcome::CheckFailed);
    assert_eq!(rep.exit_code(), 1);
}

#[test]
fn grade_zero_embedding_is_an_input_error() {
    // coker[(x,y)^T] has rank 1 and zero annihilator
    let text = "ring Q[x,y,z] grevlex\nmodule F = coker [[x],[y]]\ntask embed F xseq=x\n";
    let s = parse_session(text).unwrap();
    let rep = run_tasks(&s, RunOptions::default());
    assert_eq!(rep.outcome, Outcome::InputError);
    assert_eq!(rep.exit_code(), 2);
    let err = rep.json["tasks"][0]["error"].as_str().unwrap();
    assert!(err.contains("grade zero"), "unexpected error: {err}");
}

#[test]
fn rejected_sequence_is_recorded_but_execution_continues() {
    let text = "ring Q[x,y,z] grevlex\nideal I = x, y\ntask embed I xseq=z\ntask grade I\n";
    let s = parse_session(text).unwrap();
    let rep = run_tasks(&s, RunOptions::default());
    assert_eq!(rep.outcome, Outcome::InputError);
    assert_eq!(rep.json["tasks"][0]["status"], "error");
    assert_eq!(rep.json["tasks"][1]["status"], "ok");
}

#[test]
fn fail_fast_stops_after_first_error() {
    let text = "ring Q[x,y,z] grevlex\nideal I = x, y\ntask embed I xseq=z\ntask grade I\n";
    let s = parse_session(text).unwrap();
    let rep = run_tasks(&s, RunOptions { fail_fast: true, ..Default::default() });
    assert_eq!(rep.json["tasks"].as_array().unwrap().len(), 1);
}

#[test]
fn serialization_round_trips_through_the_parser() {
    let text = "ring Q[x,y,z] grevlex\nideal I = x^2 - y*z, x*y\nmodule M = coker [[x,y],[z,x]]\ntask grade I\ntask betti M\n";
    let s1 = parse_session(text).unwrap();
    let s2 = parse_session(&serialize_session(&s1)).unwrap();
    assert_eq!(s1, s2);
}

#[test]
fn binary_runs_a_session_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let session_path = dir.path().join("session.txt");
    let json_path = dir.path().join("out.json");
    std::fs::write(
        &session_path,
        "ring Q[x,y,z] grevlex\nideal m = x, y, z\ntask grade m\ntask check-oic m max_i=2\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_forge"))
        .arg("run")
        .arg(&session_path)
        .arg("--json")
        .arg(&json_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["overall"], "ok");
    assert_eq!(report["tasks"][0]["result"]["grade"], "3");
}

#[test]
fn binary_exits_2_on_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let session_path = dir.path().join("bad.txt");
    std::fs::write(&session_path, "ring Q[x,y] grevlex\ntask grade NOPE\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_forge"))
        .arg("run")
        .arg(&session_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "diagnostic missing location: {err}");
}

#[test]
fn parser_never_panics_on_mangled_input() {
    // deterministic mangling of a valid session: deletions, swaps, and
    // byte splices must produce diagnostics, never panics
    let base = "ring Q[x,y,z] grevlex\nideal I = x^2 - y*z, x*y\nmodule M = coker [[x,y],[z,x]] twists [0,0]\ntask grade I\ntask check-oic M max_i=2\n";
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..500 {
        let mut bytes = base.as_bytes().to_vec();
        for _ in 0..(next() % 6 + 1) {
            match next() % 3 {
                0 => {
                    let i = (next() as usize) % bytes.len();
                    bytes.remove(i);
                }
                1 => {
                    let i = (next() as usize) % bytes.len();
                    let alphabet = b"[](),=^*+-abcxyz0123 \n#";
                    bytes[i] = alphabet[(next() as usize) % alphabet.len()];
                }
                _ => {
                    let i = (next() as usize) % bytes.len();
                    let j = (next() as usize) % bytes.len();
                    bytes.swap(i, j);
                }
            }
        }
        if let Ok(text) = String::from_utf8(bytes) {
            let _ = parse_session(&text);
        }
    }
}

#[test]
fn binary_seed_flag_feeds_seeded_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let session_path = dir.path().join("session.txt");
    std::fs::write(
        &session_path,
        "ring Q[x,y,z] grevlex\ntask corpus C count=2 maxdeg=2\ntask check-oic C max_i=2\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let out = Command::new(env!("CARGO_BIN_EXE_forge"))
            .arg("run")
            .arg(&session_path)
            .arg("--seed")
            .arg("9")
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push(out.stdout);
    }
    assert_eq!(outputs[0], outputs[1], "seeded runs must be byte-identical");
}

//! End-to-end checks of the command-line interface: exit codes, output
//! determinism, and format headers.

use std::process::{Command, Output};

fn qsl2r(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsl2r"))
        .args(args)
        .env("QSL2R_THREADS", "2")
        .output()
        .expect("binary runs")
}

#[test]
fn relations_pass_with_status_zero() {
    let out = qsl2r(&[
        "verify", "relations", "--q", "2", "--t", "1", "--lambda", "0.5,0.866", "--bound", "60",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# qsl2r seed=0 verify relations"));
    assert!(text.contains("relation_id,residual,row,col,interior_size"));
    // one row per relation
    assert_eq!(text.lines().count(), 2 + 6);
}

#[test]
fn unitarity_control_fails_with_status_one() {
    let out = qsl2r(&[
        "verify", "unitarity", "--q", "2", "--t", "1", "--lambda", "1.1,0", "--bound", "30",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_config_exits_two() {
    let out = qsl2r(&["build", "--family", "no-such-family"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qsl2r(&["build", "--family", "principal-q", "--q", "-3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let args = [
        "sweep",
        "relations",
        "--qt",
        "0.5,2",
        "--lambda-points",
        "7",
        "--bound",
        "24",
    ];
    let a = qsl2r(&args);
    let b = qsl2r(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "identical config must give identical bytes");
}

#[test]
fn build_emits_module_document() {
    let out = qsl2r(&[
        "build", "--family", "discrete-q", "--q", "2", "--t", "1", "--sigma", "1", "--n", "2",
        "--sign", "+", "--bound", "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let json = text.lines().nth(1).unwrap();
    // fixed field order of the document
    let keys =
        ["\"family\"", "\"q\"", "\"t\"", "\"epsilon\"", "\"lambda\"", "\"order\"", "\"window\"", "\"weights\"", "\"matrices\""];
    let mut last = 0;
    for k in keys {
        let at = json.find(k).unwrap_or_else(|| panic!("{k} missing"));
        assert!(at >= last, "{k} out of order");
        last = at;
    }
    assert!(json.contains("\"family\":\"discrete_q\""));
}

#[test]
fn mackey_table_has_expected_cardinality() {
    let out = qsl2r(&["mackey", "mu-table", "--q", "2", "--n-max", "3", "--grid", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let json: serde_json_value::Value =
        serde_json_value::from_str(text.lines().nth(1).unwrap()).unwrap();
    // 9 even + 7 odd + 16 discrete labels
    assert_eq!(json.as_array().unwrap().len(), 32);
}

// tiny local alias so the test crate does not need a real dependency line
// for a one-off parse
mod serde_json_value {
    pub use serde_json::{from_str, Value};
}

#[test]
fn specialization_sweep_reports_unit_slope() {
    let out = qsl2r(&[
        "sweep",
        "specialization",
        "--mu",
        "1",
        "--q",
        "2",
        "--tgrid",
        "1e-1:1e-4:4",
        "--bound",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# slope,"));
}

#[test]
fn field_continuity_all_paths() {
    let out = qsl2r(&[
        "field", "continuity", "--path", "all", "--levels", "8,16,32", "--bound", "12",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["even-arc", "odd-arc", "t-cross", "q-chart", "dis-t-cross"] {
        assert!(text.contains(name), "{name} missing from report");
    }
}

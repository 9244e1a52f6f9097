use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(command: &str, config: &str, dir: &Path) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    Command::new(env!("CARGO_BIN_EXE_lie-poisson"))
        .args([command, "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
}

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let out = dir.join("out");
    if !out.exists() {
        return BTreeMap::new();
    }
    std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&outputs(dir)[name]).unwrap()
}

fn failing(report: &Value) -> Vec<String> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap().to_owned())
        .collect()
}

#[test]
fn malformed_configs_exit_2_and_write_nothing() {
    let cases = [
        ("verify", "{not json"),
        ("verify", r#"{"command":"verify","seed":0}"#),
        ("verify", r#"{"command":"verify","seed":-1,"output_path":"r.json"}"#),
        ("verify", r#"{"command":"verify","seed":0,"output_path":"r.json","bogus":true}"#),
        ("toda-run", r#"{"command":"toda-run","seed":0,"output_path":"t.json","params":{"dims":[0]}}"#),
        ("toda-run", r#"{"command":"verify","seed":0,"output_path":"t.json"}"#),
        (
            "lvn-run",
            r#"{"command":"lvn-run","seed":0,"output_path":"l.json",
                "integrator":{"scheme":"rk4","dt":-0.1,"t_end":1.0,"record_stride":1}}"#,
        ),
        (
            "reduce-demo",
            r#"{"command":"reduce-demo","seed":0,"output_path":"r.json",
                "params":{"N":3,"reductions":[{"kind":"group_average","unitaries":[]}]}}"#,
        ),
    ];
    for (command, text) in cases {
        let dir = tempfile::tempdir().unwrap();
        let out = run(command, text, dir.path());
        assert_eq!(out.status.code(), Some(2), "{text}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(outputs(dir.path()).is_empty(), "{text} wrote files");
    }
}

#[test]
fn numerical_blow_up_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command":"lvn-run","seed":0,"output_path":"l.json","params":{"coupling":1000.0},
        "integrator":{"scheme":"rk4","dt":0.5,"t_end":100.0,"record_stride":1}}"#;
    let out = run("lvn-run", cfg, dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(outputs(dir.path()).is_empty());
}

#[test]
fn toda_run_reports_conserved_hk_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command":"toda-run","seed":0,"output_path":"toda.json","params":{"dims":[8]},
        "integrator":{"scheme":"rk4","dt":0.001,"t_end":10.0,"record_stride":500}}"#;
    let out = run("toda-run", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let files = outputs(dir.path());
    for flow in ["canonical", "lax"] {
        let csv = String::from_utf8(files[&format!("toda.N8.{flow}.csv")].clone()).unwrap();
        let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        assert_eq!(header[0], "t");
        assert_eq!(&header[header.len() - 4..], ["h1", "h2", "h3", "h4"]);
        // t = 0, 0.5, ..., 10.
        assert_eq!(csv.lines().count(), 1 + 21);
    }
    let rep = report(dir.path(), "toda.json");
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["checks"].as_array().unwrap().len(), 10);
}

#[test]
fn runs_are_byte_identical() {
    let configs = [
        (
            "toda-run",
            r#"{"command":"toda-run","seed":11,"output_path":"t.json","params":{"dims":[3,5]},
                "integrator":{"scheme":"rk4","dt":0.01,"t_end":1.0,"record_stride":10}}"#,
        ),
        (
            "lvn-run",
            r#"{"command":"lvn-run","seed":11,"output_path":"l.json","params":{"dims":[2,4],"coupling":0.3},
                "integrator":{"scheme":"isospectral_exp","dt":0.01,"t_end":1.0,"record_stride":10}}"#,
        ),
        ("reduce-demo", r#"{"command":"reduce-demo","seed":11,"output_path":"r.json"}"#),
        ("orbit-kks", r#"{"command":"orbit-kks","seed":11,"output_path":"o.json","params":{"N":3,"samples":5}}"#),
    ];
    for (command, cfg) in configs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run(command, cfg, a.path());
        run(command, cfg, b.path());
        let (fa, fb) = (outputs(a.path()), outputs(b.path()));
        assert!(fa.len() >= 2, "{command}");
        assert_eq!(fa, fb, "{command}");
    }
}

#[test]
fn lvn_and_orbit_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("lvn-run", r#"{"command":"lvn-run","seed":3,"output_path":"l.json"}"#, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let out = run("orbit-kks", r#"{"command":"orbit-kks","seed":3,"output_path":"o.json"}"#, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(outputs(dir.path())["o.kks.csv"].clone()).unwrap();
    assert_eq!(table.lines().count(), 1 + 20);
}

/// Triangular truncation is not a trace-norm contraction, so only the two contraction
/// checks that exercise it fail; everything else in the suite passes.
#[test]
fn default_verify_fails_only_on_triangular_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", r#"{"command":"verify","seed":0,"output_path":"report.json"}"#, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let rep = report(dir.path(), "report.json");
    assert_eq!(rep["pass"], false);
    assert_eq!(
        failing(&rep),
        ["operator.trace_norm.lower_projection_contraction", "reduction.lower_triangularize.trace_norm_contraction"]
    );
    let coverage = rep["checks"].as_array().unwrap().iter().find(|c| c["name"] == "coverage.operations_missing").unwrap();
    assert_eq!(coverage["defect"], 0.0);
}

#[test]
fn reduce_demo_flags_only_lower_triangularize() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("reduce-demo", r#"{"command":"reduce-demo","seed":0,"output_path":"r.json"}"#, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let rep = report(dir.path(), "r.json");
    assert_eq!(failing(&rep), ["reduce-demo.1.lower_triangularize.trace_norm_contraction"]);
    let matrices: Value = serde_json::from_slice(&outputs(dir.path())["r.matrices.json"]).unwrap();
    assert_eq!(matrices["results"].as_array().unwrap().len(), 3);
}

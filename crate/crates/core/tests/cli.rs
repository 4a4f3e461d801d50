use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn descnet(args: &[&str], env_tol: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_descnet"));
    cmd.args(args).env_remove("DESCRIPTOR_TOL");
    if let Some(t) = env_tol {
        cmd.env("DESCRIPTOR_TOL", t);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const BELL: &str = "qubits 2\ninit 00\nh 1\ncnot 1 2\nexpect 2\n";

fn circuit(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../circuits").join(name).to_str().unwrap().to_string()
}

#[test]
fn run_writes_identical_json_twice() {
    let dir = TempDir::new().unwrap();
    let src = write(&dir, "bell.qc", BELL);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = descnet(&["run", &src, "--json", out.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["summary"]["pass"], true);
    assert!(String::from_utf8(ja).unwrap().contains("\"tolerance\": 1.0000000000000000e-10"));
}

#[test]
fn loosened_tolerance_and_env_override() {
    let dir = TempDir::new().unwrap();
    let src = write(&dir, "bell.qc", BELL);
    let out = dir.path().join("r.json");
    let o = descnet(&["run", &src, "--tol", "1e-8", "--json", out.to_str().unwrap()], Some("garbage"));
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out).unwrap().contains("\"tolerance\": 1.0000000000000000e-8"));

    let o = descnet(&["run", &src, "--json", out.to_str().unwrap()], Some("1e-6"));
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out).unwrap().contains("\"tolerance\": 9.9999999999999995e-7"));

    assert_eq!(descnet(&["run", &src], Some("garbage")).status.code(), Some(2));
}

#[test]
fn human_summary_without_json() {
    let o = descnet(&["run", &circuit("measurement.qc")], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS"), "{text}");
    assert!(text.contains("branch t=2 q1 on q2"), "{text}");
}

#[test]
fn shipped_circuits_pass() {
    for name in ["bell.qc", "measurement.qc", "undo.qc", "rotation.qc"] {
        let o = descnet(&["check", &circuit(name)], None);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn failing_assertion_exits_one() {
    let dir = TempDir::new().unwrap();
    let src = write(&dir, "f.qc", "qubits 2\nh 1\ncnot 1 2\nassert-sharp 1 z 1\n");
    assert_eq!(descnet(&["check", &src], None).status.code(), Some(1));
    let zero_weight = write(&dir, "z.qc", "qubits 2\nfoliate 1 on 2\n");
    let o = descnet(&["run", &zero_weight], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn parse_errors_exit_two_with_line() {
    let dir = TempDir::new().unwrap();
    let src = write(&dir, "bad.qc", "qubits 2\nh 1\ncnot 1 1\n");
    let o = descnet(&["check", &src], None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");

    let src = write(&dir, "bad2.qc", "qubits 1\ngate 1 1 0 1 0 0 0 0 0\n");
    let err = String::from_utf8(descnet(&["run", &src], None).stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("non-unitary"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(descnet(&[], None).status.code(), Some(2));
    assert_eq!(descnet(&["run"], None).status.code(), Some(2));
    assert_eq!(descnet(&["run", "/no/such/file.qc"], None).status.code(), Some(2));
    assert_eq!(descnet(&["scenario", "chsh", "--bogus"], None).status.code(), Some(2));
}

#[test]
fn scenarios_from_the_command_line() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("chsh.json");
    let o = descnet(&["scenario", "chsh", "--json", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let s = v["artifacts"]["S"][0][0].as_f64().unwrap();
    assert!((s - 2.8284271).abs() < 1e-7, "{s}");
    for name in ["epr", "measurement", "undo", "billiard"] {
        let o = descnet(&["scenario", name], None);
        assert_eq!(o.status.code(), Some(0), "{name}");
        assert!(String::from_utf8(o.stdout).unwrap().contains("PASS"));
    }
}

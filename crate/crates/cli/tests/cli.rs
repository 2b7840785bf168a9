use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn oiso(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oiso")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn decompose_identity() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "id.json", r#"{"schema":"oiso/1","matrix":[[1,0,0],[0,1,0],[0,0,1]]}"#);
    let out = oiso(&["decompose", "id.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["sigma"], serde_json::json!([0, 1, 2]));
    assert_eq!(r["weight"], serde_json::json!([1.0, 1.0, 1.0]));
    assert_eq!(r["schema"], "oiso/1");
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn decompose_swap_in_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "swap.json", r#"{"schema":"oiso/1","matrix":[[0,2],[3,0]]}"#);
    let r = report(&oiso(&["decompose", "swap.json"], dir.path()));
    assert_eq!(r["sigma"], serde_json::json!([1, 0]));
    assert_eq!(r["weight"], serde_json::json!([2.0, 3.0]));
    let r = report(&oiso(&["decompose", "swap.json", "--mode", "exact"], dir.path()));
    assert_eq!(r["weight"], serde_json::json!(["2", "3"]));
    assert_eq!(r["residual"], "0");
    assert_eq!(r["mode"], "exact");
}

#[test]
fn decompose_rejects_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "shear.json", r#"{"schema":"oiso/1","matrix":[[1,1],[0,1]]}"#);
    let out = oiso(&["decompose", "shear.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"], "rejected");
    assert_eq!(r["certificate"]["accept"], false);
    assert!(r["certificate"]["witness"]["image"].is_array());
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(oiso(&["decompose", "missing.json"], dir.path()).status.code(), Some(1));
    assert_eq!(oiso(&["no-such-command"], dir.path()).status.code(), Some(1));
    write(dir.path(), "float.json", r#"{"schema":"oiso/1","matrix":[[0.5,0],[0,1]]}"#);
    let out = oiso(&["decompose", "float.json", "--mode", "exact"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exact mode refuses"));
    write(dir.path(), "noschema.json", r#"{"matrix":[[1]]}"#);
    assert_eq!(oiso(&["decompose", "noschema.json"], dir.path()).status.code(), Some(1));
    write(dir.path(), "singular.json", r#"{"schema":"oiso/1","matrix":[[1,1],[1,1]]}"#);
    assert_eq!(oiso(&["decompose", "singular.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn classify_permutation_is_algebra_iso() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "perm.json", r#"{"schema":"oiso/1","matrix":[[0,1,0],[0,0,1],[1,0,0]]}"#);
    let out = oiso(&["classify", "perm.json", "--samples", "16"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["kind"], "algebra-iso");
}

#[test]
fn adequacy_on_lipschitz_family() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "space.json", r#"{"schema":"oiso/1","labels":["a","b","c"],"metric":[[0,1,2],[1,0,1],[2,1,0]]}"#);
    write(dir.path(), "lip.json", r#"{"schema":"oiso/1","space":"space.json","generators":"lipschitz"}"#);
    let out = oiso(&["adequacy", "lip.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["adequate"], true);
    assert_eq!(r["has_constants"], true);
}

#[test]
fn compactify_sin_inverse() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "sin.json",
        r#"{"schema":"oiso/1","samples":[0.1,0.25,0.5,1.0],"generators":["t","sin(1/t)"],
            "sequences":[{"rule":"1/(k*pi)","prefix":10000},{"rule":"1/(2*k*pi+pi/2)","prefix":10000}]}"#,
    );
    let out = oiso(&["compactify", "sin.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let added = report(&out)["compactification"]["added"].as_array().unwrap().clone();
    assert_eq!(added.len(), 2);
}

#[test]
fn compactify_with_reflection() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "unit.json",
        r#"{"schema":"oiso/1","samples":[0.25,0.5,0.75],"generators":["1","t"],
            "sequences":[{"rule":"1/(k+1)","prefix":10000},{"rule":"1-1/(k+1)","prefix":10000}]}"#,
    );
    write(dir.path(), "flip.json", r#"{"schema":"oiso/1","matrix":[[1,1],[0,-1]]}"#);
    let out = oiso(&["compactify", "unit.json", "--operator", "flip.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["decomposition"]["sigma"], serde_json::json!([2, 1, 0, 4, 3]));
    assert_eq!(r["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = oiso(&["example", "witness", "--a", "0", "--b", "1"], dir.path());
    let r = report(&out);
    assert_eq!((r["value_at_a"].as_f64(), r["value_at_b"].as_f64()), (Some(0.0), Some(1.0)));

    let out = oiso(&["example", "local-form", "--expr", "(clamp (clamp t))", "--interval", "0.2,0.9"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["local_form"]["agreement"].as_f64().unwrap() <= 1e-10);

    let out = oiso(&["example", "decay", "--expr", "(lin (0.5 0.5) (t (const 1)))"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["report"]["passed"], true);
    let out = oiso(&["example", "decay", "--expr", "(lin (3 1) (t (const 1)))"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = oiso(&["example", "lemma8", "--expr", "(clamp t", "--interval", "0,1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fuzz_round_trip_and_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&oiso(&["fuzz", "--dim", "1", "--count", "1", "--instances"], dir.path()));
    assert_eq!(r["passed"], true);
    assert_eq!(r["instances"].as_array().unwrap().len(), 1);

    let out = oiso(&["fuzz", "--dim", "8", "--count", "50", "--seed", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["match_rate"], 1.0);

    let r = report(&oiso(&["fuzz", "--dim", "2", "--count", "100", "--perturbation", "0.5"], dir.path()));
    assert_eq!(r["unsound_accepts"], 0);
    assert_eq!(r["accepted"], 0);
}

#[test]
fn reports_are_byte_identical_and_written() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["fuzz", "--dim", "6", "--count", "40", "--seed", "11", "--mode", "exact", "--json-out", "r.json"];
    let a = oiso(&args, dir.path());
    let first = std::fs::read(dir.path().join("r.json")).unwrap();
    let b = oiso(&args, dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, std::fs::read(dir.path().join("r.json")).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().trim_end(), String::from_utf8(a.stdout).unwrap().trim_end());
}

use oiso_demo::{decompose_matrix_json, local_form_json, sin_compactification_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn decomposes_a_swap() {
    let v = parse(decompose_matrix_json("[[0,2],[3,0]]", false).unwrap());
    assert_eq!(v["status"], "accepted");
    assert_eq!(v["decomposition"]["sigma"], serde_json::json!([1, 0]));
    let v = parse(decompose_matrix_json(r#"[["1/2",0],[0,3]]"#, true).unwrap());
    assert_eq!(v["decomposition"]["weight"], serde_json::json!(["1/2", "3"]));
}

#[test]
fn rejects_a_shear_and_reports_bad_input() {
    let v = parse(decompose_matrix_json("[[1,1],[0,1]]", false).unwrap());
    assert_eq!(v["status"], "rejected");
    assert!(v["certificate"]["witness"].is_object());
    assert!(decompose_matrix_json("[[1,1],[1,1]]", false).is_err());
    assert!(decompose_matrix_json("not json", false).is_err());
}

#[test]
fn local_form_plot_data() {
    let v = parse(local_form_json("(clamp (lin (3 -1) (t (const 1))))", 0.0, 1.0, 50).unwrap());
    assert_eq!(v["curve"].as_array().unwrap().len(), 50);
    assert!(v["agreement"].as_f64().unwrap() <= 1e-10);
    let j = &v["interval"];
    assert!(j["lo"].as_f64().unwrap() < j["hi"].as_f64().unwrap());
    assert!(local_form_json("(clamp", 0.0, 1.0, 10).is_err());
}

#[test]
fn sin_compactification_has_three_boundary_points() {
    let v = parse(sin_compactification_json(10_000, 40).unwrap());
    let added = v["compactification"]["added"].as_array().unwrap();
    assert_eq!(added.len(), 3);
    let mut second: Vec<f64> = added.iter().map(|p| p["coords"][1].as_f64().unwrap()).collect();
    second.sort_by(f64::total_cmp);
    for (got, want) in second.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((got - want).abs() < 1e-6);
    }
}

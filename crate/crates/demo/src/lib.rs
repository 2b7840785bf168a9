//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export wraps a plain function returning JSON text, so the same logic
//! is testable natively.

use oiso::compact::{compactify, Generator, LimitOptions, SampledModel, SequenceSpec};
use oiso::example_space::{local_form, Expr, Interval, DEFAULT_DEPTH_CAP};
use oiso::io::parse_matrix;
use oiso::recovery::{decompose_accepted, RecoveryOptions};
use oiso::{is_order_isomorphism, Mode, OperatorModel, Rational, Scalar};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn decompose_typed<S: Scalar>(rows: &[Vec<Value>], tol: f64) -> oiso::Result<Value> {
    let opts = RecoveryOptions::with_tol(tol);
    let t = OperatorModel::point(parse_matrix::<S>(rows)?, tol)?;
    let cert = is_order_isomorphism(&t, &opts.cone)?;
    if !cert.accept {
        return Ok(json!({ "status": "rejected", "certificate": cert }));
    }
    let d = decompose_accepted(&t, &opts)?;
    Ok(json!({ "status": "accepted", "decomposition": d }))
}

/// Decompose a point-basis matrix given as JSON rows, e.g. `[[0,2],[3,0]]`.
pub fn decompose_matrix_json(matrix: &str, exact: bool) -> Result<String, String> {
    let rows: Vec<Vec<Value>> = serde_json::from_str(matrix).map_err(|e| format!("matrix is not JSON rows: {e}"))?;
    let mode = if exact { Mode::Exact } else { Mode::Float };
    let out = match mode {
        Mode::Exact => decompose_typed::<Rational>(&rows, 0.0),
        Mode::Float => decompose_typed::<f64>(&rows, oiso::DEFAULT_TOL),
    };
    match out {
        Ok(v) => Ok(v.to_string()),
        Err(e) if e.is_rejection() => Ok(json!({ "status": "rejected", "error": e.to_string() }).to_string()),
        Err(e) => Err(e.to_string()),
    }
}

fn curve(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Vec<[f64; 2]> {
    let n = points.max(2);
    (0..n)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            [t, f(t)]
        })
        .collect()
}

/// Plot data for a clamp expression on `[0, 1]` and its local form on a
/// subinterval of `[lo, hi]`.
pub fn local_form_json(expr: &str, lo: f64, hi: f64, points: usize) -> Result<String, String> {
    let e = Expr::parse(expr).map_err(|e| e.to_string())?;
    let iv = Interval::new(lo, hi).map_err(|e| e.to_string())?;
    let lf = local_form(&e, iv, DEFAULT_DEPTH_CAP).map_err(|e| e.to_string())?;
    let j = lf.interval;
    Ok(json!({
        "expr": e.to_string(),
        "level": e.level(),
        "curve": curve(|t| e.eval(t), 0.0, 1.0, points),
        "search": iv,
        "interval": j,
        "form": lf.form.to_string(),
        "form_curve": curve(|t| lf.form.eval(t), j.lo, j.hi, points),
        "agreement": lf.agreement,
    })
    .to_string())
}

/// The `(t, sin(1/t))` embedding of `(0, 1]` in compactified coordinates,
/// with the boundary points reached along three sequences.
pub fn sin_compactification_json(prefix: usize, points: usize) -> Result<String, String> {
    let err = |e: oiso::Error| e.to_string();
    let generators = vec![Generator::symbolic("t").map_err(err)?, Generator::symbolic("sin(1/t)").map_err(err)?];
    let rule = |r: &str| SequenceSpec::Rule { rule: r.into(), prefix: prefix.max(8) };
    let model = SampledModel {
        samples: (1..=points.max(2)).map(|i| i as f64 / points.max(2) as f64).collect(),
        generators,
        sequences: vec![rule("1/(k*pi)"), rule("1/(2*k*pi + pi/2)"), rule("1/(2*k*pi - pi/2)")],
    };
    let c = compactify(&model, &LimitOptions::default()).map_err(err)?;
    let squash = |v: f64| v / (1.0 + v.abs());
    // Log-spaced so the oscillation near 0 is visible.
    let trace: Vec<[f64; 2]> = (0..4000)
        .map(|i| {
            let t = 10f64.powf(-3.0 * i as f64 / 3999.0);
            [squash(t), squash((1.0 / t).sin())]
        })
        .collect();
    Ok(json!({ "compactification": c, "trace": trace }).to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn decompose_matrix(matrix: &str, exact: bool) -> Result<String, JsError> {
    js(decompose_matrix_json(matrix, exact))
}

#[wasm_bindgen]
pub fn local_form_plot(expr: &str, lo: f64, hi: f64, points: usize) -> Result<String, JsError> {
    js(local_form_json(expr, lo, hi, points))
}

#[wasm_bindgen]
pub fn sin_compactification(prefix: usize, points: usize) -> Result<String, JsError> {
    js(sin_compactification_json(prefix, points))
}

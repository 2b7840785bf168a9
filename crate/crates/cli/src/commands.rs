use std::path::Path;

use oiso::adequacy::{check_adequate, AdequacyOptions};
use oiso::classify::{classify, Kind, ScreenOptions};
use oiso::compact::{compactified_decompose, compactify, LimitOptions, MatchOptions};
use oiso::example_space::{decay_check, local_form, separation_witness, Expr, Interval};
use oiso::fuzz::{run_fuzz, FuzzSpec};
use oiso::io::{load_family, load_operator, CompactOperatorDoc, SampledDoc};
use oiso::recovery::{decompose_accepted, verify_representation, RecoveryOptions};
use oiso::{is_order_isomorphism, Error, Mode, Rational, Result, Scalar};
use serde_json::{json, Value};

use crate::report::{digest, envelope, Outcome, Status};
use crate::{Cli, Command, ExampleCommand, Global};

const CLASSIFY_SAMPLES: usize = 256;
const ADEQUACY_SAMPLES: usize = 64;
const VERIFY_SAMPLES: usize = 32;

macro_rules! dispatch {
    ($mode:expr, $f:ident, $($arg:expr),*) => {
        match $mode {
            Mode::Float => $f::<f64>($($arg),*),
            Mode::Exact => $f::<Rational>($($arg),*),
        }
    };
}

fn decompose_typed<S: Scalar>(g: &Global, path: &Path) -> Result<Outcome> {
    let opts = recovery(g);
    let t = load_operator::<S>(path, g.tol)?;
    let cert = is_order_isomorphism(&t, &opts.cone)?;
    if !cert.accept {
        return Ok(Outcome::rejected(json!({ "certificate": to_json(&cert)? })));
    }
    let d = decompose_accepted(&t, &opts)?;
    let check = verify_representation(&t, &d, g.samples.unwrap_or(VERIFY_SAMPLES), g.seed)?;
    let mut out = to_json(&d)?;
    out["verification_residual"] = check.to_json();
    out["certificate"] = to_json(&cert)?;
    Ok(Outcome::accepted(out))
}

fn classify_typed<S: Scalar>(g: &Global, path: &Path) -> Result<Outcome> {
    let t = load_operator::<S>(path, g.tol)?;
    let opts = ScreenOptions { samples: g.samples.unwrap_or(CLASSIFY_SAMPLES), seed: g.seed, recovery: recovery(g) };
    let report = classify(&t, &opts)?;
    Ok(Outcome::by(report.kind != Kind::Rejected, to_json(&report)?))
}

fn adequacy_typed<S: Scalar>(g: &Global, path: &Path) -> Result<Outcome> {
    let fam = load_family::<S>(path, g.tol)?;
    let opts = AdequacyOptions { tol: g.tol, samples: g.samples.unwrap_or(ADEQUACY_SAMPLES), seed: g.seed };
    let report = check_adequate(&fam, &opts)?;
    Ok(Outcome::by(report.adequate, to_json(&report)?))
}

fn read_doc<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn compactify_cmd(g: &Global, input: &Path, operator: Option<&Path>) -> Result<Outcome> {
    float_only(g, "compactify")?;
    let model = read_doc::<SampledDoc>(input)?.build()?;
    let limits = LimitOptions::default();
    let domain = compactify(&model, &limits)?;
    let mut out = json!({ "compactification": to_json(&domain)? });
    if let Some(op) = operator {
        let doc: CompactOperatorDoc = read_doc(op)?;
        let matrix = doc.matrix()?;
        let codomain = match &doc.codomain {
            Some(c) => {
                let cod = compactify(&c.build()?, &limits)?;
                out["codomain"] = to_json(&cod)?;
                cod
            }
            None => domain.clone(),
        };
        let opts = MatchOptions { tol: g.tol, ..MatchOptions::default() };
        out["decomposition"] = to_json(compactified_decompose(&matrix, &domain, &codomain, &opts)?)?;
    }
    Ok(Outcome::accepted(out))
}

fn parse_interval(text: &str) -> Result<Interval> {
    let bad = || Error::Input(format!("interval must be `a,b`, got `{text}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Interval::new(a, b)
}

fn example_cmd(g: &Global, ex: &ExampleCommand) -> Result<Outcome> {
    float_only(g, "example")?;
    match ex {
        ExampleCommand::LocalForm { expr, interval, depth_cap } => {
            let e = Expr::parse(expr)?;
            let i = parse_interval(interval)?;
            let lf = local_form(&e, i, *depth_cap)?;
            Ok(Outcome::accepted(json!({
                "example": "local-form",
                "expr": e.to_string(),
                "level": e.level(),
                "interval": to_json(i)?,
                "local_form": to_json(&lf)?,
                "local_form_expr": lf.form.to_string(),
            })))
        }
        ExampleCommand::Decay { expr, t_max, grid } => {
            let e = Expr::parse(expr)?;
            let r = decay_check(&e, *t_max, *grid)?;
            Ok(Outcome::by(
                r.passed,
                json!({ "example": "decay", "expr": e.to_string(), "t_max": t_max, "report": to_json(&r)? }),
            ))
        }
        ExampleCommand::Witness { a, b } => {
            let e = separation_witness(*a, *b)?;
            Ok(Outcome::accepted(json!({
                "example": "witness",
                "expr": e.to_string(),
                "value_at_a": e.eval(*a),
                "value_at_b": e.eval(*b),
            })))
        }
    }
}

/// Runs the command; rejections become reports, everything else is an error.
pub fn run(cli: &Cli, argv: Vec<String>) -> Result<(Value, Status)> {
    let g = &cli.global;
    let (name, inputs, outcome) = match &cli.command {
        Command::Decompose { operator } => {
            ("decompose", vec![digest(operator)?], dispatch!(g.mode, decompose_typed, g, operator))
        }
        Command::Classify { operator } => {
            ("classify", vec![digest(operator)?], dispatch!(g.mode, classify_typed, g, operator))
        }
        Command::Adequacy { family } => {
            ("adequacy", vec![digest(family)?], dispatch!(g.mode, adequacy_typed, g, family))
        }
        Command::Compactify { input, operator } => {
            let mut inputs = vec![digest(input)?];
            if let Some(op) = operator {
                inputs.push(digest(op)?);
            }
            ("compactify", inputs, compactify_cmd(g, input, operator.as_deref()))
        }
        Command::Example(ex) => ("example", vec![], example_cmd(g, ex)),
        Command::Fuzz { dim, count, perturbation, instances } => {
            let spec = FuzzSpec { dim: *dim, seed: g.seed, count: *count, perturbation: *perturbation, mode: g.mode };
            ("fuzz", vec![], fuzz_cmd(g, &spec, *instances))
        }
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) if e.is_rejection() => Outcome::rejected(json!({ "error": e.to_string() })),
        Err(e) => return Err(e),
    };
    let status = outcome.status;
    Ok((envelope(name, argv, inputs, g, outcome), status))
}

fn float_only(g: &Global, what: &str) -> Result<()> {
    match g.mode {
        Mode::Float => Ok(()),
        Mode::Exact => Err(Error::Input(format!("{what} runs in float mode only"))),
    }
}

fn recovery(g: &Global) -> RecoveryOptions {
    RecoveryOptions::with_tol(g.tol)
}

fn to_json(v: impl serde::Serialize) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn fuzz_cmd(g: &Global, spec: &FuzzSpec, instances: bool) -> Result<Outcome> {
    let report = run_fuzz(spec, &recovery(g))?;
    let mut out = to_json(&report)?;
    if !instances {
        out.as_object_mut().unwrap().remove("instances");
    }
    Ok(Outcome::by(report.passed, out))
}

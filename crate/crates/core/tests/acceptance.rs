//! Acceptance suite: one pass/fail line per criterion.
//!
//! Every criterion builds a JSON report from seeded inputs only; the last
//! criterion reruns the others and compares the serialized bytes.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_traits::Signed;
use oiso::adequacy::{build_precise_bump, check_adequate, AdequacyOptions};
use oiso::classify::{classify, isometry_reduce, Kind, ScreenOptions};
use oiso::compact::{
    compactified_decompose, compactify, embed, limit_points, Generator, LimitOptions, MatchOptions, SampledModel,
    SequenceSpec,
};
use oiso::example_space::{
    decay_check, interval_eval, local_form, random_clamp_expr, random_subinterval, random_theta_expr, DEFAULT_DEPTH_CAP,
};
use oiso::fuzz::{instance_rng, random_monomial, random_non_monomial, random_permutation, random_signed_unimodular};
use oiso::recovery::{compose, decompose_accepted, fip_check, invert_bijection, normalize, recovered_map};
use oiso::space::build_lipschitz_family;
use oiso::{
    decompose, is_order_isomorphism, ConeOptions, FunctionVec, Matrix, OperatorModel, PointSpace, Rational,
    RecoveryOptions, Scalar,
};
use rand::Rng;
use serde_json::{json, Value};

const SEED: u64 = 0x5eed_0001;

struct Verdict {
    passed: bool,
    summary: String,
    report: Value,
}

fn q(n: i64) -> Rational {
    Rational::from_ratio(n, 1)
}

fn to_f64(w: &[Rational]) -> Vec<f64> {
    w.iter().map(Scalar::to_f64_lossy).collect()
}

/// Monomial instance `i` of criteria 1 and 3: dimension in `2..=50`.
fn monomial_instance(i: u64) -> (Vec<usize>, Vec<Rational>) {
    let mut rng = instance_rng(SEED ^ 1, i);
    let n = rng.random_range(2..=50);
    random_monomial::<Rational, _>(&mut rng, n)
}

fn criterion_1() -> Verdict {
    let opts = RecoveryOptions::default();
    let (mut exact_ok, mut float_ok, mut worst) = (0, 0, 0.0f64);
    let mut failures = Vec::new();
    for i in 0..1000 {
        let (sigma, weight) = monomial_instance(i);
        let t = compose(&sigma, &weight, 0.0).unwrap();
        match decompose(&t, &opts) {
            Ok(d) if d.sigma == sigma && d.weight.values() == &weight[..] && d.residual == q(0) => exact_ok += 1,
            other => failures.push(json!({ "instance": i, "mode": "exact", "error": format!("{:?}", other.err()) })),
        }
        let wf = to_f64(&weight);
        let tf = compose(&sigma, &wf, opts.tol).unwrap();
        match decompose(&tf, &opts) {
            Ok(d) if d.sigma == sigma && d.residual <= 1e-9 => {
                float_ok += 1;
                worst = worst.max(d.residual);
            }
            other => failures.push(json!({ "instance": i, "mode": "float", "error": format!("{:?}", other.err()) })),
        }
    }
    Verdict {
        passed: exact_ok == 1000 && float_ok == 1000 && worst <= 1e-9,
        summary: format!("exact recovery {exact_ok}/1000, float {float_ok}/1000, max float residual {worst:.1e}"),
        report: json!({ "exact": exact_ok, "float": float_ok, "max_float_residual": worst, "failures": failures }),
    }
}

/// Witness `f ≥ 0` whose image under `T` (or `T⁻¹`) has a negative entry.
fn witness_leaves_orthant(t: &OperatorModel<Rational>, cert: &oiso::Certificate<Rational>) -> bool {
    let Some(w) = &cert.witness else { return false };
    if !w.function.is_nonneg(0.0) {
        return false;
    }
    let m = match w.direction {
        oiso::cone::Direction::Forward => t.matrix(),
        oiso::cone::Direction::Inverse => t.inverse_matrix(),
    };
    let image = m.mul_vec(w.function.values());
    image == w.image.values() && image.iter().any(|v| v < &q(0))
}

fn criterion_2() -> Verdict {
    let mut verified = 0;
    let mut failures = Vec::new();
    for i in 0..1000u64 {
        let mut rng = instance_rng(SEED ^ 2, i);
        let n = rng.random_range(2..=10);
        let m = random_non_monomial::<Rational, _>(&mut rng, n);
        let t = OperatorModel::point(m, 0.0).unwrap();
        let cert = is_order_isomorphism(&t, &ConeOptions::default()).unwrap();
        if !cert.accept && witness_leaves_orthant(&t, &cert) {
            verified += 1;
        } else {
            failures.push(i);
        }
    }
    Verdict {
        passed: verified == 1000,
        summary: format!("rejected with verified witness {verified}/1000"),
        report: json!({ "verified": verified, "failures": failures }),
    }
}

fn criterion_3() -> Verdict {
    let opts = RecoveryOptions::default();
    let (mut fip, mut symmetric, mut positive, mut coherent, mut weight_identity) = (0, 0, 0, 0, 0);
    let count = 1000;
    for i in 0..count {
        let (sigma, weight) = monomial_instance(i);
        let n = sigma.len();
        let t = compose(&sigma, &weight, 0.0).unwrap();
        let ti = t.inverse();
        let d = decompose_accepted(&t, &opts).unwrap();
        let di = decompose_accepted(&ti, &opts).unwrap();

        let x0 = (i as usize) % n;
        if (1..=3).all(|k| fip_check(&t, x0, k, 8, SEED ^ i, opts.tol).unwrap()) {
            fip += 1;
        }
        let forward = recovered_map(&t, &opts).unwrap();
        let backward = recovered_map(&ti, &opts).unwrap();
        if (0..n).all(|x| (0..n).all(|y| (forward[x] == y) == (backward[y] == x))) {
            symmetric += 1;
        }
        if d.weight.iter().all(|w| w > &q(0)) {
            positive += 1;
        }
        if invert_bijection(&d.sigma).as_deref() == Some(&di.sigma[..]) {
            coherent += 1;
        }
        // Tf = w · f∘σ and T⁻¹g = w' · g∘σ⁻¹ give w(y) · w'(σ(y)) = 1.
        if (0..n).all(|y| d.weight[y].clone() * di.weight[d.sigma[y]].clone() == q(1)) {
            weight_identity += 1;
        }
    }
    let all = [fip, symmetric, positive, coherent, weight_identity];
    Verdict {
        passed: all.iter().all(|&c| c == count),
        summary: format!(
            "FIP {fip}, symmetry {symmetric}, positive weight {positive}, inverse coherence {coherent}, weight identity {weight_identity} (of {count})"
        ),
        report: json!({
            "instances": count, "fip": fip, "symmetry": symmetric, "positive_weight": positive,
            "inverse_coherence": coherent, "weight_identity": weight_identity,
        }),
    }
}

fn criterion_4() -> Verdict {
    let opts = ScreenOptions { samples: 24, seed: SEED, recovery: RecoveryOptions::default() };
    let (mut iso, mut lattice, mut algebra) = (0, 0, 0);
    let mut failures = Vec::new();
    for i in 0..200u64 {
        let mut rng = instance_rng(SEED ^ 4, i);
        let n = rng.random_range(2..=12);

        let (sigma, sign) = random_signed_unimodular::<Rational, _>(&mut rng, n);
        let t = compose(&sigma, &sign, 0.0).unwrap();
        let ok = isometry_reduce(&t, &opts).ok().and_then(|(g, reduced)| {
            let unimodular = g.iter().all(|v| v.abs() == q(1));
            let d = decompose_accepted(&reduced, &opts.recovery).ok()?;
            let r = classify(&t, &opts).ok()?;
            let direct = r.decomposition?;
            let kind = if sign.iter().all(|v| v == &q(1)) { Kind::AlgebraIso } else { Kind::Isometry };
            Some(unimodular && d.sigma == sigma && direct.sigma == d.sigma && r.kind == kind)
        });
        if ok == Some(true) {
            iso += 1;
        } else {
            failures.push(json!({ "instance": i, "pipeline": "isometry" }));
        }

        let (sigma, weight) = random_monomial::<Rational, _>(&mut rng, n);
        let t = compose(&sigma, &weight, 0.0).unwrap();
        let ok = classify(&t, &opts).ok().and_then(|r| {
            let d = r.decomposition?;
            let kind_ok =
                r.kind == Kind::LatticeIso || (r.kind == Kind::AlgebraIso && weight.iter().all(|w| w == &q(1)));
            Some(kind_ok && d.sigma == sigma && d.weight.iter().all(|w| w > &q(0)))
        });
        if ok == Some(true) {
            lattice += 1;
        } else {
            failures.push(json!({ "instance": i, "pipeline": "lattice" }));
        }

        let sigma = random_permutation(&mut rng, n);
        let t = compose(&sigma, &vec![q(1); n], 0.0).unwrap();
        let ok = classify(&t, &opts).ok().and_then(|r| {
            let d = r.decomposition?;
            Some(r.kind == Kind::AlgebraIso && d.sigma == sigma && d.weight.iter().all(|w| w == &q(1)))
        });
        if ok == Some(true) {
            algebra += 1;
        } else {
            failures.push(json!({ "instance": i, "pipeline": "algebra" }));
        }
    }
    Verdict {
        passed: iso == 200 && lattice == 200 && algebra == 200,
        summary: format!(
            "isometry {iso}/200, lattice-iso {lattice}/200, algebra-iso {algebra}/200, sigma agreement exact"
        ),
        report: json!({ "isometry": iso, "lattice": lattice, "algebra": algebra, "failures": failures }),
    }
}

fn criterion_5() -> Verdict {
    let opts = RecoveryOptions::default();
    let (mut ok, mut worst) = (0, 0.0f64);
    for i in 0..200u64 {
        let mut rng = instance_rng(SEED ^ 5, i);
        let n = rng.random_range(2..=30);
        let (sigma, weight) = random_monomial::<f64, _>(&mut rng, n);
        let t = compose(&sigma, &weight, opts.tol).unwrap();
        let Ok(norm) = normalize(&t) else { continue };
        let s1 = norm.operator.apply_coeffs(&vec![1.0; n]);
        let dev = s1.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
        let d = decompose(&t, &opts).unwrap();
        let ds = decompose(&norm.operator, &opts);
        let rederived = norm.rederive_weight(&d.sigma);
        let weight_dev = rederived.iter().zip(d.weight.iter()).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
        if dev <= 1e-12 && ds.is_ok_and(|ds| ds.sigma == d.sigma) && d.sigma == sigma && weight_dev <= 1e-9 {
            ok += 1;
        }
    }
    Verdict {
        passed: ok == 200 && worst <= 1e-12,
        summary: format!("normalized {ok}/200 with identical sigma, max |S1 - 1| {worst:.1e}"),
        report: json!({ "ok": ok, "max_unit_deviation": worst }),
    }
}

fn random_metric_space<R: Rng>(rng: &mut R, n: usize) -> Arc<PointSpace> {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))).collect();
    let metric =
        pts.iter().map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect()).collect();
    Arc::new(PointSpace::with_metric((1..=n).map(|i| format!("p{i}")).collect(), metric).unwrap())
}

fn criterion_6() -> Verdict {
    let tol = 1e-9;
    let (mut adequate, mut flips, mut bumps, mut bump_failures) = (0, 0, 0usize, 0usize);
    for i in 0..50u64 {
        let mut rng = instance_rng(SEED ^ 6, i);
        let n = rng.random_range(2..=20);
        let space = random_metric_space(&mut rng, n);
        let fam = build_lipschitz_family(space, &[]).unwrap();
        let opts = AdequacyOptions { tol, samples: 16, seed: SEED ^ i };
        let r = check_adequate(&fam, &opts).unwrap();
        if r.separates && r.has_constants && r.g_invariant && r.cone_generates && r.adequate {
            adequate += 1;
        }
        let c = fam.names().unwrap().iter().position(|s| s == "1").unwrap();
        if !fam.without_generator(c, tol).unwrap().contains_constants(tol) {
            flips += 1;
        }
        if n <= 8 {
            // Every closed set avoiding the anchor; in a finite space all sets are closed.
            for x0 in 0..n {
                for mask in 0u32..(1 << n) {
                    if mask & (1 << x0) != 0 {
                        continue;
                    }
                    let set: Vec<usize> = (0..n).filter(|&z| mask & (1 << z) != 0).collect();
                    let good = build_precise_bump(&fam, x0, &set, tol).is_ok_and(|h: FunctionVec<f64>| {
                        h.iter().all(|v| (-tol..=1.0 + tol).contains(v))
                            && (h[x0] - 1.0).abs() <= tol
                            && set.iter().all(|&z| h[z].abs() <= tol)
                    });
                    bumps += 1;
                    bump_failures += usize::from(!good);
                }
            }
        }
    }
    Verdict {
        passed: adequate == 50 && flips == 50 && bump_failures == 0 && bumps > 0,
        summary: format!(
            "adequate {adequate}/50, constants removal flips {flips}/50, precise bumps {}/{bumps} valid",
            bumps - bump_failures
        ),
        report: json!({ "adequate": adequate, "flips": flips, "bumps": bumps, "bump_failures": bump_failures }),
    }
}

fn criterion_7() -> Verdict {
    let limits = LimitOptions::default();
    let gens = |ts: &[&str]| ts.iter().map(|t| Generator::symbolic(t).unwrap()).collect::<Vec<_>>();
    let rule = |r: &str| SequenceSpec::Rule { rule: r.into(), prefix: 10_000 };
    let samples: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();

    let id = gens(&["t"]);
    let interior = embed(&samples, &id).unwrap();
    let added = limit_points(&[rule("1/k")], &id, &interior, &limits).unwrap();
    let one_point = added.len() == 1 && added[0].coords[0].finite().is_some_and(|v| v.abs() <= 1e-6);

    let osc = gens(&["t", "sin(1/t)"]);
    let interior = embed(&samples, &osc).unwrap();
    let added = limit_points(&[rule("1/(k*pi)"), rule("1/(2*k*pi + pi/2)")], &osc, &interior, &limits).unwrap();
    let mut second: Vec<f64> = added.iter().filter_map(|p| p.coords[1].finite()).collect();
    second.sort_by(f64::total_cmp);
    let two_points =
        added.len() == 2 && second.len() == 2 && second[0].abs() <= 1e-6 && (second[1] - 1.0).abs() <= 1e-6;

    let model = SampledModel {
        samples: (1..10).map(|i| i as f64 / 10.0).collect(),
        generators: gens(&["1", "t"]),
        sequences: vec![rule("1/(k+1)"), rule("1 - 1/(k+1)")],
    };
    let c = compactify(&model, &limits).unwrap();
    let flip = Matrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, -1.0]]).unwrap();
    let m = c.interior.len();
    let swapped = compactified_decompose(&flip, &c, &c, &MatchOptions::default())
        .is_ok_and(|d| c.added.len() == 2 && d.sigma[m] == m + 1 && d.sigma[m + 1] == m);

    Verdict {
        passed: one_point && two_points && swapped,
        summary: format!(
            "F = {{id}} one added point: {one_point}; F = {{id, sin(1/t)}} two added points: {two_points}; reflection swaps endpoints: {swapped}"
        ),
        report: json!({
            "identity_one_point": one_point, "sin_two_points": two_points, "second_coordinates": second,
            "reflection_swaps": swapped,
        }),
    }
}

fn criterion_8() -> Verdict {
    let (mut local, mut worst) = (0, 0.0f64);
    for i in 0..500u64 {
        let mut rng = instance_rng(SEED ^ 8, i);
        let e = random_clamp_expr(&mut rng, 3);
        let iv = random_subinterval(&mut rng);
        if let Ok(lf) = local_form(&e, iv, DEFAULT_DEPTH_CAP) {
            if lf.agreement <= 1e-10 {
                local += 1;
            }
            worst = worst.max(lf.agreement);
        }
    }
    let mut decay = 0;
    for i in 0..500u64 {
        let mut rng = instance_rng(SEED ^ 0x80, i);
        let u = random_theta_expr(&mut rng, 3);
        if decay_check(&u, 1e6, 601).is_ok_and(|r| r.passed) {
            decay += 1;
        }
    }
    let mut sound = 0;
    for i in 0..10_000u64 {
        let mut rng = instance_rng(SEED ^ 0x800, i);
        let level = rng.random_range(1..=3);
        let e =
            if rng.random_bool(0.5) { random_clamp_expr(&mut rng, level) } else { random_theta_expr(&mut rng, level) };
        let iv = random_subinterval(&mut rng);
        let t = rng.random_range(iv.lo..=iv.hi);
        if interval_eval(&e, iv).contains(e.eval(t)) {
            sound += 1;
        }
    }
    Verdict {
        passed: local == 500 && decay == 500 && sound == 10_000,
        summary: format!(
            "local form {local}/500 (max disagreement {worst:.1e}), decay {decay}/500, enclosures {sound}/10000"
        ),
        report: json!({ "local_form": local, "max_disagreement": worst, "decay": decay, "enclosures": sound }),
    }
}

type Criterion = (u8, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 8] = [
    (1, "round-trip decomposition", criterion_1),
    (2, "soundness of rejection", criterion_2),
    (3, "proof-chain properties", criterion_3),
    (4, "classical pipelines", criterion_4),
    (5, "division trick", criterion_5),
    (6, "adequacy", criterion_6),
    (7, "compactification examples", criterion_7),
    (8, "example space", criterion_8),
];

fn line(id: u8, title: &str, passed: bool, detail: &str, secs: f64) {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("{tag}  criterion {id}  {title}: {detail} [{secs:.1}s]");
}

fn main() -> ExitCode {
    let mut all = true;
    let mut reports = Vec::new();
    let start = Instant::now();
    for (id, title, run) in CRITERIA {
        let t0 = Instant::now();
        let v = run();
        line(id, title, v.passed, &v.summary, t0.elapsed().as_secs_f64());
        all &= v.passed;
        reports.push(serde_json::to_vec(&json!({ "criterion": id, "passed": v.passed, "report": v.report })).unwrap());
    }

    let t0 = Instant::now();
    let mut identical = 0;
    for ((id, _, run), first) in CRITERIA.iter().zip(&reports) {
        let v = run();
        let again = serde_json::to_vec(&json!({ "criterion": id, "passed": v.passed, "report": v.report })).unwrap();
        identical += usize::from(&again == first);
    }
    let det = identical == CRITERIA.len();
    line(
        9,
        "determinism",
        det,
        &format!("{identical}/{} reports byte-identical on rerun", CRITERIA.len()),
        t0.elapsed().as_secs_f64(),
    );
    all &= det;

    println!(
        "acceptance: {} in {:.1}s",
        if all { "all criteria passed" } else { "FAILED" },
        start.elapsed().as_secs_f64()
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

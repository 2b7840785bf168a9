use std::sync::Arc;

use oiso::adequacy::{build_precise_bump, check_adequate, clamp, AdequacyOptions};
use oiso::compact::{embed, is_injective, limit_points, ExtendedReal, Generator, LimitOptions, SequenceSpec};
use oiso::example_space::{
    interval_eval, local_form, random_clamp_expr, random_subinterval, random_theta_expr, separation_witness, Expr,
    Interval, DEFAULT_DEPTH_CAP,
};
use oiso::fuzz::{instance_rng, run_fuzz, FuzzSpec};
use oiso::space::build_lipschitz_family;
use oiso::{Mode, PointSpace, RecoveryOptions};
use proptest::prelude::*;
use rand::Rng;

fn metric_space(seed: u64, n: usize) -> Arc<PointSpace> {
    let mut rng = instance_rng(seed, 0);
    let pts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
    let metric = pts.iter().map(|a| pts.iter().map(|b| (a - b).abs()).collect()).collect();
    Arc::new(PointSpace::with_metric((0..n).map(|i| format!("p{i}")).collect(), metric).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clamp_is_a_clamp(t in -10.0f64..10.0) {
        let c = clamp(t);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert!(t > 0.0 || c == 0.0);
        prop_assert!(t < 1.0 || c == 1.0);
        prop_assert!(clamp(t + 0.1) >= c);
    }

    #[test]
    fn lipschitz_families_are_adequate(n in 2usize..10, seed in any::<u64>()) {
        let fam = build_lipschitz_family(metric_space(seed, n), &[]).unwrap();
        let r = check_adequate(&fam, &AdequacyOptions { tol: 1e-9, samples: 8, seed }).unwrap();
        prop_assert!(r.adequate);
    }

    #[test]
    fn precise_bumps_separate(n in 2usize..7, seed in any::<u64>(), mask in any::<u32>(), x0 in 0usize..7) {
        let x0 = x0 % n;
        let fam = build_lipschitz_family(metric_space(seed, n), &[]).unwrap();
        let set: Vec<usize> = (0..n).filter(|&z| z != x0 && mask & (1 << z) != 0).collect();
        let h = build_precise_bump(&fam, x0, &set, 1e-9).unwrap();
        prop_assert!(h.iter().all(|v| (-1e-9..=1.0 + 1e-9).contains(v)));
        prop_assert!((h[x0] - 1.0).abs() <= 1e-9);
        prop_assert!(set.iter().all(|&z| h[z].abs() <= 1e-9));
    }

    #[test]
    fn compactified_coordinates_round_trip(t in -1e6f64..1e6) {
        let x = ExtendedReal::Finite(t);
        let c = x.compactified();
        prop_assert!(c > -1.0 && c < 1.0);
        let back = ExtendedReal::from_compactified(c).finite().unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * t.abs().max(1.0));
    }

    #[test]
    fn convergent_sequences_find_their_limit(a in -5.0f64..5.0, b in 0.1f64..5.0) {
        let g = vec![Generator::symbolic("t").unwrap()];
        let rule = format!("{a} + {b}/k");
        let seqs = [SequenceSpec::Rule { rule, prefix: 10_000 }];
        let added = limit_points(&seqs, &g, &[], &LimitOptions::default()).unwrap();
        prop_assert_eq!(added.len(), 1);
        prop_assert!((added[0].coords[0].finite().unwrap() - a).abs() <= 1e-5 * (1.0 + a.abs()).powi(2));
    }

    #[test]
    fn identity_embedding_is_injective(ts in prop::collection::btree_set(1u32..1000, 1..20)) {
        let samples: Vec<f64> = ts.into_iter().map(|v| v as f64 / 1000.0).collect();
        let pts = embed(&samples, &[Generator::symbolic("t").unwrap()]).unwrap();
        prop_assert!(is_injective(&pts, 1e-6));
    }

    #[test]
    fn witnesses_separate_precisely(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let (a, b) = (a.min(b), a.max(b));
        let e = separation_witness(a, b).unwrap();
        prop_assert_eq!(e.eval(a), 0.0);
        prop_assert_eq!(e.eval(b), 1.0);
        for i in 0..=64 {
            let v = e.eval(i as f64 / 64.0);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn clamping_raises_the_level(seed in any::<u64>(), level in 1usize..4) {
        let mut rng = instance_rng(seed, 0);
        let e = random_clamp_expr(&mut rng, level);
        let deeper = Expr::clamp(e.clone());
        prop_assert_eq!(deeper.level(), e.level() + 1);
        prop_assert!(deeper.is_clamp_expr());
    }

    #[test]
    fn enclosures_contain_values(seed in any::<u64>(), level in 1usize..4, theta in any::<bool>()) {
        let mut rng = instance_rng(seed, 0);
        let e = if theta { random_theta_expr(&mut rng, level) } else { random_clamp_expr(&mut rng, level) };
        let iv = random_subinterval(&mut rng);
        let enclosure = interval_eval(&e, iv);
        for t in iv.samples(17) {
            prop_assert!(enclosure.contains(e.eval(t)));
        }
        prop_assert!(interval_eval(&e, Interval::point(iv.mid())).contains(e.eval(iv.mid())));
    }

    #[test]
    fn local_forms_agree(seed in any::<u64>(), level in 1usize..4) {
        let mut rng = instance_rng(seed, 0);
        let e = random_clamp_expr(&mut rng, level);
        let iv = random_subinterval(&mut rng);
        let lf = local_form(&e, iv, DEFAULT_DEPTH_CAP).unwrap();
        prop_assert!(iv.contains_interval(&lf.interval));
        prop_assert!(lf.agreement <= 1e-10);
        prop_assert!(lf.form.is_theta_expr());
        for t in lf.interval.samples(9) {
            prop_assert!((lf.form.eval(t) - e.eval(t)).abs() <= 1e-10);
        }
    }

    #[test]
    fn fuzz_reports_are_deterministic(dim in 1usize..8, seed in any::<u64>(), exact in any::<bool>()) {
        let mode = if exact { Mode::Exact } else { Mode::Float };
        let spec = FuzzSpec { dim, seed, count: 6, perturbation: 0.0, mode };
        let opts = RecoveryOptions::default();
        let a = serde_json::to_vec(&run_fuzz(&spec, &opts).unwrap()).unwrap();
        let b = serde_json::to_vec(&run_fuzz(&spec, &opts).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }
}

use std::sync::Arc;

use oiso::cone::Direction;
use oiso::fuzz::{instance_rng, random_non_monomial};
use oiso::recovery::compose;
use oiso::{
    cone_rep, is_order_isomorphism, Basis, ConeOptions, FunctionFamily, FunctionVec, Matrix, OperatorModel, PointSpace,
};
use proptest::prelude::*;

fn grid_family(ts: &[f64]) -> FunctionFamily<f64> {
    let space = Arc::new(PointSpace::unlabeled(ts.len()).unwrap());
    let gens = vec![FunctionVec::new(vec![1.0; ts.len()]).unwrap(), FunctionVec::new(ts.to_vec()).unwrap()];
    FunctionFamily::new(space, gens, None, 1e-12).unwrap()
}

fn quadratic_family(ts: &[f64]) -> FunctionFamily<f64> {
    let space = Arc::new(PointSpace::unlabeled(ts.len()).unwrap());
    let gens = (0..3).map(|k| FunctionVec::new(ts.iter().map(|t| t.powi(k)).collect()).unwrap()).collect();
    FunctionFamily::new(space, gens, None, 1e-12).unwrap()
}

fn interior_grid() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..100, 1..6).prop_map(|s| {
        let mut ts = vec![0.0, 1.0];
        ts.extend(s.into_iter().map(|v| v as f64 / 100.0));
        ts
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monomials_are_accepted_in_both_modes(n in 1usize..12, seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 0);
        let (sigma, weight) = oiso::fuzz::random_monomial::<f64, _>(&mut rng, n);
        let t = compose(&sigma, &weight, 1e-9).unwrap();
        for force_lp in [false, true] {
            let cert = is_order_isomorphism(&t, &ConeOptions { force_lp, ..Default::default() }).unwrap();
            prop_assert!(cert.accept);
        }
    }

    #[test]
    fn non_monomials_leave_the_orthant(n in 2usize..8, seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 1);
        let m = random_non_monomial::<f64, _>(&mut rng, n);
        let t = OperatorModel::point(m, 1e-9).unwrap();
        for force_lp in [false, true] {
            let cert = is_order_isomorphism(&t, &ConeOptions { force_lp, ..Default::default() }).unwrap();
            prop_assert!(!cert.accept);
            let w = cert.witness.unwrap();
            prop_assert!(w.function.is_nonneg(1e-9));
            let image = match w.direction {
                Direction::Forward => t.apply(&w.function).unwrap(),
                Direction::Inverse => t.apply_inverse(&w.function).unwrap(),
            };
            prop_assert!(image.iter().any(|&v| v < -1e-9));
        }
    }

    #[test]
    fn lp_and_enumeration_agree(ts in interior_grid(), m in prop::array::uniform4(-3i32..=3)) {
        let fam = grid_family(&ts);
        let matrix = Matrix::from_rows(vec![vec![m[0] as f64, m[1] as f64], vec![m[2] as f64, m[3] as f64]]).unwrap();
        prop_assume!(matrix.rank(1e-12) == 2);
        let t = OperatorModel::new(matrix, Basis::Generator, fam.clone(), fam, 1e-9).unwrap();
        let exact = is_order_isomorphism(&t, &ConeOptions::default()).unwrap();
        let lp = is_order_isomorphism(&t, &ConeOptions { force_lp: true, ..Default::default() }).unwrap();
        prop_assert_eq!(exact.accept, lp.accept);
    }

    #[test]
    fn extreme_rays_are_nonnegative_and_tight(ts in interior_grid()) {
        let fam = quadratic_family(&ts);
        let rep = cone_rep(&fam, &ConeOptions::default());
        prop_assert!(rep.enumerated);
        let d = fam.dim();
        for r in 0..rep.extreme_rays.rows() {
            let f = fam.combine(rep.extreme_rays.row(r));
            prop_assert!(f.is_nonneg(1e-9));
            let zeros = f.iter().filter(|v| v.abs() <= 1e-9).count();
            prop_assert!(zeros >= d - 1 || d == 1);
        }
    }
}

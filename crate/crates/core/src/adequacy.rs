//! Adequacy of a function family and bump-function constructions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp;
use crate::recovery::sample_span_elements;
use crate::scalar::Scalar;
use crate::space::{span_membership, FunctionFamily, FunctionVec};

/// Piecewise-linear clamp: 0 below 0, identity on `[0, 1]`, 1 above 1.
pub fn clamp(t: f64) -> f64 {
    t.clamp(0.0, 1.0)
}

pub fn clamp_scalar<S: Scalar>(t: &S) -> S {
    if t.is_negative() {
        S::zero()
    } else if *t > S::one() {
        S::one()
    } else {
        t.clone()
    }
}

pub fn clamp_fn<S: Scalar>(f: &FunctionVec<S>) -> FunctionVec<S> {
    f.map(clamp_scalar)
}

#[derive(Debug, Clone, Copy)]
pub struct AdequacyOptions {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for AdequacyOptions {
    fn default() -> Self {
        Self { tol: crate::scalar::DEFAULT_TOL, samples: 64, seed: 0 }
    }
}

/// Separating `point` from a closed set not containing it.
///
/// Every such set lies inside `X ∖ {point}`, so one feasible witness for
/// that maximal set covers them all.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationEntry {
    pub point: usize,
    pub closed_set: Vec<usize>,
    pub feasible: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdequacyReport {
    pub separates: bool,
    pub separation: Vec<SeparationEntry>,
    pub has_constants: bool,
    pub g_invariant: bool,
    pub invariance_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariance_failure: Option<String>,
    pub cone_generates: bool,
    /// Largest `‖f₁‖∞ / max(1, ‖f‖∞)` over tested splits `f = f₁ − f₂`.
    pub cone_worst: f64,
    pub adequate: bool,
}

fn test_functions<S: Scalar>(fam: &FunctionFamily<S>, opts: &AdequacyOptions) -> Vec<(String, FunctionVec<S>)> {
    let mut fs: Vec<(String, FunctionVec<S>)> = fam.generators().enumerate().map(|(i, g)| (fam.name(i), g)).collect();
    for (k, f) in sample_span_elements(fam, opts.samples, opts.seed).into_iter().enumerate() {
        // Spread samples across scales so the clamp has something to cut.
        let scale = S::from_ratio(1 << (k % 4), 1);
        fs.push((format!("sample{k}"), f.scale(&scale)));
    }
    fs
}

/// A nonnegative member `f₁ ≥ f` of the span, so `f = f₁ − (f₁ − f)`.
fn dominating_member<S: Scalar>(
    fam: &FunctionFamily<S>,
    f: &FunctionVec<S>,
    constants: Option<&[S]>,
) -> Result<Option<FunctionVec<S>>> {
    if let Some(ones) = constants {
        let m = f.max_abs();
        return Ok(Some(fam.combine(&ones.iter().map(|c| c.clone() * m.clone()).collect::<Vec<_>>())));
    }
    let a = fam.generator_matrix().transpose().to_f64();
    let lower: Vec<f64> = f.iter().map(|v| v.to_f64_lossy().max(0.0)).collect();
    Ok(lp::dominating_combination(&a, &lower)?
        .map(|c| fam.combine(&c.iter().map(|&x| S::from_f64_exact(x).unwrap_or_else(S::zero)).collect::<Vec<_>>())))
}

pub fn check_adequate<S: Scalar>(fam: &FunctionFamily<S>, opts: &AdequacyOptions) -> Result<AdequacyReport> {
    let n = fam.num_points();
    let tol = opts.tol;

    let mut separation = Vec::with_capacity(n);
    for x in 0..n {
        let fit = span_membership(fam, &FunctionVec::indicator(n, x), tol)?;
        separation.push(SeparationEntry {
            point: x,
            closed_set: (0..n).filter(|&z| z != x).collect(),
            feasible: fit.member,
            residual: fit.residual.to_f64_lossy(),
        });
    }
    let separates = separation.iter().all(|e| e.feasible);

    let ones_fit = span_membership(fam, &FunctionVec::ones(n), tol)?;
    let has_constants = ones_fit.member;

    let fs = test_functions(fam, opts);
    let mut g_invariant = true;
    let mut invariance_residual = 0.0f64;
    let mut invariance_failure = None;
    for (name, f) in &fs {
        let fit = span_membership(fam, &clamp_fn(f), tol)?;
        let r = fit.residual.to_f64_lossy();
        invariance_residual = invariance_residual.max(r);
        if !fit.member && g_invariant {
            g_invariant = false;
            invariance_failure = Some(name.clone());
        }
    }

    let constants = has_constants.then_some(ones_fit.coefficients.as_slice());
    let mut cone_generates = true;
    let mut cone_worst = 0.0f64;
    for (_, f) in &fs {
        match dominating_member(fam, f, constants)? {
            Some(f1) => {
                let ok = f1.is_nonneg(tol) && (&f1 - f).is_nonneg(tol * f1.max_abs().to_f64_lossy().max(1.0));
                cone_generates &= ok;
                let denom = f.max_abs().to_f64_lossy().max(1.0);
                cone_worst = cone_worst.max(f1.max_abs().to_f64_lossy() / denom);
            }
            None => cone_generates = false,
        }
    }

    Ok(AdequacyReport {
        separates,
        separation,
        has_constants,
        g_invariant,
        invariance_residual,
        invariance_failure,
        cone_generates,
        cone_worst,
        adequate: separates && has_constants && g_invariant && cone_generates,
    })
}

fn require_member<S: Scalar>(fam: &FunctionFamily<S>, f: &FunctionVec<S>, what: &str, tol: f64) -> Result<()> {
    if span_membership(fam, f, tol)?.member {
        Ok(())
    } else {
        Err(Error::NotInvariant(what.into()))
    }
}

/// `h = 1 + g∘f₁ − g∘(f₁ + 1)` with `f₁ = (f − f(x₀)) / ε`.
///
/// `0 ≤ h ≤ 1`, `h(x₀) = 0`, and `h < 1` only where `|f − f(x₀)| < ε`.
pub fn build_subbasic_bump<S: Scalar>(
    fam: &FunctionFamily<S>,
    x0: usize,
    f: &FunctionVec<S>,
    eps: &S,
    tol: f64,
) -> Result<FunctionVec<S>> {
    let n = fam.num_points();
    if x0 >= n || f.len() != n {
        return Err(Error::Dimension("anchor or function does not fit the family".into()));
    }
    if !eps.is_positive() {
        return Err(Error::Input("neighbourhood radius must be positive".into()));
    }
    if !fam.contains_constants(tol) {
        return Err(Error::MissingConstants);
    }
    if !span_membership(fam, f, tol)?.member {
        return Err(Error::Input("function is not in the family's span".into()));
    }
    let f1 = f.map(|v| (v.clone() - f[x0].clone()) / eps.clone());
    let lower = clamp_fn(&f1);
    let upper = clamp_fn(&f1.map(|v| v.clone() + S::one()));
    require_member(fam, &lower, "g∘f₁", tol)?;
    require_member(fam, &upper, "g∘(f₁ + 1)", tol)?;
    Ok(&(&FunctionVec::ones(n) + &lower) - &upper)
}

/// A function equal to 1 at `x0`, 0 on `closed_set`, with range in `[0, 1]`,
/// assembled as `1 − g∘Σ h_z` from one subbasic bump per point of the set.
pub fn build_precise_bump<S: Scalar>(
    fam: &FunctionFamily<S>,
    x0: usize,
    closed_set: &[usize],
    tol: f64,
) -> Result<FunctionVec<S>> {
    let n = fam.num_points();
    if x0 >= n || closed_set.iter().any(|&z| z >= n) {
        return Err(Error::Dimension("point index out of range".into()));
    }
    if closed_set.contains(&x0) {
        return Err(Error::Input("anchor lies in the closed set".into()));
    }
    if closed_set.is_empty() {
        return Ok(FunctionVec::ones(n));
    }
    let mut sum = FunctionVec::constant(n, S::zero());
    for &z in closed_set {
        let mut best: Option<(usize, S)> = None;
        for (i, g) in fam.generators().enumerate() {
            let gap = (g[z].clone() - g[x0].clone()).abs();
            if gap.approx_pos(tol) && best.as_ref().is_none_or(|b| gap > b.1) {
                best = Some((i, gap));
            }
        }
        let (i, eps) = best.ok_or(Error::SeparationInfeasible { point: x0, from: z })?;
        sum = &sum + &build_subbasic_bump(fam, x0, &fam.generator(i), &eps, tol)?;
    }
    let h = &FunctionVec::ones(n) - &clamp_fn(&sum);
    require_member(fam, &h, "1 − g∘Σh", tol)?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::scalar::Rational;
    use crate::space::{build_lipschitz_family, PointSpace};

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    fn path3() -> FunctionFamily<f64> {
        let labels = vec!["a".into(), "b".into(), "c".into()];
        let metric = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        build_lipschitz_family(Arc::new(PointSpace::with_metric(labels, metric).unwrap()), &[]).unwrap()
    }

    #[test]
    fn clamp_values() {
        assert_eq!(clamp(-3.0), 0.0);
        assert_eq!(clamp(2.0), 1.0);
        assert_eq!(clamp(0.5), 0.5);
    }

    #[test]
    fn full_family_is_adequate() {
        let fam = FunctionFamily::<Rational>::full(Arc::new(PointSpace::unlabeled(4).unwrap()));
        let r = check_adequate(&fam, &AdequacyOptions::default()).unwrap();
        assert!(r.adequate);
    }

    #[test]
    fn identity_without_constants() {
        let space = Arc::new(PointSpace::unlabeled(2).unwrap());
        let fam = FunctionFamily::new(space, vec![FunctionVec::new(vec![0.0, 1.0]).unwrap()], None, 1e-12).unwrap();
        let r = check_adequate(&fam, &AdequacyOptions::default()).unwrap();
        assert!(!r.has_constants);
        assert!(!r.adequate);
        assert!(r.cone_generates);
    }

    #[test]
    fn affine_family_is_not_clamp_invariant() {
        let g = grid(5);
        let space = Arc::new(PointSpace::unlabeled(5).unwrap());
        let fam = FunctionFamily::new(
            space,
            vec![FunctionVec::new(vec![1.0; 5]).unwrap(), FunctionVec::new(g).unwrap()],
            None,
            1e-12,
        )
        .unwrap();
        let r = check_adequate(&fam, &AdequacyOptions::default()).unwrap();
        assert!(r.has_constants && r.cone_generates);
        assert!(!r.g_invariant && !r.separates && !r.adequate);
    }

    #[test]
    fn lipschitz_path_is_adequate() {
        assert!(check_adequate(&path3(), &AdequacyOptions::default()).unwrap().adequate);
    }

    #[test]
    fn subbasic_bump_examples() {
        let fam = FunctionFamily::<f64>::full(Arc::new(PointSpace::unlabeled(5).unwrap()));
        let zero = FunctionVec::constant(5, 0.0);
        assert_eq!(build_subbasic_bump(&fam, 0, &zero, &1.0, 1e-9).unwrap(), zero);

        let t = FunctionVec::new(grid(5)).unwrap();
        let h = build_subbasic_bump(&fam, 0, &t, &0.5, 1e-9).unwrap();
        assert_eq!(h.values(), &[0.0, 0.5, 1.0, 1.0, 1.0]);

        let h = build_subbasic_bump(&fam, 4, &t, &0.5, 1e-9).unwrap();
        assert_eq!(h.values(), &[1.0, 1.0, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn precise_bump_on_full_family_is_indicator() {
        let fam = FunctionFamily::<Rational>::full(Arc::new(PointSpace::unlabeled(4).unwrap()));
        let h = build_precise_bump(&fam, 2, &[0, 1, 3], 0.0).unwrap();
        assert_eq!(h, FunctionVec::indicator(4, 2));
        assert_eq!(build_precise_bump(&fam, 2, &[], 0.0).unwrap(), FunctionVec::ones(4));
    }

    #[test]
    fn precise_bump_on_path() {
        let h = build_precise_bump(&path3(), 0, &[2], 1e-9).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-12);
        assert!(h[2].abs() < 1e-12);
        assert!((-1e-12..=1.0 + 1e-12).contains(&h[1]));
    }
}

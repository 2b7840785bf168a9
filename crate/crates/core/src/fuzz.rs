//! Seeded ground-truth operators and the round-trip fuzz harness.
//!
//! Instance `i` of a run with seed `s` draws from `ChaCha8Rng` seeded with
//! `s` on stream `i`, so instances are independent of scheduling and of how
//! many other instances run.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::is_order_isomorphism;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operator::OperatorModel;
use crate::par::map_ordered;
use crate::recovery::{compose_matrix, decompose_accepted, RecoveryOptions};
use crate::scalar::{Mode, Rational, Scalar};

/// Weights are snapped to this grid so both modes see the same operator.
pub const WEIGHT_GRID: i64 = 1_000_000;

/// Generator for instance `index` of a run seeded with `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    sigma
}

/// Log-uniform on `[1e-3, 1e3]`, as an exact fraction over [`WEIGHT_GRID`].
pub fn random_weight<S: Scalar, R: Rng>(rng: &mut R) -> S {
    let w = 10f64.powf(rng.random_range(-3.0..=3.0));
    S::from_ratio(((w * WEIGHT_GRID as f64).round() as i64).max(1), WEIGHT_GRID)
}

/// `(sigma, weight)` of a random positive monomial.
pub fn random_monomial<S: Scalar, R: Rng>(rng: &mut R, n: usize) -> (Vec<usize>, Vec<S>) {
    let sigma = random_permutation(rng, n);
    let weight = (0..n).map(|_| random_weight(rng)).collect();
    (sigma, weight)
}

/// `(sigma, sign)` of a random signed permutation with weights `±1`.
pub fn random_signed_unimodular<S: Scalar, R: Rng>(rng: &mut R, n: usize) -> (Vec<usize>, Vec<S>) {
    let sigma = random_permutation(rng, n);
    let sign = (0..n).map(|_| if rng.random_bool(0.5) { S::one() } else { -S::one() }).collect();
    (sigma, sign)
}

/// Invertible nonnegative integer matrix with some row holding two nonzeros.
pub fn random_non_monomial<S: Scalar, R: Rng>(rng: &mut R, n: usize) -> Matrix<S> {
    assert!(n >= 2, "a non-monomial invertible matrix needs n ≥ 2");
    loop {
        let m: Matrix<Rational> = Matrix::from_fn(n, n, |_, _| {
            if rng.random_bool(0.5) {
                Rational::from_ratio(rng.random_range(1..=9), 1)
            } else {
                Rational::from_ratio(0, 1)
            }
        });
        let monomial = (0..n).all(|i| m.row(i).iter().filter(|v| !v.approx_zero(0.0)).count() == 1);
        if !monomial && m.rank(0.0) == n {
            return m.map(|v| S::from_ratio(v.numer().try_into().unwrap(), 1));
        }
    }
}

/// Adds `U[0, magnitude] · weight[y]` to every off-monomial entry of row `y`.
pub fn perturb<S: Scalar, R: Rng>(rng: &mut R, m: &Matrix<S>, magnitude: f64) -> Matrix<S> {
    let mut out = m.clone();
    if magnitude <= 0.0 {
        return out;
    }
    for y in 0..m.rows() {
        let w = m.row(y).iter().fold(S::zero(), |acc, v| acc + v.abs());
        for x in 0..m.cols() {
            if m[(y, x)].is_zero() {
                let noise = (rng.random_range(0.0..=magnitude) * WEIGHT_GRID as f64).round() as i64;
                out[(y, x)] = S::from_ratio(noise, WEIGHT_GRID) * w.clone();
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzSpec {
    pub dim: usize,
    pub seed: u64,
    pub count: usize,
    #[serde(default)]
    pub perturbation: f64,
    pub mode: Mode,
}

impl FuzzSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.count == 0 {
            return Err(Error::Input("fuzz needs dim ≥ 1 and count ≥ 1".into()));
        }
        if self.perturbation.is_nan() || self.perturbation < 0.0 {
            return Err(Error::Input("perturbation must be nonnegative".into()));
        }
        if self.perturbation > 0.0 && self.dim < 2 {
            return Err(Error::Input("perturbation needs dim ≥ 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceOutcome {
    pub index: usize,
    pub accepted: bool,
    /// Recovered `(sigma, weight)` equals the generating pair.
    pub exact_match: bool,
    pub residual: Option<f64>,
    /// Perturbed runs only: `T⁻¹` has a negative entry.
    pub inverse_leaves_orthant: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub spec: FuzzSpec,
    pub accepted: usize,
    pub exact_matches: usize,
    pub match_rate: f64,
    pub max_residual: f64,
    pub leaves_orthant: usize,
    /// Accepted although the inverse leaves the orthant; must be zero.
    pub unsound_accepts: usize,
    pub passed: bool,
    pub instances: Vec<InstanceOutcome>,
}

fn run_instance<S: Scalar>(spec: &FuzzSpec, index: usize, opts: &RecoveryOptions) -> InstanceOutcome {
    let mut rng = instance_rng(spec.seed, index as u64);
    let (sigma, weight) = random_monomial::<S, _>(&mut rng, spec.dim);
    let clean = compose_matrix(&sigma, &weight).expect("generated sigma is a bijection");
    let matrix = perturb(&mut rng, &clean, spec.perturbation);
    let mut out = InstanceOutcome {
        index,
        accepted: false,
        exact_match: false,
        residual: None,
        inverse_leaves_orthant: false,
        error: None,
    };
    let t = match OperatorModel::point(matrix, opts.tol) {
        Ok(t) => t,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    if spec.perturbation > 0.0 {
        let inv = t.inverse_matrix();
        out.inverse_leaves_orthant =
            (0..inv.rows()).any(|i| (0..inv.cols()).any(|j| !inv[(i, j)].approx_nonneg(opts.tol)));
    }
    match is_order_isomorphism(&t, &opts.cone) {
        Ok(cert) if cert.accept => out.accepted = true,
        Ok(_) => return out,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    }
    match decompose_accepted(&t, opts) {
        Ok(d) => {
            let rel = opts.tol * 1e-3;
            let weight_match = d.weight.iter().zip(&weight).all(|(a, b)| {
                let diff = (a.clone() - b.clone()).abs();
                diff.approx_zero(rel * b.to_f64_lossy())
            });
            out.exact_match = d.sigma == sigma && weight_match;
            out.residual = Some(d.residual.to_f64_lossy());
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

pub fn run_fuzz(spec: &FuzzSpec, opts: &RecoveryOptions) -> Result<FuzzReport> {
    spec.validate()?;
    let indices: Vec<usize> = (0..spec.count).collect();
    let instances = match spec.mode {
        Mode::Float => map_ordered(&indices, |&i| run_instance::<f64>(spec, i, opts)),
        Mode::Exact => map_ordered(&indices, |&i| run_instance::<Rational>(spec, i, opts)),
    };
    let accepted = instances.iter().filter(|o| o.accepted).count();
    let exact_matches = instances.iter().filter(|o| o.exact_match).count();
    let max_residual = instances.iter().filter_map(|o| o.residual).fold(0.0, f64::max);
    let leaves_orthant = instances.iter().filter(|o| o.inverse_leaves_orthant).count();
    let unsound_accepts = instances.iter().filter(|o| o.inverse_leaves_orthant && o.accepted).count();
    let match_rate = exact_matches as f64 / spec.count as f64;
    let passed = if spec.perturbation > 0.0 {
        unsound_accepts == 0
    } else {
        exact_matches == spec.count && max_residual <= opts.tol
    };
    Ok(FuzzReport {
        spec: *spec,
        accepted,
        exact_matches,
        match_rate,
        max_residual,
        leaves_orthant,
        unsound_accepts,
        passed,
        instances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dim: usize, count: usize, perturbation: f64, mode: Mode) -> FuzzSpec {
        FuzzSpec { dim, seed: 7, count, perturbation, mode }
    }

    #[test]
    fn streams_are_independent_of_count() {
        let opts = RecoveryOptions::default();
        let a = run_fuzz(&spec(4, 3, 0.0, Mode::Float), &opts).unwrap();
        let b = run_fuzz(&spec(4, 5, 0.0, Mode::Float), &opts).unwrap();
        assert_eq!(a.instances[..], b.instances[..3]);
    }

    #[test]
    fn clean_monomials_round_trip() {
        for mode in [Mode::Float, Mode::Exact] {
            let r = run_fuzz(&spec(6, 20, 0.0, mode), &RecoveryOptions::default()).unwrap();
            assert!(r.passed, "{mode}: {r:?}");
            assert_eq!(r.match_rate, 1.0);
        }
    }

    #[test]
    fn single_point() {
        let r = run_fuzz(&spec(1, 1, 0.0, Mode::Exact), &RecoveryOptions::default()).unwrap();
        assert!(r.passed);
        let mut rng = instance_rng(7, 0);
        let (sigma, w) = random_monomial::<Rational, _>(&mut rng, 1);
        assert_eq!(sigma, vec![0]);
        assert!(w[0] > Rational::from_ratio(0, 1));
    }

    #[test]
    fn perturbed_inverses_are_rejected() {
        let r = run_fuzz(&spec(2, 100, 0.5, Mode::Float), &RecoveryOptions::default()).unwrap();
        assert!(r.passed);
        assert!(r.leaves_orthant > 0);
        assert_eq!(r.unsound_accepts, 0);
    }

    #[test]
    fn non_monomial_is_nonnegative_and_invertible() {
        let mut rng = instance_rng(1, 0);
        for n in 2..6 {
            let m: Matrix<f64> = random_non_monomial(&mut rng, n);
            assert!(m.rank(1e-12) == n);
            assert!((0..n).all(|i| m.row(i).iter().all(|v| *v >= 0.0)));
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(spec(0, 1, 0.0, Mode::Float).validate().is_err());
        assert!(spec(3, 0, 0.0, Mode::Float).validate().is_err());
        assert!(spec(3, 1, -1.0, Mode::Float).validate().is_err());
    }
}

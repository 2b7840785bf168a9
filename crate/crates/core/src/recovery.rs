//! Recover the point map and weight of an order isomorphism from zero sets.
//!
//! For an anchor `x₀`, the nonnegative functions vanishing at `x₀` are
//! generated by the indicators `e_j`, `j ≠ x₀`. Their images under `T` all
//! vanish at exactly one codomain point, which is where `x₀` is sent.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{is_order_isomorphism, ConeOptions};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operator::OperatorModel;
use crate::scalar::{serialize_scalar, Mode, Scalar};
use crate::space::{FunctionFamily, FunctionVec, ZeroSet};

#[derive(Debug, Clone, Copy)]
pub struct RecoveryOptions {
    pub tol: f64,
    /// Float mode: the runner-up intersection score must exceed the best by
    /// `margin_factor · tol`.
    pub margin_factor: f64,
    pub cone: ConeOptions,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self { tol: crate::scalar::DEFAULT_TOL, margin_factor: 10.0, cone: ConeOptions::default() }
    }
}

impl RecoveryOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, cone: ConeOptions { tol, ..ConeOptions::default() }, ..Self::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = ""))]
pub struct ZeroSetMember<S: Scalar> {
    pub name: String,
    pub function: FunctionVec<S>,
    pub image: FunctionVec<S>,
    pub zero_set: ZeroSet,
}

/// Zero sets of the images of nonnegative functions vanishing at `anchor`.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = ""))]
pub struct ZeroSetFamily<S: Scalar> {
    pub anchor: usize,
    pub codomain_size: usize,
    pub members: Vec<ZeroSetMember<S>>,
}

impl<S: Scalar> ZeroSetFamily<S> {
    pub fn intersection(&self) -> ZeroSet {
        self.intersection_of(0..self.members.len())
    }

    pub fn intersection_of(&self, idx: impl IntoIterator<Item = usize>) -> ZeroSet {
        idx.into_iter()
            .fold(ZeroSet::everything(self.codomain_size, 0.0), |acc, i| acc.intersect(&self.members[i].zero_set))
    }
}

/// `Tf = weight · f∘sigma`, with `sigma` sending codomain points to domain points.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = ""))]
pub struct Decomposition<S: Scalar> {
    pub sigma: Vec<usize>,
    pub weight: FunctionVec<S>,
    #[serde(serialize_with = "serialize_scalar")]
    pub residual: S,
    pub mode: Mode,
}

impl<S: Scalar> Decomposition<S> {
    /// `sigma⁻¹`, sending domain points to codomain points.
    pub fn point_map(&self) -> Vec<usize> {
        invert_bijection(&self.sigma).expect("sigma is a bijection")
    }
}

pub fn invert_bijection(map: &[usize]) -> Option<Vec<usize>> {
    let mut inv = vec![usize::MAX; map.len()];
    for (i, &j) in map.iter().enumerate() {
        if j >= map.len() || inv[j] != usize::MAX {
            return None;
        }
        inv[j] = i;
    }
    Some(inv)
}

fn require_full<S: Scalar>(t: &OperatorModel<S>) -> Result<Matrix<S>> {
    t.point_matrix()
}

fn column_zero_sets<S: Scalar>(p: &Matrix<S>, tol: f64) -> Vec<ZeroSet> {
    (0..p.cols())
        .map(|j| {
            let col = FunctionVec::from_vec(p.column(j));
            let scale = col.max_abs().to_f64_lossy().max(f64::MIN_POSITIVE);
            ZeroSet::of(&col, tol * scale)
        })
        .collect()
}

/// The zero family at `x0`, generated by the indicators of the other points.
pub fn zero_family<S: Scalar>(t: &OperatorModel<S>, x0: usize, tol: f64) -> Result<ZeroSetFamily<S>> {
    let p = require_full(t)?;
    let n = p.cols();
    if x0 >= n {
        return Err(Error::Dimension(format!("anchor {x0} out of range for {n} points")));
    }
    let zs = column_zero_sets(&p, tol);
    let members = (0..n)
        .filter(|&j| j != x0)
        .map(|j| ZeroSetMember {
            name: t.domain().space().label(j).to_string(),
            function: FunctionVec::indicator(n, j),
            image: FunctionVec::from_vec(p.column(j)),
            zero_set: zs[j].clone(),
        })
        .collect();
    Ok(ZeroSetFamily { anchor: x0, codomain_size: p.rows(), members })
}

/// Per-row top two normalized column magnitudes, for O(1) leave-one-out maxima.
struct ScoreTable {
    exact: bool,
    zero: Vec<ZeroSet>,
    /// `top[y] = [(value, column), (value, column)]`
    top: Vec<[(f64, usize); 2]>,
    rows: usize,
}

impl ScoreTable {
    fn new<S: Scalar>(p: &Matrix<S>, tol: f64) -> Self {
        let col_scale: Vec<f64> =
            (0..p.cols()).map(|j| (0..p.rows()).map(|i| p[(i, j)].to_f64_lossy().abs()).fold(0.0, f64::max)).collect();
        let top = (0..p.rows())
            .map(|y| {
                let mut best = [(0.0, usize::MAX), (0.0, usize::MAX)];
                for (j, &cs) in col_scale.iter().enumerate() {
                    if cs == 0.0 {
                        continue;
                    }
                    let v = p[(y, j)].to_f64_lossy().abs() / cs;
                    if v > best[0].0 {
                        best[1] = best[0];
                        best[0] = (v, j);
                    } else if v > best[1].0 {
                        best[1] = (v, j);
                    }
                }
                best
            })
            .collect();
        Self { exact: S::is_exact(), zero: column_zero_sets(p, tol), top, rows: p.rows() }
    }

    fn score(&self, y: usize, x0: usize) -> f64 {
        let [a, b] = self.top[y];
        if a.1 == x0 {
            b.0
        } else {
            a.0
        }
    }

    fn recover(&self, x0: usize, opts: &RecoveryOptions) -> Result<usize> {
        if self.exact {
            let hits: Vec<usize> = (0..self.rows)
                .filter(|&y| self.zero.iter().enumerate().all(|(j, z)| j == x0 || z.contains(y)))
                .collect();
            return match hits.as_slice() {
                [y] => Ok(*y),
                [] => Err(Error::EmptyIntersection { anchor: x0 }),
                _ => Err(Error::AmbiguousIntersection { anchor: x0, best: 0.0, runner_up: 0.0 }),
            };
        }
        let mut scored: Vec<(f64, usize)> = (0..self.rows).map(|y| (self.score(y, x0), y)).collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (best, y) = scored[0];
        if best > opts.tol {
            return Err(Error::EmptyIntersection { anchor: x0 });
        }
        if let Some(&(runner_up, _)) = scored.get(1) {
            if runner_up - best < opts.margin_factor * opts.tol {
                return Err(Error::AmbiguousIntersection { anchor: x0, best, runner_up });
            }
        }
        Ok(y)
    }
}

/// The codomain point where every member of the zero family at `x0` vanishes.
pub fn recover_point<S: Scalar>(t: &OperatorModel<S>, x0: usize, opts: &RecoveryOptions) -> Result<usize> {
    let p = require_full(t)?;
    if x0 >= p.cols() {
        return Err(Error::Dimension(format!("anchor {x0} out of range for {} points", p.cols())));
    }
    ScoreTable::new(&p, opts.tol).recover(x0, opts)
}

/// `x ↦ recover_point(x)` for every domain point.
pub fn recovered_map<S: Scalar>(t: &OperatorModel<S>, opts: &RecoveryOptions) -> Result<Vec<usize>> {
    let p = require_full(t)?;
    let table = ScoreTable::new(&p, opts.tol);
    (0..p.cols()).map(|x| table.recover(x, opts)).collect()
}

fn representation_residual<S: Scalar>(
    images: impl IntoIterator<Item = (FunctionVec<S>, FunctionVec<S>)>,
    sigma: &[usize],
    weight: &FunctionVec<S>,
) -> S {
    let mut worst = S::zero();
    for (f, tf) in images {
        for (y, &x) in sigma.iter().enumerate() {
            let d = (tf[y].clone() - weight[y].clone() * f[x].clone()).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Recover `(sigma, weight)` with `Tf = weight · f∘sigma`.
///
/// The cone test must accept `T` first; a rejection surfaces as
/// [`Error::NotOrderIsomorphism`].
pub fn decompose<S: Scalar>(t: &OperatorModel<S>, opts: &RecoveryOptions) -> Result<Decomposition<S>> {
    let cert = is_order_isomorphism(t, &opts.cone)?;
    if !cert.accept {
        let direction = cert.witness.map_or_else(|| "forward".into(), |w| w.direction.to_string());
        return Err(Error::NotOrderIsomorphism { direction });
    }
    decompose_accepted(t, opts)
}

/// [`decompose`] without re-running the cone test.
pub fn decompose_accepted<S: Scalar>(t: &OperatorModel<S>, opts: &RecoveryOptions) -> Result<Decomposition<S>> {
    if !t.domain().contains_constants(opts.tol) {
        return Err(Error::MissingConstants);
    }
    let p = require_full(t)?;
    let h = recovered_map(t, opts)?;
    let sigma = invert_bijection(&h)
        .ok_or_else(|| Error::InternalContradiction("recovered point map is not a bijection".into()))?;
    let n = p.cols();
    let weight = FunctionVec::from_vec(p.mul_vec(&vec![S::one(); n]));
    if let Some(y) = weight.iter().position(|w| !w.approx_pos(opts.tol)) {
        return Err(Error::NonPositiveWeight { point: y });
    }
    let images = t.domain().generators().map(|g| {
        let tg = FunctionVec::from_vec(p.mul_vec(g.values()));
        (g, tg)
    });
    let residual = representation_residual(images, &sigma, &weight);
    let scale = weight.max_abs().to_f64_lossy().max(1.0);
    if !residual.approx_zero(opts.tol * scale) {
        return Err(Error::ResidualTooLarge { residual: residual.to_f64_lossy(), tol: opts.tol * scale });
    }
    Ok(Decomposition { sigma, weight, residual, mode: S::MODE })
}

/// Point-coordinate matrix of `f ↦ weight · f∘sigma`.
pub fn compose_matrix<S: Scalar>(sigma: &[usize], weight: &[S]) -> Result<Matrix<S>> {
    if sigma.len() != weight.len() {
        return Err(Error::Dimension("sigma and weight differ in length".into()));
    }
    if invert_bijection(sigma).is_none() {
        return Err(Error::Input("sigma is not a bijection".into()));
    }
    let n = sigma.len();
    let mut m = Matrix::zeros(n, n);
    for (y, &x) in sigma.iter().enumerate() {
        m[(y, x)] = weight[y].clone();
    }
    Ok(m)
}

/// The weighted composition operator `f ↦ weight · f∘sigma` on `x1 … xn`.
pub fn compose<S: Scalar>(sigma: &[usize], weight: &[S], tol: f64) -> Result<OperatorModel<S>> {
    OperatorModel::point(compose_matrix(sigma, weight)?, tol)
}

/// Random elements of the span, coefficients uniform on a 1/1000 grid in `[-1, 1]`.
pub fn sample_span_elements<S: Scalar>(fam: &FunctionFamily<S>, count: usize, seed: u64) -> Vec<FunctionVec<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let c: Vec<S> = (0..fam.dim()).map(|_| S::from_ratio(rng.random_range(-1000..=1000), 1000)).collect();
            fam.combine(&c)
        })
        .collect()
}

/// Residual of the claimed representation over the generators and `samples`
/// fresh random span elements, computed through `T` directly.
pub fn verify_representation<S: Scalar>(
    t: &OperatorModel<S>,
    d: &Decomposition<S>,
    samples: usize,
    seed: u64,
) -> Result<S> {
    let n_y = t.codomain().num_points();
    if d.sigma.len() != n_y || d.weight.len() != n_y {
        return Err(Error::Dimension("decomposition does not match the codomain".into()));
    }
    if d.sigma.iter().any(|&x| x >= t.domain().num_points()) {
        return Err(Error::Dimension("sigma points outside the domain".into()));
    }
    let mut fs: Vec<FunctionVec<S>> = t.domain().generators().collect();
    fs.extend(sample_span_elements(t.domain(), samples, seed));
    let images = fs.into_iter().map(|f| t.apply(&f).map(|tf| (f, tf))).collect::<Result<Vec<_>>>()?;
    Ok(representation_residual(images, &d.sigma, &d.weight))
}

/// `S f = T(u f) / T u` with `u = 1 + T⁻¹1`: a unital order isomorphism.
#[derive(Debug, Clone)]
pub struct NormalizedOperator<S: Scalar> {
    pub u: FunctionVec<S>,
    pub tu: FunctionVec<S>,
    pub operator: OperatorModel<S>,
}

impl<S: Scalar> NormalizedOperator<S> {
    /// `T1(y) = Tu(y) / u(σ(y))`, from `Tf = Tu · S(f/u)` and `S f = f∘σ`.
    pub fn rederive_weight(&self, sigma: &[usize]) -> FunctionVec<S> {
        FunctionVec::from_vec(sigma.iter().enumerate().map(|(y, &x)| self.tu[y].clone() / self.u[x].clone()).collect())
    }
}

pub fn normalize<S: Scalar>(t: &OperatorModel<S>) -> Result<NormalizedOperator<S>> {
    let p = require_full(t)?;
    let inv = t.to_point_basis()?.inverse_matrix().clone();
    let ones = vec![S::one(); p.rows()];
    let u: Vec<S> = inv.mul_vec(&ones).into_iter().map(|v| v + S::one()).collect();
    let tu = p.mul_vec(&u);
    if let Some(y) = tu.iter().position(|v| !v.is_positive()) {
        return Err(Error::NonPositiveWeight { point: y });
    }
    let left: Vec<S> = tu.iter().map(|v| S::one() / v.clone()).collect();
    let operator = t.weighted(&left, &u)?;
    Ok(NormalizedOperator { u: FunctionVec::from_vec(u), tu: FunctionVec::from_vec(tu), operator })
}

/// Whether `trials` random `k`-subsets of the zero family at `x0` all have a
/// nonempty intersection.
pub fn fip_check<S: Scalar>(
    t: &OperatorModel<S>,
    x0: usize,
    k: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    let fam = zero_family(t, x0, tol)?;
    let m = fam.members.len();
    let k = k.min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let idx = sample(&mut rng, m, k);
        if fam.intersection_of(idx.iter()).is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

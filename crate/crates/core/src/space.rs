//! Finite point spaces and the function families that live on them.
//!
//! A [`PointSpace`] is a finite set of labelled points, optionally metric.
//! Every subset is closed, so the spaces are trivially compact. A
//! [`FunctionFamily`] is a finite linearly independent set of generators; its
//! span is the function space and its positive cone is the set of span
//! elements that are pointwise nonnegative.

use std::collections::HashSet;
use std::ops::{Add, Index, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

const METRIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpace {
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<Vec<Vec<f64>>>,
}

impl PointSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one point".into()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::InvalidSpace(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { labels, metric: None })
    }

    /// Points labelled `x1 … xn`.
    pub fn unlabeled(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("x{i}")).collect())
    }

    pub fn with_metric(labels: Vec<String>, metric: Vec<Vec<f64>>) -> Result<Self> {
        let mut space = Self::new(labels)?;
        let n = space.len();
        if metric.len() != n || metric.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSpace(format!("metric must be {n}×{n}")));
        }
        for i in 0..n {
            if metric[i][i].abs() > METRIC_TOL {
                return Err(Error::InvalidSpace(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = metric[i][j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidSpace(format!("bad distance d({i},{j}) = {d}")));
                }
                if i != j && d <= METRIC_TOL {
                    return Err(Error::InvalidSpace(format!("distinct points {i}, {j} at distance 0")));
                }
                if (d - metric[j][i]).abs() > METRIC_TOL {
                    return Err(Error::InvalidSpace(format!("asymmetric at ({i},{j})")));
                }
                for (k, (&ik, &jk)) in metric[i].iter().zip(&metric[j]).enumerate() {
                    if ik > d + jk + METRIC_TOL {
                        return Err(Error::InvalidSpace(format!("triangle inequality fails for ({i},{j},{k})")));
                    }
                }
            }
        }
        space.metric = Some(metric);
        Ok(space)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn metric(&self) -> Option<&[Vec<f64>]> {
        self.metric.as_deref()
    }
}

/// A real function on a point space, indexed like the space's labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionVec<S>(Vec<S>);

impl<S: Scalar> FunctionVec<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.iter().any(|v| !v.to_f64_lossy().is_finite()) {
            return Err(Error::Input("function values must be finite".into()));
        }
        Ok(Self(values))
    }

    pub(crate) fn from_vec(values: Vec<S>) -> Self {
        Self(values)
    }

    pub fn constant(n: usize, c: S) -> Self {
        Self(vec![c; n])
    }

    pub fn ones(n: usize) -> Self {
        Self::constant(n, S::one())
    }

    pub fn indicator(n: usize, i: usize) -> Self {
        let mut v = vec![S::zero(); n];
        v[i] = S::one();
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.0
    }

    pub fn into_values(self) -> Vec<S> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.0.iter()
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Self(self.0.iter().map(f).collect())
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.clone() * b.clone()).collect())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn is_nonneg(&self, tol: f64) -> bool {
        self.0.iter().all(|v| v.approx_nonneg(tol))
    }

    pub fn max_abs(&self) -> S {
        crate::scalar::max_abs(&self.0)
    }

    /// Max-norm distance.
    pub fn distance(&self, other: &Self) -> S {
        crate::scalar::max_abs(&(self - other).0)
    }

    pub fn to_f64(&self) -> FunctionVec<f64> {
        FunctionVec(self.0.iter().map(Scalar::to_f64_lossy).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.0.iter().map(Scalar::to_json).collect())
    }
}

impl<S> Index<usize> for FunctionVec<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S: Scalar> Add for &FunctionVec<S> {
    type Output = FunctionVec<S>;

    fn add(self, rhs: Self) -> FunctionVec<S> {
        assert_eq!(self.len(), rhs.len());
        FunctionVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a.clone() + b.clone()).collect())
    }
}

impl<S: Scalar> Sub for &FunctionVec<S> {
    type Output = FunctionVec<S>;

    fn sub(self, rhs: Self) -> FunctionVec<S> {
        assert_eq!(self.len(), rhs.len());
        FunctionVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a.clone() - b.clone()).collect())
    }
}

impl<S: Scalar> Neg for &FunctionVec<S> {
    type Output = FunctionVec<S>;

    fn neg(self) -> FunctionVec<S> {
        self.map(|v| -v.clone())
    }
}

impl<S: Scalar> Mul<&S> for &FunctionVec<S> {
    type Output = FunctionVec<S>;

    fn mul(self, c: &S) -> FunctionVec<S> {
        self.scale(c)
    }
}

impl<S: Scalar> Serialize for FunctionVec<S> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        self.to_json().serialize(s)
    }
}

/// Points where a function vanishes, up to `tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    mask: Vec<bool>,
    tol: f64,
}

impl ZeroSet {
    pub fn of<S: Scalar>(f: &FunctionVec<S>, tol: f64) -> Self {
        Self { mask: f.iter().map(|v| v.approx_zero(tol)).collect(), tol }
    }

    pub fn everything(n: usize, tol: f64) -> Self {
        Self { mask: vec![true; n], tol }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn points(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect(), tol: self.tol.max(other.tol) }
    }
}

/// Finite generating set of a function space on a [`PointSpace`].
#[derive(Debug, Clone)]
pub struct FunctionFamily<S> {
    space: Arc<PointSpace>,
    /// rows = generators, columns = points
    generators: Matrix<S>,
    names: Option<Vec<String>>,
    /// `(Gᵀ)⁻¹` when the generators span every function on the space.
    coordinate_inverse: Option<Matrix<S>>,
}

impl<S: Scalar> FunctionFamily<S> {
    pub fn new(
        space: Arc<PointSpace>,
        generators: Vec<FunctionVec<S>>,
        names: Option<Vec<String>>,
        tol: f64,
    ) -> Result<Self> {
        let n = space.len();
        if generators.is_empty() {
            return Err(Error::InvalidFamily("no generators".into()));
        }
        if let Some(bad) = generators.iter().position(|g| g.len() != n) {
            return Err(Error::Dimension(format!(
                "generator {bad} has {} values, space has {n} points",
                generators[bad].len()
            )));
        }
        if let Some(names) = &names {
            if names.len() != generators.len() {
                return Err(Error::InvalidFamily("names and generators differ in length".into()));
            }
        }
        let k = generators.len();
        let g =
            Matrix::from_rows(generators.into_iter().map(FunctionVec::into_values).collect()).expect("rows checked");
        let rank = g.rank(tol);
        if rank != k {
            return Err(Error::InvalidFamily(format!("generators are linearly dependent (rank {rank} < {k})")));
        }
        let coordinate_inverse = if k == n { g.transpose().inverse(tol) } else { None };
        Ok(Self { space, generators: g, names, coordinate_inverse })
    }

    /// All functions on the space, generated by the point indicators.
    pub fn full(space: Arc<PointSpace>) -> Self {
        let n = space.len();
        let names = space.labels().iter().map(|l| format!("e[{l}]")).collect();
        Self {
            space,
            generators: Matrix::identity(n),
            names: Some(names),
            coordinate_inverse: Some(Matrix::identity(n)),
        }
    }

    pub fn space(&self) -> &Arc<PointSpace> {
        &self.space
    }

    pub fn num_points(&self) -> usize {
        self.space.len()
    }

    pub fn dim(&self) -> usize {
        self.generators.rows()
    }

    pub fn generator_matrix(&self) -> &Matrix<S> {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> FunctionVec<S> {
        FunctionVec(self.generators.row(i).to_vec())
    }

    pub fn generators(&self) -> impl Iterator<Item = FunctionVec<S>> + '_ {
        (0..self.dim()).map(|i| self.generator(i))
    }

    pub fn name(&self, i: usize) -> String {
        self.names.as_ref().map_or_else(|| format!("g{i}"), |n| n[i].clone())
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Whether the span is all of the functions on the space.
    pub fn is_full(&self) -> bool {
        self.coordinate_inverse.is_some()
    }

    /// Whether the generators are exactly the point indicators, in order.
    pub fn is_standard(&self) -> bool {
        self.is_full() && self.generators == Matrix::identity(self.num_points())
    }

    /// Function represented by generator coefficients.
    pub fn combine(&self, coeffs: &[S]) -> FunctionVec<S> {
        assert_eq!(coeffs.len(), self.dim(), "coefficient count must match generator count");
        FunctionVec(self.generators.vec_mul(coeffs))
    }

    pub fn contains_constants(&self, tol: f64) -> bool {
        span_membership(self, &FunctionVec::ones(self.num_points()), tol).map(|m| m.member).unwrap_or(false)
    }

    /// Same family with generator `i` removed.
    pub fn without_generator(&self, i: usize, tol: f64) -> Result<Self> {
        if self.dim() == 1 {
            return Err(Error::InvalidFamily("cannot remove the only generator".into()));
        }
        let gens = (0..self.dim()).filter(|&j| j != i).map(|j| self.generator(j)).collect();
        let names = self
            .names
            .as_ref()
            .map(|n| n.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, s)| s.clone()).collect());
        Self::new(self.space.clone(), gens, names, tol)
    }

    pub(crate) fn coordinate_inverse(&self) -> Option<&Matrix<S>> {
        self.coordinate_inverse.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanMembership<S: Scalar> {
    pub member: bool,
    pub coefficients: Vec<S>,
    pub residual: S,
}

/// Least-squares fit of `f` against the generators.
pub fn span_membership<S: Scalar>(fam: &FunctionFamily<S>, f: &FunctionVec<S>, tol: f64) -> Result<SpanMembership<S>> {
    if f.len() != fam.num_points() {
        return Err(Error::Dimension(format!(
            "function has {} values, family lives on {} points",
            f.len(),
            fam.num_points()
        )));
    }
    let coefficients = match fam.coordinate_inverse() {
        Some(inv) => inv.mul_vec(f.values()),
        None => S::least_squares(&fam.generators.transpose(), f.values())
            .ok_or_else(|| Error::InvalidFamily("least-squares solve failed".into()))?,
    };
    let fitted = fam.combine(&coefficients);
    let residual = fitted.distance(f);
    let member = residual.approx_zero(tol);
    Ok(SpanMembership { member, coefficients, residual })
}

/// Whether the function with these coefficients is pointwise `≥ -tol`.
pub fn cone_membership<S: Scalar>(fam: &FunctionFamily<S>, coeffs: &[S], tol: f64) -> bool {
    fam.combine(coeffs).is_nonneg(tol)
}

/// Lipschitz functions on a finite metric space.
///
/// On a finite metric space every function is Lipschitz, so the family spans
/// everything; the generators are picked greedily, in order, from constants,
/// the caller's seeds, the distance functions `d(·, x_j)` and the tents
/// `max(0, 1 − d(·, x_j)/r_j)` (with `r_j` the distance from `x_j` to its
/// nearest neighbour), keeping each candidate that raises the rank.
pub fn build_lipschitz_family(space: Arc<PointSpace>, seeds: &[FunctionVec<f64>]) -> Result<FunctionFamily<f64>> {
    let metric = space.metric().ok_or(Error::NoMetric)?.to_vec();
    let n = space.len();
    let mut candidates: Vec<(String, Vec<f64>)> = vec![("1".into(), vec![1.0; n])];
    for (i, s) in seeds.iter().enumerate() {
        if s.len() != n {
            return Err(Error::Dimension(format!("seed {i} has {} values", s.len())));
        }
        candidates.push((format!("seed{i}"), s.values().to_vec()));
    }
    for (j, row) in metric.iter().enumerate() {
        candidates.push((format!("d(·,{})", space.label(j)), row.clone()));
    }
    for (j, row) in metric.iter().enumerate() {
        let r = row.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &d)| d).fold(f64::INFINITY, f64::min);
        let tent = row.iter().map(|&d| if r.is_finite() { (1.0 - d / r).max(0.0) } else { 1.0 }).collect();
        candidates.push((format!("tent({})", space.label(j)), tent));
    }

    let tol = 1e-9;
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    for (name, values) in candidates {
        if kept.len() == n {
            break;
        }
        kept.push(values);
        let m = Matrix::from_rows(kept.clone()).expect("uniform rows");
        if m.rank(tol) == kept.len() {
            names.push(name);
        } else {
            kept.pop();
        }
    }
    let gens = kept.into_iter().map(FunctionVec).collect();
    FunctionFamily::new(space, gens, Some(names), tol)
}

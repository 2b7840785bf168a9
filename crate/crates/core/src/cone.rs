//! Positive cones of function families and the order-isomorphism test.
//!
//! The cone of a family lives in generator-coefficient space:
//! `{c : Gᵀc ≥ 0}`. Small cones are enumerated exactly by the double
//! description method; larger ones fall back to one LP per codomain point.

use serde::Serialize;

use crate::error::Result;
use crate::lp;
use crate::matrix::Matrix;
use crate::operator::{Basis, OperatorModel};
use crate::scalar::Scalar;
use crate::space::{FunctionFamily, FunctionVec};

/// Largest family dimension enumerated exactly by default.
pub const DEFAULT_DD_CAP: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct ConeOptions {
    pub tol: f64,
    pub dd_cap: usize,
    pub force_lp: bool,
}

impl Default for ConeOptions {
    fn default() -> Self {
        Self { tol: crate::scalar::DEFAULT_TOL, dd_cap: DEFAULT_DD_CAP, force_lp: false }
    }
}

/// Facets and extreme rays of `{c : Gᵀc ≥ 0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeRep<S: Scalar> {
    pub facet_normals: Matrix<S>,
    pub extreme_rays: Matrix<S>,
    /// `false` when the dimension cap was hit and nothing was enumerated.
    pub enumerated: bool,
}

/// Double description of a family's positive cone.
pub fn cone_rep<S: Scalar>(fam: &FunctionFamily<S>, opts: &ConeOptions) -> ConeRep<S> {
    let k = fam.dim();
    if k > opts.dd_cap {
        return ConeRep { facet_normals: Matrix::zeros(0, k), extreme_rays: Matrix::zeros(0, k), enumerated: false };
    }
    let constraints = fam.generator_matrix().transpose();
    let rays = double_description(&constraints, opts.tol).expect("independent generators give a pointed cone");
    let facets = facets_from_rays(&constraints, &rays, opts.tol);
    ConeRep { facet_normals: facets, extreme_rays: rays, enumerated: true }
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Self) -> Self {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn superset_of(&self, o: &Self) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray<S> {
    v: Vec<S>,
    zeros: Bits,
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn normalized<S: Scalar>(v: Vec<S>) -> Vec<S> {
    let m = crate::scalar::max_abs(&v);
    if m.is_zero() {
        return v;
    }
    v.into_iter().map(|x| if x.is_zero() { x } else { x / m.clone() }).collect()
}

fn lex_cmp<S: Scalar>(a: &[S], b: &[S]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

fn sorted_unique<S: Scalar>(mut rows: Vec<Vec<S>>, cols: usize, tol: f64) -> Matrix<S> {
    rows.sort_by(|a, b| lex_cmp(a, b));
    let mut out: Vec<Vec<S>> = Vec::with_capacity(rows.len());
    for r in rows {
        let dup =
            out.last().is_some_and(|last| last.iter().zip(&r).all(|(x, y)| (x.clone() - y.clone()).approx_zero(tol)));
        if !dup {
            out.push(r);
        }
    }
    if out.is_empty() {
        return Matrix::zeros(0, cols);
    }
    Matrix::from_rows(out).expect("uniform row length")
}

/// Extreme rays of `{x : a x ≥ 0}` for `a` of full column rank.
///
/// Rows are inserted in index order starting from the simplicial cone of the
/// first `d` independent rows; adjacency uses the combinatorial test. Rays
/// are scaled to unit max-norm and returned in lexicographic order. `None`
/// when `a` is rank deficient (the cone is not pointed).
pub fn double_description<S: Scalar>(a: &Matrix<S>, tol: f64) -> Option<Matrix<S>> {
    let (m, d) = (a.rows(), a.cols());
    if d == 0 {
        return Some(Matrix::zeros(0, 0));
    }
    let mut basis: Vec<usize> = Vec::with_capacity(d);
    for i in 0..m {
        let mut trial: Vec<Vec<S>> = basis.iter().map(|&r| a.row(r).to_vec()).collect();
        trial.push(a.row(i).to_vec());
        if Matrix::from_rows(trial).unwrap().rank(tol) == basis.len() + 1 {
            basis.push(i);
            if basis.len() == d {
                break;
            }
        }
    }
    if basis.len() < d {
        return None;
    }
    let b = Matrix::from_rows(basis.iter().map(|&r| a.row(r).to_vec()).collect()).unwrap();
    let binv = b.inverse(tol)?;
    let mut rays: Vec<Ray<S>> = (0..d)
        .map(|j| {
            let mut zeros = Bits::new(m);
            for (bi, &r) in basis.iter().enumerate() {
                if bi != j {
                    zeros.set(r);
                }
            }
            Ray { v: normalized(binv.column(j)), zeros }
        })
        .collect();
    let in_basis: Vec<bool> = (0..m).map(|i| basis.contains(&i)).collect();
    for i in (0..m).filter(|&i| !in_basis[i]) {
        let row = a.row(i);
        let row_scale = crate::scalar::max_abs(row).to_f64_lossy().max(1.0);
        let vals: Vec<S> = rays.iter().map(|r| dot(row, &r.v)).collect();
        let sign = |v: &S| -> i8 {
            if v.approx_zero(tol * row_scale) {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            }
        };
        let signs: Vec<i8> = vals.iter().map(sign).collect();
        if signs.iter().all(|&s| s >= 0) {
            for (r, &s) in rays.iter_mut().zip(&signs) {
                if s == 0 {
                    r.zeros.set(i);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&j| signs[j] > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&j| signs[j] < 0).collect();
        let mut next: Vec<Ray<S>> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zeros.and(&rays[n].zeros);
                if common.count() + 2 < d {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|r| r == p || r == n || !rays[r].zeros.superset_of(&common));
                if !adjacent {
                    continue;
                }
                let (vp, vn) = (vals[p].clone(), vals[n].clone());
                let v: Vec<S> = rays[n]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(xn, xp)| vp.clone() * xn.clone() - vn.clone() * xp.clone())
                    .collect();
                let mut zeros = common;
                zeros.set(i);
                next.push(Ray { v: normalized(v), zeros });
            }
        }
        let mut kept: Vec<Ray<S>> = Vec::with_capacity(rays.len() + next.len());
        for (j, mut r) in rays.into_iter().enumerate() {
            match signs[j] {
                1 => kept.push(r),
                0 => {
                    r.zeros.set(i);
                    kept.push(r);
                }
                _ => {}
            }
        }
        kept.extend(next);
        rays = kept;
    }
    Some(sorted_unique(rays.into_iter().map(|r| r.v).collect(), d, tol))
}

/// Rows of `a` that define facets of `{x : a x ≥ 0}`, given its extreme rays.
///
/// A row is a facet when the rays tight on it span a hyperplane. Rows are
/// scaled to unit max-norm, deduplicated and sorted.
pub fn facets_from_rays<S: Scalar>(a: &Matrix<S>, rays: &Matrix<S>, tol: f64) -> Matrix<S> {
    let d = a.cols();
    let mut facets = Vec::new();
    for i in 0..a.rows() {
        let row = a.row(i);
        if row.iter().all(|v| v.approx_zero(tol)) {
            continue;
        }
        let scale = crate::scalar::max_abs(row).to_f64_lossy().max(1.0);
        let tight: Vec<Vec<S>> = (0..rays.rows())
            .filter(|&r| dot(row, rays.row(r)).approx_zero(tol * scale))
            .map(|r| rays.row(r).to_vec())
            .collect();
        let rank = if tight.is_empty() { 0 } else { Matrix::from_rows(tight).unwrap().rank(tol) };
        if rank + 1 == d {
            facets.push(normalized(row.to_vec()));
        }
    }
    sorted_unique(facets, d, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `T` maps some nonnegative function outside the codomain cone.
    Forward,
    /// `T⁻¹` maps some nonnegative function outside the domain cone.
    Inverse,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Inverse => "inverse",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertMode {
    Exact,
    Lp,
}

/// A nonnegative function whose image is not nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = ""))]
pub struct Witness<S: Scalar> {
    pub direction: Direction,
    pub function: FunctionVec<S>,
    pub image: FunctionVec<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = ""))]
pub struct Certificate<S: Scalar> {
    pub accept: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness<S>>,
    pub mode: CertMode,
}

impl<S: Scalar> Certificate<S> {
    fn accepted(mode: CertMode) -> Self {
        Self { accept: true, witness: None, mode }
    }

    fn rejected(mode: CertMode, witness: Witness<S>) -> Self {
        Self { accept: false, witness: Some(witness), mode }
    }
}

fn image_violates<S: Scalar>(image: &FunctionVec<S>, tol: f64) -> bool {
    let scale = image.max_abs().to_f64_lossy().max(1.0);
    !image.is_nonneg(tol * scale)
}

/// Search the mapped extreme rays of one direction for a violation.
fn ray_violation<S: Scalar>(t: &OperatorModel<S>, opts: &ConeOptions) -> Option<(FunctionVec<S>, FunctionVec<S>)> {
    let candidates: Vec<Vec<S>> = match t.basis() {
        Basis::Point => (0..t.domain().num_points())
            .map(|j| FunctionVec::<S>::indicator(t.domain().num_points(), j).into_values())
            .collect(),
        Basis::Generator => cone_rep(t.domain(), opts).extreme_rays.to_rows(),
    };
    candidates.into_iter().find_map(|c| {
        let (f, image) = match t.basis() {
            Basis::Point => {
                let image = FunctionVec::from_vec(t.matrix().mul_vec(&c));
                (FunctionVec::from_vec(c), image)
            }
            Basis::Generator => (t.domain().combine(&c), t.apply_coeffs(&c)),
        };
        image_violates(&image, opts.tol).then_some((f, image))
    })
}

fn lp_violation<S: Scalar>(
    t: &OperatorModel<S>,
    opts: &ConeOptions,
) -> Result<Option<(FunctionVec<S>, FunctionVec<S>)>> {
    let (a, b) = match t.basis() {
        Basis::Point => (Matrix::identity(t.matrix().cols()), t.matrix().to_f64()),
        Basis::Generator => (
            t.domain().generator_matrix().transpose().to_f64(),
            t.codomain().generator_matrix().transpose().mul(t.matrix()).to_f64(),
        ),
    };
    let Some(c) = lp::find_cone_violation(&a, &b, opts.tol)? else {
        return Ok(None);
    };
    let coeffs: Vec<S> = c.iter().map(|&x| S::from_f64_exact(x).unwrap_or_else(S::zero)).collect();
    let (f, image) = match t.basis() {
        Basis::Point => {
            let f = FunctionVec::from_vec(coeffs);
            let image = FunctionVec::from_vec(t.matrix().mul_vec(f.values()));
            (f, image)
        }
        Basis::Generator => (t.domain().combine(&coeffs), t.apply_coeffs(&coeffs)),
    };
    Ok(Some((f, image)))
}

/// Decide whether `T` and `T⁻¹` both preserve the positive cones.
///
/// Checking both inclusions certifies that `T` maps the domain cone onto the
/// codomain cone, in exact and LP mode alike.
pub fn is_order_isomorphism<S: Scalar>(t: &OperatorModel<S>, opts: &ConeOptions) -> Result<Certificate<S>> {
    let inv = t.inverse();
    let capped = t.domain().dim() > opts.dd_cap || t.codomain().dim() > opts.dd_cap;
    let use_lp = opts.force_lp || (t.basis() == Basis::Generator && capped);
    if !use_lp {
        for (dir, op) in [(Direction::Forward, t), (Direction::Inverse, &inv)] {
            if let Some((function, image)) = ray_violation(op, opts) {
                return Ok(Certificate::rejected(CertMode::Exact, Witness { direction: dir, function, image }));
            }
        }
        return Ok(Certificate::accepted(CertMode::Exact));
    }
    for (dir, op) in [(Direction::Forward, t), (Direction::Inverse, &inv)] {
        if let Some((function, image)) = lp_violation(op, opts)? {
            return Ok(Certificate::rejected(CertMode::Lp, Witness { direction: dir, function, image }));
        }
    }
    Ok(Certificate::accepted(CertMode::Lp))
}

//! Sampled compactifications: the evaluation embedding into extended reals,
//! boundary points discovered as sequence limits, and decomposition of an
//! order isomorphism over interior and boundary points together.

use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

use crate::cone::{is_order_isomorphism, ConeOptions};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operator::{Basis, OperatorModel};
use crate::par::map_ordered;
use crate::space::{FunctionFamily, FunctionVec, PointSpace};

/// A point of `[-∞, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    /// The order isomorphism `t ↦ t / (1 + |t|)` onto `[-1, 1]`.
    pub fn compactified(self) -> f64 {
        match self {
            ExtendedReal::NegInf => -1.0,
            ExtendedReal::PosInf => 1.0,
            ExtendedReal::Finite(t) => t / (1.0 + t.abs()),
        }
    }

    pub fn from_compactified(c: f64) -> Self {
        if c <= -1.0 {
            ExtendedReal::NegInf
        } else if c >= 1.0 {
            ExtendedReal::PosInf
        } else {
            ExtendedReal::Finite(c / (1.0 - c.abs()))
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn scale(self, c: f64) -> Result<Self> {
        Ok(match self {
            ExtendedReal::Finite(t) => ExtendedReal::Finite(c * t),
            _ if c == 0.0 => ExtendedReal::Finite(0.0),
            inf => {
                let positive = (inf == ExtendedReal::PosInf) == (c > 0.0);
                if positive {
                    ExtendedReal::PosInf
                } else {
                    ExtendedReal::NegInf
                }
            }
        })
    }

    /// Extended sum; `None` for `∞ − ∞`.
    pub fn checked_add(self, other: Self) -> Option<Self> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => None,
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (NegInf, _) | (_, NegInf) => Some(NegInf),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::NegInf => s.serialize_str("-inf"),
            ExtendedReal::PosInf => s.serialize_str("+inf"),
            ExtendedReal::Finite(t) => s.serialize_f64(*t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Interior,
    Added,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactPoint {
    pub label: String,
    pub coords: Vec<ExtendedReal>,
    pub origin: Origin,
}

impl CompactPoint {
    pub fn compactified(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.compactified()).collect()
    }

    /// Max-norm distance in compactified coordinates.
    pub fn distance(&self, other: &CompactPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a.compactified() - b.compactified()).abs())
            .fold(0.0, f64::max)
    }
}

/// A real function of `t`, given symbolically or as a lookup table.
#[derive(Debug, Clone)]
pub enum Generator {
    Symbolic { text: String, expr: meval::Expr },
    Tabulated { name: String, table: Vec<(f64, f64)> },
}

impl Generator {
    pub fn symbolic(text: &str) -> Result<Self> {
        let expr: meval::Expr =
            text.parse().map_err(|e| Error::Input(format!("cannot parse generator `{text}`: {e}")))?;
        // Reject unknown names up front.
        let ctx = meval::Context::new();
        expr.eval_with_context((("t", 0.5), &ctx)).map_err(|e| match e {
            meval::Error::UnknownVariable(v) => Error::Input(format!("unknown variable `{v}` in `{text}`")),
            other => Error::Input(format!("generator `{text}`: {other}")),
        })?;
        Ok(Generator::Symbolic { text: text.to_string(), expr })
    }

    pub fn tabulated(name: &str, table: Vec<(f64, f64)>) -> Self {
        Generator::Tabulated { name: name.to_string(), table }
    }

    pub fn name(&self) -> &str {
        match self {
            Generator::Symbolic { text, .. } => text,
            Generator::Tabulated { name, .. } => name,
        }
    }

    /// Values at `ts`; every value must be finite.
    pub fn eval_many(&self, ts: &[f64]) -> Result<Vec<f64>> {
        let bad = |t: f64| Error::NonEvaluable { generator: self.name().to_string(), t };
        match self {
            Generator::Symbolic { expr, .. } => {
                let ctx = meval::Context::new();
                ts.iter()
                    .map(|&t| {
                        let v = expr.eval_with_context((("t", t), &ctx)).map_err(|_| bad(t))?;
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(bad(t))
                        }
                    })
                    .collect()
            }
            Generator::Tabulated { table, .. } => ts
                .iter()
                .map(|&t| {
                    table
                        .iter()
                        .find(|(s, _)| s.to_bits() == t.to_bits())
                        .map(|&(_, v)| v)
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| bad(t))
                })
                .collect(),
        }
    }
}

/// Points of a sampled space, produced by a rule in `k` or listed explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceSpec {
    Rule { rule: String, prefix: usize },
    Points { points: Vec<f64> },
}

impl SequenceSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            SequenceSpec::Points { points } => Ok(points.clone()),
            SequenceSpec::Rule { rule, prefix } => {
                let expr: meval::Expr =
                    rule.parse().map_err(|e| Error::Input(format!("cannot parse rule `{rule}`: {e}")))?;
                let ctx = meval::Context::new();
                (1..=*prefix)
                    .map(|k| {
                        let v = expr
                            .eval_with_context((("k", k as f64), &ctx))
                            .map_err(|e| Error::Input(format!("rule `{rule}` at k = {k}: {e}")))?;
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(Error::Input(format!("rule `{rule}` is not finite at k = {k}")))
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SequenceSpec::Rule { rule, prefix } => format!("{rule} (k ≤ {prefix})"),
            SequenceSpec::Points { points } => format!("{} listed points", points.len()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LimitOptions {
    /// Fraction of the prefix forming the tail window.
    pub tail_fraction: f64,
    /// Allowed variation of the extrapolated limit across the window.
    pub tol: f64,
    /// Compactified coordinates this close to ±1 are read as ±∞.
    pub infinity_snap: f64,
    /// Limits this close (compactified max-norm) are the same point.
    pub dedupe_tol: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self { tail_fraction: 0.25, tol: 1e-6, infinity_snap: 1e-7, dedupe_tol: 1e-6 }
    }
}

/// One interior point per sample.
pub fn embed(samples: &[f64], generators: &[Generator]) -> Result<Vec<CompactPoint>> {
    let cols: Vec<Vec<f64>> = generators.iter().map(|g| g.eval_many(samples)).collect::<Result<_>>()?;
    Ok(samples
        .iter()
        .enumerate()
        .map(|(i, t)| CompactPoint {
            label: format!("t={t}"),
            coords: cols.iter().map(|c| ExtendedReal::Finite(c[i])).collect(),
            origin: Origin::Interior,
        })
        .collect())
}

/// Whether distinct samples land on distinct points.
pub fn is_injective(points: &[CompactPoint], tol: f64) -> bool {
    (0..points.len()).all(|i| (i + 1..points.len()).all(|j| points[i].distance(&points[j]) > tol))
}

/// Limit of a value sequence in compactified coordinates.
///
/// The tail is extrapolated by `L_m = 2c_{2m} − c_m`, which cancels the
/// leading `1/m` term; the extrapolants over the tail window must agree
/// within `tol`.
fn sequence_limit(values: &[f64], opts: &LimitOptions) -> std::result::Result<ExtendedReal, f64> {
    let c: Vec<f64> = values.iter().map(|&v| ExtendedReal::Finite(v).compactified()).collect();
    let n = c.len();
    if n < 4 {
        return Err(f64::INFINITY);
    }
    let hi = n / 2;
    let lo = (((1.0 - opts.tail_fraction) * n as f64 / 2.0).floor() as usize).clamp(1, hi);
    // c is 0-based: c[k-1] is the k-th term
    let ext: Vec<f64> = (lo..=hi).map(|m| 2.0 * c[2 * m - 1] - c[m - 1]).collect();
    let (min, max) = ext.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if max - min > opts.tol {
        return Err(max - min);
    }
    let limit = *ext.last().unwrap();
    Ok(if limit >= 1.0 - opts.infinity_snap {
        ExtendedReal::PosInf
    } else if limit <= -1.0 + opts.infinity_snap {
        ExtendedReal::NegInf
    } else {
        ExtendedReal::from_compactified(limit)
    })
}

fn limit_of(
    seq_index: usize,
    spec: &SequenceSpec,
    generators: &[Generator],
    opts: &LimitOptions,
) -> Result<Vec<ExtendedReal>> {
    let ts = spec.points()?;
    generators
        .iter()
        .map(|g| {
            let values = g.eval_many(&ts)?;
            sequence_limit(&values, opts).map_err(|variation| Error::NonconvergentNet {
                sequence: seq_index,
                generator: g.name().to_string(),
                variation,
            })
        })
        .collect()
}

/// Added points: sequence limits not already present among `interior`,
/// deduplicated and sorted by compactified coordinates.
pub fn limit_points(
    seqs: &[SequenceSpec],
    generators: &[Generator],
    interior: &[CompactPoint],
    opts: &LimitOptions,
) -> Result<Vec<CompactPoint>> {
    let indexed: Vec<(usize, &SequenceSpec)> = seqs.iter().enumerate().collect();
    let limits = map_ordered(&indexed, |&(i, s)| limit_of(i, s, generators, opts));
    let mut candidates: Vec<(usize, Vec<ExtendedReal>)> = Vec::with_capacity(seqs.len());
    for (i, l) in limits.into_iter().enumerate() {
        candidates.push((i, l?));
    }
    // Coordinates are bucketed so that limit noise does not decide the order.
    let bucket = |v: &[ExtendedReal]| -> Vec<i64> {
        v.iter().map(|c| (c.compactified() / opts.dedupe_tol).round() as i64).collect()
    };
    candidates.sort_by(|a, b| bucket(&a.1).cmp(&bucket(&b.1)).then(a.0.cmp(&b.0)));
    let mut added: Vec<CompactPoint> = Vec::new();
    for (i, coords) in candidates {
        let p = CompactPoint { label: format!("lim{i}"), coords, origin: Origin::Added };
        let known = interior.iter().chain(&added).any(|q| q.distance(&p) <= opts.dedupe_tol);
        if !known {
            added.push(p);
        }
    }
    Ok(added)
}

/// A sampled space with its generators and boundary-probing sequences.
#[derive(Debug, Clone)]
pub struct SampledModel {
    pub samples: Vec<f64>,
    pub generators: Vec<Generator>,
    pub sequences: Vec<SequenceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Compactification {
    pub generators: Vec<String>,
    pub interior: Vec<CompactPoint>,
    pub added: Vec<CompactPoint>,
    pub injective: bool,
}

impl Compactification {
    pub fn points(&self) -> impl Iterator<Item = &CompactPoint> {
        self.interior.iter().chain(&self.added)
    }

    pub fn len(&self) -> usize {
        self.interior.len() + self.added.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn compactify(model: &SampledModel, opts: &LimitOptions) -> Result<Compactification> {
    let interior = embed(&model.samples, &model.generators)?;
    let added = limit_points(&model.sequences, &model.generators, &interior, opts)?;
    Ok(Compactification {
        generators: model.generators.iter().map(|g| g.name().to_string()).collect(),
        injective: is_injective(&interior, opts.dedupe_tol),
        interior,
        added,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct MatchOptions {
    pub match_tol: f64,
    pub margin: f64,
    pub tol: f64,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self { match_tol: 1e-6, margin: 1e-5, tol: crate::scalar::DEFAULT_TOL }
    }
}

/// Decomposition over interior and added points of the codomain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactDecomposition {
    pub domain_points: Vec<String>,
    pub codomain_points: Vec<String>,
    /// `sigma[y]` indexes `domain_points`.
    pub sigma: Vec<usize>,
    pub weight: Vec<f64>,
    /// `c` with `c ≤ T1 ≤ 1/c` at every codomain point.
    pub bound: f64,
    pub interior_residual: f64,
    /// Measured in compactified coordinates.
    pub added_residual: f64,
    pub cone_checked: bool,
}

fn image_coords(m: &Matrix<f64>, y: &CompactPoint, point: usize) -> Result<Vec<ExtendedReal>> {
    (0..m.cols())
        .map(|j| {
            let mut acc = ExtendedReal::Finite(0.0);
            for i in 0..m.rows() {
                if m[(i, j)] == 0.0 {
                    continue;
                }
                acc = acc
                    .checked_add(y.coords[i].scale(m[(i, j)])?)
                    .ok_or_else(|| Error::BoundedScreen(format!("image is ∞ − ∞ at codomain point {point}")))?;
            }
            Ok(acc)
        })
        .collect()
}

fn finite_family(points: &[&CompactPoint], k: usize, tol: f64) -> Result<FunctionFamily<f64>> {
    let space = Arc::new(PointSpace::new(points.iter().map(|p| p.label.clone()).collect())?);
    let gens = (0..k)
        .map(|i| FunctionVec::new(points.iter().map(|p| p.coords[i].finite().unwrap()).collect()))
        .collect::<Result<Vec<_>>>()?;
    FunctionFamily::new(space, gens, None, tol)
}

/// Match every codomain point to the domain point whose generator values
/// equal the image values divided by the weight.
///
/// `matrix` acts on generator coefficients: column `j` holds the codomain
/// coefficients of `T f_j`. The domain generators must include the constant
/// function `1`.
pub fn compactified_decompose(
    matrix: &Matrix<f64>,
    domain: &Compactification,
    codomain: &Compactification,
    opts: &MatchOptions,
) -> Result<CompactDecomposition> {
    let k = domain.generators.len();
    if matrix.rows() != codomain.generators.len() || matrix.cols() != k || !matrix.is_square() {
        return Err(Error::Dimension("operator matrix does not fit the generator lists".into()));
    }
    let constant = (0..k)
        .find(|&j| domain.interior.iter().all(|p| p.coords[j] == ExtendedReal::Finite(1.0)))
        .ok_or(Error::MissingConstants)?;

    let ys: Vec<&CompactPoint> = codomain.points().collect();
    let xs: Vec<&CompactPoint> = domain.points().collect();
    if xs.len() != ys.len() {
        return Err(Error::InternalContradiction(format!(
            "{} domain points but {} codomain points",
            xs.len(),
            ys.len()
        )));
    }

    let images: Vec<Vec<ExtendedReal>> =
        ys.iter().enumerate().map(|(y, p)| image_coords(matrix, p, y)).collect::<Result<_>>()?;
    let mut weight = Vec::with_capacity(ys.len());
    for (y, img) in images.iter().enumerate() {
        match img[constant] {
            ExtendedReal::Finite(w) if w > 0.0 => weight.push(w),
            other => return Err(Error::BoundedScreen(format!("T1 = {other:?} at codomain point {y}"))),
        }
    }
    let bound = weight.iter().map(|&w| w.min(1.0 / w)).fold(f64::INFINITY, f64::min);

    // Cone test on the points where every coordinate is finite.
    let finite = |ps: &[&CompactPoint]| ps.iter().all(|p| p.coords.iter().all(|c| c.is_finite()));
    let cone_checked = finite(&xs) && finite(&ys);
    if cone_checked {
        // Added coordinates are only known to the limit tolerance.
        let has_added = !domain.added.is_empty() || !codomain.added.is_empty();
        let tol = if has_added { opts.tol.max(opts.match_tol) } else { opts.tol };
        let dom = finite_family(&xs, k, tol)?;
        let cod = finite_family(&ys, k, tol)?;
        let t = OperatorModel::new(matrix.clone(), Basis::Generator, dom, cod, tol)?;
        let cert = is_order_isomorphism(&t, &ConeOptions { tol, ..ConeOptions::default() })?;
        if !cert.accept {
            let direction = cert.witness.map_or_else(|| "forward".into(), |w| w.direction.to_string());
            return Err(Error::NotOrderIsomorphism { direction });
        }
    }

    let mut sigma = Vec::with_capacity(ys.len());
    for (y, img) in images.iter().enumerate() {
        let target = CompactPoint {
            label: String::new(),
            coords: img.iter().map(|c| c.scale(1.0 / weight[y])).collect::<Result<_>>()?,
            origin: Origin::Added,
        };
        let mut scored: Vec<(f64, usize)> = xs.iter().enumerate().map(|(x, p)| (p.distance(&target), x)).collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (best, x) = scored[0];
        if best > opts.match_tol {
            return Err(Error::NoBoundaryMatch { point: y, best });
        }
        if let Some(&(runner_up, _)) = scored.get(1) {
            if runner_up - best < opts.margin {
                return Err(Error::AmbiguousBoundary { point: y, best, runner_up });
            }
        }
        if ys[y].origin == Origin::Interior && !xs[x].coords.iter().all(|c| c.is_finite()) {
            return Err(Error::InternalContradiction(format!(
                "interior codomain point {y} matched a point with infinite coordinates"
            )));
        }
        sigma.push(x);
    }
    if crate::recovery::invert_bijection(&sigma).is_none() {
        return Err(Error::InternalContradiction("boundary matching is not a bijection".into()));
    }

    let (mut interior_residual, mut added_residual) = (0.0f64, 0.0f64);
    for (y, img) in images.iter().enumerate() {
        for (j, tf) in img.iter().enumerate() {
            let rhs = xs[sigma[y]].coords[j].scale(weight[y])?;
            match (ys[y].origin, tf.finite(), rhs.finite()) {
                (Origin::Interior, Some(a), Some(b)) => interior_residual = interior_residual.max((a - b).abs()),
                _ => added_residual = added_residual.max((tf.compactified() - rhs.compactified()).abs()),
            }
        }
    }

    Ok(CompactDecomposition {
        domain_points: xs.iter().map(|p| p.label.clone()).collect(),
        codomain_points: ys.iter().map(|p| p.label.clone()).collect(),
        sigma,
        weight,
        bound,
        interior_residual,
        added_residual,
        cone_checked,
    })
}

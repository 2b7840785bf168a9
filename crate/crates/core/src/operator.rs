use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::space::{span_membership, FunctionFamily, FunctionVec, PointSpace};

/// Coordinates an operator matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Columns indexed by domain points, rows by codomain points.
    Point,
    /// Columns indexed by domain generators, rows by codomain generators.
    Generator,
}

/// A linear bijection between the spans of two families.
#[derive(Debug, Clone)]
pub struct OperatorModel<S> {
    matrix: Matrix<S>,
    inverse: Matrix<S>,
    basis: Basis,
    domain: FunctionFamily<S>,
    codomain: FunctionFamily<S>,
    tol: f64,
}

impl<S: Scalar> OperatorModel<S> {
    pub fn new(
        matrix: Matrix<S>,
        basis: Basis,
        domain: FunctionFamily<S>,
        codomain: FunctionFamily<S>,
        tol: f64,
    ) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "operator matrix is {}×{}, must be square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let (expected_cols, expected_rows) = match basis {
            Basis::Point => {
                if !domain.is_full() || !codomain.is_full() {
                    return Err(Error::NeedsFullFamilies("point-coordinate operators act on all functions".into()));
                }
                (domain.num_points(), codomain.num_points())
            }
            Basis::Generator => (domain.dim(), codomain.dim()),
        };
        if matrix.cols() != expected_cols || matrix.rows() != expected_rows {
            return Err(Error::Dimension(format!(
                "operator matrix is {}×{}, families need {expected_rows}×{expected_cols}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let inverse = matrix.inverse(tol).ok_or(Error::Singular)?;
        Ok(Self { matrix, inverse, basis, domain, codomain, tol })
    }

    /// Point-coordinate operator between the full function spaces on
    /// `x1 … xn` and `y1 … yn`.
    pub fn point(matrix: Matrix<S>, tol: f64) -> Result<Self> {
        let n = matrix.cols();
        let m = matrix.rows();
        let xs = Arc::new(PointSpace::unlabeled(n.max(1))?);
        let ys = Arc::new(PointSpace::new((1..=m.max(1)).map(|i| format!("y{i}")).collect())?);
        Self::new(matrix, Basis::Point, FunctionFamily::full(xs), FunctionFamily::full(ys), tol)
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &Matrix<S> {
        &self.inverse
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn domain(&self) -> &FunctionFamily<S> {
        &self.domain
    }

    pub fn codomain(&self) -> &FunctionFamily<S> {
        &self.codomain
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `‖M‖∞ · ‖M⁻¹‖∞`
    pub fn condition_estimate(&self) -> f64 {
        self.matrix.norm_inf() * self.inverse.norm_inf()
    }

    /// The operator `T⁻¹`.
    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
            basis: self.basis,
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            tol: self.tol,
        }
    }

    /// Apply to a domain function given by its point values.
    pub fn apply(&self, f: &FunctionVec<S>) -> Result<FunctionVec<S>> {
        apply_with(&self.matrix, self.basis, &self.domain, &self.codomain, f, self.tol)
    }

    pub fn apply_inverse(&self, g: &FunctionVec<S>) -> Result<FunctionVec<S>> {
        apply_with(&self.inverse, self.basis, &self.codomain, &self.domain, g, self.tol)
    }

    /// Image of the domain function with generator coefficients `c`, as point values.
    pub fn apply_coeffs(&self, c: &[S]) -> FunctionVec<S> {
        let f = self.domain.combine(c);
        match self.basis {
            Basis::Point => FunctionVec::from_vec(self.matrix.mul_vec(f.values())),
            Basis::Generator => self.codomain.combine(&self.matrix.mul_vec(c)),
        }
    }

    /// Matrix acting on point values; needs both families to be full.
    pub fn point_matrix(&self) -> Result<Matrix<S>> {
        match self.basis {
            Basis::Point => Ok(self.matrix.clone()),
            Basis::Generator => {
                let inv = self
                    .domain
                    .coordinate_inverse()
                    .ok_or_else(|| Error::NeedsFullFamilies("domain family does not span all functions".into()))?;
                if !self.codomain.is_full() {
                    return Err(Error::NeedsFullFamilies("codomain family does not span all functions".into()));
                }
                // values_Y = G_Yᵀ M (G_Xᵀ)⁻¹ values_X
                let gy_t = self.codomain.generator_matrix().transpose();
                Ok(gy_t.mul(&self.matrix).mul(inv))
            }
        }
    }

    /// Same operator re-expressed in point coordinates.
    pub fn to_point_basis(&self) -> Result<Self> {
        if self.basis == Basis::Point {
            return Ok(self.clone());
        }
        let m = self.point_matrix()?;
        let domain = FunctionFamily::full(self.domain.space().clone());
        let codomain = FunctionFamily::full(self.codomain.space().clone());
        Self::new(m, Basis::Point, domain, codomain, self.tol)
    }

    /// Pre- and post-compose with diagonal multipliers: `f ↦ left · T(right · f)`.
    /// Point basis only.
    pub fn weighted(&self, left: &[S], right: &[S]) -> Result<Self> {
        let m = self.point_matrix()?;
        if left.len() != m.rows() || right.len() != m.cols() {
            return Err(Error::Dimension("multiplier lengths must match the point counts".into()));
        }
        let w = Matrix::from_fn(m.rows(), m.cols(), |i, j| {
            let v = &m[(i, j)];
            if v.is_zero() {
                S::zero()
            } else {
                left[i].clone() * v.clone() * right[j].clone()
            }
        });
        Self::new(
            w,
            Basis::Point,
            FunctionFamily::full(self.domain.space().clone()),
            FunctionFamily::full(self.codomain.space().clone()),
            self.tol,
        )
    }

    pub fn to_f64(&self) -> Result<OperatorModel<f64>> {
        let fam = |f: &FunctionFamily<S>| -> Result<FunctionFamily<f64>> {
            if f.is_standard() {
                return Ok(FunctionFamily::full(f.space().clone()));
            }
            FunctionFamily::new(
                f.space().clone(),
                f.generators().map(|g| g.to_f64()).collect(),
                f.names().map(<[String]>::to_vec),
                crate::scalar::DEFAULT_TOL,
            )
        };
        OperatorModel::new(
            self.matrix.to_f64(),
            self.basis,
            fam(&self.domain)?,
            fam(&self.codomain)?,
            self.tol.max(crate::scalar::DEFAULT_TOL),
        )
    }
}

fn apply_with<S: Scalar>(
    matrix: &Matrix<S>,
    basis: Basis,
    from: &FunctionFamily<S>,
    to: &FunctionFamily<S>,
    f: &FunctionVec<S>,
    tol: f64,
) -> Result<FunctionVec<S>> {
    if f.len() != from.num_points() {
        return Err(Error::Dimension(format!("function has {} values, expected {}", f.len(), from.num_points())));
    }
    match basis {
        Basis::Point => Ok(FunctionVec::from_vec(matrix.mul_vec(f.values()))),
        Basis::Generator => {
            let fit = span_membership(from, f, tol)?;
            if !fit.member {
                return Err(Error::Dimension(format!(
                    "function is not in the domain span (residual {})",
                    fit.residual
                )));
            }
            Ok(to.combine(&matrix.mul_vec(&fit.coefficients)))
        }
    }
}

//! Scalar fields the engine runs over.
//!
//! Everything numeric is generic over [`Scalar`]. Two instances ship:
//! `f64`, where every sign or zero test takes an explicit tolerance, and
//! [`Rational`], an arbitrary-precision fraction where tolerances are ignored
//! and tests are exact.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Default tolerance for zero sets, residuals and sign tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Arithmetic mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Input(format!("unknown mode `{other}`"))),
        }
    }
}

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    const MODE: Mode;

    fn approx_zero(&self, tol: f64) -> bool;

    /// `self >= -tol` (exact: `self >= 0`).
    fn approx_nonneg(&self, tol: f64) -> bool;

    /// `self > tol` (exact: `self > 0`).
    fn approx_pos(&self, tol: f64) -> bool;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact conversion from a double; `None` for non-finite input.
    fn from_f64_exact(x: f64) -> Option<Self> {
        if x.is_finite() {
            Self::from_f64(x)
        } else {
            None
        }
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).unwrap() / Self::from_i64(den).unwrap()
    }

    /// JSON rendering: plain numbers for floats, `"p/q"` strings for rationals.
    fn to_json(&self) -> serde_json::Value;

    /// Least-squares solution of `a x ≈ b` for a matrix with full column rank.
    fn least_squares(a: &Matrix<Self>, b: &[Self]) -> Option<Vec<Self>> {
        let at = a.transpose();
        let gram = at.mul(a);
        let rhs = at.mul_vec(b);
        gram.solve(&rhs, 0.0)
    }

    fn is_exact() -> bool {
        Self::MODE == Mode::Exact
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn approx_zero(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn approx_nonneg(&self, tol: f64) -> bool {
        *self >= -tol
    }

    fn approx_pos(&self, tol: f64) -> bool {
        *self > tol
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
    }

    fn least_squares(a: &Matrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
        let m = nalgebra::DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)]);
        let rhs = nalgebra::DVector::from_column_slice(b);
        let svd = m.svd(true, true);
        let x = svd.solve(&rhs, 1e-13).ok()?;
        Some(x.iter().copied().collect())
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn approx_zero(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn approx_nonneg(&self, _tol: f64) -> bool {
        !self.is_negative()
    }

    fn approx_pos(&self, _tol: f64) -> bool {
        self.is_positive()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}

/// Parse `"p"`, `"p/q"` or a decimal literal such as `"0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Input(format!("not a rational literal: `{text}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Input(format!("zero denominator in `{text}`")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Ok(p) = BigInt::from_str(s) {
        return Ok(Rational::from_integer(p));
    }
    // Decimal literal, read digit-exactly rather than through a double.
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').ok_or_else(bad)?;
    let digits = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if digits == "-" || digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    Ok(if scale >= 0 {
        Rational::from_integer(num * ten.pow(scale as u32))
    } else {
        Rational::new(num, ten.pow((-scale) as u32))
    })
}

/// Read a JSON entry as a scalar of the requested mode.
///
/// In exact mode only integers and rational strings are admitted; a JSON
/// float literal is refused so that no precision is silently lost.
pub fn scalar_from_json<S: Scalar>(value: &serde_json::Value) -> Result<S> {
    use serde_json::Value;
    match (S::MODE, value) {
        (Mode::Exact, Value::Number(n)) => {
            if let Some(i) = n.as_i64() {
                Ok(S::from_i64(i).unwrap())
            } else if let Some(u) = n.as_u64() {
                Ok(S::from_u64(u).unwrap())
            } else {
                Err(Error::Input(format!(
                    "exact mode refuses floating-point literal {n}; write it as a \"p/q\" string"
                )))
            }
        }
        (Mode::Exact, Value::String(s)) => {
            let r = parse_rational(s)?;
            let f = r.to_f64().unwrap_or(f64::NAN);
            // Round-trip through the generic trait: for Rational this is the identity.
            rational_into::<S>(r).ok_or_else(|| Error::Input(format!("cannot represent {f}")))
        }
        (Mode::Float, Value::Number(n)) => {
            let x = n.as_f64().ok_or_else(|| Error::Input(format!("bad number {n}")))?;
            S::from_f64_exact(x).ok_or_else(|| Error::Input(format!("non-finite entry {n}")))
        }
        (Mode::Float, Value::String(s)) => {
            let x = parse_rational(s)?.to_f64().unwrap_or(f64::NAN);
            S::from_f64_exact(x).ok_or_else(|| Error::Input(format!("non-finite entry `{s}`")))
        }
        (_, other) => Err(Error::Input(format!("expected a number, found {other}"))),
    }
}

fn rational_into<S: Scalar>(r: Rational) -> Option<S> {
    // S is Rational whenever MODE is Exact, whose radix parser wants `p/q`.
    S::from_str_radix(&format!("{}/{}", r.numer(), r.denom()), 10).ok()
}

pub fn max_abs<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| if v.abs() > acc { v.abs() } else { acc })
}

/// `serialize_with` adapter rendering a scalar through [`Scalar::to_json`].
pub fn serialize_scalar<S: Scalar, Ser: serde::Serializer>(
    v: &S,
    serializer: Ser,
) -> std::result::Result<Ser::Ok, Ser::Error> {
    v.to_json().serialize(serializer)
}

use serde::{Deserialize, Serialize};

use super::expr::{smooth_clamp, theta, Expr};
use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Input(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(t: f64) -> Self {
        Self { lo: t, hi: t }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval { lo: self.lo, hi: m }, Interval { lo: m, hi: self.hi })
    }

    /// `n` evenly spaced points including both ends.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![self.mid()];
        }
        (0..n).map(|i| self.lo + self.width() * i as f64 / (n - 1) as f64).collect()
    }
}

/// Ulp-scale slack for the libm sine.
const SIN_SLACK: f64 = 2.0 * f64::EPSILON;

/// Enclosure of `e` over `box_`.
///
/// Linear combinations are padded outward by `(n+1)·ε·Σ|cᵢ|·|xᵢ|`; the
/// monotone maps use endpoint values with ulp slack. `theta` on an argument
/// range leaving `[-1, 1]` falls back to `[-1, 1]`.
pub fn interval_eval(e: &Expr, box_: Interval) -> Interval {
    match e {
        Expr::Const(c) => Interval::point(*c),
        Expr::Ident => box_,
        Expr::LinComb(terms) => {
            let (mut lo, mut hi, mut mag) = (0.0f64, 0.0f64, 0.0f64);
            for (c, child) in terms {
                let j = interval_eval(child, box_);
                let (a, b) = (c * j.lo, c * j.hi);
                lo += a.min(b);
                hi += a.max(b);
                mag += a.abs().max(b.abs());
            }
            let pad = (terms.len() + 1) as f64 * f64::EPSILON * mag;
            Interval { lo: lo - pad, hi: hi + pad }
        }
        Expr::Clamp(child) => {
            let j = interval_eval(child, box_);
            let widen = |t: f64, dir: f64| {
                if t <= 0.0 || t >= 1.0 {
                    smooth_clamp(t)
                } else {
                    (theta(t) + dir * SIN_SLACK).clamp(0.0, 1.0)
                }
            };
            Interval { lo: widen(j.lo, -1.0), hi: widen(j.hi, 1.0) }
        }
        Expr::Theta(child) => {
            let j = interval_eval(child, box_);
            if j.lo >= -1.0 && j.hi <= 1.0 {
                Interval { lo: (theta(j.lo) - SIN_SLACK).max(-1.0), hi: (theta(j.hi) + SIN_SLACK).min(1.0) }
            } else {
                Interval { lo: -1.0, hi: 1.0 }
            }
        }
    }
}

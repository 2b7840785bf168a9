//! The clamp-closed function space on `[0, 1]` and its `theta` counterpart on `ℝ`.

mod expr;
mod interval;
mod local_form;

use rand::Rng;
use serde::Serialize;

pub use expr::{smooth_clamp, theta, Expr};
pub use interval::{interval_eval, Interval};
pub use local_form::{local_form, LocalForm, DEFAULT_DEPTH_CAP};

use crate::error::{Error, Result};

/// `g∘ℓ` for the affine `ℓ` with `ℓ(a) = 0`, `ℓ(b) = 1`: zero on `[0, a]`,
/// one on `[b, 1]`, strictly between in `(a, b)`.
pub fn separation_witness(a: f64, b: f64) -> Result<Expr> {
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::Input(format!("separation needs a < b, got a = {a}, b = {b}")));
    }
    let s = 1.0 / (b - a);
    Ok(Expr::clamp(Expr::lin(vec![(s, Expr::Ident), (-(s * a), Expr::Const(1.0))])))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub passed: bool,
    /// `|u(T_max)| / T_max²`
    pub final_ratio: f64,
    /// Largest ratio over the last decade of the grid.
    pub last_decade_max: f64,
    /// Largest ratio over the decade before it.
    pub previous_decade_max: f64,
}

pub const DECAY_THRESHOLD: f64 = 1e-6;

/// Check `|u(t)| / t² → 0` on a log-spaced grid `1 … t_max`.
///
/// Passes when the ratio at `t_max` is at most 1e-6 (up to rounding) and the
/// largest ratio over the last decade is below that over the decade before.
pub fn decay_check(u: &Expr, t_max: f64, grid: usize) -> Result<DecayReport> {
    if !u.is_theta_expr() {
        return Err(Error::Expr("decay is checked on clamp-free expressions".into()));
    }
    if t_max.is_nan() || t_max < 100.0 || grid < 3 {
        return Err(Error::Input("decay check needs t_max ≥ 100 and at least 3 grid points".into()));
    }
    let top = t_max.log10();
    let ratio = |t: f64| u.eval(t).abs() / t / t;
    let (mut last, mut prev) = (0.0f64, 0.0f64);
    for i in 0..grid {
        let e = top * i as f64 / (grid - 1) as f64;
        let t = if i + 1 == grid { t_max } else { 10f64.powf(e) };
        if e > top - 1.0 {
            last = last.max(ratio(t));
        } else if e > top - 2.0 {
            prev = prev.max(ratio(t));
        }
    }
    let final_ratio = ratio(t_max);
    let decreasing = last < prev || (last == 0.0 && prev == 0.0);
    Ok(DecayReport {
        passed: final_ratio <= DECAY_THRESHOLD * (1.0 + 1e-9) && decreasing,
        final_ratio,
        last_decade_max: last,
        previous_decade_max: prev,
    })
}

fn coefficient<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    // Coarse grid keeps printed expressions short.
    (rng.random_range(-100..=100) as f64 / 100.0) * scale
}

fn random_tree<R: Rng>(rng: &mut R, level: usize, wrap: fn(Expr) -> Expr, arg_scale: f64) -> Expr {
    if level <= 1 {
        return Expr::affine(coefficient(rng, arg_scale), coefficient(rng, 2.0 * arg_scale));
    }
    let mut terms = vec![(1.0, random_tree(rng, level - 1, wrap, arg_scale))];
    for _ in 0..rng.random_range(1..=2) {
        terms.push((coefficient(rng, 1.0), wrap(random_tree(rng, level - 1, wrap, arg_scale))));
    }
    Expr::LinComb(terms)
}

fn l1_normalized(e: Expr) -> Expr {
    match e {
        Expr::LinComb(terms) => {
            let total: f64 = terms.iter().map(|(c, _)| c.abs()).sum();
            let s = if total > 1.0 { 1.0 / total } else { 1.0 };
            Expr::LinComb(terms.into_iter().map(|(c, t)| (c * s, l1_normalized(t))).collect())
        }
        Expr::Clamp(inner) => Expr::clamp(l1_normalized(*inner)),
        Expr::Theta(inner) => Expr::theta(l1_normalized(*inner)),
        other => other,
    }
}

/// A random clamp expression of the given level (at least 1).
pub fn random_clamp_expr<R: Rng>(rng: &mut R, level: usize) -> Expr {
    random_tree(rng, level, Expr::clamp, 1.0)
}

/// A random `theta` expression of the given level, with every linear
/// combination scaled to coefficient l1-norm at most 1.
pub fn random_theta_expr<R: Rng>(rng: &mut R, level: usize) -> Expr {
    l1_normalized(random_tree(rng, level, Expr::theta, 1.0))
}

/// A random subinterval of `[0, 1]` of width at least 0.01.
pub fn random_subinterval<R: Rng>(rng: &mut R) -> Interval {
    let w = rng.random_range(0.01..=1.0);
    let lo = rng.random_range(0.0..=1.0 - w);
    Interval { lo, hi: (lo + w).min(1.0) }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn witness_examples() {
        let w = separation_witness(0.0, 1.0).unwrap();
        assert_eq!(w, Expr::clamp(Expr::Ident));
        assert_eq!((w.eval(0.0), w.eval(1.0)), (0.0, 1.0));
        let w = separation_witness(0.25, 0.5).unwrap();
        assert!((w.eval(0.375) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let bump = Expr::lin(vec![
            (1.0, separation_witness(0.0, 1.0 / 3.0).unwrap()),
            (-1.0, separation_witness(2.0 / 3.0, 1.0).unwrap()),
        ]);
        assert_eq!(bump.eval(0.0), 0.0);
        assert_eq!(bump.eval(1.0), 0.0);
        assert_eq!(bump.eval(0.5), 1.0);
        assert!(separation_witness(0.5, 0.5).is_err());
    }

    #[test]
    fn decay_examples() {
        assert!(decay_check(&Expr::Ident, 1e6, 61).unwrap().passed);
        let u = Expr::lin(vec![(5.0, Expr::Const(1.0)), (1.0, Expr::theta(Expr::Ident))]);
        assert!(decay_check(&u, 1e6, 61).unwrap().passed);
        assert!(decay_check(&Expr::Const(0.0), 1e6, 61).unwrap().passed);
        assert!(decay_check(&Expr::clamp(Expr::Ident), 1e6, 61).is_err());
    }

    #[test]
    fn random_expressions_have_requested_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for level in 1..=3 {
            let x = random_clamp_expr(&mut rng, level);
            assert!(x.is_clamp_expr());
            assert_eq!(x.level(), level);
            let s = random_theta_expr(&mut rng, level);
            assert!(s.is_theta_expr());
            assert_eq!(s.level(), level);
        }
    }
}

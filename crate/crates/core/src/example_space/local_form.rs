use std::collections::VecDeque;

use serde::Serialize;

use super::expr::Expr;
use super::interval::{interval_eval, Interval};
use crate::error::{Error, Result};

pub const DEFAULT_DEPTH_CAP: usize = 40;
const FRONTIER_CAP: usize = 4096;
const CHECK_POINTS: usize = 64;
const AGREEMENT_TOL: f64 = 1e-10;
const MIN_WIDTH: f64 = 1e-12;

/// `f = u` on `interval`, with `u` free of clamps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalForm {
    pub interval: Interval,
    pub form: Expr,
    /// Largest `|f − u|` over the check points.
    pub agreement: f64,
}

enum Probe {
    Inside,
    Below,
    Above,
    Straddles,
}

fn probe(arg: &Expr, b: Interval) -> Probe {
    let enc = interval_eval(arg, b);
    if enc.hi <= 0.0 {
        Probe::Below
    } else if enc.lo >= 1.0 {
        Probe::Above
    } else if enc.lo > 0.0 && enc.hi < 1.0 {
        Probe::Inside
    } else {
        Probe::Straddles
    }
}

fn clamp_form(arg: &Expr, j: Interval, depth_cap: usize) -> Result<(Interval, Expr)> {
    match probe(arg, j) {
        Probe::Below => return Ok((j, Expr::Const(0.0))),
        Probe::Above => return Ok((j, Expr::Const(1.0))),
        _ => {}
    }
    // Breadth-first bisection, left half first at every level.
    let mut frontier = VecDeque::from([j]);
    let mut settled: Option<(Interval, f64)> = None;
    for _ in 0..=depth_cap {
        let mut next = VecDeque::new();
        for b in frontier {
            if b.width() < MIN_WIDTH {
                continue;
            }
            match probe(arg, b) {
                Probe::Inside => {
                    let (jj, u) = form(arg, b, depth_cap)?;
                    return Ok((jj, Expr::theta(u)));
                }
                Probe::Below => {
                    settled.get_or_insert((b, 0.0));
                }
                Probe::Above => {
                    settled.get_or_insert((b, 1.0));
                }
                Probe::Straddles => {
                    if next.len() < FRONTIER_CAP {
                        let (l, r) = b.bisect();
                        next.push_back(l);
                        next.push_back(r);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    match settled {
        Some((b, c)) => Ok((b, Expr::Const(c))),
        None => Err(Error::Inconclusive {
            depth: depth_cap,
            reason: format!("no subinterval of [{}, {}] certified for a clamp argument", j.lo, j.hi),
        }),
    }
}

fn form(f: &Expr, j: Interval, depth_cap: usize) -> Result<(Interval, Expr)> {
    match f {
        Expr::Const(_) | Expr::Ident => Ok((j, f.clone())),
        Expr::Theta(_) => Err(Error::Expr("local forms take clamp expressions only".into())),
        Expr::Clamp(arg) => clamp_form(arg, j, depth_cap),
        Expr::LinComb(terms) => {
            let mut cur = j;
            let mut out = Vec::with_capacity(terms.len());
            for (c, child) in terms {
                let (next, u) = form(child, cur, depth_cap)?;
                cur = next;
                out.push((*c, u));
            }
            Ok((cur, Expr::LinComb(out)))
        }
    }
}

/// A nondegenerate `J ⊆ I` and a clamp-free `u` with `f = u` on `J`.
///
/// Each clamp argument is bisected until its enclosure lies inside `(0, 1)`,
/// where the clamp is `theta`, or outside it, where the clamp is constant.
/// The result is checked at 64 points of `J`.
pub fn local_form(f: &Expr, i: Interval, depth_cap: usize) -> Result<LocalForm> {
    if !f.is_clamp_expr() {
        return Err(Error::Expr("local forms take clamp expressions only".into()));
    }
    if i.width() <= 0.0 || i.lo < 0.0 || i.hi > 1.0 {
        return Err(Error::Input(format!("interval [{}, {}] must be nondegenerate inside [0, 1]", i.lo, i.hi)));
    }
    let (j, u) = form(f, i, depth_cap)?;
    if j.width() < MIN_WIDTH {
        return Err(Error::Inconclusive { depth: depth_cap, reason: "interval collapsed".into() });
    }
    let agreement = j.samples(CHECK_POINTS).into_iter().map(|t| (f.eval(t) - u.eval(t)).abs()).fold(0.0, f64::max);
    if agreement > AGREEMENT_TOL {
        return Err(Error::Inconclusive {
            depth: depth_cap,
            reason: format!("form disagrees with the expression by {agreement:e}"),
        });
    }
    Ok(LocalForm { interval: j, form: u, agreement })
}

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// `sin(πt/2)`
pub fn theta(t: f64) -> f64 {
    (FRAC_PI_2 * t).sin()
}

/// 0 for `t ≤ 0`, `theta(t)` on `(0, 1)`, 1 for `t ≥ 1`.
pub fn smooth_clamp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        theta(t)
    }
}

/// Expression trees for the clamp-closed spans and their `theta` counterparts.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expr {
    Const(f64),
    Ident,
    Clamp(Box<Expr>),
    Theta(Box<Expr>),
    LinComb(Vec<(f64, Expr)>),
}

impl Expr {
    pub fn clamp(e: Expr) -> Self {
        Expr::Clamp(Box::new(e))
    }

    pub fn theta(e: Expr) -> Self {
        Expr::Theta(Box::new(e))
    }

    /// Linear combination, dropping zero coefficients and unwrapping `1·e`.
    pub fn lin(terms: Vec<(f64, Expr)>) -> Self {
        let mut terms: Vec<(f64, Expr)> = terms.into_iter().filter(|(c, _)| *c != 0.0).collect();
        match terms.len() {
            0 => Expr::Const(0.0),
            1 if terms[0].0 == 1.0 => terms.pop().unwrap().1,
            _ => Expr::LinComb(terms),
        }
    }

    /// `a + b·t`
    pub fn affine(a: f64, b: f64) -> Self {
        Expr::lin(vec![(a, Expr::Const(1.0)), (b, Expr::Ident)])
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Ident => t,
            Expr::Clamp(e) => smooth_clamp(e.eval(t)),
            Expr::Theta(e) => theta(e.eval(t)),
            Expr::LinComb(terms) => terms.iter().map(|(c, e)| c * e.eval(t)).sum(),
        }
    }

    /// Level `n` of the span hierarchy the expression is built in.
    pub fn level(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Ident => 1,
            Expr::Clamp(e) | Expr::Theta(e) => e.level() + 1,
            Expr::LinComb(terms) => terms.iter().map(|(_, e)| e.level()).max().unwrap_or(1),
        }
    }

    fn any_node(&self, pred: &impl Fn(&Expr) -> bool) -> bool {
        pred(self)
            || match self {
                Expr::Clamp(e) | Expr::Theta(e) => e.any_node(pred),
                Expr::LinComb(terms) => terms.iter().any(|(_, e)| e.any_node(pred)),
                _ => false,
            }
    }

    /// No `Theta` nodes: a member of the clamp-closed space on `[0, 1]`.
    pub fn is_clamp_expr(&self) -> bool {
        !self.any_node(&|e| matches!(e, Expr::Theta(_)))
    }

    /// No `Clamp` nodes: a real-analytic member of the `theta` space on `ℝ`.
    pub fn is_theta_expr(&self) -> bool {
        !self.any_node(&|e| matches!(e, Expr::Clamp(_)))
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Ident => 1,
            Expr::Clamp(e) | Expr::Theta(e) => 1 + e.size(),
            Expr::LinComb(terms) => 1 + terms.iter().map(|(_, e)| e.size()).sum::<usize>(),
        }
    }

    /// Parse `(const c) | t | (clamp e) | (theta e) | (lin (c…) (e…))`.
    pub fn parse(text: &str) -> Result<Self> {
        let v = lexpr::from_str(text).map_err(|e| Error::Expr(format!("bad s-expression: {e}")))?;
        from_sexp(&v)
    }
}

fn number(v: &lexpr::Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::Expr(format!("expected a number, found `{v}`")))
}

fn list(v: &lexpr::Value) -> Result<Vec<lexpr::Value>> {
    if v.is_null() || v.is_nil() {
        return Ok(Vec::new());
    }
    v.to_vec().ok_or_else(|| Error::Expr(format!("expected a list, found `{v}`")))
}

fn from_sexp(v: &lexpr::Value) -> Result<Expr> {
    if v.as_symbol() == Some("t") {
        return Ok(Expr::Ident);
    }
    if let Some(c) = v.as_f64() {
        return Ok(Expr::Const(c));
    }
    let items = list(v)?;
    let head = items.first().and_then(|h| h.as_symbol()).unwrap_or("");
    let arity = |n: usize| -> Result<()> {
        if items.len() == n + 1 {
            Ok(())
        } else {
            Err(Error::Expr(format!("`{head}` takes {n} argument(s) in `{v}`")))
        }
    };
    match head {
        "const" => {
            arity(1)?;
            Ok(Expr::Const(number(&items[1])?))
        }
        "clamp" => {
            arity(1)?;
            Ok(Expr::clamp(from_sexp(&items[1])?))
        }
        "theta" => {
            arity(1)?;
            Ok(Expr::theta(from_sexp(&items[1])?))
        }
        "lin" => {
            arity(2)?;
            let coeffs = list(&items[1])?.iter().map(number).collect::<Result<Vec<_>>>()?;
            let children = list(&items[2])?.iter().map(from_sexp).collect::<Result<Vec<_>>>()?;
            if coeffs.len() != children.len() || coeffs.is_empty() {
                return Err(Error::Expr(format!("`lin` needs matching nonempty lists in `{v}`")));
            }
            Ok(Expr::LinComb(coeffs.into_iter().zip(children).collect()))
        }
        _ => Err(Error::Expr(format!("unknown form `{v}`"))),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "(const {c:?})"),
            Expr::Ident => f.write_str("t"),
            Expr::Clamp(e) => write!(f, "(clamp {e})"),
            Expr::Theta(e) => write!(f, "(theta {e})"),
            Expr::LinComb(terms) => {
                f.write_str("(lin (")?;
                for (i, (c, _)) in terms.iter().enumerate() {
                    write!(f, "{}{c:?}", if i > 0 { " " } else { "" })?;
                }
                f.write_str(") (")?;
                for (i, (_, e)) in terms.iter().enumerate() {
                    write!(f, "{}{e}", if i > 0 { " " } else { "" })?;
                }
                f.write_str("))")
            }
        }
    }
}

//! Linear-programming helpers over `f64`, backed by `minilp`.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

fn free_vars(p: &mut Problem, objective: &[f64]) -> Vec<Variable> {
    objective.iter().map(|&c| p.add_var(c, (f64::NEG_INFINITY, f64::INFINITY))).collect()
}

fn row_expr(vars: &[Variable], row: &[f64]) -> Vec<(Variable, f64)> {
    vars.iter().zip(row).filter(|(_, &a)| a != 0.0).map(|(&v, &a)| (v, a)).collect()
}

/// Search for `c` with `a c ≥ 0` and some `(b c)_y < 0`.
///
/// One LP per row `y` of `b`: minimize `(b c)_y` subject to `a c ≥ 0` and
/// `Σ (a c) ≤ 1`. Returns the first `c` whose objective falls below `-tol`.
pub fn find_cone_violation(a: &Matrix<f64>, b: &Matrix<f64>, tol: f64) -> Result<Option<Vec<f64>>> {
    assert_eq!(a.cols(), b.cols(), "constraint and image matrices must share columns");
    let k = a.cols();
    let total: Vec<f64> = (0..k).map(|j| (0..a.rows()).map(|i| a[(i, j)]).sum()).collect();
    for y in 0..b.rows() {
        let obj = b.row(y);
        if obj.iter().all(|&v| v == 0.0) {
            continue;
        }
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let vars = free_vars(&mut p, obj);
        for i in 0..a.rows() {
            let e = row_expr(&vars, a.row(i));
            if !e.is_empty() {
                p.add_constraint(e, ComparisonOp::Ge, 0.0);
            }
        }
        p.add_constraint(row_expr(&vars, &total), ComparisonOp::Le, 1.0);
        match p.solve() {
            Ok(sol) => {
                let scale = obj.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                if sol.objective() < -tol * scale {
                    return Ok(Some(vars.iter().map(|&v| *sol.var_value(v)).collect()));
                }
            }
            // The cone is pointed and the normalization bounds it, so an
            // unbounded objective means the image functional is unbounded
            // below on a ray: a violation we cannot extract from the solver.
            Err(minilp::Error::Unbounded) => {
                return Err(Error::Lp(format!("unbounded objective for codomain point {y}")))
            }
            Err(e) => return Err(Error::Lp(e.to_string())),
        }
    }
    Ok(None)
}

/// Find `c` with `a c ≥ lower` pointwise, minimizing `Σ (a c)`; `None` when infeasible.
pub fn dominating_combination(a: &Matrix<f64>, lower: &[f64]) -> Result<Option<Vec<f64>>> {
    assert_eq!(a.rows(), lower.len(), "one lower bound per row");
    let k = a.cols();
    let total: Vec<f64> = (0..k).map(|j| (0..a.rows()).map(|i| a[(i, j)]).sum()).collect();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars = free_vars(&mut p, &total);
    for (i, &lo) in lower.iter().enumerate() {
        let e = row_expr(&vars, a.row(i));
        if e.is_empty() {
            if lo > 0.0 {
                return Ok(None);
            }
            continue;
        }
        p.add_constraint(e, ComparisonOp::Ge, lo);
    }
    match p.solve() {
        Ok(sol) => Ok(Some(vars.iter().map(|&v| *sol.var_value(v)).collect())),
        Err(minilp::Error::Infeasible) => Ok(None),
        Err(e) => Err(Error::Lp(e.to_string())),
    }
}

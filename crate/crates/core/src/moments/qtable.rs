use serde::Serialize;

use super::params::ModelParams;
use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};

pub const DEFAULT_P_MAX: usize = 12;
pub const DEFAULT_SOLVER_TOL: f64 = 1e-14;
const DEFAULT_MAX_ITER: usize = 10_000;
const DAMPING: f64 = 0.5;

/// The fixed point `q2` and the moments `q_p = E[tanh^p(beta sqrt(q2) Y + h)]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QTable {
    pub params: ModelParams,
    pub q2: f64,
    pub q: Vec<f64>,
    pub p_max: usize,
}

impl QTable {
    /// `q_p`, or an invalid-argument error naming the missing index.
    pub fn get(&self, p: usize) -> Result<f64> {
        self.q.get(p).copied().ok_or_else(|| {
            Error::invalid(format!(
                "q_{p} requested but the moment table stops at p_max = {}",
                self.p_max
            ))
        })
    }

    pub fn residual(&self, rule: &QuadratureRule) -> f64 {
        (self.q2 - fixed_point_map(&self.params, rule, self.q2)).abs()
    }
}

/// `q -> E[tanh^2(beta sqrt(q) Y + h)]`.
pub fn fixed_point_map(params: &ModelParams, rule: &QuadratureRule, q: f64) -> f64 {
    let s = params.beta * q.max(0.0).sqrt();
    rule.expect(|y| {
        let t = (s * y + params.h).tanh();
        t * t
    })
}

/// Solves `q2 = E[tanh^2(beta sqrt(q2) Y + h)]`.
///
/// The primary solver is damped fixed-point iteration started from the
/// `beta = 0` solution `tanh^2(h)`. Its answer is cross-checked against a
/// sign-change bisection on `[0, 1]`; if the iteration fails to converge the
/// bisection root is used instead.
pub fn solve_q2(
    params: &ModelParams,
    rule: &QuadratureRule,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!("solver tolerance must be > 0, got {tol}")));
    }
    let bisection = bisect_q2(params, rule, tol)?;
    match damped_iteration(params, rule, tol, max_iter) {
        Ok(q) => {
            if (q - bisection).abs() > 10.0 * tol {
                return Err(Error::Ambiguity {
                    fixed_point: q,
                    bisection,
                    tolerance: 10.0 * tol,
                });
            }
            Ok(q)
        }
        Err(last_residual) => {
            let r = (bisection - fixed_point_map(params, rule, bisection)).abs();
            if r < tol {
                Ok(bisection)
            } else {
                Err(Error::SolverFailure {
                    iterations: max_iter,
                    residual: last_residual.min(r),
                })
            }
        }
    }
}

fn damped_iteration(
    params: &ModelParams,
    rule: &QuadratureRule,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<f64, f64> {
    let mut q = params.h.tanh().powi(2);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let fq = fixed_point_map(params, rule, q);
        residual = (q - fq).abs();
        if residual < tol {
            return Ok(q);
        }
        q = (1.0 - DAMPING) * q + DAMPING * fq;
    }
    Err(residual)
}

/// Independent root of `q - E[tanh^2(beta sqrt(q) Y + h)]` on `[0, 1]`.
pub(crate) fn bisect_q2(params: &ModelParams, rule: &QuadratureRule, tol: f64) -> Result<f64> {
    let g = |q: f64| q - fixed_point_map(params, rule, q);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        // q = 0 is a root (h = 0); look for a second one away from the origin
        let probe = 1e-6;
        let gp = g(probe);
        if gp >= 0.0 {
            return Ok(lo);
        }
        lo = probe;
        glo = gp;
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo > 0.0 || ghi < 0.0 {
        return Err(Error::Numeric(format!(
            "no sign change for q2 on [0, 1]: g(0) = {glo:e}, g(1) = {ghi:e}"
        )));
    }
    let target = (0.1 * tol).max(f64::EPSILON);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= target || mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Moment table `q_0..=q_{p_max}` with `q_0 = 1` exactly.
pub fn q_table(params: &ModelParams, rule: &QuadratureRule, p_max: usize) -> Result<QTable> {
    if p_max < 4 {
        return Err(Error::invalid(format!("p_max must be >= 4, got {p_max}")));
    }
    let q2 = solve_q2(params, rule, DEFAULT_SOLVER_TOL, DEFAULT_MAX_ITER)?;
    let s = params.beta * q2.sqrt();
    let mut q = vec![0.0; p_max + 1];
    q[0] = 1.0;
    for (p, slot) in q.iter_mut().enumerate().skip(1) {
        *slot = rule.expect(|y| (s * y + params.h).tanh().powi(p as i32));
    }
    q[2] = q2;
    Ok(QTable {
        params: *params,
        q2,
        q,
        p_max,
    })
}

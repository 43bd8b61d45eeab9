//! Bound-constrained convex quadratic minimization.
//!
//! Projected Newton iteration: the binding bounds are fixed, a Newton step is
//! computed on the remaining variables with truncated conjugate gradients and
//! followed by a projected Armijo search. Falls back on a projected gradient
//! step whenever the Newton direction fails to decrease the objective.

use crate::error::{Error, Result};
use crate::fem::sparse::{dot, CsrMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxQpOptions {
    /// Absolute tolerance on the sup-norm of the projected gradient.
    pub kkt_tol: f64,
    pub max_iter: usize,
    pub cg_rel_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for BoxQpOptions {
    fn default() -> Self {
        BoxQpOptions {
            kkt_tol: 1e-10,
            max_iter: 500,
            cg_rel_tol: 1e-10,
            cg_max_iter: 5000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxQpSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub value: f64,
}

fn objective(a: &CsrMatrix, b: &[f64], x: &[f64], scratch: &mut [f64]) -> f64 {
    a.matvec(x, scratch);
    0.5 * dot(x, scratch) + dot(b, x)
}

/// Projected gradient: the gradient with components pushing against an active bound removed.
pub fn projected_gradient(g: &[f64], x: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    g.iter()
        .zip(x)
        .zip(lower.iter().zip(upper))
        .map(|((&gi, &xi), (&l, &u))| {
            if xi <= l && xi >= u {
                0.0
            } else if xi <= l {
                gi.min(0.0)
            } else if xi >= u {
                gi.max(0.0)
            } else {
                gi
            }
        })
        .collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Linear and exact objective change from `x` to `trial`, free of cancellation against `f`.
fn change(a: &CsrMatrix, g: &[f64], x: &[f64], trial: &[f64], step: &mut [f64], scratch: &mut [f64]) -> (f64, f64) {
    for i in 0..x.len() {
        step[i] = trial[i] - x[i];
    }
    a.matvec(step, scratch);
    let lin = dot(g, step);
    (lin, lin + 0.5 * dot(step, scratch))
}

/// Minimizes `½ xᵀAx + bᵀx` subject to `lower ≤ x ≤ upper`.
pub fn solve_box_qp(
    a: &CsrMatrix,
    b: &[f64],
    lower: &[f64],
    upper: &[f64],
    x0: &[f64],
    opts: &BoxQpOptions,
) -> Result<BoxQpSolution> {
    let n = a.n;
    let project = |v: f64, i: usize| v.clamp(lower[i], upper[i]);
    let mut x: Vec<f64> = (0..n).map(|i| project(x0[i], i)).collect();
    let mut scratch = vec![0.0; n];
    let mut g = vec![0.0; n];
    let diag = a.diagonal();
    let mut f = objective(a, b, &x, &mut scratch);
    for it in 0..=opts.max_iter {
        a.matvec(&x, &mut g);
        for i in 0..n {
            g[i] += b[i];
        }
        let pg = projected_gradient(&g, &x, lower, upper);
        let res = sup(&pg);
        if res <= opts.kkt_tol {
            return Ok(BoxQpSolution {
                x,
                iterations: it,
                kkt_residual: res,
                value: f,
            });
        }
        if it == opts.max_iter {
            return Err(Error::DamageNotConverged {
                iterations: it,
                kkt_residual: res,
            });
        }
        // Variables within eps of a bound the gradient pushes against are held.
        let eps = res.min(1e-3);
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lower[i] + eps && g[i] > 0.0) || (x[i] >= upper[i] - eps && g[i] < 0.0)))
            .collect();
        let mut d = reduced_newton(a, &g, &free, &diag, opts);
        for i in 0..n {
            if !free[i] && diag[i] > 0.0 {
                d[i] = -g[i] / diag[i];
            }
        }

        let mut accepted = false;
        let mut t = 1.0;
        let mut trial = vec![0.0; n];
        let mut step = vec![0.0; n];
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = project(x[i] + t * d[i], i);
            }
            let (decrease, df) = change(a, &g, &x, &trial, &mut step, &mut scratch);
            if decrease < 0.0 && df <= 1e-4 * decrease {
                x.copy_from_slice(&trial);
                f += df;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Projected steepest descent with an exact step on the unconstrained quadratic.
            let p: Vec<f64> = pg.iter().map(|v| -v).collect();
            a.matvec(&p, &mut scratch);
            let curv = dot(&p, &scratch);
            let mut t = if curv > 0.0 { -dot(&g, &p) / curv } else { 1.0 };
            for _ in 0..60 {
                for i in 0..n {
                    trial[i] = project(x[i] + t * p[i], i);
                }
                let (decrease, df) = change(a, &g, &x, &trial, &mut step, &mut scratch);
                if df <= 1e-4 * decrease && df <= 0.0 {
                    x.copy_from_slice(&trial);
                    f += df;
                    break;
                }
                t *= 0.5;
            }
        }
    }
    unreachable!()
}

/// Truncated Jacobi-PCG for `A_FF d_F = -g_F`, zero outside the free set.
fn reduced_newton(a: &CsrMatrix, g: &[f64], free: &[bool], diag: &[f64], opts: &BoxQpOptions) -> Vec<f64> {
    let n = a.n;
    let mut d = vec![0.0; n];
    let mut r: Vec<f64> = (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }).collect();
    let r0 = dot(&r, &r).sqrt();
    if r0 == 0.0 {
        return d;
    }
    let inv: Vec<f64> = (0..n)
        .map(|i| if free[i] && diag[i] > 0.0 { 1.0 / diag[i] } else { 0.0 })
        .collect();
    let mut z: Vec<f64> = (0..n).map(|i| r[i] * inv[i]).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for k in 0..opts.cg_max_iter {
        a.matvec(&p, &mut ap);
        for i in 0..n {
            if !free[i] {
                ap[i] = 0.0;
            }
        }
        let pap = dot(&p, &ap);
        if pap <= 1e-300 {
            if k == 0 {
                d.copy_from_slice(&p);
            }
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            d[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= opts.cg_rel_tol * r0 {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    d
}

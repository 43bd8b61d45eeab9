//! Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};

use super::sparse::{dot, norm2, CsrMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖r‖ / ‖b‖`.
    pub relative_residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A`, starting from zero.
pub fn solve_spd(op: &CsrMatrix, rhs: &[f64], tol: f64, max_iter: usize) -> Result<CgSolution> {
    solve_spd_from(op, rhs, vec![0.0; rhs.len()], tol, max_iter)
}

/// Same as [`solve_spd`] with an initial guess.
pub fn solve_spd_from(
    op: &CsrMatrix,
    rhs: &[f64],
    mut x: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<CgSolution> {
    let n = op.n;
    if rhs.len() != n || x.len() != n {
        return Err(Error::SingularSystem(format!(
            "dimension mismatch: operator {n}, rhs {}, guess {}",
            rhs.len(),
            x.len()
        )));
    }
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = op
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = vec![0.0; n];
    op.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = rhs[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = norm2(&r) / bnorm;
    let mut it = 0;
    while res > tol {
        if it >= max_iter {
            return Err(Error::NotConverged {
                iterations: it,
                residual: res,
            });
        }
        op.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SingularSystem(format!(
                "non-positive curvature {pap:e} at CG iteration {it}"
            )));
        }
        let a = rz / pap;
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = norm2(&r) / bnorm;
        it += 1;
    }
    Ok(CgSolution {
        x,
        iterations: it,
        relative_residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.0, -2.0, 3.5];
        let s = solve_spd(&CsrMatrix::identity(3), &b, 1e-12, 10).unwrap();
        assert_eq!(s.x, b);
        assert!(s.iterations <= 1);
    }

    /// Thomas algorithm on the tridiagonal chain as the reference.
    #[test]
    fn laplacian_chain_matches_direct_solve() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 0.01 * i as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();

        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let diag = 2.0 + 0.01 * i as f64;
            let lower = if i > 0 { -1.0 } else { 0.0 };
            let denom = diag - lower * if i > 0 { c[i - 1] } else { 0.0 };
            c[i] = -1.0 / denom;
            d[i] = (b[i] - lower * if i > 0 { d[i - 1] } else { 0.0 }) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }

        let s = solve_spd(&a, &b, 1e-12, 500).unwrap();
        let err = s.x.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err <= 1e-10 * scale, "{err}");
    }

    #[test]
    fn reports_non_convergence() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let b = vec![1.0; n];
        match solve_spd(&a, &b, 1e-14, 2) {
            Err(Error::NotConverged { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14);
            }
            other => panic!("{other:?}"),
        }
    }
}

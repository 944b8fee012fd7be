//! Solvers for symmetric (possibly indefinite) systems.
//!
//! The default is preconditioned MINRES, which handles the indefinite
//! bordered systems and stays well defined on consistent singular systems
//! (the unstabilized discretization has a kernel beyond the constants). A
//! dense LU with partial pivoting is available for small systems and reports
//! a breakdown pivot when the matrix is numerically singular.

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseSym;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    Minres { max_iterations: usize },
    DenseLu,
}

impl Default for SolverKind {
    fn default() -> Self {
        SolverKind::Minres { max_iterations: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Required relative residual `|Ax - b| / |b|`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn relative_residual(a: &SparseSym, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| q - p).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

pub fn solve(a: &SparseSym, b: &[f64], kind: SolverKind) -> Result<(Vec<f64>, SolveStats)> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!("rhs {} vs matrix {}", b.len(), a.dim())));
    }
    if norm2(b) == 0.0 {
        return Ok((
            vec![0.0; a.dim()],
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let x = match kind {
        SolverKind::DenseLu => {
            let x = dense_lu_solve(a.to_dense(), b.to_vec())?;
            (x, 0)
        }
        SolverKind::Minres { max_iterations } => {
            let m_inv = jacobi_preconditioner(a);
            minres(a, b, &m_inv, max_iterations)?
        }
    };
    let rel = relative_residual(a, &x.0, b);
    if !(rel <= RESIDUAL_TOLERANCE) {
        return Err(Error::NotConverged {
            iterations: x.1,
            residual: rel,
        });
    }
    Ok((
        x.0,
        SolveStats {
            iterations: x.1,
            relative_residual: rel,
        },
    ))
}

/// Inverse of a positive diagonal preconditioner. Rows with a zero diagonal
/// (multiplier rows of a bordered system) use the Schur-complement estimate
/// `sum_j a_ij^2 / d_j`. Tiny diagonals are floored at `1e-14` of the largest.
pub fn jacobi_preconditioner(a: &SparseSym) -> Vec<f64> {
    let diag: Vec<f64> = a.diagonal().iter().map(|d| d.abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let floor = if dmax > 0.0 { 1e-14 * dmax } else { 1.0 };
    let d: Vec<f64> = diag.iter().map(|&v| if v > 0.0 { v.max(floor) } else { 0.0 }).collect();
    (0..a.dim())
        .map(|i| {
            if d[i] > 0.0 {
                1.0 / d[i]
            } else {
                let s: f64 = a
                    .row(i)
                    .filter(|&(j, _)| d[j] > 0.0)
                    .map(|(j, v)| v * v / d[j])
                    .sum();
                if s > 0.0 {
                    1.0 / s
                } else {
                    1.0
                }
            }
        })
        .collect()
}

/// Preconditioned MINRES. The inner loop stops on the preconditioned
/// residual estimate; the true residual is then checked and the iteration
/// restarted from the current iterate if it is not yet small enough.
fn minres(a: &SparseSym, b: &[f64], m_inv: &[f64], max_iterations: usize) -> Result<(Vec<f64>, usize)> {
    let n = a.dim();
    let nb = norm2(b);
    let mut x = vec![0.0; n];
    let mut total = 0;
    let mut inner_tol = 0.1 * RESIDUAL_TOLERANCE;
    for _restart in 0..20 {
        let ax = a.matvec(&x);
        let r0: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let true_rel = norm2(&r0) / nb;
        if true_rel <= RESIDUAL_TOLERANCE {
            return Ok((x, total));
        }
        if total >= max_iterations {
            break;
        }
        let (dx, its) = minres_cycle(a, &r0, m_inv, inner_tol * nb / norm2(&r0), max_iterations - total);
        total += its;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        inner_tol *= 0.5;
    }
    Err(Error::NotConverged {
        iterations: total,
        residual: relative_residual(a, &x, b),
    })
}

/// One MINRES run from a zero initial guess for `A x = b`; returns `x` and
/// the number of iterations used.
fn minres_cycle(a: &SparseSym, b: &[f64], m_inv: &[f64], rtol: f64, max_iterations: usize) -> (Vec<f64>, usize) {
    let n = a.dim();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y: Vec<f64> = r1.iter().zip(m_inv).map(|(r, m)| r * m).collect();
    let beta1 = dot(&r1, &y).sqrt();
    if beta1 == 0.0 {
        return (x, 0);
    }
    let mut r2 = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0f64;
    let mut sn = 0.0f64;
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut ay = vec![0.0; n];

    for itn in 1..=max_iterations {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        a.matvec_into(&v, &mut ay);
        if itn >= 2 {
            let f = beta / oldb;
            for (yi, r) in ay.iter_mut().zip(&r1) {
                *yi -= f * r;
            }
        }
        let alfa = dot(&v, &ay);
        let f = alfa / beta;
        for (yi, r) in ay.iter_mut().zip(&r2) {
            *yi -= f * r;
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&ay);
        for ((yi, r), m) in y.iter_mut().zip(&r2).zip(m_inv) {
            *yi = r * m;
        }
        oldb = beta;
        let bb = dot(&r2, &y);
        beta = if bb > 0.0 { bb.sqrt() } else { 0.0 };

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let denom = 1.0 / gamma;
        for i in 0..n {
            let w1 = w2[i];
            w2[i] = w[i];
            w[i] = (v[i] - oldeps * w1 - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }

        if phibar <= rtol * beta1 || beta == 0.0 {
            return (x, itn);
        }
    }
    (x, max_iterations)
}

/// Dense LU with partial pivoting. Fails with the offending pivot when the
/// matrix is numerically singular.
pub fn dense_lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-13 * scale.max(f64::MIN_POSITIVE) * n as f64;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
            .unwrap();
        if a[p][k].abs() <= tol {
            return Err(Error::Singular {
                column: k,
                pivot: a[p][k],
            });
        }
        a.swap(k, p);
        b.swap(k, p);
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for (off, row) in bottom.iter_mut().enumerate() {
            let f = row[k] / pivot_row[k];
            if f != 0.0 {
                for j in k..n {
                    row[j] -= f * pivot_row[j];
                }
                b[k + 1 + off] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x)
}

//! Symmetric eigenvalues and the condition-number policy.

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseSym;

/// Largest size for which the full spectrum is computed densely.
pub const DENSE_LIMIT: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenMode {
    /// Full spectrum via dense tridiagonal reduction.
    All,
    /// Extreme part of the spectrum via Lanczos with full reorthogonalization.
    Extremal { max_steps: usize },
    /// `All` up to [`DENSE_LIMIT`], `Extremal` above.
    Auto,
}

/// Ascending eigenvalues of a symmetric matrix.
///
/// In extremal mode only converged Ritz values are returned: the largest
/// one and everything from the bottom of the spectrum up to and including the
/// first eigenvalue above the positivity threshold.
pub fn eigenvalues_sym(a: &SparseSym, mode: EigenMode) -> Result<Vec<f64>> {
    let asym = a.asymmetry();
    if asym > 1e-12 * a.max_norm() {
        return Err(Error::Asymmetric(asym));
    }
    let mode = match mode {
        EigenMode::Auto if a.dim() <= DENSE_LIMIT => EigenMode::All,
        EigenMode::Auto => EigenMode::Extremal {
            max_steps: a.dim().min(3000),
        },
        m => m,
    };
    match mode {
        EigenMode::All => dense_eigenvalues(&a.to_dense()),
        EigenMode::Extremal { max_steps } => lanczos_extremal(a, max_steps),
        EigenMode::Auto => unreachable!(),
    }
}

/// Ascending eigenvalues of a dense symmetric matrix (lower triangle read).
pub fn dense_eigenvalues(a: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = a.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i][j]);
    let mut ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(ev)
}

/// Relative threshold below which an eigenvalue counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;

fn lanczos_extremal(a: &SparseSym, max_steps: usize) -> Result<Vec<f64>> {
    let n = a.dim();
    let max_steps = max_steps.min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nq = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.iter_mut().for_each(|v| *v /= nq);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let check_every = 25;

    loop {
        let k = basis.len() - 1;
        let mut w = a.matvec(&basis[k]);
        let alpha: f64 = w.iter().zip(&basis[k]).map(|(x, y)| x * y).sum();
        alphas.push(alpha);
        // full reorthogonalization, applied twice
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let m = alphas.len();
        let exhausted = m == max_steps || beta <= 1e-14 * alphas.iter().fold(0.0f64, |s, x| s.max(x.abs()));

        if exhausted || m.is_multiple_of(check_every) {
            let tri = Mat::<f64>::from_fn(m, m, |i, j| {
                if i == j {
                    alphas[i]
                } else if i == j + 1 {
                    betas[j]
                } else if j == i + 1 {
                    betas[i]
                } else {
                    0.0
                }
            });
            let eig = tri
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| eig.S()[i].partial_cmp(&eig.S()[j]).unwrap());
            let theta: Vec<f64> = order.iter().map(|&i| eig.S()[i]).collect();
            let bound: Vec<f64> = order.iter().map(|&i| (beta * eig.U()[(m - 1, i)]).abs()).collect();
            let top = theta.iter().fold(0.0f64, |s, x| s.max(x.abs()));
            let tol = ZERO_THRESHOLD * top;
            let converged = |i: usize| exhausted || bound[i] <= tol;

            // theta is ascending
            let first_pos = theta.iter().position(|&t| t > tol);
            if let Some(p) = first_pos {
                if converged(m - 1) && (0..=p).all(converged) {
                    let mut out: Vec<f64> = theta[..=p].to_vec();
                    if p < m - 1 {
                        out.push(theta[m - 1]);
                    }
                    return Ok(out);
                }
            }
            if exhausted {
                return Err(Error::Eigensolver(format!(
                    "Lanczos did not converge in {m} steps"
                )));
            }
        }
        betas.push(beta);
        w.iter_mut().for_each(|v| *v /= beta);
        basis.push(w);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionNumber {
    pub kappa: f64,
    pub lambda_max: f64,
    pub lambda_min_positive: f64,
    /// Eigenvalues below `-threshold`.
    pub n_negative: usize,
    /// Eigenvalues within `[-threshold, threshold]`.
    pub n_zero: usize,
    pub threshold: f64,
}

/// Largest eigenvalue over the first eigenvalue above `1e-10 lambda_max`.
pub fn condition_number(eigs: &[f64]) -> Result<ConditionNumber> {
    let lambda_max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = ZERO_THRESHOLD * lambda_max.max(0.0);
    let lambda_min_positive = eigs
        .iter()
        .cloned()
        .filter(|&l| l > threshold)
        .fold(f64::INFINITY, f64::min);
    if !lambda_min_positive.is_finite() || lambda_max <= 0.0 {
        return Err(Error::NoPositiveEigenvalue(threshold));
    }
    Ok(ConditionNumber {
        kappa: lambda_max / lambda_min_positive,
        lambda_max,
        lambda_min_positive,
        n_negative: eigs.iter().filter(|&&l| l < -threshold).count(),
        n_zero: eigs.iter().filter(|&&l| l.abs() <= threshold).count(),
        threshold,
    })
}

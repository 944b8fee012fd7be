//! Error norms, convergence rates and empirical constants of the discrete
//! inequalities behind the conditioning estimate.

use faer::{Mat, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::assembly;
use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::linalg::eigen::DENSE_LIMIT;
use crate::problem::Discretization;

/// Value of the discrete function `coeffs` at `x` inside cell `owner`.
fn evaluate(disc: &Discretization, coeffs: &[f64], owner: usize, x: Point) -> f64 {
    let dim = disc.mesh.dim();
    let verts = disc.mesh.cell_vertices(owner);
    let grads = geom::p1_gradients(&verts, dim);
    let lam = geom::barycentric(&grads, verts[0], x, dim);
    disc.mesh
        .cell(owner)
        .iter()
        .enumerate()
        .map(|(a, &v)| lam[a] * coeffs[disc.dofs.dof(v).expect("active node")])
        .sum()
}

fn gradient(disc: &Discretization, coeffs: &[f64], owner: usize) -> Point {
    let verts = disc.mesh.cell_vertices(owner);
    let grads = geom::p1_gradients(&verts, disc.mesh.dim());
    disc.mesh
        .cell(owner)
        .iter()
        .enumerate()
        .fold([0.0; 3], |acc, (a, &v)| {
            geom::add(acc, geom::scale(grads[a], coeffs[disc.dofs.dof(v).expect("active node")]))
        })
}

fn error_samples<F>(disc: &Discretization, coeffs: &[f64], exact: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(Point) -> f64,
{
    let mut samples = Vec::new();
    for tri in &disc.cut.triangles {
        for (x, w) in tri.quadrature() {
            let ue = disc.surface.extend(&exact, x)?;
            samples.push((evaluate(disc, coeffs, tri.owner, x) - ue, w));
        }
    }
    Ok(samples)
}

/// `|| u_h - u^e ||` on the discrete surface without mean alignment.
pub fn l2_error_unaligned<F>(disc: &Discretization, coeffs: &[f64], exact: F) -> Result<f64>
where
    F: Fn(Point) -> f64,
{
    let samples = error_samples(disc, coeffs, exact)?;
    Ok(samples.iter().map(|(e, w)| w * e * e).sum::<f64>().sqrt())
}

/// `|| u_h - u^e ||` on the discrete surface, after removing the surface mean
/// of the difference.
pub fn l2_error<F>(disc: &Discretization, coeffs: &[f64], exact: F) -> Result<f64>
where
    F: Fn(Point) -> f64,
{
    let samples = error_samples(disc, coeffs, exact)?;
    let area: f64 = samples.iter().map(|s| s.1).sum();
    if area == 0.0 {
        return Ok(0.0);
    }
    let mean = samples.iter().map(|(e, w)| e * w).sum::<f64>() / area;
    Ok(samples.iter().map(|(e, w)| w * (e - mean) * (e - mean)).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyError {
    /// `|| P_h grad u_h - (grad_S u) o p ||` on the discrete surface.
    pub surface: f64,
    /// `sqrt(j_h(e, e))` for `e = u_h - I_h u^e`, with unit penalty parameter
    /// scaled by `tau0`.
    pub faces: f64,
}

pub fn energy_error<F, G>(disc: &Discretization, coeffs: &[f64], exact: F, tangential_gradient: G, tau0: f64) -> Result<EnergyError>
where
    F: Fn(Point) -> f64,
    G: Fn(Point) -> Point,
{
    let mut sum = 0.0;
    for tri in &disc.cut.triangles {
        let g = assembly::tangential_project(gradient(disc, coeffs, tri.owner), tri.normal)?;
        for (x, w) in tri.quadrature() {
            let d = geom::sub(g, tangential_gradient(disc.surface.closest_point(x)?));
            sum += w * geom::dot(d, d);
        }
    }
    let interp = disc.interpolate_extension(exact)?;
    let e: Vec<f64> = coeffs.iter().zip(&interp).map(|(a, b)| a - b).collect();
    let faces = (tau0 * disc.stabilization.quad_form(&e)).max(0.0).sqrt();
    Ok(EnergyError {
        surface: sum.sqrt(),
        faces,
    })
}

/// Observed orders `R_k = ln(q_k / q_{k-1}) / ln(h_k / h_{k-1})` with
/// `h ~ N^{-1/2}`. Errors give positive rates, growing condition numbers
/// negative ones.
pub fn rate(levels: &[(usize, f64)]) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(Error::InvalidRates("at least two levels required".into()));
    }
    if levels.iter().any(|&(n, q)| n == 0 || !(q > 0.0)) {
        return Err(Error::InvalidRates("dof counts and values must be positive".into()));
    }
    if levels.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidRates("dof counts must increase".into()));
    }
    Ok(levels
        .windows(2)
        .map(|w| {
            let (n0, q0) = w[0];
            let (n1, q1) = w[1];
            (q1 / q0).ln() / (-0.5 * (n1 as f64 / n0 as f64).ln())
        })
        .collect())
}

/// Same as [`rate`] but with the mesh parameter given directly.
pub fn rate_in_h(levels: &[(f64, f64)]) -> Result<Vec<f64>> {
    if levels.len() < 2 || levels.iter().any(|&(h, q)| !(h > 0.0 && q > 0.0)) {
        return Err(Error::InvalidRates("need two or more positive (h, q) pairs".into()));
    }
    Ok(levels
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalConstants {
    /// max `||v||_{Omega_h} / (h^{1/2} |||v|||_h)`.
    pub poincare: f64,
    /// max `|||v|||_h / (h^{-3/2} ||v||_{Omega_h})`.
    pub inverse: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Default number of random samples for [`functional_constants`].
pub const DEFAULT_SAMPLES: usize = 200;

/// Empirical constants over random zero-mean discrete functions with
/// standard normal nodal values.
pub fn functional_constants(disc: &Discretization, tau0: f64, samples: usize, seed: u64) -> Result<FunctionalConstants> {
    if samples == 0 {
        return Err(Error::Config("at least one sample required".into()));
    }
    if !(tau0 > 0.0) {
        return Err(Error::NegativeTau(tau0));
    }
    let mass = assembly::assemble_mass(&disc.mesh, &disc.cut.active_cells, &disc.dofs);
    let energy = disc.stiffness.add_scaled(&disc.stabilization, tau0)?;
    let c = &disc.constraint;
    let c_sum: f64 = c.iter().sum();
    let h = disc.h();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut poincare = 0.0f64;
    let mut inverse = 0.0f64;
    for _ in 0..samples {
        let mut v: Vec<f64> = (0..disc.n_dofs()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let shift = v.iter().zip(c).map(|(a, b)| a * b).sum::<f64>() / c_sum;
        v.iter_mut().for_each(|x| *x -= shift);
        let l2 = mass.quad_form(&v).sqrt();
        let triple = energy.quad_form(&v).max(0.0).sqrt();
        poincare = poincare.max(l2 / (h.sqrt() * triple));
        inverse = inverse.max(triple / (h.powf(-1.5) * l2));
    }
    Ok(FunctionalConstants {
        poincare,
        inverse,
        samples,
        seed,
    })
}

/// Exact suprema of the two ratios from the generalized eigenproblem
/// `E v = lambda M v`, with the Poincare ratio taken over the mass-orthogonal
/// complement of constants. Dense, so limited to [`DENSE_LIMIT`] dofs.
pub fn sharp_functional_constants(disc: &Discretization, tau0: f64) -> Result<(f64, f64)> {
    if !(tau0 > 0.0) {
        return Err(Error::NegativeTau(tau0));
    }
    let n = disc.n_dofs();
    if !(2..=DENSE_LIMIT).contains(&n) {
        return Err(Error::Config(format!("{n} dofs outside the dense range")));
    }
    let mass = assembly::assemble_mass(&disc.mesh, &disc.cut.active_cells, &disc.dofs).to_dense();
    let energy = disc.stiffness.add_scaled(&disc.stabilization, tau0)?.to_dense();
    let m = Mat::<f64>::from_fn(n, n, |i, j| mass[i][j]);
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    // M^{-1/2} = U S^{-1/2} U^T; the congruence with U S^{-1/2} has the same spectrum
    let w = Mat::<f64>::from_fn(n, n, |i, j| eig.U()[(i, j)] / eig.S()[j].sqrt());
    let e = Mat::<f64>::from_fn(n, n, |i, j| energy[i][j]);
    let b = w.transpose() * &e * &w;
    let b = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (b[(i, j)] + b[(j, i)]));
    let mut ev = b
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let h = disc.h();
    Ok((1.0 / (ev[1].sqrt() * h.sqrt()), ev[n - 1].sqrt() * h.powf(1.5)))
}

/// Published reference columns used to check the rate formula.
pub mod published {
    /// Dof counts of the published sphere study.
    pub const DOFS: [usize; 4] = [406, 1513, 6013, 24071];
    /// L2 errors for stabilization parameter 0.1.
    pub const L2_ERRORS_TAU_0_1: [f64; 4] = [0.0052, 0.0017, 0.0004, 0.0001];
    /// Published rates for the column above.
    pub const L2_RATES_TAU_0_1: [f64; 3] = [1.70, 1.93, 1.97];
    /// Condition numbers (times 1e-4) for stabilization parameter 1.
    pub const KAPPA_TAU_1: [f64; 4] = [0.5383, 1.3350, 5.5484, 22.359];
    pub const KAPPA_RATES_TAU_1: [f64; 3] = [-1.38, -2.06, -2.01];

    pub fn pairs(values: &[f64; 4]) -> Vec<(usize, f64)> {
        DOFS.iter().copied().zip(values.iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::AnalyticSurface;
    use crate::mesh::BoxDomain;
    use crate::problem::sphere_benchmark as sb;

    #[test]
    fn rate_examples() {
        let r = rate(&[(406, 0.0052), (1513, 0.0017)]).unwrap();
        assert!((r[0] - 1.70).abs() < 0.005, "{r:?}");
        let r = rate(&[(406, 0.5383), (1513, 1.3350)]).unwrap();
        assert!((r[0] + 1.38).abs() < 0.005, "{r:?}");
        let r = rate(&[(100, 1.0), (400, 0.5)]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-14);
        let r = rate_in_h(&[(0.1, 1.0), (0.05, 0.25)]).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rate_rejects_bad_input() {
        assert!(rate(&[(10, 1.0)]).is_err());
        assert!(rate(&[(10, 1.0), (5, 0.5)]).is_err());
        assert!(rate(&[(10, 1.0), (20, 0.0)]).is_err());
    }

    #[test]
    fn published_rates_are_reproduced() {
        // the published kappa column is rounded to four digits, so compare
        // with +-0.01; the coarse L2 errors carry a single digit, only the
        // first rate is informative
        let r = rate(&published::pairs(&published::KAPPA_TAU_1)).unwrap();
        for (a, b) in r.iter().zip(published::KAPPA_RATES_TAU_1) {
            assert!((a - b).abs() <= 0.01, "{a} vs {b}");
        }
        let r = rate(&published::pairs(&published::L2_ERRORS_TAU_0_1)).unwrap();
        assert!((r[0] - published::L2_RATES_TAU_0_1[0]).abs() <= 0.01);
    }

    fn coarse_sphere() -> Discretization {
        Discretization::new(sb::surface(), &BoxDomain::unit(), 6).unwrap()
    }

    #[test]
    fn errors_of_exact_constants_vanish() {
        let d = coarse_sphere();
        let u = vec![2.5; d.n_dofs()];
        assert!(l2_error(&d, &u, |_| 2.5).unwrap() < 1e-12);
        // mean alignment absorbs constant offsets
        assert!(l2_error(&d, &u, |_| -1.0).unwrap() < 1e-12);
        let e = energy_error(&d, &u, |_| 2.5, |_| [0.0; 3], 0.1).unwrap();
        assert!(e.surface < 1e-12 && e.faces < 1e-12);
    }

    #[test]
    fn unaligned_error_of_zero_against_one_is_sqrt_area() {
        let d = coarse_sphere();
        let zero = vec![0.0; d.n_dofs()];
        let e = l2_error_unaligned(&d, &zero, |_| 1.0).unwrap();
        assert!((e - d.cut.total_area.sqrt()).abs() < 1e-12);
        assert!(l2_error(&d, &zero, |_| 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn aligned_error_of_zero_solution() {
        let d = coarse_sphere();
        let zero = vec![0.0; d.n_dofs()];
        let e = l2_error(&d, &zero, sb::exact).unwrap();
        let mut direct = 0.0;
        let mut mean = 0.0;
        let mut area = 0.0;
        for t in &d.cut.triangles {
            for (x, w) in t.quadrature() {
                let u = sb::exact(d.surface.closest_point(x).unwrap());
                direct += w * u * u;
                mean += w * u;
                area += w;
            }
        }
        let expected = (direct - mean * mean / area).sqrt();
        assert!((e - expected).abs() < 1e-14);
    }

    #[test]
    fn l2_error_is_invariant_under_constant_shifts() {
        let d = coarse_sphere();
        let u: Vec<f64> = (0..d.n_dofs()).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = l2_error(&d, &u, sb::exact).unwrap();
        let b = l2_error(&d, &u, |x| sb::exact(x) + 3.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn energy_error_of_zero_matches_monte_carlo() {
        let d = Discretization::new(sb::surface(), &BoxDomain::unit(), 16).unwrap();
        let zero = vec![0.0; d.n_dofs()];
        let e = energy_error(&d, &zero, sb::exact, sb::tangential_gradient, 0.1).unwrap();
        // Monte Carlo over the exact sphere with uniformly distributed points
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = 400_000;
        let mut acc = 0.0;
        for _ in 0..m {
            let g: Point = [
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            ];
            let x = geom::add([0.5; 3], geom::scale(g, 0.5 / geom::norm(g)));
            let t = sb::tangential_gradient(x);
            acc += geom::dot(t, t);
        }
        let integral = acc / m as f64 * std::f64::consts::PI;
        let mc = integral.sqrt();
        assert!(((e.surface - mc) / mc).abs() < 0.02, "{} vs {mc}", e.surface);
        assert!(e.faces >= 0.0);
    }

    #[test]
    fn two_triangle_constants_match_hand_assembly() {
        // unit square split into two triangles, circle cutting both cells
        let s = AnalyticSurface::circle([0.0, 0.0], 0.8);
        let d = Discretization::new(s, &BoxDomain::unit(), 1).unwrap();
        assert_eq!(d.n_dofs(), 4);
        let fc = functional_constants(&d, 1.0, 1, 9).unwrap();

        // replay the single sample by hand
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut v: Vec<f64> = (0..4).map(|_| StandardNormal.sample(&mut rng)).collect();
        let c = &d.constraint;
        let shift = v.iter().zip(c).map(|(a, b)| a * b).sum::<f64>() / c.iter().sum::<f64>();
        v.iter_mut().for_each(|x| *x -= shift);
        // mass over both cells: each has area 1/2, entries area/12 (1 + delta)
        let mut l2sq = 0.0;
        for c in 0..2 {
            let cell = d.mesh.cell(c);
            for a in 0..3 {
                for b in 0..3 {
                    let m = if a == b { 1.0 / 12.0 } else { 1.0 / 24.0 };
                    l2sq += m * v[cell[a]] * v[cell[b]];
                }
            }
        }
        // tangential energy: each segment contributes length |P grad v|^2
        let mut a_h = 0.0;
        for t in &d.cut.triangles {
            let verts = d.mesh.cell_vertices(t.owner);
            let g = geom::p1_gradients(&verts, 2);
            let cell = d.mesh.cell(t.owner);
            let grad = (0..3).fold([0.0; 3], |acc, a| geom::add(acc, geom::scale(g[a], v[cell[a]])));
            let p = geom::sub(grad, geom::scale(t.normal, geom::dot(t.normal, grad)));
            a_h += t.area * geom::dot(p, p);
        }
        // jump across the diagonal: gradients of the two cells
        let grad_of = |c: usize| {
            let verts = d.mesh.cell_vertices(c);
            let g = geom::p1_gradients(&verts, 2);
            let cell = d.mesh.cell(c);
            (0..3).fold([0.0; 3], |acc, a| geom::add(acc, geom::scale(g[a], v[cell[a]])))
        };
        let n = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
        let jump = geom::dot(n, geom::sub(grad_of(0), grad_of(1)));
        let j_h = 2f64.sqrt() * jump * jump;
        let triple = (a_h + j_h).sqrt();
        let l2 = l2sq.sqrt();
        assert!((fc.poincare - l2 / triple).abs() < 1e-12 * fc.poincare);
        assert!((fc.inverse - triple / l2).abs() < 1e-12 * fc.inverse);
    }
}

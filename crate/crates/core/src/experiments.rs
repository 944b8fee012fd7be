//! Drivers for the convergence, conditioning and translated-circle studies.
//! Every driver returns a [`Report`] whose CSV rendering is byte-stable for
//! a given configuration when `deterministic` is set.

use std::fmt::Write as _;
use std::time::Instant;

use crate::analysis;
use crate::assembly::diagonal_scaling;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::levelset::AnalyticSurface;
use crate::linalg::{condition_number, eigenvalues_sym, ConditionNumber, EigenMode, SolverKind};
use crate::mesh::{BackgroundMesh, BoxDomain};
use crate::problem::{sphere_benchmark, Discretization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Converge,
    Condition,
    Sweep,
    /// Rate formula applied to the published reference columns.
    Rates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    pub center: Point,
    pub radius: f64,
    pub levels: Vec<usize>,
    pub tau0: Vec<f64>,
    pub precond: bool,
    pub sweep_delta: f64,
    pub sweep_step: f64,
    pub sweep_cells: usize,
    pub seed: u64,
    pub deterministic: bool,
}

pub const DEFAULT_CONVERGE_LEVELS: [usize; 4] = [8, 16, 32, 48];
pub const DEFAULT_CONDITION_LEVELS: [usize; 3] = [8, 12, 16];
pub const DEFAULT_TAUS: [f64; 4] = [0.0, 0.01, 0.1, 1.0];
pub const DEFAULT_SWEEP_TAUS: [f64; 2] = [0.0, 0.1];

impl ExperimentConfig {
    /// Defaults for each study: the unit-cube sphere benchmark in 3D, and a
    /// circle of radius 0.3 on a 32x32 unit-square mesh for the sweep.
    pub fn defaults(experiment: Experiment) -> Self {
        let (dim, center, radius, levels, tau0) = match experiment {
            Experiment::Sweep => (2, [0.5, 0.5, 0.0], 0.3, vec![32], DEFAULT_SWEEP_TAUS.to_vec()),
            Experiment::Condition => (3, [0.5; 3], 0.5, DEFAULT_CONDITION_LEVELS.to_vec(), vec![0.0, 0.01, 1.0]),
            _ => (3, [0.5; 3], 0.5, DEFAULT_CONVERGE_LEVELS.to_vec(), DEFAULT_TAUS.to_vec()),
        };
        Self {
            experiment,
            dim,
            center,
            radius,
            levels,
            tau0,
            precond: experiment == Experiment::Condition,
            sweep_delta: 0.1,
            sweep_step: 0.01,
            sweep_cells: 32,
            seed: 0,
            deterministic: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[1] <= w[0]) || self.levels[0] == 0 {
            return Err(Error::Config("levels must be positive and strictly increasing".into()));
        }
        if self.tau0.is_empty() || self.tau0.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::Config("tau0 values must be non-negative".into()));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Config("radius must be positive".into()));
        }
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::Config(format!("dimension {} not supported", self.dim)));
        }
        if self.experiment == Experiment::Sweep && !(self.sweep_step > 0.0 && self.sweep_delta >= 0.0) {
            return Err(Error::Config("sweep step must be positive".into()));
        }
        Ok(())
    }

    fn surface(&self) -> AnalyticSurface {
        if self.dim == 2 {
            AnalyticSurface::circle([self.center[0], self.center[1]], self.radius)
        } else {
            AnalyticSurface::sphere(self.center, self.radius)
        }
    }

    fn sorted_taus(&self) -> Vec<f64> {
        let mut t = self.tau0.clone();
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t.dedup();
        t
    }
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// 12 significant digits; non-finite values as `inf`/`nan`.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            debug_assert_eq!(r.len(), self.header.len());
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    /// Rows whose `name` column equals `value`.
    pub fn select<'a>(&'a self, name: &str, value: &'a str) -> impl Iterator<Item = &'a Vec<String>> + 'a {
        let c = self.column(name).expect("unknown column");
        self.rows.iter().filter(move |r| r[c] == value)
    }

    pub fn get(&self, row: &[String], name: &str) -> f64 {
        row[self.column(name).expect("unknown column")].parse().unwrap_or(f64::NAN)
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    match config.experiment {
        Experiment::Converge => run_converge(config),
        Experiment::Condition => run_condition(config),
        Experiment::Sweep => run_sweep(config),
        Experiment::Rates => Ok(run_rates()),
    }
}

/// Deterministic runs pin dense linear algebra to a single thread.
fn pin_threads(config: &ExperimentConfig) {
    if config.deterministic {
        faer::set_global_parallelism(faer::Par::Seq);
    }
}

fn elapsed_ms(start: Instant, deterministic: bool) -> f64 {
    if deterministic {
        0.0
    } else {
        start.elapsed().as_secs_f64() * 1e3
    }
}

pub const CONVERGE_HEADER: [&str; 12] = [
    "tau0", "level", "N", "h", "e_h", "R", "energy_err", "energy_faces", "max_rho", "max_angle", "wall_ms", "status",
];

/// Sphere benchmark: solve at every level and stabilization parameter and
/// record errors, rates and geometric quality.
pub fn run_converge(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    pin_threads(config);
    if config.dim != 3 {
        return Err(Error::Config("the convergence study runs on the 3D sphere".into()));
    }
    let surface = config.surface();
    let taus = config.sorted_taus();
    let mut rows = Vec::new();
    // previous (N, e_h) per tau, for the rate column
    let mut previous: Vec<Option<(usize, f64)>> = vec![None; taus.len()];
    for &level in &config.levels {
        let start = Instant::now();
        let disc = Discretization::new(surface, &BoxDomain::unit(), level)?;
        let setup_ms = elapsed_ms(start, config.deterministic);
        if disc.cut.is_empty() {
            for &tau in &taus {
                rows.push((tau, level, empty_converge_row(tau, level, &disc)));
            }
            continue;
        }
        let geometry = disc.geometry()?;
        let load = disc.load(sphere_benchmark::load)?;
        for (k, &tau) in taus.iter().enumerate() {
            let start = Instant::now();
            let solved = disc.system(tau, &load).and_then(|s| s.solve(SolverKind::default()));
            let mut row = vec![
                fmt_float(tau),
                level.to_string(),
                disc.n_dofs().to_string(),
                fmt_float(disc.h()),
            ];
            match solved {
                Ok(sol) => {
                    let e = analysis::l2_error(&disc, &sol.coefficients, sphere_benchmark::exact)?;
                    let en = analysis::energy_error(
                        &disc,
                        &sol.coefficients,
                        sphere_benchmark::exact,
                        sphere_benchmark::tangential_gradient,
                        tau,
                    )?;
                    let r = previous[k]
                        .and_then(|p| analysis::rate(&[p, (disc.n_dofs(), e)]).ok())
                        .map(|r| r[0]);
                    previous[k] = Some((disc.n_dofs(), e));
                    row.extend([
                        fmt_float(e),
                        fmt_opt(r),
                        fmt_float(en.surface),
                        fmt_float(en.faces),
                    ]);
                    row.extend([
                        fmt_float(geometry.max_distance),
                        fmt_float(geometry.max_normal_angle),
                        fmt_float(setup_ms + elapsed_ms(start, config.deterministic)),
                        "ok".into(),
                    ]);
                }
                Err(err) => {
                    previous[k] = None;
                    row.extend([String::new(), String::new(), String::new(), String::new()]);
                    row.extend([
                        fmt_float(geometry.max_distance),
                        fmt_float(geometry.max_normal_angle),
                        fmt_float(setup_ms + elapsed_ms(start, config.deterministic)),
                        status_of(&err),
                    ]);
                }
            }
            rows.push((tau, level, row));
        }
    }
    Ok(sorted_report(CONVERGE_HEADER.to_vec(), rows))
}

fn empty_converge_row(tau: f64, level: usize, disc: &Discretization) -> Vec<String> {
    let mut row = vec![fmt_float(tau), level.to_string(), "0".into(), fmt_float(disc.h())];
    row.extend(std::iter::repeat_n(String::new(), 7));
    row.push("empty_cut".into());
    row
}

fn status_of(err: &Error) -> String {
    let kind = match err {
        Error::Singular { .. } => "singular",
        Error::NotConverged { .. } => "not_converged",
        Error::NoPositiveEigenvalue(_) => "singular",
        _ => "failed",
    };
    kind.to_string()
}

fn sorted_report(header: Vec<&'static str>, mut rows: Vec<(f64, usize, Vec<String>)>) -> Report {
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Report {
        header,
        rows: rows.into_iter().map(|r| r.2).collect(),
    }
}

pub const CONDITION_HEADER: [&str; 9] = ["tau0", "precond", "level", "N", "kappa", "R", "n_neg", "n_zero", "status"];

/// Condition number of a bordered system under the first-positive-eigenvalue
/// policy.
pub fn system_condition(disc: &Discretization, tau0: f64, scaled: bool) -> Result<ConditionNumber> {
    let mut sys = disc.operator(tau0)?;
    if scaled {
        sys = diagonal_scaling(&sys)?;
    }
    let eigs = eigenvalues_sym(&sys.matrix, EigenMode::Auto)?;
    condition_number(&eigs)
}

/// Spectral study of the bordered system for every level, parameter and
/// (optionally) diagonal scaling.
pub fn run_condition(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    pin_threads(config);
    let surface = config.surface();
    let taus = config.sorted_taus();
    let variants: &[bool] = if config.precond { &[false, true] } else { &[false] };
    let mut rows = Vec::new();
    let mut previous: Vec<Option<(usize, f64)>> = vec![None; taus.len() * 2];
    for &level in &config.levels {
        let disc = Discretization::new(surface, &BoxDomain::unit(), level)?;
        for (k, &tau) in taus.iter().enumerate() {
            for &scaled in variants {
                let slot = 2 * k + scaled as usize;
                let mut row = vec![
                    fmt_float(tau),
                    if scaled { "diag" } else { "none" }.to_string(),
                    level.to_string(),
                    disc.n_dofs().to_string(),
                ];
                if disc.cut.is_empty() {
                    row.extend(["".into(), "".into(), "".into(), "".into(), "empty_cut".into()]);
                } else {
                    match system_condition(&disc, tau, scaled) {
                        Ok(c) => {
                            let r = previous[slot]
                                .and_then(|p| analysis::rate(&[p, (disc.n_dofs(), c.kappa)]).ok())
                                .map(|r| r[0]);
                            previous[slot] = Some((disc.n_dofs(), c.kappa));
                            row.extend([
                                fmt_float(c.kappa),
                                fmt_opt(r),
                                c.n_negative.to_string(),
                                c.n_zero.to_string(),
                                "ok".into(),
                            ]);
                        }
                        Err(e) => {
                            previous[slot] = None;
                            row.extend(["inf".into(), "".into(), "".into(), "".into(), status_of(&e)]);
                        }
                    }
                }
                // scaled rows sort after raw rows of the same tau and level
                rows.push((tau, 2 * level + scaled as usize, row));
            }
        }
    }
    Ok(sorted_report(CONDITION_HEADER.to_vec(), rows))
}

pub const SWEEP_HEADER: [&str; 5] = ["delta", "tau0", "N", "kappa", "n_zero"];

/// Translates the circle to the left in steps of `sweep_step` up to
/// `sweep_delta` on a fixed mesh and records the condition number for every
/// parameter. A final row per parameter holds the ratio max/min of kappa
/// (`delta = summary`).
pub fn run_sweep(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    pin_threads(config);
    if config.dim != 2 {
        return Err(Error::Config("the sweep runs on the 2D circle".into()));
    }
    let mesh = BackgroundMesh::build(&BoxDomain::unit(), config.sweep_cells, 2)?;
    let taus = config.sorted_taus();
    let steps = (config.sweep_delta / config.sweep_step).round() as usize;
    let mut rows = Vec::new();
    let mut kappas: Vec<Vec<f64>> = vec![Vec::new(); taus.len()];
    let mut zeros: Vec<usize> = vec![0; taus.len()];
    for s in 0..=steps {
        let delta = s as f64 * config.sweep_step;
        let surface = AnalyticSurface::circle([config.center[0] - delta, config.center[1]], config.radius);
        let disc = Discretization::on_mesh(surface, mesh.clone())?;
        for (k, &tau) in taus.iter().enumerate() {
            let (kappa, nz) = match system_condition(&disc, tau, false) {
                Ok(c) => (c.kappa, c.n_zero.to_string()),
                Err(Error::NoPositiveEigenvalue(_)) => (f64::INFINITY, String::new()),
                Err(e) => return Err(e),
            };
            kappas[k].push(kappa);
            zeros[k] = zeros[k].max(nz.parse().unwrap_or(0));
            let kappa_field = if kappa.is_finite() { fmt_float(kappa) } else { "singular".into() };
            rows.push((tau, s, vec![fmt_float(delta), fmt_float(tau), disc.n_dofs().to_string(), kappa_field, nz]));
        }
    }
    for (k, &tau) in taus.iter().enumerate() {
        rows.push((
            tau,
            usize::MAX,
            vec![
                "summary".into(),
                fmt_float(tau),
                String::new(),
                fmt_float(variation(&kappas[k])),
                zeros[k].to_string(),
            ],
        ));
    }
    Ok(sorted_report(SWEEP_HEADER.to_vec(), rows))
}

/// `max / min`; infinite if any entry is.
pub fn variation(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

pub const RATES_HEADER: [&str; 5] = ["column", "N", "value", "R", "published_R"];

/// The rate formula applied to published reference columns.
pub fn run_rates() -> Report {
    use analysis::published as p;
    let mut rows = Vec::new();
    for (name, values, rates) in [
        ("e_h_tau0=0.1", p::L2_ERRORS_TAU_0_1, p::L2_RATES_TAU_0_1),
        ("kappa_tau0=1", p::KAPPA_TAU_1, p::KAPPA_RATES_TAU_1),
    ] {
        let computed = analysis::rate(&p::pairs(&values)).expect("valid reference data");
        for k in 0..4 {
            rows.push(vec![
                name.to_string(),
                p::DOFS[k].to_string(),
                format!("{}", values[k]),
                if k == 0 { String::new() } else { format!("{:.2}", computed[k - 1]) },
                if k == 0 { String::new() } else { format!("{:.2}", rates[k - 1]) },
            ]);
        }
    }
    Report {
        header: RATES_HEADER.to_vec(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_twelve_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::defaults(Experiment::Converge);
        assert!(c.validate().is_ok());
        c.levels = vec![8, 8];
        assert!(c.validate().is_err());
        c.levels = vec![4];
        c.tau0 = vec![-0.1];
        assert!(c.validate().is_err());
    }

    #[test]
    fn rates_selftest_prints_published_values() {
        let r = run_rates();
        let row = &r.rows[1];
        assert_eq!(row[3], "1.70");
        let row = &r.rows[5];
        assert_eq!(row[3], "-1.38");
    }

    #[test]
    fn converge_row_count_and_empty_cut() {
        let mut c = ExperimentConfig::defaults(Experiment::Converge);
        c.levels = vec![3, 4];
        let r = run_converge(&c).unwrap();
        assert_eq!(r.rows.len(), 8);
        assert!(r.rows.iter().all(|row| row.len() == CONVERGE_HEADER.len()));

        c.center = [5.0; 3];
        let r = run_converge(&c).unwrap();
        assert!(r.rows.iter().all(|row| row.last().unwrap() == "empty_cut"));
    }
}

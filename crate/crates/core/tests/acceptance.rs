//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status if
//! any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cutfem::analysis::{self, published};
use cutfem::assembly::{assemble_stabilization, diagonal_scaling};
use cutfem::experiments::{self, Experiment, ExperimentConfig, Report};
use cutfem::geom;
use cutfem::levelset::AnalyticSurface;
use cutfem::linalg::{condition_number, eigenvalues_sym, EigenMode, SolverKind};
use cutfem::mesh::BoxDomain;
use cutfem::problem::{sphere_benchmark as sb, Discretization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const CONVERGE_LEVELS: [usize; 4] = [8, 16, 32, 48];
/// Three levels whose bordered systems stay below 4000 unknowns.
const SPECTRAL_LEVELS: [usize; 3] = [8, 12, 16];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn column(report: &Report, tau: &str, name: &str) -> Vec<f64> {
    report.select("tau0", tau).map(|r| report.get(r, name)).collect()
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let t = start.elapsed();
    if t <= budget {
        Ok(())
    } else {
        Err(format!("took {:.0}s, budget {:.0}s", t.as_secs_f64(), budget.as_secs_f64()))
    }
}

fn converge_report() -> Report {
    let mut c = ExperimentConfig::defaults(Experiment::Converge);
    c.levels = CONVERGE_LEVELS.to_vec();
    c.tau0 = vec![0.0, 0.01, 0.1, 1.0];
    c.deterministic = true;
    experiments::run_converge(&c).expect("convergence study")
}

fn criterion_1(report: &Report, elapsed: Duration) -> Outcome {
    let mut details = Vec::new();
    let mut ok = elapsed <= Duration::from_secs(300);
    for tau in [0.0, 0.01, 0.1, 1.0] {
        let key = experiments::fmt_float(tau);
        let statuses: Vec<String> = report
            .select("tau0", &key)
            .map(|r| r[report.column("status").unwrap()].clone())
            .collect();
        let rates = column(report, &key, "R");
        let finest = *rates.last().unwrap();
        ok &= statuses.iter().all(|s| s == "ok") && finest >= 1.8;
        details.push(format!("tau0={tau}: R={finest:.3}"));
    }
    details.push(format!("{:.1}s", elapsed.as_secs_f64()));
    check(ok, details.join(", "))
}

fn criterion_2() -> Outcome {
    let e = analysis::rate(&published::pairs(&published::L2_ERRORS_TAU_0_1)).map_err(|e| e.to_string())?;
    let k = analysis::rate(&published::pairs(&published::KAPPA_TAU_1)).map_err(|e| e.to_string())?;
    check(
        (e[0] - 1.70).abs() <= 0.01 && (k[0] + 1.38).abs() <= 0.01,
        format!("error rate {:.4} (1.70), kappa rate {:.4} (-1.38)", e[0], k[0]),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut c = ExperimentConfig::defaults(Experiment::Condition);
    c.levels = SPECTRAL_LEVELS.to_vec();
    c.tau0 = vec![0.0, 0.01, 1.0];
    c.precond = false;
    let report = experiments::run_condition(&c).map_err(|e| e.to_string())?;
    let max_n = report.rows.iter().map(|r| report.get(r, "N")).fold(0.0, f64::max);
    let mut ok = max_n <= 4000.0;
    let mut details = vec![format!("N<={max_n}")];
    let mut stabilized = Vec::new();
    for tau in [0.01, 1.0] {
        let r = *column(&report, &experiments::fmt_float(tau), "R").last().unwrap();
        ok &= (-2.5..=-1.3).contains(&r);
        stabilized.push(r);
        details.push(format!("tau0={tau}: R={r:.3}"));
    }
    let key = experiments::fmt_float(0.0);
    let zeros = column(&report, &key, "n_zero");
    let singular = zeros.iter().all(|&z| z >= 1.0);
    let r0 = *column(&report, &key, "R").last().unwrap();
    let steeper = stabilized.iter().all(|&r| r0 <= r - 0.5);
    ok &= singular || steeper;
    details.push(format!(
        "tau0=0: R={r0:.3} over positive spectrum, zero eigenvalues per level {zeros:?} ({})",
        if singular { "singular" } else { "regular" }
    ));
    within_budget(start, Duration::from_secs(900))?;
    details.push(format!("{:.1}s", start.elapsed().as_secs_f64()));
    check(ok, details.join(", "))
}

fn criterion_4() -> Outcome {
    let circle = AnalyticSurface::circle([0.5, 0.5], 0.3);
    let disc = Discretization::new(circle, &BoxDomain::unit(), 32).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut details = Vec::new();
    for tau in [0.01, 0.1, 1.0] {
        let sys = disc.operator(tau).map_err(|e| e.to_string())?;
        let c = condition_number(&eigenvalues_sym(&sys.matrix, EigenMode::All).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        ok &= c.n_negative == 1 && c.n_zero == 0;
        details.push(format!("tau0={tau}: neg={} zero={}", c.n_negative, c.n_zero));
    }
    let sys = disc.operator(0.0).map_err(|e| e.to_string())?;
    let c = condition_number(&eigenvalues_sym(&sys.matrix, EigenMode::All).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ok &= c.n_zero >= 1;
    let rho = disc.level_set_dofs();
    let residual = disc.stiffness.matvec(&rho).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bound = 1e-11 * disc.stiffness.max_norm();
    ok &= residual <= bound;
    details.push(format!(
        "tau0=0: neg={} zero={}, |A rho|_inf={residual:.2e} (bound {bound:.2e})",
        c.n_negative, c.n_zero
    ));
    check(ok, details.join(", "))
}

fn criterion_5() -> Outcome {
    let mut c = ExperimentConfig::defaults(Experiment::Sweep);
    c.tau0 = vec![0.0, 0.1];
    let report = experiments::run_sweep(&c).map_err(|e| e.to_string())?;
    let positions = report.rows.iter().filter(|r| r[0] != "summary").count() / 2;
    let variation = |tau: f64| -> (f64, f64, bool) {
        let key = experiments::fmt_float(tau);
        let rows: Vec<_> = report.select("tau0", &key).filter(|r| r[0] != "summary").collect();
        let kappas: Vec<f64> = rows.iter().map(|r| report.get(r, "kappa")).collect();
        let singular = rows
            .iter()
            .any(|r| r[3] == "singular" || report.get(r, "n_zero") >= 1.0);
        let finite = experiments::variation(&kappas);
        (if singular { f64::INFINITY } else { finite }, finite, singular)
    };
    let (v0, f0, s0) = variation(0.0);
    let (v1, _, s1) = variation(0.1);
    let ok = positions == 11 && !s1 && v1 * 10.0 <= v0;
    check(
        ok,
        format!(
            "{positions} positions, tau0=0.1: {v1:.3}, tau0=0: {v0} (singular={s0}, finite-kappa variation {f0:.2}, ratio {:.1}x)",
            f0 / v1
        ),
    )
}

fn criterion_6(report: &Report) -> Outcome {
    let key = experiments::fmt_float(0.0);
    let rows: Vec<_> = report.select("tau0", &key).collect();
    let levels: Vec<f64> = rows.iter().map(|r| report.get(r, "level")).collect();
    let rho: Vec<f64> = rows.iter().map(|r| report.get(r, "max_rho")).collect();
    let angle: Vec<f64> = rows.iter().map(|r| report.get(r, "max_angle")).collect();
    let mut ok = true;
    let mut details = Vec::new();
    for k in 1..rows.len() {
        // only factor-two refinements are consecutive in the sense of the bound
        if levels[k] != 2.0 * levels[k - 1] {
            continue;
        }
        let (a, b) = (rho[k - 1] / rho[k], angle[k - 1] / angle[k]);
        ok &= (3.0..=5.0).contains(&a) && (1.5..=2.8).contains(&b);
        details.push(format!("{}->{}: rho {a:.2}, angle {b:.2}", levels[k - 1], levels[k]));
    }
    check(ok && !details.is_empty(), details.join(", "))
}

fn criterion_7() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;

    let disc = Discretization::new(sb::surface(), &BoxDomain::unit(), 16).map_err(|e| e.to_string())?;
    let asym = disc.stiffness.asymmetry().max(disc.stabilization.asymmetry());
    ok &= asym == 0.0;
    let ones = vec![1.0; disc.n_dofs()];
    let row_sum = |m: &cutfem::linalg::SparseSym| m.matvec(&ones).iter().fold(0.0f64, |s, x| s.max(x.abs())) / m.max_norm();
    let rows = row_sum(&disc.stiffness).max(row_sum(&disc.stabilization));
    ok &= rows <= 1e-12;
    let affine: Vec<f64> = disc
        .dofs
        .nodes
        .iter()
        .map(|&v| geom::dot([0.3, -1.2, 2.1], disc.mesh.nodes()[v]) + 0.7)
        .collect();
    let jump = assemble_stabilization(&disc.mesh, &disc.cut.active_faces, &disc.dofs).quad_form(&affine).abs();
    let jump_rel = jump / (disc.stabilization.max_norm() * affine.iter().map(|x| x * x).sum::<f64>());
    ok &= jump_rel <= 1e-12;
    details.push(format!("asym={asym:e} rowsum={rows:.1e} j(affine)={jump_rel:.1e}"));

    let areas: Vec<(f64, f64)> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let d = Discretization::new(sb::surface(), &BoxDomain::unit(), n).unwrap();
            (d.h(), (d.cut.total_area - std::f64::consts::PI).abs())
        })
        .collect();
    let c = areas[..2].iter().map(|(h, e)| e / (h * h)).fold(0.0, f64::max);
    let area_ok = areas.iter().all(|(h, e)| *e <= c * h * h);
    ok &= area_ok;
    details.push(format!("area C={c:.3} ok={area_ok}"));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let surface = sb::surface();
    let mut idem = 0.0f64;
    for _ in 0..1000 {
        let x = [rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)];
        let Ok(p) = surface.closest_point(x) else { continue };
        let q = surface.closest_point(p).unwrap();
        idem = idem.max(geom::norm(geom::sub(p, q)));
    }
    ok &= idem <= 1e-13;
    details.push(format!("idempotence={idem:.1e}"));

    let load = disc.load(sb::load).map_err(|e| e.to_string())?;
    let mut worst = (0.0f64, 0.0f64);
    for tau in [0.0, 0.1, 1.0] {
        let sys = disc.system(tau, &load).map_err(|e| e.to_string())?;
        let sol = sys.solve(SolverKind::default()).map_err(|e| e.to_string())?;
        let mean: f64 = sol.coefficients.iter().zip(&disc.constraint).map(|(a, b)| a * b).sum();
        let scale = sol.coefficients.iter().fold(0.0f64, |m, x| m.max(x.abs())) * disc.cut.total_area;
        worst.0 = worst.0.max(sol.stats.relative_residual);
        worst.1 = worst.1.max(mean.abs() / scale);
    }
    ok &= worst.0 <= 1e-10 && worst.1 <= 1e-8;
    details.push(format!("residual={:.1e} mean={:.1e}", worst.0, worst.1));
    let scaled = diagonal_scaling(&disc.system(1.0, &load).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let sol = scaled.solve(SolverKind::default()).map_err(|e| e.to_string())?;
    ok &= sol.stats.relative_residual <= 1e-10;

    let bin = env!("CARGO_BIN_EXE_cutfem");
    let run = || {
        Command::new(bin)
            .args(["--experiment", "converge", "--levels", "6,8", "--tau0", "0,0.1", "--deterministic"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let identical = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    ok &= identical;
    details.push(format!("csv byte-identical={identical}"));
    check(ok, details.join(", "))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for tau in [0.1, 1.0] {
        let mut random = Vec::new();
        let mut sharp = Vec::new();
        for n in SPECTRAL_LEVELS {
            let d = Discretization::new(sb::surface(), &BoxDomain::unit(), n).map_err(|e| e.to_string())?;
            let fc = analysis::functional_constants(&d, tau, analysis::DEFAULT_SAMPLES, 2024).map_err(|e| e.to_string())?;
            random.push((fc.poincare, fc.inverse));
            sharp.push(analysis::sharp_functional_constants(&d, tau).map_err(|e| e.to_string())?);
        }
        let spread = |v: &[(f64, f64)], k: usize| {
            let x: Vec<f64> = v.iter().map(|p| if k == 0 { p.0 } else { p.1 }).collect();
            experiments::variation(&x)
        };
        let (p, i) = (spread(&random, 0), spread(&random, 1));
        ok &= p < 3.0 && i < 3.0;
        details.push(format!(
            "tau0={tau}: sampled variation poincare {p:.2}x inverse {i:.2}x, sharp {:.2}x {:.2}x",
            spread(&sharp, 0),
            spread(&sharp, 1)
        ));
    }
    check(ok, details.join(", "))
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(d) => {
            println!("criterion {name}: PASS ({secs:.1}s) {d}");
            true
        }
        Err(d) => {
            println!("criterion {name}: FAIL ({secs:.1}s) {d}");
            false
        }
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let report = converge_report();
    let converge_time = start.elapsed();
    let results = [
        run("1 (L2 rate)", || criterion_1(&report, converge_time)),
        run("2 (rate formula)", criterion_2),
        run("3 (condition scaling)", criterion_3),
        run("4 (spectral signatures)", criterion_4),
        run("5 (translated circle)", criterion_5),
        run("6 (geometry ratios)", || criterion_6(&report)),
        run("7 (invariants)", criterion_7),
        run("8 (functional constants)", criterion_8),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

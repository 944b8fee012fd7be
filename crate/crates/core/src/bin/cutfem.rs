use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use cutfem::experiments::{self, Experiment, ExperimentConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Converge,
    Condition,
    Sweep,
    Rates,
}

/// Surface finite element studies on cut background meshes.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(long, value_enum)]
    experiment: Kind,
    #[arg(long)]
    dim: Option<usize>,
    /// Cells per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Stabilization parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    tau0: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    center: Option<Vec<f64>>,
    #[arg(long)]
    radius: Option<f64>,
    /// Also report the diagonally scaled system.
    #[arg(long)]
    precond: Option<bool>,
    #[arg(long)]
    sweep_delta: Option<f64>,
    #[arg(long)]
    sweep_step: Option<f64>,
    #[arg(long)]
    sweep_cells: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Zero the timing column so output is byte-reproducible.
    #[arg(long)]
    deterministic: bool,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(args: &Args) -> ExperimentConfig {
    let experiment = match args.experiment {
        Kind::Converge => Experiment::Converge,
        Kind::Condition => Experiment::Condition,
        Kind::Sweep => Experiment::Sweep,
        Kind::Rates => Experiment::Rates,
    };
    let mut c = ExperimentConfig::defaults(experiment);
    if let Some(d) = args.dim {
        c.dim = d;
    }
    if let Some(l) = &args.levels {
        c.levels = l.clone();
    }
    if let Some(t) = &args.tau0 {
        c.tau0 = t.clone();
    }
    if let Some(p) = &args.center {
        c.center = [0.0; 3];
        for (dst, src) in c.center.iter_mut().zip(p) {
            *dst = *src;
        }
    }
    if let Some(r) = args.radius {
        c.radius = r;
    }
    if let Some(p) = args.precond {
        c.precond = p;
    }
    if let Some(d) = args.sweep_delta {
        c.sweep_delta = d;
    }
    if let Some(s) = args.sweep_step {
        c.sweep_step = s;
    }
    if let Some(n) = args.sweep_cells {
        c.sweep_cells = n;
    }
    c.seed = args.seed;
    c.deterministic = args.deterministic;
    c
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = experiments::run(&config(&args)).and_then(|report| {
        let csv = report.to_csv();
        match &args.out {
            Some(path) => std::fs::write(path, csv)?,
            None => print!("{csv}"),
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

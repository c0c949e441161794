//! Experiment runner: convergence ladders, the shrinking-disk benchmark,
//! coarsening studies, and plain single runs, all emitting CSV files whose
//! headers echo the resolved configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use rayon::prelude::*;

use tfac::config::{self, Command, Overrides, Problem, RunConfig};
use tfac::error::Error;
use tfac::experiments::{
    convergence_manufactured, convergence_self_reference, run_transient, solve_manufactured,
    CoarseningRun, ConvergenceReport, DiskBenchmark,
};
use tfac::mesh::{MeshFamily, TimeMesh};
use tfac::models::{InitialCondition, ManufacturedSolution};
use tfac::output;
use tfac::sav::SchemeConfig;
use tfac::spectral::{Bc, Grid};

/// Solver for the time-fractional Allen-Cahn equation; runs the convergence,
/// benchmark, and coarsening experiments and writes CSV results.
#[derive(Parser)]
#[command(name = "tfac", version)]
struct Cli {
    /// What to run: converge, circle, coarsen, or single-run.
    command: String,
    /// Config file of `key = value` lines; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment preset: ex1, ex2, ex3, circle, or coarsen.
    #[arg(long)]
    problem: Option<String>,
    /// Fractional order in (0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Interface parameter squared.
    #[arg(long)]
    eps2: Option<f64>,
    /// Split-off diffusion weight, 0 <= theta <= eps2 (default eps2).
    #[arg(long)]
    theta: Option<f64>,
    /// Energy shift inside the auxiliary variable (default 0).
    #[arg(long)]
    c0: Option<f64>,
    /// Time stepper: l1 or l1cn.
    #[arg(long)]
    scheme: Option<String>,
    /// Boundary conditions: periodic or neumann.
    #[arg(long)]
    bc: Option<String>,
    /// Grid points per direction.
    #[arg(long)]
    grid: Option<usize>,
    /// Time mesh family: uniform, graded, or composite.
    #[arg(long)]
    mesh: Option<String>,
    /// Mesh grading exponent (graded and composite meshes).
    #[arg(long)]
    r: Option<f64>,
    /// Uniform step size after t = 1 (composite meshes).
    #[arg(long)]
    dt: Option<f64>,
    /// Number of time steps; for converge, the largest ladder rung.
    #[arg(long, short = 'M')]
    m: Option<usize>,
    /// Final time.
    #[arg(long, short = 'T')]
    t: Option<f64>,
    /// Exponent of the manufactured solution's singular time factor (ex2).
    #[arg(long)]
    mu: Option<f64>,
    /// Seed for randomized initial data.
    #[arg(long)]
    seed: Option<u64>,
    /// Error reduction over time: max or final.
    #[arg(long)]
    error_mode: Option<String>,
    /// Smooth the benchmark disk's jump into a tanh profile.
    #[arg(long)]
    smooth: bool,
    /// Output CSV path; related files are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent convergence runs.
    #[arg(long)]
    jobs: Option<usize>,
}

fn overrides_from(cli: &Cli) -> Result<Overrides, Error> {
    let mut ov = Overrides::default();
    macro_rules! forward {
        ($($field:ident => $key:literal),* $(,)?) => {
            $(if let Some(v) = &cli.$field { ov.set($key, &v.to_string())?; })*
        };
    }
    forward!(
        problem => "problem", alpha => "alpha", eps2 => "eps2", theta => "theta",
        c0 => "c0", scheme => "scheme", bc => "bc", grid => "grid", mesh => "mesh",
        r => "r", dt => "dt", m => "m", t => "t", mu => "mu", seed => "seed",
        error_mode => "error_mode", jobs => "jobs",
    );
    if cli.smooth {
        ov.set("smooth", "true")?;
    }
    if let Some(path) = &cli.out {
        ov.out = Some(path.clone());
    }
    Ok(ov)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match try_main(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn try_main(cli: &Cli) -> Result<(), Error> {
    let command = config::parse_command(&cli.command)?;
    let file_text = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path)?),
        None => None,
    };
    let cfg = config::resolve(command, file_text.as_deref(), &overrides_from(cli)?)?;
    match cfg.command {
        Command::Converge => run_converge(&cfg),
        Command::Circle => run_circle(&cfg),
        Command::Coarsen => run_coarsen(&cfg),
        Command::SingleRun => run_single(&cfg),
    }
}

/// Header comments for every output file: artifact version, then the full
/// resolved configuration.
fn comments(cfg: &RunConfig) -> Vec<String> {
    let mut lines = vec![format!("tfac {}", env!("CARGO_PKG_VERSION"))];
    lines.extend(cfg.canonical_text().lines().map(String::from));
    lines
}

fn build_grid(cfg: &RunConfig) -> Result<Arc<Grid>, Error> {
    let expected = match cfg.problem {
        Problem::Ex1 => Bc::Periodic,
        _ => Bc::Neumann,
    };
    if cfg.bc != expected {
        return Err(Error::Config(format!(
            "problem {} is posed with {expected} boundary conditions",
            cfg.problem
        )));
    }
    let (lo, hi) = match cfg.problem {
        Problem::Ex1 => (0.0, 2.0 * PI),
        _ => (-1.0, 1.0),
    };
    Ok(Grid::square(cfg.bc, cfg.grid_n, lo, hi))
}

fn scheme_config(cfg: &RunConfig) -> SchemeConfig {
    let mut sc = SchemeConfig::new(cfg.scheme, cfg.alpha, cfg.eps2);
    sc.theta = cfg.theta;
    sc.c0 = cfg.c0;
    sc
}

/// Path for a secondary output next to the primary one: `radius.csv` plus
/// `_energy` becomes `radius_energy.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn run_converge(cfg: &RunConfig) -> Result<(), Error> {
    let grid = build_grid(cfg)?;
    let base = scheme_config(cfg);
    let ladder = cfg.m_ladder();
    let report = match cfg.problem {
        Problem::Ex1 | Problem::Ex2 => {
            let sol = if cfg.problem == Problem::Ex1 {
                ManufacturedSolution::SineCosPoly
            } else {
                ManufacturedSolution::CosCosPower { mu: cfg.mu }
            };
            if cfg.jobs > 1 {
                ladder_in_parallel(cfg, sol, &grid, &base, &ladder)?
            } else {
                convergence_manufactured(
                    sol,
                    &grid,
                    &base,
                    cfg.t_end,
                    cfg.mesh,
                    &ladder,
                    cfg.error_mode,
                )?
            }
        }
        Problem::Ex3 => convergence_self_reference(
            InitialCondition::CosineProduct,
            cfg.seed,
            &grid,
            &base,
            cfg.t_end,
            cfg.mesh,
            &ladder,
            3.0,
            16,
            cfg.error_mode,
        )?,
        other => {
            return Err(Error::Config(format!(
                "converge needs a problem with a reference solution (ex1, ex2, or ex3), not {other}"
            )))
        }
    };
    output::write_convergence(&cfg.out, &report, &comments(cfg))?;
    let finest = report.rows.last().expect("ladder is nonempty");
    println!(
        "wrote {}; finest error {:.3e} at m = {}, least-squares order {:.3}",
        cfg.out.display(),
        finest.error,
        finest.m,
        report.ls_order(report.rows.len())
    );
    Ok(())
}

/// Rungs of a manufactured-solution ladder are independent, so they can run
/// on a small thread pool. Reference-based ladders share one reference run
/// and stay serial.
fn ladder_in_parallel(
    cfg: &RunConfig,
    sol: ManufacturedSolution,
    grid: &Arc<Grid>,
    base: &SchemeConfig,
    ladder: &[usize],
) -> Result<ConvergenceReport, Error> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.min(ladder.len()))
        .build()
        .map_err(|e| Error::Config(format!("could not start worker pool: {e}")))?;
    let triples = pool.install(|| {
        ladder
            .par_iter()
            .map(|&m| {
                let mesh = TimeMesh::with_family(cfg.mesh, cfg.t_end, m)?;
                let error = solve_manufactured(sol, grid, base, &mesh, cfg.error_mode)?;
                Ok((m, mesh.tau_max(), error))
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    Ok(ConvergenceReport::from_errors(triples))
}

fn run_circle(cfg: &RunConfig) -> Result<(), Error> {
    let mut bench = DiskBenchmark::new(cfg.alpha);
    bench.grid_n = cfg.grid_n;
    bench.m_graded = cfg.m;
    bench.t_end = cfg.t_end;
    bench.eps = cfg.eps2.sqrt();
    bench.theta = Some(cfg.theta);
    bench.c0 = cfg.c0;
    bench.smooth_interface = cfg.smooth;
    match cfg.mesh {
        MeshFamily::Composite { r, dt } => {
            bench.graded_r = Some(r);
            bench.dt = dt;
        }
        _ => {
            return Err(Error::Config(
                "the circle benchmark runs on a composite mesh; pass --mesh composite".into(),
            ))
        }
    }
    let (trace, energies) = bench.run()?;
    output::write_radius(&cfg.out, &trace, &comments(cfg))?;
    let energy_path = sibling(&cfg.out, "_energy");
    output::write_energies(&energy_path, &energies, &comments(cfg))?;
    let last = trace.rows.last().expect("trace is nonempty");
    println!(
        "wrote {} and {}; radius {:.4} at t = {}",
        cfg.out.display(),
        energy_path.display(),
        last.r,
        last.t
    );
    Ok(())
}

fn run_coarsen(cfg: &RunConfig) -> Result<(), Error> {
    let mut run = CoarseningRun::new(cfg.alpha, cfg.seed);
    run.grid_n = cfg.grid_n;
    run.m_graded = cfg.m;
    run.t_end = cfg.t_end;
    run.eps2 = cfg.eps2;
    run.snapshot_times.retain(|&t| t <= cfg.t_end);
    match cfg.mesh {
        MeshFamily::Composite { r, dt } => {
            run.graded_r = Some(r);
            run.dt = dt;
        }
        _ => {
            return Err(Error::Config(
                "coarsening runs on a composite mesh; pass --mesh composite".into(),
            ))
        }
    }
    let (records, snapshots, min_sigma) = run.run()?;
    output::write_energies(&cfg.out, &records, &comments(cfg))?;
    for (t, field) in &snapshots {
        output::write_field(&sibling(&cfg.out, &format!("_t{t}")), field, &comments(cfg))?;
    }
    let last = records.last().expect("records are nonempty");
    println!(
        "wrote {} and {} snapshots; E = {:.6}, modified E = {:.6}, min sigma = {:.2e}",
        cfg.out.display(),
        snapshots.len(),
        last.e,
        last.e_mod,
        min_sigma
    );
    Ok(())
}

fn run_single(cfg: &RunConfig) -> Result<(), Error> {
    let grid = build_grid(cfg)?;
    let mut base = scheme_config(cfg);
    let mesh = TimeMesh::with_family(cfg.mesh, cfg.t_end, cfg.m)?;
    let exact = match cfg.problem {
        Problem::Ex1 => Some(ManufacturedSolution::SineCosPoly),
        Problem::Ex2 => Some(ManufacturedSolution::CosCosPower { mu: cfg.mu }),
        _ => None,
    };
    base.source = exact;
    let phi0 = match cfg.problem {
        Problem::Ex1 | Problem::Ex2 => exact.expect("set above").phi(&grid, 0.0),
        Problem::Ex3 => InitialCondition::CosineProduct.field(&grid, cfg.seed),
        Problem::Circle => {
            let eps = cfg.eps2.sqrt();
            let interface = if cfg.smooth { Some(eps) } else { None };
            InitialCondition::Disk {
                radius: 0.25,
                interface,
            }
            .field(&grid, cfg.seed)
        }
        Problem::Coarsen => {
            InitialCondition::RandomUniform { amplitude: 0.05 }.field(&grid, cfg.seed)
        }
    };
    let run = run_transient(phi0, &base, &mesh, |_, _, _| ())?;
    output::write_energies(&cfg.out, &run.records, &comments(cfg))?;
    let last = run.records.last().expect("records are nonempty");
    print!(
        "wrote {}; E = {:.6}, modified E = {:.6}, R = {:.6}, min sigma = {:.2e}",
        cfg.out.display(),
        last.e,
        last.e_mod,
        last.r,
        run.min_sigma
    );
    if let Some(sol) = exact {
        let diff = run
            .state
            .phi()
            .values()
            .iter()
            .zip(sol.phi(&grid, cfg.t_end).values())
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        print!(", final error {diff:.3e}");
    }
    println!();
    Ok(())
}

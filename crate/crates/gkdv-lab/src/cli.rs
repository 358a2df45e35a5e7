//! The `gkdv` command line.
//!
//! ```text
//! gkdv soliton --config soliton.json --out dir
//! gkdv coeffs  --config coeffs.json  --out dir
//! gkdv approx  --nl '{"m":3,"epsilon":0.01,"p":4,"family":"epsilon_family"}' --c 0.01 --variant sym --out dir
//! gkdv evolve  --config evolve.json  --out dir [--checkpoint-every k]
//! gkdv collide --config collide.json --out dir [--threads n]
//! gkdv verify oracle --out dir
//! ```
//!
//! Exit status: 0 on success, 1 for usage errors, 2 when a config or an
//! argument is rejected, 3 when the evolution diverges, 4 for any other
//! failure (I/O, a fit that finds no soliton, a singular system).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gkdv_core::approx::{ApproxSolution, Variant};
use gkdv_core::cascade::solve_cascade_on;
use gkdv_core::numerics::{integrate, make_grid};
use gkdv_core::oracle::{identities, slope_row, SLOPE_EPSILONS};
use gkdv_core::soliton::{soliton_profile, SolitonShape};
use serde::Serialize;

use crate::config::{self, CoeffsConfig, EvolveConfig, SolitonConfig};
use crate::error::{LabError, Result};
use crate::evolver::{evolve, EvolutionState};
use crate::harness::{run_collision, scaling_study, trajectory_row};
use crate::output::{write_json, write_profile, write_rows};
use crate::residual::{approx_box, residual_scan, ResidualScan, SCAN_TIMES};
use crate::spectral::PeriodicGrid;

#[derive(Debug, Parser)]
#[command(name = "gkdv", version, about = "Solitons and soliton collisions for generalized KdV equations")]
struct Cli {
    /// Directory for the output files; created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for studies and residual scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also dump the field as a profile CSV at every k-th checkpoint.
    #[arg(long, global = true)]
    checkpoint_every: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the soliton Q_c.
    Soliton {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the cascade and print its coefficients.
    Coeffs {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate an approximate two-soliton solution and its residual.
    Approx {
        /// Nonlinearity as inline JSON or a path to a JSON file.
        #[arg(long)]
        nl: String,
        #[arg(long)]
        c: f64,
        #[arg(long, value_enum, default_value = "sym")]
        variant: VariantArg,
        /// Number of times sampled in [-T_c, T_c].
        #[arg(long, default_value_t = SCAN_TIMES)]
        times: usize,
    },
    /// Evolve a sum of solitons.
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a collision experiment, or a scaling study if the config has one.
    Collide {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reference checks against closed forms.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
}

#[derive(Debug, Subcommand)]
enum Verify {
    /// Compare the extrapolated slope of d(eps)/eps with c_{m,p}.
    Oracle {
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3])]
        m: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [4.0, 5.0])]
        p: Vec<f64>,
    },
    /// Residuals of the explicit inverse images of the base operator.
    Identities,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Sym,
    Hat,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Sym => Variant::Symmetric,
            VariantArg::Hat => Variant::Modified,
        }
    }
}

/// Exit status for an error.
pub fn exit_code(e: &LabError) -> i32 {
    use gkdv_core::Error as E;
    match e {
        LabError::InvalidArgument(_) => 2,
        LabError::Core(E::InvalidArgument(_) | E::Domain(_) | E::NoSoliton(_) | E::Unsupported(_)) => 2,
        LabError::Divergence { .. } => 3,
        _ => 4,
    }
}

/// Runs the command line on `argv` (program name first) and returns the
/// exit status. Messages go to stdout and stderr.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(LabError::InvalidArgument(format!("--threads: {e}"))),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gkdv: {e}");
            if let LabError::Divergence { last_good: Some(state), .. } = &e {
                let path = cli.out.join("last_good.json");
                if write_json(&path, state).is_ok() {
                    eprintln!("gkdv: last finite state (t = {}) written to {}", state.t, path.display());
                }
            }
            exit_code(&e)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    if cli.checkpoint_every == Some(0) {
        return Err(LabError::InvalidArgument("--checkpoint-every must be at least 1".into()));
    }
    fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Soliton { config } => soliton(&config::parse(&config::read(config)?)?, out),
        Command::Coeffs { config } => coeffs(&config::parse(&config::read(config)?)?, out),
        Command::Approx { nl, c, variant, times } => approx(nl, *c, (*variant).into(), *times, cli.checkpoint_every.unwrap_or(1), out),
        Command::Evolve { config } => evolve_cmd(&config::parse(&config::read(config)?)?, cli.checkpoint_every, out),
        Command::Collide { config } => collide(&config::read(config)?, cli.checkpoint_every, out),
        Command::Verify { what: Verify::Oracle { m, p } } => verify_oracle(m, p, out),
        Command::Verify { what: Verify::Identities } => verify_identities(out),
    }
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

#[derive(Serialize)]
struct SolitonSummary {
    c: f64,
    amplitude: f64,
    mass: f64,
}

fn soliton(cfg: &SolitonConfig, out: &Path) -> Result<()> {
    cfg.nonlinearity.validate()?;
    let grid = make_grid(cfg.half_width, cfg.points)?;
    let sp = soliton_profile(&cfg.nonlinearity, cfg.c, &grid)?;
    let mass = integrate(&sp.profile.mul(&sp.profile))?;
    let csv = out.join("soliton.csv");
    fs::write(&csv, sp.profile.to_csv())?;
    announce(&csv);
    let json = out.join("soliton.json");
    write_json(&json, &SolitonSummary { c: sp.c, amplitude: sp.amplitude, mass })?;
    announce(&json);
    Ok(())
}

fn coeffs(cfg: &CoeffsConfig, out: &Path) -> Result<()> {
    cfg.nonlinearity.validate()?;
    let grid = make_grid(cfg.half_width, cfg.points)?;
    let summary = solve_cascade_on(&cfg.nonlinearity, &grid)?.summary();
    let path = out.join("coeffs.json");
    write_json(&path, &summary)?;
    println!("{}", serde_json::to_string(&summary).map_err(std::io::Error::from)?);
    announce(&path);
    Ok(())
}

#[derive(Serialize)]
struct ScanRow {
    t: f64,
    residual_h1: f64,
}

fn scan_rows(scan: &ResidualScan) -> Vec<ScanRow> {
    scan.times.iter().zip(&scan.h1).map(|(&t, &r)| ScanRow { t, residual_h1: r }).collect()
}

#[derive(Serialize)]
struct ApproxSummary {
    #[serde(rename = "T_c")]
    t_c: f64,
    delta1: f64,
    delta2: f64,
    residual_h1_max: f64,
    c: f64,
    variant: Variant,
    d: f64,
}

fn approx(nl_arg: &str, c: f64, variant: Variant, times: usize, every: usize, out: &Path) -> Result<()> {
    let nl = config::nonlinearity_arg(nl_arg)?;
    if times == 0 {
        return Err(LabError::InvalidArgument("--times must be at least 1".into()));
    }
    let cascade = gkdv_core::cascade::solve_cascade(&nl)?;
    let d = cascade.defect;
    let a = ApproxSolution::new(cascade, c, variant)?;
    let scan = residual_scan(&a, times)?;
    let grid = approx_box(c, a.t_c)?;
    let xs = grid.xs();
    for (i, &t) in scan.times.iter().enumerate().step_by(every) {
        let path = out.join(format!("u_{i:03}.csv"));
        write_profile(&path, &xs, &a.eval_points(t, &xs))?;
    }
    let path = out.join("residual_scan.csv");
    write_rows(&path, &scan_rows(&scan))?;
    announce(&path);
    let s = a.shifts();
    let summary = ApproxSummary { t_c: a.t_c, delta1: s.delta1, delta2: s.delta2, residual_h1_max: scan.max(), c, variant, d };
    let path = out.join("summary.json");
    write_json(&path, &summary)?;
    announce(&path);
    Ok(())
}

fn dump_states(out: &Path, grid: &PeriodicGrid, states: &[EvolutionState], every: Option<usize>) -> Result<()> {
    let Some(k) = every else { return Ok(()) };
    let xs = grid.xs();
    for (i, s) in states.iter().enumerate().filter(|(i, _)| (i + 1) % k == 0) {
        write_profile(&out.join(format!("field_{:04}.csv", i + 1)), &xs, &s.u)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EvolveSummary {
    t_final: f64,
    mass_drift: f64,
    energy_drift: f64,
    warnings: Vec<String>,
}

fn evolve_cmd(cfg: &EvolveConfig, every: Option<usize>, out: &Path) -> Result<()> {
    cfg.validate()?;
    let nl = &cfg.nonlinearity;
    let grid = cfg.evolver.grid()?;
    let shapes = cfg.solitons.iter().map(|s| SolitonShape::new(nl, s.c)).collect::<gkdv_core::Result<Vec<_>>>()?;
    let u0: Vec<f64> = grid.xs().iter().map(|&x| cfg.solitons.iter().zip(&shapes).map(|(s, q)| s.sign * q.value(x - s.x0)).sum()).collect();
    let n = cfg.checkpoints;
    let times: Vec<f64> = (1..=n).map(|i| cfg.t_final * i as f64 / n as f64).collect();
    let run = evolve(nl, &u0, cfg.t_final, &cfg.evolver, &times)?;
    let (m0, e0) = crate::evolver::conserved(nl, &crate::spectral::Spectral::new(grid), &u0);
    let initial = EvolutionState { t: 0.0, u: u0, mass: m0, energy: e0 };
    let rows: Vec<_> = std::iter::once(&initial).chain(&run.states).map(|s| trajectory_row(&grid, s)).collect();
    let path = out.join("trajectory.csv");
    write_rows(&path, &rows)?;
    announce(&path);
    dump_states(out, &grid, &run.states, every)?;
    let rel = |f: fn(&EvolutionState) -> f64| run.states.iter().map(|s| ((f(s) - f(&initial)) / f(&initial)).abs()).fold(0.0, f64::max);
    let summary = EvolveSummary { t_final: cfg.t_final, mass_drift: rel(|s| s.mass), energy_drift: rel(|s| s.energy), warnings: run.warnings };
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    let path = out.join("summary.json");
    write_json(&path, &summary)?;
    announce(&path);
    Ok(())
}

fn collide(text: &str, every: Option<usize>, out: &Path) -> Result<()> {
    let cfg = config::parse_collide(text)?;
    cfg.experiment.validate()?;
    if let Some(study) = &cfg.study {
        let table = scaling_study(&cfg.experiment, &study.c_values, &study.eps_values)?;
        let path = out.join("study.json");
        write_json(&path, &table)?;
        announce(&path);
        let path = out.join("study.csv");
        write_rows(&path, &table.points)?;
        announce(&path);
        return Ok(());
    }
    let run = run_collision(&cfg.experiment)?;
    for w in &run.report.warnings {
        eprintln!("warning: {w}");
    }
    let path = out.join("report.json");
    write_json(&path, &run.report)?;
    announce(&path);
    let path = out.join("trajectory.csv");
    write_rows(&path, &run.trajectory)?;
    announce(&path);
    dump_states(out, &run.grid, &run.states, every)?;

    // residual of ũ at the same (f, c), for comparison with the measured remainder
    let nl = &cfg.experiment.nonlinearity;
    let scan = gkdv_core::cascade::solve_cascade(nl)
        .and_then(|cas| ApproxSolution::new(cas, cfg.experiment.c, Variant::Symmetric))
        .map_err(LabError::from)
        .and_then(|a| residual_scan(&a, SCAN_TIMES));
    match scan {
        Ok(scan) => {
            let path = out.join("residual_scan.csv");
            write_rows(&path, &scan_rows(&scan))?;
            announce(&path);
        }
        Err(e) => eprintln!("warning: no residual scan for this nonlinearity: {e}"),
    }
    Ok(())
}

fn verify_oracle(ms: &[u32], ps: &[f64], out: &Path) -> Result<()> {
    let grid = make_grid(gkdv_core::cascade::DEFAULT_HALF_WIDTH, gkdv_core::cascade::DEFAULT_POINTS)?;
    let mut rows = Vec::new();
    for &m in ms {
        for &p in ps {
            let row = slope_row(m, p, &SLOPE_EPSILONS, &grid)?;
            println!("m = {m}, p = {p}: c_mp = {:.8}, slope = {:.8}, rel_error = {:.2e}", row.c_mp, row.pipeline_slope, row.rel_error);
            rows.push(row);
        }
    }
    let path = out.join("oracle.csv");
    write_rows(&path, &rows)?;
    announce(&path);
    Ok(())
}

#[derive(Serialize)]
struct IdentityRow {
    name: &'static str,
    m: u32,
    sup_residual: f64,
}

fn verify_identities(out: &Path) -> Result<()> {
    let grid = make_grid(gkdv_core::cascade::DEFAULT_HALF_WIDTH, gkdv_core::cascade::DEFAULT_POINTS)?;
    let rows = identities().iter().map(|id| Ok(IdentityRow { name: id.name, m: id.m, sup_residual: id.residual(&grid)? })).collect::<Result<Vec<_>>>()?;
    for r in &rows {
        println!("{} (m = {}): {:.2e}", r.name, r.m, r.sup_residual);
    }
    let path = out.join("identities.csv");
    write_rows(&path, &rows)?;
    announce(&path);
    Ok(())
}

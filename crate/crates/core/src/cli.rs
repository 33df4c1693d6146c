//! Command-line front end.
//!
//! ```text
//! multitime <solve|slice|trajectories|ensemble|verify> [--config FILE] [--output DIR] [--set KEY=VALUE]...
//! multitime run --config FILE            # experiment taken from the `experiment` key
//! ```
//!
//! Every experiment writes into the output directory; the file formats are
//! described in FORMATS.md. Exit status: 0 on success, 2 for usage and
//! configuration errors (with line and column), 3 for numerical failures and
//! failed checks, 1 for I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{DataError, Experiment, ParseError, RunConfig};
use crate::current::{density_grid, density_peaks, Peak};
use crate::solver::{Configuration, Solver};
use crate::trajectories::{
    integrate_trajectory, run_ensemble, CheckpointStats, MarginalGrid, Trajectory, TrajectoryOptions, TrajectoryStatus,
};
use crate::verify::{verify_all, ProbeSpec, VerifySettings, VerifySummary};

/// Minimum prominence, relative to the maximum, of a reported density peak.
pub const PEAK_PROMINENCE: f64 = 0.05;

/// Exit status for configuration and usage errors.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for numerical failures and failed checks.
pub const EXIT_NUMERIC: u8 = 3;
/// Exit status for I/O errors.
pub const EXIT_IO: u8 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "multitime",
    version,
    about = "Two-time electron-photon wave function: solver, currents and trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate Ψ on equal-time grids or at explicit configurations.
    Solve(RunArgs),
    /// Equal-time density and flux grids.
    Slice(RunArgs),
    /// Individual trajectories with a free-mode overlay.
    Trajectories(RunArgs),
    /// Ensemble of typical trajectories and equivariance statistics.
    Ensemble(RunArgs),
    /// The full residual-check suite.
    Verify(RunArgs),
    /// Run the experiment named by the `experiment` key.
    Run(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Configuration file (`key = value` lines).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the `output` key).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Why a run stopped.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Parse(#[from] ParseError),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{module}: {source}")]
    Numeric {
        module: &'static str,
        #[source]
        source: crate::error::Error,
    },
    #[error("{0}")]
    CheckFailed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric { .. } | CliError::CheckFailed(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

fn numeric(module: &'static str) -> impl Fn(crate::error::Error) -> CliError {
    move |source| CliError::Numeric { module, source }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Entry point used by the binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (fixed, args) = match cli.command {
        Command::Solve(a) => (Some(Experiment::Solve), a),
        Command::Slice(a) => (Some(Experiment::Slice), a),
        Command::Trajectories(a) => (Some(Experiment::Trajectories), a),
        Command::Ensemble(a) => (Some(Experiment::Ensemble), a),
        Command::Verify(a) => (Some(Experiment::Verify), a),
        Command::Run(a) => (None, a),
    };
    let mut cfg = match &args.config {
        Some(path) => RunConfig::parse(&fs::read_to_string(path).map_err(io_err(path))?)?,
        None => RunConfig::default(),
    };
    for item in &args.set {
        let (k, v) =
            item.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{item}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if !crate::config::KEYS.contains(&k) {
            return Err(CliError::Usage(format!("--set: unknown key '{k}'")));
        }
        cfg.set(k, v).map_err(|m| CliError::Usage(format!("--set {k}: {m}")))?;
    }
    if let Some(out) = &args.output {
        cfg.output = out.display().to_string();
    }
    let experiment = match (fixed, cfg.experiment) {
        (Some(e), _) => e,
        (None, Some(e)) => e,
        (None, None) => return Err(CliError::Usage("`run` needs an `experiment` key".into())),
    };
    run(&cfg, experiment)
}

/// Runs one experiment and returns the files written, in order.
pub fn run(cfg: &RunConfig, experiment: Experiment) -> Result<Vec<PathBuf>, CliError> {
    let out = PathBuf::from(&cfg.output);
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    let data = cfg.initial_data().map_err(|e| match e {
        DataError::Io(m) => CliError::Io(m),
        DataError::Numeric(e) => CliError::Numeric { module: "initdata", source: e },
    })?;
    let solver = Solver::new(data, cfg.solver_config()).map_err(numeric("solver"))?;
    let mut files = vec![write_file(&out, "run_config.json", &to_json(cfg))?];
    match experiment {
        Experiment::Solve => files.push(write_file(&out, "psi.csv", &solve_csv(&solver, cfg)?)?),
        Experiment::Slice => files.extend(slice(&solver, cfg, &out)?),
        Experiment::Trajectories => files.extend(trajectories(&solver, cfg, &out)?),
        Experiment::Ensemble => files.extend(ensemble(&solver, cfg, &out)?),
        Experiment::Verify => {
            let summary = verify(&solver, cfg)?;
            files.push(write_file(&out, "verify.json", &to_json(&summary))?);
            if !summary.pass {
                let failed: Vec<String> = summary
                    .reports
                    .iter()
                    .filter(|r| !r.pass)
                    .map(|r| format!("{} = {:e} > {:e}", r.equation_id, r.value(), r.threshold))
                    .chain(
                        summary
                            .mutations
                            .iter()
                            .filter(|m| !m.detected)
                            .map(|m| format!("{:?} mutation not detected", m.mutation)),
                    )
                    .collect();
                return Err(CliError::CheckFailed(format!("verify failed: {}", failed.join("; "))));
            }
        }
    }
    Ok(files)
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(io_err(&path))?;
    Ok(path)
}

/// Shortest decimal form of a time for use in file names.
fn time_tag(t: f64) -> String {
    format!("{t}")
}

fn solve_csv(solver: &Solver, cfg: &RunConfig) -> Result<String, CliError> {
    let points: Vec<Configuration> = if cfg.points.is_empty() {
        let mut pts = Vec::new();
        for &t in &cfg.times {
            let r = solver.data().support().grown(t);
            let (lo, hi) = (r.ph_lo.min(r.el_lo), r.ph_hi.max(r.el_hi));
            let n = cfg.grid_n;
            let axis: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
            for &x in &axis {
                for &y in &axis {
                    if solver.is_free() || x <= y {
                        pts.push(Configuration::equal_time(t, x, y));
                    }
                }
            }
        }
        pts
    } else {
        cfg.points.iter().map(|p| Configuration::new(p[0], p[1], p[2], p[3])).collect()
    };
    let values = points
        .par_iter()
        .map(|q| solver.evaluate_tagged(q))
        .collect::<crate::error::Result<Vec<_>>>()
        .map_err(numeric("solver"))?;
    let mut s = String::from("t_ph,s_ph,t_el,s_el,region,mm_re,mm_im,mp_re,mp_im,pm_re,pm_im,pp_re,pp_im\n");
    for (q, (tag, psi)) in points.iter().zip(values) {
        let _ = write!(
            s,
            "{},{},{},{},{}",
            fmt_num(q.t_ph),
            fmt_num(q.s_ph),
            fmt_num(q.t_el),
            fmt_num(q.s_el),
            tag.label()
        );
        for c in psi.to_array() {
            let _ = write!(s, ",{},{}", fmt_num(c.re), fmt_num(c.im));
        }
        s.push('\n');
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
struct SliceSummary {
    t: f64,
    file: String,
    grid_n: usize,
    /// Riemann sum of ρ over the grid (a coarse probability check).
    grid_total: f64,
    max_rho: f64,
    peak_min_prominence: f64,
    peaks: Vec<Peak>,
}

fn slice(solver: &Solver, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    let mut summary = Vec::new();
    for &t in &cfg.times {
        let grid = density_grid(solver, t, cfg.grid_n).map_err(numeric("current"))?;
        let mut s = String::from("t,s_ph,s_el,rho,J1,J2\n");
        let nc = grid.s_el.len();
        for (idx, d) in grid.values.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt_num(t),
                fmt_num(grid.s_ph[idx / nc]),
                fmt_num(grid.s_el[idx % nc]),
                fmt_num(d.rho),
                fmt_num(d.j[0]),
                fmt_num(d.j[1])
            );
        }
        let name = format!("slice_{}.csv", time_tag(t));
        files.push(write_file(out, &name, &s)?);
        summary.push(SliceSummary {
            t,
            file: name,
            grid_n: cfg.grid_n,
            grid_total: grid.riemann_total(),
            max_rho: grid.values.iter().map(|d| d.rho).fold(0.0, f64::max),
            peak_min_prominence: PEAK_PROMINENCE,
            peaks: density_peaks(&grid, PEAK_PROMINENCE),
        });
    }
    files.push(write_file(out, "slice_summary.json", &to_json(&summary))?);
    Ok(files)
}

fn trajectory_options(cfg: &RunConfig) -> TrajectoryOptions {
    TrajectoryOptions { dt: cfg.dt, dt_min: cfg.dt.min(1e-6), t_max: cfg.t_max, ..TrajectoryOptions::default() }
}

/// Trajectory CSV rows: every `stride`-th sample and always the last one.
pub fn trajectory_csv(trajectories: &[Trajectory], stride: usize) -> String {
    let mut s = String::from("traj_id,t,q_ph,q_el,status\n");
    for (id, tr) in trajectories.iter().enumerate() {
        let last = tr.samples.len() - 1;
        for (k, p) in tr.samples.iter().enumerate() {
            if k % stride == 0 || k == last {
                let status = if k == last { tr.status } else { TrajectoryStatus::Alive };
                let _ = writeln!(s, "{id},{},{},{},{}", fmt_num(p.t), fmt_num(p.q_ph), fmt_num(p.q_el), status.label());
            }
        }
    }
    s
}

#[derive(Debug, Serialize)]
struct TrajectorySummary {
    traj_id: usize,
    q0: (f64, f64),
    status: TrajectoryStatus,
    t_end: f64,
    q_end: (f64, f64),
    /// Smallest q_el − q_ph; negative means the particles crossed.
    min_separation: f64,
    crossed: bool,
}

fn summarize(trs: &[Trajectory]) -> Vec<TrajectorySummary> {
    trs.iter()
        .enumerate()
        .map(|(id, tr)| {
            let (first, last) = (tr.samples[0], tr.last());
            let min_separation = tr.min_separation();
            TrajectorySummary {
                traj_id: id,
                q0: (first.q_ph, first.q_el),
                status: tr.status,
                t_end: last.t,
                q_end: (last.q_ph, last.q_el),
                min_separation,
                crossed: min_separation < 0.0,
            }
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct ThetaRun {
    theta: f64,
    file: String,
    /// Largest |Δq| against the base run over common sample times.
    sup_difference: f64,
}

#[derive(Debug, Serialize)]
struct TrajectoriesReport {
    omega: f64,
    theta: f64,
    dt: f64,
    t_max: f64,
    interacting: Vec<TrajectorySummary>,
    free: Vec<TrajectorySummary>,
    theta_sweep: Vec<ThetaRun>,
}

fn integrate_all(solver: &Solver, q0: &[(f64, f64)], opts: &TrajectoryOptions) -> Result<Vec<Trajectory>, CliError> {
    q0.par_iter()
        .map(|&q| integrate_trajectory(solver, q, opts))
        .collect::<crate::error::Result<Vec<_>>>()
        .map_err(numeric("trajectories"))
}

/// Largest coordinate difference between two trajectory sets, compared at
/// the sample times they share.
pub fn sup_difference(a: &[Trajectory], b: &[Trajectory]) -> f64 {
    let mut sup: f64 = 0.0;
    for (ta, tb) in a.iter().zip(b) {
        let mut j = 0;
        for sa in &ta.samples {
            while j < tb.samples.len() && tb.samples[j].t < sa.t {
                j += 1;
            }
            if let Some(sb) = tb.samples.get(j).filter(|sb| sb.t == sa.t) {
                sup = sup.max((sa.q_ph - sb.q_ph).abs()).max((sa.q_el - sb.q_el).abs());
            }
        }
        if ta.status != tb.status {
            sup = f64::INFINITY;
        }
    }
    sup
}

fn trajectories(solver: &Solver, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let opts = trajectory_options(cfg);
    let interacting = integrate_all(solver, &cfg.q0, &opts)?;
    let mut files = vec![write_file(out, "traj.csv", &trajectory_csv(&interacting, cfg.csv_stride))?];
    let mut free = Vec::new();
    if cfg.free_overlay {
        let free_solver = Solver::new(solver.data().clone(), solver.config().free()).map_err(numeric("solver"))?;
        free = integrate_all(&free_solver, &cfg.q0, &opts)?;
        files.push(write_file(out, "traj_free.csv", &trajectory_csv(&free, cfg.csv_stride))?);
    }
    let mut sweep = Vec::new();
    for &theta in &cfg.theta_sweep {
        let data = solver.data().with_theta(theta);
        let s = Solver::new(data, *solver.config()).map_err(numeric("solver"))?;
        let trs = integrate_all(&s, &cfg.q0, &opts)?;
        let name = format!("traj_theta_{}.csv", time_tag(theta));
        files.push(write_file(out, &name, &trajectory_csv(&trs, cfg.csv_stride))?);
        sweep.push(ThetaRun { theta, file: name, sup_difference: sup_difference(&interacting, &trs) });
    }
    let report = TrajectoriesReport {
        omega: cfg.omega,
        theta: solver.data().theta(),
        dt: opts.dt,
        t_max: opts.t_max,
        interacting: summarize(&interacting),
        free: summarize(&free),
        theta_sweep: sweep,
    };
    files.push(write_file(out, "trajectories.json", &to_json(&report))?);
    Ok(files)
}

#[derive(Debug, Serialize)]
struct EnsembleReport {
    seed: u64,
    n: usize,
    checkpoints: Vec<CheckpointStats>,
    graveyard_fraction: f64,
    marginal_cells: usize,
    /// Whether every checkpoint has both KS distances below the 99% critical value.
    ks_pass: bool,
}

fn ensemble(solver: &Solver, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut opts = trajectory_options(cfg);
    let last_cp = cfg.checkpoints.iter().copied().fold(0.0, f64::max);
    opts.t_max = opts.t_max.max(last_cp);
    let grid = MarginalGrid { cells: cfg.marginal_cells, ..MarginalGrid::default() };
    let res = run_ensemble(solver, cfg.n, cfg.seed, &cfg.checkpoints, &opts, grid).map_err(numeric("trajectories"))?;
    let ks_pass = res.checkpoints.iter().all(|c| c.ks_ph < c.ks_critical_99 && c.ks_el < c.ks_critical_99);
    let report = EnsembleReport {
        seed: res.seed,
        n: res.n,
        checkpoints: res.checkpoints.clone(),
        graveyard_fraction: res.graveyard_fraction,
        marginal_cells: grid.cells,
        ks_pass,
    };
    Ok(vec![
        write_file(out, "ensemble_traj.csv", &trajectory_csv(&res.trajectories, cfg.csv_stride))?,
        write_file(out, "ensemble.json", &to_json(&report))?,
    ])
}

/// Verify settings derived from a run configuration.
pub fn verify_settings(cfg: &RunConfig) -> VerifySettings {
    VerifySettings {
        probes: ProbeSpec { count: cfg.probe_count, seed: cfg.probe_seed, ..ProbeSpec::default() },
        conservation_cells: cfg.conservation_cells,
        rapidity: cfg.rapidity,
        mutations: cfg.mutations,
        ..VerifySettings::default()
    }
}

fn verify(solver: &Solver, cfg: &RunConfig) -> Result<VerifySummary, CliError> {
    verify_all(solver, &verify_settings(cfg)).map_err(numeric("verify"))
}

//! Residual checks of the solver against the equations it is meant to solve.
//!
//! Each check evaluates Ψ at deterministic probe points (fixed seed, canonical
//! order), measures a residual and reports the worst case. The checks are
//! independent of how Ψ is computed: derivatives are central finite
//! differences, probabilities are grid quadratures and the boundary condition
//! is tested on the returned values.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::current::{current_tensor, max_initial_density};
use crate::error::Result;
use crate::initdata::KillingVector;
use crate::solver::{classify, Configuration, RegionTag, Solver, SolverConfig, SpinorValue};
use crate::trajectories::total_probability;

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-4;
/// Pass threshold of the first-order system residual (relative).
pub const SYSTEM_TOL: f64 = 1e-3;
/// Pass threshold of the boundary-condition residual (absolute).
pub const BC_TOL: f64 = 1e-6;
/// Pass threshold of |∬ρ − 1|.
pub const CONSERVATION_TOL: f64 = 1e-3;
/// Pass threshold of the boosted boundary residuals (absolute).
pub const LORENTZ_TOL: f64 = 1e-6;

/// Which number of a report is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Abs,
    Rel,
}

/// Worst residual of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation_id: String,
    pub probe_count: usize,
    pub max_abs: f64,
    pub max_rel: f64,
    pub worst_point: Configuration,
    pub measure: Measure,
    pub threshold: f64,
    pub pass: bool,
}

impl ResidualReport {
    fn finish(equation_id: &str, rows: &[(f64, f64, Configuration)], measure: Measure, threshold: f64) -> Self {
        let mut rep = ResidualReport {
            equation_id: equation_id.to_string(),
            probe_count: rows.len(),
            max_abs: 0.0,
            max_rel: 0.0,
            worst_point: rows.first().map_or(Configuration::new(0.0, 0.0, 0.0, 0.0), |r| r.2),
            measure,
            threshold,
            pass: true,
        };
        let mut worst = f64::NEG_INFINITY;
        for &(abs, rel, q) in rows {
            rep.max_abs = rep.max_abs.max(abs);
            rep.max_rel = rep.max_rel.max(rel);
            let key = if measure == Measure::Abs { abs } else { rel };
            if key > worst {
                worst = key;
                rep.worst_point = q;
            }
        }
        let value = self::value(&rep);
        rep.pass = value.is_finite() && value <= threshold;
        rep
    }

    /// The number compared with the threshold.
    pub fn value(&self) -> f64 {
        value(self)
    }
}

fn value(rep: &ResidualReport) -> f64 {
    match rep.measure {
        Measure::Abs => rep.max_abs,
        Measure::Rel => rep.max_rel,
    }
}

/// Where interior probes are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeRegion {
    R1,
    R2,
    Both,
}

/// Probe-generation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub count: usize,
    pub seed: u64,
    pub region: ProbeRegion,
    pub t_min: f64,
    pub t_max: f64,
    /// Minimum distance from 𝓑 and from the light cone.
    pub collar: f64,
    /// Minimum Σ|ψ|² relative to the largest initial value; keeps probes where
    /// the wave function is not negligible.
    pub min_rel_density: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self {
            count: 100,
            seed: 7,
            region: ProbeRegion::Both,
            t_min: 0.05,
            t_max: 1.0,
            collar: 20.0 * FD_STEP,
            min_rel_density: 1e-4,
        }
    }
}

/// Deterministic interior probes of R1/R2 with independent particle times.
///
/// Candidates are drawn from one ChaCha8 stream and accepted in order, so the
/// list depends only on the spec and the solver.
pub fn generate_probes(solver: &Solver, spec: &ProbeSpec) -> Result<Vec<Configuration>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let floor = spec.min_rel_density * 4.0 * max_initial_density(solver.data());
    let mut out = Vec::with_capacity(spec.count);
    let mut tries = 0usize;
    while out.len() < spec.count && tries < 1000 * spec.count.max(1) {
        tries += 1;
        let t_ph = rng.gen_range(spec.t_min..=spec.t_max);
        let t_el = rng.gen_range(spec.t_min..=spec.t_max);
        let g = solver.data().support().grown(t_ph.max(t_el));
        let s_ph = rng.gen_range(g.ph_lo..=g.ph_hi);
        let s_el = rng.gen_range(g.el_lo..=g.el_hi);
        let q = Configuration::new(t_ph, s_ph, t_el, s_el);
        let tag = classify(&q);
        let wanted = match spec.region {
            ProbeRegion::R1 => tag == RegionTag::R1,
            ProbeRegion::R2 => tag == RegionTag::R2,
            ProbeRegion::Both => matches!(tag, RegionTag::R1 | RegionTag::R2),
        };
        let ds = s_el - s_ph;
        let clear_b = (q.p() - (s_el - t_el)).abs() > spec.collar;
        let clear_cone = ds - (t_el - t_ph).abs() > spec.collar;
        if !wanted || !clear_b || !clear_cone {
            continue;
        }
        if solver.evaluate(&q)?.norm_sqr() < floor {
            continue;
        }
        out.push(q);
    }
    Ok(out)
}

/// Residuals of the eight first-order equations at one probe, with the
/// mass-term scale ω·max|ψ| used for the relative residual.
fn system_residual(solver: &Solver, q: &Configuration, omega: f64) -> Result<(f64, f64)> {
    let h = FD_STEP;
    let at = |dtp: f64, dsp: f64, dte: f64, dse: f64| {
        solver.evaluate(&Configuration::new(q.t_ph + dtp, q.s_ph + dsp, q.t_el + dte, q.s_el + dse))
    };
    let c = at(0.0, 0.0, 0.0, 0.0)?;
    let d = |a: SpinorValue, b: SpinorValue| -> [Complex64; 4] {
        let (a, b) = (a.to_array(), b.to_array());
        [0, 1, 2, 3].map(|k| (a[k] - b[k]) / (2.0 * h))
    };
    let dtp = d(at(h, 0.0, 0.0, 0.0)?, at(-h, 0.0, 0.0, 0.0)?);
    let dsp = d(at(0.0, h, 0.0, 0.0)?, at(0.0, -h, 0.0, 0.0)?);
    let dte = d(at(0.0, 0.0, h, 0.0)?, at(0.0, 0.0, -h, 0.0)?);
    let dse = d(at(0.0, 0.0, 0.0, h)?, at(0.0, 0.0, 0.0, -h)?);
    let v = c.to_array();
    let (mm, mp, pm, pp) = (0, 1, 2, 3);
    let w = Complex64::new(0.0, omega);
    let residuals = [
        // Photon transport: ψ₋· move right, ψ₊· move left.
        dtp[mm] + dsp[mm],
        dtp[mp] + dsp[mp],
        dtp[pm] - dsp[pm],
        dtp[pp] - dsp[pp],
        // Electron: (∂t − ∂s)ψ·₊ = −iωψ·₋, (∂t + ∂s)ψ·₋ = −iωψ·₊.
        dte[mp] - dse[mp] + w * v[mm],
        dte[mm] + dse[mm] + w * v[mp],
        dte[pp] - dse[pp] + w * v[pm],
        dte[pm] + dse[pm] + w * v[pp],
    ];
    let abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.norm()));
    let scale = omega * c.max_abs();
    Ok((abs, if scale > 0.0 { abs / scale } else { 0.0 }))
}

/// First-order system residuals at the probes, with the solver's own ω.
pub fn check_multitime_system(solver: &Solver, probes: &[Configuration]) -> Result<ResidualReport> {
    check_multitime_system_with_omega(solver, probes, solver.config().omega)
}

/// As [`check_multitime_system`], but the equations use `omega_ref`; a solver
/// built with a different ω must then fail.
pub fn check_multitime_system_with_omega(
    solver: &Solver,
    probes: &[Configuration],
    omega_ref: f64,
) -> Result<ResidualReport> {
    let rows: Vec<(f64, f64, Configuration)> = probes
        .par_iter()
        .map(|q| system_residual(solver, q, omega_ref).map(|(a, r)| (a, r, *q)))
        .collect::<Result<_>>()?;
    Ok(ResidualReport::finish("multitime_system", &rows, Measure::Rel, SYSTEM_TOL))
}

/// Points (t, s, t, s) of 𝒞: `per_time` values of s spread over the part of
/// the diagonal reachable from the support, for each t.
pub fn coincidence_points(solver: &Solver, times: &[f64], per_time: usize) -> Vec<Configuration> {
    let mut out = Vec::new();
    for &t in times {
        let g = solver.data().support().grown(t);
        let (lo, hi) = (g.ph_lo.max(g.el_lo), g.ph_hi.min(g.el_hi));
        if lo > hi {
            continue;
        }
        for k in 0..per_time {
            let s = lo + (hi - lo) * (k as f64 + 0.5) / per_time as f64;
            out.push(Configuration::new(t, s, t, s));
        }
    }
    out
}

/// |ψ₋₊ − e^{iθ}κ ψ₊₋| on 𝒞 with the solver's own boundary coefficient.
pub fn check_boundary_condition(solver: &Solver, points: &[Configuration]) -> Result<ResidualReport> {
    check_boundary_condition_with(solver, points, solver.data().boundary_coefficient())
}

/// As [`check_boundary_condition`] with an explicit reference coefficient.
pub fn check_boundary_condition_with(
    solver: &Solver,
    points: &[Configuration],
    coefficient: Complex64,
) -> Result<ResidualReport> {
    let vals: Vec<SpinorValue> = points.par_iter().map(|q| solver.evaluate(q)).collect::<Result<_>>()?;
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.mp.norm()));
    let rows: Vec<(f64, f64, Configuration)> = vals
        .iter()
        .zip(points)
        .map(|(v, q)| {
            let abs = (v.mp - coefficient * v.pm).norm();
            (abs, if peak > 0.0 { abs / peak } else { 0.0 }, *q)
        })
        .collect();
    Ok(ResidualReport::finish("boundary_condition", &rows, Measure::Abs, BC_TOL))
}

/// |∬ρ(t,·) − 1| for each t on a `cells`² grid with `order`² nodes per cell.
pub fn check_conservation(solver: &Solver, times: &[f64], cells: usize, order: usize) -> Result<ResidualReport> {
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let p = total_probability(solver, t, cells, order)?;
        let abs = (p - 1.0).abs();
        rows.push((abs, abs, Configuration::equal_time(t, f64::NAN, f64::NAN)));
    }
    Ok(ResidualReport::finish("probability_conservation", &rows, Measure::Abs, CONSERVATION_TOL))
}

/// Boost check on 𝒞: components scaled by (e^{3a/2}, e^{a/2}, e^{−a/2}, e^{−3a/2})
/// and X boosted by rapidity `a` must satisfy the boundary condition with the
/// boosted coefficient and have j⁰¹ = j¹⁰. The coefficient identity
/// κ(X') = e^a κ(X) is folded into the residual.
pub fn check_lorentz_covariance(solver: &Solver, a: f64, points: &[Configuration]) -> Result<ResidualReport> {
    let x = solver.data().killing();
    let xb: KillingVector = x.boosted(a);
    let theta = solver.data().theta();
    let coeff = Complex64::from_polar(xb.boundary_ratio(), theta);
    let identity = (xb.boundary_ratio() - a.exp() * x.boundary_ratio()).abs();
    let w = [1.5 * a, 0.5 * a, -0.5 * a, -1.5 * a].map(f64::exp);
    let vals: Vec<SpinorValue> = points.par_iter().map(|q| solver.evaluate(q)).collect::<Result<_>>()?;
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.max_abs()));
    let mut rows = Vec::with_capacity(points.len());
    for (v, q) in vals.iter().zip(points) {
        let b = SpinorValue::new(v.mm * w[0], v.mp * w[1], v.pm * w[2], v.pp * w[3]);
        let bc = (b.mp - coeff * b.pm).norm();
        let j = current_tensor(&b, &xb)?;
        let abs = bc.max((j.j01 - j.j10).abs()).max(identity);
        rows.push((abs, if peak > 0.0 { abs / peak } else { 0.0 }, *q));
    }
    Ok(ResidualReport::finish("lorentz_covariance", &rows, Measure::Abs, LORENTZ_TOL))
}

/// The mutation a sensitivity check applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    Omega,
    Theta,
    Frame,
}

/// Outcome of a mutation check: the residual of the mutated solver must
/// exceed ten times the pass threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationReport {
    pub mutation: Mutation,
    pub relative_change: f64,
    pub report: ResidualReport,
    pub detected: bool,
}

/// Perturbs ω, θ or X by `rel` (5% by default) in a copy of the solver and
/// runs the check that is meant to see it, against the unperturbed reference.
pub fn mutation_check(
    solver: &Solver,
    mutation: Mutation,
    rel: f64,
    probes: &[Configuration],
    coincidence: &[Configuration],
) -> Result<MutationReport> {
    let data = solver.data().clone();
    let cfg: SolverConfig = *solver.config();
    let (theta, x) = (data.theta(), data.killing());
    let report = match mutation {
        Mutation::Omega => {
            let mut c = cfg;
            c.omega *= 1.0 + rel;
            let mutated = Solver::new(data, c)?;
            check_multitime_system_with_omega(&mutated, probes, cfg.omega)?
        }
        Mutation::Theta => {
            // A relative change of θ = 0 is no change; perturb by rel radians then.
            let dtheta = if theta == 0.0 { rel } else { rel * theta };
            let mutated = Solver::with_boundary(data.clone(), cfg, theta + dtheta, x)?;
            check_boundary_condition_with(&mutated, coincidence, data.boundary_coefficient())?
        }
        Mutation::Frame => {
            // Boost X so that the coefficient modulus changes by the factor 1 + rel.
            let mutated = Solver::with_boundary(data.clone(), cfg, theta, x.boosted((1.0 + rel).ln()))?;
            check_boundary_condition_with(&mutated, coincidence, data.boundary_coefficient())?
        }
    };
    let detected = report.value() > 10.0 * report.threshold;
    Ok(MutationReport { mutation, relative_change: rel, report, detected })
}

/// Settings of [`verify_all`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub probes: ProbeSpec,
    pub bc_times: Vec<f64>,
    pub bc_points_per_time: usize,
    pub conservation_times: Vec<f64>,
    pub conservation_cells: usize,
    pub conservation_order: usize,
    pub rapidity: f64,
    pub mutations: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            probes: ProbeSpec::default(),
            bc_times: vec![0.3, 0.45, 0.6, 0.75, 0.9],
            bc_points_per_time: 10,
            conservation_times: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            conservation_cells: 100,
            conservation_order: 4,
            rapidity: 0.3,
            mutations: true,
        }
    }
}

/// All residual checks and, optionally, the mutation checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub reports: Vec<ResidualReport>,
    pub mutations: Vec<MutationReport>,
    pub pass: bool,
}

/// Runs every check with the given settings.
pub fn verify_all(solver: &Solver, settings: &VerifySettings) -> Result<VerifySummary> {
    let probes = generate_probes(solver, &settings.probes)?;
    let coincidence = coincidence_points(solver, &settings.bc_times, settings.bc_points_per_time);
    let mut reports = vec![check_multitime_system(solver, &probes)?, check_boundary_condition(solver, &coincidence)?];
    if !settings.conservation_times.is_empty() {
        reports.push(check_conservation(
            solver,
            &settings.conservation_times,
            settings.conservation_cells,
            settings.conservation_order,
        )?);
    }
    reports.push(check_lorentz_covariance(solver, settings.rapidity, &coincidence)?);
    let mut mutations = Vec::new();
    if settings.mutations {
        for m in [Mutation::Omega, Mutation::Theta, Mutation::Frame] {
            mutations.push(mutation_check(solver, m, 0.05, &probes, &coincidence)?);
        }
    }
    let pass = reports.iter().all(|r| r.pass) && mutations.iter().all(|m| m.detected);
    Ok(VerifySummary { reports, mutations, pass })
}

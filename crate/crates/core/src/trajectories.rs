//! Bohmian world-lines on common-time slices, Born-rule sampling, ensembles
//! and their statistics.
//!
//! Trajectories are integrated with classical fourth-order Runge–Kutta in the
//! rest frame X = (1, 0) of the data. Steps never jump over requested
//! checkpoint times, so positions at a checkpoint are exact step ends. A step
//! that would put the photon at or beyond the electron is retried with half
//! the step; below `dt_min` the trajectory is retired as hitting the
//! boundary. A node (ρ ≤ eps_node) at any stage retires it as well.
//!
//! Equal-time densities are integrated over a uniform cell grid with tensor
//! Gauss–Legendre rules on each cell; cells cut by the diagonal s_ph = s_el
//! are integrated over the triangle inside the wedge with a collapsed
//! (Duffy) map so no node falls on or beyond the diagonal. Regions where a
//! coarse pre-scan shows a negligible density are skipped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::current::{default_eps_node, density_flux, max_initial_density, velocity_of};
use crate::error::{Error, Result};
use crate::initdata::InitialData;
use crate::quadrature::gl_small;
use crate::solver::Solver;

/// Tolerance on X − (1, 0) below which the data count as rest-frame data.
pub const REST_FRAME_TOL: f64 = 1e-6;

/// How a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Alive,
    GraveyardNode,
    GraveyardBoundary,
    ReachedTmax,
}

impl TrajectoryStatus {
    pub fn label(&self) -> &'static str {
        match self {
            TrajectoryStatus::Alive => "alive",
            TrajectoryStatus::GraveyardNode => "graveyard_node",
            TrajectoryStatus::GraveyardBoundary => "graveyard_boundary",
            TrajectoryStatus::ReachedTmax => "reached_tmax",
        }
    }

    /// Retired to the graveyard configuration.
    pub fn is_graveyard(&self) -> bool {
        matches!(self, TrajectoryStatus::GraveyardNode | TrajectoryStatus::GraveyardBoundary)
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub q_ph: f64,
    pub q_el: f64,
}

/// A world-line pair sampled at every accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    /// Position at time `t` if `t` is one of the recorded step ends.
    pub fn at(&self, t: f64) -> Option<Sample> {
        self.samples.iter().find(|s| s.t == t).copied()
    }

    /// Smallest q_el − q_ph over the recorded samples.
    pub fn min_separation(&self) -> f64 {
        self.samples.iter().map(|s| s.q_el - s.q_ph).fold(f64::INFINITY, f64::min)
    }

    /// Last recorded sample.
    pub fn last(&self) -> Sample {
        *self.samples.last().expect("a trajectory has at least its initial sample")
    }
}

/// Integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    pub dt: f64,
    pub dt_min: f64,
    pub t_max: f64,
    /// Node threshold; `None` means 1e-12 of the largest initial density.
    pub eps_node: Option<f64>,
    /// Times at which steps must land exactly.
    pub checkpoints: Vec<f64>,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { dt: 1e-3, dt_min: 1e-6, t_max: 1.0, eps_node: None, checkpoints: Vec::new() }
    }
}

impl TrajectoryOptions {
    fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.dt) || !pos(self.dt_min) || !pos(self.t_max) || self.dt_min > self.dt {
            return Err(Error::Precondition(format!(
                "need 0 < dt_min <= dt and t_max > 0, got dt={}, dt_min={}, t_max={}",
                self.dt, self.dt_min, self.t_max
            )));
        }
        Ok(())
    }
}

fn check_rest_frame(data: &InitialData) -> Result<()> {
    let x = data.killing();
    if (x.x0 - 1.0).abs() > REST_FRAME_TOL || x.x1.abs() > REST_FRAME_TOL {
        return Err(Error::Precondition(format!(
            "trajectories are integrated in the rest frame; the data have X = ({}, {})",
            x.x0, x.x1
        )));
    }
    Ok(())
}

enum StepOutcome {
    Accepted(f64, f64),
    Crossing,
    Node,
}

/// Integrates one trajectory from q0 = (q_ph, q_el) at t = 0.
pub fn integrate_trajectory(solver: &Solver, q0: (f64, f64), opts: &TrajectoryOptions) -> Result<Trajectory> {
    let eps = match opts.eps_node {
        Some(e) => e,
        None => default_eps_node(solver.data()),
    };
    integrate_with_eps(solver, q0, opts, eps)
}

fn integrate_with_eps(solver: &Solver, q0: (f64, f64), opts: &TrajectoryOptions, eps: f64) -> Result<Trajectory> {
    opts.validate()?;
    check_rest_frame(solver.data())?;
    let wedge = !solver.is_free();
    let (q_ph, q_el) = q0;
    if !q_ph.is_finite() || !q_el.is_finite() || (wedge && !(q_ph < q_el)) {
        return Err(Error::Precondition(format!("initial configuration ({q_ph}, {q_el}) is not in the wedge")));
    }
    let df0 = density_flux(solver, 0.0, q_ph, q_el)?;
    if !(df0.rho > eps) {
        return Err(Error::Precondition(format!("initial configuration ({q_ph}, {q_el}) sits at a node")));
    }
    let mut checkpoints: Vec<f64> = opts.checkpoints.iter().copied().filter(|&c| c > 0.0 && c < opts.t_max).collect();
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.push(opts.t_max);
    let mut next_cp = 0;

    let mut samples = vec![Sample { t: 0.0, q_ph, q_el }];
    let (mut t, mut x, mut y) = (0.0, q_ph, q_el);
    let velocity = |t: f64, x: f64, y: f64| -> Result<Option<(f64, f64)>> {
        match velocity_of(&density_flux(solver, t, x, y)?, eps) {
            Ok(v) => Ok(Some((v.v_ph, v.v_el))),
            Err(Error::Node { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let step = |t: f64, x: f64, y: f64, h: f64| -> Result<StepOutcome> {
        let mut ks = [(0.0, 0.0); 4];
        let offsets = [0.0, 0.5, 0.5, 1.0];
        for i in 0..4 {
            let (px, py) =
                if i == 0 { (x, y) } else { (x + offsets[i] * h * ks[i - 1].0, y + offsets[i] * h * ks[i - 1].1) };
            if wedge && !(px < py) {
                return Ok(StepOutcome::Crossing);
            }
            match velocity(t + offsets[i] * h, px, py)? {
                Some(v) => ks[i] = v,
                None => return Ok(StepOutcome::Node),
            }
        }
        let vx = (ks[0].0 + 2.0 * ks[1].0 + 2.0 * ks[2].0 + ks[3].0) / 6.0;
        let vy = (ks[0].1 + 2.0 * ks[1].1 + 2.0 * ks[2].1 + ks[3].1) / 6.0;
        let (nx, ny) = (x + h * vx, y + h * vy);
        if wedge && !(nx < ny) {
            return Ok(StepOutcome::Crossing);
        }
        Ok(StepOutcome::Accepted(nx, ny))
    };

    let status = loop {
        let target = checkpoints[next_cp];
        let mut h = opts.dt.min(target - t);
        let landed = loop {
            match step(t, x, y, h)? {
                StepOutcome::Accepted(nx, ny) => break Some((nx, ny)),
                StepOutcome::Node => break None,
                StepOutcome::Crossing => {
                    h *= 0.5;
                    if h < opts.dt_min {
                        return Ok(Trajectory { samples, status: TrajectoryStatus::GraveyardBoundary });
                    }
                }
            }
        };
        let Some((nx, ny)) = landed else {
            break TrajectoryStatus::GraveyardNode;
        };
        let full = h == target - t;
        t = if full { target } else { t + h };
        x = nx;
        y = ny;
        samples.push(Sample { t, q_ph: x, q_el: y });
        if full {
            next_cp += 1;
            if next_cp == checkpoints.len() {
                break TrajectoryStatus::ReachedTmax;
            }
        }
    };
    Ok(Trajectory { samples, status })
}

/// `n` independent draws from ρ(0,·) restricted to the wedge q_ph < q_el (the
/// whole plane in free mode), by rejection sampling over the support
/// rectangle. Draw `i` uses its own ChaCha8 stream derived from (seed, i).
pub fn sample_initial(data: &InitialData, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    sample_initial_in(data, n, seed, true)
}

fn sample_initial_in(data: &InitialData, n: usize, seed: u64, wedge: bool) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let r = data.support();
    let bound = 1.1 * max_initial_density(data);
    if !(bound > 0.0) {
        return Err(Error::InvalidData("the initial density vanishes".into()));
    }
    const MAX_TRIES: u64 = 1_000_000;
    let mut out = Vec::with_capacity(n);
    let (mut tries, mut accepted) = (0u64, 0u64);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut local = 0u64;
        loop {
            local += 1;
            tries += 1;
            if local > MAX_TRIES {
                return Err(Error::SamplingEfficiency { rate: accepted as f64 / tries as f64 });
            }
            let x = rng.gen_range(r.ph_lo..r.ph_hi);
            let y = rng.gen_range(r.el_lo..r.el_hi);
            let u: f64 = rng.gen();
            if wedge && !(x < y) {
                continue;
            }
            let rho = 0.25 * data.eval(x, y).iter().map(|c| c.norm_sqr()).sum::<f64>();
            if u * bound < rho {
                out.push((x, y));
                accepted += 1;
                break;
            }
        }
    }
    let rate = accepted as f64 / tries as f64;
    if rate < 1e-4 {
        return Err(Error::SamplingEfficiency { rate });
    }
    Ok(out)
}

/// Integrated density of one equal-time slice on a uniform cell grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMasses {
    pub t: f64,
    /// Cell edges, shared by both axes.
    pub edges: Vec<f64>,
    /// Cell masses, row-major with the photon index first.
    pub mass: Vec<f64>,
}

impl SliceMasses {
    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    /// ∬ρ over the grid.
    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Normalised marginal CDF of the photon (`axis` 0) or the electron
    /// (`axis` 1) at the cell edges.
    pub fn marginal_cdf(&self, axis: usize) -> Vec<f64> {
        let n = self.cells();
        let mut col = vec![0.0; n];
        for i in 0..n {
            for k in 0..n {
                let m = self.mass[i * n + k];
                col[if axis == 0 { i } else { k }] += m;
            }
        }
        let total: f64 = col.iter().sum();
        let mut cdf = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for c in col {
            acc += c;
            cdf.push(if total > 0.0 { acc / total } else { 0.0 });
        }
        cdf
    }

    /// Mean of the photon (axis 0) or electron (axis 1) marginal from cell midpoints.
    pub fn marginal_mean(&self, axis: usize) -> f64 {
        let n = self.cells();
        let (mut m, mut w) = (0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                let c = self.mass[i * n + k];
                let j = if axis == 0 { i } else { k };
                m += c * 0.5 * (self.edges[j] + self.edges[j + 1]);
                w += c;
            }
        }
        m / w
    }
}

/// Piecewise-linear evaluation of a CDF given at `edges`.
pub fn interpolate_cdf(edges: &[f64], cdf: &[f64], x: f64) -> f64 {
    if x <= edges[0] {
        return 0.0;
    }
    if x >= edges[edges.len() - 1] {
        return 1.0;
    }
    let h = (edges[edges.len() - 1] - edges[0]) / (edges.len() - 1) as f64;
    let j = (((x - edges[0]) / h) as usize).min(edges.len() - 2);
    let w = (x - edges[j]) / (edges[j + 1] - edges[j]);
    cdf[j] + w * (cdf[j + 1] - cdf[j])
}

/// Relative density below which a pre-scan block (and its neighbours) is skipped.
const SKIP_REL: f64 = 1e-13;

/// Cell masses of ρ(t,·) over the square covering the support grown by t,
/// with `cells` cells per axis and a `order`-point Gauss–Legendre rule per
/// cell direction.
pub fn slice_masses(solver: &Solver, t: f64, cells: usize, order: usize) -> Result<SliceMasses> {
    if cells == 0 || !(1..=8).contains(&order) {
        return Err(Error::Precondition(format!("need cells >= 1 and order in 1..=8, got {cells}, {order}")));
    }
    let wedge = !solver.is_free();
    let r = solver.data().support().grown(t);
    let (lo, hi) = (r.ph_lo.min(r.el_lo), r.ph_hi.max(r.el_hi));
    let h = (hi - lo) / cells as f64;
    let edges: Vec<f64> = (0..=cells).map(|i| lo + h * i as f64).collect();
    let rho = |s_ph: f64, s_el: f64| -> Result<f64> {
        if !r.contains(s_ph, s_el) {
            return Ok(0.0);
        }
        Ok(density_flux(solver, t, s_ph, s_el)?.rho)
    };

    // Coarse pre-scan on blocks of about `block` cells.
    let block = ((0.05 * (hi - lo) / h).round() as usize).clamp(1, cells);
    let nb = cells.div_ceil(block);
    let scan: Vec<f64> = (0..nb * nb)
        .into_par_iter()
        .map(|bi| -> Result<f64> {
            let (ib, kb) = (bi / nb, bi % nb);
            let (x0, x1) = (edges[ib * block], edges[((ib + 1) * block).min(cells)]);
            let (y0, y1) = (edges[kb * block], edges[((kb + 1) * block).min(cells)]);
            let mut m: f64 = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    let sx = x0 + (x1 - x0) * (a as f64 + 0.5) / 3.0;
                    let sy = y0 + (y1 - y0) * (b as f64 + 0.5) / 3.0;
                    if wedge && !(sx < sy) {
                        continue;
                    }
                    m = m.max(rho(sx, sy)?);
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let peak = scan.iter().fold(0.0f64, |a, &b| a.max(b));
    let active_block = |ib: usize, kb: usize| -> bool {
        let mut m: f64 = 0.0;
        for di in -1i64..=1 {
            for dk in -1i64..=1 {
                let (i, k) = (ib as i64 + di, kb as i64 + dk);
                if i >= 0 && k >= 0 && (i as usize) < nb && (k as usize) < nb {
                    m = m.max(scan[i as usize * nb + k as usize]);
                }
            }
        }
        m > SKIP_REL * peak
    };

    let rule = gl_small(order);
    let (nodes, weights) = (rule.nodes(), rule.weights());
    let mass: Vec<f64> = (0..cells * cells)
        .into_par_iter()
        .map(|ci| -> Result<f64> {
            let (i, k) = (ci / cells, ci % cells);
            if !active_block(i / block, k / block) {
                return Ok(0.0);
            }
            let (x0, y0) = (edges[i], edges[k]);
            if wedge && i > k {
                return Ok(0.0);
            }
            let mut acc = 0.0;
            if wedge && i == k {
                // Triangle {x0 ≤ x < y ≤ x0 + h}: y = x0 + h·u, x = x0 + h·u·v.
                for (nu, wu) in nodes.iter().zip(weights) {
                    let u = 0.5 * (nu + 1.0);
                    for (nv, wv) in nodes.iter().zip(weights) {
                        let v = 0.5 * (nv + 1.0);
                        acc += wu * wv * u * rho(x0 + h * u * v, y0 + h * u)?;
                    }
                }
            } else {
                for (nu, wu) in nodes.iter().zip(weights) {
                    for (nv, wv) in nodes.iter().zip(weights) {
                        let sx = x0 + 0.5 * h * (nu + 1.0);
                        let sy = y0 + 0.5 * h * (nv + 1.0);
                        acc += wu * wv * rho(sx, sy)?;
                    }
                }
            }
            Ok(0.25 * h * h * acc)
        })
        .collect::<Result<_>>()?;
    Ok(SliceMasses { t, edges, mass })
}

/// ∬ρ(t,·) over the wedge (whole plane in free mode).
pub fn total_probability(solver: &Solver, t: f64, cells: usize, order: usize) -> Result<f64> {
    Ok(slice_masses(solver, t, cells, order)?.total())
}

/// One-sample Kolmogorov–Smirnov distance between `samples` and a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic KS critical value c(α)/√n for α = 0.05 (1.36) or 0.01 (1.63).
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let c = if alpha <= 0.01 { 1.63 } else { 1.36 };
    c / (n as f64).sqrt()
}

/// Pearson χ² of a 64×64 histogram of positions against cell masses
/// aggregated to the same bins; bins with expectation below 5 are pooled.
pub fn histogram_chi_square(positions: &[(f64, f64)], masses: &SliceMasses) -> (f64, usize) {
    const BINS: usize = 64;
    let n = masses.cells();
    let lo = masses.edges[0];
    let hi = masses.edges[n];
    let bin = |v: f64| (((v - lo) / (hi - lo) * BINS as f64) as usize).min(BINS - 1);
    let mut expected = vec![0.0; BINS * BINS];
    let total = masses.total();
    for i in 0..n {
        for k in 0..n {
            let xm = 0.5 * (masses.edges[i] + masses.edges[i + 1]);
            let ym = 0.5 * (masses.edges[k] + masses.edges[k + 1]);
            expected[bin(xm) * BINS + bin(ym)] += masses.mass[i * n + k] / total * positions.len() as f64;
        }
    }
    let mut observed = vec![0.0; BINS * BINS];
    for &(x, y) in positions {
        observed[bin(x) * BINS + bin(y)] += 1.0;
    }
    let (mut chi, mut dof) = (0.0, 0usize);
    let (mut pool_e, mut pool_o) = (0.0, 0.0);
    for (e, o) in expected.iter().zip(&observed) {
        if *e >= 5.0 {
            chi += (o - e) * (o - e) / e;
            dof += 1;
        } else {
            pool_e += e;
            pool_o += o;
        }
    }
    if pool_e > 0.0 {
        chi += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
        dof += 1;
    }
    (chi, dof.saturating_sub(1))
}

/// Statistics of the ensemble at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub t: f64,
    /// Trajectories that reached t.
    pub n_alive: usize,
    pub ks_ph: f64,
    pub ks_el: f64,
    /// 99% critical value 1.63/√n_alive.
    pub ks_critical_99: f64,
    /// ∬ρ(t,·) of the comparison grid.
    pub grid_mass: f64,
    pub chi_square: f64,
    pub chi_square_dof: usize,
}

/// Result of [`run_ensemble`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub seed: u64,
    pub n: usize,
    pub checkpoints: Vec<CheckpointStats>,
    pub graveyard_fraction: f64,
    pub trajectories: Vec<Trajectory>,
}

/// Comparison-grid settings for ensemble statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalGrid {
    pub cells: usize,
    pub order: usize,
}

impl Default for MarginalGrid {
    /// Cells of about 0.01 for the default data, two GL nodes per direction.
    fn default() -> Self {
        Self { cells: 360, order: 2 }
    }
}

/// Samples `n` initial configurations, integrates them (in parallel, with
/// results independent of scheduling) and compares the empirical marginals
/// with quadrature marginals of ρ at each checkpoint.
pub fn run_ensemble(
    solver: &Solver,
    n: usize,
    seed: u64,
    checkpoints: &[f64],
    opts: &TrajectoryOptions,
    grid: MarginalGrid,
) -> Result<EnsembleResult> {
    let q0 = sample_initial_in(solver.data(), n, seed, !solver.is_free())?;
    let mut opts = opts.clone();
    opts.checkpoints.extend(checkpoints.iter().copied());
    let eps = opts.eps_node.unwrap_or_else(|| default_eps_node(solver.data()));
    let trajectories: Vec<Trajectory> =
        q0.par_iter().map(|&q| integrate_with_eps(solver, q, &opts, eps)).collect::<Result<_>>()?;
    let graves = trajectories.iter().filter(|t| t.status.is_graveyard()).count();
    let mut stats = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        let at: Vec<(f64, f64)> = trajectories.iter().filter_map(|tr| tr.at(t)).map(|s| (s.q_ph, s.q_el)).collect();
        let masses = slice_masses(solver, t, grid.cells, grid.order)?;
        let (cdf_ph, cdf_el) = (masses.marginal_cdf(0), masses.marginal_cdf(1));
        let xs: Vec<f64> = at.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = at.iter().map(|p| p.1).collect();
        let ks_ph = ks_statistic(&xs, |x| interpolate_cdf(&masses.edges, &cdf_ph, x));
        let ks_el = ks_statistic(&ys, |y| interpolate_cdf(&masses.edges, &cdf_el, y));
        let (chi, dof) = histogram_chi_square(&at, &masses);
        stats.push(CheckpointStats {
            t,
            n_alive: at.len(),
            ks_ph,
            ks_el,
            ks_critical_99: ks_critical(at.len().max(1), 0.01),
            grid_mass: masses.total(),
            chi_square: chi,
            chi_square_dof: dof,
        });
    }
    Ok(EnsembleResult { seed, n, checkpoints: stats, graveyard_fraction: graves as f64 / n as f64, trajectories })
}

/// A trajectory whose particles stay closer than `max_gap` for at least `min_duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureCandidate {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
}

/// Windows in which q_el − q_ph < `max_gap` for at least `min_duration`
/// (the longest such window per trajectory).
pub fn capture_candidates(trajectories: &[Trajectory], max_gap: f64, min_duration: f64) -> Vec<CaptureCandidate> {
    let mut out = Vec::new();
    for (index, tr) in trajectories.iter().enumerate() {
        let mut best: Option<(f64, f64)> = None;
        let mut start: Option<f64> = None;
        let mut prev_t = 0.0;
        for s in &tr.samples {
            if s.q_el - s.q_ph < max_gap {
                start.get_or_insert(s.t);
            } else if let Some(t0) = start.take() {
                if best.is_none_or(|(a, b)| prev_t - t0 > b - a) {
                    best = Some((t0, prev_t));
                }
            }
            prev_t = s.t;
        }
        if let Some(t0) = start {
            if best.is_none_or(|(a, b)| prev_t - t0 > b - a) {
                best = Some((t0, prev_t));
            }
        }
        if let Some((a, b)) = best {
            if b - a >= min_duration {
                out.push(CaptureCandidate { index, t_start: a, t_end: b });
            }
        }
    }
    out
}

/// Sampling for [`tt_diagnostics`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticGrid {
    pub times: Vec<f64>,
    /// Points per axis of the interior grid.
    pub n: usize,
    /// Points along the diagonal per time.
    pub n_boundary: usize,
    /// Distances (Euclidean) from the diagonal for the critical-set probe.
    pub distances: Vec<f64>,
}

impl Default for DiagnosticGrid {
    fn default() -> Self {
        Self { times: vec![0.0, 0.25, 0.5, 0.75, 1.0], n: 50, n_boundary: 50, distances: vec![1e-2, 1e-3, 1e-4] }
    }
}

/// Diagnostics of the conditions for global existence of the trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtReport {
    /// max |J|/ρ over interior points with ρ > eps_node (bounded by √2).
    pub max_flux_ratio: f64,
    /// max |J¹ − J²| on the diagonal (zero by the boundary condition).
    pub max_boundary_flux: f64,
    /// max |J·e|/dist near the diagonal, e the unit normal (bounded).
    pub max_critical_integrand: f64,
    pub points: usize,
}

/// Evaluates the diagnostics on the grid; zero data give all zeros.
pub fn tt_diagnostics(solver: &Solver, grid: &DiagnosticGrid) -> Result<TtReport> {
    let eps = default_eps_node(solver.data());
    let r = solver.data().support();
    let mut rep = TtReport { max_flux_ratio: 0.0, max_boundary_flux: 0.0, max_critical_integrand: 0.0, points: 0 };
    for &t in &grid.times {
        let g = r.grown(t);
        let n = grid.n.max(2);
        let pts: Vec<(f64, f64)> = (0..n * n)
            .map(|i| {
                let x = g.ph_lo + (g.ph_hi - g.ph_lo) * (i / n) as f64 / (n - 1) as f64;
                let y = g.el_lo + (g.el_hi - g.el_lo) * (i % n) as f64 / (n - 1) as f64;
                (x, y)
            })
            .filter(|&(x, y)| x < y)
            .collect();
        let ratios: Vec<f64> = pts
            .par_iter()
            .map(|&(x, y)| {
                let df = density_flux(solver, t, x, y)?;
                Ok(if df.rho > eps { df.j[0].hypot(df.j[1]) / df.rho } else { 0.0 })
            })
            .collect::<Result<_>>()?;
        rep.points += pts.len();
        rep.max_flux_ratio = ratios.iter().fold(rep.max_flux_ratio, |a, &b| a.max(b));

        let (lo, hi) = (g.ph_lo.max(g.el_lo), g.ph_hi.min(g.el_hi));
        let nb = grid.n_boundary.max(2);
        for k in 0..nb {
            let s = lo + (hi - lo) * (k as f64 + 0.5) / nb as f64;
            let df = density_flux(solver, t, s, s)?;
            rep.max_boundary_flux = rep.max_boundary_flux.max((df.j[0] - df.j[1]).abs());
            for &d in &grid.distances {
                let off = d / std::f64::consts::SQRT_2;
                let df = density_flux(solver, t, s - off, s + off)?;
                let normal = (df.j[0] - df.j[1]).abs() / std::f64::consts::SQRT_2;
                rep.max_critical_integrand = rep.max_critical_integrand.max(normal / d);
            }
            rep.points += 1 + grid.distances.len();
        }
    }
    Ok(rep)
}

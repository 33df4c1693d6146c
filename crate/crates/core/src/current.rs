//! The conserved tensor current, equal-time density and flux, and the
//! Bohmian velocity field.
//!
//! In components the current contracted with X reads
//!
//! j^{μν} = Σ_ρ X_ρ [ |ψ₋₋|² + (−1)^ν |ψ₋₊|² + (−1)^{μ+ρ} |ψ₊₋|² + (−1)^{μ+ν+ρ} |ψ₊₊|² ]
//!
//! with X₀ = X⁰ and X₁ = −X¹. Summing over ρ gives
//!
//! j^{μν} = (X⁰−X¹)(|ψ₋₋|² + (−1)^ν |ψ₋₊|²) + (X⁰+X¹)((−1)^μ |ψ₊₋|² + (−1)^{μ+ν} |ψ₊₊|²),
//!
//! which is what [`current_tensor`] evaluates. The density and flux on an
//! equal-time slice carry an extra factor ¼ so that the normalised data
//! (π⁰ = ¼∬Σ|ψ̊|² = 1) integrate to total probability one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initdata::{InitialData, KillingVector};
use crate::solver::{Configuration, Solver, SpinorValue};

/// Frame components of j_X^{μν} at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentTensor {
    pub j00: f64,
    pub j01: f64,
    pub j10: f64,
    pub j11: f64,
}

/// Bohmian velocities (fractions of c) of the two particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityPair {
    pub v_ph: f64,
    pub v_el: f64,
}

impl VelocityPair {
    /// Euclidean norm of (v_ph, v_el).
    pub fn norm(&self) -> f64 {
        self.v_ph.hypot(self.v_el)
    }
}

/// Density ρ and flux J = (J¹, J²) on an equal-time slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityFlux {
    pub rho: f64,
    pub j: [f64; 2],
}

/// j_X^{μν} of a spinor value.
///
/// ```
/// use multitime::current::current_tensor;
/// use multitime::initdata::KillingVector;
/// use multitime::solver::SpinorValue;
/// use num_complex::Complex64;
///
/// let one = Complex64::new(1.0, 0.0);
/// let zero = Complex64::new(0.0, 0.0);
/// let j = current_tensor(&SpinorValue::new(zero, one, zero, zero), &KillingVector::REST).unwrap();
/// assert_eq!((j.j00, j.j01, j.j10, j.j11), (1.0, -1.0, 1.0, -1.0));
/// ```
pub fn current_tensor(psi: &SpinorValue, x: &KillingVector) -> Result<CurrentTensor> {
    if !(x.x0 > x.x1.abs()) || !x.x0.is_finite() {
        return Err(Error::Causality { x0: x.x0, x1: x.x1 });
    }
    let [mm, mp, pm, pp] = psi.to_array().map(|c| c.norm_sqr());
    let (wm, wp) = (x.x0 - x.x1, x.x0 + x.x1);
    Ok(CurrentTensor {
        j00: wm * (mm + mp) + wp * (pm + pp),
        j01: wm * (mm - mp) + wp * (pm - pp),
        j10: wm * (mm + mp) - wp * (pm + pp),
        j11: wm * (mm - mp) - wp * (pm - pp),
    })
}

/// Density and flux from a spinor value in the frame of `x`.
pub fn density_flux_of(psi: &SpinorValue, x: &KillingVector) -> Result<DensityFlux> {
    let j = current_tensor(psi, x)?;
    Ok(DensityFlux { rho: 0.25 * j.j00, j: [0.25 * j.j10, 0.25 * j.j01] })
}

/// ρ(t, s_ph, s_el) and J(t, s_ph, s_el) on the common-time slice t.
pub fn density_flux(solver: &Solver, t: f64, s_ph: f64, s_el: f64) -> Result<DensityFlux> {
    let psi = solver.evaluate(&Configuration::equal_time(t, s_ph, s_el))?;
    density_flux_of(&psi, &solver.data().killing())
}

/// Velocity J/ρ from a density–flux pair, or a node error when ρ ≤ eps_node.
pub fn velocity_of(df: &DensityFlux, eps_node: f64) -> Result<VelocityPair> {
    if !(df.rho > eps_node) {
        return Err(Error::Node { rho: df.rho, eps_node });
    }
    Ok(VelocityPair { v_ph: df.j[0] / df.rho, v_el: df.j[1] / df.rho })
}

/// Bohmian velocity at (t, s_ph, s_el).
pub fn velocity(solver: &Solver, t: f64, s_ph: f64, s_el: f64, eps_node: f64) -> Result<VelocityPair> {
    velocity_of(&density_flux(solver, t, s_ph, s_el)?, eps_node)
}

/// Largest initial density ¼Σ|ψ̊|² sampled on a 257² grid over the support.
pub fn max_initial_density(data: &InitialData) -> f64 {
    let r = data.support();
    let n = 257;
    let mut best: f64 = 0.0;
    for i in 0..n {
        let x = r.ph_lo + (r.ph_hi - r.ph_lo) * i as f64 / (n - 1) as f64;
        for k in 0..n {
            let y = r.el_lo + (r.el_hi - r.el_lo) * k as f64 / (n - 1) as f64;
            let rho = 0.25 * data.eval(x, y).iter().map(|c| c.norm_sqr()).sum::<f64>();
            best = best.max(rho);
        }
    }
    best
}

/// Node threshold: 1e-12 of the largest initial density.
pub fn default_eps_node(data: &InitialData) -> f64 {
    1e-12 * max_initial_density(data)
}

/// ρ and J sampled on a square equal-time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub t: f64,
    /// Photon coordinates (grid rows).
    pub s_ph: Vec<f64>,
    /// Electron coordinates (grid columns).
    pub s_el: Vec<f64>,
    /// Row-major values, `values[i * s_el.len() + k]`.
    pub values: Vec<DensityFlux>,
}

impl DensityGrid {
    /// Density at grid node (i, k).
    pub fn rho(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.s_el.len() + k].rho
    }

    /// Riemann-sum estimate of the total probability on the grid.
    pub fn riemann_total(&self) -> f64 {
        let step = |v: &[f64]| if v.len() > 1 { (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64 } else { 0.0 };
        step(&self.s_ph) * step(&self.s_el) * self.values.iter().map(|d| d.rho).sum::<f64>()
    }
}

/// ρ and J on an n×n grid covering the support grown by t, i.e. the square
/// [lo, hi]² with lo/hi the smallest/largest grown support bound. Nodes with
/// the photon to the right of the electron (outside the domain in the
/// interacting theory) and nodes outside the grown support are set to zero.
pub fn density_grid(solver: &Solver, t: f64, n: usize) -> Result<DensityGrid> {
    if n < 2 {
        return Err(Error::Precondition(format!("density grid needs n >= 2, got {n}")));
    }
    let r = solver.data().support().grown(t);
    let (lo, hi) = (r.ph_lo.min(r.el_lo), r.ph_hi.max(r.el_hi));
    let axis: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let zero = DensityFlux { rho: 0.0, j: [0.0, 0.0] };
    let wedge = !solver.is_free();
    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (axis[idx / n], axis[idx % n]);
            if (wedge && x > y) || !r.contains(x, y) {
                Ok(zero)
            } else {
                density_flux(solver, t, x, y)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid { t, s_ph: axis.clone(), s_el: axis, values })
}

/// A local maximum of a sampled density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub s_ph: f64,
    pub s_el: f64,
    pub rho: f64,
    /// Height above the highest saddle connecting it to a higher peak (the
    /// global maximum's prominence is its height).
    pub prominence: f64,
}

/// Local maxima of the grid density whose topographic prominence is at
/// least `min_rel_prominence` times the global maximum, highest first.
///
/// Prominences are found by flooding the 8-connected grid from the top: when
/// two basins meet, the one with the lower summit ends at the current level.
pub fn density_peaks(grid: &DensityGrid, min_rel_prominence: f64) -> Vec<Peak> {
    let (nr, nc) = (grid.s_ph.len(), grid.s_el.len());
    let rho: Vec<f64> = grid.values.iter().map(|d| d.rho).collect();
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| rho[b].total_cmp(&rho[a]).then(a.cmp(&b)));

    const UNSEEN: usize = usize::MAX;
    let mut parent = vec![UNSEEN; rho.len()];
    // Summit of each root's basin.
    let mut summit = vec![0usize; rho.len()];
    let mut prominence: Vec<(usize, f64)> = Vec::new();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &c in &order {
        parent[c] = c;
        summit[c] = c;
        let (i, k) = ((c / nc) as isize, (c % nc) as isize);
        for di in -1..=1isize {
            for dk in -1..=1isize {
                let (a, b) = (i + di, k + dk);
                if (di == 0 && dk == 0) || a < 0 || b < 0 || a >= nr as isize || b >= nc as isize {
                    continue;
                }
                let nb = a as usize * nc + b as usize;
                if parent[nb] == UNSEEN {
                    continue;
                }
                let (ra, rb) = (find(&mut parent, c), find(&mut parent, nb));
                if ra == rb {
                    continue;
                }
                let (sa, sb) = (summit[ra], summit[rb]);
                // The basin with the lower summit dies here.
                let (hi_root, lo_root) = if (rho[sa], std::cmp::Reverse(sa)) >= (rho[sb], std::cmp::Reverse(sb)) {
                    (ra, rb)
                } else {
                    (rb, ra)
                };
                let lo_summit = summit[lo_root];
                if lo_summit != c {
                    prominence.push((lo_summit, rho[lo_summit] - rho[c]));
                }
                parent[lo_root] = hi_root;
            }
        }
    }
    let Some(&top) = order.first() else { return Vec::new() };
    let max = rho[top];
    if !(max > 0.0) {
        return Vec::new();
    }
    prominence.push((top, max));
    let mut peaks: Vec<Peak> = prominence
        .into_iter()
        .filter(|&(_, p)| p >= min_rel_prominence * max)
        .map(|(c, p)| Peak { s_ph: grid.s_ph[c / nc], s_el: grid.s_el[c % nc], rho: rho[c], prominence: p })
        .collect();
    peaks.sort_by(|a, b| b.rho.total_cmp(&a.rho));
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn zero_spinor_has_zero_current() {
        let j = current_tensor(&SpinorValue::ZERO, &KillingVector::REST).unwrap();
        assert_eq!((j.j00, j.j01, j.j10, j.j11), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn space_like_frame_is_rejected() {
        let x = KillingVector { x0: 1.0, x1: 1.0 };
        assert!(matches!(current_tensor(&SpinorValue::ZERO, &x), Err(Error::Causality { .. })));
    }

    #[test]
    fn node_is_reported() {
        let df = DensityFlux { rho: 0.0, j: [0.0, 0.0] };
        assert!(matches!(velocity_of(&df, 1e-12), Err(Error::Node { .. })));
        let one = Complex64::new(1.0, 0.0);
        let df = density_flux_of(&SpinorValue::new(one, one, one, one), &KillingVector::REST).unwrap();
        let v = velocity_of(&df, 0.0).unwrap();
        assert_eq!((v.v_ph, v.v_el), (0.0, 0.0));
    }

    fn grid_of(n: usize, f: impl Fn(f64, f64) -> f64) -> DensityGrid {
        let axis: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let values = (0..n * n).map(|c| DensityFlux { rho: f(axis[c / n], axis[c % n]), j: [0.0, 0.0] }).collect();
        DensityGrid { t: 0.0, s_ph: axis.clone(), s_el: axis, values }
    }

    #[test]
    fn peaks_of_separated_bumps() {
        let bump = |x: f64, y: f64, cx: f64, cy: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / 0.005).exp();
        let g = grid_of(81, |x, y| {
            bump(x, y, 0.2, 0.2) + 0.8 * bump(x, y, 0.8, 0.2) + 0.6 * bump(x, y, 0.2, 0.8) + 0.03 * bump(x, y, 0.8, 0.8)
        });
        let peaks = density_peaks(&g, 0.05);
        assert_eq!(peaks.len(), 3);
        assert!((peaks[0].s_ph - 0.2).abs() < 1e-9 && (peaks[0].s_el - 0.2).abs() < 1e-9);
        assert_eq!(density_peaks(&g, 0.01).len(), 4);
        assert!(density_peaks(&grid_of(5, |_, _| 0.0), 0.05).is_empty());
    }
}

//! Evaluation of the four wave-function components at any configuration of
//! the closed wedge S̄₁ = {space-like or coincident pairs with s_ph ≤ s_el}.
//!
//! The algorithm follows the characteristic structure of the problem:
//!
//! 1. ψ₋₋ and ψ₋₊ (photon moving right) are transported from the initial
//!    surface along the photon characteristic and evolved as a one-body
//!    Klein–Gordon–Dirac pair in the electron variables. Their Cauchy
//!    formulas hold everywhere in S̄₁.
//! 2. ψ₊₋ and ψ₊₊ obey the same formulas in the "far" region R1 (including
//!    its boundary 𝓑: s_ph + t_ph = s_el − t_el).
//! 3. In the "near" region R2, ψ₊₋ solves a Goursat problem whose data are
//!    its own values on 𝓑 (ζ) and the reflected values of ψ₋₊ on the
//!    coincidence set 𝒞 (ξ, from the boundary condition).
//! 4. ψ₊₊ in R2 follows from ∂_{u_el} ψ₊₊ = −iω ψ₊₋ integrated from 𝓑.
//!
//! In the "free" mode the step-2 formulas are used everywhere, which is the
//! non-interacting evolution.

mod cache;
pub mod kernels;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initdata::{InitialData, KillingVector};
use crate::quadrature::{Adaptive, CVec};
use crate::specfun::kernels_sq;
use cache::CharCache;
use kernels::{goursat_core, plus_plus_by_characteristic, LineData};

pub use kernels::{goursat_eval, kg_cauchy_eval, kg_cauchy_eval_mass, CORNER_TOL};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A point (t_ph, s_ph, t_el, s_el) of two-particle configuration spacetime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub t_ph: f64,
    pub s_ph: f64,
    pub t_el: f64,
    pub s_el: f64,
}

impl Configuration {
    pub fn new(t_ph: f64, s_ph: f64, t_el: f64, s_el: f64) -> Self {
        Self { t_ph, s_ph, t_el, s_el }
    }

    /// Both particles at common time t.
    pub fn equal_time(t: f64, s_ph: f64, s_el: f64) -> Self {
        Self { t_ph: t, s_ph, t_el: t, s_el }
    }

    /// Photon argument of the ς₁ = + block, p = s_ph + t_ph.
    pub fn p(&self) -> f64 {
        self.s_ph + self.t_ph
    }

    /// Photon argument of the ς₁ = − block, m = s_ph − t_ph.
    pub fn m(&self) -> f64 {
        self.s_ph - self.t_ph
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.t_ph, self.s_ph, self.t_el, self.s_el)
    }
}

/// Region of configuration spacetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    /// Far region: s_ph + t_ph < s_el − t_el.
    R1,
    /// Near region: s_ph + t_ph > s_el − t_el, strictly space-like.
    R2,
    /// Common boundary 𝓑: s_ph + t_ph = s_el − t_el.
    B,
    /// Coincidence set 𝒞: both events equal.
    C,
    /// Light-like but not coincident, with s_ph < s_el.
    L,
    /// Mirror wedge s_ph > s_el.
    S2,
    /// Time-like separation.
    Outside,
}

impl RegionTag {
    /// Short label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            RegionTag::R1 => "R1",
            RegionTag::R2 => "R2",
            RegionTag::B => "B",
            RegionTag::C => "C",
            RegionTag::L => "L",
            RegionTag::S2 => "S2",
            RegionTag::Outside => "OUTSIDE",
        }
    }
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Tie tolerance for the 𝓑 test, in units of the coordinate magnitude; only
/// absorbs the rounding of the two sums being compared.
const TIE_ULPS: f64 = 4.0 * f64::EPSILON;

/// Region of a configuration. Coincident points are 𝒞 and points on 𝓑 (up to
/// the rounding of the two sums) are 𝓑.
pub fn classify(q: &Configuration) -> RegionTag {
    let ds = q.s_el - q.s_ph;
    let dt = q.t_el - q.t_ph;
    if ds == 0.0 && dt == 0.0 {
        return RegionTag::C;
    }
    if ds.abs() < dt.abs() || ds == 0.0 {
        return RegionTag::Outside;
    }
    if ds < 0.0 {
        return RegionTag::S2;
    }
    let lhs = q.s_ph + q.t_ph;
    let rhs = q.s_el - q.t_el;
    let mag = q.s_ph.abs().max(q.t_ph.abs()).max(q.s_el.abs()).max(q.t_el.abs()).max(1.0);
    if (lhs - rhs).abs() <= TIE_ULPS * mag {
        return RegionTag::B;
    }
    if ds == dt.abs() {
        return RegionTag::L;
    }
    if lhs < rhs {
        RegionTag::R1
    } else {
        RegionTag::R2
    }
}

/// The four components (ψ₋₋, ψ₋₊, ψ₊₋, ψ₊₊) at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinorValue {
    pub mm: Complex64,
    pub mp: Complex64,
    pub pm: Complex64,
    pub pp: Complex64,
}

impl SpinorValue {
    pub const ZERO: SpinorValue = SpinorValue { mm: ZERO, mp: ZERO, pm: ZERO, pp: ZERO };

    pub fn new(mm: Complex64, mp: Complex64, pm: Complex64, pp: Complex64) -> Self {
        Self { mm, mp, pm, pp }
    }

    pub fn from_array(a: [Complex64; 4]) -> Self {
        Self { mm: a[0], mp: a[1], pm: a[2], pp: a[3] }
    }

    pub fn to_array(&self) -> [Complex64; 4] {
        [self.mm, self.mp, self.pm, self.pp]
    }

    /// Σ|ψ|².
    pub fn norm_sqr(&self) -> f64 {
        self.to_array().iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest component modulus.
    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// All components finite.
    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Source of ζ/ξ values inside the Goursat step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CacheMode {
    /// Tabulate ζ, η, ξ on a (p, b) lattice and interpolate (production).
    GridInterpolated,
    /// Evaluate every ζ, η, ξ value by its own Cauchy integral (oracle).
    DirectNested,
}

/// How ψ₊₊ is obtained in the near region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlusPlusRoute {
    /// The characteristic integral ∫U dγ' with its inner integration done in
    /// closed form (one pass over the same ζ/ξ nodes as ψ₊₋).
    Reduced,
    /// Literal quadrature of ∂_{u_el}ψ₊₊ = −iωψ₊₋ along the characteristic,
    /// one Goursat solve per node.
    Characteristic,
}

/// Whether the contact interaction is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interaction {
    /// Reflecting boundary condition on 𝒞 (the interacting dynamics).
    Reflecting,
    /// Far-region formulas everywhere: particles pass through each other.
    Free,
}

/// Numerical settings of the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Electron mass parameter ω = m_el/ħ.
    pub omega: f64,
    /// Absolute quadrature tolerance.
    pub quad_tol: f64,
    /// Lattice step of the ζ/ξ tables.
    pub char_grid_h: f64,
    pub cache_mode: CacheMode,
    pub pp_route: PlusPlusRoute,
    pub interaction: Interaction,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            omega: 2.0,
            quad_tol: 1e-10,
            char_grid_h: 1e-3,
            cache_mode: CacheMode::GridInterpolated,
            pp_route: PlusPlusRoute::Reduced,
            interaction: Interaction::Reflecting,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.omega) || !ok(self.quad_tol) || !ok(self.char_grid_h) {
            return Err(Error::InvalidData(format!(
                "omega, quad_tol and char_grid_h must be positive, got {}, {}, {}",
                self.omega, self.quad_tol, self.char_grid_h
            )));
        }
        Ok(())
    }

    /// Same settings in free (non-interacting) mode.
    pub fn free(mut self) -> Self {
        self.interaction = Interaction::Free;
        self
    }
}

/// Which photon block a Cauchy evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Minus,
    Plus,
}

/// Everything the formulas need, without the cache.
#[derive(Debug, Clone)]
pub(crate) struct Core {
    data: InitialData,
    omega: f64,
    tol: f64,
    coeff: Complex64,
    inv_coeff: Complex64,
    width: f64,
}

impl Core {
    /// ψ_{·−}, ψ_{·+} of one photon block with photon argument x at electron
    /// point (t, s):
    ///   ψ_{·−} = f₋(s−t) − (ω²/2)∫ J₁(ωr)/(ωr)·(t+s−σ) f₋ dσ − (iω/2)∫ J₀(ωr) f₊ dσ,
    ///   ψ_{·+} = f₊(s+t) − (ω²/2)∫ J₁(ωr)/(ωr)·(t−s+σ) f₊ dσ − (iω/2)∫ J₀(ωr) f₋ dσ,
    /// r = √(t² − (s−σ)²), σ ∈ [s−t, s+t], f_± = ψ̊_{·±}(x, ·).
    fn cauchy_block(&self, block: Block, x: f64, t: f64, s: f64) -> Result<(Complex64, Complex64)> {
        let sup = self.data.support();
        if x < sup.ph_lo || x > sup.ph_hi {
            return Ok((ZERO, ZERO));
        }
        let (ia, ib) = match block {
            Block::Minus => (0, 1),
            Block::Plus => (2, 3),
        };
        let in_el = |y: f64| y >= sup.el_lo && y <= sup.el_hi;
        let fa_edge = if in_el(s - t) { self.data.eval(x, s - t)[ia] } else { ZERO };
        let fb_edge = if in_el(s + t) { self.data.eval(x, s + t)[ib] } else { ZERO };
        let (lo, hi) = ((s - t).max(sup.el_lo), (s + t).min(sup.el_hi));
        if !(lo < hi) || t == 0.0 {
            return Ok((fa_edge, fb_edge));
        }
        let w = self.omega;
        let w2 = w * w;
        let quad = Adaptive::new(self.tol / (1.0 + w2), self.width);
        let v = quad.integrate(lo, hi, |sigma| {
            let d = s - sigma;
            let k = kernels_sq(w2 * (t * t - d * d));
            let c = self.data.eval(x, sigma);
            let (fa, fb) = (c[ia], c[ib]);
            CVec([fa * (k.j1_ratio * (t + d)), fb * (k.j1_ratio * (t - d)), fa * k.j0, fb * k.j0])
        })?;
        let [ja, jb, ka, kb] = v.0;
        let a = fa_edge - ja * (0.5 * w2) - I * (0.5 * w) * kb;
        let b = fb_edge - jb * (0.5 * w2) - I * (0.5 * w) * ka;
        Ok((a, b))
    }

    /// (ζ, η) = (ψ₊₋, ψ₊₊) at photon (0, p), electron (b, p + b) — on 𝓑.
    fn plus_on_boundary(&self, p: f64, b: f64) -> Result<(Complex64, Complex64)> {
        self.cauchy_block(Block::Plus, p, b, p + b)
    }

    /// ξ(c) = coefficient⁻¹ · ψ₋₊ at photon = electron = (c, p − c) — on 𝒞.
    fn xi_on_coincidence(&self, p: f64, c: f64) -> Result<Complex64> {
        let (_, mp) = self.cauchy_block(Block::Minus, p - 2.0 * c, c, p - c)?;
        Ok(self.inv_coeff * mp)
    }

    /// Exact (ζ(0), η(0), ξ(0)) from the data at (p, p).
    fn corner_values(&self, p: f64) -> (Complex64, Complex64, Complex64) {
        let v = self.data.eval(p, p);
        (v[2], v[3], self.inv_coeff * v[1])
    }

    /// b-interval where ζ_p, η_p can be nonzero (empty when lo > hi).
    fn zeta_support(&self, p: f64) -> (f64, f64) {
        let s = self.data.support();
        if p < s.ph_lo || p > s.ph_hi || p > s.el_hi {
            return (f64::INFINITY, f64::NEG_INFINITY);
        }
        ((0.5 * (s.el_lo - p)).max(0.0), f64::INFINITY)
    }

    /// c-interval where ξ_p can be nonzero (empty when lo > hi).
    fn xi_support(&self, p: f64) -> (f64, f64) {
        let s = self.data.support();
        if p < s.el_lo {
            return (f64::INFINITY, f64::NEG_INFINITY);
        }
        let lo = (0.5 * (p - s.ph_hi)).max(0.5 * (p - s.el_hi)).max(0.0);
        (lo, 0.5 * (p - s.ph_lo))
    }

    fn zeta_row_nonzero(&self, p: f64) -> bool {
        let (lo, hi) = self.zeta_support(p);
        lo <= hi
    }

    fn xi_row_nonzero(&self, p: f64) -> bool {
        let (lo, hi) = self.xi_support(p);
        lo <= hi
    }

    fn line_width(&self) -> f64 {
        self.width
    }
}

/// Line data evaluated pointwise by Cauchy integrals.
struct DirectLine<'a> {
    core: &'a Core,
    p: f64,
}

impl LineData for DirectLine<'_> {
    fn zeta_eta(&self, b: f64) -> Result<(Complex64, Complex64)> {
        if b == 0.0 {
            let (z, e, _) = self.core.corner_values(self.p);
            return Ok((z, e));
        }
        let (lo, hi) = self.core.zeta_support(self.p);
        if b < lo || b > hi {
            return Ok((ZERO, ZERO));
        }
        self.core.plus_on_boundary(self.p, b)
    }

    fn xi(&self, c: f64) -> Result<Complex64> {
        if c == 0.0 {
            return Ok(self.core.corner_values(self.p).2);
        }
        let (lo, hi) = self.core.xi_support(self.p);
        if c < lo || c > hi {
            return Ok(ZERO);
        }
        self.core.xi_on_coincidence(self.p, c)
    }

    fn zeta_support(&self) -> (f64, f64) {
        self.core.zeta_support(self.p)
    }

    fn xi_support(&self) -> (f64, f64) {
        self.core.xi_support(self.p)
    }

    fn panel_width(&self) -> f64 {
        self.core.width
    }
}

/// Wave-function evaluator for one set of initial data and settings.
///
/// Cheap to share across threads; the ζ/ξ tables fill up lazily.
#[derive(Debug)]
pub struct Solver {
    core: Core,
    cfg: SolverConfig,
    cache: CharCache,
}

impl Solver {
    /// Solver whose boundary coefficient e^{iθ}√((X⁰+X¹)/(X⁰−X¹)) is taken
    /// from the data.
    pub fn new(data: InitialData, cfg: SolverConfig) -> Result<Self> {
        let (theta, x) = (data.theta(), data.killing());
        Self::with_boundary(data, cfg, theta, x)
    }

    /// Solver with an explicitly chosen boundary phase and frame vector in the
    /// boundary coefficient (used for frame and mutation checks).
    pub fn with_boundary(data: InitialData, cfg: SolverConfig, theta: f64, x: KillingVector) -> Result<Self> {
        cfg.validate()?;
        let x = KillingVector::new(x.x0, x.x1)?;
        let coeff = Complex64::from_polar(x.boundary_ratio(), theta);
        // Initial panels of a few data widths: GL16 resolves a Gaussian bump
        // per panel, and the adaptive split takes care of the rest.
        let width = 5.0 * data.length_scale();
        let core = Core { data, omega: cfg.omega, tol: cfg.quad_tol, coeff, inv_coeff: coeff.inv(), width };
        Ok(Self { core, cfg, cache: CharCache::new(cfg.char_grid_h) })
    }

    pub fn data(&self) -> &InitialData {
        &self.core.data
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Coefficient c in the boundary condition ψ₋₊ = c·ψ₊₋ on 𝒞.
    pub fn boundary_coefficient(&self) -> Complex64 {
        self.core.coeff
    }

    /// Whether the interaction is switched off.
    pub fn is_free(&self) -> bool {
        self.cfg.interaction == Interaction::Free
    }

    /// Number of ζ/ξ table chunks computed so far.
    pub fn cached_chunks(&self) -> usize {
        self.cache.len()
    }

    /// Ψ at `q`.
    pub fn evaluate(&self, q: &Configuration) -> Result<SpinorValue> {
        self.evaluate_tagged(q).map(|(_, v)| v)
    }

    /// Ψ at `q` together with its region tag.
    pub fn evaluate_tagged(&self, q: &Configuration) -> Result<(RegionTag, SpinorValue)> {
        let finite = [q.t_ph, q.s_ph, q.t_el, q.s_el].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain(format!("configuration {q} is not finite")));
        }
        if q.t_ph < 0.0 || q.t_el < 0.0 {
            return Err(Error::Domain(format!("negative times are not supported: {q}")));
        }
        let tag = classify(q);
        let free = self.is_free();
        if !free && matches!(tag, RegionTag::S2 | RegionTag::Outside) {
            return Err(Error::Domain(format!("configuration {q} lies in {tag}, outside the closed wedge")));
        }
        let core = &self.core;
        let (mm, mp) = core.cauchy_block(Block::Minus, q.m(), q.t_el, q.s_el)?;
        let p = q.p();
        let near = match tag {
            RegionTag::R1 | RegionTag::B => false,
            RegionTag::R2 | RegionTag::C => true,
            _ => p > q.s_el - q.t_el,
        };
        let (pm, pp) = if free || !near {
            core.cauchy_block(Block::Plus, p, q.t_el, q.s_el)?
        } else {
            self.near_plus(p, q.t_el, q.s_el)?
        };
        Ok((tag, SpinorValue { mm, mp, pm, pp }))
    }

    /// (ψ₊₋, ψ₊₋) in R2 ∪ 𝒞 at photon argument p, electron (t, s).
    fn near_plus(&self, p: f64, t: f64, s: f64) -> Result<(Complex64, Complex64)> {
        let core = &self.core;
        let st = s - p;
        // Clamp the rounding of the two sums; exact values satisfy 0 ≤ β, γ.
        let beta = (0.5 * (t + st)).max(0.0);
        let gamma = (0.5 * (t - st)).max(0.0);
        match self.cfg.cache_mode {
            CacheMode::GridInterpolated => {
                let line = self.cache.line(core, p, beta, gamma)?;
                self.finish_near(&line, beta, gamma)
            }
            CacheMode::DirectNested => self.finish_near(&DirectLine { core, p }, beta, gamma),
        }
    }

    fn finish_near<L: LineData + ?Sized>(&self, line: &L, beta: f64, gamma: f64) -> Result<(Complex64, Complex64)> {
        let (w, tol) = (self.core.omega, self.core.tol);
        let out = goursat_core(line, beta, gamma, w, tol)?;
        let pp = match self.cfg.pp_route {
            PlusPlusRoute::Reduced => out.eta_beta - I * w * out.u_integral,
            PlusPlusRoute::Characteristic => plus_plus_by_characteristic(line, beta, gamma, w, tol)?,
        };
        Ok((out.u, pp))
    }
}

/// Ψ at `q` (free-function form of [`Solver::evaluate`]).
pub fn evaluate_psi(solver: &Solver, q: &Configuration) -> Result<SpinorValue> {
    solver.evaluate(q)
}

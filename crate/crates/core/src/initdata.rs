//! Initial data on the t_ph = t_el = 0 surface.
//!
//! An [`InitialData`] value bundles a component field ψ̊_{ς₁ς₂}(s_ph, s_el),
//! the boundary phase θ, and the distinguished Killing vector X derived from
//! the π-vector of the data. Two field families are provided: products of
//! Gaussian profiles ([`GaussianProductSpec`]) and a tabulated grid loaded
//! from CSV ([`TabulatedField`]). Anything implementing [`InitialField`] can
//! be used as well.
//!
//! Component order is always (ψ₋₋, ψ₋₊, ψ₊₋, ψ₊₊); the first sign is the
//! photon's, the second the electron's.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadrature::Adaptive;
use crate::solver::SpinorValue;

/// Amplitude seed used when no explicit amplitudes are configured.
pub const DEFAULT_AMPLITUDE_SEED: u64 = 1;

/// Axis-aligned rectangle containing the support of the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportRect {
    pub ph_lo: f64,
    pub ph_hi: f64,
    pub el_lo: f64,
    pub el_hi: f64,
}

impl SupportRect {
    /// The support grown by the light cones of duration `t` in every direction.
    pub fn grown(&self, t: f64) -> SupportRect {
        SupportRect { ph_lo: self.ph_lo - t, ph_hi: self.ph_hi + t, el_lo: self.el_lo - t, el_hi: self.el_hi + t }
    }

    /// Whether (s_ph, s_el) lies in the closed rectangle.
    pub fn contains(&self, s_ph: f64, s_el: f64) -> bool {
        (self.ph_lo..=self.ph_hi).contains(&s_ph) && (self.el_lo..=self.el_hi).contains(&s_el)
    }
}

/// A complex four-component field on the initial surface.
pub trait InitialField: Send + Sync + fmt::Debug {
    /// The four components (ψ̊₋₋, ψ̊₋₊, ψ̊₊₋, ψ̊₊₊) at (s_ph, s_el).
    fn eval(&self, s_ph: f64, s_el: f64) -> [Complex64; 4];
    /// A rectangle outside of which the field is negligible (< 1e-14).
    fn support(&self) -> SupportRect;
    /// Typical length over which the field varies; used to size quadrature panels.
    fn length_scale(&self) -> f64;
}

/// Constant time-like, future-directed vector X = (x0, x1).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KillingVector {
    pub x0: f64,
    pub x1: f64,
}

impl KillingVector {
    /// The rest frame X = (1, 0).
    pub const REST: KillingVector = KillingVector { x0: 1.0, x1: 0.0 };

    /// Validates time-likeness and future orientation.
    pub fn new(x0: f64, x1: f64) -> Result<Self> {
        if x0.is_finite() && x1.is_finite() && x0 > 0.0 && x0 * x0 - x1 * x1 > 0.0 && x0 > x1.abs() {
            Ok(Self { x0, x1 })
        } else {
            Err(Error::Causality { x0, x1 })
        }
    }

    /// √((X⁰+X¹)/(X⁰−X¹)), the modulus of the boundary coefficient.
    pub fn boundary_ratio(&self) -> f64 {
        ((self.x0 + self.x1) / (self.x0 - self.x1)).sqrt()
    }

    /// The vector boosted by rapidity `a`.
    pub fn boosted(&self, a: f64) -> KillingVector {
        let (ch, sh) = (a.cosh(), a.sinh());
        KillingVector { x0: ch * self.x0 + sh * self.x1, x1: sh * self.x0 + ch * self.x1 }
    }
}

/// X := π / η(π, π) for π = (pi0, pi1).
pub fn compute_x(pi0: f64, pi1: f64) -> Result<KillingVector> {
    let eta = pi0 * pi0 - pi1 * pi1;
    if !(pi0 > pi1.abs()) || !(eta > 0.0) {
        return Err(Error::Causality { x0: pi0, x1: pi1 });
    }
    KillingVector::new(pi0 / eta, pi1 / eta)
}

/// Initial data: component field, per-block scale, θ and the derived X.
#[derive(Clone)]
pub struct InitialData {
    field: Arc<dyn InitialField>,
    /// Multipliers of the ς₁ = − and ς₁ = + blocks.
    scale: [f64; 2],
    theta: f64,
    killing: KillingVector,
    description: String,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData")
            .field("description", &self.description)
            .field("scale", &self.scale)
            .field("theta", &self.theta)
            .field("killing", &self.killing)
            .finish()
    }
}

impl InitialData {
    /// Wraps a field as-is (no normalization) and derives X from its π-vector.
    pub fn new(field: Arc<dyn InitialField>, theta: f64, description: impl Into<String>) -> Result<Self> {
        let mut data = Self::with_frame(field, theta, KillingVector::REST, description)?;
        let (pi0, pi1) = compute_pi(&data, 1e-10)?;
        data.killing = compute_x(pi0, pi1)?;
        Ok(data)
    }

    /// Wraps a field with an explicitly chosen X instead of the one implied by
    /// the data (useful for single-block test states whose π is null).
    pub fn with_frame(
        field: Arc<dyn InitialField>,
        theta: f64,
        killing: KillingVector,
        description: impl Into<String>,
    ) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidData(format!("theta must be finite, got {theta}")));
        }
        let killing = KillingVector::new(killing.x0, killing.x1)?;
        Ok(Self {
            field,
            scale: [1.0, 1.0],
            theta: theta.rem_euclid(std::f64::consts::TAU),
            killing,
            description: description.into(),
        })
    }

    /// ψ̊ at (s_ph, s_el).
    #[inline]
    pub fn psi0(&self, s_ph: f64, s_el: f64) -> SpinorValue {
        SpinorValue::from_array(self.eval(s_ph, s_el))
    }

    /// ψ̊ as a component array (mm, mp, pm, pp).
    #[inline]
    pub fn eval(&self, s_ph: f64, s_el: f64) -> [Complex64; 4] {
        let [mm, mp, pm, pp] = self.field.eval(s_ph, s_el);
        let (a, b) = (self.scale[0], self.scale[1]);
        [mm * a, mp * a, pm * b, pp * b]
    }

    /// Support rectangle of the data.
    pub fn support(&self) -> SupportRect {
        self.field.support()
    }

    /// Length scale of the data.
    pub fn length_scale(&self) -> f64 {
        self.field.length_scale()
    }

    /// Boundary phase θ ∈ [0, 2π).
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Distinguished Killing vector X.
    pub fn killing(&self) -> KillingVector {
        self.killing
    }

    /// Free-text description.
    pub fn description(&self) -> &str {
        &self.description
    }

    /// Same data with a different boundary phase (the data themselves are
    /// untouched; meaningful when they vanish on the coincidence set).
    pub fn with_theta(&self, theta: f64) -> Self {
        let mut d = self.clone();
        d.theta = theta.rem_euclid(std::f64::consts::TAU);
        d
    }

    /// Same data with X replaced.
    pub fn with_killing(&self, killing: KillingVector) -> Result<Self> {
        let mut d = self.clone();
        d.killing = KillingVector::new(killing.x0, killing.x1)?;
        Ok(d)
    }

    /// Boundary coefficient e^{iθ}√((X⁰+X¹)/(X⁰−X¹)).
    pub fn boundary_coefficient(&self) -> Complex64 {
        Complex64::from_polar(self.killing.boundary_ratio(), self.theta)
    }

    /// |ψ̊₋₊(s,s) − e^{iθ}κ ψ̊₊₋(s,s)| at one diagonal point.
    pub fn compatibility_residual_at(&self, s: f64) -> f64 {
        let v = self.eval(s, s);
        (v[1] - self.boundary_coefficient() * v[2]).norm()
    }

    /// Largest compatibility residual over `n` uniformly spaced diagonal points
    /// inside the support rectangle, with the point where it occurs.
    pub fn compatibility_residual(&self, n: usize) -> (f64, f64) {
        let r = self.support();
        let (lo, hi) = (r.ph_lo.max(r.el_lo), r.ph_hi.min(r.el_hi));
        if lo > hi || n == 0 {
            return (0.0, f64::NAN);
        }
        let mut worst = (0.0, lo);
        for k in 0..n {
            let s = if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
            let res = self.compatibility_residual_at(s);
            if res > worst.0 {
                worst = (res, s);
            }
        }
        worst
    }

    /// Largest component modulus on a 129×129 sample of the support.
    pub fn peak_amplitude(&self) -> f64 {
        let r = self.support();
        let n = 129;
        let mut peak: f64 = 0.0;
        for i in 0..n {
            let x = r.ph_lo + (r.ph_hi - r.ph_lo) * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let y = r.el_lo + (r.el_hi - r.el_lo) * j as f64 / (n - 1) as f64;
                for c in self.eval(x, y) {
                    peak = peak.max(c.norm());
                }
            }
        }
        peak
    }

    /// Finite-difference smoothness probe: the largest disagreement between
    /// central differences with steps h and h/2 (h = length_scale/20), relative
    /// to the typical derivative scale peak/length_scale. Small (≈ 1e-3 or
    /// less) for continuously differentiable data; O(1) across kinks.
    pub fn smoothness_defect(&self, samples: usize, seed: u64) -> f64 {
        let r = self.support();
        let ell = self.length_scale();
        let h = ell / 20.0;
        let scale = self.peak_amplitude().max(f64::MIN_POSITIVE) / ell;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = rng.gen_range(r.ph_lo..=r.ph_hi);
            let y = rng.gen_range(r.el_lo..=r.el_hi);
            for (dx, dy) in [(1.0, 0.0), (0.0, 1.0)] {
                let d = |h: f64| {
                    let p = self.eval(x + h * dx, y + h * dy);
                    let m = self.eval(x - h * dx, y - h * dy);
                    [0, 1, 2, 3].map(|k| (p[k] - m[k]) / (2.0 * h))
                };
                let (a, b) = (d(h), d(0.5 * h));
                for k in 0..4 {
                    worst = worst.max((a[k] - b[k]).norm() / scale);
                }
            }
        }
        worst
    }
}

/// π = (pi0, pi1) with pi0 = ¼∬Σ|ψ̊|² and pi1 = ¼∬Σς₁|ψ̊|².
///
/// The double integral is a tensorised adaptive Gauss–Legendre quadrature over
/// the support rectangle (outer integral over s_ph, inner over s_el).
pub fn compute_pi(data: &InitialData, quad_tol: f64) -> Result<(f64, f64)> {
    let (minus, plus) = block_norms(data, quad_tol)?;
    let pi0 = 0.25 * (minus + plus);
    if !(pi0 > 0.0) {
        return Err(Error::InvalidData("the initial data vanish identically".into()));
    }
    Ok((pi0, 0.25 * (plus - minus)))
}

/// (∬|ψ̊₋₋|²+|ψ̊₋₊|², ∬|ψ̊₊₋|²+|ψ̊₊₊|²).
fn block_norms(data: &InitialData, quad_tol: f64) -> Result<(f64, f64)> {
    let r = data.support();
    let ell = data.length_scale();
    let width = 2.5 * ell;
    let len_ph = (r.ph_hi - r.ph_lo).max(ell);
    // The factor ¼ in π and the two blocks leave plenty of headroom; split
    // the budget between the outer and the inner integrals.
    let outer = Adaptive::new(quad_tol, width);
    let inner = Adaptive::new(0.5 * quad_tol / len_ph, width);
    let mut failure = None;
    // Real part: ς₁ = − block, imaginary part: ς₁ = + block.
    let v = outer.integrate(r.ph_lo, r.ph_hi, |x| {
        match inner.integrate(r.el_lo, r.el_hi, |y| {
            let c = data.eval(x, y);
            Complex64::new(c[0].norm_sqr() + c[1].norm_sqr(), c[2].norm_sqr() + c[3].norm_sqr())
        }) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((v.re, v.im))
}

/// Rescales the ς₁ = + block against the ς₁ = − block so that pi1 = 0, then
/// globally so that pi0 = 1; the resulting X is (1, 0) to quadrature accuracy.
pub fn normalize_for_x(data: &InitialData) -> Result<InitialData> {
    normalize_for_x_with_tol(data, 1e-10)
}

/// [`normalize_for_x`] with an explicit quadrature tolerance.
pub fn normalize_for_x_with_tol(data: &InitialData, quad_tol: f64) -> Result<InitialData> {
    let (minus, plus) = block_norms(data, quad_tol)?;
    if !(minus > 0.0) {
        return Err(Error::Balance("photon-minus"));
    }
    if !(plus > 0.0) {
        return Err(Error::Balance("photon-plus"));
    }
    let mut out = data.clone();
    // Each block gets norm 2, so ∬Σ|ψ̊|² = 4.
    let (fm, fp) = ((2.0 / minus).sqrt(), (2.0 / plus).sqrt());
    out.scale = [data.scale[0] * fm, data.scale[1] * fp];
    let (nm, np) = (minus * fm * fm, plus * fp * fp);
    out.killing = compute_x(0.25 * (nm + np), 0.25 * (np - nm))?;
    Ok(out)
}

/// Rescales all components by one factor so that pi0 = 1, keeping pi1/pi0.
pub fn normalize_global(data: &InitialData) -> Result<InitialData> {
    let (minus, plus) = block_norms(data, 1e-10)?;
    let total = minus + plus;
    if !(total > 0.0) {
        return Err(Error::InvalidData("the initial data vanish identically".into()));
    }
    let f = (4.0 / total).sqrt();
    let mut out = data.clone();
    out.scale = [data.scale[0] * f, data.scale[1] * f];
    out.killing = compute_x(1.0, 0.25 * (plus - minus) * f * f)?;
    Ok(out)
}

/// How the compatibility condition on the coincidence set is met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CompatMode {
    /// Rely on the data being numerically zero on the diagonal (d ≫ σ).
    Separation,
    /// Overwrite a₋₊ with e^{iθ}·a₊₋ before normalisation (exact for X = (1,0)).
    Pinned,
}

/// How the normalised data are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Normalization {
    /// Balance the photon-spin blocks so X = (1, 0), then fix pi0 = 1.
    RestFrame,
    /// Only fix pi0 = 1; X follows from the data.
    GlobalOnly,
}

/// Product of two Gaussian profiles with common width.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProductSpec {
    /// Width σ: each factor is exp(−x²/(2σ²)).
    pub sigma: f64,
    /// Distance d between the photon mean (0) and the electron mean (d).
    pub separation: f64,
    /// Amplitudes (a₋₋, a₋₊, a₊₋, a₊₊).
    pub amplitudes: [Complex64; 4],
    /// Boundary phase θ.
    pub theta: f64,
    /// Optional smooth cutoff radius in units of σ.
    pub truncate: Option<f64>,
    /// Compatibility strategy.
    pub compat: CompatMode,
}

impl Default for GaussianProductSpec {
    /// σ = 0.1, d = 1, equal amplitudes, θ = 0, untruncated.
    fn default() -> Self {
        Self {
            sigma: 0.1,
            separation: 1.0,
            amplitudes: [Complex64::new(1.0, 0.0); 4],
            theta: 0.0,
            truncate: None,
            compat: CompatMode::Separation,
        }
    }
}

impl GaussianProductSpec {
    /// Amplitudes drawn at random subject to compatibility in the rest frame:
    /// a₋₋ and a₊₋ have moduli uniform in [0.5, 1.5] and uniform phases,
    /// a₋₊ = e^{iθ}a₊₋, and a₊₊ has the modulus of a₋₋ with a fresh phase, so
    /// the photon-spin blocks come out balanced.
    pub fn random_amplitudes(seed: u64, theta: f64) -> [Complex64; 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| {
            let r = rng.gen_range(0.5..1.5);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(r, phi)
        };
        let mm = draw(&mut rng);
        let pm = draw(&mut rng);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let mp = Complex64::from_polar(1.0, theta) * pm;
        let pp = Complex64::from_polar(mm.norm(), phi);
        [mm, mp, pm, pp]
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidData(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.separation >= 0.0) || !self.separation.is_finite() {
            return Err(Error::InvalidData(format!("separation must be non-negative, got {}", self.separation)));
        }
        if let Some(r) = self.truncate {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidData(format!("truncate must be positive, got {r}")));
            }
        }
        if self.amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidData("amplitudes must be finite".into()));
        }
        if self.amplitudes.iter().all(|a| a.norm() == 0.0) {
            return Err(Error::InvalidData("all amplitudes are zero".into()));
        }
        Ok(())
    }
}

/// Relative tolerance of the compatibility check (relative to the peak
/// component modulus of the normalised data).
pub const COMPAT_TOL: f64 = 1e-10;

/// Builds normalised Gaussian-product data in the rest frame X = (1, 0).
pub fn build_gaussian_product(spec: &GaussianProductSpec) -> Result<InitialData> {
    build_gaussian_product_with(spec, Normalization::RestFrame)
}

/// Builds Gaussian-product data with an explicit normalisation policy.
pub fn build_gaussian_product_with(spec: &GaussianProductSpec, norm: Normalization) -> Result<InitialData> {
    spec.validate()?;
    let mut amps = spec.amplitudes;
    if spec.compat == CompatMode::Pinned {
        amps[1] = Complex64::from_polar(1.0, spec.theta) * amps[2];
    }
    let field = GaussianProductField::new(spec.sigma, spec.separation, amps, spec.truncate);
    let description = format!(
        "gaussian product: sigma={}, separation={}, theta={}, truncate={:?}, compat={:?}",
        spec.sigma, spec.separation, spec.theta, spec.truncate, spec.compat
    );
    // π of the raw data may be null (e.g. one empty block); the frame is
    // fixed by the normalisation below.
    let raw = InitialData::with_frame(Arc::new(field), spec.theta, KillingVector::REST, description)?;
    let data = match norm {
        Normalization::RestFrame => normalize_for_x(&raw)?,
        Normalization::GlobalOnly => normalize_global(&raw)?,
    };
    let (res, s) = data.compatibility_residual(101);
    let peak = data.peak_amplitude().max(1.0);
    if res > COMPAT_TOL * peak {
        return Err(Error::Compatibility { residual: res, s });
    }
    Ok(data)
}

/// ψ̊_{ς₁ς₂}(s_ph, s_el) = a_{ς₁ς₂} G(s_ph) G(s_el − d), optionally with a
/// smooth cutoff.
#[derive(Debug, Clone)]
pub struct GaussianProductField {
    sigma: f64,
    separation: f64,
    amplitudes: [Complex64; 4],
    truncate: Option<f64>,
    inv_two_sigma2: f64,
}

impl GaussianProductField {
    /// Field with width `sigma`, electron mean `separation` and the given amplitudes.
    pub fn new(sigma: f64, separation: f64, amplitudes: [Complex64; 4], truncate: Option<f64>) -> Self {
        Self { sigma, separation, amplitudes, truncate, inv_two_sigma2: 0.5 / (sigma * sigma) }
    }

    #[inline]
    fn profile(&self, x: f64) -> f64 {
        let g = (-x * x * self.inv_two_sigma2).exp();
        match self.truncate {
            None => g,
            Some(r) => g * plateau_bump(x.abs() / (r * self.sigma)),
        }
    }

    /// Radius of the support around each mean.
    fn radius(&self) -> f64 {
        match self.truncate {
            None => 8.0 * self.sigma,
            Some(r) => r * self.sigma,
        }
    }
}

impl InitialField for GaussianProductField {
    #[inline]
    fn eval(&self, s_ph: f64, s_el: f64) -> [Complex64; 4] {
        let g = self.profile(s_ph) * self.profile(s_el - self.separation);
        self.amplitudes.map(|a| a * g)
    }

    fn support(&self) -> SupportRect {
        let r = self.radius();
        SupportRect { ph_lo: -r, ph_hi: r, el_lo: self.separation - r, el_hi: self.separation + r }
    }

    fn length_scale(&self) -> f64 {
        self.sigma
    }
}

/// Smooth function equal to 1 on [0, ½], 0 on [1, ∞), C^∞ in between.
fn plateau_bump(u: f64) -> f64 {
    if u <= 0.5 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let v = 2.0 * u - 1.0;
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (f(v), f(1.0 - v));
    b / (a + b)
}

/// Data tabulated on a uniform rectangular grid, interpolated bicubically
/// (Catmull–Rom, continuously differentiable) and zero outside the grid.
#[derive(Debug, Clone)]
pub struct TabulatedField {
    x0: f64,
    hx: f64,
    nx: usize,
    y0: f64,
    hy: f64,
    ny: usize,
    values: Vec<[Complex64; 4]>,
}

impl TabulatedField {
    /// Field from grid origin/steps and row-major values (`values[i*ny + j]`
    /// at (x0 + i·hx, y0 + j·hy)).
    pub fn new(x0: f64, hx: f64, nx: usize, y0: f64, hy: f64, ny: usize, values: Vec<[Complex64; 4]>) -> Result<Self> {
        if nx < 4 || ny < 4 || values.len() != nx * ny || !(hx > 0.0) || !(hy > 0.0) {
            return Err(Error::InvalidData("tabulated grid must be at least 4x4 with positive steps".into()));
        }
        Ok(Self { x0, hx, nx, y0, hy, ny, values })
    }

    /// Parses CSV rows `s_ph,s_el,re_mm,im_mm,re_mp,im_mp,re_pm,im_pm,re_pp,im_pp`
    /// (an optional header line and `#` comments are skipped). The points
    /// must form a complete uniform grid, in any order.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 10 => rows.push(v),
                Ok(v) => {
                    return Err(Error::InvalidData(format!(
                        "line {}: expected 10 columns, found {}",
                        lineno + 1,
                        v.len()
                    )))
                }
                Err(_) if rows.is_empty() => continue, // header
                Err(e) => return Err(Error::InvalidData(format!("line {}: {e}", lineno + 1))),
            }
        }
        let axis = |k: usize| -> Vec<f64> {
            let mut v: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            v.sort_by(|a, b| a.total_cmp(b));
            v.dedup();
            v
        };
        let (xs, ys) = (axis(0), axis(1));
        let uniform = |v: &[f64]| -> Result<f64> {
            if v.len() < 4 {
                return Err(Error::InvalidData("tabulated grid needs at least 4 points per axis".into()));
            }
            let h = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
            for (k, x) in v.iter().enumerate() {
                if (x - (v[0] + h * k as f64)).abs() > 1e-9 * h.max(1.0) {
                    return Err(Error::InvalidData("tabulated grid is not uniform".into()));
                }
            }
            Ok(h)
        };
        let (hx, hy) = (uniform(&xs)?, uniform(&ys)?);
        let (nx, ny) = (xs.len(), ys.len());
        if rows.len() != nx * ny {
            return Err(Error::InvalidData(format!("expected {} grid points, found {}", nx * ny, rows.len())));
        }
        let mut values = vec![[Complex64::new(0.0, 0.0); 4]; nx * ny];
        for r in &rows {
            let i = ((r[0] - xs[0]) / hx).round() as usize;
            let j = ((r[1] - ys[0]) / hy).round() as usize;
            values[i * ny + j] = [
                Complex64::new(r[2], r[3]),
                Complex64::new(r[4], r[5]),
                Complex64::new(r[6], r[7]),
                Complex64::new(r[8], r[9]),
            ];
        }
        Self::new(xs[0], hx, nx, ys[0], hy, ny, values)
    }

    #[inline]
    fn node(&self, i: isize, j: isize) -> [Complex64; 4] {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            [Complex64::new(0.0, 0.0); 4]
        } else {
            self.values[i as usize * self.ny + j as usize]
        }
    }
}

/// Catmull–Rom weights for the four nodes around a point at offset u ∈ [0,1).
#[inline]
fn catmull_rom(u: f64) -> [f64; 4] {
    let (u2, u3) = (u * u, u * u * u);
    [0.5 * (-u3 + 2.0 * u2 - u), 0.5 * (3.0 * u3 - 5.0 * u2 + 2.0), 0.5 * (-3.0 * u3 + 4.0 * u2 + u), 0.5 * (u3 - u2)]
}

impl InitialField for TabulatedField {
    fn eval(&self, s_ph: f64, s_el: f64) -> [Complex64; 4] {
        let fx = (s_ph - self.x0) / self.hx;
        let fy = (s_el - self.y0) / self.hy;
        if fx < 0.0 || fy < 0.0 || fx > (self.nx - 1) as f64 || fy > (self.ny - 1) as f64 {
            return [Complex64::new(0.0, 0.0); 4];
        }
        let (i, j) = (fx.floor() as isize, fy.floor() as isize);
        let (wx, wy) = (catmull_rom(fx - i as f64), catmull_rom(fy - j as f64));
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (a, wa) in wx.iter().enumerate() {
            for (b, wb) in wy.iter().enumerate() {
                let w = wa * wb;
                let v = self.node(i - 1 + a as isize, j - 1 + b as isize);
                for k in 0..4 {
                    out[k] += v[k] * w;
                }
            }
        }
        out
    }

    fn support(&self) -> SupportRect {
        SupportRect {
            ph_lo: self.x0,
            ph_hi: self.x0 + self.hx * (self.nx - 1) as f64,
            el_lo: self.y0,
            el_hi: self.y0 + self.hy * (self.ny - 1) as f64,
        }
    }

    fn length_scale(&self) -> f64 {
        4.0 * self.hx.max(self.hy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_bump_is_monotone_and_bounded() {
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = plateau_bump(k as f64 / 80.0);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert_eq!(plateau_bump(1.0), 0.0);
        assert_eq!(plateau_bump(0.25), 1.0);
    }

    #[test]
    fn catmull_rom_reproduces_nodes_and_partition_of_unity() {
        assert_eq!(catmull_rom(0.0), [0.0, 1.0, 0.0, 0.0]);
        for u in [0.1, 0.5, 0.9] {
            let s: f64 = catmull_rom(u).iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }
}

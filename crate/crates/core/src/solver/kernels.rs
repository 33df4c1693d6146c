//! Riemann-kernel formulas: Klein–Gordon Cauchy evaluation and the Goursat
//! reconstruction from data on two characteristics.
//!
//! Every kernel integral below is written with the regular ratio J₁(x)/x so
//! that nothing is singular at the ends of the integration range, and with
//! the squared Bessel argument so that no square roots are taken.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{Adaptive, CVec};
use crate::specfun::kernels_sq;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Largest tolerated corner mismatch |ζ(0) − ξ(0)| in the Goursat problem.
pub const CORNER_TOL: f64 = 1e-8;

/// Unit-mass Klein–Gordon Cauchy solution at (t, s):
///
/// w = ½{f(s−t)+f(s+t)} − (t/2)∫ J₁(r)/r f dσ + ½∫ J₀(r) g dσ,
/// r = √(t² − (s−σ)²), σ ∈ [s−t, s+t],
///
/// for w_tt − w_ss + w = 0 with w(0,·) = f and w_t(0,·) = g.
pub fn kg_cauchy_eval<F, G>(f: F, g: G, t: f64, s: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    kg_cauchy_eval_mass(f, g, t, s, 1.0, tol)
}

/// [`kg_cauchy_eval`] for mass ω: w_tt − w_ss + ω²w = 0, i.e.
/// w = ½{f(s−t)+f(s+t)} − (ω²t/2)∫ J₁(ωr)/(ωr) f dσ + ½∫ J₀(ωr) g dσ.
pub fn kg_cauchy_eval_mass<F, G>(f: F, g: G, t: f64, s: f64, omega: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    if !(t >= 0.0) || !t.is_finite() || !s.is_finite() {
        return Err(Error::Domain(format!("Cauchy evaluation needs finite t >= 0, got t={t}, s={s}")));
    }
    let edge = 0.5 * (f(s - t) + f(s + t));
    if t == 0.0 {
        return Ok(f(s));
    }
    let w2 = omega * omega;
    let quad = Adaptive::new(tol / (1.0 + w2 * t), 0.25);
    let v = quad.integrate(s - t, s + t, |sigma| {
        let d = s - sigma;
        let k = kernels_sq(w2 * (t * t - d * d));
        CVec([f(sigma) * k.j1_ratio, g(sigma) * k.j0])
    })?;
    Ok(edge - v.0[0] * (0.5 * w2 * t) + v.0[1] * 0.5)
}

/// Solution U(t, s) of U_tt − U_ss + ω²U = 0 in the wedge |s| ≤ t with
/// U = ζ((t+s)/2) on s = t and U = ξ((t−s)/2) on s = −t.
///
/// With β = (t+s)/2 and γ = (t−s)/2:
///
/// U = ζ(β) + ξ(γ) − ½(ζ(0)+ξ(0)) J₀(2ω√(βγ))
///     − 2ω²γ ∫₀^β ζ(b) J₁(z)/z db − 2ω²β ∫₀^γ ξ(c) J₁(w)/w dc,
///
/// z = 2ω√(γ(β−b)), w = 2ω√(β(γ−c)).
pub fn goursat_eval<Z, X>(zeta: Z, xi: X, t: f64, s: f64, omega: f64, tol: f64) -> Result<Complex64>
where
    Z: Fn(f64) -> Complex64,
    X: Fn(f64) -> Complex64,
{
    if !t.is_finite() || !s.is_finite() || s.abs() > t {
        return Err(Error::Domain(format!("Goursat evaluation needs |s| <= t, got t={t}, s={s}")));
    }
    let line = ClosureLine { zeta, xi, width: 0.25 };
    let out = goursat_core(&line, 0.5 * (t + s), 0.5 * (t - s), omega, tol)?;
    Ok(out.u)
}

/// Characteristic data of one Goursat problem.
pub(crate) trait LineData {
    /// ζ(b) and its companion η(b) (the other component on the same line).
    fn zeta_eta(&self, b: f64) -> Result<(Complex64, Complex64)>;
    /// ξ(c).
    fn xi(&self, c: f64) -> Result<Complex64>;
    /// Interval of b outside of which ζ and η vanish (may be empty: lo > hi).
    fn zeta_support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    /// Interval of c outside of which ξ vanishes (may be empty).
    fn xi_support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    /// Initial panel width for integrals along the line.
    fn panel_width(&self) -> f64;
}

struct ClosureLine<Z, X> {
    zeta: Z,
    xi: X,
    width: f64,
}

impl<Z: Fn(f64) -> Complex64, X: Fn(f64) -> Complex64> LineData for ClosureLine<Z, X> {
    fn zeta_eta(&self, b: f64) -> Result<(Complex64, Complex64)> {
        Ok(((self.zeta)(b), ZERO))
    }
    fn xi(&self, c: f64) -> Result<Complex64> {
        Ok((self.xi)(c))
    }
    fn panel_width(&self) -> f64 {
        self.width
    }
}

/// Output of the Goursat step at (β, γ).
#[derive(Debug, Clone, Copy)]
pub(crate) struct GoursatOut {
    /// U(β, γ).
    pub u: Complex64,
    /// ∫₀^γ U(β, γ') dγ'.
    pub u_integral: Complex64,
    /// η(β), the companion value at the ζ end of the line.
    pub eta_beta: Complex64,
}

/// Evaluates U(β, γ) and, from the same quadrature nodes, ∫₀^γ U(β, γ') dγ'.
///
/// The γ'-integral is done analytically inside the double integrals:
///   ∫₀^γ J₀(2ω√(βγ')) dγ'             = 2γ·J₁(Z)/Z,             Z = 2ω√(βγ),
///   ∫₀^γ 2ω²γ' J₁(z')/z' dγ'          = 4ω²γ²·J₂(z)/z²,          z = 2ω√(γ(β−b)),
///   ∫_c^γ 2ω²β J₁(w')/w' dγ'          = 1 − J₀(w),               w = 2ω√(β(γ−c)),
/// so that
///   ∫₀^γ U = γζ(β) − (ζ₀+ξ₀)γ J₁(Z)/Z − 4ω²γ² ∫₀^β ζ(b) J₂(z)/z² db
///            + ∫₀^γ ξ(c) J₀(w) dc.
pub(crate) fn goursat_core<L: LineData + ?Sized>(
    line: &L,
    beta: f64,
    gamma: f64,
    omega: f64,
    tol: f64,
) -> Result<GoursatOut> {
    let (zeta0, _) = line.zeta_eta(0.0)?;
    let xi0 = line.xi(0.0)?;
    let mismatch = (zeta0 - xi0).norm();
    if mismatch > CORNER_TOL {
        return Err(Error::Compatibility { residual: mismatch, s: f64::NAN });
    }
    let (zeta_b, eta_b) = line.zeta_eta(beta)?;
    let xi_g = line.xi(gamma)?;
    let w2 = omega * omega;
    let corner = kernels_sq(4.0 * w2 * beta * gamma);
    let quad = Adaptive::new(tol / (1.0 + 4.0 * w2 * (beta + gamma).powi(2)), line.panel_width());
    let mut failure = None;

    let (zlo, zhi) = line.zeta_support();
    let (za, zb) = (zlo.max(0.0), zhi.min(beta));
    let iz = if za < zb {
        quad.integrate(za, zb, |b| {
            let k = kernels_sq(4.0 * w2 * gamma * (beta - b));
            match line.zeta_eta(b) {
                Ok((z, _)) => CVec([z * k.j1_ratio, z * k.j2_ratio]),
                Err(e) => {
                    failure.get_or_insert(e);
                    CVec([ZERO; 2])
                }
            }
        })?
    } else {
        CVec([ZERO; 2])
    };

    let (xlo, xhi) = line.xi_support();
    let (xa, xb) = (xlo.max(0.0), xhi.min(gamma));
    let ix = if xa < xb {
        quad.integrate(xa, xb, |c| {
            let k = kernels_sq(4.0 * w2 * beta * (gamma - c));
            match line.xi(c) {
                Ok(x) => CVec([x * k.j1_ratio, x * k.j0]),
                Err(e) => {
                    failure.get_or_insert(e);
                    CVec([ZERO; 2])
                }
            }
        })?
    } else {
        CVec([ZERO; 2])
    };
    if let Some(e) = failure {
        return Err(e);
    }

    let u =
        zeta_b + xi_g - (zeta0 + xi0) * (0.5 * corner.j0) - iz.0[0] * (2.0 * w2 * gamma) - ix.0[0] * (2.0 * w2 * beta);
    let u_integral =
        zeta_b * gamma - (zeta0 + xi0) * (gamma * corner.j1_ratio) - iz.0[1] * (4.0 * w2 * gamma * gamma) + ix.0[1];
    Ok(GoursatOut { u, u_integral, eta_beta: eta_b })
}

/// ψ₊₊ at (β, γ) by literal integration of ∂_γ ψ₊₊ = −iω U along the
/// characteristic of constant β, each U(β, γ') being its own Goursat solve.
pub(crate) fn plus_plus_by_characteristic<L: LineData + ?Sized>(
    line: &L,
    beta: f64,
    gamma: f64,
    omega: f64,
    tol: f64,
) -> Result<Complex64> {
    let (_, eta_b) = line.zeta_eta(beta)?;
    if gamma == 0.0 {
        return Ok(eta_b);
    }
    let quad = Adaptive::new(tol / (1.0 + omega), line.panel_width());
    let mut failure = None;
    let integral = quad.integrate(0.0, gamma, |g| match goursat_core(line, beta, g, omega, tol) {
        Ok(out) => out.u,
        Err(e) => {
            failure.get_or_insert(e);
            ZERO
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(eta_b - I * omega * integral)
}

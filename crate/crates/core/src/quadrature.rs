//! Gauss–Legendre rules and an adaptive composite integrator.
//!
//! The adaptive scheme works panel by panel: the 16-point rule on a panel is
//! compared with the sum of the same rule on both halves; if the two agree to
//! within the panel's share of the tolerance (proportional to its length) the
//! halves are accepted, otherwise both halves are refined recursively.
//!
//! Integrands may be vector valued (several complex integrals sharing the
//! same nodes), which is how the solver evaluates all components of a Riemann
//! kernel integral in a single pass.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the Legendre polynomial P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess for the i-th largest root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false: a rule has at least one node.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes on [-1, 1], in increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights matching [`nodes`](Self::nodes).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to `f` on [a, b].
    #[inline]
    pub fn integrate<T: QuadValue, F: FnMut(f64) -> T>(&self, a: f64, b: f64, mut f: F) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Shared 16-point rule (the panel rule of the adaptive integrator).
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Shared 64-point rule.
pub fn gl64() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}

/// Shared rule with `n` nodes for the small orders used by grid quadrature.
pub fn gl_small(n: usize) -> &'static GaussLegendre {
    static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (1..=8).map(GaussLegendre::new).collect());
    &rules[n.clamp(1, 8) - 1]
}

/// Values that can be integrated: a vector space over the reals with a norm.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    /// Additive identity.
    fn zero() -> Self;
    /// Max-norm used for error estimation.
    fn max_abs(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn max_abs(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
}

/// Fixed-size stack vector of complex numbers; the integrand type of the
/// solver's kernel integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec<const N: usize>(pub [Complex64; N]);

impl<const N: usize> Add for CVec<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for CVec<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul<f64> for CVec<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, rhs: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl<const N: usize> QuadValue for CVec<N> {
    fn zero() -> Self {
        CVec([Complex64::new(0.0, 0.0); N])
    }
    fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.re.abs()).max(z.im.abs()))
    }
}

/// Settings of the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    /// Absolute tolerance for the whole interval.
    pub tol: f64,
    /// Width of the initial panels; the interval is first split uniformly
    /// into panels no wider than this.
    pub initial_width: f64,
    /// Maximum bisection depth below the initial partition.
    pub max_depth: u32,
}

impl Adaptive {
    /// Integrator with the given tolerance and initial panel width.
    pub fn new(tol: f64, initial_width: f64) -> Self {
        Self { tol, initial_width, max_depth: 24 }
    }

    /// Integrates `f` over [a, b] (a ≤ b or a > b, the sign follows).
    pub fn integrate<T: QuadValue, F: FnMut(f64) -> T>(&self, a: f64, b: f64, mut f: F) -> Result<T> {
        if a == b {
            return Ok(T::zero());
        }
        if a > b {
            return self.integrate(b, a, f).map(|v| v * -1.0);
        }
        let len = b - a;
        let panels =
            if self.initial_width > 0.0 { ((len / self.initial_width).ceil() as usize).clamp(1, 1 << 16) } else { 1 };
        let rule = gl16();
        let mut total = T::zero();
        for k in 0..panels {
            let pa = a + len * (k as f64) / (panels as f64);
            let pb = if k + 1 == panels { b } else { a + len * ((k + 1) as f64) / (panels as f64) };
            let whole = rule.integrate(pa, pb, &mut f);
            total = total + self.refine(rule, &mut f, pa, pb, whole, len, 0)?;
        }
        Ok(total)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<T: QuadValue, F: FnMut(f64) -> T>(
        &self,
        rule: &GaussLegendre,
        f: &mut F,
        a: f64,
        b: f64,
        whole: T,
        total_len: f64,
        depth: u32,
    ) -> Result<T> {
        let m = 0.5 * (a + b);
        let left = rule.integrate(a, m, &mut *f);
        let right = rule.integrate(m, b, &mut *f);
        let halves = left + right;
        let estimate = (halves - whole).max_abs();
        let budget = self.tol * (b - a) / total_len;
        if estimate <= budget {
            return Ok(halves);
        }
        if !estimate.is_finite() || depth >= self.max_depth || m <= a || m >= b {
            return Err(Error::Tolerance { a, b, estimate, tol: budget });
        }
        let l = self.refine(rule, f, a, m, left, total_len, depth + 1)?;
        let r = self.refine(rule, f, m, b, right, total_len, depth + 1)?;
        Ok(l + r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in [1, 2, 3, 4, 8, 16, 64] {
            let rule = GaussLegendre::new(n);
            let wsum: f64 = rule.weights().iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n} weight sum {wsum}");
            // x^(2n-2) integrates to 2/(2n-1) on [-1,1].
            let deg = 2 * n - 2;
            let got = rule.integrate(-1.0, 1.0, |x: f64| x.powi(deg as i32));
            let want = 2.0 / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-13 * want.max(1.0), "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn adaptive_handles_narrow_gaussian() {
        let q = Adaptive::new(1e-12, 1.0);
        let s = 0.01;
        let got = q.integrate(-3.0, 5.0, |x: f64| (-x * x / (2.0 * s * s)).exp()).unwrap();
        let want = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let q = Adaptive::new(1e-12, 1.0);
        let a = q.integrate(0.0, 1.0, |x: f64| x.exp()).unwrap();
        let b = q.integrate(1.0, 0.0, |x: f64| x.exp()).unwrap();
        assert_eq!(a, -b);
    }
}

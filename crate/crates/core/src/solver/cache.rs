//! Tabulated characteristic data for the Goursat step.
//!
//! For a photon argument p the Goursat problem needs
//!   ζ_p(b) = ψ₊₋(0, p, b, p+b),  η_p(b) = ψ₊₊(0, p, b, p+b)    (values on 𝓑),
//!   ξ_p(c) = coefficient⁻¹ · ψ₋₊(c, p−c, c, p−c)              (values on 𝒞).
//! These are smooth in both p and the line parameter, so they are tabulated
//! on a uniform (p, b) lattice of step h and interpolated with 4-point
//! Lagrange stencils in each direction.
//!
//! The table is stored in chunks of [`CHUNK`] knots keyed by (p index, kind,
//! chunk index). Chunks are computed on demand and never change afterwards,
//! so concurrent readers see either no entry or the final one; two threads
//! racing on the same key compute bitwise-identical values and one of them
//! wins the insert.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use super::Core;
use crate::error::{Error, Result};
use crate::solver::kernels::LineData;

/// Knots per chunk.
pub const CHUNK: usize = 64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    /// Interleaved (ζ, η) pairs.
    Bdry,
    /// ξ values.
    Coin,
}

type Key = (i64, Kind, i64);

/// Write-once map of tabulated characteristic data.
#[derive(Debug)]
pub(crate) struct CharCache {
    h: f64,
    chunks: RwLock<HashMap<Key, Arc<Vec<Complex64>>>>,
}

impl CharCache {
    pub fn new(h: f64) -> Self {
        Self { h, chunks: RwLock::new(HashMap::new()) }
    }

    /// Number of chunks computed so far.
    pub fn len(&self) -> usize {
        self.chunks.read().map(|m| m.len()).unwrap_or(0)
    }

    fn chunk(&self, core: &Core, p_idx: i64, kind: Kind, c_idx: i64) -> Result<Arc<Vec<Complex64>>> {
        let key = (p_idx, kind, c_idx);
        if let Some(v) = self.chunks.read().expect("cache lock poisoned").get(&key) {
            return Ok(v.clone());
        }
        let p = p_idx as f64 * self.h;
        let mut vals = Vec::with_capacity(2 * CHUNK);
        for n in 0..CHUNK {
            let x = (c_idx as usize * CHUNK + n) as f64 * self.h;
            match kind {
                Kind::Bdry => {
                    let (z, e) = core.plus_on_boundary(p, x)?;
                    vals.push(z);
                    vals.push(e);
                }
                Kind::Coin => vals.push(core.xi_on_coincidence(p, x)?),
            }
        }
        let arc = Arc::new(vals);
        let mut map = self.chunks.write().expect("cache lock poisoned");
        Ok(map.entry(key).or_insert(arc).clone())
    }

    /// Knot values k = 0..n of one row (`stride` = 2 for (ζ, η), 1 for ξ).
    fn row(&self, core: &Core, p_idx: i64, kind: Kind, n: usize) -> Result<Vec<Complex64>> {
        let stride = if kind == Kind::Bdry { 2 } else { 1 };
        let mut out = Vec::with_capacity(n * stride);
        let mut c = 0;
        while out.len() < n * stride {
            let chunk = self.chunk(core, p_idx, kind, c)?;
            let need = n * stride - out.len();
            out.extend_from_slice(&chunk[..need.min(chunk.len())]);
            c += 1;
        }
        Ok(out)
    }

    /// Interpolated line data for photon argument p, covering b ∈ [0, beta]
    /// and c ∈ [0, gamma].
    pub fn line(&self, core: &Core, p: f64, beta: f64, gamma: f64) -> Result<InterpLine> {
        let h = self.h;
        let u = p / h;
        if !u.is_finite() || u.abs() > 1e15 {
            return Err(Error::Domain(format!("photon argument {p} is out of range for the cache")));
        }
        let k = u.floor();
        let w = lagrange4(u - k);
        let k = k as i64;
        let zeta_support = core.zeta_support(p);
        let xi_support = core.xi_support(p);
        let nb = if zeta_support.0 <= zeta_support.1.min(beta) { (beta / h) as usize + 4 } else { 0 };
        let nc = if xi_support.0 <= xi_support.1.min(gamma) { (gamma / h) as usize + 4 } else { 0 };
        let mut bdry = vec![ZERO; 2 * nb];
        let mut coin = vec![ZERO; nc];
        for (i, wi) in w.iter().enumerate() {
            if *wi == 0.0 {
                continue;
            }
            let pk = k - 1 + i as i64;
            if nb > 0 && core.zeta_row_nonzero(pk as f64 * h) {
                for (acc, v) in bdry.iter_mut().zip(self.row(core, pk, Kind::Bdry, nb)?) {
                    *acc += v * *wi;
                }
            }
            if nc > 0 && core.xi_row_nonzero(pk as f64 * h) {
                for (acc, v) in coin.iter_mut().zip(self.row(core, pk, Kind::Coin, nc)?) {
                    *acc += v * *wi;
                }
            }
        }
        // Corner values come straight from the data (they are needed even when
        // a support interval misses [0, β]).
        let (corner_zeta, corner_eta, corner_xi) = core.corner_values(p);
        Ok(InterpLine {
            h,
            bdry,
            coin,
            corner_zeta,
            corner_eta,
            corner_xi,
            zeta_support,
            xi_support,
            width: core.line_width(),
        })
    }
}

/// Weights of the 4-point Lagrange stencil at nodes −1, 0, 1, 2 evaluated at x.
#[inline]
pub(crate) fn lagrange4(x: f64) -> [f64; 4] {
    let (xm, x1, x2) = (x + 1.0, x - 1.0, x - 2.0);
    [-x * x1 * x2 / 6.0, xm * x1 * x2 / 2.0, -xm * x * x2 / 2.0, xm * x * x1 / 6.0]
}

/// Line data interpolated from the lattice.
#[derive(Debug, Clone)]
pub(crate) struct InterpLine {
    h: f64,
    bdry: Vec<Complex64>,
    coin: Vec<Complex64>,
    corner_zeta: Complex64,
    corner_eta: Complex64,
    corner_xi: Complex64,
    zeta_support: (f64, f64),
    xi_support: (f64, f64),
    width: f64,
}

impl InterpLine {
    #[inline]
    fn stencil(&self, x: f64, n: usize) -> (usize, [f64; 4]) {
        let u = x / self.h;
        let start = (u.floor() as i64 - 1).clamp(0, n as i64 - 4) as usize;
        (start, lagrange4(u - start as f64 - 1.0))
    }
}

impl LineData for InterpLine {
    fn zeta_eta(&self, b: f64) -> Result<(Complex64, Complex64)> {
        if b == 0.0 {
            return Ok((self.corner_zeta, self.corner_eta));
        }
        let n = self.bdry.len() / 2;
        if n < 4 || b < self.zeta_support.0 || b > self.zeta_support.1 {
            return Ok((ZERO, ZERO));
        }
        let (s, w) = self.stencil(b, n);
        let (mut z, mut e) = (ZERO, ZERO);
        for (i, wi) in w.iter().enumerate() {
            z += self.bdry[2 * (s + i)] * *wi;
            e += self.bdry[2 * (s + i) + 1] * *wi;
        }
        Ok((z, e))
    }

    fn xi(&self, c: f64) -> Result<Complex64> {
        if c == 0.0 {
            return Ok(self.corner_xi);
        }
        let n = self.coin.len();
        if n < 4 || c < self.xi_support.0 || c > self.xi_support.1 {
            return Ok(ZERO);
        }
        let (s, w) = self.stencil(c, n);
        let mut x = ZERO;
        for (i, wi) in w.iter().enumerate() {
            x += self.coin[s + i] * *wi;
        }
        Ok(x)
    }

    fn zeta_support(&self) -> (f64, f64) {
        self.zeta_support
    }

    fn xi_support(&self) -> (f64, f64) {
        self.xi_support
    }

    fn panel_width(&self) -> f64 {
        self.width
    }
}

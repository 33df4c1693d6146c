//! Bessel functions by an exact-arithmetic power series: 512-bit fixed point,
//! summed until the terms vanish.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Fixed-point bits of the oracle.
const P: u64 = 512;

fn to_fixed(x: f64) -> BigInt {
    // x = m · 2^e exactly.
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = if exp == 0 { (bits & ((1 << 52) - 1)) << 1 } else { (bits & ((1 << 52) - 1)) | (1 << 52) };
    let shift = exp - 1075 + P as i64;
    let m = BigInt::from(mant);
    let v = if shift >= 0 { m << shift as u64 } else { m >> (-shift) as u64 };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn from_fixed(v: &BigInt) -> f64 {
    // Keep 80 significant bits before converting.
    let bits = v.bits();
    if bits <= 80 {
        return v.to_f64().unwrap() / 2f64.powi(P as i32);
    }
    let drop = bits - 80;
    (v >> drop).to_f64().unwrap() * 2f64.powi(drop as i32 - P as i32)
}

/// Σ_k (−1)^k (x/2)^{2k+n} / (k!(k+n)!) for n ∈ {0, 1}, in fixed point.
pub fn series_oracle(x: f64, n: u32) -> f64 {
    let half_x = to_fixed(x) >> 1u32;
    let q = (&half_x * &half_x) >> P;
    let mut term = if n == 0 { BigInt::from(1) << P } else { half_x.clone() };
    let mut sum = term.clone();
    let mut k: u64 = 1;
    while !term.is_zero() || k < 3 {
        term = -((&term * &q) >> P) / BigInt::from(k * (k + n as u64));
        sum += &term;
        k += 1;
        if term.abs() < BigInt::from(1) && k > 10 {
            break;
        }
    }
    from_fixed(&sum)
}

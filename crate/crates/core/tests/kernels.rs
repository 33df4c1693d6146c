//! Cauchy and Goursat kernel formulas against exact solutions and an
//! independent finite-difference integrator.

use multitime::solver::{goursat_eval, kg_cauchy_eval, kg_cauchy_eval_mass};
use multitime::specfun::bessel_j0;
use multitime::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn plane_wave_is_reproduced() {
    let e = 2f64.sqrt();
    let f = |s: f64| (I * s).exp();
    let g = |s: f64| -I * e * (I * s).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let t = rng.gen_range(0.0..2.0);
        let s = rng.gen_range(-3.0..3.0);
        let w = kg_cauchy_eval(f, g, t, s, 1e-12).unwrap();
        let exact = (I * (s - e * t)).exp();
        assert!((w - exact).norm() < 1e-8, "({t}, {s}): {w} vs {exact}");
    }
    let w = kg_cauchy_eval(f, g, 0.7, 0.3, 1e-12).unwrap();
    assert!((w - (I * (0.3 - e * 0.7)).exp()).norm() < 1e-8);
}

#[test]
fn constant_cauchy_data_oscillate_in_time() {
    // Space-independent data reduce the equation to w_tt + ω²w = 0, so
    // w(0) = 1, w_t(0) = 0 gives cos(ωt) everywhere.
    for omega in [1.0, 2.0] {
        for (t, s) in [(1.0, 0.0), (0.35, -1.2), (1.7, 0.4)] {
            let w = kg_cauchy_eval_mass(|_| c(1.0), |_| c(0.0), t, s, omega, 1e-12).unwrap();
            assert!((w.re - (omega * t).cos()).abs() < 1e-10 && w.im.abs() < 1e-14, "ω={omega} ({t},{s}): {w}");
        }
    }
}

#[test]
fn cauchy_solution_satisfies_klein_gordon() {
    // Gaussian data; the second-difference residual of w_tt − w_ss + ω²w.
    let f = |s: f64| c((-s * s / 0.08).exp());
    let g = |s: f64| Complex64::new(0.0, s * (-s * s / 0.08).exp());
    let omega = 2.0;
    let w = |t: f64, s: f64| kg_cauchy_eval_mass(f, g, t, s, omega, 1e-13).unwrap();
    let h = 1e-3;
    for (t, s) in [(0.4, 0.1), (0.9, -0.3), (1.2, 0.5)] {
        let wtt = (w(t + h, s) - 2.0 * w(t, s) + w(t - h, s)) / (h * h);
        let wss = (w(t, s + h) - 2.0 * w(t, s) + w(t, s - h)) / (h * h);
        let res = (wtt - wss + omega * omega * w(t, s)).norm();
        assert!(res < 1e-4, "residual {res:e} at ({t}, {s})");
    }
}

#[test]
fn time_zero_and_negative_time() {
    let f = |s: f64| c(s.cos());
    assert_eq!(kg_cauchy_eval(f, |_| c(0.0), 0.0, 0.4, 1e-12).unwrap(), f(0.4));
    assert!(matches!(kg_cauchy_eval(f, f, -0.1, 0.0, 1e-12), Err(Error::Domain(_))));
}

#[test]
fn constant_goursat_data_give_j0() {
    for omega in [1.0, 2.0] {
        for (t, s) in [(1.0, 0.25), (0.6, -0.2), (1.5, 1.0)] {
            let u = goursat_eval(|_| c(1.0), |_| c(1.0), t, s, omega, 1e-12).unwrap();
            let j0 = bessel_j0(omega * (t * t - s * s).sqrt()).unwrap();
            assert!((u.re - j0).abs() < 1e-8 && u.im.abs() < 1e-12, "ω={omega} ({t},{s})");
        }
    }
}

#[test]
fn goursat_restricts_to_characteristic_data() {
    let zeta = |b: f64| Complex64::new(1.0 + b, b * b);
    let xi = |c: f64| Complex64::new((-c).exp(), c);
    for t in [0.2, 0.7] {
        let u = goursat_eval(zeta, xi, t, t, 2.0, 1e-12).unwrap();
        assert!((u - zeta(t)).norm() < 1e-12);
        let u = goursat_eval(zeta, xi, t, -t, 2.0, 1e-12).unwrap();
        assert!((u - xi(t)).norm() < 1e-12);
    }
}

#[test]
fn goursat_domain_and_corner_errors() {
    assert!(matches!(goursat_eval(|_| c(1.0), |_| c(1.0), 0.5, 0.7, 1.0, 1e-12), Err(Error::Domain(_))));
    assert!(goursat_eval(|_| c(1.0), |_| c(1.1), 0.5, 0.1, 1.0, 1e-12).is_err());
}

/// Second-order characteristic marching for U_βγ + ω²U = 0 with
/// U(β, 0) = ζ(β), U(0, γ) = ξ(γ), on an n×n grid of [0, β_max]×[0, γ_max].
/// Returns U at the far corner.
fn march(zeta: impl Fn(f64) -> f64, xi: impl Fn(f64) -> f64, beta: f64, gamma: f64, omega: f64, n: usize) -> f64 {
    let (hb, hg) = (beta / n as f64, gamma / n as f64);
    let a = 0.25 * hb * hg * omega * omega;
    let mut prev: Vec<f64> = (0..=n).map(|j| xi(j as f64 * hg)).collect();
    let mut cur = vec![0.0; n + 1];
    for i in 1..=n {
        cur[0] = zeta(i as f64 * hb);
        for j in 1..=n {
            let (u00, u10, u01) = (prev[j - 1], cur[j - 1], prev[j]);
            cur[j] = (u10 + u01 - u00 - a * (u10 + u01 + u00)) / (1.0 + a);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

#[test]
fn goursat_matches_finite_difference_marching() {
    // ζ(b) = b, ξ(c) = c, ω = 1 at (t, s) = (0.8, 0).
    let u = goursat_eval(c, c, 0.8, 0.0, 1.0, 1e-12).unwrap();
    let fd = march(|b| b, |x| x, 0.4, 0.4, 1.0, 2000);
    assert!((u.re - fd).abs() < 1e-5, "{} vs {fd}", u.re);

    // Oscillatory data with matching corner, ω = 2, off the axis.
    let zeta = |b: f64| (3.0 * b).cos() + b * b;
    let xi = |x: f64| (-x).exp() + (2.0 * x).sin();
    let (t, s) = (1.0, 0.3);
    let u = goursat_eval(|b| c(zeta(b)), |x| c(xi(x)), t, s, 2.0, 1e-12).unwrap();
    let fd = march(zeta, xi, 0.5 * (t + s), 0.5 * (t - s), 2.0, 2000);
    assert!((u.re - fd).abs() < 1e-5, "{} vs {fd}", u.re);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn goursat_is_linear(t in 0.1f64..1.5, frac in -1.0f64..1.0, a in -2.0f64..2.0) {
        let s = frac * t;
        let z1 = |b: f64| c(1.0 + b);
        let x1 = |x: f64| c(1.0 - x);
        let z2 = |b: f64| Complex64::new(b.sin(), 2.0);
        let x2 = |x: f64| Complex64::new(x * x, 2.0);
        let u1 = goursat_eval(z1, x1, t, s, 2.0, 1e-12).unwrap();
        let u2 = goursat_eval(z2, x2, t, s, 2.0, 1e-12).unwrap();
        let u = goursat_eval(|b| z1(b) + z2(b) * a, |x| x1(x) + x2(x) * a, t, s, 2.0, 1e-12).unwrap();
        prop_assert!((u - (u1 + u2 * a)).norm() < 1e-10);
    }

    #[test]
    fn cauchy_solution_is_bounded_by_energy_for_plane_waves(k in -3.0f64..3.0, t in 0.0f64..2.0, s in -2.0f64..2.0) {
        // |e^{i(ks − Et)}| = 1 for every wave number.
        let e = (1.0 + k * k).sqrt();
        let w = kg_cauchy_eval(|x| (I * k * x).exp(), |x| -I * e * (I * k * x).exp(), t, s, 1e-12).unwrap();
        prop_assert!((w.norm() - 1.0).abs() < 1e-8);
    }
}

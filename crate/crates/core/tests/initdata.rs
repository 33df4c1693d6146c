//! Initial data: normalisation and frame against an independent grid
//! quadrature, compatibility on the diagonal, the tabulated loader and the
//! Lorentz behaviour of the boundary coefficient.

use multitime::config::RunConfig;
use multitime::initdata::{
    build_gaussian_product, build_gaussian_product_with, compute_pi, CompatMode, GaussianProductSpec, InitialData,
    KillingVector, Normalization, TabulatedField,
};
use multitime::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use std::fmt::Write as _;

/// (∬ photon-minus block, ∬ photon-plus block) of Σ|ψ̊|² by the trapezoid rule.
fn block_masses(data: &InitialData) -> (f64, f64) {
    let r = data.support();
    let n = 641;
    let (hx, hy) = ((r.ph_hi - r.ph_lo) / (n - 1) as f64, (r.el_hi - r.el_lo) / (n - 1) as f64);
    let (mut minus, mut plus) = (0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            let c = data.eval(r.ph_lo + hx * i as f64, r.el_lo + hy * k as f64);
            minus += c[0].norm_sqr() + c[1].norm_sqr();
            plus += c[2].norm_sqr() + c[3].norm_sqr();
        }
    }
    (minus * hx * hy, plus * hx * hy)
}

fn amps(v: [(f64, f64); 4]) -> [Complex64; 4] {
    v.map(|(re, im)| Complex64::new(re, im))
}

#[test]
fn rest_frame_normalisation() {
    for seed in [1, 2, 3] {
        let spec = GaussianProductSpec {
            amplitudes: GaussianProductSpec::random_amplitudes(seed, 0.0),
            ..GaussianProductSpec::default()
        };
        let data = build_gaussian_product(&spec).unwrap();
        let (minus, plus) = block_masses(&data);
        assert!((0.25 * (minus + plus) - 1.0).abs() < 1e-8, "pi0");
        assert!((plus - minus).abs() < 1e-8, "blocks not balanced");
        let x = data.killing();
        assert!((x.x0 - 1.0).abs() < 1e-9 && x.x1.abs() < 1e-9);
        let (pi0, pi1) = compute_pi(&data, 1e-12).unwrap();
        assert!((pi0 - 1.0).abs() < 1e-9 && pi1.abs() < 1e-9);
    }
}

#[test]
fn global_normalisation_keeps_the_frame_of_the_data() {
    let spec = GaussianProductSpec {
        amplitudes: amps([(2.0, 0.0), (1.0, 0.0), (1.0, 0.0), (1.0, 0.0)]),
        ..Default::default()
    };
    let data = build_gaussian_product_with(&spec, Normalization::GlobalOnly).unwrap();
    let (minus, plus) = block_masses(&data);
    let (pi0, pi1) = (0.25 * (minus + plus), 0.25 * (plus - minus));
    assert!((pi0 - 1.0).abs() < 1e-8);
    // Minus block |2|²+|1|² = 5 against 2: π¹ = (2 − 5)/7.
    assert!((pi1 + 3.0 / 7.0).abs() < 1e-8);
    let eta = pi0 * pi0 - pi1 * pi1;
    let x = data.killing();
    assert!((x.x0 - pi0 / eta).abs() < 1e-7 && (x.x1 - pi1 / eta).abs() < 1e-7);
}

#[test]
fn separated_gaussians_are_compatible() {
    let data = build_gaussian_product(&GaussianProductSpec::default()).unwrap();
    assert!(data.compatibility_residual_at(0.5) < 1e-10);
    let (worst, _) = data.compatibility_residual(1001);
    assert!(worst < 1e-10);
}

#[test]
fn overlapping_data_need_pinned_amplitudes() {
    let overlapping = GaussianProductSpec {
        separation: 0.0,
        amplitudes: amps([(1.0, 0.0), (0.3, 0.2), (1.0, -0.5), (1.0, 0.0)]),
        theta: 0.7,
        ..Default::default()
    };
    assert!(matches!(build_gaussian_product(&overlapping), Err(Error::Compatibility { .. })));
    let pinned = GaussianProductSpec { compat: CompatMode::Pinned, ..overlapping };
    let data = build_gaussian_product(&pinned).unwrap();
    let (worst, _) = data.compatibility_residual(501);
    assert!(worst < 1e-10 * data.peak_amplitude());
    let c = data.boundary_coefficient();
    assert!((c.arg() - 0.7).abs() < 1e-12 && (c.norm() - 1.0).abs() < 1e-9);
}

#[test]
fn invalid_specs_are_rejected() {
    let zero = GaussianProductSpec { amplitudes: [Complex64::new(0.0, 0.0); 4], ..Default::default() };
    assert!(matches!(build_gaussian_product(&zero), Err(Error::InvalidData(_))));
    let bad_sigma = GaussianProductSpec { sigma: -0.1, ..Default::default() };
    assert!(matches!(build_gaussian_product(&bad_sigma), Err(Error::InvalidData(_))));
    // One empty photon block cannot be balanced into the rest frame.
    let one_block = GaussianProductSpec {
        amplitudes: amps([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]),
        ..Default::default()
    };
    assert!(matches!(build_gaussian_product(&one_block), Err(Error::Balance(_))));
    assert!(KillingVector::new(1.0, 1.0).is_err() && KillingVector::new(-1.0, 0.0).is_err());
}

#[test]
fn truncated_data_have_compact_support() {
    let spec = GaussianProductSpec { truncate: Some(6.0), ..Default::default() };
    let data = build_gaussian_product(&spec).unwrap();
    let r = data.support();
    assert!((r.ph_hi - 0.6).abs() < 1e-12);
    assert!(data.eval(0.61, 1.0).iter().all(|c| c.norm() == 0.0));
    assert!(data.eval(0.0, 1.0).iter().all(|c| c.norm() > 0.0));
}

fn gaussian_csv(shuffle: bool) -> String {
    let n = 41;
    let mut rows = Vec::new();
    for i in 0..n {
        for k in 0..n {
            let (x, y) = (-0.4 + 0.02 * i as f64, 0.6 + 0.02 * k as f64);
            let g = (-(x * x + (y - 1.0) * (y - 1.0)) / 0.02).exp();
            rows.push(format!("{x},{y},{g},0,{},{},{},0,{g},0", 0.5 * g, 0.5 * g, 0.5 * g));
        }
    }
    if shuffle {
        rows.reverse();
        rows.swap(3, 700);
    }
    let mut s = String::from("s_ph,s_el,re_mm,im_mm,re_mp,im_mp,re_pm,im_pm,re_pp,im_pp\n# comment\n");
    for r in rows {
        let _ = writeln!(s, "{r}");
    }
    s
}

#[test]
fn tabulated_field_reproduces_nodes_and_interpolates() {
    use multitime::initdata::InitialField;
    let field = TabulatedField::from_csv(&gaussian_csv(true)).unwrap();
    let g = |x: f64, y: f64| (-(x * x + (y - 1.0) * (y - 1.0)) / 0.02).exp();
    let v = field.eval(0.0, 1.0);
    assert!((v[0].re - 1.0).abs() < 1e-12 && (v[1].im - 0.5).abs() < 1e-12);
    let v = field.eval(0.013, 0.987);
    assert!((v[0].re - g(0.013, 0.987)).abs() < 2e-3);
    assert!(field.eval(1.0, 1.0).iter().all(|c| c.norm() == 0.0));
    let s = field.support();
    assert!((s.ph_lo + 0.4).abs() < 1e-12 && (s.el_hi - 1.4).abs() < 1e-12);
}

#[test]
fn tabulated_loader_rejects_bad_grids() {
    let mut text = gaussian_csv(false);
    // Drop one row: incomplete grid.
    let cut = text.rfind("\n-0.4").unwrap_or(text.len() - 1);
    text.truncate(cut + 1);
    assert!(TabulatedField::from_csv(&text).is_err());
    assert!(TabulatedField::from_csv("0,0,1,0,0,0,0,0,0,0\n0,1,1,0\n").is_err());
    let irregular = "0,0,1,0,0,0,0,0,0,0\n0.1,0,1,0,0,0,0,0,0,0\n0.3,0,1,0,0,0,0,0,0,0\n0.35,0,1,0,0,0,0,0,0,0\n";
    assert!(TabulatedField::from_csv(irregular).is_err());
}

#[test]
fn tabulated_data_load_through_the_run_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.csv");
    std::fs::write(&path, gaussian_csv(false)).unwrap();
    let cfg = RunConfig::parse(&format!("data_file = {}\n", path.display())).unwrap();
    let data = cfg.initial_data().unwrap();
    let (pi0, pi1) = compute_pi(&data, 1e-10).unwrap();
    assert!((pi0 - 1.0).abs() < 1e-8 && pi1.abs() < 1e-8);
}

#[test]
fn theta_only_changes_the_boundary_phase() {
    let data = build_gaussian_product(&GaussianProductSpec::default()).unwrap();
    let rotated = data.with_theta(std::f64::consts::FRAC_PI_2);
    assert_eq!(data.eval(0.1, 0.9), rotated.eval(0.1, 0.9));
    let (a, b) = (data.boundary_coefficient(), rotated.boundary_coefficient());
    assert!((b - a * Complex64::new(0.0, 1.0)).norm() < 1e-12);
}

proptest! {
    #[test]
    fn boosting_multiplies_the_boundary_ratio(x1 in -0.9f64..0.9, a in -2.0f64..2.0) {
        let x = KillingVector::new(1.0, x1).unwrap();
        let b = x.boosted(a);
        prop_assert!((b.boundary_ratio() - a.exp() * x.boundary_ratio()).abs() < 1e-10 * b.boundary_ratio());
        // The Minkowski norm is unchanged.
        prop_assert!(((b.x0 * b.x0 - b.x1 * b.x1) - (1.0 - x1 * x1)).abs() < 1e-9 * b.x0 * b.x0);
    }

    #[test]
    fn random_amplitudes_are_compatible_and_balanced(seed in 0u64..10_000, theta in 0.0f64..std::f64::consts::TAU) {
        let a = GaussianProductSpec::random_amplitudes(seed, theta);
        prop_assert!((a[1] - Complex64::from_polar(1.0, theta) * a[2]).norm() < 1e-12);
        prop_assert!(((a[0].norm_sqr() + a[1].norm_sqr()) - (a[2].norm_sqr() + a[3].norm_sqr())).abs() < 1e-12);
        prop_assert!(a.iter().all(|c| (0.5..=1.5).contains(&c.norm())));
    }
}

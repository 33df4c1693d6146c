//! Bessel functions against an exact-arithmetic power series.

mod common;

use common::bessel::series_oracle;
use multitime::specfun::{bessel_j0, bessel_j1, j1_ratio, kernels_sq};
use proptest::prelude::*;

#[test]
fn oracle_reproduces_tabulated_values() {
    assert!((series_oracle(1.0, 0) - 0.765_197_686_557_966_6).abs() < 1e-15);
    assert!((series_oracle(1.0, 1) - 0.440_050_585_744_933_5).abs() < 1e-15);
}

#[test]
fn j0_j1_match_series_on_a_thousand_points() {
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let x = 32.0 * i as f64 / 999.0;
        worst = worst.max((bessel_j0(x).unwrap() - series_oracle(x, 0)).abs());
        worst = worst.max((bessel_j1(x).unwrap() - series_oracle(x, 1)).abs());
    }
    assert!(worst < 1e-10, "worst deviation {worst:e}");
}

#[test]
fn negative_arguments_follow_parity() {
    for x in [0.3, 4.0, 17.5] {
        assert_eq!(bessel_j0(-x).unwrap(), bessel_j0(x).unwrap());
        assert_eq!(bessel_j1(-x).unwrap(), -bessel_j1(x).unwrap());
    }
}

proptest! {
    #[test]
    fn j1_ratio_is_j1_over_x(x in 1e-3f64..30.0) {
        let r = j1_ratio(x).unwrap();
        prop_assert!((r - series_oracle(x, 1) / x).abs() < 1e-10 / x.max(1.0) + 1e-12);
    }

    #[test]
    fn squared_argument_kernels_agree(x in 0.0f64..30.0) {
        let k = kernels_sq(x * x);
        prop_assert!((k.j0 - series_oracle(x, 0)).abs() < 1e-10);
        if x > 1e-3 {
            prop_assert!((k.j1_ratio - series_oracle(x, 1) / x).abs() < 1e-10);
        }
    }

    #[test]
    fn bessel_values_are_bounded(x in -100.0f64..100.0) {
        prop_assert!(bessel_j0(x).unwrap().abs() <= 1.0);
        prop_assert!(bessel_j1(x).unwrap().abs() <= 0.6);
    }
}

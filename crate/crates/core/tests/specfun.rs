use piston_core::specfun::{
    bessel_j, bessel_j_and_prime, bessel_k0, bessel_k01, bessel_k1, bessel_roots, bessel_roots_below, kernel_k1prime,
    mcmahon_estimate, RootKind,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn modified_bessel_reference_values() {
    // (x, K0, K1) from published tables
    let table = [
        (0.1, 2.427_069_024_702_017, 9.853_844_780_870_606),
        (1.0, 0.421_024_438_240_708_3, 0.601_907_230_197_234_6),
        (2.0, 0.113_893_872_749_533_4, 0.139_865_881_816_522_4),
        (5.0, 3.691_098_334_042_594e-3, 4.044_613_445_452_164e-3),
        (10.0, 1.778_006_231_616_765e-5, 1.864_877_345_382_558e-5),
    ];
    for (x, k0, k1) in table {
        let (a, b) = bessel_k01(x).unwrap();
        assert!(rel(a, k0) < 1e-13, "K0({x}) = {a}");
        assert!(rel(b, k1) < 1e-13, "K1({x}) = {b}");
    }
}

#[test]
fn bessel_j_reference_values() {
    let table = [
        (0, 1.0, 0.765_197_686_557_966_6),
        (1, 1.0, 0.440_050_585_744_933_5),
        (0, 10.0, -0.245_935_764_451_348_3),
        (1, 10.0, 0.043_472_746_168_861_44),
        (5, 10.0, -0.234_061_528_186_793_6),
        (0, 30.0, -0.086_367_983_581_040_21),
        (2, 30.0, 0.078_451_246_073_265_35),
    ];
    for (n, x, v) in table {
        assert!((bessel_j(n, x) - v).abs() < 1e-14, "J_{n}({x}) = {}", bessel_j(n, x));
    }
}

#[test]
fn bessel_zero_reference_values() {
    let z = bessel_roots(0, 2, RootKind::Value).unwrap();
    assert!((z[0] - 2.404_825_557_695_773).abs() < 1e-13);
    assert!((z[1] - 5.520_078_110_286_311).abs() < 1e-13);
    assert!((bessel_roots(1, 1, RootKind::Value).unwrap()[0] - 3.831_705_970_207_512).abs() < 1e-13);
    assert!((bessel_roots(2, 1, RootKind::Value).unwrap()[0] - 5.135_622_301_840_683).abs() < 1e-13);
    assert!((bessel_roots(1, 1, RootKind::Derivative).unwrap()[0] - 1.841_183_781_340_659).abs() < 1e-13);
    assert!((bessel_roots(2, 1, RootKind::Derivative).unwrap()[0] - 3.054_236_928_227_140).abs() < 1e-13);
    assert!((bessel_roots(0, 1, RootKind::Derivative).unwrap()[0] - 3.831_705_970_207_512).abs() < 1e-13);
}

#[test]
fn roots_below_consistent_with_counted_roots() {
    for n in [0, 3, 17] {
        for kind in [RootKind::Value, RootKind::Derivative] {
            let below = bessel_roots_below(n, 80.0, kind);
            let counted = bessel_roots(n, below.len(), kind).unwrap();
            for (a, b) in below.iter().zip(&counted) {
                assert!((a - b).abs() < 1e-12);
            }
            let next = bessel_roots(n, below.len() + 1, kind).unwrap();
            assert!(*next.last().unwrap() > 80.0);
        }
    }
}

#[test]
fn domain_errors() {
    assert!(bessel_k0(0.0).is_err());
    assert!(bessel_k1(-1.0).is_err());
    assert!(kernel_k1prime(f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kernel_is_derivative_of_k1(x in 0.05f64..40.0) {
        let h = 1e-5 * x;
        let fd = (bessel_k1(x + h).unwrap() - bessel_k1(x - h).unwrap()) / (2.0 * h);
        let k = kernel_k1prime(x).unwrap();
        prop_assert!(rel(fd, k) < 1e-7, "x={} fd={} k={}", x, fd, k);
        prop_assert!(k < 0.0);
    }

    #[test]
    fn k_functions_positive_and_decreasing(x in 0.01f64..50.0, dx in 1e-3f64..1.0) {
        let (k0, k1) = bessel_k01(x).unwrap();
        let (k0b, k1b) = bessel_k01(x + dx).unwrap();
        prop_assert!(k0 > 0.0 && k1 > k0);
        prop_assert!(k0b < k0 && k1b < k1);
    }

    #[test]
    fn k_recurrence_k0_prime(x in 0.05f64..30.0) {
        // K0' = -K1
        let h = 1e-5 * x;
        let fd = (bessel_k0(x + h).unwrap() - bessel_k0(x - h).unwrap()) / (2.0 * h);
        prop_assert!(rel(-fd, bessel_k1(x).unwrap()) < 1e-7);
    }

    #[test]
    fn j_three_term_recurrence(n in 1u32..40, x in 0.5f64..80.0) {
        let lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
        let rhs = 2.0 * n as f64 / x * bessel_j(n, x);
        prop_assert!((lhs - rhs).abs() < 1e-12, "n={} x={} {} vs {}", n, x, lhs, rhs);
    }

    #[test]
    fn roots_are_zeros_and_interlace(n in 0u32..30, count in 1usize..12) {
        let z = bessel_roots(n, count, RootKind::Value).unwrap();
        let z1 = bessel_roots(n + 1, count, RootKind::Value).unwrap();
        for k in 0..count {
            prop_assert!(bessel_j(n, z[k]).abs() < 1e-12);
            prop_assert!(z[k] < z1[k]);
            if k + 1 < count {
                prop_assert!(z1[k] < z[k + 1]);
            }
        }
        let d = bessel_roots(n, count, RootKind::Derivative).unwrap();
        for r in d {
            prop_assert!(bessel_j_and_prime(n, r).1.abs() < 1e-12);
        }
    }

    #[test]
    fn mcmahon_close_to_polished_root(n in 0u32..5, m in 20usize..60) {
        let exact = bessel_roots(n, m, RootKind::Value).unwrap()[m - 1];
        let err = rel(mcmahon_estimate(n, m, RootKind::Value), exact);
        let err_far = rel(mcmahon_estimate(n, 2 * m, RootKind::Value), bessel_roots(n, 2 * m, RootKind::Value).unwrap()[2 * m - 1]);
        prop_assert!(err < 1e-6, "err {}", err);
        prop_assert!(err_far <= err + 1e-15);
    }
}

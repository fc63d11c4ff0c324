use piston_core::identities::{
    direct_sum, identity_i_closed, identity_i_integral, identity_ii_asymptotic, identity_ii_exact, identity_iii_closed,
    identity_iii_integral, identity_iv_asymptotic, verify_identities, CLOSED_FORM_TOL, IDENTITY_TOL,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn closed_form_reference_value() {
    // sum 1/(l^2+1)^2 = (pi^2 csch^2(pi) + pi coth(pi) - 2) / 4
    let x = PI;
    let reference = (x * x / x.sinh().powi(2) + x / x.tanh() - 2.0) / 4.0;
    assert!(rel(identity_ii_exact(1.0), reference) < 1e-14);
    assert!(rel(direct_sum(1.0, 2.0, 100_000), reference) < CLOSED_FORM_TOL);
}

#[test]
fn suite_passes_and_is_seeded() {
    let a = verify_identities(32, 11);
    let b = verify_identities(32, 11);
    assert_eq!(a, b);
    assert!(a.all_passed(), "{a:#?}");
    assert_eq!(a.checks.len(), 5);
    assert!(a.checks.iter().all(|c| c.samples >= 33));
}

#[test]
fn asymptotic_forms_fail_at_small_alpha() {
    // the asymptotic expansions are not exact: at alpha = 1/2 they are far off
    assert!(rel(identity_ii_asymptotic(0.5), direct_sum(0.5, 2.0, 100_000)) > 0.1);
    assert!(rel(identity_iv_asymptotic(0.5), direct_sum(0.5, 1.5, 100_000)) > 0.1);
    // and they converge as alpha grows
    let err = |a: f64| rel(identity_ii_asymptotic(a), identity_ii_exact(a));
    assert!(err(1.0) > err(2.0) && err(2.0) > err(4.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bessel_integrals(l in 1u32..4, a in 0.05f64..1.0, len in 0.2f64..6.0) {
        prop_assert!(rel(identity_i_integral(l, a, len), identity_i_closed(l, a, len)) < IDENTITY_TOL);
        prop_assert!(rel(identity_iii_integral(l, a, len), identity_iii_closed(l, a, len)) < IDENTITY_TOL);
    }

    #[test]
    fn large_alpha_sums(alpha in 10.0f64..40.0) {
        prop_assert!(rel(direct_sum(alpha, 2.0, 100_000), identity_ii_asymptotic(alpha)) < IDENTITY_TOL);
        prop_assert!(rel(direct_sum(alpha, 1.5, 100_000), identity_iv_asymptotic(alpha)) < IDENTITY_TOL);
    }

    #[test]
    fn exact_sum_any_alpha(alpha in 0.2f64..8.0) {
        prop_assert!(rel(identity_ii_exact(alpha), direct_sum(alpha, 2.0, 100_000)) < CLOSED_FORM_TOL);
    }
}

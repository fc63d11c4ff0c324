use piston_core::billiards::{analytic_spectrum, quarter_circle_spectrum, weyl_data, BoundaryCondition, Shape};
use piston_core::helmholtz::{
    cache_key, certify_completeness, obtain_spectrum, solve_up_to, solve_up_to_cached, HelmholtzError, OffsetKind,
    SolverConfig, SpectrumCache,
};
use proptest::prelude::*;

const D: BoundaryCondition = BoundaryCondition::Dirichlet;

fn radius_of(shape: Shape) -> f64 {
    match shape {
        Shape::Stadium { radius, .. } => radius,
        _ => unreachable!(),
    }
}

#[test]
fn solver_reproduces_quarter_circle() {
    // a stadium with a tiny straight section is solved numerically; its
    // spectrum must agree with the quarter disk to first order in the length
    let shape = Shape::unit_stadium(1e-7);
    let solved = solve_up_to(&shape, 40.0, &SolverConfig::default()).unwrap();
    let exact = quarter_circle_spectrum(radius_of(shape), D, 40.0).unwrap();
    assert_eq!(solved.total_count(), exact.total_count());
    for (s, e) in solved.levels().iter().zip(exact.levels()) {
        assert!((s.lambda - e.lambda).abs() < 1e-5 * e.lambda, "{} vs {}", s.lambda, e.lambda);
    }
}

#[test]
fn ground_state_converges_under_mesh_doubling() {
    let shape = Shape::unit_stadium(1.0);
    let coarse = SolverConfig::default();
    let fine = SolverConfig { points_per_wavelength: 2.0 * coarse.points_per_wavelength, ..coarse };
    let a = solve_up_to(&shape, 6.0, &coarse).unwrap().levels()[0].lambda;
    let b = solve_up_to(&shape, 6.0, &fine).unwrap().levels()[0].lambda;
    assert!((a - b).abs() < 1e-6 * b, "{a} vs {b}");
}

#[test]
fn solved_stadium_is_certified_complete() {
    // 0.925 has a close cluster whose joint refinement once lost two levels
    for ratio in [0.5, 0.925] {
        let shape = Shape::unit_stadium(ratio);
        let s = solve_up_to(&shape, 60.0, &SolverConfig::default()).unwrap();
        let r = certify_completeness(&s, &weyl_data(&shape, D));
        assert!(r.is_complete(), "{ratio}: {:?}", r.suspects);
    }
}

#[test]
fn configuration_checks() {
    let shape = Shape::unit_stadium(1.0);
    let wide = SolverConfig { window_width: 1.5, ..SolverConfig::default() };
    assert!(matches!(solve_up_to(&shape, 10.0, &wide), Err(HelmholtzError::WindowTooWide { .. })));
    let coarse = SolverConfig { points_per_wavelength: 6.0, ..SolverConfig::default() };
    assert!(matches!(solve_up_to(&shape, 10.0, &coarse), Err(HelmholtzError::InvalidConfig(_))));
    assert!(matches!(solve_up_to(&Shape::unit_square(), 10.0, &SolverConfig::default()), Err(HelmholtzError::UnsupportedShape(_))));
    let n = obtain_spectrum(&shape, BoundaryCondition::Neumann, 10.0, &SolverConfig::default(), None);
    assert!(matches!(n, Err(HelmholtzError::UnsupportedShape(_))));
}

#[test]
fn closed_forms_bypass_the_solver() {
    let cfg = SolverConfig::default();
    let via = obtain_spectrum(&Shape::unit_stadium(0.0), D, 50.0, &cfg, None).unwrap();
    let qc = analytic_spectrum(&Shape::unit_quarter_circle(), D, 50.0).unwrap();
    assert_eq!(via, qc);
    let sq = obtain_spectrum(&Shape::unit_square(), BoundaryCondition::Neumann, 50.0, &cfg, None).unwrap();
    assert_eq!(sq, analytic_spectrum(&Shape::unit_square(), BoundaryCondition::Neumann, 50.0).unwrap());
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SpectrumCache::new(dir.path());
    let cfg = SolverConfig::default();
    let shape = Shape::unit_stadium(0.3);
    let first = solve_up_to_cached(&shape, 20.0, &cfg, Some(&cache)).unwrap();
    let key = cache_key(&shape, D, 20.0, &cfg);
    assert!(cache.path_for(&key).exists());
    // a planted file under the key is returned as is
    let planted = first.with_one_removed(0);
    cache.store(&key, &planted).unwrap();
    let stored = cache.load(&key).unwrap();
    assert_eq!(stored.total_count() + 1, first.total_count());
    assert_eq!(solve_up_to_cached(&shape, 20.0, &cfg, Some(&cache)).unwrap(), stored);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn deleted_level_is_localized(frac in 0.0f64..1.0, circle in any::<bool>()) {
        let shape = if circle { Shape::unit_circle() } else { Shape::unit_triangle() };
        let s = analytic_spectrum(&shape, D, 120.0).unwrap();
        let w = weyl_data(&shape, D);
        let blind = certify_completeness(&s, &w).blind_from;
        let idx = ((s.levels().len() as f64 * frac) as usize).min(s.levels().len() - 1);
        let lam = s.levels()[idx].lambda;
        prop_assume!(lam < blind);
        let r = certify_completeness(&s.with_one_removed(idx), &w);
        prop_assert!(!r.is_complete());
        let first = r.suspects[0];
        prop_assert_eq!(first.kind, OffsetKind::Deficit);
        prop_assert!(first.lo <= lam && lam <= first.hi, "{} not in {:?}", lam, first);
    }
}

use piston_core::billiards::{
    analytic_spectrum, circle_spectrum, quarter_circle_spectrum, rectangle_spectrum, triangle_spectrum, weyl_count,
    weyl_data, BoundaryCondition, Level, Shape, Spectrum, SpectrumSource,
};
use proptest::prelude::*;
use std::f64::consts::PI;

const D: BoundaryCondition = BoundaryCondition::Dirichlet;
const N: BoundaryCondition = BoundaryCondition::Neumann;

#[test]
fn square_levels_by_brute_force() {
    // lambda^2 = pi^2 (m^2 + n^2) on the unit square
    let s = rectangle_spectrum(1.0, 1.0, D, 40.0).unwrap();
    let mut brute = Vec::new();
    for m in 1..20u32 {
        for n in 1..20u32 {
            let l = PI * ((m * m + n * n) as f64).sqrt();
            if l <= 40.0 {
                brute.push(l);
            }
        }
    }
    brute.sort_by(f64::total_cmp);
    let flat: Vec<f64> =
        s.levels().iter().flat_map(|l| std::iter::repeat(l.lambda).take(l.multiplicity as usize)).collect();
    assert_eq!(flat.len(), brute.len());
    for (a, b) in flat.iter().zip(&brute) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn neumann_rectangle_includes_axis_modes() {
    let s = rectangle_spectrum(2.0, 0.5, N, 10.0).unwrap();
    assert!((s.levels()[0].lambda - PI / 2.0).abs() < 1e-14);
}

#[test]
fn equilateral_triangle_ground_state() {
    // lambda_1 = 4 pi / (sqrt(3) side) for Dirichlet walls
    let side = 1.3;
    let s = triangle_spectrum(side, D, 20.0).unwrap();
    assert!((s.levels()[0].lambda - 4.0 * PI / (3f64.sqrt() * side)).abs() < 1e-12);
    let n = triangle_spectrum(side, N, 20.0).unwrap();
    assert!((n.levels()[0].lambda - 4.0 * PI / (3.0 * side)).abs() < 1e-12);
}

#[test]
fn disk_multiplicities() {
    let s = circle_spectrum(1.0, D, 12.0).unwrap();
    assert!((s.levels()[0].lambda - 2.404_825_557_695_773).abs() < 1e-13);
    assert_eq!(s.levels()[0].multiplicity, 1);
    assert_eq!(s.levels()[1].multiplicity, 2);
    // quarter disk keeps only even orders of sin type
    let q = quarter_circle_spectrum(1.0, D, 12.0).unwrap();
    assert!((q.levels()[0].lambda - 5.135_622_301_840_683).abs() < 1e-13);
    assert!(q.levels().iter().all(|l| l.multiplicity == 1));
}

#[test]
fn weyl_tracks_counts() {
    for shape in [Shape::unit_square(), Shape::unit_rectangle(4.0), Shape::unit_triangle(), Shape::unit_circle(), Shape::unit_quarter_circle()] {
        for bc in [D, N] {
            let s = analytic_spectrum(&shape, bc, 200.0).unwrap();
            let w = weyl_data(&shape, bc);
            // average of the staircase over [150, 200] against the smooth count
            let mut acc = 0.0;
            let steps = 500;
            for i in 0..steps {
                let l = 150.0 + 50.0 * (i as f64 + 0.5) / steps as f64;
                acc += s.count_below(l) as f64 - weyl_count(&w, l * l);
            }
            let mean = acc / steps as f64;
            assert!(mean.abs() < 0.5, "{} {bc}: mean residual {mean}", shape.describe());
        }
    }
}

#[test]
fn unit_area_constructors() {
    for shape in [Shape::unit_square(), Shape::unit_rectangle(4.0), Shape::unit_triangle(), Shape::unit_circle(), Shape::unit_quarter_circle(), Shape::unit_stadium(0.3)] {
        assert!((shape.area() - 1.0).abs() < 1e-14, "{}", shape.describe());
    }
    let qs = Shape::unit_stadium(0.0);
    let qc = Shape::unit_quarter_circle();
    assert!((qs.perimeter() - qc.perimeter()).abs() < 1e-14);
    assert!((qs.chi() - qc.chi()).abs() < 1e-14);
}

#[test]
fn stadium_perimeter_minimum() {
    // P(x) on unit area is smallest at x = 1 - pi/4
    let p = |x: f64| Shape::unit_stadium(x).perimeter();
    let x0 = 1.0 - PI / 4.0;
    assert!(p(x0) < p(x0 - 0.01) && p(x0) < p(x0 + 0.01));
}

#[test]
fn malformed_spectrum_files_rejected() {
    for text in ["", "bc=D\n", "# bc=D lambda_max=10\n", "# bc=D lambda_max=10 source=analytic\n2.0\n", "# bc=D lambda_max=10 source=analytic\n3.0,1\n2.0,1\n"] {
        assert!(Spectrum::read_from(text.as_bytes()).is_err(), "accepted {text:?}");
    }
}

#[test]
fn save_and_load_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("circle.spectrum");
    let s = circle_spectrum(0.5, N, 60.0).unwrap();
    s.save(&p).unwrap();
    let back = Spectrum::load(&p).unwrap();
    assert_eq!(back.levels().len(), s.levels().len());
    for (a, b) in back.levels().iter().zip(s.levels()) {
        assert!((a.lambda - b.lambda).abs() <= 5e-13 * b.lambda);
        assert_eq!(a.multiplicity, b.multiplicity);
    }
    // the printed form is a fixed point
    let q = dir.path().join("again.spectrum");
    back.save(&q).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
}

fn round_to_file_precision(x: f64) -> f64 {
    format!("{x:.12e}").parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_text_round_trip(raw in prop::collection::vec((0.1f64..1e4, 1u32..5), 1..60), neumann in any::<bool>()) {
        let mut values: Vec<f64> = raw.iter().map(|r| round_to_file_precision(r.0)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * *a);
        let levels: Vec<Level> = values.iter().zip(&raw).map(|(&lambda, r)| Level { lambda, multiplicity: r.1 }).collect();
        let bc = if neumann { N } else { D };
        let s = Spectrum::new(levels, bc, 1e4, SpectrumSource::NumericSolver).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let back = Spectrum::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &s);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn rectangle_scale_covariance(lx in 0.3f64..3.0, ly in 0.3f64..3.0, s in 0.5f64..2.0) {
        let a = rectangle_spectrum(lx, ly, D, 40.0).unwrap();
        let b = rectangle_spectrum(s * lx, s * ly, D, 40.0 / s).unwrap();
        prop_assert_eq!(a.levels().len(), b.levels().len());
        for (x, y) in a.levels().iter().zip(b.levels()) {
            prop_assert!((x.lambda - s * y.lambda).abs() < 1e-12 * x.lambda);
            prop_assert_eq!(x.multiplicity, y.multiplicity);
        }
    }

    #[test]
    fn rectangle_swap_symmetry(lx in 0.3f64..3.0, ly in 0.3f64..3.0, neumann in any::<bool>()) {
        let bc = if neumann { N } else { D };
        let a = rectangle_spectrum(lx, ly, bc, 30.0).unwrap();
        let b = rectangle_spectrum(ly, lx, bc, 30.0).unwrap();
        prop_assert_eq!(a.total_count(), b.total_count());
    }

    #[test]
    fn removing_one_level_drops_count_by_one(idx in 0usize..200) {
        let s = analytic_spectrum(&Shape::unit_square(), D, 80.0).unwrap();
        let idx = idx % s.levels().len();
        prop_assert_eq!(s.with_one_removed(idx).total_count() + 1, s.total_count());
    }

    #[test]
    fn truncation_is_prefix(cut in 5.0f64..80.0) {
        let s = analytic_spectrum(&Shape::unit_triangle(), D, 80.0).unwrap();
        let t = s.truncated(cut);
        prop_assert_eq!(t.total_count(), s.count_below(cut * (1.0 + 1e-15)));
        prop_assert!(t.levels().iter().all(|l| l.lambda <= cut));
    }

    #[test]
    fn dirichlet_above_neumann(k in 1u64..400) {
        // Neumann eigenvalues never exceed the Dirichlet ones of the same index
        let shape = Shape::unit_circle();
        let d = analytic_spectrum(&shape, D, 80.0).unwrap();
        let n = analytic_spectrum(&shape, N, 80.0).unwrap();
        if let (Some(ld), Some(ln)) = (d.nth_eigenvalue(k), n.nth_eigenvalue(k)) {
            prop_assert!(ln <= ld);
        }
    }
}

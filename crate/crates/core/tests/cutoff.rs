use std::sync::Arc;

use calabi_core::cutoff::{
    choose_balls, cutoff_flow, cutoff_profile, is_monotone_within_error, pde_crosscheck,
    pde_samples, scaling_study, shell_points, CutoffLoop, LemmaConfig, ScalingRow,
};
use calabi_core::hamflow::{rk4, GeneratingHamiltonian, QuadratureRule, Rk4Workspace, ScalarField};
use calabi_core::linalg::{distance, norm};
use calabi_core::nullhomotopy::{build_based_homotopy, SymplecticHomotopy};
use calabi_core::symplin::{rotation_loop, WeightVector};
use calabi_core::Error;
use proptest::prelude::*;

fn example() -> Arc<dyn SymplecticHomotopy> {
    Arc::new(build_based_homotopy(&WeightVector::new(vec![-1, 1])).unwrap())
}

fn family(outer: f64, steps: usize) -> CutoffLoop {
    let lp = rotation_loop(&WeightVector::new(vec![-1, 1]), 64);
    let b = choose_balls(&lp, outer, 1.25).unwrap();
    CutoffLoop::new(
        example(),
        cutoff_profile(b.middle, b.outer).unwrap(),
        1.0,
        steps,
    )
}

fn cheap() -> LemmaConfig {
    LemmaConfig {
        steps: 40,
        quadrature: QuadratureRule::Midpoint { per_axis: 6 },
        t_nodes: 4,
        bound_grid: 9,
        ..LemmaConfig::default()
    }
}

#[test]
fn balls_are_nested_with_room_for_the_loop() {
    let lp = rotation_loop(&WeightVector::new(vec![2, -1, -1]), 64);
    let b = choose_balls(&lp, 0.5, 1.25).unwrap();
    assert!(b.kappa >= 1.0 - 1e-12);
    assert!(b.kappa * b.inner < b.middle && b.middle < b.outer);
    assert!(matches!(
        choose_balls(&lp, 0.5, 1.0),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        choose_balls(&lp, -1.0, 1.25),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn degenerate_profile_is_refused() {
    assert!(cutoff_profile(0.5, 0.5).is_err());
    assert!(cutoff_profile(0.0, 0.5).is_err());
}

#[test]
fn fast_stepping_agrees_with_plain_rk4_on_the_field() {
    let fam = family(0.5, 60);
    for t in [0.2, 0.65] {
        let slice = fam.slice_at(t);
        for x in shell_points(4, 0.01, 0.55, 12, 3) {
            let got = slice.apply_vec(&x);
            let mut want = x.clone();
            rk4(&slice, &mut want, 0.0, 1.0, 60, &mut Rk4Workspace::new(4));
            assert!(
                distance(&got, &want) < 1e-13,
                "|x|={}: {}",
                norm(&x),
                distance(&got, &want)
            );
        }
    }
}

#[test]
fn maps_are_the_identity_outside_the_support() {
    let fam = family(0.4, 40);
    let slice = fam.slice_at(0.37);
    for x in shell_points(4, 0.4, 1.5, 20, 9) {
        assert_eq!(slice.apply_vec(&x), x);
    }
}

#[test]
fn maps_agree_with_the_linear_loop_on_the_inner_ball() {
    let lp = rotation_loop(&WeightVector::new(vec![-1, 1]), 64);
    let b = choose_balls(&lp, 0.5, 1.25).unwrap();
    let h = example();
    let p = cutoff_profile(b.middle, b.outer).unwrap();
    for t in [0.1, 0.5, 0.9] {
        let a = h.value(1.0, t);
        for x in shell_points(4, 0.0, b.inner, 8, 5) {
            let y = cutoff_flow(h.clone(), p, 1.0, t, &x, 200).unwrap();
            assert!(distance(&y, &a.mul_vec(&x)) < 1e-5 * (1.0 + norm(&x)));
        }
    }
}

#[test]
fn wrong_point_dimension_is_an_error() {
    let p = cutoff_profile(0.3, 0.5).unwrap();
    assert!(matches!(
        cutoff_flow(example(), p, 1.0, 0.2, &[0.1, 0.2], 10),
        Err(Error::Dimension(_))
    ));
}

#[test]
fn generator_is_homogeneous_under_dilation() {
    // g for outer radius 2ρ is the conjugate of g for ρ by x ↦ 2x, so
    // G_{2ρ}(2x) = 4·G_ρ(x).
    let small = family(0.25, 60);
    let large = family(0.5, 60);
    let (gs, gl) = (
        GeneratingHamiltonian::new(&small),
        GeneratingHamiltonian::new(&large),
    );
    for x in shell_points(4, 0.02, 0.3, 6, 11) {
        let x2: Vec<f64> = x.iter().map(|c| 2.0 * c).collect();
        for t in [0.25, 0.75] {
            let (a, b) = (gl.value(t, &x2), 4.0 * gs.value(t, &x));
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn certified_bound_scales_with_the_sixth_power_of_the_radius() {
    let lp = rotation_loop(&WeightVector::new(vec![-1, 1]), 64);
    let rows = scaling_study(&lp, example(), &[0.5, 0.25], &cheap()).unwrap();
    let ratio = rows[0].certified_bound / rows[1].certified_bound;
    assert!((ratio - 64.0).abs() < 1e-9, "{ratio}");
    for r in &rows {
        assert!(r.cal_abs <= r.certified_bound, "{r:?}");
    }
}

#[test]
fn monotonicity_allows_for_the_error_bars() {
    let row = |outer, cal_abs: f64, error| ScalingRow {
        outer,
        cal: cal_abs,
        cal_abs,
        error,
        certified_bound: 1.0,
    };
    assert!(is_monotone_within_error(&[
        row(0.5, 1.0, 0.0),
        row(0.25, 0.1, 0.0)
    ]));
    assert!(is_monotone_within_error(&[
        row(0.25, 1.05, 0.1),
        row(0.5, 1.0, 0.0)
    ]));
    assert!(!is_monotone_within_error(&[
        row(0.5, 1.0, 0.01),
        row(0.25, 2.0, 0.01)
    ]));
}

#[test]
fn generator_satisfies_the_transport_equation() {
    let fam = family(0.5, 80);
    let samples = pde_samples(4, 0.5, 3, 1);
    let rep = pde_crosscheck(example(), *fam.profile(), &samples, 0.3, 80).unwrap();
    assert_eq!(rep.rows.len(), 3);
    assert!(rep.max_residual < 1e-3, "{rep:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_is_a_monotone_step(mid in 0.05f64..1.0, gap in 0.05f64..1.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let p = cutoff_profile(mid, mid + gap).unwrap();
        let (r1, r2) = (2.5 * u, 2.5 * v);
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!((0.0..=1.0).contains(&p.value(lo)));
        prop_assert!(p.value(hi) <= p.value(lo));
        prop_assert!(p.derivative(lo) <= 0.0);
        if lo <= mid { prop_assert_eq!(p.value(lo), 1.0); }
        if lo >= mid + gap { prop_assert_eq!(p.value(lo), 0.0); }
    }

    #[test]
    fn profile_derivative_matches_differences(mid in 0.1f64..1.0, gap in 0.1f64..1.0, u in 0.02f64..0.98) {
        let p = cutoff_profile(mid, mid + gap).unwrap();
        let r = mid + u * gap;
        let h = 1e-6 * gap;
        let fd = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
        prop_assert!((fd - p.derivative(r)).abs() < 1e-6 / gap);
    }

    #[test]
    fn slices_are_invertible(t in 0.0f64..1.0, seed in 0u64..1000) {
        // The shell is thin, so backward RK4 needs a few hundred steps.
        let fam = family(0.5, 320);
        let slice = fam.slice_at(t);
        for x in shell_points(4, 0.0, 0.6, 3, seed) {
            let y = slice.apply_vec(&x);
            let mut back = vec![0.0; 4];
            calabi_core::hamflow::TimeSlice::invert(&slice, &y, &mut back);
            prop_assert!(distance(&back, &x) < 1e-5, "|x|={}", norm(&x));
        }
    }
}

use calabi_core::linalg::Mat;
use calabi_core::symplin::{
    complex_linearity_residual, identity_loop, maslov_index, maslov_report, rotation_loop,
    rotation_matrix, standard_j, symplectic_inverse, symplectic_residual, unitary_part, MatrixLoop,
    SymplecticMatrix, WeightVector,
};
use proptest::prelude::*;

fn weights(max_n: usize, bound: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-bound..=bound, 1..=max_n)
}

/// `[[I, S], [0, I]]` with symmetric `S`, symplectic for any such `S`.
fn shear(n: usize, s: &[f64]) -> Mat {
    Mat::from_fn(2 * n, |i, j| {
        if i == j {
            1.0
        } else if i < n && j >= n {
            let (a, b) = (i, j - n);
            s[a.min(b) * n + a.max(b)]
        } else {
            0.0
        }
    })
}

/// `diag(e^λ, e^{−λ})` per plane.
fn stretch(n: usize, l: &[f64]) -> Mat {
    let mut d = vec![0.0; 2 * n];
    for k in 0..n {
        d[k] = l[k].exp();
        d[n + k] = (-l[k]).exp();
    }
    Mat::diagonal(&d)
}

#[test]
fn quarter_turn_of_weight_one_maps_q_to_p() {
    let r = rotation_matrix(&WeightVector::new(vec![1]), 0.25);
    let v = r.mul_vec(&[1.0, 0.0]);
    assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15, "{v:?}");
}

#[test]
fn example_loop_has_index_zero() {
    assert_eq!(
        maslov_index(&rotation_loop(&WeightVector::new(vec![-1, 1]), 64)).unwrap(),
        0
    );
}

#[test]
fn identity_loop_has_index_zero() {
    assert_eq!(maslov_index(&identity_loop(2, 8)).unwrap(), 0);
}

#[test]
fn open_path_is_rejected() {
    let w = WeightVector::new(vec![1]);
    let samples: Vec<Mat> = (0..=8)
        .map(|k| rotation_matrix(&w, 0.5 * k as f64 / 8.0))
        .collect();
    assert!(MatrixLoop::from_samples(samples, 1e-9).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_of_rotation_loop_is_weight_sum(a in weights(3, 4)) {
        let w = WeightVector::new(a.clone());
        let r = maslov_report(&rotation_loop(&w, 128)).unwrap();
        prop_assert_eq!(r.index, a.iter().sum::<i64>());
        prop_assert!(r.residual < 0.1);
    }

    #[test]
    fn index_is_additive_under_pointwise_product(a in weights(2, 3), b in weights(2, 3)) {
        let n = a.len().max(b.len());
        let pad = |v: &[i64]| { let mut v = v.to_vec(); v.resize(n, 0); WeightVector::new(v) };
        let (wa, wb) = (pad(&a), pad(&b));
        let la = rotation_loop(&wa, 96);
        let lb = rotation_loop(&wb, 96);
        let prod = la.pointwise_product(&lb).unwrap();
        prop_assert_eq!(
            maslov_index(&prod).unwrap(),
            maslov_index(&la).unwrap() + maslov_index(&lb).unwrap()
        );
    }

    #[test]
    fn rotations_are_symplectic_and_orthogonal(a in weights(3, 5), t in 0.0f64..1.0) {
        let r = rotation_matrix(&WeightVector::new(a), t);
        prop_assert!(symplectic_residual(&r).unwrap() < 1e-13);
        let rtr = &r.transpose() * &r;
        prop_assert!(rtr.max_abs_diff(&Mat::identity(r.dim())) < 1e-13);
        prop_assert!(complex_linearity_residual(&r) < 1e-13);
    }

    #[test]
    fn unitary_part_is_orthogonal_symplectic_and_complex(
        a in weights(2, 3),
        t in 0.0f64..1.0,
        s in prop::collection::vec(-1.0f64..1.0, 4),
        l in prop::collection::vec(-0.7f64..0.7, 2),
    ) {
        let n = a.len();
        let r = rotation_matrix(&WeightVector::new(a), t);
        let m = &(&shear(n, &s) * &r) * &stretch(n, &l);
        let m = SymplecticMatrix::new(m, 1e-9).unwrap();
        let u = unitary_part(&m).unwrap();
        let u = u.as_mat();
        prop_assert!(symplectic_residual(u).unwrap() < 1e-9);
        prop_assert!((&u.transpose() * u).max_abs_diff(&Mat::identity(2 * n)) < 1e-9);
        prop_assert!(complex_linearity_residual(u) < 1e-9);
    }

    #[test]
    fn unitary_part_fixes_rotations(a in weights(3, 3), t in 0.0f64..1.0) {
        let r = rotation_matrix(&WeightVector::new(a), t);
        let u = unitary_part(&SymplecticMatrix::new(r.clone(), 1e-12).unwrap()).unwrap();
        prop_assert!(u.as_mat().max_abs_diff(&r) < 1e-12);
    }

    #[test]
    fn symplectic_inverse_inverts(s in prop::collection::vec(-2.0f64..2.0, 4), l in prop::collection::vec(-1.0f64..1.0, 2)) {
        let m = &shear(2, &s) * &stretch(2, &l);
        let prod = &symplectic_inverse(&m) * &m;
        prop_assert!(prod.max_abs_diff(&Mat::identity(4)) < 1e-12);
        let j = standard_j(2);
        prop_assert!((&(&m.transpose() * &j) * &m).max_abs_diff(&j) < 1e-12);
    }

    #[test]
    fn conjugating_by_a_symplectic_matrix_keeps_the_index(
        a in weights(2, 3),
        s in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let n = a.len();
        let w = WeightVector::new(a.clone());
        let p = shear(n, &s);
        let pinv = symplectic_inverse(&p);
        let samples: Vec<Mat> = (0..=128)
            .map(|k| &(&p * &rotation_matrix(&w, k as f64 / 128.0)) * &pinv)
            .collect();
        let lp = MatrixLoop::from_samples(samples, 1e-9).unwrap();
        prop_assert_eq!(maslov_index(&lp).unwrap(), a.iter().sum::<i64>());
    }
}

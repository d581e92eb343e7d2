use calabi_core::linalg::Mat;
use calabi_core::nullhomotopy::{
    belt_homotopy, build_based_homotopy, check_boundaries, homotopy_hamiltonian, pair_decompose,
    ConstantHomotopy, SymplecticHomotopy,
};
use calabi_core::symplin::{rotation_matrix, WeightVector};
use calabi_core::Error;
use proptest::prelude::*;

fn balanced(max_n: usize, bound: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-bound..=bound, 1..max_n).prop_map(|mut v| {
        let s: i64 = v.iter().sum();
        v.push(-s);
        v
    })
}

/// Classical RK4 on `ẋ = S(s)·x` over `s ∈ [0, 1]`, written out independently
/// of the library integrators.
fn flow_in_s(h: &dyn SymplecticHomotopy, t: f64, x0: &[f64], steps: usize) -> Vec<f64> {
    let field = |s: f64, x: &[f64]| -> Vec<f64> {
        homotopy_hamiltonian(h, s, t)
            .unwrap()
            .generator()
            .mul_vec(x)
    };
    let dt = 1.0 / steps as f64;
    let mut x = x0.to_vec();
    for k in 0..steps {
        let s = k as f64 * dt;
        let add = |a: &[f64], b: &[f64], c: f64| {
            a.iter().zip(b).map(|(u, v)| u + c * v).collect::<Vec<_>>()
        };
        let k1 = field(s, &x);
        let k2 = field(s + 0.5 * dt, &add(&x, &k1, 0.5 * dt));
        let k3 = field(s + 0.5 * dt, &add(&x, &k2, 0.5 * dt));
        let k4 = field(s + dt, &add(&x, &k3, dt));
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[test]
fn unbalanced_weights_are_refused() {
    let w = WeightVector::new(vec![1, 1]);
    assert!(matches!(
        pair_decompose(&w),
        Err(Error::UnbalancedWeights { sum: 2 })
    ));
    assert!(matches!(
        build_based_homotopy(&w),
        Err(Error::UnbalancedWeights { .. })
    ));
}

#[test]
fn example_boundaries_vanish_on_a_grid() {
    for w in [vec![-1, 1], vec![2, -1, -1], vec![1, 1, -2]] {
        let h = build_based_homotopy(&WeightVector::new(w.clone())).unwrap();
        let r = check_boundaries(&h, 21, 21).unwrap();
        assert!(
            r.max_boundary() < 1e-9 && r.symplectic < 1e-9,
            "{w:?}: {r:?}"
        );
    }
}

#[test]
fn belt_reaches_the_double_transfer() {
    let h = belt_homotopy(2).unwrap();
    let target = rotation_matrix(&WeightVector::new(vec![2, -2]), 0.3);
    assert!(h.value(1.0, 0.3).max_abs_diff(&target) < 1e-12);
}

#[test]
fn constant_homotopy_has_zero_hamiltonian() {
    let h = ConstantHomotopy { half_dim: 2 };
    let q = homotopy_hamiltonian(&h, 0.4, 0.7).unwrap();
    assert!(q.q.max_abs() == 0.0);
}

#[test]
fn flow_of_the_homotopy_hamiltonian_reproduces_the_end_map() {
    let h = build_based_homotopy(&WeightVector::new(vec![-1, 1])).unwrap();
    let tracers = [
        [1.0, 0.0, 0.0, 0.0],
        [0.3, -0.2, 0.5, 0.1],
        [-0.4, 0.7, 0.2, -0.6],
    ];
    for t in [0.1, 0.3, 0.7] {
        for x0 in &tracers {
            let x1 = flow_in_s(&h, t, x0, 200);
            let want = h.value(1.0, t).mul_vec(x0);
            let err: Vec<f64> = x1.iter().zip(&want).map(|(a, b)| a - b).collect();
            assert!(
                norm(&err) / norm(&want) < 1e-5,
                "t={t}: {}",
                norm(&err) / norm(&want)
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transfers_sum_back_to_the_weights(a in balanced(5, 4)) {
        let w = WeightVector::new(a.clone());
        let mut back = vec![0i64; a.len()];
        for tr in pair_decompose(&w).unwrap() {
            prop_assert!(tr.from != tr.to && tr.count > 0);
            back[tr.from] += tr.count as i64;
            back[tr.to] -= tr.count as i64;
        }
        prop_assert_eq!(back, a);
    }

    #[test]
    fn based_homotopy_boundaries_hold(a in balanced(4, 3)) {
        let h = build_based_homotopy(&WeightVector::new(a)).unwrap();
        let r = check_boundaries(&h, 9, 9).unwrap();
        prop_assert!(r.max_boundary() < 1e-9, "{:?}", r);
        prop_assert!(r.symplectic < 1e-9, "{:?}", r);
    }

    #[test]
    fn homotopy_hamiltonian_is_symmetric(a in balanced(3, 2), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let h = build_based_homotopy(&WeightVector::new(a)).unwrap();
        let q = homotopy_hamiltonian(&h, s, t).unwrap().q;
        prop_assert!(q.max_abs_diff(&q.transpose()) == 0.0);
        prop_assert!(q.max_abs().is_finite());
    }

    #[test]
    fn identity_slices_have_unit_determinant(a in balanced(3, 2), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let h = build_based_homotopy(&WeightVector::new(a)).unwrap();
        let m: Mat = h.value(s, t);
        prop_assert!((m.determinant() - 1.0).abs() < 1e-9);
    }
}

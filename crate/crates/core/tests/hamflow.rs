use std::f64::consts::PI;

use calabi_core::hamflow::{
    ball_symplectic_volume, calabi, flow, gauss_legendre_unit, hofer_length_estimate, pairwise_sum,
    poisson_bracket, recover_generating_hamiltonian, rk4, BallQuadrature, FlowMap, LoopFamily,
    QuadraticField, RadialBump, Rk4Workspace, ScalarField, SmoothBump, TimeSlice, VectorField,
};
use calabi_core::linalg::{norm, Mat};
use calabi_core::symplin::{rotation_matrix, symplectic_inverse, WeightVector};
use calabi_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `ẋ = (x₂, −x₁)·(1 + t)`; exact solution rotates clockwise by `t + t²/2`.
struct TimedOscillator;

impl VectorField for TimedOscillator {
    fn dim(&self) -> usize {
        2
    }

    fn velocity(&self, t: f64, x: &[f64], out: &mut [f64]) {
        out[0] = (1.0 + t) * x[1];
        out[1] = -(1.0 + t) * x[0];
    }
}

fn rk4_error(steps: usize) -> f64 {
    let mut x = [1.0, 0.0];
    rk4(
        &TimedOscillator,
        &mut x,
        0.0,
        1.0,
        steps,
        &mut Rk4Workspace::new(2),
    );
    let a: f64 = 1.5;
    ((x[0] - a.cos()).powi(2) + (x[1] + a.sin()).powi(2)).sqrt()
}

struct Rotation(WeightVector);

struct Linear(Mat, Mat);

impl TimeSlice for Linear {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.0.mul_vec_into(x, out);
    }

    fn invert(&self, y: &[f64], out: &mut [f64]) {
        self.1.mul_vec_into(y, out);
    }
}

impl LoopFamily for Rotation {
    fn dim(&self) -> usize {
        2 * self.0.len()
    }

    fn slice(&self, t: f64) -> Box<dyn TimeSlice + '_> {
        let m = rotation_matrix(&self.0, t);
        let inv = symplectic_inverse(&m);
        Box::new(Linear(m, inv))
    }
}

fn random_bump(rng: &mut ChaCha8Rng, dim: usize) -> SmoothBump {
    SmoothBump {
        center: (0..dim).map(|_| rng.gen_range(-0.3..0.3)).collect(),
        width: rng.gen_range(0.3..0.6),
        amplitude: rng.gen_range(0.5..2.0),
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let (e1, e2) = (rk4_error(20), rk4_error(40));
    let order = (e1 / e2).log2();
    assert!(e1 / e2 >= 16.0 * 0.7, "ratio {} (order {order})", e1 / e2);
}

#[test]
fn quadratic_flow_matches_the_linear_exponential() {
    // H = −π|z|² rotates counterclockwise once per unit time.
    let h = QuadraticField {
        q: Mat::identity(2).scaled(-PI),
    };
    let x = flow(&h, &[1.0, 0.0], 0.0, 0.25, 400, None).unwrap();
    assert!((x[0]).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9, "{x:?}");
}

#[test]
fn leaving_the_domain_is_an_error() {
    let h = QuadraticField {
        q: Mat::from_row_major(2, &[0.0, 1.0, 1.0, 0.0]),
    };
    let r = flow(&h, &[1.0, 1.0], 0.0, 5.0, 500, Some(2.0));
    assert!(matches!(r, Err(Error::DomainEscape { .. })), "{r:?}");
}

#[test]
fn bump_flow_is_symplectic_and_reversible() {
    let bump = SmoothBump {
        center: vec![0.1, 0.0, -0.1, 0.2],
        width: 0.8,
        amplitude: 1.0,
    };
    let map = FlowMap::new(&bump, 0.0, 1.0);
    for x in [[0.2, 0.1, 0.0, 0.3], [-0.3, 0.2, 0.1, 0.0]] {
        assert!(map.symplectic_residual(&x).unwrap() < 1e-5);
        assert!(map.reversibility_residual(&x).unwrap() < 1e-9);
    }
}

#[test]
fn ball_volume_by_quadrature() {
    for (dim, per_axis, tol) in [(2, 400, 1e-3), (4, 40, 1e-2)] {
        let q = BallQuadrature::midpoint(dim, 0.7, per_axis);
        let v = q.integrate(|_| 1.0).estimate.value;
        let exact = ball_symplectic_volume(dim / 2, 0.7);
        assert!((v / exact - 1.0).abs() < tol, "dim {dim}: {v} vs {exact}");
    }
}

#[test]
fn radial_bump_integral_matches_its_closed_form() {
    let b = RadialBump {
        dim: 4,
        radius: 0.8,
        power: 3,
        amplitude: 1.5,
    };
    let q = BallQuadrature::midpoint(4, 0.8, 36);
    let got = calabi(&b, &q, 2).estimate;
    // ω-measure is 2!·Lebesgue in ℝ⁴.
    let exact = 2.0 * b.lebesgue_integral();
    assert!(
        (got.value - exact).abs() <= got.error.max(1e-3 * exact),
        "{got:?} vs {exact}"
    );
}

#[test]
fn brackets_of_bumps_integrate_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let quad = BallQuadrature::midpoint(4, 1.25, 36);
    for pair in 0..10 {
        let f = random_bump(&mut rng, 4);
        let g = random_bump(&mut rng, 4);
        assert!(norm(&f.center) + f.width < 1.25 && norm(&g.center) + g.width < 1.25);
        let r = quad.integrate(|x| poisson_bracket(&f, &g, 0.0, x).unwrap());
        assert!(
            r.estimate.value.abs() < 5.0 * r.estimate.error,
            "pair {pair}: {:?}",
            r.estimate
        );
    }
}

#[test]
fn bracket_is_antisymmetric_and_canonical() {
    let f = QuadraticField {
        q: Mat::from_row_major(2, &[0.5, 0.0, 0.0, 0.0]),
    };
    let g = QuadraticField {
        q: Mat::from_row_major(2, &[0.0, 0.0, 0.0, 0.5]),
    };
    // F = q²/2, G = p²/2: ∇F·(−J∇G) = (q, 0)·(p, 0) = qp.
    let x = [0.3, -0.7];
    let fg = poisson_bracket(&f, &g, 0.0, &x).unwrap();
    let gf = poisson_bracket(&g, &f, 0.0, &x).unwrap();
    assert!((fg - x[0] * x[1]).abs() < 1e-14);
    assert!((fg + gf).abs() < 1e-14);
}

#[test]
fn recovered_hamiltonian_of_a_rotation_is_quadratic() {
    let w = WeightVector::new(vec![1, -1]);
    let fam = Rotation(w);
    let x = [0.3, 0.1, -0.2, 0.4];
    let z2 = [x[0] * x[0] + x[2] * x[2], x[1] * x[1] + x[3] * x[3]];
    let want = -PI * (z2[0] - z2[1]);
    for t in [0.1, 0.55] {
        let got = recover_generating_hamiltonian(&fam, t, &x).unwrap();
        assert!((got - want).abs() < 1e-7, "t={t}: {got} vs {want}");
    }
}

#[test]
fn hofer_length_of_a_static_field_is_its_oscillation() {
    let b = RadialBump {
        dim: 2,
        radius: 1.0,
        power: 2,
        amplitude: 3.0,
    };
    let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.5, 0.0]];
    let h = hofer_length_estimate(&b, &pts, 8);
    assert!((h.length - 3.0).abs() < 1e-15);
    assert_eq!(h.samples, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly(order in 1usize..12, deg_frac in 0.0f64..1.0) {
        let deg = ((2 * order - 1) as f64 * deg_frac) as i32;
        let (x, w) = gauss_legendre_unit(order);
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
        prop_assert!((got - 1.0 / (deg + 1) as f64).abs() < 1e-13);
    }

    #[test]
    fn pairwise_sum_agrees_with_exact_integer_sum(v in prop::collection::vec(-1_000_000i64..1_000_000, 0..300)) {
        let f: Vec<f64> = v.iter().map(|&a| a as f64).collect();
        prop_assert_eq!(pairwise_sum(&f), v.iter().sum::<i64>() as f64);
    }

    #[test]
    fn hamiltonian_flow_preserves_energy(c in prop::collection::vec(-0.2f64..0.2, 4), x in prop::collection::vec(-0.5f64..0.5, 4)) {
        let bump = SmoothBump { center: c, width: 0.9, amplitude: 1.0 };
        let y = flow(&bump, &x, 0.0, 1.0, 200, None).unwrap();
        prop_assert!((bump.value(0.0, &y) - bump.value(0.0, &x)).abs() < 1e-6);
    }
}

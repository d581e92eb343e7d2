use std::f64::consts::PI;
use std::sync::Arc;

use calabi_core::cutoff::{cutoff_profile, CutoffLoop};
use calabi_core::hamflow::{LoopFamily, QuadratureRule, TimeSlice};
use calabi_core::manifolds::{chart_sample_points, darboux_chart, SphereProduct};
use calabi_core::nullhomotopy::{build_based_homotopy, SymplecticHomotopy};
use calabi_core::symplin::WeightVector;
use calabi_core::theorem::{
    run_theorem, verify_loop, ActionLoop, ComposedLoop, EpsilonPolicy, TheoremConfig,
};
use calabi_core::Error;

struct Identity(usize);

struct Fixed;

impl TimeSlice for Fixed {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn invert(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y);
    }
}

impl LoopFamily for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn slice(&self, _t: f64) -> Box<dyn TimeSlice + '_> {
        Box::new(Fixed)
    }
}

fn cheap(x: SphereProduct) -> TheoremConfig {
    let mut cfg = TheoremConfig::new(x);
    cfg.lemma.steps = 60;
    cfg.lemma.quadrature = QuadratureRule::Midpoint { per_axis: 6 };
    cfg.lemma.t_nodes = 4;
    cfg.lemma.tracers = 4;
    cfg.lemma.hofer_points = 64;
    cfg.lemma.bound_grid = 9;
    cfg.spot_check = QuadratureRule::Midpoint { per_axis: 6 };
    cfg.inner_points = 32;
    cfg.pde_samples = 2;
    cfg.chart_points = 6;
    cfg
}

#[test]
fn action_loop_closes() {
    let x = SphereProduct::two_spheres(1.0, 2.0).unwrap();
    let chart = darboux_chart(&x, 1.0).unwrap();
    let pts = chart_sample_points(&chart, 10, 2);
    assert!(verify_loop(&ActionLoop { chart: &chart }, &pts) < 1e-6);
}

#[test]
fn identity_family_has_zero_closure_defect() {
    let pts = vec![vec![0.1, 0.2, 0.3, 0.4], vec![-1.0, 0.0, 2.0, 0.5]];
    assert_eq!(verify_loop(&Identity(4), &pts), 0.0);
}

#[test]
fn composed_loop_is_the_identity_on_the_inner_ball() {
    // Inside the flat region g_t is the linear rotation, which equals f_t in the chart.
    let x = SphereProduct::two_spheres(1.0, 2.0).unwrap();
    let chart = darboux_chart(&x, 1.0).unwrap();
    let h: Arc<dyn SymplecticHomotopy> =
        Arc::new(build_based_homotopy(&WeightVector::new(vec![1, -1])).unwrap());
    let g = CutoffLoop::new(h, cutoff_profile(0.4, 0.5).unwrap(), 1.0, 200);
    let comp = ComposedLoop {
        chart: &chart,
        g: &g,
    };
    for t in [0.2, 0.6] {
        let slice = comp.slice(t);
        for z in [[0.1, 0.05, -0.1, 0.02], [0.0, 0.2, 0.1, -0.1]] {
            let mut y = [0.0; 4];
            slice.apply(&z, &mut y);
            let d: f64 = y
                .iter()
                .zip(&z)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(d < 1e-5, "t={t}: {d}");
        }
    }
}

#[test]
fn equal_radii_are_refused() {
    let x = SphereProduct::two_spheres(1.5, 1.5).unwrap();
    assert!(matches!(
        run_theorem(&cheap(x)),
        Err(Error::RequirementsNotMet(_))
    ));
}

#[test]
fn explicit_epsilon_must_be_positive() {
    let x = SphereProduct::two_spheres(1.0, 2.0).unwrap();
    let mut cfg = cheap(x);
    cfg.epsilon = EpsilonPolicy::Explicit(-1.0);
    assert!(run_theorem(&cfg).is_err());
}

#[test]
fn cheap_run_splits_the_target_between_the_loops() {
    let x = SphereProduct::two_spheres(1.0, 2.0).unwrap();
    let r = run_theorem(&cheap(x)).unwrap();
    let target = 768.0 * PI.powi(3);
    assert!((r.target_analytic - target).abs() < 1e-9 * target);
    assert!((r.epsilon - 384.0 * PI.powi(3)).abs() < 1e-9 * target);
    assert!((r.cal_h.value + r.cal_g.value - r.target.value).abs() < 1e-9 * target);
    assert!((r.action_maslov.value - 6.0 * PI).abs() < 1e-6);
    assert_eq!(r.loop_weights, vec![1, -1]);
    if r.pass {
        assert!(r.cal_h.value.abs() >= r.epsilon);
    }
    assert_eq!(r.pass, r.checks.iter().all(|c| c.pass));
}

//! End-to-end construction of a compactly supported Hamiltonian loop with
//! nonzero Calabi invariant on a sphere product minus a small ball.
//!
//! Steps: chart at the fixed point, linearize the action, check the Maslov
//! index, contract the linear loop, cut it off to `g`, then `h_t = g_t⁻¹∘f_t`
//! is generated by `H_t = (F̃ − G_t)∘g_t` and `Cal(h) = ∫F̃ωⁿ − Cal(g)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::cutoff::{
    lemma_loop, pde_crosscheck, pde_samples, shell_points, BallTriple, CutoffLoop, LemmaConfig,
    LemmaResiduals, ScalingRow, CHECK_TIMES,
};
use crate::error::{Error, Result};
use crate::hamflow::{
    ball_symplectic_volume, factorial, midpoint_times, pairwise_sum, BallQuadrature, Estimate,
    GeneratingHamiltonian, LoopFamily, QuadratureRule, ScalarField, TimeSlice,
};
use crate::linalg::{distance, norm};
use crate::manifolds::{
    action_maslov, chart_residuals, chart_sample_points, darboux_chart, fit_rotation_weights,
    linearized_loop, mean_integral, ActionMaslov, ChartResiduals, ChartSpec, SphereProduct,
    SphereQuadrature,
};
use crate::nullhomotopy::{build_based_homotopy, describe_transfers, SymplecticHomotopy};
use crate::symplin::{maslov_report, MatrixLoop};

/// The sign and normalization conventions every number in a report uses.
pub const CONVENTION_LEDGER: &str = "coordinates=(q1..qn,p1..pn); omega0=sum dq_j^dp_j; \
J=[[0,-I],[I,0]]; omega0(u,v)=<Ju,v>; X_H=-J grad H; {F,G}=dF(X_G); \
quadratic H=<x,Qx> flows by -2JQ; volume form=omega^n=n!*Lebesgue; \
sphere area form=r dtheta^dh; moment map F=sum 2pi c_j h_j; \
chart z_j=sqrt(2r/(r+eps h))(a1+i eps a2)";

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "policy", content = "value", rename_all = "snake_case")
)]
pub enum EpsilonPolicy {
    /// `ε = |∫F̃ωⁿ|/2`
    Paper,
    Explicit(f64),
}

/// Pass thresholds of the report's checks.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Tolerances {
    pub interpolation: f64,
    pub closure: f64,
    pub normalization: f64,
    /// Relative slack on the certified Calabi bound.
    pub bound_slack: f64,
    /// `sup |H_t|` on `B₁`, relative to `max |F̃|` on the chart.
    pub inner_ball: f64,
    pub chart: f64,
    pub pde: f64,
    pub h_loop: f64,
    /// Relative agreement of the quadrature target with the analytic one.
    pub target: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            interpolation: 1e-5,
            closure: 1e-6,
            normalization: 1e-9,
            bound_slack: 0.05,
            inner_ball: 1e-6,
            chart: 1e-6,
            pde: 1e-3,
            h_loop: 1e-5,
            target: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremConfig {
    pub product: SphereProduct,
    pub chart_radius: f64,
    /// Intervals of the sampled linearized loop.
    pub loop_intervals: usize,
    pub epsilon: EpsilonPolicy,
    pub lemma: LemmaConfig,
    /// Rule for the direct `Cal(h)` spot-check over `B₃`.
    pub spot_check: QuadratureRule,
    pub sphere_quadrature: SphereQuadrature,
    /// Quasi-random points for the `H_t|B₁` check.
    pub inner_points: usize,
    pub pde_samples: usize,
    pub pde_time: f64,
    pub chart_points: usize,
    /// Tracers recorded along `h_t` (0 disables).
    pub trajectory_tracers: usize,
    pub trajectory_times: usize,
    pub tolerances: Tolerances,
}

impl TheoremConfig {
    /// Defaults; products of three or more spheres switch to quasi-random
    /// ball quadrature.
    pub fn new(product: SphereProduct) -> Self {
        let (quadrature, spot_check) = if product.factors() <= 2 {
            (
                LemmaConfig::default().quadrature,
                QuadratureRule::Midpoint { per_axis: 8 },
            )
        } else {
            (
                QuadratureRule::QuasiRandom {
                    points: 16384,
                    seed: 0,
                },
                QuadratureRule::QuasiRandom {
                    points: 4096,
                    seed: 1,
                },
            )
        };
        Self {
            product,
            chart_radius: 1.0,
            loop_intervals: 64,
            epsilon: EpsilonPolicy::Paper,
            lemma: LemmaConfig {
                quadrature,
                ..LemmaConfig::default()
            },
            spot_check,
            sphere_quadrature: SphereQuadrature::default(),
            inner_points: 256,
            pde_samples: 5,
            pde_time: 0.3,
            chart_points: 20,
            trajectory_tracers: 0,
            trajectory_times: 11,
            tolerances: Tolerances::default(),
        }
    }
}

/// One named pass/fail line of a report.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn at_most(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        value,
        threshold,
        pass: value <= threshold,
    }
}

fn at_least(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        value,
        threshold,
        pass: value >= threshold,
    }
}

/// Hofer length estimate against `|Cal|`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HoferPair {
    pub length: f64,
    pub support_volume: f64,
    pub cal_abs: f64,
    pub cal_error: f64,
    /// `Vol(supp)·ℓ ≥ |Cal| − err`
    pub certified: bool,
    /// `ℓ ≥ |Cal|`, reported only.
    pub unnormalized: bool,
}

impl HoferPair {
    pub fn new(length: f64, support_volume: f64, cal: Estimate) -> Self {
        let cal_abs = cal.value.abs();
        Self {
            length,
            support_volume,
            cal_abs,
            cal_error: cal.error,
            certified: support_volume * length >= cal_abs - cal.error,
            unnormalized: length >= cal_abs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TrajectoryPoint {
    pub tracer: usize,
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CalabiReport {
    pub radii: Vec<f64>,
    pub moment_weights: Vec<f64>,
    pub fixed_point: Vec<i8>,
    pub chart_radius: f64,
    pub chart_clamped: bool,
    pub loop_weights: Vec<i64>,
    pub loop_fit_residual: f64,
    pub transfers: String,
    pub maslov_index: i64,
    pub maslov_residual: f64,
    pub moment_at_fixed_point: f64,
    pub volume: Estimate,
    pub moment_integral: Estimate,
    /// `∫F̃ωⁿ` by quadrature.
    pub target: Estimate,
    /// `−F(z₀)·Vol(X)`, using `∫ hⱼ dA = 0`.
    pub target_analytic: f64,
    pub epsilon: f64,
    pub balls: BallTriple,
    pub halvings: usize,
    /// `Cal(g)` at each outer radius tried.
    pub scaling: Vec<ScalingRow>,
    pub cal_g: Estimate,
    pub certified_bound: f64,
    pub cal_h: Estimate,
    pub cal_h_direct: Estimate,
    pub removed_ball_radius: f64,
    pub removed_ball_integral: f64,
    pub lemma_residuals: LemmaResiduals,
    /// `sup |H_t|` over samples of `B₁`.
    pub inner_ball_sup: f64,
    /// `max |F̃|` over the chart ball.
    pub scale: f64,
    pub chart: ChartResiduals,
    pub pde_residual: f64,
    pub h_loop_residual: f64,
    pub hofer_g: HoferPair,
    pub hofer_h: HoferPair,
    pub action_maslov: ActionMaslov,
    pub provenance: Vec<String>,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub trajectories: Vec<TrajectoryPoint>,
}

/// `h_t = g_t⁻¹ ∘ f_t` in chart coordinates.
pub struct ComposedLoop<'a> {
    pub chart: &'a ChartSpec,
    pub g: &'a CutoffLoop,
}

struct ComposedSlice<'a> {
    chart: &'a ChartSpec,
    g: Box<dyn TimeSlice + 'a>,
    t: f64,
}

fn nan_on_err(r: Result<Vec<f64>>, out: &mut [f64]) -> bool {
    match r {
        Ok(v) => {
            out.copy_from_slice(&v);
            true
        }
        Err(_) => {
            out.iter_mut().for_each(|o| *o = f64::NAN);
            false
        }
    }
}

impl TimeSlice for ComposedSlice<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut y = vec![0.0; x.len()];
        if nan_on_err(self.chart.action(x, self.t), &mut y) {
            self.g.invert(&y, out);
        } else {
            out.copy_from_slice(&y);
        }
    }

    fn invert(&self, y: &[f64], out: &mut [f64]) {
        let mut z = vec![0.0; y.len()];
        self.g.apply(y, &mut z);
        nan_on_err(self.chart.action(&z, -self.t), out);
    }
}

impl LoopFamily for ComposedLoop<'_> {
    fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn slice(&self, t: f64) -> Box<dyn TimeSlice + '_> {
        Box::new(ComposedSlice {
            chart: self.chart,
            g: self.g.slice(t),
            t,
        })
    }
}

/// The circle action `f_t` in chart coordinates.
pub struct ActionLoop<'a> {
    pub chart: &'a ChartSpec,
}

struct ActionSlice<'a> {
    chart: &'a ChartSpec,
    t: f64,
}

impl TimeSlice for ActionSlice<'_> {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        nan_on_err(self.chart.action(x, self.t), out);
    }

    fn invert(&self, y: &[f64], out: &mut [f64]) {
        nan_on_err(self.chart.action(y, -self.t), out);
    }
}

impl LoopFamily for ActionLoop<'_> {
    fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn slice(&self, t: f64) -> Box<dyn TimeSlice + '_> {
        Box::new(ActionSlice {
            chart: self.chart,
            t,
        })
    }
}

/// `max ‖h₀x − x‖, ‖h₁x − x‖` over tracers.
pub fn verify_loop<L: LoopFamily + ?Sized>(family: &L, tracers: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for t in [0.0, 1.0] {
        let slice = family.slice(t);
        for x in tracers {
            let mut y = vec![0.0; x.len()];
            slice.apply(x, &mut y);
            let d = distance(&y, x);
            worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
        }
    }
    worst
}

/// `(H_t − F̃)` on `B₃` outside the removed ball, zero elsewhere.
struct AnnulusDefect<'a> {
    chart: &'a ChartSpec,
    g: &'a CutoffLoop,
    removed: f64,
}

impl AnnulusDefect<'_> {
    fn evaluate(&self, frozen: &crate::hamflow::FrozenGenerator<'_>, x: &[f64]) -> f64 {
        if norm(x) <= self.removed {
            return 0.0;
        }
        let mut y = vec![0.0; x.len()];
        frozen.map(x, &mut y);
        let f = |z: &[f64]| self.chart.normalized_moment(z).unwrap_or(f64::NAN);
        f(&y) - frozen.value(&y) - f(x)
    }
}

impl ScalarField for AnnulusDefect<'_> {
    fn dim(&self) -> usize {
        self.chart.dim()
    }

    fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.evaluate(&GeneratingHamiltonian::new(self.g).frozen(t), x)
    }

    fn at_time<'b>(&'b self, t: f64) -> Box<dyn Fn(&[f64]) -> f64 + 'b> {
        let frozen = GeneratingHamiltonian::new(self.g).frozen(t);
        Box::new(move |x| self.evaluate(&frozen, x))
    }
}

/// `H_t = (F̃ − G_t)∘g_t` on chart points in `B₃`, and `F̃` elsewhere.
fn h_value(
    chart: &ChartSpec,
    frozen: &crate::hamflow::FrozenGenerator<'_>,
    outer: f64,
    x: &[f64],
) -> Result<f64> {
    if norm(x) >= outer {
        return chart.normalized_moment(x);
    }
    let mut y = vec![0.0; x.len()];
    frozen.map(x, &mut y);
    Ok(chart.normalized_moment(&y)? - frozen.value(&y))
}

/// `∫_{B_ρ} F̃ ωⁿ` for `F̃ = −π Σ wⱼ|zⱼ|²`.
fn quadratic_ball_integral(weights: &[i64], radius: f64) -> f64 {
    let n = weights.len() as i32;
    let sum: i64 = weights.iter().sum();
    -PI.powi(n + 1) * radius.powi(2 * n + 2) / (n + 1) as f64 * sum as f64
}

/// Scaling the point count for the Hofer estimate of `h` by the cube fill.
fn pole_points(x: &SphereProduct) -> Vec<Vec<[f64; 3]>> {
    let m = x.factors();
    (0..1usize << m)
        .map(|mask| {
            x.radii()
                .iter()
                .enumerate()
                .map(|(j, &r)| [0.0, 0.0, if mask >> j & 1 == 1 { -r } else { r }])
                .collect()
        })
        .collect()
}

pub fn run_theorem(cfg: &TheoremConfig) -> Result<CalabiReport> {
    let x = &cfg.product;
    let tol = &cfg.tolerances;
    let n = x.factors();
    let d = 2 * n;

    // (1)–(4): chart, linearization, Maslov index, contraction.
    let chart = darboux_chart(x, cfg.chart_radius)?;
    let lp: MatrixLoop = linearized_loop(&chart, cfg.loop_intervals)?;
    let maslov = maslov_report(&lp)?;
    if maslov.index != 0 {
        return Err(Error::RequirementsNotMet(format!(
            "the fixed point has Maslov index {}, not 0",
            maslov.index
        )));
    }
    let (weights, fit_residual) = fit_rotation_weights(&lp)?;
    let based = build_based_homotopy(&weights)?;
    let transfers = describe_transfers(based.transfers());
    let homotopy: Arc<dyn SymplecticHomotopy> = Arc::new(based);

    // Normalization and ε.
    let f_s = x.moment_at_fixed_point();
    let mean = mean_integral(x, &cfg.sphere_quadrature);
    let target = Estimate::new(
        mean.moment.value - f_s * mean.volume.value,
        mean.moment.error + f_s.abs() * mean.volume.error,
    );
    let exact_volume = factorial(n) * x.radii().iter().map(|r| 4.0 * PI * r * r).product::<f64>();
    let target_analytic = -f_s * exact_volume;
    let fs_scale: f64 = x
        .radii()
        .iter()
        .zip(x.weights())
        .map(|(r, c)| 2.0 * PI * (r * c).abs())
        .sum();
    if target.value.abs() <= 1e-9 * fs_scale * mean.volume.value {
        return Err(Error::RequirementsNotMet(format!(
            "∫F̃ωⁿ = {:.3e} vanishes: F at the fixed point equals the mean of F",
            target.value
        )));
    }
    let epsilon = match cfg.epsilon {
        EpsilonPolicy::Paper => target.value.abs() / 2.0,
        EpsilonPolicy::Explicit(e) if e > 0.0 => e,
        EpsilonPolicy::Explicit(e) => {
            return Err(Error::InvalidArgument(format!(
                "epsilon {e} must be positive"
            )))
        }
    };
    if cfg.lemma.outer >= chart.radius {
        return Err(Error::InvalidArgument(format!(
            "outer ball radius {} does not fit in the chart of radius {}",
            cfg.lemma.outer, chart.radius
        )));
    }

    // (5): the cut-off loop g.
    let lemma_cfg = LemmaConfig {
        epsilon,
        ..cfg.lemma
    };
    let lemma = lemma_loop(&lp, homotopy.clone(), &lemma_cfg)?;
    let family = &lemma.family;
    let balls = lemma.balls;
    let outer = balls.outer;
    let cal_g = lemma.cal();
    let seed = cfg.lemma.seed;

    // (7): H_t vanishes on B₁.
    let scale = (0..d)
        .flat_map(|i| [-1.0, 1.0].map(move |s| (i, s)))
        .map(|(i, s)| {
            let mut z = vec![0.0; d];
            z[i] = s * chart.radius;
            chart.normalized_moment(&z).map(f64::abs)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut inner =
        BallQuadrature::quasi_random(d, balls.inner, cfg.inner_points, seed ^ 0x1b).nodes();
    inner.extend(shell_points(
        d,
        balls.inner,
        balls.inner,
        cfg.lemma.tracers,
        seed ^ 0x2b,
    ));
    let gen = GeneratingHamiltonian::new(family);
    let mut inner_ball_sup: f64 = 0.0;
    for &t in &CHECK_TIMES {
        let frozen = gen.frozen(t);
        for z in &inner {
            inner_ball_sup = inner_ball_sup.max(h_value(&chart, &frozen, outer, z)?.abs());
        }
    }

    // (8): Cal(h) by reduction and by direct quadrature.
    let cal_h = Estimate::new(target.value - cal_g.value, target.error + cal_g.error);
    let removed = balls.inner / 2.0;
    let removed_integral = quadratic_ball_integral(weights.as_slice(), removed);
    let defect = AnnulusDefect {
        chart: &chart,
        g: family,
        removed,
    };
    let quad = BallQuadrature {
        dim: d,
        radius: outer,
        rule: cfg.spot_check,
    };
    let annulus = crate::hamflow::calabi(&defect, &quad, cfg.lemma.t_nodes).estimate;
    let cal_h_direct = Estimate::new(
        target.value - removed_integral + annulus.value,
        target.error + annulus.error,
    );

    // Hofer lengths.
    let hofer_g = HoferPair::new(lemma.hofer.length, lemma.support_volume(), cal_g);
    let mut samples: Vec<Vec<f64>> =
        BallQuadrature::quasi_random(d, outer, cfg.lemma.hofer_points, seed ^ 0x40).nodes();
    let poles: Vec<f64> = pole_points(x)
        .iter()
        .map(|p| x.moment(p).map(|f| f - f_s))
        .collect::<Result<Vec<f64>>>()?;
    let mut oscillation = Vec::new();
    for t in midpoint_times(cfg.lemma.t_nodes) {
        let frozen = gen.frozen(t);
        let mut lo = poles.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut hi = poles.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for z in &samples {
            let v = h_value(&chart, &frozen, outer, z)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        oscillation.push(hi - lo);
    }
    let h_length = pairwise_sum(&oscillation) / oscillation.len() as f64;
    let hofer_h = HoferPair::new(
        h_length,
        mean.volume.value - ball_symplectic_volume(n, removed),
        cal_h,
    );

    // Loop checks for h, chart fidelity, PDE cross-check.
    let composed = ComposedLoop {
        chart: &chart,
        g: family,
    };
    samples = shell_points(d, 0.0, 0.9 * chart.radius, cfg.lemma.tracers, seed ^ 0x77);
    let h_loop_residual = verify_loop(&composed, &samples);
    let chart_pts = chart_sample_points(&chart, cfg.chart_points, seed ^ 0xc4);
    let chart_res = chart_residuals(&chart, &lp, &weights, &chart_pts)?;
    let pde_samples = pde_samples(d, outer, cfg.pde_samples, seed ^ 0x9d);
    let pde = pde_crosscheck(
        homotopy.clone(),
        lemma.profile,
        &pde_samples,
        cfg.pde_time,
        cfg.lemma.steps,
    )?;

    let am = action_maslov(f_s, mean.moment.value, mean.volume.value)?;

    let mut trajectories = Vec::new();
    if cfg.trajectory_tracers > 0 {
        let tracers = shell_points(d, 0.0, outer, cfg.trajectory_tracers, seed ^ 0x3e);
        let k = cfg.trajectory_times.max(2);
        for i in 0..k {
            let t = i as f64 / (k - 1) as f64;
            let slice = composed.slice(t);
            for (j, z) in tracers.iter().enumerate() {
                let mut y = vec![0.0; d];
                slice.apply(z, &mut y);
                trajectories.push(TrajectoryPoint { tracer: j, t, x: y });
            }
        }
    }

    let res = &lemma.residuals;
    let checks = vec![
        at_most("maslov_index_zero", maslov.index.abs() as f64, 0.0),
        at_most(
            "target_matches_analytic",
            (target.value - target_analytic).abs() / target_analytic.abs(),
            tol.target,
        ),
        at_most("g_support_exact", res.support, 0.0),
        at_most(
            "g_equals_linear_loop_on_inner_ball",
            res.interpolation,
            tol.interpolation,
        ),
        at_most("g_loop_closure", res.closure, tol.closure),
        at_most(
            "g_generator_normalized",
            res.normalization,
            tol.normalization,
        ),
        at_most("orbit_containment", res.containment, 1.0),
        at_most(
            "cal_g_within_certified_bound",
            cal_g.value.abs(),
            lemma.certified_bound * (1.0 + tol.bound_slack),
        ),
        at_most(
            "cal_g_below_epsilon",
            cal_g.value.abs() + cal_g.error,
            epsilon,
        ),
        at_most(
            "h_vanishes_on_inner_ball",
            inner_ball_sup,
            tol.inner_ball * scale,
        ),
        at_most(
            "cal_h_evaluations_agree",
            (cal_h_direct.value - cal_h.value).abs(),
            cal_h_direct.error + cal_h.error,
        ),
        at_most(
            "cal_h_within_epsilon_of_target",
            (cal_h.value - target.value).abs(),
            epsilon,
        ),
        at_least("cal_h_at_least_epsilon", cal_h.value.abs(), epsilon),
        at_most("chart_pullback", chart_res.pullback, tol.chart),
        at_most("chart_moment_quadratic", chart_res.moment, tol.chart),
        at_most("chart_equivariance", chart_res.equivariance, tol.chart),
        at_most("pde_crosscheck", pde.max_residual, tol.pde),
        at_most("h_loop_closure", h_loop_residual, tol.h_loop),
        at_least(
            "hofer_g_certified",
            hofer_g.support_volume * hofer_g.length,
            hofer_g.cal_abs - hofer_g.cal_error,
        ),
        at_least(
            "hofer_h_certified",
            hofer_h.support_volume * hofer_h.length,
            hofer_h.cal_abs - hofer_h.cal_error,
        ),
    ];
    let pass = checks.iter().all(|c| c.pass);

    let provenance = vec![
        format!(
            "linearized loop at the fixed point has weights {:?} and Maslov index 0",
            weights.as_slice()
        ),
        format!("based null-homotopy built from transfers {transfers}"),
        String::from("g_t = g_{1,t} is contractible through the loops s -> g_{s,t}"),
        String::from("h_t = g_t^-1 o f_t is homotopic to f_t through g_{s,t}^-1 o f_t"),
        format!("removed ball of radius {removed:.17e} lies inside the inner ball where h_t = id"),
    ];

    Ok(CalabiReport {
        radii: x.radii().to_vec(),
        moment_weights: x.weights().to_vec(),
        fixed_point: x.fixed_point_signs().0.clone(),
        chart_radius: chart.radius,
        chart_clamped: chart.clamped,
        loop_weights: weights.as_slice().to_vec(),
        loop_fit_residual: fit_residual,
        transfers,
        maslov_index: maslov.index,
        maslov_residual: maslov.residual,
        moment_at_fixed_point: f_s,
        volume: mean.volume,
        moment_integral: mean.moment,
        target,
        target_analytic,
        epsilon,
        balls,
        halvings: lemma.halvings,
        scaling: lemma.scaling.clone(),
        cal_g,
        certified_bound: lemma.certified_bound,
        cal_h,
        cal_h_direct,
        removed_ball_radius: removed,
        removed_ball_integral: removed_integral,
        lemma_residuals: *res,
        inner_ball_sup,
        scale,
        chart: chart_res,
        pde_residual: pde.max_residual,
        h_loop_residual,
        hofer_g,
        hofer_h,
        action_maslov: am,
        provenance,
        checks,
        pass,
        trajectories,
    })
}

//! Cutting off a null-homotopy of a linear loop to a compactly supported
//! loop of symplectomorphisms.
//!
//! Given a based homotopy `A(s, t)` with generating quadratic Hamiltonians
//! `H_{s,t}(x) = ⟨x, Q(s,t)x⟩`, the map `g_{s,t}` is the time-`s` flow of the
//! `σ`-dependent Hamiltonian `a(|x|)·H_{σ,t}`. It agrees with `A(s,t)` on
//! every orbit that stays inside `B₂`, and it is the identity outside `B₃`.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::hamflow::{
    ball_symplectic_volume, calabi, hofer_length_estimate, rk4_observed, BallQuadrature,
    CalabiEstimate, Estimate, GeneratingHamiltonian, HoferEstimate, LoopFamily, QuadratureRule,
    Rk4Workspace, TimeSlice, VectorField, DEFAULT_STEPS, DEFAULT_T_NODES,
};
use crate::linalg::{distance, norm, symmetric_spectral_radius, Mat};
use crate::nullhomotopy::{generator_symmetrized, SymplecticHomotopy};
use crate::symplin::{maslov_index_refining, MatrixLoop};

/// Default ratio between consecutive ball radii.
pub const DEFAULT_MARGIN: f64 = 1.25;

/// Default budget of radius halvings in [`lemma_loop`].
pub const MAX_HALVINGS: usize = 12;

/// Finite-difference step in `t` for `∂ₜQ`.
const H_QT: f64 = 1e-4;

/// Finite-difference step in `s` for `∂ₛG` in the PDE cross-check.
const H_PDE_S: f64 = 1e-3;

/// Finite-difference step in `x` for `∇G` in the PDE cross-check.
const H_PDE_X: f64 = 1e-4;

/// Radii `ρ₁ < ρ₂ < ρ₃` of three concentric balls about the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BallTriple {
    pub inner: f64,
    pub middle: f64,
    pub outer: f64,
    /// `max_t ‖A_t‖_op` over the loop samples.
    pub kappa: f64,
}

/// `κ = max ‖A_t‖`, `ρ₂ = ρ₃/margin`, `ρ₁ = ρ₂/(κ·margin)`.
pub fn choose_balls(lp: &MatrixLoop, outer: f64, margin: f64) -> Result<BallTriple> {
    if !(outer > 0.0) || !outer.is_finite() {
        return Err(Error::InvalidArgument(format!("outer radius {outer}")));
    }
    if !(margin > 1.0) || !margin.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "margin {margin} must exceed 1"
        )));
    }
    let kappa = lp
        .samples()
        .iter()
        .map(|a| a.as_mat().operator_norm())
        .fold(0.0, f64::max);
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::NonFinite("loop operator norm"));
    }
    let middle = outer / margin;
    let inner = middle / (kappa * margin);
    debug_assert!(kappa * inner < middle);
    Ok(BallTriple {
        inner,
        middle,
        outer,
        kappa,
    })
}

/// Radial cut-off `a(r)`: 1 up to `ρ₂`, 0 from `ρ₃`, quintic smoothstep between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProfile {
    pub middle: f64,
    pub outer: f64,
}

pub fn cutoff_profile(middle: f64, outer: f64) -> Result<CutoffProfile> {
    if !(middle > 0.0 && middle < outer && outer.is_finite()) {
        return Err(Error::Degenerate(format!(
            "cut-off interval [{middle}, {outer}]"
        )));
    }
    Ok(CutoffProfile { middle, outer })
}

impl CutoffProfile {
    fn u(&self, r: f64) -> f64 {
        (self.outer - r) / (self.outer - self.middle)
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.middle {
            1.0
        } else if r >= self.outer {
            0.0
        } else {
            let u = self.u(r);
            u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
        }
    }

    /// `a′(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        if r <= self.middle || r >= self.outer {
            0.0
        } else {
            let u = self.u(r);
            -30.0 * u * u * (1.0 - u) * (1.0 - u) / (self.outer - self.middle)
        }
    }
}

/// Cut-off vector field `−J∇(a·H)` from the linear field `M = −2JQ`:
/// `a·Mx + H·a′(r)/r·(−Jx)` with `H = ½⟨x, J·Mx⟩`.
#[inline(always)]
fn cutoff_field(
    m: &[f64],
    d: usize,
    p: &CutoffProfile,
    x: &[f64],
    mx: &mut [f64],
    out: &mut [f64],
) {
    let r2: f64 = x[..d].iter().map(|c| c * c).sum();
    if r2 >= p.outer * p.outer {
        out[..d].iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    for i in 0..d {
        let row = &m[i * d..(i + 1) * d];
        let mut acc = 0.0;
        for j in 0..d {
            acc += row[j] * x[j];
        }
        mx[i] = acc;
    }
    if r2 <= p.middle * p.middle {
        out[..d].copy_from_slice(&mx[..d]);
        return;
    }
    let n = d / 2;
    let r = r2.sqrt();
    let a = p.value(r);
    let mut h = 0.0;
    for k in 0..n {
        h += x[n + k] * mx[k] - x[k] * mx[n + k];
    }
    let radial = 0.5 * h * p.derivative(r) / r;
    for k in 0..n {
        out[k] = a * mx[k] + radial * x[n + k];
        out[n + k] = a * mx[n + k] - radial * x[k];
    }
}

/// Row-major `−2JQ` for a symmetric `Q`.
fn linear_field(q: &Mat) -> Vec<f64> {
    let d = q.dim();
    let n = d / 2;
    let mut m = vec![0.0; d * d];
    for j in 0..d {
        for k in 0..n {
            m[k * d + j] = 2.0 * q[(n + k, j)];
            m[(n + k) * d + j] = -2.0 * q[(k, j)];
        }
    }
    m
}

/// The family `t ↦ g_{s,t}` for one fixed `s`.
#[derive(Clone)]
pub struct CutoffLoop {
    homotopy: Arc<dyn SymplecticHomotopy>,
    profile: CutoffProfile,
    s: f64,
    steps: usize,
}

impl core::fmt::Debug for CutoffLoop {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CutoffLoop")
            .field("profile", &self.profile)
            .field("s", &self.s)
            .field("steps", &self.steps)
            .finish()
    }
}

impl CutoffLoop {
    pub fn new(
        homotopy: Arc<dyn SymplecticHomotopy>,
        profile: CutoffProfile,
        s: f64,
        steps: usize,
    ) -> Self {
        Self {
            homotopy,
            profile,
            s,
            steps: steps.max(1),
        }
    }

    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..self.clone() }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn profile(&self) -> &CutoffProfile {
        &self.profile
    }

    pub fn homotopy(&self) -> &Arc<dyn SymplecticHomotopy> {
        &self.homotopy
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `g_{s,t}` with its generator tabulated at the RK4 nodes.
    pub fn slice_at(&self, t: f64) -> CutoffSlice {
        let nodes = 2 * self.steps + 1;
        let half_step = self.s / (2 * self.steps) as f64;
        let table: Vec<f64> = (0..nodes)
            .flat_map(|j| {
                linear_field(&generator_symmetrized(&*self.homotopy, j as f64 * half_step, t).0)
            })
            .collect();
        CutoffSlice {
            homotopy: self.homotopy.clone(),
            profile: self.profile,
            t,
            s: self.s,
            steps: self.steps,
            half_step,
            dim: 2 * self.homotopy.half_dim(),
            linear: LinearSteps::new(
                &table,
                2 * self.homotopy.half_dim(),
                self.steps,
                half_step,
                self.profile.middle,
            ),
            table,
        }
    }
}

/// RK4 steps of the flat field `Mx` as matrices, usable while every stage
/// stays where the cutoff is identically 1.
struct LinearSteps {
    forward: Vec<f64>,
    backward: Vec<f64>,
    /// Squared radius below which a whole step stays inside the flat region.
    limit2: f64,
}

impl LinearSteps {
    fn new(table: &[f64], d: usize, steps: usize, half_step: f64, middle: f64) -> Self {
        let dd = d * d;
        let nodes: Vec<&[f64]> = table.chunks_exact(dd).collect();
        let largest = nodes
            .iter()
            .map(|m| m.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let growth = (2.0 * half_step * largest).exp() * (1.0 + 1e-12);
        let build = |forward: bool| {
            let h = if forward {
                2.0 * half_step
            } else {
                -2.0 * half_step
            };
            let mut out = vec![0.0; steps * dd];
            for k in 0..steps {
                let (j0, jm, j1) = if forward {
                    (2 * k, 2 * k + 1, 2 * k + 2)
                } else {
                    (2 * (steps - k), 2 * (steps - k) - 1, 2 * (steps - k) - 2)
                };
                for col in 0..d {
                    let mut y = vec![0.0; d];
                    y[col] = 1.0;
                    let f = |m: &[f64], x: &[f64]| -> Vec<f64> {
                        (0..d)
                            .map(|i| (0..d).map(|j| m[i * d + j] * x[j]).sum())
                            .collect()
                    };
                    let k1 = f(nodes[j0], &y);
                    let t: Vec<f64> = (0..d).map(|i| y[i] + 0.5 * h * k1[i]).collect();
                    let k2 = f(nodes[jm], &t);
                    let t: Vec<f64> = (0..d).map(|i| y[i] + 0.5 * h * k2[i]).collect();
                    let k3 = f(nodes[jm], &t);
                    let t: Vec<f64> = (0..d).map(|i| y[i] + h * k3[i]).collect();
                    let k4 = f(nodes[j1], &t);
                    for i in 0..d {
                        out[k * dd + i * d + col] =
                            y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    }
                }
            }
            out
        };
        Self {
            forward: build(true),
            backward: build(false),
            limit2: (middle / growth).powi(2),
        }
    }
}

impl LoopFamily for CutoffLoop {
    fn dim(&self) -> usize {
        2 * self.homotopy.half_dim()
    }

    fn slice(&self, t: f64) -> Box<dyn TimeSlice + '_> {
        Box::new(self.slice_at(t))
    }

    fn radial_breakpoints(&self) -> Vec<f64> {
        vec![self.profile.middle]
    }

    fn support_radius(&self) -> Option<f64> {
        Some(self.profile.outer)
    }
}

/// `g_{s,t}` at fixed `(s, t)`.
pub struct CutoffSlice {
    homotopy: Arc<dyn SymplecticHomotopy>,
    profile: CutoffProfile,
    t: f64,
    s: f64,
    steps: usize,
    half_step: f64,
    dim: usize,
    /// `−2JQ` at the RK4 nodes `j·s/(2·steps)`, row-major and concatenated.
    table: Vec<f64>,
    linear: LinearSteps,
}

impl CutoffSlice {
    fn node(&self, j: usize) -> &[f64] {
        let dd = self.dim * self.dim;
        &self.table[j * dd..(j + 1) * dd]
    }

    fn node_index(&self, sigma: f64) -> Option<usize> {
        if self.half_step == 0.0 {
            return Some(0);
        }
        let idx = (sigma / self.half_step).round();
        if idx < 0.0 || idx > (2 * self.steps) as f64 {
            return None;
        }
        ((sigma - idx * self.half_step).abs() <= 1e-9 * self.half_step).then_some(idx as usize)
    }

    fn run(&self, x: &[f64], out: &mut [f64], forward: bool) {
        out.copy_from_slice(x);
        let r2: f64 = x.iter().map(|c| c * c).sum();
        if self.s == 0.0 || r2 >= self.profile.outer * self.profile.outer {
            return;
        }
        match x.len() {
            2 => self.run_fixed::<2>(out, forward),
            4 => self.run_fixed::<4>(out, forward),
            6 => self.run_fixed::<6>(out, forward),
            8 => self.run_fixed::<8>(out, forward),
            _ => self.run_dyn(out, forward),
        }
    }

    /// RK4 over `σ ∈ [0, s]` (or back), reading the field by node index.
    /// Agrees step for step with [`crate::hamflow::rk4`] on this field, up to
    /// rounding in the flat region where steps are precomputed matrices.
    fn run_fixed<const D: usize>(&self, out: &mut [f64], forward: bool) {
        let mut y = [0.0; D];
        y.copy_from_slice(out);
        let (mut k1, mut k2, mut k3, mut k4, mut tmp, mut mx) =
            ([0.0; D], [0.0; D], [0.0; D], [0.0; D], [0.0; D], [0.0; D]);
        let n = self.steps;
        let h = if forward { self.s } else { -self.s } / n as f64;
        let p = &self.profile;
        let nodes: Vec<&[f64]> = self.table.chunks_exact(D * D).collect();
        let linear = if forward {
            &self.linear.forward
        } else {
            &self.linear.backward
        };
        for k in 0..n {
            let r2: f64 = y.iter().map(|c| c * c).sum();
            if r2 <= self.linear.limit2 {
                let m = &linear[k * D * D..(k + 1) * D * D];
                for i in 0..D {
                    let mut acc = 0.0;
                    for j in 0..D {
                        acc += m[i * D + j] * y[j];
                    }
                    tmp[i] = acc;
                }
                y = tmp;
                continue;
            }
            let (j0, jm, j1) = if forward {
                (2 * k, 2 * k + 1, 2 * k + 2)
            } else {
                (2 * (n - k), 2 * (n - k) - 1, 2 * (n - k) - 2)
            };
            cutoff_field(nodes[j0], D, p, &y, &mut mx, &mut k1);
            for i in 0..D {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            let qm = nodes[jm];
            cutoff_field(qm, D, p, &tmp, &mut mx, &mut k2);
            for i in 0..D {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            cutoff_field(qm, D, p, &tmp, &mut mx, &mut k3);
            for i in 0..D {
                tmp[i] = y[i] + h * k3[i];
            }
            cutoff_field(nodes[j1], D, p, &tmp, &mut mx, &mut k4);
            for i in 0..D {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        out.copy_from_slice(&y);
    }

    fn run_dyn(&self, out: &mut [f64], forward: bool) {
        let mut ws = Rk4Workspace::new(out.len());
        let (a, b) = if forward {
            (0.0, self.s)
        } else {
            (self.s, 0.0)
        };
        crate::hamflow::rk4(self, out, a, b, self.steps, &mut ws);
    }

    /// Largest `|x(σ)|` along the `σ`-orbit of `x`.
    pub fn orbit_max_radius(&self, x: &[f64]) -> f64 {
        let mut y = x.to_vec();
        let mut ws = Rk4Workspace::new(x.len());
        let mut worst = norm(x);
        let _ = rk4_observed(self, &mut y, 0.0, self.s, self.steps, &mut ws, |_, p| {
            worst = worst.max(norm(p));
            Ok(())
        });
        worst
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.run(x, &mut out, true);
        out
    }
}

impl VectorField for CutoffSlice {
    fn dim(&self) -> usize {
        self.dim
    }

    fn velocity(&self, sigma: f64, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        let mut mx = vec![0.0; d];
        match self.node_index(sigma) {
            Some(j) => cutoff_field(self.node(j), d, &self.profile, x, &mut mx, out),
            None => {
                let m = linear_field(&generator_symmetrized(&*self.homotopy, sigma, self.t).0);
                cutoff_field(&m, d, &self.profile, x, &mut mx, out)
            }
        }
    }
}

impl TimeSlice for CutoffSlice {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.run(x, out, true)
    }

    fn invert(&self, y: &[f64], out: &mut [f64]) {
        self.run(y, out, false)
    }
}

/// `g_{s,t}(x)` with `steps` RK4 steps.
pub fn cutoff_flow(
    homotopy: Arc<dyn SymplecticHomotopy>,
    profile: CutoffProfile,
    s: f64,
    t: f64,
    x: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    if x.len() != 2 * homotopy.half_dim() {
        return Err(Error::Dimension(format!(
            "point of length {} for half-dimension {}",
            x.len(),
            homotopy.half_dim()
        )));
    }
    let y = CutoffLoop::new(homotopy, profile, s, steps)
        .slice_at(t)
        .apply_vec(x);
    if y.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("cut-off flow"));
    }
    Ok(y)
}

/// `∂ₜQ(s, t)`, central in the interior of `[0, 1]`.
fn generator_t_derivative(h: &dyn SymplecticHomotopy, s: f64, t: f64) -> Mat {
    let q = |t| generator_symmetrized(h, s, t).0;
    if t - H_QT >= 0.0 && t + H_QT <= 1.0 {
        q(t + H_QT).sub(&q(t - H_QT)).scaled(0.5 / H_QT)
    } else {
        let dir = if t - H_QT < 0.0 { 1.0 } else { -1.0 };
        let a = q(t).scaled(-1.5);
        let b = q(t + dir * H_QT).scaled(2.0);
        let c = q(t + 2.0 * dir * H_QT).scaled(-0.5);
        a.add(&b).add(&c).scaled(dir / H_QT)
    }
}

/// `max ‖∂ₜQ(s,t)‖₂` over an inclusive `grid × grid` sample of `[0,1]²`.
///
/// `|∂ₜH_{s,t}| ≤ ρ²·‖∂ₜQ‖₂` on the ball of radius `ρ`.
pub fn generator_rate(h: &dyn SymplecticHomotopy, grid: usize) -> f64 {
    let g = grid.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..g {
        let s = i as f64 / (g - 1) as f64;
        for j in 0..g {
            let t = j as f64 / (g - 1) as f64;
            worst = worst.max(symmetric_spectral_radius(&generator_t_derivative(h, s, t)));
        }
    }
    worst
}

/// Parameters of [`lemma_loop`] and [`scaling_study`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LemmaConfig {
    /// Initial `ρ₃`.
    pub outer: f64,
    pub margin: f64,
    pub epsilon: f64,
    /// RK4 steps over `σ ∈ [0, 1]`.
    pub steps: usize,
    pub quadrature: QuadratureRule,
    pub t_nodes: usize,
    pub max_halvings: usize,
    /// Tracers per residual class.
    pub tracers: usize,
    /// Quasi-random points for the Hofer estimate.
    pub hofer_points: usize,
    /// `(s, t)` grid for the rate bound `K`.
    pub bound_grid: usize,
    pub seed: u64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self {
            outer: 0.5,
            margin: DEFAULT_MARGIN,
            epsilon: 1.0,
            steps: DEFAULT_STEPS,
            quadrature: QuadratureRule::Midpoint { per_axis: 12 },
            t_nodes: DEFAULT_T_NODES,
            max_halvings: MAX_HALVINGS,
            tracers: 10,
            hofer_points: 512,
            bound_grid: 21,
            seed: 0,
        }
    }
}

/// One row of the radius study.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScalingRow {
    pub outer: f64,
    pub cal: f64,
    pub cal_abs: f64,
    pub error: f64,
    /// `K·Vol(B₃)` with `K = ρ₃²·max‖∂ₜQ‖`.
    pub certified_bound: f64,
}

/// Measured residuals of the lemma's conclusions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LemmaResiduals {
    /// `max |g_t x − x|` for tracers outside `B₃`.
    pub support: f64,
    /// `max ‖g_t x − A_t x‖/(1 + |x|)` for tracers in `B₁`.
    pub interpolation: f64,
    /// `max ‖g_{s,t} x − x‖` at `t ∈ {0, 1}` over sampled `s`.
    pub closure: f64,
    /// `max |G_{1,t}(0)|`.
    pub normalization: f64,
    /// `max |x(σ)|/ρ₂` over orbits starting on `∂B₁`.
    pub containment: f64,
    /// Times `ρ₁` was shrunk before containment held.
    pub containment_retries: usize,
}

#[derive(Clone, Debug)]
pub struct LemmaLoopResult {
    pub balls: BallTriple,
    pub profile: CutoffProfile,
    /// The homotopy witness; `family.with_s(s)` is `t ↦ g_{s,t}`.
    pub family: CutoffLoop,
    pub calabi: CalabiEstimate,
    pub certified_bound: f64,
    pub halvings: usize,
    pub scaling: Vec<ScalingRow>,
    pub residuals: LemmaResiduals,
    pub hofer: HoferEstimate,
    pub epsilon: f64,
}

impl LemmaLoopResult {
    pub fn cal(&self) -> Estimate {
        self.calabi.estimate
    }

    /// `Vol(B₃)`, the volume of the support.
    pub fn support_volume(&self) -> f64 {
        ball_symplectic_volume(self.family.dim() / 2, self.balls.outer)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
        let r = norm(&v);
        if r > 1e-8 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

/// `count` seeded points with radii uniform in `[lo, hi]`.
pub fn shell_points(d: usize, lo: f64, hi: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = lo + (hi - lo) * uniform(&mut rng);
            direction(&mut rng, d).into_iter().map(|c| c * r).collect()
        })
        .collect()
}

/// Seeded `(s, x)` pairs for [`pde_crosscheck`]: `s` spread over
/// `[0.15, 0.85]`, `x` in the shell `0.1·ρ₃ ≤ |x| ≤ 0.95·ρ₃`.
pub fn pde_samples(d: usize, outer: f64, count: usize, seed: u64) -> Vec<(f64, Vec<f64>)> {
    shell_points(d, 0.1 * outer, 0.95 * outer, count, seed)
        .into_iter()
        .enumerate()
        .map(|(i, x)| (0.15 + 0.7 * (i as f64 + 0.5) / count.max(1) as f64, x))
        .collect()
}

/// Times at which loop residuals are sampled.
pub const CHECK_TIMES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn cal_at(family: &CutoffLoop, cfg: &LemmaConfig) -> CalabiEstimate {
    let quad = BallQuadrature {
        dim: family.dim(),
        radius: family.profile.outer,
        rule: cfg.quadrature,
    };
    calabi(&GeneratingHamiltonian::new(family), &quad, cfg.t_nodes)
}

fn scaling_row(outer: f64, cal: &CalabiEstimate, rate: f64, half_dim: usize) -> ScalingRow {
    let k = rate * outer * outer;
    ScalingRow {
        outer,
        cal: cal.estimate.value,
        cal_abs: cal.estimate.value.abs(),
        error: cal.estimate.error,
        certified_bound: k * ball_symplectic_volume(half_dim, outer),
    }
}

fn check_target(target: &MatrixLoop, homotopy: &dyn SymplecticHomotopy) -> Result<()> {
    if target.half_dim() != homotopy.half_dim() {
        return Err(Error::Dimension(format!(
            "loop half-dimension {} against homotopy {}",
            target.half_dim(),
            homotopy.half_dim()
        )));
    }
    let report = maslov_index_refining(target)?;
    if report.index != 0 {
        return Err(Error::NotNullHomotopic {
            index: report.index,
        });
    }
    Ok(())
}

/// Shrinks `ρ₁` by 25% (at most four times) until the `σ`-orbits of sample
/// points on `∂B₁` stay in `B₂`. Returns the final triple, the worst ratio
/// and the number of retries.
fn certify_containment(
    family: &CutoffLoop,
    mut balls: BallTriple,
    cfg: &LemmaConfig,
) -> Result<(BallTriple, f64, usize)> {
    let d = family.dim();
    let slices: Vec<CutoffSlice> = CHECK_TIMES.iter().map(|&t| family.slice_at(t)).collect();
    for retry in 0..=4 {
        let mut starts: Vec<Vec<f64>> = Vec::new();
        for axis in 0..d {
            for sign in [-1.0, 1.0] {
                let mut x = vec![0.0; d];
                x[axis] = sign * balls.inner;
                starts.push(x);
            }
        }
        starts.extend(shell_points(
            d,
            balls.inner,
            balls.inner,
            cfg.tracers,
            cfg.seed ^ 0xb1,
        ));
        let worst = slices
            .iter()
            .flat_map(|sl| starts.iter().map(move |x| sl.orbit_max_radius(x)))
            .fold(0.0, f64::max);
        let ratio = worst / balls.middle;
        if ratio < 1.0 {
            return Ok((balls, ratio, retry));
        }
        balls.inner *= 0.75;
    }
    Err(Error::Degenerate(format!(
        "orbits from the inner ball leave radius {}",
        balls.middle
    )))
}

fn measure_residuals(family: &CutoffLoop, balls: &BallTriple, cfg: &LemmaConfig) -> LemmaResiduals {
    let d = family.dim();
    let h = family.homotopy();
    let mut res = LemmaResiduals::default();
    let outside = shell_points(
        d,
        balls.outer * 1.0001,
        balls.outer * 1.5,
        cfg.tracers,
        cfg.seed ^ 0x51,
    );
    let inside = shell_points(d, 0.0, balls.inner, cfg.tracers, cfg.seed ^ 0x1a);
    let everywhere = shell_points(d, 0.0, balls.outer, cfg.tracers, cfg.seed ^ 0xc7);
    for &t in &CHECK_TIMES {
        let slice = family.slice_at(t);
        let a = h.value(1.0, t);
        for x in &outside {
            res.support = res.support.max(distance(&slice.apply_vec(x), x));
        }
        for x in &inside {
            let err = distance(&slice.apply_vec(x), &a.mul_vec(x)) / (1.0 + norm(x));
            res.interpolation = res.interpolation.max(err);
        }
    }
    for s in [0.25, 0.5, 0.75, 1.0] {
        let fam = family.with_s(s);
        for t in [0.0, 1.0] {
            let slice = fam.slice_at(t);
            for x in &everywhere {
                res.closure = res.closure.max(distance(&slice.apply_vec(x), x));
            }
        }
    }
    let gen = GeneratingHamiltonian::new(family);
    let origin = vec![0.0; d];
    for t in crate::hamflow::midpoint_times(cfg.t_nodes) {
        res.normalization = res.normalization.max(gen.frozen(t).value(&origin).abs());
    }
    res
}

/// Builds `g_t = g_{1,t}` and halves `ρ₃` until `|Cal(g)| + err < ε`.
pub fn lemma_loop(
    target: &MatrixLoop,
    homotopy: Arc<dyn SymplecticHomotopy>,
    cfg: &LemmaConfig,
) -> Result<LemmaLoopResult> {
    check_target(target, &*homotopy)?;
    if !(cfg.epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {}", cfg.epsilon)));
    }
    let n = homotopy.half_dim();
    let rate = generator_rate(&*homotopy, cfg.bound_grid);
    let mut outer = cfg.outer;
    let mut scaling = Vec::new();
    for halvings in 0..=cfg.max_halvings {
        let balls = choose_balls(target, outer, cfg.margin)?;
        let profile = cutoff_profile(balls.middle, balls.outer)?;
        let family = CutoffLoop::new(homotopy.clone(), profile, 1.0, cfg.steps);
        let (balls, ratio, retries) = certify_containment(&family, balls, cfg)?;
        let cal = cal_at(&family, cfg);
        let row = scaling_row(outer, &cal, rate, n);
        scaling.push(row);
        if cal.estimate.value.abs() + cal.estimate.error < cfg.epsilon {
            let mut residuals = measure_residuals(&family, &balls, cfg);
            residuals.containment = ratio;
            residuals.containment_retries = retries;
            let points =
                BallQuadrature::quasi_random(2 * n, outer, cfg.hofer_points, cfg.seed).nodes();
            let hofer =
                hofer_length_estimate(&GeneratingHamiltonian::new(&family), &points, cfg.t_nodes);
            return Ok(LemmaLoopResult {
                balls,
                profile,
                family,
                calabi: cal,
                certified_bound: row.certified_bound,
                halvings,
                scaling,
                residuals,
                hofer,
                epsilon: cfg.epsilon,
            });
        }
        outer *= 0.5;
    }
    let last = scaling.last().map(|r| r.cal_abs).unwrap_or(f64::NAN);
    Err(Error::HalvingExhausted {
        halvings: cfg.max_halvings,
        last,
        epsilon: cfg.epsilon,
    })
}

/// `Cal(g)` and its certified bound at each outer radius.
pub fn scaling_study(
    target: &MatrixLoop,
    homotopy: Arc<dyn SymplecticHomotopy>,
    radii: &[f64],
    cfg: &LemmaConfig,
) -> Result<Vec<ScalingRow>> {
    check_target(target, &*homotopy)?;
    let n = homotopy.half_dim();
    let rate = generator_rate(&*homotopy, cfg.bound_grid);
    radii
        .iter()
        .map(|&outer| {
            let balls = choose_balls(target, outer, cfg.margin)?;
            let profile = cutoff_profile(balls.middle, balls.outer)?;
            let family = CutoffLoop::new(homotopy.clone(), profile, 1.0, cfg.steps);
            Ok(scaling_row(outer, &cal_at(&family, cfg), rate, n))
        })
        .collect()
}

/// `|Cal(ρ_{k+1})| ≤ |Cal(ρ_k)| + err_k + err_{k+1}` along rows sorted by
/// decreasing radius.
pub fn is_monotone_within_error(rows: &[ScalingRow]) -> bool {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| {
        b.outer
            .partial_cmp(&a.outer)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    sorted
        .windows(2)
        .all(|w| w[1].cal_abs <= w[0].cal_abs + w[0].error + w[1].error)
}

/// One point of the `∂ₛG` cross-check.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PdeRow {
    pub s: f64,
    pub x: Vec<f64>,
    /// `∂ₛG_{s,t}(x)`
    pub lhs: f64,
    /// `a·∂ₜH_{s,t}(x) − {G_{s,t}, a·H_{s,t}}(x)`
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PdeReport {
    pub t: f64,
    pub rows: Vec<PdeRow>,
    pub max_residual: f64,
}

fn generator_value(family: &CutoffLoop, t: f64, x: &[f64]) -> f64 {
    GeneratingHamiltonian::new(family).frozen(t).value(x)
}

/// Evaluates both sides of `∂ₛG = a·∂ₜH − {G, a·H}` at the given `(s, x)`.
pub fn pde_crosscheck(
    homotopy: Arc<dyn SymplecticHomotopy>,
    profile: CutoffProfile,
    samples: &[(f64, Vec<f64>)],
    t: f64,
    steps: usize,
) -> Result<PdeReport> {
    let d = 2 * homotopy.half_dim();
    let mut rows = Vec::with_capacity(samples.len());
    for (s, x) in samples {
        let (s, x) = (*s, x.as_slice());
        if x.len() != d {
            return Err(Error::Dimension(format!("sample of length {}", x.len())));
        }
        let base = CutoffLoop::new(homotopy.clone(), profile, s, steps);
        let lhs = if s - H_PDE_S >= 0.0 {
            (generator_value(&base.with_s(s + H_PDE_S), t, x)
                - generator_value(&base.with_s(s - H_PDE_S), t, x))
                / (2.0 * H_PDE_S)
        } else {
            let g = |ds: f64| generator_value(&base.with_s(s + ds), t, x);
            (-1.5 * g(0.0) + 2.0 * g(H_PDE_S) - 0.5 * g(2.0 * H_PDE_S)) / H_PDE_S
        };

        let r = norm(x);
        let a = profile.value(r);
        let dq = generator_t_derivative(&*homotopy, s, t);
        let dh = a * dq.quadratic_form(x);

        let frozen = GeneratingHamiltonian::new(&base).frozen(t);
        let mut grad = vec![0.0; d];
        let mut xp = x.to_vec();
        for i in 0..d {
            xp[i] = x[i] + H_PDE_X;
            let up = frozen.value(&xp);
            xp[i] = x[i] - H_PDE_X;
            let dn = frozen.value(&xp);
            xp[i] = x[i];
            grad[i] = (up - dn) / (2.0 * H_PDE_X);
        }
        let q = generator_symmetrized(&*homotopy, s, t).0;
        let mut field = vec![0.0; d];
        let mut mx = vec![0.0; d];
        cutoff_field(&linear_field(&q), d, &profile, x, &mut mx, &mut field);
        let bracket: f64 = grad.iter().zip(&field).map(|(g, v)| g * v).sum();
        let rhs = dh - bracket;
        if !(lhs.is_finite() && rhs.is_finite()) {
            return Err(Error::NonFinite("PDE cross-check"));
        }
        rows.push(PdeRow {
            s,
            x: x.to_vec(),
            lhs,
            rhs,
        });
    }
    let max_residual = rows
        .iter()
        .map(|r| (r.lhs - r.rhs).abs())
        .fold(0.0, f64::max);
    Ok(PdeReport {
        t,
        rows,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nullhomotopy::{belt_homotopy, ConstantHomotopy};
    use crate::symplin::{identity_loop, rotation_loop, WeightVector};

    #[test]
    fn rotation_loop_balls() {
        let lp = rotation_loop(&WeightVector::new(vec![-1, 1]), 64);
        let b = choose_balls(&lp, 1.0, 1.25).unwrap();
        assert!((b.inner - 0.64).abs() < 1e-9 && (b.middle - 0.8).abs() < 1e-12);
        let b = choose_balls(&identity_loop(2, 8), 1.0, 1.25).unwrap();
        assert!((b.inner - 0.64).abs() < 1e-9);
    }

    #[test]
    fn profile_endpoints() {
        let p = cutoff_profile(0.8, 1.0).unwrap();
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(1.0), 0.0);
        assert_eq!(p.derivative(1.0), 0.0);
        assert!((p.value(0.9) - 0.5).abs() < 1e-15);
        assert!(cutoff_profile(1.0, 1.0).is_err());
    }

    #[test]
    fn profile_derivative_matches_difference() {
        let p = cutoff_profile(0.3, 0.7).unwrap();
        for r in [0.35, 0.5, 0.61] {
            let fd = (p.value(r + 1e-6) - p.value(r - 1e-6)) / 2e-6;
            assert!((fd - p.derivative(r)).abs() < 1e-7);
        }
    }

    #[test]
    fn flow_outside_support_is_exact() {
        let h: Arc<dyn SymplecticHomotopy> = Arc::new(belt_homotopy(1).unwrap());
        let p = cutoff_profile(0.4, 0.5).unwrap();
        let x = [0.4, -0.3, 0.2, 0.1];
        assert_eq!(
            cutoff_flow(h.clone(), p, 1.0, 0.3, &x, 50).unwrap(),
            x.to_vec()
        );
        let y = [0.1, 0.0, 0.05, 0.0];
        assert_eq!(cutoff_flow(h, p, 0.0, 0.3, &y, 50).unwrap(), y.to_vec());
    }

    #[test]
    fn flow_matches_linear_loop_near_origin() {
        let belt = belt_homotopy(1).unwrap();
        let a = belt.value(1.0, 0.3);
        let h: Arc<dyn SymplecticHomotopy> = Arc::new(belt);
        let p = cutoff_profile(0.4, 0.5).unwrap();
        let x = [0.1, 0.05, -0.12, 0.2];
        let y = cutoff_flow(h, p, 1.0, 0.3, &x, DEFAULT_STEPS).unwrap();
        assert!(distance(&y, &a.mul_vec(&x)) < 1e-6 * norm(&x));
    }

    #[test]
    fn identity_homotopy_gives_zero_generator() {
        let h: Arc<dyn SymplecticHomotopy> = Arc::new(ConstantHomotopy { half_dim: 2 });
        let p = cutoff_profile(0.4, 0.5).unwrap();
        let family = CutoffLoop::new(h.clone(), p, 1.0, 20);
        assert_eq!(generator_value(&family, 0.4, &[0.1, 0.2, 0.3, 0.1]), 0.0);
        let rep = pde_crosscheck(h, p, &[(0.5, vec![0.1, 0.0, 0.2, 0.0])], 0.3, 20).unwrap();
        assert_eq!(rep.max_residual, 0.0);
    }

    #[test]
    fn contractible_check_rejects_nonzero_index() {
        let lp = rotation_loop(&WeightVector::new(vec![1, 1]), 64);
        let h: Arc<dyn SymplecticHomotopy> = Arc::new(belt_homotopy(1).unwrap());
        let err = lemma_loop(&lp, h, &LemmaConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NotNullHomotopic { index: 2 }));
    }
}

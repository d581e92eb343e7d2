//! Products of round spheres with height moment maps, their rotation
//! actions, and an equivariant Darboux chart at a pole fixed point.
//!
//! Factor `j` is `S²(rⱼ) ⊂ ℝ³` with area form `rⱼ·dθ∧dh` (total area
//! `4πrⱼ²`). The moment map is `F = Σ 2π·cⱼ·hⱼ`, and cylindrical coordinates
//! `(rⱼθⱼ, hⱼ)` are Darboux coordinates for each factor.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamflow::{factorial, flow, Estimate, ScalarField};
use crate::linalg::{distance, Mat};
use crate::symplin::{
    maslov_index_refining, rotation_loop, rotation_matrix, symplectic_residual, MaslovReport,
    MatrixLoop, WeightVector, TOL_SP,
};

/// Tolerance for a point to lie on its sphere, relative to `r²`.
pub const ON_SPHERE_TOL: f64 = 1e-12;

/// Finite-difference step for chart Jacobians.
const H_CHART: f64 = 1e-5;

pub type SpherePoint = [f64; 3];

/// Pole pattern of a fixed point: `+1` north, `−1` south, per factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoleSigns(pub Vec<i8>);

#[derive(Clone, Debug, PartialEq)]
pub struct SphereProduct {
    radii: Vec<f64>,
    weights: Vec<f64>,
    fixed_point: PoleSigns,
    senses: Vec<f64>,
}

/// `H(q, p) = 2π·c·p` on the cylinder chart of one factor.
struct HeightHamiltonian {
    coefficient: f64,
}

impl ScalarField for HeightHamiltonian {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, _t: f64, x: &[f64]) -> f64 {
        2.0 * PI * self.coefficient * x[1]
    }

    fn gradient(&self, _t: f64, _x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = 2.0 * PI * self.coefficient;
    }
}

/// Sense `σ ∈ {±1}` of the rotation generated by `2π·c·h`, read off the
/// numerical flow of the moment map in cylinder coordinates `(rθ, h)`.
pub fn calibrate_rotation_sense(coefficient: f64, radius: f64) -> Result<f64> {
    if coefficient == 0.0 {
        return Ok(1.0);
    }
    let h = HeightHamiltonian { coefficient };
    let dt = 0.01;
    let end = flow(&h, &[0.0, 0.0], 0.0, dt, 4, None)?;
    let rate = end[0] / radius / dt;
    let expected = 2.0 * PI * coefficient / radius;
    if (rate.abs() - expected.abs()).abs() > 1e-9 * expected.abs() {
        return Err(Error::InvalidArgument(format!(
            "moment flow turns at {rate}, expected magnitude {expected}"
        )));
    }
    Ok(if rate * expected > 0.0 { 1.0 } else { -1.0 })
}

impl SphereProduct {
    pub fn new(radii: Vec<f64>, weights: Vec<f64>, fixed_point: PoleSigns) -> Result<Self> {
        let m = radii.len();
        if m == 0 || weights.len() != m || fixed_point.0.len() != m {
            return Err(Error::Dimension(format!(
                "{} radii, {} weights, {} poles",
                m,
                weights.len(),
                fixed_point.0.len()
            )));
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument("radii must be positive".into()));
        }
        if weights.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("moment weights"));
        }
        if fixed_point.0.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidArgument("pole signs must be ±1".into()));
        }
        let senses = radii
            .iter()
            .zip(&weights)
            .map(|(&r, &c)| calibrate_rotation_sense(c, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            radii,
            weights,
            fixed_point,
            senses,
        })
    }

    /// `S²(r₁)×S²(r₂)` with `F = 2πr₁α₃ + 2πr₂β₃`, based at (north, south).
    pub fn two_spheres(r1: f64, r2: f64) -> Result<Self> {
        Self::new(vec![r1, r2], vec![r1, r2], PoleSigns(vec![1, -1]))
    }

    /// `m` factors, radii `(r₁, …, r₁, r₂)`, `F = 2π(r₁h₁ + … + r₁h_{m−1} + (m−1)·r₂h_m)`,
    /// based at (north, …, north, south).
    pub fn many_spheres(m: usize, r1: f64, r2: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "need m ≥ 2 factors, got {m}"
            )));
        }
        let mut radii = vec![r1; m - 1];
        radii.push(r2);
        let mut weights = vec![r1; m - 1];
        weights.push((m - 1) as f64 * r2);
        let mut signs = vec![1; m - 1];
        signs.push(-1);
        Self::new(radii, weights, PoleSigns(signs))
    }

    pub fn factors(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn fixed_point_signs(&self) -> &PoleSigns {
        &self.fixed_point
    }

    /// Calibrated rotation senses.
    pub fn senses(&self) -> &[f64] {
        &self.senses
    }

    pub fn fixed_point(&self) -> Vec<SpherePoint> {
        self.radii
            .iter()
            .zip(&self.fixed_point.0)
            .map(|(&r, &e)| [0.0, 0.0, e as f64 * r])
            .collect()
    }

    /// `m!·Π 4πrⱼ²`.
    pub fn volume(&self) -> f64 {
        factorial(self.factors()) * self.radii.iter().map(|r| 4.0 * PI * r * r).product::<f64>()
    }

    fn check_point(&self, point: &[SpherePoint]) -> Result<()> {
        if point.len() != self.factors() {
            return Err(Error::Dimension(format!(
                "point with {} factors on a product of {}",
                point.len(),
                self.factors()
            )));
        }
        for (p, &r) in point.iter().zip(&self.radii) {
            let residual = ((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - r * r).abs() / (r * r);
            if residual > ON_SPHERE_TOL {
                return Err(Error::OffManifold { residual });
            }
        }
        Ok(())
    }

    /// `F = Σ 2π·cⱼ·hⱼ`.
    pub fn moment(&self, point: &[SpherePoint]) -> Result<f64> {
        self.check_point(point)?;
        Ok(self.moment_unchecked(point))
    }

    fn moment_unchecked(&self, point: &[SpherePoint]) -> f64 {
        point
            .iter()
            .zip(&self.weights)
            .map(|(p, c)| 2.0 * PI * c * p[2])
            .sum()
    }

    /// `F` at the distinguished fixed point.
    pub fn moment_at_fixed_point(&self) -> f64 {
        self.moment_unchecked(&self.fixed_point())
    }

    /// Integer winding of each factor over `t ∈ [0, 1]` in its own
    /// `(α₁, α₂)` plane.
    pub fn turns(&self) -> Result<Vec<i64>> {
        self.radii
            .iter()
            .zip(&self.weights)
            .zip(&self.senses)
            .map(|((&r, &c), &sigma)| {
                let rate = sigma * c / r;
                let k = rate.round();
                if (rate - k).abs() > 1e-9 {
                    Err(Error::NotALoopAction(format!(
                        "factor of radius {r} turns {rate} times per unit time"
                    )))
                } else {
                    Ok(k as i64)
                }
            })
            .collect()
    }

    /// Rotates factor `j` about its vertical axis by `2π·σⱼ·(cⱼ/rⱼ)·t`.
    pub fn sphere_action(&self, point: &[SpherePoint], t: f64) -> Result<Vec<SpherePoint>> {
        self.check_point(point)?;
        self.turns()?;
        Ok(self.action_unchecked(point, t))
    }

    fn action_unchecked(&self, point: &[SpherePoint], t: f64) -> Vec<SpherePoint> {
        point
            .iter()
            .zip(self.radii.iter().zip(&self.weights).zip(&self.senses))
            .map(|(p, ((&r, &c), &sigma))| {
                let (s, co) = (2.0 * PI * sigma * c / r * t).sin_cos();
                [co * p[0] - s * p[1], s * p[0] + co * p[1], p[2]]
            })
            .collect()
    }
}

/// Midpoint grid in azimuth × height on each sphere factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SphereQuadrature {
    pub azimuth: usize,
    pub height: usize,
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        Self {
            azimuth: 48,
            height: 24,
        }
    }
}

impl SphereQuadrature {
    fn halved(&self) -> Self {
        Self {
            azimuth: (self.azimuth / 2).max(1),
            height: (self.height / 2).max(1),
        }
    }

    /// Nodes of `S²(r)` with their area weights `r·Δθ·Δh`.
    pub fn nodes(&self, r: f64) -> Vec<(SpherePoint, f64)> {
        let (na, nh) = (self.azimuth.max(1), self.height.max(1));
        let dtheta = 2.0 * PI / na as f64;
        let dh = 2.0 * r / nh as f64;
        let mut out = Vec::with_capacity(na * nh);
        for b in 0..nh {
            let h = -r + (b as f64 + 0.5) * dh;
            let rho = (r * r - h * h).max(0.0).sqrt();
            for a in 0..na {
                let (s, c) = ((a as f64 + 0.5) * dtheta).sin_cos();
                out.push(([rho * c, rho * s, h], r * dtheta * dh));
            }
        }
        out
    }

    /// `∫_{S²(r)} f dA`.
    pub fn factor_integral(&self, r: f64, f: impl Fn(&SpherePoint) -> f64) -> f64 {
        let terms: Vec<f64> = self.nodes(r).iter().map(|(p, w)| w * f(p)).collect();
        crate::hamflow::pairwise_sum(&terms)
    }
}

/// `∫_X f ωᵐ` by the full tensor grid; cost grows like `(azimuth·height)ᵐ`.
pub fn integrate_product(
    x: &SphereProduct,
    quad: &SphereQuadrature,
    f: impl Fn(&[SpherePoint]) -> f64,
) -> f64 {
    let grids: Vec<Vec<(SpherePoint, f64)>> = x.radii.iter().map(|&r| quad.nodes(r)).collect();
    let m = grids.len();
    let mut idx = vec![0usize; m];
    let mut point = vec![[0.0; 3]; m];
    let mut terms = Vec::new();
    'outer: loop {
        let mut w = 1.0;
        for j in 0..m {
            point[j] = grids[j][idx[j]].0;
            w *= grids[j][idx[j]].1;
        }
        terms.push(w * f(&point));
        for j in 0..m {
            idx[j] += 1;
            if idx[j] < grids[j].len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }
    factorial(m) * crate::hamflow::pairwise_sum(&terms)
}

/// Volume and moment integral of a sphere product by separable quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MeanIntegral {
    /// `∫_X F ωᵐ`
    pub moment: Estimate,
    /// `∫_X ωᵐ`
    pub volume: Estimate,
}

fn separable(x: &SphereProduct, quad: &SphereQuadrature) -> (f64, f64) {
    let areas: Vec<f64> = x
        .radii
        .iter()
        .map(|&r| quad.factor_integral(r, |_| 1.0))
        .collect();
    let heights: Vec<f64> = x
        .radii
        .iter()
        .zip(&x.weights)
        .map(|(&r, &c)| quad.factor_integral(r, |p| 2.0 * PI * c * p[2]))
        .collect();
    let m = x.factors();
    let moment: f64 = (0..m)
        .map(|j| {
            heights[j]
                * (0..m)
                    .filter(|&k| k != j)
                    .map(|k| areas[k])
                    .product::<f64>()
        })
        .sum();
    let f = factorial(m);
    (f * moment, f * areas.iter().product::<f64>())
}

/// `∫_X F ωᵐ` and `Vol(X)`, each with the difference against the halved grid
/// as error bound.
pub fn mean_integral(x: &SphereProduct, quad: &SphereQuadrature) -> MeanIntegral {
    let (m_fine, v_fine) = separable(x, quad);
    let (m_coarse, v_coarse) = separable(x, &quad.halved());
    let floor = 1e-13
        * v_fine
        * x.weights
            .iter()
            .zip(&x.radii)
            .map(|(c, r)| 2.0 * PI * (c * r).abs())
            .sum::<f64>();
    MeanIntegral {
        moment: Estimate::new(m_fine, (m_fine - m_coarse).abs().max(floor)),
        volume: Estimate::new(v_fine, (v_fine - v_coarse).abs().max(1e-13 * v_fine)),
    }
}

/// Equivariant Darboux chart at a pole fixed point.
///
/// On factor `j` with pole sign `ε`, `zⱼ = √(2r/(r+εh))·(α₁ + iεα₂)`, so
/// `|zⱼ|² = 2r(r − εh)` and `arg zⱼ = εθ`. Valid for `|zⱼ| < 2rⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    product: SphereProduct,
    pub radius: f64,
    /// The requested radius reached the antipodal singularity and was reduced.
    pub clamped: bool,
}

/// Largest admissible chart radius as a fraction of `2·min rⱼ`.
pub const CHART_CLAMP: f64 = 0.95;

pub fn darboux_chart(x: &SphereProduct, radius: f64) -> Result<ChartSpec> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("chart radius {radius}")));
    }
    let limit = CHART_CLAMP * 2.0 * x.radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let clamped = radius > limit;
    Ok(ChartSpec {
        product: x.clone(),
        radius: radius.min(limit),
        clamped,
    })
}

impl ChartSpec {
    pub fn product(&self) -> &SphereProduct {
        &self.product
    }

    pub fn dim(&self) -> usize {
        2 * self.product.factors()
    }

    pub fn forward(&self, point: &[SpherePoint]) -> Result<Vec<f64>> {
        self.product.check_point(point)?;
        let m = self.product.factors();
        let mut out = vec![0.0; 2 * m];
        for (j, p) in point.iter().enumerate() {
            let r = self.product.radii[j];
            let e = self.product.fixed_point.0[j] as f64;
            let denom = r + e * p[2];
            if denom <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "factor {} is at the antipode of the chart base",
                    j + 1
                )));
            }
            let k = (2.0 * r / denom).sqrt();
            out[j] = k * p[0];
            out[m + j] = k * e * p[1];
        }
        Ok(out)
    }

    pub fn inverse(&self, z: &[f64]) -> Result<Vec<SpherePoint>> {
        let m = self.product.factors();
        if z.len() != 2 * m {
            return Err(Error::Dimension(format!(
                "chart point of length {}",
                z.len()
            )));
        }
        (0..m)
            .map(|j| {
                let r = self.product.radii[j];
                let e = self.product.fixed_point.0[j] as f64;
                let (q, p) = (z[j], z[m + j]);
                let rho2 = q * q + p * p;
                if rho2 >= 4.0 * r * r {
                    return Err(Error::InvalidArgument(format!(
                        "chart coordinate {} beyond the antipode",
                        j + 1
                    )));
                }
                let h = e * (r - rho2 / (2.0 * r));
                // √(r² − h²)/|z| = √((r+εh)/2r), which stays finite at z = 0.
                let k = ((r + e * h) / (2.0 * r)).sqrt();
                Ok([k * q, k * e * p, h])
            })
            .collect()
    }

    /// `chart ∘ f_t ∘ chart⁻¹`.
    pub fn action(&self, z: &[f64], t: f64) -> Result<Vec<f64>> {
        let p = self.inverse(z)?;
        self.forward(&self.product.action_unchecked(&p, t))
    }

    /// `F̃ = F∘chart⁻¹ − F(z₀)`.
    pub fn normalized_moment(&self, z: &[f64]) -> Result<f64> {
        let p = self.inverse(z)?;
        Ok(self.product.moment_unchecked(&p) - self.product.moment_at_fixed_point())
    }

    /// Chart point of cylinder coordinates `(rⱼθⱼ, hⱼ)`.
    fn cylinder_to_chart(&self, c: &[f64]) -> Result<Vec<f64>> {
        let m = self.product.factors();
        let point: Vec<SpherePoint> = (0..m)
            .map(|j| {
                let r = self.product.radii[j];
                let (theta, h) = (c[j] / r, c[m + j]);
                let rho = (r * r - h * h).max(0.0).sqrt();
                let (s, co) = theta.sin_cos();
                [rho * co, rho * s, h]
            })
            .collect();
        self.forward(&point)
    }

    fn chart_to_cylinder(&self, z: &[f64]) -> Result<Vec<f64>> {
        let m = self.product.factors();
        let p = self.inverse(z)?;
        let mut c = vec![0.0; 2 * m];
        for j in 0..m {
            c[j] = self.product.radii[j] * p[j][1].atan2(p[j][0]);
            c[m + j] = p[j][2];
        }
        Ok(c)
    }

    /// `‖MᵀJM − J‖_max` for the Jacobian `M` of the chart in cylinder
    /// (Darboux) coordinates, at chart point `z`.
    pub fn pullback_residual(&self, z: &[f64]) -> Result<f64> {
        let c = self.chart_to_cylinder(z)?;
        let d = c.len();
        let mut m = Mat::zeros(d);
        let mut cp = c.clone();
        for j in 0..d {
            cp[j] = c[j] + H_CHART;
            let up = self.cylinder_to_chart(&cp)?;
            cp[j] = c[j] - H_CHART;
            let dn = self.cylinder_to_chart(&cp)?;
            cp[j] = c[j];
            for i in 0..d {
                m[(i, j)] = (up[i] - dn[i]) / (2.0 * H_CHART);
            }
        }
        symplectic_residual(&m)
    }
}

/// Seeded chart points whose factor coordinates satisfy
/// `0.35·R/√m ≤ |zⱼ| ≤ 0.9·R/√m`, away from the poles where the cylinder
/// coordinates behind [`ChartSpec::pullback_residual`] degenerate.
pub fn chart_sample_points(chart: &ChartSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;
    let m = chart.product.factors();
    let reach = chart.radius / (m as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut z = vec![0.0; 2 * m];
            for j in 0..m {
                let rho = reach * (0.35 + 0.55 * crate::cutoff::uniform(&mut rng));
                let (s, c) = (2.0 * PI * crate::cutoff::uniform(&mut rng)).sin_cos();
                z[j] = rho * c;
                z[m + j] = rho * s;
            }
            z
        })
        .collect()
}

/// `t ↦ d₀(chart ∘ f_t ∘ chart⁻¹)` sampled at `t_k = k/intervals`.
pub fn linearized_loop(chart: &ChartSpec, intervals: usize) -> Result<MatrixLoop> {
    let x = chart.product();
    let base = chart.inverse(&vec![0.0; chart.dim()])?;
    let moved = x.action_unchecked(&base, 0.37);
    let drift = base
        .iter()
        .zip(&moved)
        .map(|(a, b)| distance(a, b))
        .fold(0.0, f64::max);
    if drift > 1e-12 * x.radii.iter().cloned().fold(0.0, f64::max) {
        return Err(Error::InvalidArgument(format!(
            "chart base is not a fixed point (moves by {drift:.3e})"
        )));
    }
    x.turns()?;
    let d = chart.dim();
    let step = 1e-4 * chart.radius;
    let k = intervals.max(2);
    let mut samples = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let t = i as f64 / k as f64;
        let mut m = Mat::zeros(d);
        let mut e = vec![0.0; d];
        for j in 0..d {
            e[j] = step;
            let up = chart.action(&e, t)?;
            e[j] = -step;
            let dn = chart.action(&e, t)?;
            e[j] = 0.0;
            for r in 0..d {
                m[(r, j)] = (up[r] - dn[r]) / (2.0 * step);
            }
        }
        samples.push(m);
    }
    MatrixLoop::from_samples(samples, 1e-6)
}

/// Integer weights `w` with `A_t ≈ rotation_matrix(w, t)`, and the worst
/// sample residual.
pub fn fit_rotation_weights(lp: &MatrixLoop) -> Result<(WeightVector, f64)> {
    let n = lp.half_dim();
    let samples = lp.samples();
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let mut total = 0.0;
        let mut prev = 0.0;
        for s in samples.iter().skip(1) {
            let a = s.as_mat();
            let angle = a[(n + k, k)].atan2(a[(k, k)]);
            let mut step = angle - prev;
            step -= 2.0 * PI * (step / (2.0 * PI)).round();
            total += step;
            prev = angle;
        }
        weights.push((total / (2.0 * PI)).round() as i64);
    }
    let w = WeightVector::new(weights);
    let residual = (0..samples.len())
        .map(|i| {
            samples[i]
                .as_mat()
                .max_abs_diff(&rotation_matrix(&w, lp.time(i)))
        })
        .fold(0.0, f64::max);
    if residual > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "loop is not a diagonal rotation loop (residual {residual:.3e})"
        )));
    }
    Ok((w, residual))
}

/// Chart fidelity at a set of chart points.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChartResiduals {
    /// `max ‖MᵀJM − J‖`
    pub pullback: f64,
    /// `max |F̃(z) + π·Σ wⱼ|zⱼ|²|`
    pub moment: f64,
    /// `max ‖(chart∘f_t∘chart⁻¹)(z) − L_t z‖`
    pub equivariance: f64,
}

pub fn chart_residuals(
    chart: &ChartSpec,
    lp: &MatrixLoop,
    weights: &WeightVector,
    points: &[Vec<f64>],
) -> Result<ChartResiduals> {
    let m = chart.product().factors();
    let mut res = ChartResiduals::default();
    for z in points {
        res.pullback = res.pullback.max(chart.pullback_residual(z)?);
        let quad: f64 = (0..m)
            .map(|j| -PI * weights.as_slice()[j] as f64 * (z[j] * z[j] + z[m + j] * z[m + j]))
            .sum();
        res.moment = res.moment.max((chart.normalized_moment(z)? - quad).abs());
        for (i, s) in lp.samples().iter().enumerate() {
            let moved = chart.action(z, lp.time(i))?;
            res.equivariance = res
                .equivariance
                .max(distance(&moved, &s.as_mat().mul_vec(z)));
        }
    }
    Ok(res)
}

/// Linearization of `[z₀ : … : zₙ] ↦ [z₀ : e^{2πia₁t}z₁ : …]` at `[1 : 0 : … : 0]`.
pub fn cpn_linearization(a: &WeightVector, intervals: usize) -> Result<(MatrixLoop, MaslovReport)> {
    if a.is_zero() {
        return Err(Error::RequirementsNotMet(
            "weights must not all vanish".into(),
        ));
    }
    if !a.is_balanced() {
        return Err(Error::RequirementsNotMet(format!(
            "weights must sum to zero, got {}",
            a.sum()
        )));
    }
    let lp = rotation_loop(a, intervals);
    let report = maslov_index_refining(&lp)?;
    Ok((lp, report))
}

/// New mean after excising a ball, with the sign of the ball integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupMean {
    pub mean_after: f64,
    pub mean_negative: bool,
}

/// `∫ F̃ ω̃ⁿ = −∫_B F ωⁿ` for a mean-zero `F`.
pub fn blowup_mean(mean_before: f64, ball_integral: f64) -> Result<BlowupMean> {
    if mean_before != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "only mean-zero Hamiltonians are supported, got mean {mean_before}"
        )));
    }
    let mean_after = -ball_integral;
    Ok(BlowupMean {
        mean_after,
        mean_negative: mean_after < 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ActionMaslov {
    pub value: f64,
    /// A nonzero value rules out contractibility on monotone manifolds.
    pub noncontractible_if_monotone: bool,
}

/// `I = −(F(z₀) − ∫F ωⁿ / Vol)` at a Maslov-zero fixed point.
pub fn action_maslov(f_at_fixed: f64, moment_integral: f64, volume: f64) -> Result<ActionMaslov> {
    if !(volume > 0.0) {
        return Err(Error::InvalidArgument(format!("volume {volume}")));
    }
    let value = -(f_at_fixed - moment_integral / volume);
    let scale = f_at_fixed
        .abs()
        .max((moment_integral / volume).abs())
        .max(1.0);
    Ok(ActionMaslov {
        value,
        noncontractible_if_monotone: value.abs() > 1e-12 * scale,
    })
}

/// `max |F(f_t(p)) − F(p)|` over points and times.
pub fn moment_drift(x: &SphereProduct, points: &[Vec<SpherePoint>], times: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        let f0 = x.moment(p)?;
        for &t in times {
            let moved = x.sphere_action(p, t)?;
            worst = worst.max((x.moment(&moved)? - f0).abs());
        }
    }
    Ok(worst)
}

/// Whether every sample of a linearized loop is symplectic within `TOL_SP`.
pub fn loop_is_symplectic(lp: &MatrixLoop) -> Result<bool> {
    for s in lp.samples() {
        if symplectic_residual(s.as_mat())? > TOL_SP {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_at_paper_points() {
        let x = SphereProduct::two_spheres(1.0, 2.0).unwrap();
        assert!((x.moment_at_fixed_point() + 6.0 * PI).abs() < 1e-12);
        let eq = [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        assert_eq!(x.moment(&eq).unwrap(), 0.0);
        let y = SphereProduct::many_spheres(3, 1.0, 2.0).unwrap();
        assert!((y.moment_at_fixed_point() + 12.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn off_manifold_point_is_rejected() {
        let x = SphereProduct::two_spheres(1.0, 2.0).unwrap();
        let bad = [[1.0, 0.1, 0.0], [0.0, 2.0, 0.0]];
        assert!(matches!(x.moment(&bad), Err(Error::OffManifold { .. })));
    }

    #[test]
    fn senses_and_turns() {
        let x = SphereProduct::two_spheres(1.0, 2.0).unwrap();
        assert_eq!(x.senses(), &[1.0, 1.0]);
        assert_eq!(x.turns().unwrap(), vec![1, 1]);
        let y = SphereProduct::new(vec![1.0], vec![0.5], PoleSigns(vec![1])).unwrap();
        assert!(matches!(y.turns(), Err(Error::NotALoopAction(_))));
    }

    #[test]
    fn chart_round_trip() {
        let x = SphereProduct::two_spheres(1.0, 2.0).unwrap();
        let c = darboux_chart(&x, 1.0).unwrap();
        assert_eq!(c.forward(&x.fixed_point()).unwrap(), vec![0.0; 4]);
        let z = [0.3, -0.2, 0.5, 0.1];
        let back = c.forward(&c.inverse(&z).unwrap()).unwrap();
        assert!(distance(&back, &z) < 1e-12);
        assert!(darboux_chart(&x, 5.0).unwrap().clamped);
    }

    #[test]
    fn example_loop_weights() {
        let x = SphereProduct::two_spheres(1.0, 2.0).unwrap();
        let c = darboux_chart(&x, 1.0).unwrap();
        let lp = linearized_loop(&c, 64).unwrap();
        let (w, res) = fit_rotation_weights(&lp).unwrap();
        assert_eq!(w.as_slice(), &[1, -1]);
        assert!(res < 1e-8);
    }

    #[test]
    fn blowup_and_action() {
        assert_eq!(blowup_mean(0.0, 0.5).unwrap().mean_after, -0.5);
        assert!(blowup_mean(1.0, 0.5).is_err());
        let a = action_maslov(-6.0 * PI, 0.0, 128.0 * PI * PI).unwrap();
        assert!((a.value - 6.0 * PI).abs() < 1e-12 && a.noncontractible_if_monotone);
        assert!(
            !action_maslov(2.0, 2.0 * 5.0, 5.0)
                .unwrap()
                .noncontractible_if_monotone
        );
    }
}

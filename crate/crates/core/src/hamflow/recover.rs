//! Recovering the normalized generating Hamiltonian of a loop of
//! symplectomorphisms from the maps themselves.
//!
//! For a family `g_t` with time-`t` vector field `Y_t = (∂ₜg_t)∘g_t⁻¹`, the
//! one-form `ι_{Y_t}ω₀` is closed, and its potential vanishing at the origin
//! is the line integral `G_t(x) = ∫₀¹ ω₀(Y_t(σx), x) dσ`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use super::field::{ScalarField, Support};
use super::quadrature::gauss_legendre_unit;
use crate::error::{Error, Result};

/// Time step for finite differences of flows in `t`.
pub const H_T: f64 = 1e-4;

/// Gauss–Legendre order on each panel of the segment integral.
pub const SEGMENT_ORDER: usize = 5;

/// `ω₀(u, v) = Σ u_q·v_p − u_p·v_q`.
#[inline]
pub fn omega0(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() / 2;
    (0..n).map(|k| u[k] * v[n + k] - u[n + k] * v[k]).sum()
}

/// One map `g_t` of a family, with its inverse.
pub trait TimeSlice {
    fn apply(&self, x: &[f64], out: &mut [f64]);

    fn invert(&self, y: &[f64], out: &mut [f64]);
}

/// A smooth family `t ↦ g_t` of symplectomorphisms of ℝ²ⁿ.
pub trait LoopFamily {
    fn dim(&self) -> usize;

    fn slice(&self, t: f64) -> Box<dyn TimeSlice + '_>;

    /// Radii across which the family is only finitely smooth; segment
    /// integrals split their panels there.
    fn radial_breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// All maps are the identity outside this radius.
    fn support_radius(&self) -> Option<f64> {
        None
    }
}

/// Evaluates `Y_t` at a fixed `t` from precomputed slices.
pub struct VelocitySampler<'a> {
    center: Box<dyn TimeSlice + 'a>,
    stencil: Vec<(f64, Box<dyn TimeSlice + 'a>)>,
    step: f64,
    dim: usize,
}

impl<'a> VelocitySampler<'a> {
    pub fn new<L: LoopFamily + ?Sized>(family: &'a L, t: f64, step: f64) -> Self {
        let center = family.slice(t);
        let stencil = if t - step >= 0.0 && t + step <= 1.0 {
            vec![
                (-0.5, family.slice(t - step)),
                (0.5, family.slice(t + step)),
            ]
        } else {
            let dir = if t - step < 0.0 { 1.0 } else { -1.0 };
            vec![
                (-1.5 * dir, family.slice(t)),
                (2.0 * dir, family.slice(t + dir * step)),
                (-0.5 * dir, family.slice(t + 2.0 * dir * step)),
            ]
        };
        Self {
            center,
            stencil,
            step,
            dim: family.dim(),
        }
    }

    /// `Y_t(y)`, written into `out`.
    pub fn velocity(&self, y: &[f64], out: &mut [f64]) {
        let mut z = vec![0.0; self.dim];
        let mut img = vec![0.0; self.dim];
        self.velocity_with(y, out, &mut z, &mut img)
    }

    fn velocity_with(&self, y: &[f64], out: &mut [f64], z: &mut [f64], img: &mut [f64]) {
        self.center.invert(y, z);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (coef, slice) in &self.stencil {
            slice.apply(z, img);
            for (o, v) in out.iter_mut().zip(img.iter()) {
                *o += coef * v;
            }
        }
        out.iter_mut().for_each(|o| *o /= self.step);
    }

    pub fn map(&self, x: &[f64], out: &mut [f64]) {
        self.center.apply(x, out)
    }

    pub fn inverse(&self, y: &[f64], out: &mut [f64]) {
        self.center.invert(y, out)
    }
}

/// Segment integral of `ω₀(Y, ·)` from `start` to `end`.
fn segment_integral(
    sampler: &VelocitySampler<'_>,
    start: &[f64],
    end: &[f64],
    breakpoints: &[f64],
    support: Option<f64>,
    order: usize,
) -> f64 {
    let d = start.len();
    let dir: Vec<f64> = end.iter().zip(start).map(|(e, s)| e - s).collect();
    // Panel boundaries in σ where the segment crosses a breakpoint sphere.
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    let a: f64 = dir.iter().map(|c| c * c).sum();
    if a == 0.0 {
        return 0.0;
    }
    let b: f64 = 2.0 * start.iter().zip(&dir).map(|(s, v)| s * v).sum::<f64>();
    let c0: f64 = start.iter().map(|s| s * s).sum();
    let mut radii: Vec<f64> = breakpoints.to_vec();
    if let Some(r) = support {
        radii.push(r);
    }
    for r in radii {
        let disc = b * b - 4.0 * a * (c0 - r * r);
        if disc > 0.0 {
            let sq = disc.sqrt();
            for root in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                if root > 0.0 && root < 1.0 {
                    cuts.push(root);
                }
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);

    let (nodes, weights) = gauss_legendre_unit(order);
    let mut p = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut z = vec![0.0; d];
    let mut img = vec![0.0; d];
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if let Some(r) = support {
            let mid = 0.5 * (lo + hi);
            let pm: f64 = start
                .iter()
                .zip(&dir)
                .map(|(s, v)| (s + mid * v) * (s + mid * v))
                .sum::<f64>()
                .sqrt();
            if pm > r {
                continue;
            }
        }
        let mut panel = 0.0;
        for (sn, wn) in nodes.iter().zip(&weights) {
            let sigma = lo + (hi - lo) * sn;
            for i in 0..d {
                p[i] = start[i] + sigma * dir[i];
            }
            sampler.velocity_with(&p, &mut y, &mut z, &mut img);
            panel += wn * omega0(&y, &dir);
        }
        total += (hi - lo) * panel;
    }
    total
}

fn finite_or_err(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("generating Hamiltonian"))
    }
}

/// `G_t(x)` with `G_t(0) = 0`, by the straight-segment line integral.
pub fn recover_generating_hamiltonian<L: LoopFamily + ?Sized>(
    family: &L,
    t: f64,
    x: &[f64],
) -> Result<f64> {
    let sampler = VelocitySampler::new(family, t, H_T);
    let origin = vec![0.0; x.len()];
    finite_or_err(segment_integral(
        &sampler,
        &origin,
        x,
        &family.radial_breakpoints(),
        family.support_radius(),
        SEGMENT_ORDER,
    ))
}

/// `|∫_{0→x} − ∫_{0→w→x}|`: the line integral's dependence on the path,
/// which vanishes when `ι_Yω₀` is closed.
pub fn closedness_residual<L: LoopFamily + ?Sized>(
    family: &L,
    t: f64,
    x: &[f64],
    waypoint: &[f64],
) -> Result<f64> {
    let sampler = VelocitySampler::new(family, t, H_T);
    let origin = vec![0.0; x.len()];
    let bp = family.radial_breakpoints();
    let sup = family.support_radius();
    let direct = segment_integral(&sampler, &origin, x, &bp, sup, SEGMENT_ORDER);
    let leg1 = segment_integral(&sampler, &origin, waypoint, &bp, sup, SEGMENT_ORDER);
    let leg2 = segment_integral(&sampler, waypoint, x, &bp, None, SEGMENT_ORDER);
    finite_or_err((direct - (leg1 + leg2)).abs())
}

/// Like [`recover_generating_hamiltonian`], erroring when the two-leg path
/// through `waypoint` disagrees by more than `tol`.
pub fn recover_checked<L: LoopFamily + ?Sized>(
    family: &L,
    t: f64,
    x: &[f64],
    waypoint: &[f64],
    tol: f64,
) -> Result<f64> {
    let residual = closedness_residual(family, t, x, waypoint)?;
    if residual > tol {
        return Err(Error::NotClosed { residual });
    }
    recover_generating_hamiltonian(family, t, x)
}

/// The recovered `G_t` as a scalar field.
pub struct GeneratingHamiltonian<'a, L: ?Sized> {
    family: &'a L,
    pub order: usize,
}

impl<'a, L: LoopFamily + ?Sized> GeneratingHamiltonian<'a, L> {
    pub fn new(family: &'a L) -> Self {
        Self {
            family,
            order: SEGMENT_ORDER,
        }
    }

    /// Evaluator for many points at one time.
    pub fn frozen(&self, t: f64) -> FrozenGenerator<'a> {
        FrozenGenerator {
            sampler: VelocitySampler::new(self.family, t, H_T),
            breakpoints: self.family.radial_breakpoints(),
            support: self.family.support_radius(),
            order: self.order,
        }
    }
}

/// `G_t` at a fixed `t`, also exposing `g_t` and `g_t⁻¹`.
pub struct FrozenGenerator<'a> {
    sampler: VelocitySampler<'a>,
    breakpoints: Vec<f64>,
    support: Option<f64>,
    order: usize,
}

impl FrozenGenerator<'_> {
    pub fn value(&self, x: &[f64]) -> f64 {
        let origin = vec![0.0; x.len()];
        segment_integral(
            &self.sampler,
            &origin,
            x,
            &self.breakpoints,
            self.support,
            self.order,
        )
    }

    pub fn velocity(&self, y: &[f64], out: &mut [f64]) {
        self.sampler.velocity(y, out)
    }

    pub fn map(&self, x: &[f64], out: &mut [f64]) {
        self.sampler.map(x, out)
    }

    pub fn inverse(&self, y: &[f64], out: &mut [f64]) {
        self.sampler.inverse(y, out)
    }
}

impl<L: LoopFamily + ?Sized> ScalarField for GeneratingHamiltonian<'_, L> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.frozen(t).value(x)
    }

    fn support(&self) -> Support {
        match self.family.support_radius() {
            Some(radius) => Support::Ball { radius },
            None => Support::Global,
        }
    }

    fn at_time<'b>(&'b self, t: f64) -> Box<dyn Fn(&[f64]) -> f64 + 'b> {
        let frozen = self.frozen(t);
        Box::new(move |x| frozen.value(x))
    }
}

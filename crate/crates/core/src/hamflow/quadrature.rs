//! Volume quadrature on balls of ℝ²ⁿ, reported against `ω₀ⁿ`.
//!
//! `ω₀ⁿ = n!·dq₁dp₁…dqₙdpₙ`, so every integral here is `n!` times its
//! Lebesgue counterpart. Each estimate carries an error bound obtained from
//! a nested coarser rule evaluated on a subset of the same nodes.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `∫_{B_ρ} ω₀ⁿ = πⁿ·ρ²ⁿ`.
pub fn ball_symplectic_volume(half_dim: usize, radius: f64) -> f64 {
    core::f64::consts::PI.powi(half_dim as i32) * radius.powi(2 * half_dim as i32)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    let m = order.max(1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_m.
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// A scalar estimate with its declared error bound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }
}

/// Result of integrating over a ball.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BallIntegral {
    pub estimate: Estimate,
    /// Value from the nested coarse rule.
    pub coarse: f64,
    /// Largest `|f|` seen on the boundary sphere (support-escape indicator).
    pub boundary_max: f64,
    /// Number of nodes inside the ball.
    pub nodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum QuadratureRule {
    /// Tensor midpoint grid on the enclosing cube with ball indicator.
    Midpoint { per_axis: usize },
    /// Shifted Halton points in the enclosing cube, shift drawn from `seed`.
    QuasiRandom { points: usize, seed: u64 },
}

/// Quadrature over the closed ball of `radius` about the origin in ℝ^dim.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallQuadrature {
    pub dim: usize,
    pub radius: f64,
    pub rule: QuadratureRule,
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while k > 0 {
        r += f * (k % base) as f64;
        k /= base;
        f *= inv;
    }
    r
}

impl BallQuadrature {
    pub fn midpoint(dim: usize, radius: f64, per_axis: usize) -> Self {
        Self {
            dim,
            radius,
            rule: QuadratureRule::Midpoint { per_axis },
        }
    }

    pub fn quasi_random(dim: usize, radius: f64, points: usize, seed: u64) -> Self {
        Self {
            dim,
            radius,
            rule: QuadratureRule::QuasiRandom { points, seed },
        }
    }

    pub fn with_radius(&self, radius: f64) -> Self {
        Self { radius, ..*self }
    }

    /// `n!` for `dim = 2n`.
    pub fn measure_factor(&self) -> f64 {
        factorial(self.dim / 2)
    }

    /// Visits every node inside the ball with its Lebesgue weight and whether
    /// it also belongs to the coarse rule (with the coarse weight).
    pub fn for_each_node(&self, mut visit: impl FnMut(&[f64], f64, Option<f64>)) {
        let d = self.dim;
        let r = self.radius;
        let r2 = r * r;
        match self.rule {
            QuadratureRule::Midpoint { per_axis } => {
                let m = per_axis.max(1);
                let h = 2.0 * r / m as f64;
                let weight = h.powi(d as i32);
                let nested = m.is_multiple_of(3);
                let coarse_weight = (3.0 * h).powi(d as i32);
                let total = m.pow(d as u32);
                let mut x = vec![0.0; d];
                for flat in 0..total {
                    let mut rem = flat;
                    let mut in_coarse = nested;
                    for xi in x.iter_mut() {
                        let i = rem % m;
                        rem /= m;
                        *xi = -r + (i as f64 + 0.5) * h;
                        in_coarse &= i % 3 == 1;
                    }
                    if x.iter().map(|c| c * c).sum::<f64>() <= r2 {
                        visit(&x, weight, in_coarse.then_some(coarse_weight));
                    }
                }
            }
            QuadratureRule::QuasiRandom { points, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let shift: Vec<f64> = (0..d)
                    .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
                    .collect();
                let cube = (2.0 * r).powi(d as i32);
                let weight = cube / points as f64;
                let half = points / 2;
                let coarse_weight = cube / half.max(1) as f64;
                let mut x = vec![0.0; d];
                for k in 0..points {
                    for (axis, xi) in x.iter_mut().enumerate() {
                        let u = radical_inverse(k as u64 + 1, PRIMES[axis % PRIMES.len()])
                            + shift[axis];
                        *xi = -r + 2.0 * r * (u - u.floor());
                    }
                    if x.iter().map(|c| c * c).sum::<f64>() <= r2 {
                        visit(&x, weight, (k < half).then_some(coarse_weight));
                    }
                }
            }
        }
    }

    /// Nodes inside the ball, in visiting order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        self.for_each_node(|x, _, _| out.push(x.to_vec()));
        out
    }

    fn coarse_needs_separate_pass(&self) -> bool {
        matches!(self.rule, QuadratureRule::Midpoint { per_axis } if !per_axis.is_multiple_of(3))
    }

    /// `∫_B f ω₀ⁿ` with a refinement error bound.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> BallIntegral {
        let factor = self.measure_factor();
        let mut fine = Vec::new();
        let mut coarse = Vec::new();
        let mut abs_mass = Vec::new();
        self.for_each_node(|x, w, cw| {
            let v = f(x);
            fine.push(v * w);
            abs_mass.push((v * w).abs());
            if let Some(cw) = cw {
                coarse.push(v * cw);
            }
        });
        let nodes = fine.len();
        let coarse_value = if self.coarse_needs_separate_pass() {
            let QuadratureRule::Midpoint { per_axis } = self.rule else {
                unreachable!()
            };
            let sub = BallQuadrature::midpoint(self.dim, self.radius, (per_axis / 2).max(1));
            let mut vals = Vec::new();
            sub.for_each_node(|x, w, _| vals.push(f(x) * w));
            pairwise_sum(&vals)
        } else {
            pairwise_sum(&coarse)
        };
        let value = factor * pairwise_sum(&fine);
        let coarse_value = factor * coarse_value;
        let floor = 1e-13 * factor * pairwise_sum(&abs_mass);
        let boundary_max = self.boundary_probe(&mut f);
        BallIntegral {
            estimate: Estimate::new(value, (value - coarse_value).abs().max(floor)),
            coarse: coarse_value,
            boundary_max,
            nodes,
        }
    }

    /// Max `|f|` at the 2·dim axis points and the 2^min(dim,6) diagonal
    /// points of the boundary sphere.
    fn boundary_probe(&self, f: &mut impl FnMut(&[f64]) -> f64) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        let mut x = vec![0.0; d];
        for axis in 0..d {
            for sign in [-1.0, 1.0] {
                x.iter_mut().for_each(|c| *c = 0.0);
                x[axis] = sign * self.radius;
                worst = worst.max(f(&x).abs());
            }
        }
        let diag = self.radius / (d as f64).sqrt();
        for mask in 0..(1usize << d.min(6)) {
            for (axis, c) in x.iter_mut().enumerate() {
                *c = if mask >> axis & 1 == 1 { -diag } else { diag };
            }
            worst = worst.max(f(&x).abs());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre_unit(5);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!((integral - 0.1).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let q = BallQuadrature::midpoint(4, 1.0, 12);
        let r = q.integrate(|_| 0.0);
        assert_eq!(r.estimate.value, 0.0);
    }

    #[test]
    fn ball_volume_in_two_dimensions() {
        let q = BallQuadrature::midpoint(2, 1.0, 300);
        let r = q.integrate(|_| 1.0);
        assert!((r.estimate.value - core::f64::consts::PI).abs() < 1e-2);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }

    #[test]
    fn quasi_random_is_seed_deterministic() {
        let a = BallQuadrature::quasi_random(4, 1.0, 500, 7).nodes();
        let b = BallQuadrature::quasi_random(4, 1.0, 500, 7).nodes();
        let c = BallQuadrature::quasi_random(4, 1.0, 500, 8).nodes();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

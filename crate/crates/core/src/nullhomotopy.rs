//! Explicit based null-homotopies of balanced rotation loops, and the
//! quadratic Hamiltonians that generate them in the homotopy parameter.
//!
//! A balanced weight vector splits into elementary transfers `c·(eᵢ − eⱼ)`.
//! Each transfer is contracted inside the four coordinates of planes `i` and
//! `j` with the quaternion belt trick
//!
//! ```text
//! q(s, t) = exp(cπt·k) · exp(cπt·u(s)),   u(s) = cos(π(1−s))·k + sin(π(1−s))·i
//! ```
//!
//! acting by left multiplication. Left multiplications commute with `J`
//! (which is right multiplication by `k` under the chosen embedding), so
//! every value is unitary.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::symplin::{
    rotation_matrix, standard_j, symplectic_inverse, symplectic_residual, WeightVector,
};

/// Finite-difference step in `s` for the generating Hamiltonian.
pub const H_S: f64 = 1e-5;

/// Largest tolerated antisymmetric part of `½·J·∂ₛA·A⁻¹`.
pub const DIRECTION_TOL: f64 = 1e-6;

/// A two-parameter family `A(s, t)` of symplectic matrices with
/// `A(0, ·) = Id` and `A(s, 0) = A(s, 1) = Id`.
pub trait SymplecticHomotopy: Send + Sync {
    fn half_dim(&self) -> usize;

    fn value(&self, s: f64, t: f64) -> Mat;
}

/// One elementary step `count·(e_from − e_to)` of a balanced weight vector.
/// Plane indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub count: u32,
}

/// Greedy decomposition: repeatedly move weight from the largest positive
/// entry to the most negative one.
pub fn pair_decompose(weights: &WeightVector) -> Result<Vec<Transfer>> {
    if !weights.is_balanced() {
        return Err(Error::UnbalancedWeights { sum: weights.sum() });
    }
    let mut rest = weights.as_slice().to_vec();
    let mut transfers = Vec::new();
    while let Some((from, &hi)) = rest
        .iter()
        .enumerate()
        .max_by_key(|&(i, v)| (*v, -(i as i64)))
    {
        if hi <= 0 {
            break;
        }
        let (to, &lo) = rest
            .iter()
            .enumerate()
            .min_by_key(|&(i, v)| (*v, i as i64))
            .expect("nonempty");
        let count = hi.min(-lo);
        transfers.push(Transfer {
            from,
            to,
            count: count as u32,
        });
        rest[from] -= count;
        rest[to] += count;
    }
    Ok(transfers)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Quaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Quaternion {
    fn mul(self, o: Self) -> Self {
        Self {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }

    /// `exp(θ·v)` for a unit imaginary `v = vx·i + vy·j + vz·k`.
    fn exp_imaginary(theta: f64, vx: f64, vy: f64, vz: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            w: c,
            x: s * vx,
            y: s * vy,
            z: s * vz,
        }
    }

    /// Left multiplication on ℍ in the ordered basis (1, i, j, k).
    fn left_matrix(self) -> [[f64; 4]; 4] {
        let Self { w, x, y, z } = self;
        [[w, -x, -y, -z], [x, w, -z, y], [y, z, w, -x], [z, -y, x, w]]
    }
}

fn belt_quaternion(count: u32, s: f64, t: f64) -> Quaternion {
    let c = count as f64;
    let angle = c * PI * t;
    let phi = PI * (1.0 - s);
    let (sin_phi, cos_phi) = phi.sin_cos();
    let outer = Quaternion::exp_imaginary(angle, 0.0, 0.0, 1.0);
    let inner = Quaternion::exp_imaginary(angle, sin_phi, 0.0, cos_phi);
    outer.mul(inner)
}

/// Global coordinates of the quaternion basis (1, i, j, k) for a transfer.
///
/// `1 → qᵢ, k → pᵢ, j → qⱼ, i → pⱼ`. With this orientation `J` is right
/// multiplication by `k`, plane `from` turns with weight `+c` and plane `to`
/// with weight `−c` at `s = 1`.
fn embedding(n: usize, tr: &Transfer) -> [usize; 4] {
    [tr.from, n + tr.to, tr.to, n + tr.from]
}

fn embed_left(n: usize, tr: &Transfer, q: Quaternion) -> Mat {
    let l = q.left_matrix();
    let idx = embedding(n, tr);
    let mut m = Mat::identity(2 * n);
    for a in 0..4 {
        for b in 0..4 {
            m[(idx[a], idx[b])] = l[a][b];
        }
    }
    m
}

/// Pointwise product of embedded belt contractions, one per transfer.
#[derive(Clone, Debug, PartialEq)]
pub struct BasedHomotopy {
    half_dim: usize,
    transfers: Vec<Transfer>,
    target: WeightVector,
    /// Grid resolution `(K_s, K_t)` used by sampled consumers.
    pub grid: (usize, usize),
}

impl BasedHomotopy {
    pub fn transfers(&self) -> &[Transfer] {
        &self.transfers
    }

    /// Weights of the rotation loop at `s = 1`.
    pub fn target(&self) -> &WeightVector {
        &self.target
    }

    pub fn target_value(&self, t: f64) -> Mat {
        rotation_matrix(&self.target, t)
    }
}

impl SymplecticHomotopy for BasedHomotopy {
    fn half_dim(&self) -> usize {
        self.half_dim
    }

    fn value(&self, s: f64, t: f64) -> Mat {
        let n = self.half_dim;
        let mut acc = Mat::identity(2 * n);
        for tr in &self.transfers {
            let factor = embed_left(n, tr, belt_quaternion(tr.count, s, t));
            acc = &acc * &factor;
        }
        acc
    }
}

/// Belt contraction of the two-plane loop with weights `(c, −c)` on ℝ⁴.
pub fn belt_homotopy(count: u32) -> Result<BasedHomotopy> {
    if count == 0 {
        return Err(Error::InvalidArgument("belt count must be positive".into()));
    }
    Ok(BasedHomotopy {
        half_dim: 2,
        transfers: alloc::vec![Transfer {
            from: 0,
            to: 1,
            count
        }],
        target: WeightVector::new(alloc::vec![count as i64, -(count as i64)]),
        grid: (21, 21),
    })
}

pub fn build_based_homotopy(weights: &WeightVector) -> Result<BasedHomotopy> {
    if weights.is_empty() {
        return Err(Error::Dimension("empty weight vector".into()));
    }
    let transfers = pair_decompose(weights)?;
    Ok(BasedHomotopy {
        half_dim: weights.len(),
        transfers,
        target: weights.clone(),
        grid: (21, 21),
    })
}

/// Residuals of the four boundary identities and of symplecticity on a grid.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundaryReport {
    /// `max_t ‖A(0,t) − Id‖`
    pub start: f64,
    /// `max_t ‖A(1,t) − target(t)‖`
    pub end: f64,
    /// `max_s ‖A(s,0) − Id‖`
    pub base_start: f64,
    /// `max_s ‖A(s,1) − Id‖`
    pub base_end: f64,
    /// `max_{s,t} ‖AᵀJA − J‖`
    pub symplectic: f64,
}

impl BoundaryReport {
    pub fn max_boundary(&self) -> f64 {
        self.start
            .max(self.end)
            .max(self.base_start)
            .max(self.base_end)
    }
}

/// Sweeps an `ks × kt` grid (inclusive of both ends) checking every
/// based-homotopy identity against the target rotation loop.
pub fn check_boundaries(h: &BasedHomotopy, ks: usize, kt: usize) -> Result<BoundaryReport> {
    let id = Mat::identity(2 * h.half_dim());
    let mut rep = BoundaryReport::default();
    for i in 0..ks {
        let s = i as f64 / (ks - 1).max(1) as f64;
        for j in 0..kt {
            let t = j as f64 / (kt - 1).max(1) as f64;
            let a = h.value(s, t);
            rep.symplectic = rep.symplectic.max(symplectic_residual(&a)?);
            if i == 0 {
                rep.start = rep.start.max(a.max_abs_diff(&id));
            }
            if i == ks - 1 {
                rep.end = rep.end.max(a.max_abs_diff(&h.target_value(t)));
            }
            if j == 0 {
                rep.base_start = rep.base_start.max(a.max_abs_diff(&id));
            }
            if j == kt - 1 {
                rep.base_end = rep.base_end.max(a.max_abs_diff(&id));
            }
        }
    }
    Ok(rep)
}

/// `H(x) = ⟨x, Q·x⟩` with symmetric `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticHamiltonian {
    pub q: Mat,
}

impl QuadraticHamiltonian {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.q.quadratic_form(x)
    }

    /// Matrix `S = −2JQ` of the linear vector field it generates.
    pub fn generator(&self) -> Mat {
        let j = standard_j(self.q.dim() / 2);
        (&j * &self.q).scaled(-2.0)
    }
}

/// `∂ₛA(s,t)` by central differences, one-sided (second order) at the ends of `[0, 1]`.
pub fn homotopy_s_derivative(h: &dyn SymplecticHomotopy, s: f64, t: f64, step: f64) -> Mat {
    if s - step >= 0.0 && s + step <= 1.0 {
        h.value(s + step, t)
            .sub(&h.value(s - step, t))
            .scaled(0.5 / step)
    } else {
        let dir = if s - step < 0.0 { 1.0 } else { -1.0 };
        let f0 = h.value(s, t);
        let f1 = h.value(s + dir * step, t);
        let f2 = h.value(s + 2.0 * dir * step, t);
        f1.scaled(4.0)
            .sub(&f0.scaled(3.0))
            .sub(&f2)
            .scaled(dir * 0.5 / step)
    }
}

/// Symmetric part of `½·J·∂ₛA·A⁻¹` and the size of its antisymmetric part.
pub fn generator_symmetrized(h: &dyn SymplecticHomotopy, s: f64, t: f64) -> (Mat, f64) {
    let n = h.half_dim();
    let a = h.value(s, t);
    let da = homotopy_s_derivative(h, s, t, H_S);
    let raw = (&(&standard_j(n) * &da) * &symplectic_inverse(&a)).scaled(0.5);
    raw.symmetrize()
}

/// `Q(s,t) = ½·J·∂ₛA·A⁻¹`, symmetrized after checking its antisymmetric part.
pub fn homotopy_hamiltonian(
    h: &dyn SymplecticHomotopy,
    s: f64,
    t: f64,
) -> Result<QuadraticHamiltonian> {
    let (q, residual) = generator_symmetrized(h, s, t);
    if !(residual < DIRECTION_TOL) {
        return Err(Error::NotSymplecticDirection { residual });
    }
    if !q.max_abs().is_finite() {
        return Err(Error::NonFinite("homotopy Hamiltonian"));
    }
    Ok(QuadraticHamiltonian { q })
}

/// Homotopy that is constant in `s`; mostly useful as a degenerate input.
#[derive(Clone, Debug)]
pub struct ConstantHomotopy {
    pub half_dim: usize,
}

impl SymplecticHomotopy for ConstantHomotopy {
    fn half_dim(&self) -> usize {
        self.half_dim
    }

    fn value(&self, _s: f64, _t: f64) -> Mat {
        Mat::identity(2 * self.half_dim)
    }
}

/// Renders transfers with one-based plane indices, e.g. `(2,1,1)`.
pub fn describe_transfers(transfers: &[Transfer]) -> alloc::string::String {
    let parts: Vec<_> = transfers
        .iter()
        .map(|t| format!("({},{},{})", t.from + 1, t.to + 1, t.count))
        .collect();
    format!("[{}]", parts.join(","))
}

//! Scalar fields, Hamiltonian vector fields and Poisson brackets.
//!
//! Sign conventions: `ι_{X_H} ω₀ = dH`, so `X_H = −J∇H`, and
//! `{F, G} = dF(X_G) = ∇F · (−J∇G)`, which gives `{q, p} = 1`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{norm, Mat};

/// Spatial finite-difference step for gradients and Jacobians.
pub const H_X: f64 = 1e-5;

/// Where a field is allowed to be nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Global,
    /// Closed ball of the given radius about `center` (origin when `None`).
    Ball {
        radius: f64,
    },
}

/// A time-dependent real function on ℝ²ⁿ.
pub trait ScalarField {
    fn dim(&self) -> usize;

    fn value(&self, t: f64, x: &[f64]) -> f64;

    /// Gradient in `x`; central differences unless overridden.
    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) {
        central_gradient(|y| self.value(t, y), x, H_X, out);
    }

    fn support(&self) -> Support {
        Support::Global
    }

    /// The field frozen at time `t`. Implementations may precompute
    /// time-dependent data here; callers evaluating many points at one time
    /// should prefer this over repeated [`ScalarField::value`] calls.
    fn at_time<'a>(&'a self, t: f64) -> Box<dyn Fn(&[f64]) -> f64 + 'a> {
        Box::new(move |x| self.value(t, x))
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        (**self).value(t, x)
    }
    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (**self).gradient(t, x, out)
    }
    fn support(&self) -> Support {
        (**self).support()
    }
    fn at_time<'a>(&'a self, t: f64) -> Box<dyn Fn(&[f64]) -> f64 + 'a> {
        (**self).at_time(t)
    }
}

pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64, out: &mut [f64]) {
    let mut y = x.to_vec();
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let fp = f(&y);
        y[i] = x[i] - h;
        let fm = f(&y);
        y[i] = x[i];
        out[i] = (fp - fm) / (2.0 * h);
    }
}

/// Jacobian of a map ℝᵈ → ℝᵈ by central differences.
pub fn central_jacobian(f: impl Fn(&[f64]) -> Result<Vec<f64>>, x: &[f64], h: f64) -> Result<Mat> {
    let d = x.len();
    let mut jac = Mat::zeros(d);
    let mut y = x.to_vec();
    for j in 0..d {
        y[j] = x[j] + h;
        let fp = f(&y)?;
        y[j] = x[j] - h;
        let fm = f(&y)?;
        y[j] = x[j];
        for i in 0..d {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// `out = −J·v`, i.e. `(v_p, −v_q)`.
#[inline]
pub fn apply_minus_j(v: &[f64], out: &mut [f64]) {
    let n = v.len() / 2;
    for k in 0..n {
        out[k] = v[n + k];
        out[n + k] = -v[k];
    }
}

/// `X_H(t, x) = −J∇H(t, x)`.
pub fn hamiltonian_vector_field<H: ScalarField + ?Sized>(
    h: &H,
    t: f64,
    x: &[f64],
) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; x.len()];
    h.gradient(t, x, &mut grad);
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let mut out = vec![0.0; x.len()];
    apply_minus_j(&grad, &mut out);
    Ok(out)
}

/// `{F₁, F₂}(t, x) = ∇F₁ · (−J∇F₂)`.
pub fn poisson_bracket<A, B>(f1: &A, f2: &B, t: f64, x: &[f64]) -> Result<f64>
where
    A: ScalarField + ?Sized,
    B: ScalarField + ?Sized,
{
    let mut g1 = vec![0.0; x.len()];
    f1.gradient(t, x, &mut g1);
    let x2 = hamiltonian_vector_field(f2, t, x)?;
    let value: f64 = g1.iter().zip(&x2).map(|(a, b)| a * b).sum();
    if !value.is_finite() {
        return Err(Error::NonFinite("Poisson bracket"));
    }
    Ok(value)
}

/// Time-dependent velocity field `ẋ = V(t, x)`.
pub trait VectorField {
    fn dim(&self) -> usize;

    fn velocity(&self, t: f64, x: &[f64], out: &mut [f64]);
}

/// The Hamiltonian vector field of a scalar field.
pub struct HamiltonianFlowField<'a, H: ?Sized>(pub &'a H);

impl<H: ScalarField + ?Sized> VectorField for HamiltonianFlowField<'_, H> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn velocity(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let mut grad = vec![0.0; x.len()];
        self.0.gradient(t, x, &mut grad);
        apply_minus_j(&grad, out);
    }
}

/// Time-independent quadratic form `⟨x, Q·x⟩` with analytic gradient.
#[derive(Clone, Debug)]
pub struct QuadraticField {
    pub q: Mat,
}

impl ScalarField for QuadraticField {
    fn dim(&self) -> usize {
        self.q.dim()
    }

    fn value(&self, _t: f64, x: &[f64]) -> f64 {
        self.q.quadratic_form(x)
    }

    fn gradient(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        self.q.mul_vec_into(x, out);
        out.iter_mut().for_each(|g| *g *= 2.0);
    }
}

/// Smooth compactly supported bump `A·exp(1 − 1/(1 − |x−c|²/w²))` on `|x−c| < w`.
#[derive(Clone, Debug)]
pub struct SmoothBump {
    pub center: Vec<f64>,
    pub width: f64,
    pub amplitude: f64,
}

impl SmoothBump {
    fn offset_ratio(&self, x: &[f64]) -> f64 {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d2 / (self.width * self.width)
    }
}

impl ScalarField for SmoothBump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, _t: f64, x: &[f64]) -> f64 {
        let u = self.offset_ratio(x);
        if u >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - u)).exp()
        }
    }

    fn gradient(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        let u = self.offset_ratio(x);
        if u >= 1.0 {
            out.iter_mut().for_each(|g| *g = 0.0);
            return;
        }
        let v = self.amplitude * (1.0 - 1.0 / (1.0 - u)).exp();
        // d/du exp(1 − 1/(1−u)) = −exp(..)/(1−u)², du/dx = 2(x−c)/w²
        let coeff = -v / ((1.0 - u) * (1.0 - u)) * 2.0 / (self.width * self.width);
        for ((g, xi), ci) in out.iter_mut().zip(x).zip(&self.center) {
            *g = coeff * (xi - ci);
        }
    }

    fn support(&self) -> Support {
        Support::Ball {
            radius: norm(&self.center) + self.width,
        }
    }
}

/// Radial polynomial bump `A·(1 − |x|²/R²)^k` on `|x| < R`.
#[derive(Clone, Debug)]
pub struct RadialBump {
    pub dim: usize,
    pub radius: f64,
    pub power: i32,
    pub amplitude: f64,
}

impl RadialBump {
    /// Lebesgue integral over ℝᵈ for even `d = 2n`:
    /// `A·|S^{d−1}|·R^d·B(d/2, k+1)/2`.
    pub fn lebesgue_integral(&self) -> f64 {
        let n = (self.dim / 2) as i32;
        let k = self.power;
        // |S^{2n−1}| = 2πⁿ/(n−1)!, B(n, k+1) = (n−1)!·k!/(n+k)!
        // product/2 = πⁿ·k!/(n+k)!
        let mut ratio = 1.0;
        for m in (k + 1)..=(n + k) {
            ratio /= m as f64;
        }
        self.amplitude * core::f64::consts::PI.powi(n) * self.radius.powi(self.dim as i32) * ratio
    }
}

impl ScalarField for RadialBump {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _t: f64, x: &[f64]) -> f64 {
        let u = x.iter().map(|c| c * c).sum::<f64>() / (self.radius * self.radius);
        if u >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - u).powi(self.power)
        }
    }

    fn support(&self) -> Support {
        Support::Ball {
            radius: self.radius,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl ScalarField for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, _t: f64, x: &[f64]) -> f64 {
            0.5 * (x[0] * x[0] + x[1] * x[1])
        }
    }

    struct Coordinate(usize);
    impl ScalarField for Coordinate {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, _t: f64, x: &[f64]) -> f64 {
            x[self.0]
        }
    }

    struct Constant;
    impl ScalarField for Constant {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, _t: f64, _x: &[f64]) -> f64 {
            3.5
        }
    }

    #[test]
    fn oscillator_field_points_clockwise() {
        let v = hamiltonian_vector_field(&Oscillator, 0.0, &[1.0, 0.0]).unwrap();
        assert!((v[0] - 0.0).abs() < 1e-9 && (v[1] + 1.0).abs() < 1e-9);
        let zero = hamiltonian_vector_field(&Constant, 0.0, &[0.3, -0.2]).unwrap();
        assert!(zero.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn canonical_bracket_is_one() {
        let b = poisson_bracket(&Coordinate(0), &Coordinate(1), 0.0, &[0.2, 0.7]).unwrap();
        assert!((b - 1.0).abs() < 1e-9);
        let self_bracket = poisson_bracket(&Oscillator, &Oscillator, 0.0, &[0.4, -1.3]).unwrap();
        assert!(self_bracket.abs() < 1e-9);
    }

    #[test]
    fn bump_gradient_matches_differences() {
        let b = SmoothBump {
            center: vec![0.1, -0.2, 0.05, 0.0],
            width: 0.6,
            amplitude: 1.7,
        };
        let x = [0.2, 0.0, -0.1, 0.15];
        let mut analytic = [0.0; 4];
        let mut numeric = [0.0; 4];
        b.gradient(0.0, &x, &mut analytic);
        central_gradient(|y| b.value(0.0, y), &x, 1e-6, &mut numeric);
        for (a, n) in analytic.iter().zip(&numeric) {
            assert!((a - n).abs() < 1e-8);
        }
    }

    #[test]
    fn radial_bump_integral_formula() {
        // d = 2, k = 1: ∫(1 − r²/R²) = 2π∫(r − r³/R²)dr = πR²/2
        let b = RadialBump {
            dim: 2,
            radius: 1.5,
            power: 1,
            amplitude: 1.0,
        };
        let expected = core::f64::consts::PI * 1.5 * 1.5 / 2.0;
        assert!((b.lebesgue_integral() - expected).abs() < 1e-14);
    }
}

//! Classical fourth-order Runge–Kutta integration of time-dependent fields.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use super::field::{central_jacobian, HamiltonianFlowField, ScalarField, VectorField, H_X};
use crate::error::{Error, Result};
use crate::linalg::{norm, Mat};
use crate::symplin::symplectic_residual;

/// Default number of RK4 steps per unit time.
pub const DEFAULT_STEPS: usize = 200;

/// Symplecticity / reversibility tolerance for numerically integrated flows.
pub const TOL_FLOW: f64 = 1e-5;

/// Reusable stage buffers for [`rk4`].
pub struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }
}

/// Integrates `ẋ = V(t, x)` from `t0` to `t1` in `steps` uniform steps,
/// in place. `observe` sees every accepted state and may abort by
/// returning an error.
pub fn rk4_observed<V: VectorField + ?Sized>(
    field: &V,
    x: &mut [f64],
    t0: f64,
    t1: f64,
    steps: usize,
    ws: &mut Rk4Workspace,
    mut observe: impl FnMut(f64, &[f64]) -> Result<()>,
) -> Result<()> {
    let steps = steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let d = x.len();
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        field.velocity(t, x, &mut ws.k1);
        for i in 0..d {
            ws.tmp[i] = x[i] + 0.5 * h * ws.k1[i];
        }
        field.velocity(t + 0.5 * h, &ws.tmp, &mut ws.k2);
        for i in 0..d {
            ws.tmp[i] = x[i] + 0.5 * h * ws.k2[i];
        }
        field.velocity(t + 0.5 * h, &ws.tmp, &mut ws.k3);
        for i in 0..d {
            ws.tmp[i] = x[i] + h * ws.k3[i];
        }
        field.velocity(t + h, &ws.tmp, &mut ws.k4);
        for i in 0..d {
            x[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
        }
        observe(t + h, x)?;
    }
    Ok(())
}

pub fn rk4<V: VectorField + ?Sized>(
    field: &V,
    x: &mut [f64],
    t0: f64,
    t1: f64,
    steps: usize,
    ws: &mut Rk4Workspace,
) {
    let _ = rk4_observed(field, x, t0, t1, steps, ws, |_, _| Ok(()));
}

/// Flows `x0` along `X_H` from `t0` to `t1`. With `domain = Some(r)` the
/// trajectory must stay inside the closed ball of radius `r`.
pub fn flow<H: ScalarField + ?Sized>(
    h: &H,
    x0: &[f64],
    t0: f64,
    t1: f64,
    steps: usize,
    domain: Option<f64>,
) -> Result<Vec<f64>> {
    let field = HamiltonianFlowField(h);
    let mut x = x0.to_vec();
    let mut ws = Rk4Workspace::new(x0.len());
    rk4_observed(&field, &mut x, t0, t1, steps, &mut ws, |t, y| {
        if y.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("flow"));
        }
        match domain {
            Some(r) if norm(y) > r => Err(Error::DomainEscape { time: t }),
            _ => Ok(()),
        }
    })?;
    Ok(x)
}

/// The time-`t0 → t1` map of a Hamiltonian flow, evaluated pointwise.
pub struct FlowMap<'a, H: ?Sized> {
    pub hamiltonian: &'a H,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl<'a, H: ScalarField + ?Sized> FlowMap<'a, H> {
    pub fn new(hamiltonian: &'a H, t0: f64, t1: f64) -> Self {
        let steps = ((t1 - t0).abs() * DEFAULT_STEPS as f64).ceil().max(1.0) as usize;
        Self {
            hamiltonian,
            t0,
            t1,
            steps,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        flow(self.hamiltonian, x, self.t0, self.t1, self.steps, None)
    }

    /// Inverse map by integrating backwards from `t1` to `t0`.
    pub fn invert(&self, y: &[f64]) -> Result<Vec<f64>> {
        flow(self.hamiltonian, y, self.t1, self.t0, self.steps, None)
    }

    /// Finite-difference Jacobian at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Result<Mat> {
        central_jacobian(|y| self.apply(y), x, H_X)
    }

    /// `‖DφᵀJDφ − J‖_max` at `x`.
    pub fn symplectic_residual(&self, x: &[f64]) -> Result<f64> {
        symplectic_residual(&self.jacobian(x)?)
    }

    /// `‖φ⁻¹(φ(x)) − x‖`.
    pub fn reversibility_residual(&self, x: &[f64]) -> Result<f64> {
        let back = self.invert(&self.apply(x)?)?;
        Ok(crate::linalg::distance(&back, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamflow::field::QuadraticField;
    use core::f64::consts::PI;

    fn oscillator() -> QuadraticField {
        QuadraticField {
            q: Mat::identity(2).scaled(0.5),
        }
    }

    #[test]
    fn quarter_turn_is_clockwise() {
        let h = oscillator();
        let x = flow(&h, &[1.0, 0.0], 0.0, PI / 2.0, 200, None).unwrap();
        assert!(x[0].abs() < 1e-6 && (x[1] + 1.0).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn energy_is_conserved() {
        let h = QuadraticField {
            q: Mat::from_row_major(2, &[1.0, 0.3, 0.3, 0.5]),
        };
        let x0 = [0.4, -0.9];
        let x1 = flow(&h, &x0, 0.0, 1.0, 200, None).unwrap();
        assert!((h.value(0.0, &x1) - h.value(0.0, &x0)).abs() < 1e-8);
    }

    #[test]
    fn domain_escape_reports_time() {
        let h = oscillator();
        let err = flow(&h, &[1.0, 0.0], 0.0, 1.0, 100, Some(0.5)).unwrap_err();
        assert!(matches!(err, Error::DomainEscape { time } if time > 0.0));
    }

    #[test]
    fn flow_map_is_symplectic_and_reversible() {
        let h = QuadraticField {
            q: Mat::from_row_major(2, &[0.8, -0.2, -0.2, 1.1]),
        };
        let map = FlowMap::new(&h, 0.0, 1.0);
        assert!(map.symplectic_residual(&[0.3, 0.2]).unwrap() < TOL_FLOW);
        assert!(map.reversibility_residual(&[0.3, 0.2]).unwrap() < TOL_FLOW);
    }
}

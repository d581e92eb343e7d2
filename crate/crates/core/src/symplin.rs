//! Linear symplectic algebra on ℝ²ⁿ and the Maslov index of matrix loops.
//!
//! Coordinates are ordered `(q₁…qₙ, p₁…pₙ)`, `ω₀ = Σ dqⱼ∧dpⱼ` and
//! `J = [[0, −I], [I, 0]]`. Under `zⱼ = qⱼ + i·pⱼ`, multiplication by `i`
//! is `J`, and a matrix commuting with `J` has the block form
//! `[[A, −B], [B, A]]` with complex counterpart `A + iB`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{complex_determinant, Mat};

/// Default tolerance for symplecticity of analytically constructed matrices.
pub const TOL_SP: f64 = 1e-9;

/// Standard complex structure `J` on ℝ²ⁿ.
pub fn standard_j(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n);
    for k in 0..n {
        j[(k, n + k)] = -1.0;
        j[(n + k, k)] = 1.0;
    }
    j
}

/// `‖MᵀJM − J‖_max`.
pub fn symplectic_residual(m: &Mat) -> Result<f64> {
    let dim = m.dim();
    if !dim.is_multiple_of(2) {
        return Err(Error::Dimension(format!("odd matrix size {dim}")));
    }
    let j = standard_j(dim / 2);
    let mtjm = &(&m.transpose() * &j) * m;
    Ok(mtjm.max_abs_diff(&j))
}

pub fn is_symplectic(m: &Mat, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(m)? <= tol)
}

/// Symplectic inverse `M⁻¹ = −J·Mᵀ·J`, exact for symplectic `M`.
pub fn symplectic_inverse(m: &Mat) -> Mat {
    let j = standard_j(m.dim() / 2);
    (&(&j * &m.transpose()) * &j).scaled(-1.0)
}

/// `‖MJ − JM‖_max`.
pub fn complex_linearity_residual(m: &Mat) -> f64 {
    let j = standard_j(m.dim() / 2);
    (m * &j).max_abs_diff(&(&j * m))
}

/// An element of Sp(2n), checked on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix(Mat);

impl SymplecticMatrix {
    pub fn new(m: Mat, tol: f64) -> Result<Self> {
        let residual = symplectic_residual(&m)?;
        if residual > tol {
            return Err(Error::NotSymplectic { residual });
        }
        if m.determinant() <= 0.0 {
            return Err(Error::NotSymplectic { residual });
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: Mat) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(2 * n))
    }

    pub fn half_dim(&self) -> usize {
        self.0.dim() / 2
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }
}

/// Integer rotation weights, in full turns per unit time, one per complex plane.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn new(weights: impl Into<Vec<i64>>) -> Self {
        Self(weights.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.sum() == 0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }
}

/// `blockdiag(R(2πa₁t), …, R(2πaₙt))` in the `(q, p)` ordering.
pub fn rotation_matrix(weights: &WeightVector, t: f64) -> Mat {
    let n = weights.len();
    let mut m = Mat::zeros(2 * n);
    for (k, &a) in weights.as_slice().iter().enumerate() {
        let theta = 2.0 * PI * a as f64 * t;
        let (s, c) = theta.sin_cos();
        m[(k, k)] = c;
        m[(k, n + k)] = -s;
        m[(n + k, k)] = s;
        m[(n + k, n + k)] = c;
    }
    m
}

/// A loop of symplectic matrices sampled on the uniform grid `t_k = k/K`.
#[derive(Clone, Debug)]
pub struct MatrixLoop {
    half_dim: usize,
    samples: Vec<SymplecticMatrix>,
    closed_form: Option<WeightVector>,
}

impl MatrixLoop {
    /// Wraps samples taken at `t_k = k / (samples.len() − 1)`, checking that
    /// every sample is symplectic and both endpoints are the identity.
    pub fn from_samples(samples: Vec<Mat>, tol: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a loop needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        let dim = samples[0].dim();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::Dimension(format!("odd matrix size {dim}")));
        }
        let id = Mat::identity(dim);
        let mut checked = Vec::with_capacity(samples.len());
        for m in samples {
            if m.dim() != dim {
                return Err(Error::Dimension(format!(
                    "sample of size {} in a loop of size {dim}",
                    m.dim()
                )));
            }
            checked.push(SymplecticMatrix::new(m, tol)?);
        }
        let residual = checked[0]
            .as_mat()
            .max_abs_diff(&id)
            .max(checked[checked.len() - 1].as_mat().max_abs_diff(&id));
        if residual > tol {
            return Err(Error::NotALoop { residual });
        }
        Ok(Self {
            half_dim: dim / 2,
            samples: checked,
            closed_form: None,
        })
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn samples(&self) -> &[SymplecticMatrix] {
        &self.samples
    }

    /// Number of grid intervals `K`.
    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.intervals() as f64
    }

    pub fn closed_form(&self) -> Option<&WeightVector> {
        self.closed_form.as_ref()
    }

    /// Value at `t`: the closed form when present, otherwise the nearest sample.
    pub fn at(&self, t: f64) -> Mat {
        match &self.closed_form {
            Some(w) => rotation_matrix(w, t),
            None => {
                let k = (t.clamp(0.0, 1.0) * self.intervals() as f64).round() as usize;
                self.samples[k].as_mat().clone()
            }
        }
    }

    /// Resamples a closed-form loop on a finer grid; sampled loops are returned as is.
    pub fn refined(&self, intervals: usize) -> Self {
        match &self.closed_form {
            Some(w) => rotation_loop(w, intervals),
            None => self.clone(),
        }
    }

    /// Pointwise product `t ↦ self(t)·other(t)` on a shared grid.
    pub fn pointwise_product(&self, other: &MatrixLoop) -> Result<Self> {
        if self.samples.len() != other.samples.len() || self.half_dim != other.half_dim {
            return Err(Error::Dimension("loops on different grids".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| SymplecticMatrix::new_unchecked(a.as_mat() * b.as_mat()))
            .collect();
        let closed_form = match (&self.closed_form, &other.closed_form) {
            (Some(a), Some(b)) => Some(WeightVector(
                a.as_slice()
                    .iter()
                    .zip(b.as_slice())
                    .map(|(x, y)| x + y)
                    .collect(),
            )),
            _ => None,
        };
        Ok(Self {
            half_dim: self.half_dim,
            samples,
            closed_form,
        })
    }
}

/// Rotation loop `t ↦ blockdiag(R(2πaⱼt))` sampled with `intervals` steps.
pub fn rotation_loop(weights: &WeightVector, intervals: usize) -> MatrixLoop {
    let intervals = intervals.max(2);
    let samples = (0..=intervals)
        .map(|k| {
            SymplecticMatrix::new_unchecked(rotation_matrix(weights, k as f64 / intervals as f64))
        })
        .collect();
    MatrixLoop {
        half_dim: weights.len(),
        samples,
        closed_form: Some(weights.clone()),
    }
}

/// Constant identity loop.
pub fn identity_loop(n: usize, intervals: usize) -> MatrixLoop {
    rotation_loop(&WeightVector(alloc::vec![0; n]), intervals)
}

/// Orthogonal polar factor `U = M·(MᵀM)^{−1/2}`.
///
/// Computed by the Newton iteration `U ← (U + U⁻ᵀ)/2`, which converges
/// quadratically to the polar factor of any nonsingular matrix.
pub fn unitary_part(m: &SymplecticMatrix) -> Result<SymplecticMatrix> {
    let mut u = m.as_mat().clone();
    for _ in 0..100 {
        let inv_t = u.inverse().ok_or(Error::Decomposition)?.transpose();
        let next = u.add(&inv_t).scaled(0.5);
        let delta = next.max_abs_diff(&u);
        u = next;
        if delta <= 1e-15 * u.max_abs().max(1.0) {
            break;
        }
    }
    if !u.max_abs().is_finite() {
        return Err(Error::Decomposition);
    }
    Ok(SymplecticMatrix::new_unchecked(u))
}

/// `arg det(A + iB)` for `U = [[A, −B], [B, A]]`, in `(−π, π]`.
pub fn complex_determinant_phase(u: &SymplecticMatrix) -> Result<f64> {
    let m = u.as_mat();
    let residual = complex_linearity_residual(m);
    if residual > TOL_SP {
        return Err(Error::Structure { residual });
    }
    let n = u.half_dim();
    let a = m.block(0, 0, n);
    let b = m.block(n, 0, n);
    let det = complex_determinant(&a, &b);
    let modulus = det.norm();
    if (modulus - 1.0).abs() > 1e-6 {
        return Err(Error::Structure {
            residual: (modulus - 1.0).abs(),
        });
    }
    let phase = det.arg();
    // atan2 returns [−π, π]; fold −π onto π.
    Ok(if phase <= -PI {
        phase + 2.0 * PI
    } else {
        phase
    })
}

/// Winding data behind a Maslov index.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MaslovReport {
    pub index: i64,
    /// Unwrapped phase increment divided by 2π, before rounding.
    pub winding: f64,
    /// `|winding − index|`.
    pub residual: f64,
    /// Largest phase step between consecutive samples.
    pub max_step: f64,
}

/// Phase of `det_ℂ` of the unitary part at every sample, unwrapped.
pub fn maslov_report(lp: &MatrixLoop) -> Result<MaslovReport> {
    let id = Mat::identity(2 * lp.half_dim());
    let samples = lp.samples();
    let end_residual = samples[0]
        .as_mat()
        .max_abs_diff(&id)
        .max(samples[samples.len() - 1].as_mat().max_abs_diff(&id));
    if end_residual > TOL_SP {
        return Err(Error::NotALoop {
            residual: end_residual,
        });
    }
    let phases = samples
        .iter()
        .map(|m| unitary_part(m).and_then(|u| complex_determinant_phase(&u)))
        .collect::<Result<Vec<f64>>>()?;

    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for pair in phases.windows(2) {
        let mut step = pair[1] - pair[0];
        while step > PI {
            step -= 2.0 * PI;
        }
        while step <= -PI {
            step += 2.0 * PI;
        }
        if step.abs() >= PI / 2.0 {
            return Err(Error::InsufficientSampling(format!(
                "phase jump {step:.3} between consecutive samples; refine the grid"
            )));
        }
        max_step = max_step.max(step.abs());
        total += step;
    }
    let winding = total / (2.0 * PI);
    let index = winding.round() as i64;
    let residual = (winding - index as f64).abs();
    if residual >= 0.1 {
        return Err(Error::InsufficientSampling(format!(
            "winding {winding:.4} is {residual:.3} away from an integer"
        )));
    }
    Ok(MaslovReport {
        index,
        winding,
        residual,
        max_step,
    })
}

pub fn maslov_index(lp: &MatrixLoop) -> Result<i64> {
    maslov_report(lp).map(|r| r.index)
}

/// Like [`maslov_index`], but resamples closed-form loops until the phase
/// steps are small enough.
pub fn maslov_index_refining(lp: &MatrixLoop) -> Result<MaslovReport> {
    let mut current = lp.clone();
    for _ in 0..8 {
        match maslov_report(&current) {
            Err(Error::InsufficientSampling(_)) if current.closed_form().is_some() => {
                current = current.refined(current.intervals() * 4);
            }
            other => return other,
        }
    }
    maslov_report(&current)
}

pub fn is_contractible(lp: &MatrixLoop) -> Result<bool> {
    Ok(maslov_index(lp)? == 0)
}

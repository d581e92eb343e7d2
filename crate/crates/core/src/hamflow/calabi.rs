//! Space-time integrals of Hamiltonians: the Calabi invariant and the
//! oscillation (Hofer) length.

use alloc::vec::Vec;

use super::field::ScalarField;
use super::quadrature::{pairwise_sum, BallIntegral, BallQuadrature, Estimate};

/// Default number of midpoint nodes in `t`.
pub const DEFAULT_T_NODES: usize = 16;

pub fn midpoint_times(nodes: usize) -> Vec<f64> {
    let m = nodes.max(1);
    (0..m).map(|k| (k as f64 + 0.5) / m as f64).collect()
}

/// `∫_B H_t ω₀ⁿ` at a fixed time.
pub fn integrate<H: ScalarField + ?Sized>(h: &H, t: f64, quad: &BallQuadrature) -> BallIntegral {
    let frozen = h.at_time(t);
    quad.integrate(|x| frozen(x))
}

/// Calabi estimate with the per-time integrals it was assembled from.
#[derive(Clone, Debug, PartialEq)]
pub struct CalabiEstimate {
    pub estimate: Estimate,
    pub per_time: Vec<(f64, BallIntegral)>,
}

/// `∫₀¹ ∫_B H_t ω₀ⁿ dt` by the composite midpoint rule in `t`.
///
/// The error bound is the time-average of the spatial refinement bounds.
pub fn calabi<H: ScalarField + ?Sized>(
    h: &H,
    quad: &BallQuadrature,
    t_nodes: usize,
) -> CalabiEstimate {
    let times = midpoint_times(t_nodes);
    let per_time: Vec<(f64, BallIntegral)> =
        times.iter().map(|&t| (t, integrate(h, t, quad))).collect();
    let w = 1.0 / times.len() as f64;
    let values: Vec<f64> = per_time.iter().map(|(_, r)| w * r.estimate.value).collect();
    let errors: Vec<f64> = per_time.iter().map(|(_, r)| w * r.estimate.error).collect();
    CalabiEstimate {
        estimate: Estimate::new(pairwise_sum(&values), pairwise_sum(&errors)),
        per_time,
    }
}

/// `∫₀¹ (max H_t − min H_t) dt` over a finite sample of points.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HoferEstimate {
    pub length: f64,
    pub samples: usize,
    pub t_nodes: usize,
}

pub fn hofer_length_estimate<H: ScalarField + ?Sized>(
    h: &H,
    points: &[Vec<f64>],
    t_nodes: usize,
) -> HoferEstimate {
    let times = midpoint_times(t_nodes);
    let osc: Vec<f64> = times
        .iter()
        .map(|&t| {
            let frozen = h.at_time(t);
            let (lo, hi) = points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    let v = frozen(x);
                    (lo.min(v), hi.max(v))
                });
            if points.is_empty() {
                0.0
            } else {
                hi - lo
            }
        })
        .collect();
    HoferEstimate {
        length: pairwise_sum(&osc) / times.len() as f64,
        samples: points.len(),
        t_nodes: times.len(),
    }
}

//! Numerical construction of compactly supported Hamiltonian loops with
//! nonzero Calabi invariant.
//!
//! The crate is `no_std` with `alloc`. Modules, bottom-up:
//!
//! - [`linalg`]: small dense matrices.
//! - [`symplin`]: Sp(2n), rotation loops and the Maslov index.
//! - [`nullhomotopy`]: explicit based null-homotopies and their generating
//!   quadratic Hamiltonians.
//! - [`hamflow`]: Hamiltonian flows, brackets, quadrature, Calabi and Hofer.
//! - [`cutoff`]: the cut-off loop that agrees with a linear loop near the
//!   origin and has arbitrarily small Calabi invariant.
//! - [`manifolds`]: products of round spheres, their rotation actions and
//!   equivariant Darboux charts.
//! - [`theorem`]: the end-to-end construction on sphere products.
//!
//! Conventions: coordinates `(q₁…qₙ, p₁…pₙ)`, `ω₀ = Σ dqⱼ∧dpⱼ`,
//! `J = [[0, −I], [I, 0]]`, `X_H = −J∇H`, `{F, G} = dF(X_G)`, and volume
//! integrals are taken against `ωⁿ` (that is, `n!` times Lebesgue measure).
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cutoff;
pub mod error;
pub mod hamflow;
pub mod linalg;
pub mod manifolds;
pub mod nullhomotopy;
pub mod symplin;
pub mod theorem;

pub use error::{Error, Result};

//! Time-dependent Hamiltonian dynamics on ℝ²ⁿ: vector fields and brackets,
//! RK4 flows, recovery of generating Hamiltonians, quadrature, and the
//! Calabi and Hofer functionals.

mod calabi;
mod field;
mod flow;
mod quadrature;
mod recover;

pub use calabi::{
    calabi, hofer_length_estimate, integrate, midpoint_times, CalabiEstimate, HoferEstimate,
    DEFAULT_T_NODES,
};
pub use field::{
    apply_minus_j, central_gradient, central_jacobian, hamiltonian_vector_field, poisson_bracket,
    HamiltonianFlowField, QuadraticField, RadialBump, ScalarField, SmoothBump, Support,
    VectorField, H_X,
};
pub use flow::{flow, rk4, rk4_observed, FlowMap, Rk4Workspace, DEFAULT_STEPS, TOL_FLOW};
pub use quadrature::{
    ball_symplectic_volume, factorial, gauss_legendre_unit, pairwise_sum, BallIntegral,
    BallQuadrature, Estimate, QuadratureRule,
};
pub use recover::{
    closedness_residual, omega0, recover_checked, recover_generating_hamiltonian, FrozenGenerator,
    GeneratingHamiltonian, LoopFamily, TimeSlice, VelocitySampler, H_T, SEGMENT_ORDER,
};

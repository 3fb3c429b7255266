//! Finsler metrics in coordinate charts: evaluation, fundamental tensor,
//! Legendre transform, geodesic spray and the symplectic form `ω_F`.

mod fields;
mod metric;
mod ops;
pub mod zoo;

pub use fields::{OneForm, Potential, VectorField};
pub use metric::{
    dual_legendre, dual_legendre_t, CoMetric, Domain, Energy, Hamiltonian, MetricFamily, MetricSpec, PhasePoint,
    RiemannianChart, DUAL_MAX_ITER, DUAL_TOL,
};
pub use ops::{
    dual_metric, fundamental_tensor, hamiltonian_flow_jacobian, legendre, legendre_inverse, omega_matrix, spray,
    spray_coefficients, spray_flow_jacobian, validate, SprayField,
};

#[cfg(test)]
mod tests;

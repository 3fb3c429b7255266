//! Jacobi curves of geodesic flows: transport, flag curvature and the
//! contact splitting.

mod contact;
mod curvature;
mod transport;

pub use contact::{contact_reduce, ContactSplit};
pub use curvature::{canonicalize_flag, christoffel, flag_curvature, flag_curvature_at, flag_curvature_with, riemann_oracle, riemann_oracle_for};
pub use transport::{
    jacobi_frame, transport, transport_with, JacobiCurveSample, OrbitData, OrbitNode, Route, TransportOptions,
    DEFAULT_STEPS_PER_UNIT, STENCIL_BASE_H,
};

#[cfg(test)]
mod tests;

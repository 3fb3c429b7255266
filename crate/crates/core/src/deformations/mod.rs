//! Deformations that preserve geodesics or curvature: adding a closed
//! one-form, and Katok perturbations by a Killing field.

mod katok;
mod projective;

pub use katok::{
    katok_curvature_check, katok_flags, katok_killing_field, katok_metric, katok_zermelo, KillingField,
};
pub use projective::{
    cosphere_residual, projective_curvature_rhs, projective_deform, psi_map, psi_spray_residual, trace_deviation,
    ClosedOneForm, ProjectiveRhs,
};

#[cfg(test)]
mod tests;

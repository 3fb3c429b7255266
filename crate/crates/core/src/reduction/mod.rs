//! Symplectic reduction of fanning curves by coisotropic subspaces, the
//! O'Neill endomorphism and the curvature of submersions.

mod linear;
mod split;
mod submersion;

pub use linear::{symplectic_complement, CoisotropicSetup};
pub use split::{
    hv_split, hv_split_with, oneill_endomorphism, oneill_formula, reduce_curve, HVSplit, OneillEndomorphism,
    OneillSides, ReducedCurve, SplitReference,
};
pub use submersion::{
    horizontal_tangent, submersion_curvature, Submersion, SubmersionCurvature, SubmersionMap, TangentMethod,
};

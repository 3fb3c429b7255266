//! Flag curvature and Jacobi-curve invariants of Finsler metrics.
//!
//! The crate builds Jacobi curves of geodesic flows by linearized transport
//! and reads curvature off the invariants of fanning curves in the
//! Lagrangian Grassmannian.

// `!(x < tol)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deformations;
pub mod error;
pub mod fanning;
pub mod finsler;
pub mod jacobi;
pub mod numkit;
pub mod reduction;
pub mod samples;
pub mod validation;

pub use error::{GeomError, Result};

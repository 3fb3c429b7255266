//! Numerical substrate: dual numbers, dense linear algebra, Runge–Kutta
//! integration and central-difference stencils.

mod diff;
mod dual3;
mod linalg;
mod ode;
mod real;
mod stencil;

pub use diff::{fiber_gradient_t, fiber_hessian, fiber_hessian_t, gradient, hessian, PhaseField, ScalarField};
pub use dual3::Dual3;
pub use linalg::*;
pub use ode::{rk4_step, rk45, rk_integrate, Rk45Options};
pub use real::{Dual, Real, D1, D2, D3};
pub use stencil::{central_derivative, central_second_derivative, scalar_derivative, Stencil};

//! Derivatives of generic scalar fields via nested dual numbers.

use nalgebra::DMatrix;

use super::{Dual, Real};
use crate::error::{GeomError, Result};

/// A scalar field on ℝᵐ that can be evaluated over any [`Real`].
pub trait ScalarField {
    fn eval<T: Real>(&self, x: &[T]) -> T;
}

/// A scalar field on ℝⁿ×ℝⁿ, e.g. a Lagrangian `(x, y) ↦ ½F(x,y)²`.
pub trait PhaseField {
    fn eval<T: Real>(&self, x: &[T], y: &[T]) -> T;
}

fn lift<T: Real>(x: &[T]) -> Vec<Dual<T>> {
    x.iter().map(|&v| Dual::constant(v)).collect()
}

fn lift2<T: Real>(x: &[T]) -> Vec<Dual<Dual<T>>> {
    x.iter().map(|&v| Dual::constant(Dual::constant(v))).collect()
}

/// Value and gradient of `f` at `x`.
pub fn gradient<T: Real, F: ScalarField + ?Sized>(f: &F, x: &[T]) -> (T, Vec<T>) {
    let mut value = T::zero();
    let mut g = Vec::with_capacity(x.len());
    let mut xd = lift(x);
    for i in 0..x.len() {
        xd[i].d = T::one();
        let r = f.eval(&xd);
        xd[i].d = T::zero();
        value = r.v;
        g.push(r.d);
    }
    if x.is_empty() {
        value = f.eval(x);
    }
    (value, g)
}

/// Hessian of `f` at `x` as a row-major `m×m` array.
pub fn hessian<T: Real, F: ScalarField + ?Sized>(f: &F, x: &[T]) -> Vec<T> {
    let m = x.len();
    let mut h = vec![T::zero(); m * m];
    let mut xd = lift2(x);
    for i in 0..m {
        for j in i..m {
            xd[i].v.d = T::one();
            xd[j].d.v = T::one();
            let r = f.eval(&xd);
            xd[i].v.d = T::zero();
            xd[j].d.v = T::zero();
            h[i * m + j] = r.d.d;
            h[j * m + i] = r.d.d;
        }
    }
    h
}

/// Fiber gradient `∂f/∂y` over any `T`.
pub fn fiber_gradient_t<T: Real, F: PhaseField + ?Sized>(f: &F, x: &[T], y: &[T]) -> Vec<T> {
    let xd = lift(x);
    let mut yd = lift(y);
    (0..y.len())
        .map(|i| {
            yd[i].d = T::one();
            let r = f.eval(&xd, &yd);
            yd[i].d = T::zero();
            r.d
        })
        .collect()
}

/// Fiber Hessian `∂²f/∂y∂y` over any `T`, row-major `n×n`.
pub fn fiber_hessian_t<T: Real, F: PhaseField + ?Sized>(f: &F, x: &[T], y: &[T]) -> Vec<T> {
    let n = y.len();
    let xd = lift2(x);
    let mut yd = lift2(y);
    let mut h = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            yd[i].v.d = T::one();
            yd[j].d.v = T::one();
            let r = f.eval(&xd, &yd);
            yd[i].v.d = T::zero();
            yd[j].d.v = T::zero();
            h[i * n + j] = r.d.d;
            h[j * n + i] = r.d.d;
        }
    }
    h
}

/// Matrix of second fiber derivatives of `f` at `(x, y)`.
pub fn fiber_hessian<F: PhaseField + ?Sized>(f: &F, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    if x.len() != y.len() {
        return Err(GeomError::DimensionMismatch(format!("x has {} entries, y has {}", x.len(), y.len())));
    }
    let n = y.len();
    let h = fiber_hessian_t(f, x, y);
    if h.iter().any(|v| !v.is_finite()) {
        return Err(GeomError::NonFiniteValue("fiber Hessian".into()));
    }
    let m = DMatrix::from_row_slice(n, n, &h);
    Ok((&m + m.transpose()) * 0.5)
}

//! Closed-form scalar, covector and vector fields used to build metrics.

use crate::error::{GeomError, Result};
use crate::numkit::Real;

/// A function `h` on the chart, with its gradient in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// `h(x) = c·x`.
    Linear(Vec<f64>),
    /// `h(x) = s·2xᵢ/(1+|x|²)`: the `i`-th ambient coordinate of the unit
    /// sphere pulled back by the stereographic chart, scaled by `s`.
    StereoCoordinate { index: usize, scale: f64 },
}

impl Potential {
    pub fn value<T: Real>(&self, x: &[T]) -> T {
        match self {
            Potential::Linear(c) => x.iter().zip(c).fold(T::zero(), |acc, (xi, ci)| acc + *xi * *ci),
            Potential::StereoCoordinate { index, scale } => {
                let r2 = sum_sq(x);
                x[*index] * (2.0 * scale) / (r2 + 1.0)
            }
        }
    }

    pub fn gradient<T: Real>(&self, x: &[T]) -> Vec<T> {
        match self {
            Potential::Linear(c) => c.iter().map(|&v| T::cst(v)).collect(),
            Potential::StereoCoordinate { index, scale } => {
                let i = *index;
                let q = sum_sq(x) + 1.0;
                let q2 = q * q;
                (0..x.len())
                    .map(|j| {
                        let delta = if i == j { q } else { T::zero() };
                        (delta - x[i] * x[j] * 2.0) * (2.0 * scale) / q2
                    })
                    .collect()
            }
        }
    }
}

/// A one-form on the chart.
#[derive(Clone, Debug, PartialEq)]
pub enum OneForm {
    Constant(Vec<f64>),
    /// `θ = dh`.
    Exact(Potential),
}

impl OneForm {
    pub fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        match self {
            OneForm::Constant(c) => c.iter().map(|&v| T::cst(v)).collect(),
            OneForm::Exact(p) => p.gradient(x),
        }
    }

    pub fn apply<T: Real>(&self, x: &[T], y: &[T]) -> T {
        let b = self.eval(x);
        b.iter().zip(y).fold(T::zero(), |acc, (bi, yi)| acc + *bi * *yi)
    }

    /// A primitive, when one is available in closed form.
    pub fn potential(&self) -> Option<Potential> {
        match self {
            OneForm::Constant(c) => Some(Potential::Linear(c.clone())),
            OneForm::Exact(p) => Some(p.clone()),
        }
    }

    /// Fails unless the form is defined on an `n`-dimensional chart.
    pub fn check_dim(&self, n: usize) -> Result<()> {
        let ok = match self {
            OneForm::Constant(c) | OneForm::Exact(Potential::Linear(c)) => c.len() == n,
            OneForm::Exact(Potential::StereoCoordinate { index, .. }) => *index < n,
        };
        if ok {
            Ok(())
        } else {
            Err(GeomError::DimensionMismatch(format!("one-form {self:?} on a chart of dimension {n}")))
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            OneForm::Constant(c) => c.iter().all(|v| *v == 0.0),
            OneForm::Exact(Potential::Linear(c)) => c.iter().all(|v| *v == 0.0),
            OneForm::Exact(Potential::StereoCoordinate { scale, .. }) => *scale == 0.0,
        }
    }
}

/// A vector field on the chart.
#[derive(Clone, Debug, PartialEq)]
pub enum VectorField {
    /// `s·(−x₂, x₁, 0, …)`, the rotation generator in the first two
    /// coordinates.
    Rotation { scale: f64 },
    Constant(Vec<f64>),
}

impl VectorField {
    pub fn eval<T: Real>(&self, x: &[T]) -> Vec<T> {
        match self {
            VectorField::Rotation { scale } => {
                let mut v = vec![T::zero(); x.len()];
                if x.len() >= 2 {
                    v[0] = -x[1] * *scale;
                    v[1] = x[0] * *scale;
                }
                v
            }
            VectorField::Constant(c) => c.iter().map(|&v| T::cst(v)).collect(),
        }
    }
}

pub(crate) fn sum_sq<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, v| acc + *v * *v)
}

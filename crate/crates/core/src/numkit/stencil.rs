//! Symmetric central-difference stencils for t-derivatives of matrix curves.

use super::Mat;
use crate::error::{GeomError, Result};

/// Nodes `t + k·h`, `k = -order/2 ..= order/2`, for an order-4 or order-6
/// central difference.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub t: f64,
    pub h: f64,
    pub order: usize,
    pub nodes: Vec<f64>,
}

const D1_4: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D1_6: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
const D2_4: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_6: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];

impl Stencil {
    pub fn new(t: f64, h: f64, order: usize) -> Result<Self> {
        if order != 4 && order != 6 {
            return Err(GeomError::DimensionMismatch(format!("stencil order {order} not in {{4, 6}}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(GeomError::NonFiniteValue(format!("stencil half-width {h}")));
        }
        let half = (order / 2) as i64;
        let nodes = (-half..=half).map(|k| t + k as f64 * h).collect();
        Ok(Stencil { t, h, order, nodes })
    }

    /// The default step `1e-3 · max(1, |t|)`.
    pub fn default_h(t: f64) -> f64 {
        1e-3 * t.abs().max(1.0)
    }

    /// Default step rounded to a positive multiple of `grid`, so every node
    /// lands on a grid point of a fixed-step integrator.
    pub fn snapped_h(t: f64, base: f64, grid: f64) -> f64 {
        let h = base * t.abs().max(1.0);
        (h / grid).round().max(1.0) * grid
    }

    fn weights(&self, second: bool) -> (&'static [f64], f64) {
        match (self.order, second) {
            (4, false) => (&D1_4, 12.0 * self.h),
            (6, false) => (&D1_6, 60.0 * self.h),
            (4, true) => (&D2_4, 12.0 * self.h * self.h),
            (_, _) => (&D2_6, 180.0 * self.h * self.h),
        }
    }

    fn apply(&self, samples: &[Mat], second: bool) -> Result<Mat> {
        if samples.len() != self.nodes.len() {
            return Err(GeomError::DimensionMismatch(format!(
                "{} samples for a {}-node stencil",
                samples.len(),
                self.nodes.len()
            )));
        }
        let shape = samples[0].shape();
        if samples.iter().any(|s| s.shape() != shape) {
            return Err(GeomError::DimensionMismatch("stencil samples differ in shape".into()));
        }
        let (w, den) = self.weights(second);
        let mut acc = Mat::zeros(shape.0, shape.1);
        for (wi, s) in w.iter().zip(samples) {
            if *wi != 0.0 {
                acc += s * *wi;
            }
        }
        Ok(acc / den)
    }
}

/// First derivative at `stencil.t` from samples at `stencil.nodes`.
pub fn central_derivative(samples: &[Mat], stencil: &Stencil) -> Result<Mat> {
    stencil.apply(samples, false)
}

/// Second derivative at `stencil.t` from samples at `stencil.nodes`.
pub fn central_second_derivative(samples: &[Mat], stencil: &Stencil) -> Result<Mat> {
    stencil.apply(samples, true)
}

/// Scalar convenience wrapper around [`central_derivative`].
pub fn scalar_derivative(samples: &[f64], stencil: &Stencil, second: bool) -> Result<f64> {
    let m: Vec<Mat> = samples.iter().map(|&v| Mat::from_element(1, 1, v)).collect();
    Ok(stencil.apply(&m, second)?[(0, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(st: &Stencil, f: impl Fn(f64) -> Mat) -> Vec<Mat> {
        st.nodes.iter().map(|&t| f(t)).collect()
    }

    #[test]
    fn constant_samples_give_zero() {
        let st = Stencil::new(0.4, 1e-2, 4).unwrap();
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let d = central_derivative(&sample(&st, |_| m.clone()), &st).unwrap();
        assert_eq!(d, Mat::zeros(2, 2));
    }

    #[test]
    fn linear_curve_is_exact() {
        let m = Mat::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.0, 7.0]);
        for order in [4, 6] {
            let st = Stencil::new(0.0, 0.25, order).unwrap();
            let d = central_derivative(&sample(&st, |t| &m * t), &st).unwrap();
            assert!((d - &m).abs().max() < 1e-14);
        }
    }

    #[test]
    fn sine_derivative_order_four() {
        let st = Stencil::new(0.0, 1e-2, 4).unwrap();
        let id = Mat::identity(2, 2);
        let d = central_derivative(&sample(&st, |t| &id * t.sin()), &st).unwrap();
        assert!((d - id).abs().max() < 1e-8);
    }

    #[test]
    fn polynomials_reproduced_up_to_order() {
        // Order-4 first derivative is exact on quartics, order 6 on sextics.
        for (order, deg) in [(4, 4), (6, 6)] {
            let st = Stencil::new(0.3, 0.1, order).unwrap();
            let f = |t: f64| Mat::from_element(1, 1, t.powi(deg));
            let d = central_derivative(&sample(&st, f), &st).unwrap()[(0, 0)];
            let exact = deg as f64 * 0.3_f64.powi(deg - 1);
            assert!((d - exact).abs() < 1e-11, "order {order}");
            let d2 = central_second_derivative(&sample(&st, f), &st).unwrap()[(0, 0)];
            let exact2 = (deg * (deg - 1)) as f64 * 0.3_f64.powi(deg - 2);
            assert!((d2 - exact2).abs() < 1e-9, "order {order}");
        }
    }

    #[test]
    fn rejects_wrong_counts_and_orders() {
        assert!(Stencil::new(0.0, 0.1, 5).is_err());
        assert!(Stencil::new(0.0, 0.0, 4).is_err());
        let st = Stencil::new(0.0, 0.1, 4).unwrap();
        let r = central_derivative(&[Mat::zeros(1, 1)], &st);
        assert!(matches!(r, Err(GeomError::DimensionMismatch(_))));
    }

    #[test]
    fn snapped_step_is_grid_multiple() {
        let h = Stencil::snapped_h(1.1, 1e-3, 5e-4);
        assert!((h - 1e-3).abs() < 1e-15);
        assert!((Stencil::snapped_h(0.0, 1e-3, 4e-3) - 4e-3).abs() < 1e-15);
    }
}

use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use super::Real;

/// Third-order jet along a single direction.
///
/// The fields hold actual derivatives (not Taylor coefficients), so
/// `d2` of `t ↦ t²` is `2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual3 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Dual3 {
    pub fn new(value: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Dual3 { value, d1, d2, d3 }
    }

    /// The independent variable itself: `(t, 1, 0, 0)`.
    pub fn variable(t: f64) -> Self {
        Dual3::new(t, 1.0, 0.0, 0.0)
    }

    /// Applies a scalar function given its value and first three derivatives
    /// at `self.value` (Faà di Bruno to order three).
    pub fn compose(self, f0: f64, f1: f64, f2: f64, f3: f64) -> Self {
        let (a, b, c) = (self.d1, self.d2, self.d3);
        Dual3 {
            value: f0,
            d1: f1 * a,
            d2: f2 * a * a + f1 * b,
            d3: f3 * a * a * a + 3.0 * f2 * a * b + f1 * c,
        }
    }
}

impl Add for Dual3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual3::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)
    }
}

impl Sub for Dual3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual3::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2, self.d3 - o.d3)
    }
}

impl Mul for Dual3 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (f, g) = (self, o);
        Dual3 {
            value: f.value * g.value,
            d1: f.d1 * g.value + f.value * g.d1,
            d2: f.d2 * g.value + 2.0 * f.d1 * g.d1 + f.value * g.d2,
            d3: f.d3 * g.value + 3.0 * f.d2 * g.d1 + 3.0 * f.d1 * g.d2 + f.value * g.d3,
        }
    }
}

impl Div for Dual3 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for Dual3 {
    type Output = Self;
    fn neg(self) -> Self {
        Dual3::new(-self.value, -self.d1, -self.d2, -self.d3)
    }
}

impl Add<f64> for Dual3 {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Dual3 { value: self.value + c, ..self }
    }
}

impl Sub<f64> for Dual3 {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Dual3 { value: self.value - c, ..self }
    }
}

impl Mul<f64> for Dual3 {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Dual3::new(self.value * c, self.d1 * c, self.d2 * c, self.d3 * c)
    }
}

impl Div<f64> for Dual3 {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        Dual3::new(self.value / c, self.d1 / c, self.d2 / c, self.d3 / c)
    }
}

impl AddAssign for Dual3 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Dual3 {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for Dual3 {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl DivAssign for Dual3 {
    fn div_assign(&mut self, o: Self) {
        *self = *self / o;
    }
}

impl Real for Dual3 {
    fn cst(c: f64) -> Self {
        Dual3::new(c, 0.0, 0.0, 0.0)
    }
    fn re(&self) -> f64 {
        self.value
    }
    fn sqrt(self) -> Self {
        let x = self.value;
        let s = x.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (x * s), 0.375 / (x * x * s))
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e, e)
    }
    fn ln(self) -> Self {
        let x = self.value;
        self.compose(x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s, -c)
    }
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c, s)
    }
    fn powi(self, k: i32) -> Self {
        let x = self.value;
        let kf = k as f64;
        let p = |e: i32| if e < 0 && x == 0.0 { f64::INFINITY } else { x.powi(e) };
        self.compose(
            x.powi(k),
            kf * p(k - 1),
            kf * (kf - 1.0) * p(k - 2),
            kf * (kf - 1.0) * (kf - 2.0) * p(k - 3),
        )
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }
    fn depth() -> usize {
        3
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }
}

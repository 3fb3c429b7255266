//! Seeded random test objects shared by unit tests, the acceptance suite and
//! the CLI self-test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fanning::{AnalyticCurve, FrameTriple, SymplecticForm};
use crate::numkit::{inverse, vstack, Mat};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries uniform in `[-1, 1)`.
pub fn random_matrix(r: &mut TestRng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

pub fn random_symmetric(r: &mut TestRng, n: usize) -> Mat {
    let m = random_matrix(r, n, n);
    (&m + m.transpose()) * 0.5
}

pub fn random_unit_vector(r: &mut TestRng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let nn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nn > 0.2 && nn <= 1.0 {
            return v.iter().map(|x| x / nn).collect();
        }
    }
}

/// A uniformly drawn point in the ball of the given radius.
pub fn random_point_in_ball(r: &mut TestRng, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| r.random_range(-radius..radius)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() < radius * radius {
            return v;
        }
    }
}

/// A well-conditioned random element of Sp(2n) for the standard form.
pub fn random_symplectic(r: &mut TestRng, n: usize) -> Mat {
    let b = random_symmetric(r, n) * 0.5;
    let c = random_symmetric(r, n) * 0.5;
    let g = Mat::identity(n, n) + random_matrix(r, n, n) * 0.3;
    let gi = inverse(&g).expect("perturbation of identity is invertible");
    let id = Mat::identity(n, n);
    let z = Mat::zeros(n, n);
    let lower = blocks(&id, &z, &b, &id);
    let upper = blocks(&id, &c, &z, &id);
    let diag = blocks(&g, &z, &z, &gi.transpose());
    lower * upper * diag
}

fn blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
    let n = a.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Coefficients of a random Lagrangian fanning curve `T·[I; S(t)]` with
/// `S(t)` a symmetric cubic whose derivative stays positive definite for
/// `|t| ≤ 1`.
#[derive(Clone, Debug)]
pub struct LagrangianCurveData {
    pub t: Mat,
    pub s: [Mat; 4],
}

impl LagrangianCurveData {
    pub fn random(r: &mut TestRng, n: usize) -> Self {
        let t = random_symplectic(r, n);
        let s0 = random_symmetric(r, n);
        let s1 = Mat::identity(n, n) * 1.5 + random_symmetric(r, n) * 0.3;
        let s2 = random_symmetric(r, n) * 0.2;
        let s3 = random_symmetric(r, n) * 0.1;
        LagrangianCurveData { t, s: [s0, s1, s2, s3] }
    }

    pub fn frame(&self, t: f64) -> FrameTriple {
        let n = self.s[0].nrows();
        let [s0, s1, s2, s3] = &self.s;
        let s = s0 + s1 * t + s2 * (t * t) + s3 * (t * t * t);
        let sd = s1 + s2 * (2.0 * t) + s3 * (3.0 * t * t);
        let sdd = s2 * 2.0 + s3 * (6.0 * t);
        let z = Mat::zeros(n, n);
        let a = &self.t * vstack(&[&Mat::identity(n, n), &s]);
        let ad = &self.t * vstack(&[&z, &sd]);
        let add = &self.t * vstack(&[&z, &sdd]);
        FrameTriple { a, adot: ad, addot: add }
    }

    pub fn into_curve(self) -> AnalyticCurve {
        let n = self.s[0].nrows();
        AnalyticCurve::new(n, move |t| Ok(self.frame(t))).with_omega(SymplecticForm::standard(n))
    }
}

/// Random Lagrangian fanning curve in ℝ²ⁿ with the standard form attached.
pub fn random_lagrangian_curve(r: &mut TestRng, n: usize) -> AnalyticCurve {
    LagrangianCurveData::random(r, n).into_curve()
}

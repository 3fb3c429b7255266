//! Explicit Runge–Kutta integrators for small non-stiff systems.

use crate::error::{GeomError, Result};

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn check(y: &[f64], what: &str) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFiniteValue(what.into()))
    }
}

/// One classical RK4 step of size `h`.
pub fn rk4_step<F>(field: &mut F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let k1 = field(t, y)?;
    let k2 = field(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = field(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = field(t + h, &axpy(y, h, &k3))?;
    let out: Vec<f64> = (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    check(&out, "RK4 step")?;
    Ok(out)
}

/// Classical RK4 on the uniform grid `t0, t0 + h, …, t1` (`steps` steps,
/// endpoints included). Works for `t1 < t0` as well.
pub fn rk_integrate<F>(mut field: F, y0: &[f64], t0: f64, t1: f64, steps: usize) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    if steps == 0 {
        return Err(GeomError::DimensionMismatch("rk_integrate needs at least one step".into()));
    }
    check(y0, "RK4 initial value")?;
    let h = (t1 - t0) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0.to_vec();
    out.push((t0, y.clone()));
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        y = rk4_step(&mut field, t, &y, h)?;
        let tn = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h };
        out.push((tn, y.clone()));
    }
    Ok(out)
}

/// Tolerances for [`rk45`].
#[derive(Clone, Copy, Debug)]
pub struct Rk45Options {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for Rk45Options {
    fn default() -> Self {
        Rk45Options { rtol: 1e-10, atol: 1e-12, h0: 1e-3, max_steps: 1_000_000 }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration from `t0` to `t1`; returns every
/// accepted step (endpoints included).
pub fn rk45<F>(mut field: F, y0: &[f64], t0: f64, t1: f64, opts: Rk45Options) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    check(y0, "RK45 initial value")?;
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let m = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.h0.abs().min((t1 - t0).abs()).max(1e-14) * dir;
    let mut out = vec![(t, y.clone())];
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(GeomError::NonFiniteValue("RK45 exceeded its step budget".into()));
        }
        steps += 1;
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        for s in 0..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                for i in 0..m {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k.push(field(t + C[s] * h, &ys)?);
        }
        let mut y5 = y.clone();
        let mut err = 0.0_f64;
        for i in 0..m {
            let (mut s5, mut s4) = (0.0, 0.0);
            for s in 0..7 {
                s5 += B5[s] * k[s][i];
                s4 += B4[s] * k[s][i];
            }
            y5[i] += h * s5;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (s5 - s4) / sc).abs());
        }
        if !err.is_finite() {
            return Err(GeomError::NonFiniteValue("RK45 error estimate".into()));
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            out.push((t, y.clone()));
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    Ok(out)
}

//! Joint integration of the geodesic flow and its linearization.

use crate::error::{GeomError, Result};
use crate::fanning::{FrameCurve, FrameTriple, StencilSpec, SymplecticForm};
use crate::finsler::{
    dual_legendre, fundamental_tensor, hamiltonian_flow_jacobian, omega_matrix, spray_flow_jacobian, MetricFamily,
    MetricSpec, PhasePoint,
};
use crate::numkit::{central_derivative, inverse, max_abs, solve, vstack, Mat, Stencil};

/// RK4 steps per unit of t.
pub const DEFAULT_STEPS_PER_UNIT: usize = 2000;

/// Base half-width of the `Ṗ` stencil, snapped to the integration grid.
pub const STENCIL_BASE_H: f64 = 1e-3;

/// Phase space the flow is integrated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Spray on `TM` in `(x, y)`.
    Tangent,
    /// Hamiltonian flow of `½F*²` on `T*M` in `(x, ξ)`, mapped back to
    /// `(x, y)` through `y = H_ξ`. Used when only the co-metric is closed
    /// form.
    Cotangent,
}

impl Route {
    pub fn for_metric(m: &MetricSpec) -> Route {
        match m.family {
            MetricFamily::Dual(_) => Route::Cotangent,
            _ => Route::Tangent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportOptions {
    pub steps_per_unit: usize,
    pub route: Option<Route>,
    /// Base step of the `Ṗ` stencil, snapped to the grid.
    pub stencil_h: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { steps_per_unit: DEFAULT_STEPS_PER_UNIT, route: None, stencil_h: STENCIL_BASE_H }
    }
}

/// One grid instant of an orbit. Frames are expressed in `T_{v0}TM` with
/// tangent coordinates `(∂x, ∂y)`.
#[derive(Clone, Debug)]
pub struct OrbitNode {
    pub t: f64,
    /// `Φₜ(v0)` in tangent coordinates.
    pub point: PhasePoint,
    /// `dΦₜ(v0)` in tangent coordinates.
    pub transport: Mat,
    /// `A(t) = dΦₜ⁻¹·[0; I]` up to a change of frame.
    pub a: Mat,
    pub adot: Mat,
    /// `A(t)·iota·u = dΦₜ⁻¹(0, u)` for `u ∈ T_{γ(t)}M`.
    pub iota: Mat,
    raw_state: Vec<f64>,
    raw_m: Mat,
}

/// A transported orbit on an equally spaced grid `t = k·dt`.
#[derive(Clone, Debug)]
pub struct OrbitData {
    pub metric: MetricSpec,
    pub v0: PhasePoint,
    pub route: Route,
    pub dt: f64,
    pub stencil_h: f64,
    pub omega0: SymplecticForm,
    k_lo: i64,
    nodes: Vec<OrbitNode>,
    j0: Mat,
}

struct Flow<'a> {
    metric: &'a MetricSpec,
    route: Route,
    n: usize,
}

impl Flow<'_> {
    fn field(&self, s: &[f64]) -> Result<(Vec<f64>, Mat)> {
        match self.route {
            Route::Tangent => spray_flow_jacobian(self.metric, s),
            Route::Cotangent => {
                let cm = self.metric.comet().expect("cotangent route requires a co-metric");
                hamiltonian_flow_jacobian(cm, s)
            }
        }
    }

    fn deriv(&self, s: &[f64], m: &Mat) -> Result<(Vec<f64>, Mat)> {
        let (f, ds) = self.field(s)?;
        let dm = ds * m;
        Ok((f, dm))
    }

    fn rk4(&self, s: &[f64], m: &Mat, k1: (Vec<f64>, Mat), h: f64) -> Result<(Vec<f64>, Mat)> {
        let shift = |k: &(Vec<f64>, Mat), c: f64| -> (Vec<f64>, Mat) {
            (s.iter().zip(&k.0).map(|(a, b)| a + c * b).collect(), m + &k.1 * c)
        };
        let (s2, m2) = shift(&k1, 0.5 * h);
        let k2 = self.deriv(&s2, &m2)?;
        let (s3, m3) = shift(&k2, 0.5 * h);
        let k3 = self.deriv(&s3, &m3)?;
        let (s4, m4) = shift(&k3, h);
        let k4 = self.deriv(&s4, &m4)?;
        let s_new = (0..s.len()).map(|i| s[i] + h / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i])).collect();
        let m_new = m + (&k1.1 + &k2.1 * 2.0 + &k3.1 * 2.0 + &k4.1) * (h / 6.0);
        Ok((s_new, m_new))
    }

    /// `J = ∂(x, y)/∂(state)` at a state; the identity on the tangent route.
    fn state_jacobian(&self, ds: &Mat) -> Mat {
        let n = self.n;
        match self.route {
            Route::Tangent => Mat::identity(2 * n, 2 * n),
            Route::Cotangent => {
                let mut j = Mat::identity(2 * n, 2 * n);
                j.view_mut((n, 0), (n, 2 * n)).copy_from(&ds.view((0, 0), (n, 2 * n)));
                j
            }
        }
    }

    fn node(&self, t: f64, s: Vec<f64>, m: Mat, j0: &Mat) -> Result<OrbitNode> {
        let n = self.n;
        if !self.metric.domain.contains(&s[..n]) {
            return Err(GeomError::OutOfChart(t));
        }
        let (f, ds) = self.field(&s)?;
        let vert = vstack(&[&Mat::zeros(n, n), &Mat::identity(n, n)]);
        let minv_v = solve(&m, &vert).ok_or(GeomError::SingularTransform)?;
        let ds_v = &ds * &vert;
        let minv_ds_v = solve(&m, &ds_v).ok_or(GeomError::SingularTransform)?;
        let a = j0 * minv_v;
        let adot = -(j0 * minv_ds_v);
        let (y, iota, transport) = match self.route {
            Route::Tangent => (s[n..].to_vec(), Mat::identity(n, n), m.clone()),
            Route::Cotangent => {
                let j = self.state_jacobian(&ds);
                let hxixi = ds.view((0, n), (n, n)).into_owned();
                let g = inverse(&hxixi).ok_or(GeomError::SingularTransform)?;
                let j0inv = inverse(j0).ok_or(GeomError::SingularTransform)?;
                (f[..n].to_vec(), g, j * &m * j0inv)
            }
        };
        Ok(OrbitNode {
            t,
            point: PhasePoint::new(s[..n].to_vec(), y)?,
            transport,
            a,
            adot,
            iota,
            raw_state: s,
            raw_m: m,
        })
    }

    /// Nodes at `t0 + k·h`, `k = 0..=steps`.
    fn run(&self, s0: Vec<f64>, m0: Mat, t0: f64, h: f64, steps: usize, j0: &Mat) -> Result<Vec<OrbitNode>> {
        let mut out = Vec::with_capacity(steps + 1);
        let (mut s, mut m) = (s0, m0);
        for k in 0..=steps {
            let t = t0 + k as f64 * h;
            let node = self.node(t, s.clone(), m.clone(), j0)?;
            out.push(node);
            if k < steps {
                let k1 = self.deriv(&s, &m)?;
                let (s1, m1) = self.rk4(&s, &m, k1, h)?;
                if s1.iter().any(|v| !v.is_finite()) {
                    return Err(GeomError::NonFiniteValue(format!("orbit state at t = {}", t + h)));
                }
                s = s1;
                m = m1;
            }
        }
        Ok(out)
    }
}

/// Half-width of the window needed around `t` for a full invariant bundle.
fn margin(t_max: f64, dt: f64, base_h: f64) -> f64 {
    2.0 * Stencil::snapped_h(t_max, base_h, dt) + 4.0 * dt
}

/// Transports `v0` over `|t| ≤ t_max` (plus stencil margins) with default
/// options.
pub fn transport(metric: &MetricSpec, v0: &PhasePoint, t_max: f64) -> Result<OrbitData> {
    transport_with(metric, v0, t_max, TransportOptions::default())
}

pub fn transport_with(metric: &MetricSpec, v0: &PhasePoint, t_max: f64, opts: TransportOptions) -> Result<OrbitData> {
    let n = metric.n;
    if v0.n() != n {
        return Err(GeomError::DimensionMismatch(format!("v0 of dimension {} for n = {n}", v0.n())));
    }
    if opts.steps_per_unit == 0 || !(t_max >= 0.0 && t_max.is_finite()) || !(opts.stencil_h > 0.0 && opts.stencil_h.is_finite()) {
        return Err(GeomError::InvalidMetric(format!(
            "transport window t_max = {t_max}, {} steps per unit, stencil step {}",
            opts.steps_per_unit, opts.stencil_h
        )));
    }
    if !metric.domain.contains(&v0.x) {
        return Err(GeomError::OutOfChart(0.0));
    }
    let route = opts.route.unwrap_or_else(|| Route::for_metric(metric));
    if route == Route::Cotangent && metric.comet().is_none() {
        return Err(GeomError::InvalidMetric("cotangent route needs a co-metric".into()));
    }
    let dt = 1.0 / opts.steps_per_unit as f64;
    let k_max = ((t_max + margin(t_max, dt, opts.stencil_h)) / dt).ceil() as i64;
    let flow = Flow { metric, route, n };
    let s0 = match route {
        Route::Tangent => v0.state(),
        Route::Cotangent => {
            let xi = dual_legendre(metric.comet().unwrap(), &v0.x, &v0.y)?;
            v0.x.iter().chain(&xi).copied().collect()
        }
    };
    let j0 = flow.state_jacobian(&flow.field(&s0)?.1);
    let id = Mat::identity(2 * n, 2 * n);
    let fwd = flow.run(s0.clone(), id.clone(), 0.0, dt, k_max as usize, &j0)?;
    let bwd = flow.run(s0, id, 0.0, -dt, k_max as usize, &j0)?;
    let mut nodes: Vec<OrbitNode> = bwd.into_iter().skip(1).rev().collect();
    nodes.extend(fwd);
    let omega0 = SymplecticForm::new(omega_matrix(metric, v0)?)?;
    Ok(OrbitData { metric: metric.clone(), v0: v0.clone(), route, dt, stencil_h: opts.stencil_h, omega0, k_lo: -k_max, nodes, j0 })
}

/// Everything the Jacobi curve needs at one instant.
#[derive(Clone, Debug)]
pub struct JacobiCurveSample {
    pub t: f64,
    pub frame: FrameTriple,
    pub iota: Mat,
    pub point: PhasePoint,
    pub stencil: StencilSpec,
    /// Frames at the `Ṗ` stencil nodes `t + k·h`.
    pub neighbors: Vec<FrameTriple>,
}

impl OrbitData {
    pub fn nodes(&self) -> &[OrbitNode] {
        &self.nodes
    }

    pub fn n(&self) -> usize {
        self.metric.n
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.nodes[0].t, self.nodes[self.nodes.len() - 1].t)
    }

    fn grid_index(&self, t: f64) -> Option<i64> {
        let k = (t / self.dt).round();
        ((t - k * self.dt).abs() <= 1e-9 * t.abs().max(1.0)).then_some(k as i64)
    }

    fn stored(&self, k: i64) -> Option<&OrbitNode> {
        let i = k - self.k_lo;
        (i >= 0).then(|| self.nodes.get(i as usize)).flatten()
    }

    /// Nodes at `t + j·dt`, `j = -half..=half`. Off-grid instants are
    /// re-integrated from the nearest stored node below the window.
    pub fn window(&self, t: f64, half: usize) -> Result<Vec<OrbitNode>> {
        let h = half as i64;
        if let Some(k) = self.grid_index(t) {
            return (k - h..=k + h).map(|j| self.stored(j).cloned().ok_or(GeomError::OutOfRange(t))).collect();
        }
        let start = t - h as f64 * self.dt;
        let kb = (start / self.dt).floor() as i64;
        let base = self.stored(kb).ok_or(GeomError::OutOfRange(t))?;
        if self.stored(kb + 2 * h + 1).is_none() {
            return Err(GeomError::OutOfRange(t));
        }
        let flow = Flow { metric: &self.metric, route: self.route, n: self.n() };
        let delta = start - base.t;
        let k1 = flow.deriv(&base.raw_state, &base.raw_m)?;
        let (s, m) = flow.rk4(&base.raw_state, &base.raw_m, k1, delta)?;
        flow.run(s, m, start, self.dt, 2 * half, &self.j0)
    }

    /// Node at `t`, re-integrated when `t` is off the grid.
    pub fn node_at(&self, t: f64) -> Result<OrbitNode> {
        Ok(self.window(t, 0)?.remove(0))
    }

    /// `(A, Ȧ, Ä)` at `t`, with `Ä` from a central stencil of the analytic
    /// `Ȧ` at the neighbouring grid nodes.
    pub fn frame_at(&self, t: f64) -> Result<(FrameTriple, OrbitNode)> {
        let w = self.window(t, 2)?;
        let st = Stencil::new(t, self.dt, 4)?;
        let adots: Vec<Mat> = w.iter().map(|nd| nd.adot.clone()).collect();
        let addot = central_derivative(&adots, &st)?;
        let c = w[2].clone();
        Ok((FrameTriple::new(c.a.clone(), c.adot.clone(), addot)?, c))
    }

    /// Stencil used for `Ṗ` at `t`.
    pub fn stencil_at(&self, t: f64) -> StencilSpec {
        StencilSpec { h: Stencil::snapped_h(t, self.stencil_h, self.dt), order: 4 }
    }

    /// Maximum of `|MᵀΩ(Φₜv0)M − Ω(v0)| / |Ω(v0)|` over every `stride`-th
    /// grid node.
    pub fn symplectic_drift(&self, stride: usize) -> Result<f64> {
        let o0 = self.omega0.matrix();
        let scale = max_abs(o0);
        let mut worst: f64 = 0.0;
        for nd in self.nodes.iter().step_by(stride.max(1)) {
            let o = omega_matrix(&self.metric, &nd.point)?;
            let r = nd.transport.transpose() * o * &nd.transport - o0;
            worst = worst.max(max_abs(&r) / scale);
        }
        Ok(worst)
    }

    /// Wronskian at `t` pulled back to `T_{γ(t)}M`, and `g_F(γ̇(t))`.
    pub fn pulled_wronskian(&self, t: f64) -> Result<(Mat, Mat)> {
        let (ft, node) = self.frame_at(t)?;
        let w = crate::fanning::wronskian(&ft, &self.omega0)?;
        let pulled = node.iota.transpose() * w * &node.iota;
        Ok((pulled, fundamental_tensor(&self.metric, &node.point)?))
    }
}

impl FrameCurve for OrbitData {
    fn dim(&self) -> usize {
        self.metric.n
    }

    fn frame(&self, t: f64) -> Result<FrameTriple> {
        Ok(self.frame_at(t)?.0)
    }

    fn plane(&self, t: f64) -> Result<Mat> {
        Ok(self.node_at(t)?.a)
    }

    fn omega(&self) -> Option<&SymplecticForm> {
        Some(&self.omega0)
    }
}

/// The Jacobi curve at `t` with the frames needed for `Ṗ`.
pub fn jacobi_frame(orbit: &OrbitData, t: f64) -> Result<JacobiCurveSample> {
    let (frame, node) = orbit.frame_at(t)?;
    let stencil = orbit.stencil_at(t);
    let st = Stencil::new(t, stencil.h, stencil.order)?;
    let neighbors = st.nodes.iter().map(|&tk| orbit.frame(tk)).collect::<Result<Vec<_>>>()?;
    Ok(JacobiCurveSample { t, frame, iota: node.iota, point: node.point, stencil, neighbors })
}

impl JacobiCurveSample {
    /// Invariant bundle; a non-fanning spray Jacobi curve signals a bug or
    /// a broken orbit and is reported as an inconsistency.
    pub fn invariants(&self, omega: &SymplecticForm) -> Result<crate::fanning::FanningInvariants> {
        let st = Stencil::new(self.t, self.stencil.h, self.stencil.order)?;
        let ps = self
            .neighbors
            .iter()
            .map(|ft| Ok(crate::fanning::pq_coefficients(ft)?.0))
            .collect::<Result<Vec<_>>>()
            .map_err(not_fanning)?;
        let pdot = central_derivative(&ps, &st)?;
        crate::fanning::invariants_from(&self.frame, self.t, pdot, Some(omega)).map_err(not_fanning)
    }
}

fn not_fanning(e: GeomError) -> GeomError {
    match e {
        GeomError::NotFanning { cond } => {
            GeomError::InternalInconsistency(format!("spray Jacobi curve is not fanning (cond {cond:.3e})"))
        }
        e => e,
    }
}

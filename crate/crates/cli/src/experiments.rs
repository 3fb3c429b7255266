//! The experiments behind `fanning-lab run`. Samples are drawn sequentially
//! from the seed, rows are computed in parallel and sorted by sample index.

use std::f64::consts::PI;

use rayon::prelude::*;

use fanning_lab_core::deformations::{katok_flags, katok_metric, projective_curvature_rhs, projective_deform};
use fanning_lab_core::finsler::{MetricSpec, PhasePoint};
use fanning_lab_core::jacobi::{flag_curvature_with, jacobi_frame, riemann_oracle_for, transport_with};
use fanning_lab_core::numkit::{inverse, max_abs, Mat};
use fanning_lab_core::reduction::submersion_curvature;
use fanning_lab_core::samples::{random_point_in_ball, random_unit_vector, rng};
use fanning_lab_core::validation::{random_flags, random_hopf_flags, run_all};
use fanning_lab_core::{GeomError, Result as GeomResult};

use crate::config::{
    CurvatureGrid, Experiment, KatokRun, OrbitScan, ProjectiveRun, Sampling, ScenarioConfig, SubmersionRun,
    SubmersionScenario,
};
use crate::output::{Cell, CheckSummary, Table};
use crate::CliError;

/// Rows and checks of one run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    pub max_residuals: Vec<(String, f64)>,
    pub checks: Vec<CheckSummary>,
}

type Flag = (PhasePoint, Vec<f64>);

fn numeric(context: impl Into<String>) -> impl FnOnce(GeomError) -> CliError {
    let context = context.into();
    move |source| CliError::Numeric { context, source }
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

/// Evaluates `f` on every item in parallel, keeping input order; the first
/// failure (by index) is reported with its index.
fn par_rows<T: Sync, R: Send>(items: &[T], what: &str, f: impl Fn(&T) -> GeomResult<R> + Sync) -> Result<Vec<R>, CliError> {
    let mut out: Vec<(usize, GeomResult<R>)> = items.par_iter().enumerate().map(|(i, t)| (i, f(t))).collect();
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(i, r)| r.map_err(numeric(format!("{what} {i}")))).collect()
}

fn center(c: &Option<Vec<f64>>, n: usize, key: &str) -> Result<Vec<f64>, CliError> {
    match c {
        None => Ok(vec![0.0; n]),
        Some(c) if c.len() == n => Ok(c.clone()),
        Some(c) => Err(CliError::Config(format!("{key} has {} entries for a metric of dimension {n}", c.len()))),
    }
}

fn shift(flags: Vec<Flag>, c: &[f64]) -> GeomResult<Vec<Flag>> {
    flags
        .into_iter()
        .map(|(v, u)| Ok((PhasePoint::new(v.x.iter().zip(c).map(|(a, b)| a + b).collect(), v.y)?, u)))
        .collect()
}

fn plane_vector(n: usize, angle: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = angle.cos();
    if n > 1 {
        v[1] = angle.sin();
    }
    v
}

/// Base points on the diagonal through the center, poles at equal angles in
/// the `(x₁, x₂)`-plane and edges turned by `π(k+1)/(transverse+1)`.
fn grid_flags(n: usize, c: &[f64], points: usize, directions: usize, transverse: usize, radius: f64) -> GeomResult<Vec<Flag>> {
    let mut out = vec![];
    let diag = 1.0 / (n as f64).sqrt();
    for i in 0..points {
        let s = radius * (-1.0 + (2 * i + 1) as f64 / points as f64);
        let x: Vec<f64> = c.iter().map(|ci| ci + s * diag).collect();
        for j in 0..directions {
            let a = 2.0 * PI * j as f64 / directions as f64;
            for k in 0..transverse {
                let b = a + PI * (k + 1) as f64 / (transverse + 1) as f64;
                out.push((PhasePoint::new(x.clone(), plane_vector(n, a))?, plane_vector(n, b)));
            }
        }
    }
    Ok(out)
}

pub fn run(cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    match &cfg.experiment {
        Experiment::CurvatureGrid(g) => curvature_grid(cfg, g),
        Experiment::InvariantsAlongOrbit(o) => invariants_along_orbit(cfg, o),
        Experiment::Submersion(s) => submersion(cfg, s),
        Experiment::Projective(p) => projective(cfg, p),
        Experiment::Katok(k) => katok(cfg, k),
        Experiment::Selftest(_) => selftest(cfg),
    }
}

fn curvature_grid(cfg: &ScenarioConfig, g: &CurvatureGrid) -> Result<Outcome, CliError> {
    let m = g.metric.build("experiment.metric")?;
    let n = m.n;
    if n < 2 {
        return Err(CliError::Config("experiment.metric must have dimension at least 2 to carry a flag".into()));
    }
    let c = center(&g.center, n, "experiment.center")?;
    let has_oracle = g.expected.is_some() || m.riemannian_chart().is_some();
    if g.tolerance.is_some() && !has_oracle {
        return Err(CliError::Config("experiment.tolerance needs an oracle; set experiment.expected".into()));
    }
    let flags = match g.sampling {
        Sampling::Random { count, radius } => random_flags(&mut rng(cfg.seed), n, radius, count).and_then(|f| shift(f, &c)),
        Sampling::Grid { points, directions, transverse, radius } => grid_flags(n, &c, points, directions, transverse, radius),
    }
    .map_err(numeric("sampling flags"))?;

    let opts = cfg.transport();
    let results = par_rows(&flags, "flag", |(v, u)| {
        let k = flag_curvature_with(&m, v, u, opts)?;
        let oracle = match g.expected {
            Some(e) => Some(e),
            None if m.riemannian_chart().is_some() => Some(riemann_oracle_for(&m, &v.x, &v.y, u)?),
            None => None,
        };
        Ok((k, oracle))
    })?;

    let axes = |p: &'static str| (1..=n).map(move |i| format!("{p}{i}"));
    let mut header = vec!["metric".to_string()];
    header.extend(axes("x").chain(axes("y")).chain(axes("u")));
    header.extend(["K", "oracle_K", "abs_err"].map(String::from));
    let mut table = Table::new(header);
    let (mut errs, mut ks) = (vec![], vec![]);
    for ((v, u), (k, oracle)) in flags.iter().zip(&results) {
        let mut row = vec![Cell::Text(g.metric.id().into())];
        row.extend(v.x.iter().chain(&v.y).chain(u).map(|&c| Cell::Num(c)));
        row.push(Cell::Num(*k));
        ks.push(k.abs());
        match oracle {
            Some(o) => {
                errs.push((k - o).abs());
                row.extend([Cell::Num(*o), Cell::Num((k - o).abs())]);
            }
            None => row.extend([Cell::Empty, Cell::Empty]),
        }
        table.push(row)?;
    }
    let mut max_residuals = vec![("max_abs_K".to_string(), worst(ks))];
    let mut checks = vec![];
    if has_oracle {
        let e = worst(errs);
        max_residuals.push(("max_abs_err".into(), e));
        if let Some(t) = g.tolerance {
            checks.push(CheckSummary::new("max |K - oracle_K|", e, t));
        }
    }
    Ok(Outcome { table, max_residuals, checks })
}

fn matrix_cells(m: &Mat) -> impl Iterator<Item = Cell> + '_ {
    (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| Cell::Num(m[(i, j)])))
}

/// Schwarzian and Wronskian are reported in tangent coordinates at `γ(t)`,
/// where the Wronskian should equal the fundamental tensor.
fn invariants_along_orbit(cfg: &ScenarioConfig, o: &OrbitScan) -> Result<Outcome, CliError> {
    let m = o.metric.build("experiment.metric")?;
    let n = m.n;
    if o.x.len() != n || o.y.len() != n {
        return Err(CliError::Config(format!("experiment.x and experiment.y must have {n} entries")));
    }
    let v = PhasePoint::new(o.x.clone(), o.y.clone()).map_err(|e| CliError::Config(format!("experiment.y: {e}")))?;
    let f = m.finsler(&v).map_err(numeric("initial vector"))?;
    let v = PhasePoint::new(v.x, v.y.iter().map(|c| c / f).collect()).map_err(numeric("initial vector"))?;
    let orbit = transport_with(&m, &v, o.t_max, cfg.transport()).map_err(numeric("transport"))?;
    let ts: Vec<f64> = (0..o.samples)
        .map(|i| if o.samples == 1 { 0.0 } else { o.t_max * i as f64 / (o.samples - 1) as f64 })
        .collect();
    let rows = par_rows(&ts, "sample", |&t| {
        let s = jacobi_frame(&orbit, t)?;
        let inv = s.invariants(&orbit.omega0)?;
        let iota_inv = inverse(&s.iota).ok_or(GeomError::SingularTransform)?;
        let sch = &iota_inv * &inv.schwarzian * &s.iota;
        let (w, g) = orbit.pulled_wronskian(t)?;
        Ok((sch, max_abs(&(&w - g)), w, inv.k_eigenvalues()))
    })?;

    let entries = |p: &'static str| (1..=n).flat_map(move |i| (1..=n).map(move |j| format!("{p}_{i}{j}"))).collect::<Vec<_>>();
    let mut header = vec!["t".to_string()];
    header.extend(entries("schwarzian"));
    header.extend(entries("wronskian"));
    header.extend((1..=n).map(|i| format!("k_eig_{i}")));
    let mut table = Table::new(header);
    for (t, (sch, _, w, ev)) in ts.iter().zip(&rows) {
        let mut row = vec![Cell::Num(*t)];
        row.extend(matrix_cells(sch));
        row.extend(matrix_cells(w));
        row.extend(ev.iter().map(|&e| Cell::Num(e)));
        table.push(row)?;
    }
    let dev = worst(rows.iter().map(|r| r.1));
    let checks = o.tolerance.map(|t| CheckSummary::new("max |W - g|", dev, t)).into_iter().collect();
    Ok(Outcome { table, max_residuals: vec![("max_abs_wronskian_minus_g".into(), dev)], checks })
}

fn projection_flags(seed: u64, total: usize, base: usize, count: usize) -> GeomResult<Vec<Flag>> {
    let mut r = rng(seed);
    let pad = |v: Vec<f64>| v.into_iter().chain(std::iter::repeat(0.0)).take(total).collect::<Vec<_>>();
    let mut out = vec![];
    while out.len() < count {
        let x = random_point_in_ball(&mut r, total, 0.5);
        let (y, u) = (random_unit_vector(&mut r, base), random_unit_vector(&mut r, base));
        let c: f64 = y.iter().zip(&u).map(|(a, b)| a * b).sum();
        if c.abs() < 0.9 {
            out.push((PhasePoint::new(x, pad(y))?, pad(u)));
        }
    }
    Ok(out)
}

fn submersion(cfg: &ScenarioConfig, s: &SubmersionRun) -> Result<Outcome, CliError> {
    let sub = s.scenario.build("experiment.scenario")?;
    let flags = match s.scenario {
        SubmersionScenario::Hopf { .. } => random_hopf_flags(&mut rng(cfg.seed), s.samples),
        SubmersionScenario::Projection { total, base } => projection_flags(cfg.seed, total, base, s.samples),
    }
    .map_err(numeric("sampling flags"))?;
    let method = s.method.into();
    let rows = par_rows(&flags, "flag", |(v, w)| submersion_curvature(&sub, v, w, method))?;

    let mut table = Table::new(["scenario", "K_total", "K_base", "correction", "residual"].map(String::from).to_vec());
    let id = s.scenario.id();
    let (mut gap, mut direct) = (vec![], vec![]);
    let mut dev = [vec![], vec![], vec![]];
    for (i, k) in rows.iter().enumerate() {
        let residual = (k.k_base - k.k_total - k.correction).abs();
        gap.push(residual);
        direct.push((k.k_base - k.k_base_direct).abs());
        if let Some(e) = s.expected {
            for (d, (got, want)) in dev.iter_mut().zip([(k.k_base, e[0]), (k.k_total, e[1]), (k.correction, e[2])]) {
                d.push((got - want).abs());
            }
        }
        table.push(vec![
            Cell::Text(format!("{id}-{i:04}")),
            Cell::Num(k.k_total),
            Cell::Num(k.k_base),
            Cell::Num(k.correction),
            Cell::Num(residual),
        ])?;
    }
    let (gap, direct) = (worst(gap), worst(direct));
    let mut checks = vec![];
    if s.expected.is_some() {
        for (label, d) in ["|K_base - expected|", "|K_total - expected|", "|correction - expected|"].iter().zip(dev) {
            checks.push(CheckSummary::new(label, worst(d), s.expected_tolerance));
        }
    }
    if let Some(t) = s.tolerance {
        checks.push(CheckSummary::new("max |K_base - K_total - correction|", gap, t));
    }
    Ok(Outcome {
        table,
        max_residuals: vec![("max_oneill_gap".into(), gap), ("max_abs_base_minus_direct".into(), direct)],
        checks,
    })
}

fn projective(cfg: &ScenarioConfig, p: &ProjectiveRun) -> Result<Outcome, CliError> {
    let f0: MetricSpec = p.base.build("experiment.base")?;
    let n = f0.n;
    if n < 2 {
        return Err(CliError::Config("experiment.base must have dimension at least 2 to carry a flag".into()));
    }
    let theta = p.theta.build("experiment.theta", n)?;
    let f = projective_deform(&f0, &theta).map_err(|e| CliError::Config(format!("experiment.theta: {e}")))?;
    let c = center(&p.center, n, "experiment.center")?;
    let flags = random_flags(&mut rng(cfg.seed), n, p.radius, p.samples)
        .and_then(|fl| shift(fl, &c))
        .map_err(numeric("sampling flags"))?;
    let opts = cfg.transport();
    let rows = par_rows(&flags, "flag", |(v, w)| {
        let rhs = projective_curvature_rhs(&f0, &theta, v, w)?;
        Ok((flag_curvature_with(&f, v, w, opts)?, rhs.k_phi_form))
    })?;
    let mut table = Table::new(["flag_id", "K_direct", "K_formula", "abs_err"].map(String::from).to_vec());
    let mut errs = vec![];
    for (i, (kd, kf)) in rows.iter().enumerate() {
        errs.push((kd - kf).abs());
        table.push(vec![Cell::Int(i as u64), Cell::Num(*kd), Cell::Num(*kf), Cell::Num((kd - kf).abs())])?;
    }
    let e = worst(errs);
    let checks = p.tolerance.map(|t| CheckSummary::new("max |K_direct - K_formula|", e, t)).into_iter().collect();
    Ok(Outcome { table, max_residuals: vec![("max_abs_err".into(), e)], checks })
}

fn katok(cfg: &ScenarioConfig, k: &KatokRun) -> Result<Outcome, CliError> {
    let metrics = k
        .epsilons
        .iter()
        .enumerate()
        .map(|(i, &e)| katok_metric(e).map_err(|err| CliError::Config(format!("experiment.epsilons[{i}]: {err}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let flags = katok_flags(cfg.seed, k.samples);
    let jobs: Vec<(usize, usize)> = (0..metrics.len()).flat_map(|e| (0..flags.len()).map(move |f| (e, f))).collect();
    let opts = cfg.transport();
    let ks = par_rows(&jobs, "job", |&(e, f)| flag_curvature_with(&metrics[e], &flags[f].0, &flags[f].1, opts))?;
    let mut rows: Vec<_> = jobs.iter().zip(&ks).collect();
    rows.sort_by_key(|((e, f), _)| (*e, *f));
    let mut table = Table::new(["epsilon", "flag_id", "K", "dev_from_1"].map(String::from).to_vec());
    let mut devs = vec![];
    for ((e, f), kv) in rows {
        devs.push((kv - 1.0).abs());
        table.push(vec![Cell::Num(k.epsilons[*e]), Cell::Int(*f as u64), Cell::Num(*kv), Cell::Num((kv - 1.0).abs())])?;
    }
    let d = worst(devs);
    let checks = k.tolerance.map(|t| CheckSummary::new("max |K - 1|", d, t)).into_iter().collect();
    Ok(Outcome { table, max_residuals: vec![("max_dev_from_1".into(), d)], checks })
}

/// The acceptance criteria with this config's seed and knobs. Timings are
/// left out of the table so that it stays reproducible.
fn selftest(cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    let reports = run_all(&cfg.settings());
    let mut table = Table::new(["criterion", "name", "check", "measured", "tolerance", "passed"].map(String::from).to_vec());
    let mut checks = vec![];
    for r in &reports {
        if let Some(e) = &r.error {
            table.push_unchecked(vec![
                Cell::Int(r.id as u64),
                Cell::Text(r.name.into()),
                Cell::Text(format!("error: {e}")),
                Cell::Empty,
                Cell::Empty,
                Cell::Text("false".into()),
            ]);
            checks.push(CheckSummary { label: format!("{} {}", r.id, r.name), measured: f64::NAN, tolerance: 0.0, passed: false });
        }
        for c in &r.checks {
            table.push_unchecked(vec![
                Cell::Int(r.id as u64),
                Cell::Text(r.name.into()),
                Cell::Text(c.label.clone()),
                Cell::Num(c.measured),
                Cell::Num(c.tolerance),
                Cell::Text(c.passed().to_string()),
            ]);
            checks.push(CheckSummary::new(&format!("{} {}: {}", r.id, r.name, c.label), c.measured, c.tolerance));
        }
    }
    Ok(Outcome { table, max_residuals: vec![], checks })
}

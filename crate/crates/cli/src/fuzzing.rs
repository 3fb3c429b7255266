//! Entry points shared by the cargo-fuzz targets and the corpus replay test.
//! Each must return without panicking on any input.

use fanning_lab_core::finsler::PhasePoint;

use crate::config::{Experiment, MetricConfig, ScenarioConfig};

/// Parses a scenario and, when it validates, builds everything it names.
pub fn scenario_config(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ScenarioConfig::from_json(text) else { return };
    let _ = cfg.settings();
    match &cfg.experiment {
        Experiment::CurvatureGrid(g) => drop(g.metric.build("experiment.metric")),
        Experiment::InvariantsAlongOrbit(o) => drop(o.metric.build("experiment.metric")),
        Experiment::Submersion(s) => drop(s.scenario.build("experiment.scenario")),
        Experiment::Projective(p) => {
            if let Ok(m) = p.base.build("experiment.base") {
                let _ = p.theta.build("experiment.theta", m.n);
            }
        }
        Experiment::Katok(_) | Experiment::Selftest(_) => {}
    }
}

/// Parses a metric entry, builds it and evaluates it once.
pub fn metric_from_config(data: &[u8]) {
    let Ok(cfg) = serde_json::from_slice::<MetricConfig>(data) else { return };
    let Ok(m) = cfg.build("metric") else { return };
    let x: Vec<f64> = (0..m.n).map(|i| 0.1 * i as f64).collect();
    let y: Vec<f64> = (0..m.n).map(|i| 1.0 - 0.2 * i as f64).collect();
    if let Ok(v) = PhasePoint::new(x, y) {
        let _ = m.finsler(&v);
    }
}

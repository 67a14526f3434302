//! Experiment configuration files.
//!
//! ```json
//! {
//!   "space": {"kind": "sphere", "curvature": 1.0},
//!   "m": 1, "N": 256, "t_end": 0.5, "sample_every": 10, "seed": 7,
//!   "initial": {"kind": "perturbed_circle", "radius": 1.0, "amplitude": 0.1, "modes": 6},
//!   "guards": {"max_kappa": 1e6, "cfl": 0.02},
//!   "output_dir": "runs/s2",
//!   "solver": {"integrator": "semi_implicit", "dt_max": 1e-3},
//!   "checks": {"samples": 100, "grid": 64}
//! }
//! ```
//!
//! Only `space` is required. Validation collects every problem before
//! reporting, and unknown keys are errors at every level.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

use crate::curve::MIN_VERTICES;
use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::initial::InitialCurve;
use crate::space::{SpaceForm, SpaceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Guards {
    pub max_kappa: f64,
    pub cfl: f64,
}

impl Default for Guards {
    fn default() -> Self {
        let f = FlowConfig::default();
        Guards {
            max_kappa: f.max_kappa,
            cfl: f.cfl,
        }
    }
}

/// Step-control settings beyond the guards; any [`FlowConfig`] field other
/// than `m`, `t_end`, `sample_every`, `max_kappa` and `cfl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub integrator: crate::flow::Integrator,
    pub dt_initial: f64,
    pub dt_max: f64,
    pub growth: f64,
    pub max_halvings: u32,
    pub energy_tolerance: f64,
    pub h_fd: Option<f64>,
    pub norm_order: usize,
    pub snapshot_every: usize,
    pub max_steps: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let f = FlowConfig::default();
        SolverSettings {
            integrator: f.integrator,
            dt_initial: f.dt_initial,
            dt_max: f.dt_max,
            growth: f.growth,
            max_halvings: f.max_halvings,
            energy_tolerance: f.energy_tolerance,
            h_fd: f.h_fd,
            norm_order: f.norm_order,
            snapshot_every: f.snapshot_every,
            max_steps: f.max_steps,
        }
    }
}

/// Sample-family sizes for the inequality and identity checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSettings {
    /// Random fields per surface in the Sobolev suite.
    pub samples: usize,
    /// Grid size for the Sobolev suite.
    pub grid: usize,
    /// Grid ladder for the identity lab.
    pub grids: Vec<usize>,
    pub surfaces: Vec<crate::surface::SurfaceKind>,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            samples: 100,
            grid: 64,
            grids: vec![32, 64, 128],
            surfaces: vec![
                crate::surface::SurfaceKind::unit_sphere(),
                crate::surface::SurfaceKind::Ellipsoid { a: 1.0, b: 1.3, c: 0.7 },
                crate::surface::SurfaceKind::standard_torus(),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub space: SpaceForm,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub t_end: f64,
    pub sample_every: usize,
    pub seed: u64,
    pub initial: InitialCurve,
    pub guards: Guards,
    pub output_dir: Option<PathBuf>,
    pub solver: SolverSettings,
    pub checks: CheckSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            space: SpaceForm::euclidean(),
            m: 1,
            n: 256,
            t_end: 1.0,
            sample_every: 10,
            seed: 0,
            initial: InitialCurve::PerturbedCircle {
                radius: 1.0,
                amplitude: 0.1,
                modes: 6,
            },
            guards: Guards::default(),
            output_dir: None,
            solver: SolverSettings::default(),
            checks: CheckSettings::default(),
        }
    }
}

const KEYS: [&str; 11] = [
    "space",
    "m",
    "N",
    "t_end",
    "sample_every",
    "seed",
    "initial",
    "guards",
    "output_dir",
    "solver",
    "checks",
];

impl ExperimentConfig {
    /// Flow settings with the guards and solver section applied.
    pub fn flow_config(&self) -> FlowConfig {
        let s = &self.solver;
        FlowConfig {
            m: self.m,
            t_end: self.t_end,
            integrator: s.integrator,
            dt_initial: s.dt_initial,
            dt_max: s.dt_max,
            cfl: self.guards.cfl,
            growth: s.growth,
            max_halvings: s.max_halvings,
            energy_tolerance: s.energy_tolerance,
            max_kappa: self.guards.max_kappa,
            h_fd: s.h_fd,
            norm_order: s.norm_order,
            sample_every: self.sample_every,
            snapshot_every: s.snapshot_every,
            max_steps: s.max_steps,
        }
    }

    pub fn initial_curve(&self) -> Result<crate::curve::DiscreteCurve> {
        self.initial.build(&self.space, self.n, self.seed)
    }
}

fn field<T: DeserializeOwned>(obj: &Map<String, Value>, key: &str, errs: &mut Vec<String>) -> Option<T> {
    let v = obj.get(key)?;
    match serde_json::from_value::<T>(v.clone()) {
        Ok(t) => Some(t),
        Err(e) => {
            errs.push(format!("{key}: {e}"));
            None
        }
    }
}

/// Validates a JSON document, reporting every schema violation.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("invalid JSON: {e}")]))?;
    let Value::Object(obj) = value else {
        return Err(Error::Config(vec!["config must be a JSON object".into()]));
    };
    let mut errs = Vec::new();
    for key in obj.keys() {
        if !KEYS.contains(&key.as_str()) {
            errs.push(format!("unknown key `{key}`"));
        }
    }

    let mut cfg = ExperimentConfig::default();
    match field::<SpaceSpec>(&obj, "space", &mut errs) {
        Some(spec) => {
            if spec.curvature.is_some_and(|k| k > 1.0) {
                errs.push(format!(
                    "space: curvature {} exceeds 1; K̄ ≤ b² ≤ 1 is required",
                    spec.curvature.unwrap_or_default()
                ));
            } else {
                match spec.build() {
                    Ok(s) => cfg.space = s,
                    Err(e) => errs.push(format!("space: {e}")),
                }
            }
        }
        None if !obj.contains_key("space") => errs.push("missing key `space`".into()),
        None => {}
    }
    if let Some(m) = field::<usize>(&obj, "m", &mut errs) {
        if m < 1 {
            errs.push("m must be ≥ 1 for n=1".into());
        }
        cfg.m = m;
    }
    if let Some(n) = field::<usize>(&obj, "N", &mut errs) {
        if n < MIN_VERTICES {
            errs.push(format!("N must be ≥ {MIN_VERTICES}, got {n}"));
        }
        cfg.n = n;
    }
    if let Some(t) = field::<f64>(&obj, "t_end", &mut errs) {
        cfg.t_end = t;
    }
    if let Some(s) = field::<usize>(&obj, "sample_every", &mut errs) {
        cfg.sample_every = s;
    }
    if let Some(s) = field::<u64>(&obj, "seed", &mut errs) {
        cfg.seed = s;
    }
    if let Some(i) = field::<InitialCurve>(&obj, "initial", &mut errs) {
        cfg.initial = i;
    }
    if let Some(g) = field::<Guards>(&obj, "guards", &mut errs) {
        cfg.guards = g;
    }
    if let Some(d) = field::<PathBuf>(&obj, "output_dir", &mut errs) {
        cfg.output_dir = Some(d);
    }
    if let Some(s) = field::<SolverSettings>(&obj, "solver", &mut errs) {
        cfg.solver = s;
    }
    if let Some(c) = field::<CheckSettings>(&obj, "checks", &mut errs) {
        if c.grid < 8 || c.grids.iter().any(|&g| g < 8) {
            errs.push("checks: grid sizes must be ≥ 8".into());
        }
        cfg.checks = c;
    }
    if let Err(Error::Config(flow_errs)) = cfg.flow_config().validate() {
        for e in flow_errs {
            if !errs.contains(&e) {
                errs.push(e);
            }
        }
    }
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(errs))
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceKind;

    fn errors(text: &str) -> Vec<String> {
        match parse_config_str(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(r#"{"space": {"kind": "sphere"}}"#).unwrap();
        assert_eq!(c.space.kind(), SpaceKind::Sphere);
        assert_eq!(c.space.curvature(), 1.0);
        assert_eq!((c.m, c.n, c.sample_every, c.seed), (1, 256, 10, 0));
        assert_eq!(
            c.flow_config(),
            FlowConfig {
                t_end: 1.0,
                ..FlowConfig::default()
            }
        );
    }

    #[test]
    fn full_config() {
        let c = parse_config_str(
            r#"{"space": {"kind": "hyperbolic", "curvature": -0.5}, "m": 2, "N": 128, "t_end": 0.05,
                "sample_every": 5, "seed": 9, "initial": {"kind": "ellipse", "a": 0.6, "b": 0.4},
                "guards": {"max_kappa": 100.0, "cfl": 0.01}, "output_dir": "out",
                "solver": {"integrator": "explicit", "max_steps": 10}}"#,
        )
        .unwrap();
        let f = c.flow_config();
        assert_eq!((f.m, f.max_kappa, f.cfl, f.max_steps), (2, 100.0, 0.01, Some(10)));
        assert_eq!(f.integrator, crate::flow::Integrator::Explicit);
        assert_eq!(c.output_dir, Some(PathBuf::from("out")));
        assert_eq!(c.initial_curve().unwrap().len(), 128);
    }

    #[test]
    fn m_zero_is_rejected() {
        let e = errors(r#"{"space": {"kind": "euclidean"}, "m": 0}"#);
        assert!(e.iter().any(|s| s == "m must be ≥ 1 for n=1"), "{e:?}");
    }

    #[test]
    fn sphere_curvature_above_one_is_rejected() {
        let e = errors(r#"{"space": {"kind": "sphere", "curvature": 2.0}}"#);
        assert!(e.iter().any(|s| s.contains("K̄ ≤ b² ≤ 1")), "{e:?}");
    }

    #[test]
    fn every_violation_is_listed() {
        let e = errors(
            r#"{"space": {"kind": "sphere", "curvature": 2.0}, "m": 0, "N": 4, "colour": 1,
                "guards": {"max_kappa": 1.0, "speed": 2}, "t_end": -1}"#,
        );
        assert!(e.iter().any(|s| s.contains("`colour`")), "{e:?}");
        assert!(
            e.iter().any(|s| s.starts_with("guards:") && s.contains("speed")),
            "{e:?}"
        );
        assert!(e.iter().any(|s| s.contains("N must be")), "{e:?}");
        assert!(e.iter().any(|s| s.contains("t_end")), "{e:?}");
        assert!(e.len() >= 5);
    }

    #[test]
    fn missing_space_and_bad_json() {
        assert!(errors("{}").iter().any(|s| s.contains("`space`")));
        assert!(matches!(parse_config_str("[1]"), Err(Error::Config(_))));
        assert!(matches!(parse_config_str("{"), Err(Error::Config(_))));
        assert!(matches!(
            parse_config(Path::new("/nonexistent/c.json")),
            Err(Error::Io(_))
        ));
    }
}

//! JSON experiment configuration and its validation.

use serde::{Deserialize, Serialize};

use crate::cylinder::ScanlineSpec;
use crate::error::{Error, Result};
use crate::ground::{GroundProcess, GroundSpec};
use crate::marks::{OrientationModel, OrientationSpec, RadiusModel, RadiusSpec};
use crate::quad::QuadSpec;
use crate::window::{Window, WindowSpec};

/// Version of the config and output layouts.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Lln,
    Variance,
    #[serde(rename = "coverage2pt")]
    Coverage2pt,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Lln => "lln",
            Mode::Variance => "variance",
            Mode::Coverage2pt => "coverage2pt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Area integration per realization.
    #[serde(default)]
    pub scanline: ScanlineSpec,
    /// Relative tolerance for the theoretical constants.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_gl_nodes")]
    pub gl_nodes: usize,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
}

fn default_rel_tol() -> f64 {
    QuadSpec::default().rel_tol
}

fn default_gl_nodes() -> usize {
    QuadSpec::default().gl_nodes
}

fn default_max_evals() -> usize {
    QuadSpec::default().max_evals
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            scanline: ScanlineSpec::default(),
            rel_tol: default_rel_tol(),
            gl_nodes: default_gl_nodes(),
            max_evals: default_max_evals(),
        }
    }
}

impl QuadratureConfig {
    pub fn quad_spec(&self) -> QuadSpec {
        QuadSpec {
            rel_tol: self.rel_tol,
            gl_nodes: self.gl_nodes,
            max_evals: self.max_evals,
            ..QuadSpec::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageConfig {
    /// Distances `‖x₂ − x₁‖`; the pair is centred at the origin.
    pub separations: Vec<f64>,
    /// Angle of `x₂ − x₁`.
    #[serde(default)]
    pub direction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gamma2Config {
    /// Defaults to `10³/λ`.
    #[serde(default)]
    pub half_length: Option<f64>,
    #[serde(default = "default_gamma2_reps")]
    pub reps: usize,
}

fn default_gamma2_reps() -> usize {
    10_000
}

impl Default for Gamma2Config {
    fn default() -> Self {
        Gamma2Config {
            half_length: None,
            reps: default_gamma2_reps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ground: GroundSpec,
    #[serde(rename = "F")]
    pub radius: RadiusSpec,
    #[serde(rename = "G")]
    pub orientation: OrientationSpec,
    pub window: WindowSpec,
    #[serde(default)]
    pub rho_grid: Vec<f64>,
    pub reps: usize,
    pub master_seed: u64,
    pub mode: Mode,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageConfig>,
    #[serde(default)]
    pub gamma2: Gamma2Config,
    /// Worker threads; defaults to the number of logical cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

/// The validated, constructed models of a configuration.
#[derive(Debug, Clone)]
pub struct Model {
    pub ground: GroundProcess,
    pub radius: RadiusModel,
    pub orientation: OrientationModel,
    pub window: Window,
    pub quad: QuadSpec,
    pub scanline: ScanlineSpec,
}

impl ExperimentConfig {
    /// Parses a config document. Also accepts a JSON results file, whose
    /// `config` member is used, and a CSV results file, whose `# config:`
    /// header line is used.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let body = if text.trim_start().starts_with('#') {
            text.lines()
                .find_map(|l| l.strip_prefix("# config:"))
                .ok_or_else(|| Error::invalid("config", "results header has no `# config:` line"))?
        } else {
            text
        };
        let value: serde_json::Value =
            serde_json::from_str(body).map_err(|e| Error::invalid("config", e.to_string()))?;
        let value = match value {
            serde_json::Value::Object(mut m) if m.contains_key("records") && m.contains_key("config") => {
                m.remove("config").expect("checked")
            }
            v => v,
        };
        serde_json::from_value(value).map_err(|e| Error::invalid("config", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Builds every model, checking the invariants of the selected mode.
    pub fn validate(&self) -> Result<Model> {
        let ground = self.ground.build()?;
        let radius = self.radius.build()?;
        let orientation = self.orientation.build()?;
        let window = self.window.build()?;
        self.quadrature.scanline.validate()?;
        let q = &self.quadrature;
        if !(q.rel_tol.is_finite() && q.rel_tol > 0.0) {
            return Err(Error::invalid("quadrature.rel_tol", "must be finite and positive"));
        }
        if q.gl_nodes < 2 || q.gl_nodes > 4096 {
            return Err(Error::invalid("quadrature.gl_nodes", "must lie in [2, 4096]"));
        }
        if q.max_evals < 30 {
            return Err(Error::invalid("quadrature.max_evals", "must be at least 30"));
        }
        if self.reps < 2 {
            return Err(Error::invalid("reps", "must be at least 2"));
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(Error::invalid("threads", "must be at least 1"));
            }
        }
        if let Some(w) = self.gamma2.half_length {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid("gamma2.half_length", "must be finite and positive"));
            }
        }
        match self.mode {
            Mode::Lln | Mode::Variance => {
                if self.rho_grid.is_empty() {
                    return Err(Error::invalid("rho_grid", "must not be empty"));
                }
                if self.rho_grid.iter().any(|r| !(r.is_finite() && *r >= 1.0)) {
                    return Err(Error::invalid("rho_grid", "values must be finite and at least 1"));
                }
                if self.rho_grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invalid("rho_grid", "must be strictly ascending"));
                }
                if !orientation.is_continuous() {
                    return Err(Error::invalid("G", "lln and variance modes need a continuous distribution"));
                }
            }
            Mode::Coverage2pt => {
                if !ground.is_poisson() {
                    return Err(Error::invalid("ground.model", "coverage2pt needs a Poisson ground process"));
                }
                let cov = self
                    .coverage
                    .as_ref()
                    .ok_or_else(|| Error::invalid("coverage", "required in coverage2pt mode"))?;
                if cov.separations.is_empty() {
                    return Err(Error::invalid("coverage.separations", "must not be empty"));
                }
                if cov.separations.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                    return Err(Error::invalid("coverage.separations", "values must be finite and non-negative"));
                }
                if !cov.direction.is_finite() {
                    return Err(Error::invalid("coverage.direction", "must be finite"));
                }
            }
        }
        Ok(Model {
            ground,
            radius,
            orientation,
            window,
            quad: q.quad_spec(),
            scanline: q.scanline,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "ground": {"model": "poisson", "lambda": 1.0},
        "F": {"family": "deterministic", "r": 0.25},
        "G": {"family": "uniform"},
        "window": {"kind": "disk", "radius": 1.0},
        "rho_grid": [5, 10],
        "reps": 10,
        "master_seed": 7,
        "mode": "lln"
    }"#;

    fn with(key: &str, value: serde_json::Value) -> Result<Model> {
        let mut v: serde_json::Value = serde_json::from_str(BASE).unwrap();
        v[key] = value;
        ExperimentConfig::from_json_str(&v.to_string())?.validate()
    }

    fn field_of(r: Result<Model>) -> String {
        match r {
            Err(Error::Invalid { field, .. }) => field,
            other => panic!("expected an invalid-field error, got {other:?}"),
        }
    }

    #[test]
    fn base_config_is_valid_and_round_trips() {
        let c = ExperimentConfig::from_json_str(BASE).unwrap();
        c.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json_str(&c.to_json()).unwrap(), c);
        let csv = format!("# schema: 1\n# config: {}\nmode,rho\n", c.to_json());
        assert_eq!(ExperimentConfig::from_json_str(&csv).unwrap(), c);
        let json = format!("{{\"config\": {}, \"records\": []}}", c.to_json());
        assert_eq!(ExperimentConfig::from_json_str(&json).unwrap(), c);
    }

    #[test]
    fn errors_name_fields() {
        use serde_json::json;
        assert_eq!(field_of(with("rho_grid", json!([10, 5]))), "rho_grid");
        assert_eq!(field_of(with("rho_grid", json!([0.5]))), "rho_grid");
        assert_eq!(field_of(with("reps", json!(1))), "reps");
        assert_eq!(field_of(with("ground", json!({"model": "poisson", "lambda": -1.0}))), "ground.lambda");
        assert_eq!(
            field_of(with("G", json!({"family": "discrete", "values": [0.1], "weights": [1.0]}))),
            "G"
        );
        assert_eq!(field_of(with("mode", json!("coverage2pt"))), "coverage");
        assert_eq!(field_of(with("window", json!({"kind": "disk", "radius": 0.0}))), "window.radius");
        let err = ExperimentConfig::from_json_str(r#"{"ground": 1}"#).unwrap_err();
        assert!(matches!(err, Error::Invalid { .. }));
    }
}

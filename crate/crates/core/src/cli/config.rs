//! TOML experiment description.
//!
//! ```toml
//! [system]
//! velocities = [1.0, 2.0]
//! coupling = [[0.2, 0.3], [0.1, 0.4]]
//!
//! [system.delay]                     # optional; replaces the coupling law
//! atoms = [{ theta = -1.0, weight = [[0.5, 0.0], [0.0, 0.5]] }]
//!
//! [initial]
//! kind = "constant"
//! values = [1.0, 1.0]
//!
//! [run]
//! t_final = 20.0
//! dt = 0.01
//! ```

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::model::{DelayMeasure, Field, HistoryBuffer, SystemSpec};

/// Configuration problem with the offending field or the parser position.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    #[default]
    Hyperbolic,
    Heat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub theta: f64,
    pub weight: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub breakpoints: Vec<f64>,
    pub values: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfig {
    #[serde(default)]
    pub atoms: Vec<AtomConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatConfig {
    pub k: f64,
    #[serde(default = "one")]
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default)]
    pub kind: SystemKind,
    #[serde(default)]
    pub velocities: Vec<f64>,
    #[serde(default)]
    pub coupling: Vec<Vec<f64>>,
    /// Require nonnegative coupling and delay weights.
    #[serde(default = "yes")]
    pub positivity: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<DelayConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat: Option<HeatConfig>,
}

/// Per-component data: a constant, polynomial coefficients (lowest degree
/// first) or uniformly spaced samples.
///
/// For `initial` the variable is `x ∈ [0, 1]`. For `history` it is the lag
/// `θ ∈ [-1, 0]` and the profile is constant in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    Constant { values: Vec<f64> },
    Polynomial { coefficients: Vec<Vec<f64>> },
    Samples { samples: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub t_final: f64,
    pub dt: f64,
    pub m_cells: usize,
    pub cfl: f64,
    pub output_stride: usize,
    /// Every this many emitted rows a snapshot file is written; 0 disables.
    pub snapshot_stride: usize,
    /// Also run the finite-volume solver.
    pub fv: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_final: 20.0,
            dt: 0.01,
            m_cells: 200,
            cfl: 0.5,
            output_stride: 1,
            snapshot_stride: 0,
            fv: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    #[serde(default = "default_samples")]
    pub samples_per_side: usize,
}

fn default_samples() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub root_boxes: Vec<BoxConfig>,
    pub window_fraction: f64,
    pub tol_marginal: f64,
    /// Right edge of the abscissa search.
    pub re_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_cap: Option<f64>,
    pub abscissa_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            root_boxes: Vec::new(),
            window_fraction: crate::analysis::DEFAULT_WINDOW_FRACTION,
            tol_marginal: crate::model::DEFAULT_TOL_MARGINAL,
            re_max: 5.0,
            im_cap: None,
            abscissa_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub random_specs: usize,
    pub lambdas: Vec<f64>,
    pub resolvent_cells: usize,
    pub positivity_specs: usize,
    pub convergence_cells: Vec<usize>,
    pub convergence_time: f64,
    pub min_slope: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            random_specs: 20,
            lambdas: vec![0.5, 1.0, 2.0, 5.0],
            resolvent_cells: 64,
            positivity_specs: 10,
            convergence_cells: vec![50, 100, 200, 400],
            convergence_time: 5.0,
            min_slope: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<DataConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<DataConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn matrix(field: &str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>, ConfigError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(ConfigError::field(
            field,
            format!("expected a {n}x{n} matrix"),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::field(
            field,
            format!("must be positive, got {v}"),
        ))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn is_heat(&self) -> bool {
        self.system.kind == SystemKind::Heat
    }

    /// Field-level checks beyond what the schema enforces.
    pub fn check(&self) -> Result<(), ConfigError> {
        let run = &self.run;
        positive("run.t_final", run.t_final)?;
        positive("run.dt", run.dt)?;
        positive("run.cfl", run.cfl)?;
        if run.m_cells < 4 {
            return Err(ConfigError::field("run.m_cells", "must be at least 4"));
        }
        if run.output_stride == 0 {
            return Err(ConfigError::field(
                "run.output_stride",
                "must be at least 1",
            ));
        }
        let a = &self.analysis;
        if !(a.window_fraction > 0.0 && a.window_fraction < 1.0) {
            return Err(ConfigError::field(
                "analysis.window_fraction",
                "must lie in (0, 1)",
            ));
        }
        positive("analysis.tol_marginal", a.tol_marginal)?;
        positive("analysis.abscissa_tol", a.abscissa_tol)?;
        if self.is_heat() {
            let heat = self.system.heat.as_ref().ok_or_else(|| {
                ConfigError::field("system.heat", "required when kind = \"heat\"")
            })?;
            if !(heat.k >= 0.0) {
                return Err(ConfigError::field("system.heat.k", "must be nonnegative"));
            }
            positive("system.heat.sigma", heat.sigma)?;
            return Ok(());
        }
        let spec = self.spec()?;
        let validation = crate::model::validate_system(&spec);
        if let Some(v) = validation.violations.first() {
            return Err(ConfigError::field(
                format!("system.{}", v.field),
                v.message.clone(),
            ));
        }
        Ok(())
    }

    /// The transport system described by `[system]`.
    pub fn spec(&self) -> Result<SystemSpec, ConfigError> {
        let sys = &self.system;
        let n = sys.velocities.len();
        if n == 0 {
            return Err(ConfigError::field(
                "system.velocities",
                "at least one component required",
            ));
        }
        let coupling = if sys.coupling.is_empty() {
            DMatrix::zeros(n, n)
        } else {
            matrix("system.coupling", &sys.coupling, n)?
        };
        let mut spec = SystemSpec::new(sys.velocities.clone(), coupling);
        if let Some(delay) = &sys.delay {
            let mut mu = DelayMeasure::empty(n);
            for (j, atom) in delay.atoms.iter().enumerate() {
                let w = matrix(&format!("system.delay.atoms[{j}].weight"), &atom.weight, n)?;
                mu = mu.with_atom(atom.theta, w);
            }
            if let Some(d) = &delay.density {
                let values = d
                    .values
                    .iter()
                    .enumerate()
                    .map(|(p, v)| matrix(&format!("system.delay.density.values[{p}]"), v, n))
                    .collect::<Result<Vec<_>, _>>()?;
                mu = mu.with_density(d.breakpoints.clone(), values);
            }
            spec.delay = Some(mu);
        }
        Ok(spec)
    }

    /// Initial field on `m` cells; defaults to all ones.
    pub fn initial_field(&self, m: usize) -> Result<Field, ConfigError> {
        let n = self.system.velocities.len();
        match &self.initial {
            None => Ok(Field::constant(m, &vec![1.0; n])),
            Some(data) => {
                let eval = data.evaluator("initial", n, 0.0, 1.0)?;
                Ok(Field::from_fn(m, n, |x, i| eval(i, x)))
            }
        }
    }

    /// History on the lag grid `dt`, constant in `x`; defaults to holding the
    /// initial field for all lags.
    pub fn history(&self, m: usize, dt: f64) -> Result<HistoryBuffer, ConfigError> {
        let n = self.system.velocities.len();
        let wrap = |e: crate::Error| ConfigError::field("history", e.to_string());
        match &self.history {
            None => {
                let y0 = self.initial_field(m)?;
                HistoryBuffer::constant(dt, 0.0, &y0).map_err(wrap)
            }
            Some(data) => {
                let eval = data.evaluator("history", n, -1.0, 0.0)?;
                HistoryBuffer::from_fn(dt, 0.0, |theta| {
                    let theta = theta.max(-1.0);
                    Field::from_fn(m, n, |_, i| eval(i, theta))
                })
                .map_err(wrap)
            }
        }
    }
}

impl DataConfig {
    /// Returns `f(component, s)` for `s ∈ [lo, hi]`.
    fn evaluator(
        &self,
        name: &str,
        n: usize,
        lo: f64,
        hi: f64,
    ) -> Result<Box<dyn Fn(usize, f64) -> f64 + '_>, ConfigError> {
        match self {
            DataConfig::Constant { values } => {
                if values.len() != n {
                    return Err(ConfigError::field(
                        format!("{name}.values"),
                        format!("expected {n} values"),
                    ));
                }
                Ok(Box::new(move |i, _| values[i]))
            }
            DataConfig::Polynomial { coefficients } => {
                if coefficients.len() != n || coefficients.iter().any(|c| c.is_empty()) {
                    return Err(ConfigError::field(
                        format!("{name}.coefficients"),
                        format!("expected {n} non-empty coefficient lists"),
                    ));
                }
                Ok(Box::new(move |i, s| {
                    coefficients[i].iter().rev().fold(0.0, |acc, c| acc * s + c)
                }))
            }
            DataConfig::Samples { samples } => {
                if samples.len() != n || samples.iter().any(|c| c.len() < 2) {
                    return Err(ConfigError::field(
                        format!("{name}.samples"),
                        format!("expected {n} lists of at least two samples"),
                    ));
                }
                Ok(Box::new(move |i, s| {
                    let col = &samples[i];
                    let p = ((s - lo) / (hi - lo)).clamp(0.0, 1.0) * (col.len() - 1) as f64;
                    let j = (p.floor() as usize).min(col.len() - 2);
                    let w = p - j as f64;
                    (1.0 - w) * col[j] + w * col[j + 1]
                }))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[system]
velocities = [1.0, 2.0]
coupling = [[0.2, 0.3], [0.1, 0.4]]

[system.delay]
atoms = [{ theta = -1.0, weight = [[0.5, 0.0], [0.0, 0.5]] }]
density = { breakpoints = [-0.5, -0.1], values = [[[0.1, 0.0], [0.0, 0.1]]] }

[initial]
kind = "polynomial"
coefficients = [[1.0, 0.5], [2.0]]

[history]
kind = "samples"
samples = [[0.0, 1.0], [1.0, 1.0, 2.0]]

[run]
t_final = 4.0
dt = 0.01

[analysis]
root_boxes = [{ re_min = -1.0, re_max = 0.0, im_min = -1.0, im_max = 1.0 }]
"#;

    #[test]
    fn parse_full_config() {
        let cfg = ExperimentConfig::parse(FULL).unwrap();
        let spec = cfg.spec().unwrap();
        assert_eq!(spec.n(), 2);
        let mu = spec.delay.unwrap();
        assert_eq!(mu.atoms.len(), 1);
        assert_eq!(cfg.run.m_cells, 200);
        let y0 = cfg.initial_field(10).unwrap();
        assert!((y0.get(10, 0) - 1.5).abs() < 1e-15);
        let h = cfg.history(10, 0.1).unwrap();
        assert!((h.query(-0.5).unwrap().get(3, 0) - 0.5).abs() < 1e-12);
        assert!((h.query(0.0).unwrap().get(3, 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_is_identical() {
        let cfg = ExperimentConfig::parse(FULL).unwrap();
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = "[system]\nvelocities = [0.0]\ncoupling = [[0.5]]\n";
        let err = ExperimentConfig::parse(bad).unwrap_err().to_string();
        assert!(err.contains("system.velocities[0]"), "{err}");

        let shape = "[system]\nvelocities = [1.0]\ncoupling = [[0.5, 1.0]]\n";
        let err = ExperimentConfig::parse(shape).unwrap_err().to_string();
        assert!(err.contains("system.coupling"), "{err}");

        let syntax = "[system]\nvelocities = [1.0\n";
        let err = ExperimentConfig::parse(syntax).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");

        let unknown = "[system]\nvelocities = [1.0]\nvelocity = 2\n";
        assert!(ExperimentConfig::parse(unknown).is_err());
    }

    #[test]
    fn heat_requires_parameters() {
        assert!(ExperimentConfig::parse("[system]\nkind = \"heat\"\n").is_err());
        let cfg =
            ExperimentConfig::parse("[system]\nkind = \"heat\"\nheat = { k = 0.1 }\n").unwrap();
        assert_eq!(cfg.system.heat.unwrap().sigma, 1.0);
    }
}

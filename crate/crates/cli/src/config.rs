//! Experiment configuration: TOML sections, `--set` overrides, and the
//! canonical single-line echo written into every CSV header.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use relex_core::diagnostics::{DecaySetup, Interval};
use relex_core::harness::{DiscretizationSetup, DEFAULT_STRIDE, REFINEMENT};
use relex_core::objective::{benchmark_centers, benchmark_weights};
use relex_core::{
    Algorithm, Error, Formulation, GaussianMixtureSpec, InitSpec, ObjectiveSpec, Result, SimConfig,
    DEFAULT_SEED,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub objective: ObjectiveSection,
    pub dynamics: DynamicsSection,
    pub run: RunSection,
    pub sweep: SweepSection,
    pub diagnostics: DiagnosticsSection,
    pub discretization: DiscretizationSection,
    pub gradcheck: GradcheckSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectiveSection {
    /// `mixture`, `double-well` or `quadratic`.
    pub kind: String,
    pub kappa: f64,
    pub centers: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub confinement: f64,
    /// Dimension and curvature of the quadratic.
    pub dimension: usize,
    pub curvature: f64,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        Self {
            kind: "mixture".into(),
            kappa: 0.1,
            centers: benchmark_centers(),
            weights: benchmark_weights(),
            confinement: 0.0,
            dimension: 2,
            curvature: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub tau1: f64,
    pub tau2: f64,
    pub intensity: f64,
    pub eta: f64,
    pub steps: u64,
    /// `temperature-swap` or `position-swap`.
    pub formulation: String,
    /// `point` or `uniform-box`.
    pub init: String,
    pub init_point: Vec<f64>,
    pub init_lower: f64,
    pub init_upper: f64,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            tau1: 0.01,
            tau2: 1.0,
            intensity: 1.0,
            eta: 0.01,
            steps: 10_000,
            formulation: "temperature-swap".into(),
            init: "point".into(),
            init_point: vec![2.0, 2.0],
            init_lower: -1.0,
            init_upper: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub replicates: usize,
    pub stride: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            replicates: 20,
            stride: DEFAULT_STRIDE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub kappas: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            kappas: vec![0.05, 0.1, 0.2, 0.3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Swap intensities compared in the χ² decay experiment.
    pub intensities: Vec<f64>,
    pub ensemble: usize,
    pub sample_times: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub resolution: usize,
    pub bootstrap: usize,
    /// Starting positions of the low- and high-temperature particles.
    pub init_pair: [f64; 2],
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            intensities: vec![0.0, 5.0],
            ensemble: 2000,
            sample_times: vec![0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0],
            lower: -3.0,
            upper: 3.0,
            resolution: 12,
            bootstrap: 100,
            init_pair: [-1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationSection {
    pub etas: Vec<f64>,
    pub horizon: f64,
    pub ensemble: usize,
    pub refinement: u64,
    pub init_pair: [f64; 2],
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self {
            etas: vec![0.04, 0.02, 0.01, 0.005],
            horizon: 1.0,
            ensemble: 500,
            refinement: REFINEMENT,
            init_pair: [-1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradcheckSection {
    pub points: usize,
    pub step: f64,
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
}

impl Default for GradcheckSection {
    fn default() -> Self {
        Self {
            points: 100,
            step: 1e-6,
            lower: -1.0,
            upper: 5.0,
            tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "results".into(),
        }
    }
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config_error)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn to_table(&self) -> Table {
        Table::try_from(self).expect("config serializes to a table")
    }

    fn from_table(table: Table) -> Result<Self> {
        Value::Table(table).try_into().map_err(config_error)
    }

    /// Applies one `KEY=VALUE` override. `KEY` is `section.key`, or a bare
    /// key when exactly one section has it. `VALUE` is a TOML value; words
    /// that do not parse as one are taken as strings.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not KEY=VALUE")))?;
        let key = key.trim();
        let mut table = self.to_table();
        let (section, field) = match key.split_once('.') {
            Some((s, f)) => (s.to_string(), f.to_string()),
            None => {
                let owners: Vec<&String> = table
                    .iter()
                    .filter(|(_, v)| v.as_table().is_some_and(|t| t.contains_key(key)))
                    .map(|(s, _)| s)
                    .collect();
                match owners.as_slice() {
                    [one] => ((*one).clone(), key.to_string()),
                    [] => return Err(Error::Config(format!("unknown key {key:?}"))),
                    many => {
                        let options: Vec<String> =
                            many.iter().map(|s| format!("{s}.{key}")).collect();
                        return Err(Error::Config(format!(
                            "key {key:?} is ambiguous; use one of {}",
                            options.join(", ")
                        )));
                    }
                }
            }
        };
        let entries = table
            .get_mut(&section)
            .and_then(Value::as_table_mut)
            .ok_or_else(|| Error::Config(format!("unknown section {section:?} in {key:?}")))?;
        if !entries.contains_key(&field) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        entries.insert(field, parse_value(raw.trim()));
        *self =
            Self::from_table(table).map_err(|e| Error::Config(format!("override {key:?}: {e}")))?;
        Ok(())
    }

    /// Deterministic single-line rendering: every `section.key=value`,
    /// sorted by key and separated by spaces.
    pub fn canonical(&self) -> String {
        let mut tokens = Vec::new();
        for (section, entries) in self.to_table() {
            if let Value::Table(entries) = entries {
                for (key, value) in entries {
                    tokens.push(format!("{section}.{key}={}", render(&value)));
                }
            }
        }
        tokens.sort();
        tokens.join(" ")
    }

    /// Parses a string produced by [`Config::canonical`].
    pub fn from_canonical(line: &str) -> Result<Self> {
        let mut config = Config::default();
        for token in line.split_whitespace() {
            config.apply_override(token)?;
        }
        Ok(config)
    }

    pub fn objective_spec(&self) -> Result<ObjectiveSpec> {
        let o = &self.objective;
        match o.kind.as_str() {
            "mixture" => Ok(ObjectiveSpec::Mixture(GaussianMixtureSpec {
                centers: o.centers.clone(),
                weights: o.weights.clone(),
                kappa: o.kappa,
                confinement: o.confinement,
            })),
            "double-well" => Ok(ObjectiveSpec::DoubleWell),
            "quadratic" => Ok(ObjectiveSpec::Quadratic {
                dimension: o.dimension,
                curvature: o.curvature,
            }),
            other => Err(Error::Config(format!(
                "unknown objective kind {other:?} (expected mixture, double-well or quadratic)"
            ))),
        }
    }

    pub fn formulation(&self) -> Result<Formulation> {
        match self.dynamics.formulation.as_str() {
            "temperature-swap" => Ok(Formulation::TemperatureSwap),
            "position-swap" => Ok(Formulation::PositionSwap),
            other => Err(Error::Config(format!(
                "unknown formulation {other:?} (expected temperature-swap or position-swap)"
            ))),
        }
    }

    pub fn init(&self) -> Result<InitSpec> {
        let d = &self.dynamics;
        match d.init.as_str() {
            "point" => Ok(InitSpec::Point(d.init_point.clone())),
            "uniform-box" => Ok(InitSpec::UniformBox {
                lower: d.init_lower,
                upper: d.init_upper,
            }),
            other => Err(Error::Config(format!(
                "unknown init {other:?} (expected point or uniform-box)"
            ))),
        }
    }

    /// Simulation settings for one algorithm, validated.
    pub fn sim_config(&self, algorithm: Algorithm) -> Result<SimConfig> {
        let d = &self.dynamics;
        let config = SimConfig {
            objective: self.objective_spec()?,
            tau1: d.tau1,
            tau2: d.tau2,
            intensity: d.intensity,
            eta: d.eta,
            steps: d.steps,
            replicates: self.run.replicates,
            seed: self.run.seed,
            init: self.init()?,
            algorithm,
            formulation: self.formulation()?,
            stride: self.run.stride,
        };
        config.validate()?;
        Ok(config)
    }

    /// χ² decay settings for swap intensity `intensity`.
    pub fn decay_setup(&self, intensity: f64) -> Result<DecaySetup> {
        let g = &self.diagnostics;
        Ok(DecaySetup {
            tau1: self.dynamics.tau1,
            tau2: self.dynamics.tau2,
            intensity,
            eta: self.dynamics.eta,
            ensemble: g.ensemble,
            sample_times: g.sample_times.clone(),
            axis: Interval::new(g.lower, g.upper)?,
            resolution: g.resolution,
            seed: self.run.seed,
            init: g.init_pair,
            bootstrap: g.bootstrap,
        })
    }

    pub fn discretization_setup(&self) -> DiscretizationSetup {
        let s = &self.discretization;
        DiscretizationSetup {
            tau1: self.dynamics.tau1,
            tau2: self.dynamics.tau2,
            intensity: self.dynamics.intensity,
            etas: s.etas.clone(),
            horizon: s.horizon,
            ensemble: s.ensemble,
            seed: self.run.seed,
            init: [vec![s.init_pair[0]], vec![s.init_pair[1]]],
            refinement: s.refinement,
        }
    }
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Compact rendering without spaces; floats use the shortest representation
/// that parses back to the same value.
fn render(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => format!("{f:?}"),
        Value::Boolean(b) => b.to_string(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(render).collect();
            format!("[{}]", parts.join(","))
        }
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_canonical_form() {
        let c = Config::default();
        assert_eq!(Config::from_canonical(&c.canonical()).unwrap(), c);
    }

    #[test]
    fn canonical_is_sorted_and_single_line() {
        let s = Config::default().canonical();
        assert!(!s.contains('\n'));
        let keys: Vec<&str> = s.split(' ').map(|t| t.split('=').next().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(s.contains("dynamics.eta=0.01"));
        assert!(s.contains("objective.kind=mixture"));
    }

    #[test]
    fn bare_and_qualified_overrides() {
        let mut c = Config::default();
        c.apply_override("eta=0.005").unwrap();
        assert_eq!(c.dynamics.eta, 0.005);
        c.apply_override("run.seed=7").unwrap();
        assert_eq!(c.run.seed, 7);
        c.apply_override("kind=double-well").unwrap();
        assert_eq!(c.objective.kind, "double-well");
        c.apply_override("sample_times=[0.5, 1, 2]").unwrap();
        assert_eq!(c.diagnostics.sample_times, vec![0.5, 1.0, 2.0]);
        c.apply_override("eta=1").unwrap();
        assert_eq!(c.dynamics.eta, 1.0);
    }

    #[test]
    fn override_errors_name_the_key() {
        let mut c = Config::default();
        let msg = c.apply_override("ensemble=10").unwrap_err().to_string();
        assert!(msg.contains("diagnostics.ensemble") && msg.contains("discretization.ensemble"));
        assert!(c
            .apply_override("nonsense=1")
            .unwrap_err()
            .to_string()
            .contains("nonsense"));
        assert!(c.apply_override("dynamics.steps=fast").is_err());
        assert!(c.apply_override("steps").is_err());
        assert_eq!(c, Config::default());
    }

    #[test]
    fn unknown_file_keys_are_errors() {
        assert!(Config::from_toml("[dynamics]\netaa = 0.1\n").is_err());
        assert!(Config::from_toml("[dynamic]\neta = 0.1\n").is_err());
        let c = Config::from_toml("[dynamics]\neta = 0.5\n").unwrap();
        assert_eq!(c.dynamics.eta, 0.5);
        assert_eq!(c.dynamics.tau1, 0.01);
    }
}

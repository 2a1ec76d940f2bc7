//! Run configuration: the strict JSON schema consumed by the command-line
//! tool, and its translation into a ready-to-solve bundle.
//!
//! Parsing is deliberately unforgiving. Unknown keys are rejected, every
//! rate is checked, and errors carry either a line/column position (syntax)
//! or a field path (schema and value problems), so a typo in a sweep script
//! fails loudly instead of silently running defaults.

use serde::{Deserialize, Serialize};
use serde_json::error::Category;
use thiserror::Error;

use crate::model::{
    CoherentCoupling, Configuration, IncoherentChannel, Liouvillian, RateModel, SiteIndex,
    StateSpace,
};
use crate::observables::{CollectorSpec, DetectorPartition};
use crate::scenarios::{
    double_dot_model, literal_liouvillian, single_dot_model, AssemblyMode, FermiRegime,
    ScenarioParams,
};
use crate::solver::{OutputGrid, SolverOptions};

/// Which device a run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    SingleDot,
    DoubleDot,
    /// A device described inline by [`CustomModelSpec`].
    Custom,
}

/// Integrator settings and the output grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub grid_points: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            t_end: 10.0,
            grid_points: 201,
        }
    }
}

impl SolverSpec {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: None,
            grid: OutputGrid::Uniform(self.grid_points),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Where and how tabular results are written. No path means stdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// A coherent hop in an inline model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub a: usize,
    pub b: usize,
    pub omega: f64,
}

/// A reservoir transition in an inline model. Site and direction are
/// inferred from the two configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

/// Inline device description for the `custom` scenario.
///
/// `states` lists each basis configuration as 0/1 site occupancies.
/// `detector_collector` and `system_collector` pair state indices with the
/// escape rate that reaches the respective drain. `coherence_pair` selects
/// which off-diagonal magnitude the output reports: indices refer to the
/// reduced states when `detector_site` is given, and to full states
/// otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModelSpec {
    pub sites: usize,
    pub states: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingSpec>,
    pub channels: Vec<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub detector_collector: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub system_collector: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_site: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_pair: Option<(usize, usize)>,
    #[serde(default)]
    pub initial_state: usize,
}

/// One complete run description, as read from a JSON model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub scenario: Scenario,
    #[serde(default)]
    pub params: ScenarioParams,
    #[serde(default)]
    pub regime: FermiRegime,
    #[serde(default)]
    pub mode: AssemblyMode,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<CustomModelSpec>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line} column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid value at {path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

/// serde_json appends " at line L column C" to its messages; the structured
/// error already carries the position, so drop the suffix.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(idx) => message[..idx].to_string(),
        None => message.to_string(),
    }
}

fn syntax_error(err: &serde_json::Error) -> ConfigError {
    ConfigError::Syntax {
        line: err.line(),
        column: err.column(),
        message: strip_position(&err.to_string()),
    }
}

fn deserialize_error(err: serde_path_to_error::Error<serde_json::Error>) -> ConfigError {
    let inner = err.inner();
    match inner.classify() {
        Category::Data => ConfigError::Schema {
            path: err.path().to_string(),
            message: strip_position(&inner.to_string()),
        },
        _ => syntax_error(inner),
    }
}

/// Parse a model file. The schema is strict: unknown keys, out-of-range
/// values, and inconsistent combinations (a preset with an inline model,
/// literal mode for a device that has no transcription) are all rejected.
pub fn parse_run_spec(text: &str) -> Result<RunSpec, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let spec: RunSpec = serde_path_to_error::deserialize(&mut de).map_err(deserialize_error)?;
    de.end().map_err(|e| syntax_error(&e))?;
    spec.validate()?;
    Ok(spec)
}

impl RunSpec {
    /// Check everything that JSON well-formedness cannot: rate signs, solver
    /// settings, scenario/model consistency, and the inline model itself.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let report = self.params.violations();
        if let Some(v) = report.violations.first() {
            return Err(invalid(format!("params.{}", v.location), v.message.clone()));
        }

        let s = &self.solver;
        if !(s.rel_tol.is_finite() && s.rel_tol > 0.0) {
            return Err(invalid(
                "solver.rel_tol",
                format!("must be finite and > 0 (got {})", s.rel_tol),
            ));
        }
        if !(s.abs_tol.is_finite() && s.abs_tol >= 0.0) {
            return Err(invalid(
                "solver.abs_tol",
                format!("must be finite and ≥ 0 (got {})", s.abs_tol),
            ));
        }
        if !(s.t_end.is_finite() && s.t_end >= 0.0) {
            return Err(invalid(
                "solver.t_end",
                format!("must be finite and ≥ 0 (got {})", s.t_end),
            ));
        }
        if s.grid_points < 2 {
            return Err(invalid(
                "solver.grid_points",
                format!("need at least 2 grid points (got {})", s.grid_points),
            ));
        }

        match self.scenario {
            Scenario::Custom => {
                if self.mode == AssemblyMode::Literal {
                    return Err(invalid(
                        "mode",
                        "literal mode exists only for the built-in presets",
                    ));
                }
                match &self.model {
                    Some(m) => {
                        m.build()?;
                    }
                    None => {
                        return Err(invalid(
                            "model",
                            "the custom scenario requires an inline model",
                        ))
                    }
                }
            }
            Scenario::SingleDot | Scenario::DoubleDot => {
                if self.model.is_some() {
                    return Err(invalid(
                        "model",
                        "only the custom scenario takes an inline model",
                    ));
                }
                if self.scenario == Scenario::DoubleDot
                    && self.mode == AssemblyMode::Literal
                    && self.regime == FermiRegime::Open
                {
                    return Err(invalid(
                        "mode",
                        "the open regime has no transcribed matrix; use generic mode",
                    ));
                }
            }
        }
        Ok(())
    }
}

struct CustomParts {
    model: RateModel,
    partition: Option<DetectorPartition>,
}

impl CustomModelSpec {
    fn build(&self) -> Result<CustomParts, ConfigError> {
        let at = |path: String, message: String| invalid(format!("model.{path}"), message);

        if self.sites == 0 {
            return Err(at("sites".into(), "need at least one site".into()));
        }
        for (i, bits) in self.states.iter().enumerate() {
            if bits.len() != self.sites {
                return Err(at(
                    format!("states[{i}]"),
                    format!("{} occupancies for {} sites", bits.len(), self.sites),
                ));
            }
            if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
                return Err(at(
                    format!("states[{i}]"),
                    format!("occupancies are 0 or 1 (got {bad})"),
                ));
            }
        }
        let states: Vec<Configuration> = self
            .states
            .iter()
            .map(|bits| Configuration::from_bits(bits))
            .collect();
        let space = match &self.labels {
            Some(labels) => StateSpace::with_labels(self.sites, states, labels.clone()),
            None => StateSpace::new(self.sites, states),
        };
        let n = space.len();
        let energies = match &self.energies {
            Some(e) => e.clone(),
            None => vec![0.0; n],
        };
        let couplings = self
            .couplings
            .iter()
            .map(|c| CoherentCoupling {
                a: c.a,
                b: c.b,
                omega: c.omega,
            })
            .collect();
        let mut channels = Vec::with_capacity(self.channels.len());
        for (i, c) in self.channels.iter().enumerate() {
            if c.from >= n || c.to >= n {
                return Err(at(
                    format!("channels[{i}]"),
                    format!("state index out of range (model has {n} states)"),
                ));
            }
            let ch = IncoherentChannel::between(&space, c.from, c.to, c.rate).map_err(|_| {
                at(
                    format!("channels[{i}]"),
                    "the two states must differ in exactly one site".into(),
                )
            })?;
            channels.push(ch);
        }
        let model = RateModel {
            space,
            energies,
            couplings,
            channels,
        };
        let report = model.validate();
        if let Some(v) = report.violations.first() {
            return Err(at(v.location.clone(), v.message.clone()));
        }

        for (name, entries) in [
            ("detector_collector", &self.detector_collector),
            ("system_collector", &self.system_collector),
        ] {
            for (k, &(state, rate)) in entries.iter().enumerate() {
                if state >= n {
                    return Err(at(
                        format!("{name}[{k}]"),
                        format!("state index {state} out of range (model has {n} states)"),
                    ));
                }
                if !(rate.is_finite() && rate >= 0.0) {
                    return Err(at(
                        format!("{name}[{k}]"),
                        format!("collector rate must be finite and ≥ 0 (got {rate})"),
                    ));
                }
            }
        }

        let partition = match self.detector_site {
            Some(site) => Some(
                DetectorPartition::by_site(&model.space, SiteIndex(site))
                    .map_err(|e| at("detector_site".into(), e.to_string()))?,
            ),
            None => None,
        };

        if self.initial_state >= n {
            return Err(at(
                "initial_state".into(),
                format!(
                    "state index {} out of range (model has {n} states)",
                    self.initial_state
                ),
            ));
        }
        if let Some((a, b)) = self.coherence_pair {
            if a == b {
                return Err(at(
                    "coherence_pair".into(),
                    "the two indices must differ".into(),
                ));
            }
            let (limit, kind) = match &partition {
                Some(p) => (p.n_reduced(), "reduced"),
                None => (n, "full"),
            };
            if a >= limit || b >= limit {
                return Err(at(
                    "coherence_pair".into(),
                    format!("{kind} state index out of range (limit {limit})"),
                ));
            }
        }

        Ok(CustomParts { model, partition })
    }
}

/// A parsed spec turned into solvable pieces: the generator, the initial
/// state index, both collectors, and the detector bookkeeping for reduced
/// observables.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub model: RateModel,
    pub liouvillian: Liouvillian,
    pub detector_collector: CollectorSpec,
    pub system_collector: CollectorSpec,
    pub partition: Option<DetectorPartition>,
    /// Pair whose coherence magnitude the output reports, in reduced indices
    /// when a partition exists, full indices otherwise.
    pub coherence_pair: Option<(usize, usize)>,
    pub initial_state: usize,
}

/// Resolve a validated spec into a [`PreparedRun`].
pub fn prepare(spec: &RunSpec) -> Result<PreparedRun, ConfigError> {
    spec.validate()?;
    match spec.scenario {
        Scenario::SingleDot | Scenario::DoubleDot => {
            let scenario = match spec.scenario {
                Scenario::SingleDot => single_dot_model(&spec.params),
                _ => double_dot_model(&spec.params, spec.regime),
            };
            let liouvillian = match spec.mode {
                AssemblyMode::Generic => scenario
                    .model
                    .liouvillian()
                    .expect("presets with validated params are well-formed"),
                AssemblyMode::Literal => {
                    let which = scenario
                        .literal
                        .expect("validate() rejected modes without a transcription");
                    literal_liouvillian(&spec.params, which)
                }
            };
            Ok(PreparedRun {
                model: scenario.model,
                liouvillian,
                detector_collector: scenario.detector_collector,
                system_collector: scenario.system_collector,
                partition: Some(scenario.partition),
                coherence_pair: scenario.reduced_pair,
                initial_state: scenario.initial_state,
            })
        }
        Scenario::Custom => {
            let m = spec
                .model
                .as_ref()
                .expect("validate() required an inline model");
            let parts = m.build()?;
            let liouvillian = parts
                .model
                .liouvillian()
                .expect("build() validated the model");
            Ok(PreparedRun {
                model: parts.model,
                liouvillian,
                detector_collector: CollectorSpec::new(m.detector_collector.clone()),
                system_collector: CollectorSpec::new(m.system_collector.clone()),
                partition: parts.partition,
                coherence_pair: m.coherence_pair,
                initial_state: m.initial_state,
            })
        }
    }
}

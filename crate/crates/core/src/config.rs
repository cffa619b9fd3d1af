//! Run configurations: JSON parsing with positioned syntax errors, field-path
//! validation and defaults that are echoed into every output header.

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::models::ModelSpec;
use crate::operator::{self, Operator, PureState};
use crate::sieve::SieveOptions;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Evolve,
    Lambda,
    Sieve,
    Decompose,
    Classify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Lambda => "lambda",
            Command::Sieve => "sieve",
            Command::Decompose => "decompose",
            Command::Classify => "classify",
        }
    }

    fn default_format(self) -> OutputFormat {
        match self {
            Command::Evolve | Command::Lambda => OutputFormat::Csv,
            _ => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A state selector.
///
/// Strings: `random:N`, `basis` (every basis state), `basis:k`,
/// `mixed` (maximally mixed, evolve only) and `random_mixed` (evolve only).
/// Arrays: one amplitude vector of `[re, im]` pairs, or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Single(Vec<[f64; 2]>),
    List(Vec<Vec<[f64; 2]>>),
}

/// Either a list of instants or an evenly spaced range including both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimesSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl TimesSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            TimesSpec::List(v) => v.clone(),
            TimesSpec::Range { start, stop, points } => match *points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

fn default_times() -> TimesSpec {
    TimesSpec::Range { start: 0.0, stop: 10.0, points: 101 }
}
fn default_verify_times() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 5.0]
}
fn default_states() -> StateSpec {
    StateSpec::Named("random:100".into())
}
fn default_initial() -> StateSpec {
    StateSpec::Named("random".into())
}
fn default_samples() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SieveParams {
    pub n_starts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub epsilon: Option<f64>,
    pub dedup_fidelity: f64,
    pub n_ratio: usize,
    pub n_phase: usize,
    pub pair_max_fidelity: f64,
    pub histogram_samples: usize,
    pub histogram_bins: usize,
}

impl Default for SieveParams {
    fn default() -> Self {
        let o = SieveOptions::default();
        SieveParams {
            n_starts: o.n_starts,
            tol: o.tol,
            max_iter: o.max_iter,
            epsilon: o.epsilon,
            dedup_fidelity: o.dedup_fidelity,
            n_ratio: o.n_ratio,
            n_phase: o.n_phase,
            pair_max_fidelity: o.pair_max_fidelity,
            histogram_samples: o.histogram_samples,
            histogram_bins: o.histogram_bins,
        }
    }
}

/// A fully defaulted run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_format: Option<OutputFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// States for `lambda`.
    #[serde(default = "default_states")]
    pub states: StateSpec,
    /// Initial state for `evolve`.
    #[serde(default = "default_initial")]
    pub initial_state: StateSpec,
    /// Sample instants for `evolve`.
    #[serde(default = "default_times")]
    pub times: TimesSpec,
    #[serde(default)]
    pub sieve: SieveParams,
    /// Threshold for purely imaginary eigenvalues in `decompose` and
    /// `classify`; `None` selects the relative default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_tol: Option<f64>,
    /// Instants at which `decompose` checks the structural properties.
    #[serde(default = "default_verify_times")]
    pub verify_times: Vec<f64>,
    #[serde(default = "default_samples")]
    pub verify_samples: usize,
}

impl RunConfig {
    pub fn command(&self) -> Command {
        self.command.expect("validated configs carry a command")
    }

    pub fn format(&self) -> OutputFormat {
        self.output_format.unwrap_or_else(|| self.command().default_format())
    }

    /// Semantic checks with field paths. The model goes first so that its
    /// errors are reported even when the rest is incomplete.
    pub fn validate(&mut self) -> Result<()> {
        self.model.validate()?;
        let command = self.command.ok_or_else(|| Error::config("command", "missing; expected one of evolve, lambda, sieve, decompose, classify"))?;
        if self.output_format.is_none() {
            self.output_format = Some(command.default_format());
        }
        let positive = |path: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(path, format!("must be positive, got {v}")))
            }
        };
        let times = self.times.values();
        check_times("times", &times)?;
        check_times("verify_times", &self.verify_times)?;
        if command == Command::Evolve && times.is_empty() {
            return Err(Error::config("times", "must not be empty"));
        }
        let s = &self.sieve;
        if s.n_starts == 0 {
            return Err(Error::config("sieve.n_starts", "must be at least 1"));
        }
        if s.max_iter == 0 {
            return Err(Error::config("sieve.max_iter", "must be at least 1"));
        }
        positive("sieve.tol", s.tol)?;
        if let Some(e) = s.epsilon {
            positive("sieve.epsilon", e)?;
        }
        for (path, v) in [("sieve.dedup_fidelity", s.dedup_fidelity), ("sieve.pair_max_fidelity", s.pair_max_fidelity)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::config(path, format!("must lie in (0, 1], got {v}")));
            }
        }
        for (path, v) in [("sieve.n_ratio", s.n_ratio), ("sieve.n_phase", s.n_phase), ("sieve.histogram_bins", s.histogram_bins)] {
            if v == 0 {
                return Err(Error::config(path, "must be at least 1"));
            }
        }
        if let Some(t) = self.split_tol {
            positive("split_tol", t)?;
        }
        Ok(())
    }

    pub fn sieve_options(&self) -> SieveOptions {
        let s = &self.sieve;
        SieveOptions {
            n_starts: s.n_starts,
            seed: self.seed,
            tol: s.tol,
            max_iter: s.max_iter,
            epsilon: s.epsilon,
            dedup_fidelity: s.dedup_fidelity,
            n_ratio: s.n_ratio,
            n_phase: s.n_phase,
            pair_max_fidelity: s.pair_max_fidelity,
            histogram_samples: s.histogram_samples,
            histogram_bins: s.histogram_bins,
        }
    }
}

fn check_times(path: &str, times: &[f64]) -> Result<()> {
    if let Some((i, t)) = times.iter().enumerate().find(|(_, t)| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::config(format!("{path}[{i}]"), format!("must be finite and non-negative, got {t}")));
    }
    if let Some(i) = times.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::config(format!("{path}[{}]", i + 1), "times must be sorted ascending"));
    }
    Ok(())
}

/// Parse and validate a configuration from JSON text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: strip_position(&e.to_string()) })?;
    let mut cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        Error::config(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn amplitudes_from_pairs(pairs: &[[f64; 2]], dim: usize, path: &str) -> Result<PureState> {
    if pairs.len() != dim {
        return Err(Error::config(path, format!("expected {dim} amplitudes, got {}", pairs.len())));
    }
    let v = CVector::from_iterator(dim, pairs.iter().map(|p| C64::new(p[0], p[1])));
    PureState::new(v).map_err(|e| Error::config(path, e.to_string()))
}

fn basis_index(s: &str, dim: usize, path: &str) -> Result<usize> {
    let k: usize = s.parse().map_err(|_| Error::config(path, format!("bad basis index {s:?}")))?;
    if k >= dim {
        return Err(Error::config(path, format!("basis index {k} out of range for dimension {dim}")));
    }
    Ok(k)
}

/// Pure states selected by `spec` in dimension `dim`.
pub fn resolve_states(spec: &StateSpec, dim: usize, rng: &mut ChaCha8Rng, path: &str) -> Result<Vec<PureState>> {
    match spec {
        StateSpec::Named(name) => {
            if name == "basis" {
                return Ok((0..dim).map(|k| PureState::basis(dim, k)).collect());
            }
            if let Some(n) = name.strip_prefix("random:") {
                let n: usize = n.parse().map_err(|_| Error::config(path, format!("bad sample count in {name:?}")))?;
                return Ok((0..n).map(|_| PureState::random(dim, rng)).collect());
            }
            if name == "random" {
                return Ok(vec![PureState::random(dim, rng)]);
            }
            if let Some(k) = name.strip_prefix("basis:") {
                return Ok(vec![PureState::basis(dim, basis_index(k, dim, path)?)]);
            }
            Err(Error::config(path, format!("unknown state selector {name:?}; expected random:N, random, basis or basis:k")))
        }
        StateSpec::Single(pairs) => Ok(vec![amplitudes_from_pairs(pairs, dim, path)?]),
        StateSpec::List(list) => list
            .iter()
            .enumerate()
            .map(|(i, p)| amplitudes_from_pairs(p, dim, &format!("{path}[{i}]")))
            .collect(),
    }
}

/// Density matrix selected by `spec` for `evolve`.
pub fn resolve_density(spec: &StateSpec, dim: usize, seed: u64, path: &str) -> Result<Operator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        StateSpec::Named(n) if n == "mixed" => Ok(Operator::identity(dim, dim).unscale(dim as f64)),
        StateSpec::Named(n) if n == "random_mixed" => Ok(operator::random_density(dim, &mut rng)),
        other => {
            let states = resolve_states(other, dim, &mut rng, path)?;
            match states.as_slice() {
                [one] => Ok(one.projector()),
                _ => Err(Error::config(path, "evolve needs exactly one initial state")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_lambda_config_fills_defaults() {
        let cfg = parse_config(r#"{"model":{"type":"toy"},"command":"lambda","states":"random:100","seed":7}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.format(), OutputFormat::Csv);
        assert_eq!(cfg.sieve, SieveParams::default());
        let echo = serde_json::to_value(&cfg).unwrap();
        assert_eq!(echo["states"], "random:100");
        assert_eq!(echo["output_format"], "csv");
    }

    #[test]
    fn pointer_classify_is_valid() {
        let cfg = parse_config(r#"{"model":{"type":"pointer","energies":[0.0,1.0,2.5]},"command":"classify"}"#).unwrap();
        assert_eq!(cfg.command(), Command::Classify);
    }

    #[test]
    fn negative_kappa_reports_field_path() {
        let err = parse_config(r#"{"model":{"type":"davies","kappa":-1}}"#).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "model.kappa"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_config("{\n  \"model\": {\"type\": \"toy\"},\n  \"command\": \n}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 4);
                assert!(column >= 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_model_type_lists_options() {
        let msg = parse_config(r#"{"model":{"type":"quantum"},"command":"lambda"}"#).unwrap_err().to_string();
        for name in ["toy", "pointer", "qbm", "grw", "davies", "custom"] {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(r#"{"model":{"type":"toy"},"command":"lambda","sieve":{"n_start":3}}"#).unwrap_err();
        match err {
            Error::Config { path, message } => {
                assert!(path.starts_with("sieve"), "{path}");
                assert!(message.contains("n_start"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unsorted_times_are_rejected() {
        let err = parse_config(r#"{"model":{"type":"toy"},"command":"evolve","times":[0.0,2.0,1.0]}"#).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "times[2]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_positive_tolerance_is_rejected() {
        let err = parse_config(r#"{"model":{"type":"toy"},"command":"sieve","sieve":{"tol":0.0}}"#).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "sieve.tol"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn state_selectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(resolve_states(&StateSpec::Named("basis".into()), 3, &mut rng, "states").unwrap().len(), 3);
        let one = resolve_states(&StateSpec::Single(vec![[0.0, 0.0], [0.0, 2.0]]), 2, &mut rng, "states").unwrap();
        assert!(one[0].fidelity(&PureState::basis(2, 1)) > 1.0 - 1e-15);
        assert!(resolve_states(&StateSpec::Named("basis:5".into()), 3, &mut rng, "states").is_err());
        let rho = resolve_density(&StateSpec::Named("mixed".into()), 4, 0, "initial_state").unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
    }
}

//! Run configuration echo and the shared JSON-lines / CSV writers.

use std::io::Write;

use coordmech::io::SCHEMA;
use coordmech::{Policy, Rat};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// Digits in the approximate decimal columns of CSV output.
const APPROX_PLACES: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CommandName {
    Gen,
    Dynamics,
    Analyze,
    Reproduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Budgets {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profiles: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coalition_nodes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

/// Everything needed to rerun a command; echoed at the top of its output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<Policy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub budgets: Budgets,
    pub format: Format,
    /// Command-specific settings (family, target, coalition bound, ...).
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub options: serde_json::Map<String, Value>,
}

impl RunConfig {
    pub fn new(command: CommandName) -> Self {
        RunConfig {
            command,
            instance: None,
            policy: None,
            rule: None,
            seed: None,
            budgets: Budgets::default(),
            format: Format::Json,
            options: serde_json::Map::new(),
        }
    }

    pub fn option(mut self, key: &str, value: impl Serialize) -> Self {
        self.options.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable"),
        );
        self
    }
}

/// Writes `body` as one JSON line, with the schema tag first.
pub fn emit(out: &mut impl Write, record: &str, body: Value) -> Result<(), CliError> {
    let mut line = serde_json::Map::new();
    line.insert("schema".into(), SCHEMA.into());
    line.insert("record".into(), record.into());
    if let Value::Object(fields) = body {
        line.extend(fields);
    }
    writeln!(out, "{}", Value::Object(line))?;
    Ok(())
}

pub fn emit_config(out: &mut impl Write, config: &RunConfig) -> Result<(), CliError> {
    emit(out, "config", json!({ "config": config }))
}

/// CSV preamble: the schema and config as a `#` comment line.
pub fn csv_preamble(out: &mut impl Write, config: &RunConfig) -> Result<(), CliError> {
    writeln!(out, "# {}", json!({ "schema": SCHEMA, "config": config }))?;
    Ok(())
}

/// Exact value and its labelled approximation, as two CSV cells.
pub fn rat_cells(value: Option<&Rat>) -> [String; 2] {
    match value {
        Some(v) => [v.to_string(), v.to_decimal(APPROX_PLACES)],
        None => [String::new(), String::new()],
    }
}

/// Header names for a rational column pair.
pub fn rat_headers(name: &str) -> [String; 2] {
    [name.to_string(), format!("{name}_approx")]
}

/// 1-based profile rendered as space-separated machine numbers.
pub fn profile_cell(profile: &coordmech::Profile) -> String {
    profile
        .one_based()
        .iter()
        .map(|j| j.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

//! JSON documents: parsing with schema diagnostics, and canonical output.
//!
//! Every document is wrapped in an envelope
//! `{"format_version": "1", "kind": ..., "body": ...}`. Parsing is strict by
//! default: unknown fields anywhere are errors. A lenient [`Reader`] reports
//! them as warnings instead.

mod manifest;
mod table;
mod wire;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use manifest::{load_cases, parse_manifest, Manifest, ManifestEntry};
pub use table::{format_table, render_report_table};

use crate::metrics::MetricRegistry;
use crate::model::{
    Rulebook, RulebookError, Scenario, ScenarioError, Trajectory, TrajectoryError,
};
use crate::verify::VerificationReport;
use wire::{RulebookDoc, ScenarioDoc, TrajectoryDoc};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Rulebook,
    Scenario,
    Trajectory,
    Report,
}

impl DocumentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DocumentKind::Rulebook => "rulebook",
            DocumentKind::Scenario => "scenario",
            DocumentKind::Trajectory => "trajectory",
            DocumentKind::Report => "report",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [
            DocumentKind::Rulebook,
            DocumentKind::Scenario,
            DocumentKind::Trajectory,
            DocumentKind::Report,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid rulebook: {0}")]
    Rulebook(RulebookError),
}

impl ParseError {
    fn schema(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ParseError::Schema {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        ParseError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
}

/// A parsed value together with any lenient-mode warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

/// A type with a document representation.
pub trait Document: Sized {
    const KIND: DocumentKind;

    fn to_body(&self) -> Value;

    /// Decodes and validates a body. Unknown field paths go to `ignored`.
    fn from_body(body: Value, reader: &Reader<'_>, ignored: &mut Vec<String>) -> Result<Self, ParseError>;
}

/// Parsing configuration: the metric registry that rule bindings are checked
/// against, and the unknown-field policy.
#[derive(Debug, Clone, Copy)]
pub struct Reader<'r> {
    pub registry: &'r MetricRegistry,
    pub lenient: bool,
}

impl<'r> Reader<'r> {
    pub fn strict(registry: &'r MetricRegistry) -> Self {
        Reader {
            registry,
            lenient: false,
        }
    }

    pub fn lenient(registry: &'r MetricRegistry) -> Self {
        Reader {
            registry,
            lenient: true,
        }
    }

    pub fn parse<D: Document>(&self, text: &str) -> Result<Parsed<D>, ParseError> {
        let root: Value = serde_json::from_str(text)?;
        let Value::Object(mut root) = root else {
            return Err(ParseError::schema("", "document must be a JSON object"));
        };
        let mut unknown: Vec<String> = root
            .keys()
            .filter(|k| !["format_version", "kind", "body"].contains(&k.as_str()))
            .cloned()
            .collect();
        match root.get("format_version") {
            None => return Err(ParseError::schema("format_version", "missing field")),
            Some(Value::String(v)) if v == FORMAT_VERSION => {}
            Some(other) => {
                return Err(ParseError::schema(
                    "format_version",
                    format!("unsupported format version {other}, expected \"{FORMAT_VERSION}\""),
                ))
            }
        }
        match root.get("kind") {
            None => return Err(ParseError::schema("kind", "missing field")),
            Some(Value::String(k)) => match DocumentKind::from_name(k) {
                Some(kind) if kind == D::KIND => {}
                Some(kind) => {
                    return Err(ParseError::schema(
                        "kind",
                        format!("expected a {} document, found a {kind} document", D::KIND),
                    ))
                }
                None => return Err(ParseError::schema("kind", format!("unknown document kind `{k}`"))),
            },
            Some(other) => return Err(ParseError::schema("kind", format!("expected a string, found {other}"))),
        }
        let body = root
            .remove("body")
            .ok_or_else(|| ParseError::schema("body", "missing field"))?;
        let mut ignored = Vec::new();
        let value = D::from_body(body, self, &mut ignored)?;
        unknown.extend(ignored.into_iter().map(|p| body_path(&p)));
        if !self.lenient {
            if let Some(first) = unknown.into_iter().next() {
                return Err(ParseError::schema(first, "unknown field"));
            }
            return Ok(Parsed {
                value,
                warnings: Vec::new(),
            });
        }
        Ok(Parsed {
            value,
            warnings: unknown.into_iter().map(|p| format!("ignored unknown field `{p}`")).collect(),
        })
    }

    pub fn load<D: Document>(&self, path: &Path) -> Result<Parsed<D>, LoadError> {
        let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.to_owned(),
            source,
        })?;
        self.parse(&text).map_err(|source| LoadError::Parse {
            path: path.to_owned(),
            source,
        })
    }
}

fn body_path(p: &str) -> String {
    if p.is_empty() || p == "?" || p == "." {
        "body".to_owned()
    } else {
        format!("body.{p}")
    }
}

/// Deserializes `body`, recording unknown fields and reporting failures
/// with their path.
fn decode<T: DeserializeOwned>(body: Value, ignored: &mut Vec<String>) -> Result<T, ParseError> {
    let mut track = |path: serde_ignored::Path<'_>| ignored.push(path.to_string());
    let de = serde_ignored::Deserializer::new(body, &mut track);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = dotted(e.path());
        ParseError::schema(body_path(&path), e.into_inner())
    })
}

/// `a.0.b` form of a deserializer path, matching unknown-field paths.
fn dotted(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    path.iter()
        .filter_map(|seg| match seg {
            Segment::Seq { index } => Some(index.to_string()),
            Segment::Map { key } => Some(key.clone()),
            Segment::Enum { variant } => Some(variant.clone()),
            Segment::Unknown => None,
        })
        .collect::<Vec<_>>()
        .join(".")
}

/// Canonical text of a document: sorted keys, shortest round-trip numbers,
/// two-space indentation and a trailing newline.
pub fn serialize<D: Document>(value: &D) -> String {
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "kind": D::KIND,
        "body": value.to_body(),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    text.push('\n');
    text
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("document bodies serialize")
}

impl Document for Rulebook {
    const KIND: DocumentKind = DocumentKind::Rulebook;

    fn to_body(&self) -> Value {
        to_value(&RulebookDoc::from(self))
    }

    fn from_body(body: Value, reader: &Reader<'_>, ignored: &mut Vec<String>) -> Result<Self, ParseError> {
        let doc: RulebookDoc = decode(body, ignored)?;
        for (i, r) in doc.rules.iter().enumerate() {
            reader
                .registry
                .validate_binding(&r.metric)
                .map_err(|e| ParseError::schema(format!("body.rules.{i}.metric"), e))?;
        }
        let rules = doc.rules.into_iter().map(|r| r.into_rule()).collect();
        Rulebook::build_with_id(doc.id, rules, doc.strict_edges, doc.equivalences).map_err(|e| match e {
            RulebookError::UnknownRuleId(id) => {
                ParseError::schema("body", format!("reference to unknown rule id `{id}`"))
            }
            other => ParseError::Rulebook(other),
        })
    }
}

impl Document for Scenario {
    const KIND: DocumentKind = DocumentKind::Scenario;

    fn to_body(&self) -> Value {
        to_value(&ScenarioDoc::from(self))
    }

    fn from_body(body: Value, _: &Reader<'_>, ignored: &mut Vec<String>) -> Result<Self, ParseError> {
        let doc: ScenarioDoc = decode(body, ignored)?;
        let scenario = doc.into_scenario().map_err(|i| {
            ParseError::schema(
                format!("body.obstacles.{i}"),
                "exactly one of `static` and `steps` is required",
            )
        })?;
        scenario.validate().map_err(|e| {
            let path = match &e {
                ScenarioError::InvalidDt => "body.dt".to_owned(),
                ScenarioError::InvalidHorizon => "body.horizon_steps".to_owned(),
                ScenarioError::InvalidEgoDims => "body.ego".to_owned(),
                ScenarioError::InvalidGoal => "body.goal".to_owned(),
                ScenarioError::FootprintCount { index, .. } => format!("body.obstacles.{index}.steps"),
                ScenarioError::EmptyCategory(i) => format!("body.obstacles.{i}.category"),
            };
            ParseError::schema(path, e)
        })?;
        Ok(scenario)
    }
}

impl Document for Trajectory {
    const KIND: DocumentKind = DocumentKind::Trajectory;

    fn to_body(&self) -> Value {
        to_value(&TrajectoryDoc::from(self))
    }

    fn from_body(body: Value, _: &Reader<'_>, ignored: &mut Vec<String>) -> Result<Self, ParseError> {
        let traj = decode::<TrajectoryDoc>(body, ignored)?.into_trajectory();
        traj.validate().map_err(|e| {
            let path = match &e {
                TrajectoryError::Empty => "body.states".to_owned(),
                TrajectoryError::InvalidDt => "body.dt".to_owned(),
                TrajectoryError::NonFinite(i)
                | TrajectoryError::NegativeSpeed(i)
                | TrajectoryError::NonMonotoneTime(i)
                | TrajectoryError::NonUniformStep { index: i, .. } => format!("body.states.{i}"),
            };
            ParseError::schema(path, e)
        })?;
        Ok(traj)
    }
}

impl Document for VerificationReport {
    const KIND: DocumentKind = DocumentKind::Report;

    fn to_body(&self) -> Value {
        to_value(self)
    }

    fn from_body(body: Value, _: &Reader<'_>, ignored: &mut Vec<String>) -> Result<Self, ParseError> {
        let report: VerificationReport = decode(body, ignored)?;
        if !report.epsilon.is_finite() || report.epsilon < 0.0 {
            return Err(ParseError::schema("body.epsilon", "must be finite and non-negative"));
        }
        if let Some(mismatch) = aggregates_mismatch(&report) {
            return Err(ParseError::schema(
                format!("body.aggregates.{mismatch}"),
                "does not match the case rows",
            ));
        }
        Ok(report)
    }
}

/// First aggregate field that disagrees with a recomputation from the rows.
fn aggregates_mismatch(report: &VerificationReport) -> Option<String> {
    let stored = &report.aggregates;
    let fresh = report.recompute_aggregates();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
    if stored.cases != fresh.cases {
        return Some("cases".into());
    }
    if (stored.passed, stored.failed, stored.errored) != (fresh.passed, fresh.failed, fresh.errored) {
        return Some("passed".into());
    }
    for (i, (s, f)) in stored.rules.iter().zip(&fresh.rules).enumerate() {
        if s.evaluated != f.evaluated
            || s.violations != f.violations
            || !close(s.frequency, f.frequency)
            || !close(s.mean_score, f.mean_score)
        {
            return Some(format!("rules.{i}"));
        }
    }
    if stored.critical != fresh.critical {
        return Some("critical".into());
    }
    None
}

/// Strict parse against the built-in metrics.
pub fn parse<D: Document>(text: &str) -> Result<D, ParseError> {
    let registry = MetricRegistry::default();
    Ok(Reader::strict(&registry).parse(text)?.value)
}

pub fn parse_rulebook(text: &str) -> Result<Rulebook, ParseError> {
    parse(text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    parse(text)
}

pub fn parse_trajectory(text: &str) -> Result<Trajectory, ParseError> {
    parse(text)
}

pub fn parse_report(text: &str) -> Result<VerificationReport, ParseError> {
    parse(text)
}

/// Strict load of a document file against the built-in metrics.
pub fn load<D: Document>(path: &Path) -> Result<D, LoadError> {
    let registry = MetricRegistry::default();
    Ok(Reader::strict(&registry).load(path)?.value)
}

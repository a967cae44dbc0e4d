use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Identifier of a rule, unique within a rulebook.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleId(String);

impl RuleId {
    pub fn new(id: impl Into<String>) -> Self {
        RuleId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for RuleId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for RuleId {
    fn from(s: &str) -> Self {
        RuleId(s.to_owned())
    }
}

impl From<String> for RuleId {
    fn from(s: String) -> Self {
        RuleId(s)
    }
}

/// Reference to a named violation metric together with its parameters.
///
/// The parameter object is kept as raw JSON so that metrics registered at
/// runtime can define their own schema; the registry validates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBinding {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl MetricBinding {
    pub fn new(name: impl Into<String>) -> Self {
        MetricBinding {
            name: name.into(),
            params: Map::new(),
        }
    }

    pub fn with_params(name: impl Into<String>, params: Value) -> Self {
        let params = match params {
            Value::Object(map) => map,
            Value::Null => Map::new(),
            other => {
                let mut map = Map::new();
                map.insert("value".to_owned(), other);
                map
            }
        };
        MetricBinding {
            name: name.into(),
            params,
        }
    }
}

/// A single behavior rule: what it demands, how its violation is measured,
/// and how much violation is tolerated.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: RuleId,
    pub description: String,
    pub metric: MetricBinding,
    /// Largest score still considered acceptable. `None` means the rule
    /// never fails an acceptability check on its own.
    pub acceptable_violation: Option<f64>,
    /// Whether violations of this rule count toward a case's criticality.
    /// Rules that every trajectory violates by construction (e.g. "reach the
    /// goal in zero time") turn this off.
    pub count_in_criticality: bool,
}

impl Rule {
    pub fn new(id: impl Into<RuleId>, description: impl Into<String>, metric: MetricBinding) -> Self {
        Rule {
            id: id.into(),
            description: description.into(),
            metric,
            acceptable_violation: None,
            count_in_criticality: true,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.acceptable_violation = Some(threshold);
        self
    }

    pub fn excluded_from_criticality(mut self) -> Self {
        self.count_in_criticality = false;
        self
    }
}

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::rule::{MetricBinding, RuleId};

/// Name under which aggregated rules bind their composite metric.
pub const AGGREGATE_METRIC: &str = "aggregate";

/// How member scores of an aggregated rule (or of a priority level) are
/// folded into one score.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Combiner {
    #[default]
    Sum,
    Max,
    WeightedSum(Vec<f64>),
}

impl Combiner {
    /// Folds `scores` into one value. Weighted sums expect one weight per
    /// score; missing weights count as zero.
    pub fn apply(&self, scores: &[f64]) -> f64 {
        match self {
            Combiner::Sum => scores.iter().sum(),
            Combiner::Max => scores.iter().copied().fold(0.0, f64::max),
            Combiner::WeightedSum(weights) => scores
                .iter()
                .zip(weights.iter().chain(std::iter::repeat(&0.0)))
                .map(|(s, w)| s * w)
                .sum(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Combiner::Sum => "sum",
            Combiner::Max => "max",
            Combiner::WeightedSum(_) => "weighted_sum",
        }
    }

    /// Parses a combiner name as used in documents and on the command line.
    pub fn from_name(name: &str, weights: Option<Vec<f64>>) -> Result<Self, String> {
        match (name, weights) {
            ("sum", None) => Ok(Combiner::Sum),
            ("max", None) => Ok(Combiner::Max),
            ("weighted_sum" | "weighted-sum", Some(w)) => {
                if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    Err("weights must be finite and non-negative".to_owned())
                } else {
                    Ok(Combiner::WeightedSum(w))
                }
            }
            ("weighted_sum" | "weighted-sum", None) => {
                Err("weighted_sum requires weights".to_owned())
            }
            ("sum" | "max", Some(_)) => Err(format!("combiner `{name}` takes no weights")),
            (other, _) => Err(format!("unknown combiner `{other}`")),
        }
    }
}

/// One constituent of an aggregated rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateMember {
    pub id: RuleId,
    pub metric: MetricBinding,
}

/// Decoded parameters of an `aggregate` metric binding.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSpec {
    pub combiner: Combiner,
    pub members: Vec<AggregateMember>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAggregate {
    combiner: String,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    members: Vec<AggregateMember>,
}

impl AggregateSpec {
    pub fn to_binding(&self) -> MetricBinding {
        let mut params = Map::new();
        params.insert("combiner".to_owned(), json!(self.combiner.name()));
        if let Combiner::WeightedSum(w) = &self.combiner {
            params.insert("weights".to_owned(), json!(w));
        }
        params.insert(
            "members".to_owned(),
            serde_json::to_value(&self.members).expect("members serialize"),
        );
        MetricBinding {
            name: AGGREGATE_METRIC.to_owned(),
            params,
        }
    }

    pub fn from_binding(binding: &MetricBinding) -> Result<Self, String> {
        if binding.name != AGGREGATE_METRIC {
            return Err(format!("metric `{}` is not an aggregate", binding.name));
        }
        let raw: RawAggregate = serde_json::from_value(Value::Object(binding.params.clone()))
            .map_err(|e| e.to_string())?;
        if raw.members.is_empty() {
            return Err("aggregate needs at least one member".to_owned());
        }
        let combiner = Combiner::from_name(&raw.combiner, raw.weights)?;
        if let Combiner::WeightedSum(w) = &combiner {
            if w.len() != raw.members.len() {
                return Err(format!(
                    "{} weights given for {} members",
                    w.len(),
                    raw.members.len()
                ));
            }
        }
        Ok(AggregateSpec {
            combiner,
            members: raw.members,
        })
    }

    /// Every rule id folded into this aggregate, at any nesting depth.
    pub fn member_ids(&self) -> Vec<RuleId> {
        let mut out = Vec::new();
        for m in &self.members {
            out.push(m.id.clone());
            if let Ok(inner) = AggregateSpec::from_binding(&m.metric) {
                out.extend(inner.member_ids());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_two_members() {
        assert!((Combiner::Sum.apply(&[0.2, 0.3]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn max_and_weighted() {
        assert_eq!(Combiner::Max.apply(&[0.2, 0.7, 0.1]), 0.7);
        assert_eq!(Combiner::WeightedSum(vec![2.0, 0.5]).apply(&[1.0, 4.0]), 4.0);
        assert_eq!(Combiner::Max.apply(&[]), 0.0);
    }

    #[test]
    fn binding_round_trip() {
        let spec = AggregateSpec {
            combiner: Combiner::WeightedSum(vec![1.0, 3.0]),
            members: vec![
                AggregateMember {
                    id: "A".into(),
                    metric: MetricBinding::new("stay_in_lane"),
                },
                AggregateMember {
                    id: "B".into(),
                    metric: MetricBinding::new("time_to_goal"),
                },
            ],
        };
        let back = AggregateSpec::from_binding(&spec.to_binding()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn weight_count_must_match() {
        let mut binding = AggregateSpec {
            combiner: Combiner::WeightedSum(vec![1.0]),
            members: vec![],
        }
        .to_binding();
        binding.params.insert(
            "members".into(),
            json!([{"id": "A", "metric": {"name": "stay_in_lane", "params": {}}},
                   {"id": "B", "metric": {"name": "stay_in_lane", "params": {}}}]),
        );
        assert!(AggregateSpec::from_binding(&binding).is_err());
    }

    #[test]
    fn unknown_combiner_rejected() {
        assert!(Combiner::from_name("median", None).is_err());
        assert!(Combiner::from_name("weighted-sum", None).is_err());
        assert_eq!(
            Combiner::from_name("weighted-sum", Some(vec![1.0])).unwrap(),
            Combiner::WeightedSum(vec![1.0])
        );
    }
}

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::aggregate::{AggregateMember, AggregateSpec, Combiner, AGGREGATE_METRIC};
use super::rule::{Rule, RuleId};

pub const DEFAULT_RULEBOOK_ID: &str = "rulebook";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RulebookError {
    #[error("duplicate rule id `{0}`")]
    DuplicateRuleId(RuleId),
    #[error("unknown rule id `{0}`")]
    UnknownRuleId(RuleId),
    #[error("invalid rule `{id}`: {reason}")]
    InvalidRule { id: RuleId, reason: String },
    #[error("strict edges form a cycle among {}", join_ids(.0))]
    CycleAmongStrictEdges(Vec<RuleId>),
    #[error("rule `{0}` appears in more than one equivalence group")]
    OverlappingEquivalenceGroups(RuleId),
    #[error("rules `{0}` and `{1}` are incomparable; a total hierarchy is required")]
    NotATotalHierarchy(RuleId, RuleId),
    #[error("rules `{0}` and `{1}` are already comparable")]
    RulesAlreadyComparable(RuleId, RuleId),
    #[error("rules `{0}` and `{1}` are not equally ranked")]
    RulesNotEquallyRanked(RuleId, RuleId),
    #[error("invalid aggregation: {0}")]
    InvalidAggregation(String),
}

fn join_ids(ids: &[RuleId]) -> String {
    ids.iter().map(RuleId::as_str).collect::<Vec<_>>().join(", ")
}

/// Relative priority of two rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Priority {
    Higher,
    Lower,
    Equal,
    Incomparable,
}

/// A set of rules with a pre-order priority structure.
///
/// Authoring data (rules, strict edges, equivalence groups) is kept as given;
/// the quotient structure is derived at construction. Equivalence groups
/// collapse into classes first, then strict edges are lifted onto classes and
/// closed transitively. The class relation must be acyclic.
#[derive(Debug, Clone)]
pub struct Rulebook {
    id: String,
    rules: Vec<Rule>,
    strict_edges: Vec<(RuleId, RuleId)>,
    equivalences: Vec<Vec<RuleId>>,
    index: HashMap<RuleId, usize>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    // above[a][b]: class a strictly above class b, transitively closed.
    above: Vec<Vec<bool>>,
}

impl PartialEq for Rulebook {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.rules == other.rules
            && self.strict_edges == other.strict_edges
            && self.equivalences == other.equivalences
    }
}

impl Rulebook {
    pub fn build(
        rules: Vec<Rule>,
        strict_edges: Vec<(RuleId, RuleId)>,
        equivalences: Vec<Vec<RuleId>>,
    ) -> Result<Self, RulebookError> {
        Self::build_with_id(DEFAULT_RULEBOOK_ID, rules, strict_edges, equivalences)
    }

    pub fn build_with_id(
        id: impl Into<String>,
        rules: Vec<Rule>,
        strict_edges: Vec<(RuleId, RuleId)>,
        equivalences: Vec<Vec<RuleId>>,
    ) -> Result<Self, RulebookError> {
        let mut index = HashMap::with_capacity(rules.len());
        for (i, rule) in rules.iter().enumerate() {
            validate_rule(rule)?;
            if index.insert(rule.id.clone(), i).is_some() {
                return Err(RulebookError::DuplicateRuleId(rule.id.clone()));
            }
        }
        let lookup = |id: &RuleId| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| RulebookError::UnknownRuleId(id.clone()))
        };

        let n = rules.len();
        let mut group_of: Vec<Option<usize>> = vec![None; n];
        for (g, group) in equivalences.iter().enumerate() {
            for id in group {
                let i = lookup(id)?;
                if group_of[i].is_some() {
                    return Err(RulebookError::OverlappingEquivalenceGroups(id.clone()));
                }
                group_of[i] = Some(g);
            }
        }

        // Classes are numbered by the first rule (in rule order) they contain.
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut class_of_group: HashMap<usize, usize> = HashMap::new();
        for i in 0..n {
            let c = match group_of[i] {
                Some(g) => *class_of_group.entry(g).or_insert_with(|| {
                    classes.push(Vec::new());
                    classes.len() - 1
                }),
                None => {
                    classes.push(Vec::new());
                    classes.len() - 1
                }
            };
            class_of[i] = c;
            classes[c].push(i);
        }

        let k = classes.len();
        let mut above = vec![vec![false; k]; k];
        for (hi, lo) in &strict_edges {
            let (a, b) = (class_of[lookup(hi)?], class_of[lookup(lo)?]);
            if a == b {
                let mut ids: Vec<RuleId> = vec![hi.clone(), lo.clone()];
                ids.dedup();
                return Err(RulebookError::CycleAmongStrictEdges(ids));
            }
            above[a][b] = true;
        }
        for m in 0..k {
            for a in 0..k {
                if above[a][m] {
                    for b in 0..k {
                        if above[m][b] {
                            above[a][b] = true;
                        }
                    }
                }
            }
        }
        let cyclic: Vec<RuleId> = (0..k)
            .filter(|&c| above[c][c])
            .flat_map(|c| classes[c].iter().map(|&i| rules[i].id.clone()))
            .collect();
        if !cyclic.is_empty() {
            return Err(RulebookError::CycleAmongStrictEdges(cyclic));
        }

        Ok(Rulebook {
            id: id.into(),
            rules,
            strict_edges,
            equivalences,
            index,
            class_of,
            classes,
            above,
        })
    }

    pub fn empty() -> Self {
        Self::build(Vec::new(), Vec::new(), Vec::new()).expect("empty rulebook is valid")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule_ids(&self) -> impl Iterator<Item = &RuleId> {
        self.rules.iter().map(|r| &r.id)
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.index.get(id).map(|&i| &self.rules[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn strict_edges(&self) -> &[(RuleId, RuleId)] {
        &self.strict_edges
    }

    pub fn equivalences(&self) -> &[Vec<RuleId>] {
        &self.equivalences
    }

    fn position(&self, id: &str) -> Result<usize, RulebookError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| RulebookError::UnknownRuleId(id.into()))
    }

    fn priority_of_indices(&self, i: usize, j: usize) -> Priority {
        let (a, b) = (self.class_of[i], self.class_of[j]);
        if a == b {
            Priority::Equal
        } else if self.above[a][b] {
            Priority::Higher
        } else if self.above[b][a] {
            Priority::Lower
        } else {
            Priority::Incomparable
        }
    }

    /// Priority of `r1` relative to `r2`.
    pub fn higher_than(&self, r1: &str, r2: &str) -> Result<Priority, RulebookError> {
        Ok(self.priority_of_indices(self.position(r1)?, self.position(r2)?))
    }

    /// True iff the pair `(r1, r2)` is in the reflexive-transitive closure,
    /// i.e. `r1` ranks at least as high as `r2`.
    pub fn at_least(&self, r1: &str, r2: &str) -> Result<bool, RulebookError> {
        Ok(matches!(
            self.higher_than(r1, r2)?,
            Priority::Higher | Priority::Equal
        ))
    }

    /// Equivalence classes as rule-id groups, in rule order.
    pub fn classes(&self) -> Vec<Vec<RuleId>> {
        self.classes
            .iter()
            .map(|c| c.iter().map(|&i| self.rules[i].id.clone()).collect())
            .collect()
    }

    /// Every unordered pair of rules with no priority between them, in rule order.
    pub fn incomparable_pairs(&self) -> Vec<(RuleId, RuleId)> {
        let n = self.rules.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.priority_of_indices(i, j) == Priority::Incomparable {
                    out.push((self.rules[i].id.clone(), self.rules[j].id.clone()));
                }
            }
        }
        out
    }

    /// Equivalence classes in strictly decreasing priority. Only defined when
    /// the classes form a chain.
    pub fn priority_levels(&self) -> Result<Vec<Vec<RuleId>>, RulebookError> {
        let k = self.classes.len();
        for a in 0..k {
            for b in a + 1..k {
                if !self.above[a][b] && !self.above[b][a] {
                    return Err(RulebookError::NotATotalHierarchy(
                        self.rules[self.classes[a][0]].id.clone(),
                        self.rules[self.classes[b][0]].id.clone(),
                    ));
                }
            }
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&c| (0..k).filter(|&d| self.above[d][c]).count());
        Ok(order
            .into_iter()
            .map(|c| {
                self.classes[c]
                    .iter()
                    .map(|&i| self.rules[i].id.clone())
                    .collect()
            })
            .collect())
    }

    /// Orders two previously incomparable rules.
    pub fn refine_priority(&self, above: &str, below: &str) -> Result<Rulebook, RulebookError> {
        let (i, j) = (self.position(above)?, self.position(below)?);
        if self.priority_of_indices(i, j) != Priority::Incomparable {
            return Err(RulebookError::RulesAlreadyComparable(
                above.into(),
                below.into(),
            ));
        }
        let mut edges = self.strict_edges.clone();
        edges.push((above.into(), below.into()));
        Rulebook::build_with_id(
            self.id.clone(),
            self.rules.clone(),
            edges,
            self.equivalences.clone(),
        )
    }

    /// Adds `rule` strictly below every existing class.
    pub fn augment_rule(&self, rule: Rule) -> Result<Rulebook, RulebookError> {
        if self.contains(rule.id.as_str()) {
            return Err(RulebookError::DuplicateRuleId(rule.id));
        }
        let k = self.classes.len();
        let mut edges = self.strict_edges.clone();
        for c in 0..k {
            let is_bottom = !(0..k).any(|d| self.above[c][d]);
            if is_bottom {
                let rep = &self.rules[self.classes[c][0]].id;
                edges.push((rep.clone(), rule.id.clone()));
            }
        }
        let mut rules = self.rules.clone();
        rules.push(rule);
        Rulebook::build_with_id(self.id.clone(), rules, edges, self.equivalences.clone())
    }

    /// Collapses equally ranked rules into one rule scored by `combiner`
    /// over the member metrics. The new rule takes the position of the first
    /// member and inherits every priority relation of the class.
    ///
    /// A threshold is kept only when every member has one; it is the
    /// combiner applied to the member thresholds.
    pub fn aggregate_rules(
        &self,
        ids: &[&str],
        combiner: Combiner,
        new_id: &str,
    ) -> Result<Rulebook, RulebookError> {
        if ids.is_empty() {
            return Err(RulebookError::InvalidAggregation(
                "no rules to aggregate".to_owned(),
            ));
        }
        let mut positions = Vec::with_capacity(ids.len());
        for id in ids {
            let p = self.position(id)?;
            if positions.contains(&p) {
                return Err(RulebookError::InvalidAggregation(format!(
                    "rule `{id}` listed twice"
                )));
            }
            positions.push(p);
        }
        let first = positions[0];
        for &p in &positions[1..] {
            if self.class_of[p] != self.class_of[first] {
                return Err(RulebookError::RulesNotEquallyRanked(
                    self.rules[first].id.clone(),
                    self.rules[p].id.clone(),
                ));
            }
        }
        if let Combiner::WeightedSum(w) = &combiner {
            if w.len() != ids.len() {
                return Err(RulebookError::InvalidAggregation(format!(
                    "{} weights given for {} rules",
                    w.len(),
                    ids.len()
                )));
            }
        }
        let new_rid = RuleId::from(new_id);
        if let Some(&p) = self.index.get(new_id) {
            if !positions.contains(&p) {
                return Err(RulebookError::DuplicateRuleId(new_rid));
            }
        }

        let members: Vec<&Rule> = positions.iter().map(|&p| &self.rules[p]).collect();
        let passthrough = members.len() == 1 && !matches!(combiner, Combiner::WeightedSum(_));
        let metric = if passthrough {
            members[0].metric.clone()
        } else {
            AggregateSpec {
                combiner: combiner.clone(),
                members: members
                    .iter()
                    .map(|r| AggregateMember {
                        id: r.id.clone(),
                        metric: r.metric.clone(),
                    })
                    .collect(),
            }
            .to_binding()
        };
        let thresholds: Option<Vec<f64>> =
            members.iter().map(|r| r.acceptable_violation).collect();
        let merged = Rule {
            id: new_rid.clone(),
            description: members
                .iter()
                .map(|r| r.description.as_str())
                .collect::<Vec<_>>()
                .join("; "),
            metric,
            acceptable_violation: thresholds.map(|t| combiner.apply(&t)),
            count_in_criticality: members.iter().any(|r| r.count_in_criticality),
        };

        let member_set: BTreeSet<&str> = ids.iter().copied().collect();
        let rename = |id: &RuleId| -> RuleId {
            if member_set.contains(id.as_str()) {
                new_rid.clone()
            } else {
                id.clone()
            }
        };

        let mut rules = Vec::with_capacity(self.rules.len() + 1 - ids.len());
        for (i, r) in self.rules.iter().enumerate() {
            if i == first {
                rules.push(merged.clone());
            } else if !positions.contains(&i) {
                rules.push(r.clone());
            }
        }
        let mut edges: Vec<(RuleId, RuleId)> = Vec::new();
        for (a, b) in &self.strict_edges {
            let e = (rename(a), rename(b));
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
        let equivalences: Vec<Vec<RuleId>> = self
            .equivalences
            .iter()
            .map(|g| {
                let mut out: Vec<RuleId> = Vec::new();
                for id in g {
                    let r = rename(id);
                    if !out.contains(&r) {
                        out.push(r);
                    }
                }
                out
            })
            .filter(|g| g.len() > 1)
            .collect();
        Rulebook::build_with_id(self.id.clone(), rules, edges, equivalences)
    }

    /// The rule of `self` that represents `old_id`: either the rule with that
    /// id or an aggregate that folded it in.
    fn image_of(&self, old_id: &str) -> Option<usize> {
        if let Some(&i) = self.index.get(old_id) {
            return Some(i);
        }
        self.rules.iter().position(|r| {
            r.metric.name == AGGREGATE_METRIC
                && AggregateSpec::from_binding(&r.metric)
                    .map(|spec| spec.member_ids().iter().any(|m| m.as_str() == old_id))
                    .unwrap_or(false)
        })
    }

    /// Whether `self` can be obtained from `old` by priority refinement, rule
    /// aggregation and rule augmentation: every old rule has an image here,
    /// and every old strict or equal relation holds between the images.
    pub fn is_refinement_of(&self, old: &Rulebook) -> bool {
        let images: Option<Vec<usize>> = old
            .rules
            .iter()
            .map(|r| self.image_of(r.id.as_str()))
            .collect();
        let Some(images) = images else {
            return false;
        };
        let n = old.rules.len();
        for i in 0..n {
            for j in 0..n {
                let required = old.priority_of_indices(i, j);
                let actual = self.priority_of_indices(images[i], images[j]);
                match required {
                    Priority::Higher | Priority::Lower | Priority::Equal if actual != required => {
                        return false
                    }
                    _ => {}
                }
            }
        }
        true
    }
}

fn validate_rule(rule: &Rule) -> Result<(), RulebookError> {
    let invalid = |reason: &str| RulebookError::InvalidRule {
        id: rule.id.clone(),
        reason: reason.to_owned(),
    };
    if rule.id.as_str().is_empty() {
        return Err(invalid("id must be non-empty"));
    }
    if let Some(t) = rule.acceptable_violation {
        if !t.is_finite() || t < 0.0 {
            return Err(invalid("acceptable_violation must be finite and >= 0"));
        }
    }
    if rule.metric.name.is_empty() {
        return Err(invalid("metric name must be non-empty"));
    }
    Ok(())
}

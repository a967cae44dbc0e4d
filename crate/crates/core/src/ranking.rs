//! Comparators inducing the trajectory pre-order, and ranking into strata.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    ComparisonOutcome, Priority, ProfileMismatch, RuleId, Rulebook, RulebookError,
    ViolationProfile,
};

/// Absolute tolerance on scores when deciding that two differ.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error(transparent)]
    Rulebook(#[from] RulebookError),
    #[error(transparent)]
    ProfileRuleMismatch(#[from] ProfileMismatch),
    #[error("no profiles to rank")]
    NoProfiles,
    #[error("trajectory id `{0}` appears more than once")]
    DuplicateTrajectoryId(String),
    #[error("strict preferences form a cycle among {}", .0.join(", "))]
    CyclicPreference(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparatorKind {
    /// Level-by-level comparison down a total hierarchy.
    #[default]
    Lex,
    /// Witness-based dominance, defined on any pre-order.
    Dominance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationKind {
    #[serde(rename = "total-lexicographic")]
    TotalLexicographic,
    #[serde(rename = "dominance-partial")]
    DominancePartial,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationKind::TotalLexicographic => "total-lexicographic",
            RelationKind::DominancePartial => "dominance-partial",
        })
    }
}

impl From<ComparatorKind> for RelationKind {
    fn from(k: ComparatorKind) -> Self {
        match k {
            ComparatorKind::Lex => RelationKind::TotalLexicographic,
            ComparatorKind::Dominance => RelationKind::DominancePartial,
        }
    }
}

/// A comparator bound to one rulebook, with profiles addressed as score
/// vectors in rule order.
#[derive(Debug, Clone)]
pub struct Comparator<'a> {
    rb: &'a Rulebook,
    kind: ComparatorKind,
    eps: f64,
    // Lex: rule indices per level, highest first.
    levels: Vec<Vec<usize>>,
    // Dominance: higher[a][b] iff rule a strictly outranks rule b.
    higher: Vec<Vec<bool>>,
}

impl<'a> Comparator<'a> {
    pub fn new(rb: &'a Rulebook, kind: ComparatorKind, eps: f64) -> Result<Self, RankError> {
        let ids: Vec<&RuleId> = rb.rule_ids().collect();
        let position = |id: &RuleId| ids.iter().position(|r| *r == id).expect("rule id");
        let (levels, higher) = match kind {
            ComparatorKind::Lex => {
                let levels = rb
                    .priority_levels()?
                    .iter()
                    .map(|lvl| lvl.iter().map(position).collect())
                    .collect();
                (levels, Vec::new())
            }
            ComparatorKind::Dominance => {
                let higher = ids
                    .iter()
                    .map(|a| {
                        ids.iter()
                            .map(|b| {
                                rb.higher_than(a.as_str(), b.as_str())
                                    .map(|p| p == Priority::Higher)
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (Vec::new(), higher)
            }
        };
        Ok(Comparator {
            rb,
            kind,
            eps,
            levels,
            higher,
        })
    }

    pub fn kind(&self) -> ComparatorKind {
        self.kind
    }

    /// Scores of `p` in rule order, after checking it covers the rulebook.
    pub fn vector(&self, p: &ViolationProfile) -> Result<Vec<f64>, ProfileMismatch> {
        p.check_covers(self.rb)?;
        Ok(self.rb.rule_ids().map(|id| p.scores[id]).collect())
    }

    pub fn compare(
        &self,
        x: &ViolationProfile,
        y: &ViolationProfile,
    ) -> Result<ComparisonOutcome, ProfileMismatch> {
        Ok(self.compare_vectors(&self.vector(x)?, &self.vector(y)?))
    }

    pub fn compare_vectors(&self, x: &[f64], y: &[f64]) -> ComparisonOutcome {
        match self.kind {
            ComparatorKind::Lex => self.lex(x, y),
            ComparatorKind::Dominance => self.dominance(x, y),
        }
    }

    fn lex(&self, x: &[f64], y: &[f64]) -> ComparisonOutcome {
        for level in &self.levels {
            let sx: f64 = level.iter().map(|&i| x[i]).sum();
            let sy: f64 = level.iter().map(|&i| y[i]).sum();
            if (sx - sy).abs() > self.eps {
                return if sx < sy {
                    ComparisonOutcome::FirstPreferred
                } else {
                    ComparisonOutcome::SecondPreferred
                };
            }
        }
        ComparisonOutcome::Equivalent
    }

    /// `x` beats `y` when they differ somewhere and every rule on which `x`
    /// is worse is outranked by a rule on which `x` is better.
    fn beats(&self, x: &[f64], y: &[f64]) -> bool {
        let eps = self.eps;
        let n = x.len();
        if (0..n).all(|r| (x[r] - y[r]).abs() <= eps) {
            return false;
        }
        (0..n).filter(|&r| x[r] > y[r] + eps).all(|r| {
            (0..n).any(|w| self.higher[w][r] && x[w] < y[w] - eps)
        })
    }

    fn dominance(&self, x: &[f64], y: &[f64]) -> ComparisonOutcome {
        match (self.beats(x, y), self.beats(y, x)) {
            (true, false) => ComparisonOutcome::FirstPreferred,
            (false, true) => ComparisonOutcome::SecondPreferred,
            (false, false) if x.iter().zip(y).all(|(a, b)| (a - b).abs() <= self.eps) => {
                ComparisonOutcome::Equivalent
            }
            // Both directions cannot hold: the worse side on a maximal
            // differing rule has no witness.
            _ => ComparisonOutcome::Incomparable,
        }
    }
}

/// Lexicographic comparison down the priority levels; each level scores the
/// sum of its rules. Requires a total hierarchy.
pub fn compare_lex(
    rb: &Rulebook,
    x: &ViolationProfile,
    y: &ViolationProfile,
    eps: f64,
) -> Result<ComparisonOutcome, RankError> {
    Ok(Comparator::new(rb, ComparatorKind::Lex, eps)?.compare(x, y)?)
}

/// Witness-based dominance comparison on an arbitrary pre-order.
pub fn compare_dominance(
    rb: &Rulebook,
    x: &ViolationProfile,
    y: &ViolationProfile,
    eps: f64,
) -> Result<ComparisonOutcome, RankError> {
    Ok(Comparator::new(rb, ComparatorKind::Dominance, eps)?.compare(x, y)?)
}

/// Trajectories ranked into preference strata, most preferred first.
///
/// Each stratum is an antichain of equivalence groups. Under the
/// lexicographic comparator every stratum holds exactly one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingStrata {
    pub relation_kind: RelationKind,
    pub strata: Vec<Vec<Vec<String>>>,
}

impl RankingStrata {
    /// Trajectory ids of stratum `i`, flattened.
    pub fn ids(&self, i: usize) -> Vec<String> {
        self.strata
            .get(i)
            .map(|s| s.iter().flatten().cloned().collect())
            .unwrap_or_default()
    }

    /// All strata as flat id lists.
    pub fn flattened(&self) -> Vec<Vec<String>> {
        (0..self.strata.len()).map(|i| self.ids(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }
}

/// Stratifies `ids` from pairwise outcomes. Equivalent pairs merge into
/// groups; groups are peeled off in layers of currently non-dominated ones.
pub fn rank_by<E, F>(
    ids: &[String],
    relation_kind: RelationKind,
    mut compare: F,
) -> Result<RankingStrata, E>
where
    F: FnMut(usize, usize) -> Result<ComparisonOutcome, E>,
    E: From<RankError>,
{
    let n = ids.len();
    if n == 0 {
        return Err(RankError::NoProfiles.into());
    }
    for (i, id) in ids.iter().enumerate() {
        if ids[..i].contains(id) {
            return Err(RankError::DuplicateTrajectoryId(id.clone()).into());
        }
    }

    let mut prefers = vec![vec![false; n]; n];
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            match compare(i, j)? {
                ComparisonOutcome::FirstPreferred => prefers[i][j] = true,
                ComparisonOutcome::SecondPreferred => prefers[j][i] = true,
                ComparisonOutcome::Equivalent => {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                ComparisonOutcome::Incomparable => {}
            }
        }
    }

    // Groups numbered by their first member.
    let mut group_of = vec![0usize; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of_root = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if group_of_root[r] == usize::MAX {
            group_of_root[r] = groups.len();
            groups.push(Vec::new());
        }
        group_of[i] = group_of_root[r];
        groups[group_of[i]].push(i);
    }
    let g = groups.len();
    let mut above = vec![vec![false; g]; g];
    for i in 0..n {
        for j in 0..n {
            if prefers[i][j] {
                let (a, b) = (group_of[i], group_of[j]);
                if a == b {
                    let cyc = groups[a].iter().map(|&k| ids[k].clone()).collect();
                    return Err(RankError::CyclicPreference(cyc).into());
                }
                above[a][b] = true;
            }
        }
    }

    let mut remaining: Vec<usize> = (0..g).collect();
    let mut strata = Vec::new();
    while !remaining.is_empty() {
        let (top, rest): (Vec<usize>, Vec<usize>) = remaining
            .iter()
            .partition(|&&b| !remaining.iter().any(|&a| above[a][b]));
        if top.is_empty() {
            let cyc = rest
                .iter()
                .flat_map(|&grp| groups[grp].iter().map(|&k| ids[k].clone()))
                .collect();
            return Err(RankError::CyclicPreference(cyc).into());
        }
        strata.push(
            top.iter()
                .map(|&grp| groups[grp].iter().map(|&k| ids[k].clone()).collect())
                .collect(),
        );
        remaining = rest;
    }
    Ok(RankingStrata {
        relation_kind,
        strata,
    })
}

/// Ranks the profiles' trajectories under the chosen comparator.
pub fn rank(
    rb: &Rulebook,
    profiles: &[ViolationProfile],
    kind: ComparatorKind,
    eps: f64,
) -> Result<RankingStrata, RankError> {
    if profiles.is_empty() {
        return Err(RankError::NoProfiles);
    }
    let cmp = Comparator::new(rb, kind, eps)?;
    let vectors = profiles
        .iter()
        .map(|p| cmp.vector(p))
        .collect::<Result<Vec<_>, _>>()?;
    let ids: Vec<String> = profiles.iter().map(|p| p.trajectory_id.clone()).collect();
    rank_by(&ids, kind.into(), |i, j| {
        Ok::<_, RankError>(cmp.compare_vectors(&vectors[i], &vectors[j]))
    })
}

/// The non-dominated trajectories: the first stratum of [`rank`].
pub fn best(
    rb: &Rulebook,
    profiles: &[ViolationProfile],
    kind: ComparatorKind,
    eps: f64,
) -> Result<Vec<String>, RankError> {
    Ok(rank(rb, profiles, kind, eps)?.ids(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MetricBinding, Rule};

    fn rule(id: &str) -> Rule {
        Rule::new(id, id, MetricBinding::new("stay_in_lane"))
    }

    fn chain(ids: &[&str]) -> Rulebook {
        let edges = ids.windows(2).map(|w| (w[0].into(), w[1].into())).collect();
        Rulebook::build(ids.iter().map(|i| rule(i)).collect(), edges, vec![]).unwrap()
    }

    fn prof(id: &str, scores: &[(&str, f64)]) -> ViolationProfile {
        ViolationProfile::from_scores(id, scores.iter().copied())
    }

    #[test]
    fn lex_decides_at_highest_differing_level() {
        let rb = chain(&["R1", "R2", "R3"]);
        let a = prof("a", &[("R1", 0.0), ("R2", 0.0), ("R3", 41.0)]);
        let b = prof("b", &[("R1", 0.3), ("R2", 0.0), ("R3", 28.0)]);
        assert_eq!(compare_lex(&rb, &a, &b, DEFAULT_EPSILON).unwrap(), ComparisonOutcome::FirstPreferred);
        assert_eq!(compare_lex(&rb, &b, &a, DEFAULT_EPSILON).unwrap(), ComparisonOutcome::SecondPreferred);
        assert_eq!(compare_lex(&rb, &a, &a, DEFAULT_EPSILON).unwrap(), ComparisonOutcome::Equivalent);
    }

    #[test]
    fn lex_sums_within_level() {
        let rb = Rulebook::build(
            vec![rule("A"), rule("B")],
            vec![],
            vec![vec!["A".into(), "B".into()]],
        )
        .unwrap();
        let x = prof("x", &[("A", 0.1), ("B", 0.5)]);
        let y = prof("y", &[("A", 0.4), ("B", 0.1)]);
        assert_eq!(compare_lex(&rb, &x, &y, 0.0).unwrap(), ComparisonOutcome::SecondPreferred);
        // Dominance sees a trade-off inside one class.
        assert_eq!(compare_dominance(&rb, &x, &y, 0.0).unwrap(), ComparisonOutcome::Incomparable);
    }

    #[test]
    fn lex_needs_total_hierarchy() {
        let rb = Rulebook::build(vec![rule("A"), rule("B")], vec![], vec![]).unwrap();
        let x = prof("x", &[("A", 0.0), ("B", 0.0)]);
        assert!(matches!(
            compare_lex(&rb, &x, &x, 0.0),
            Err(RankError::Rulebook(RulebookError::NotATotalHierarchy(..)))
        ));
    }

    #[test]
    fn mismatched_profile_rejected() {
        let rb = chain(&["A", "B"]);
        let x = prof("x", &[("A", 0.0)]);
        let y = prof("y", &[("A", 0.0), ("B", 1.0)]);
        assert!(matches!(
            compare_lex(&rb, &x, &y, 0.0),
            Err(RankError::ProfileRuleMismatch(ProfileMismatch::MissingRule { .. }))
        ));
        let z = prof("z", &[("A", 0.0), ("B", 1.0), ("C", 0.0)]);
        assert!(matches!(
            compare_dominance(&rb, &y, &z, 0.0),
            Err(RankError::ProfileRuleMismatch(ProfileMismatch::ExtraRule { .. }))
        ));
    }

    #[test]
    fn dominance_incomparable_rules() {
        let rb = Rulebook::build(vec![rule("A"), rule("B")], vec![], vec![]).unwrap();
        let x = prof("x", &[("A", 0.0), ("B", 1.0)]);
        let y = prof("y", &[("A", 1.0), ("B", 0.0)]);
        assert_eq!(compare_dominance(&rb, &x, &y, 0.0).unwrap(), ComparisonOutcome::Incomparable);
        assert_eq!(compare_dominance(&rb, &x, &x, 0.0).unwrap(), ComparisonOutcome::Equivalent);
        let better = prof("w", &[("A", 0.0), ("B", 0.0)]);
        assert_eq!(compare_dominance(&rb, &better, &x, 0.0).unwrap(), ComparisonOutcome::FirstPreferred);
    }

    #[test]
    fn dominance_uses_higher_witness() {
        let rb = chain(&["A", "B"]);
        let x = prof("x", &[("A", 0.0), ("B", 5.0)]);
        let y = prof("y", &[("A", 1.0), ("B", 0.0)]);
        assert_eq!(compare_dominance(&rb, &x, &y, 0.0).unwrap(), ComparisonOutcome::FirstPreferred);
    }

    #[test]
    fn eps_absorbs_small_differences() {
        let rb = chain(&["A"]);
        let x = prof("x", &[("A", 0.0)]);
        let y = prof("y", &[("A", 1e-12)]);
        assert_eq!(compare_lex(&rb, &x, &y, DEFAULT_EPSILON).unwrap(), ComparisonOutcome::Equivalent);
        assert_eq!(compare_lex(&rb, &x, &y, 0.0).unwrap(), ComparisonOutcome::FirstPreferred);
    }

    #[test]
    fn rank_orders_strata() {
        let rb = chain(&["R1", "R2", "R3"]);
        let ps = vec![
            prof("a", &[("R1", 0.0), ("R2", 0.0), ("R3", 41.3)]),
            prof("b", &[("R1", 0.2), ("R2", 0.0), ("R3", 33.0)]),
            prof("c", &[("R1", 0.0), ("R2", 0.0), ("R3", 33.0)]),
        ];
        let r = rank(&rb, &ps, ComparatorKind::Lex, DEFAULT_EPSILON).unwrap();
        assert_eq!(r.flattened(), vec![vec!["c"], vec!["a"], vec!["b"]]);
        assert_eq!(r.relation_kind, RelationKind::TotalLexicographic);
        assert_eq!(best(&rb, &ps, ComparatorKind::Lex, DEFAULT_EPSILON).unwrap(), vec!["c"]);
    }

    #[test]
    fn rank_groups_equivalent_profiles() {
        let rb = chain(&["A"]);
        let ps = vec![prof("x", &[("A", 1.0)]), prof("y", &[("A", 1.0)]), prof("z", &[("A", 0.0)])];
        let r = rank(&rb, &ps, ComparatorKind::Lex, 0.0).unwrap();
        assert_eq!(r.strata, vec![vec![vec!["z".to_string()]], vec![vec!["x".into(), "y".into()]]]);
        let same: Vec<_> = ps[..2].to_vec();
        assert_eq!(best(&rb, &same, ComparatorKind::Lex, 0.0).unwrap(), vec!["x", "y"]);
    }

    #[test]
    fn dominance_keeps_incomparable_winners_together() {
        let rb = Rulebook::build(vec![rule("A"), rule("B")], vec![], vec![]).unwrap();
        let ps = vec![
            prof("x", &[("A", 0.0), ("B", 1.0)]),
            prof("y", &[("A", 1.0), ("B", 0.0)]),
            prof("z", &[("A", 1.0), ("B", 1.0)]),
        ];
        let r = rank(&rb, &ps, ComparatorKind::Dominance, 0.0).unwrap();
        assert_eq!(r.flattened(), vec![vec!["x", "y"], vec!["z"]]);
        assert_eq!(r.strata[0].len(), 2);
        assert_eq!(best(&rb, &ps, ComparatorKind::Dominance, 0.0).unwrap(), vec!["x", "y"]);
    }

    #[test]
    fn rank_edge_cases() {
        let rb = chain(&["A"]);
        assert_eq!(rank(&rb, &[], ComparatorKind::Lex, 0.0).unwrap_err(), RankError::NoProfiles);
        let one = vec![prof("x", &[("A", 3.0)])];
        assert_eq!(rank(&rb, &one, ComparatorKind::Lex, 0.0).unwrap().flattened(), vec![vec!["x"]]);
        let dup = vec![prof("x", &[("A", 3.0)]), prof("x", &[("A", 1.0)])];
        assert_eq!(
            rank(&rb, &dup, ComparatorKind::Lex, 0.0).unwrap_err(),
            RankError::DuplicateTrajectoryId("x".into())
        );
    }

    #[test]
    fn rank_by_reports_cycles() {
        let ids: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
        // p > q > r > p
        let err = rank_by::<RankError, _>(&ids, RelationKind::DominancePartial, |i, j| {
            Ok(match (i, j) {
                (0, 1) | (1, 2) => ComparisonOutcome::FirstPreferred,
                _ => ComparisonOutcome::SecondPreferred,
            })
        })
        .unwrap_err();
        assert!(matches!(err, RankError::CyclicPreference(_)));
    }
}

use crate::model::{ComparisonOutcome, ProfileMismatch, Rulebook, ViolationProfile};
use crate::ranking::{rank_by, RankError, RankingStrata, RelationKind};

/// `geq[a][b]`: rule `a` ranks at least as high as rule `b`, from the
/// authoring data closed under transitivity.
fn at_least_matrix(rb: &Rulebook) -> Vec<Vec<bool>> {
    let ids: Vec<&str> = rb.rules().iter().map(|r| r.id.as_str()).collect();
    let n = ids.len();
    let pos = |s: &str| ids.iter().position(|i| *i == s).unwrap();
    let mut geq = vec![vec![false; n]; n];
    for (i, row) in geq.iter_mut().enumerate() {
        row[i] = true;
    }
    for (hi, lo) in rb.strict_edges() {
        geq[pos(hi.as_str())][pos(lo.as_str())] = true;
    }
    for group in rb.equivalences() {
        for a in group {
            for b in group {
                geq[pos(a.as_str())][pos(b.as_str())] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if geq[i][k] && geq[k][j] {
                    geq[i][j] = true;
                }
            }
        }
    }
    geq
}

/// Dominance read straight off its definition, with exact score
/// comparisons: `x` is preferred when the profiles differ and every rule on
/// which `x` scores worse has a strictly higher rule on which `x` scores
/// better.
pub fn naive_dominance(
    rb: &Rulebook,
    vx: &ViolationProfile,
    vy: &ViolationProfile,
) -> Result<ComparisonOutcome, ProfileMismatch> {
    vx.check_covers(rb)?;
    vy.check_covers(rb)?;
    let geq = at_least_matrix(rb);
    let n = rb.rules().len();
    let x: Vec<f64> = rb.rules().iter().map(|r| vx.scores[&r.id]).collect();
    let y: Vec<f64> = rb.rules().iter().map(|r| vy.scores[&r.id]).collect();

    let mut differing = 0;
    let mut x_unexcused = 0;
    let mut y_unexcused = 0;
    for r in 0..n {
        if x[r] != y[r] {
            differing += 1;
        }
        let mut x_witness = 0;
        let mut y_witness = 0;
        for w in 0..n {
            let higher = geq[w][r] && !geq[r][w];
            if higher && x[w] < y[w] {
                x_witness += 1;
            }
            if higher && y[w] < x[w] {
                y_witness += 1;
            }
        }
        if x[r] > y[r] && x_witness == 0 {
            x_unexcused += 1;
        }
        if y[r] > x[r] && y_witness == 0 {
            y_unexcused += 1;
        }
    }
    let x_preferred = differing > 0 && x_unexcused == 0;
    let y_preferred = differing > 0 && y_unexcused == 0;
    Ok(match (x_preferred, y_preferred, differing) {
        (true, false, _) => ComparisonOutcome::FirstPreferred,
        (false, true, _) => ComparisonOutcome::SecondPreferred,
        (_, _, 0) => ComparisonOutcome::Equivalent,
        _ => ComparisonOutcome::Incomparable,
    })
}

/// Strata of `profiles` under [`naive_dominance`].
pub fn naive_rank(rb: &Rulebook, profiles: &[ViolationProfile]) -> Result<RankingStrata, RankError> {
    let ids: Vec<String> = profiles.iter().map(|p| p.trajectory_id.clone()).collect();
    rank_by(&ids, RelationKind::DominancePartial, |i, j| {
        naive_dominance(rb, &profiles[i], &profiles[j]).map_err(RankError::from)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MetricBinding, Rule};

    fn rule(id: &str) -> Rule {
        Rule::new(id, "", MetricBinding::new("stay_in_lane"))
    }

    #[test]
    fn single_rule_is_sign_comparison() {
        let rb = Rulebook::build(vec![rule("A")], vec![], vec![]).unwrap();
        let p = |v: f64| ViolationProfile::from_scores("p", [("A", v)]);
        assert_eq!(naive_dominance(&rb, &p(0.1), &p(0.2)).unwrap(), ComparisonOutcome::FirstPreferred);
        assert_eq!(naive_dominance(&rb, &p(0.3), &p(0.2)).unwrap(), ComparisonOutcome::SecondPreferred);
        assert_eq!(naive_dominance(&rb, &p(0.2), &p(0.2)).unwrap(), ComparisonOutcome::Equivalent);
    }

    #[test]
    fn equivalent_rules_give_no_witness() {
        let rb = Rulebook::build(vec![rule("A"), rule("B")], vec![], vec![vec!["A".into(), "B".into()]]).unwrap();
        let x = ViolationProfile::from_scores("x", [("A", 0.0), ("B", 1.0)]);
        let y = ViolationProfile::from_scores("y", [("A", 1.0), ("B", 0.0)]);
        assert_eq!(naive_dominance(&rb, &x, &y).unwrap(), ComparisonOutcome::Incomparable);
    }

    #[test]
    fn witness_through_transitive_edge() {
        let rb = Rulebook::build(
            vec![rule("A"), rule("B"), rule("C")],
            vec![("A".into(), "B".into()), ("B".into(), "C".into())],
            vec![],
        )
        .unwrap();
        let x = ViolationProfile::from_scores("x", [("A", 0.0), ("B", 0.0), ("C", 9.0)]);
        let y = ViolationProfile::from_scores("y", [("A", 1.0), ("B", 0.0), ("C", 0.0)]);
        assert_eq!(naive_dominance(&rb, &x, &y).unwrap(), ComparisonOutcome::FirstPreferred);
    }
}

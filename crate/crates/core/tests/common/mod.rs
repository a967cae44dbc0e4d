#![allow(dead_code)]

use proptest::prelude::*;
use rulekit::model::{MetricBinding, Rule, RuleId, Rulebook, ViolationProfile};

pub fn rule(id: &str) -> Rule {
    Rule::new(id, format!("rule {id}"), MetricBinding::new("stay_in_lane"))
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("r{i}")).collect()
}

/// Arbitrary pre-order over 1..=`max` rules: forward edges along a random
/// permutation plus random equivalence groups, keeping only acyclic results.
pub fn arb_rulebook(max: usize) -> impl Strategy<Value = Rulebook> {
    (1..=max)
        .prop_flat_map(|n| {
            (
                Just(n),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
                prop::collection::vec(0u8..4, n * n),
                prop::collection::vec(0usize..n + 2, n),
            )
        })
        .prop_filter_map("cyclic", |(n, perm, edge_bits, groups)| {
            let names = ids(n);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if edge_bits[a * n + b] == 0 {
                        edges.push((RuleId::from(names[perm[a]].as_str()), RuleId::from(names[perm[b]].as_str())));
                    }
                }
            }
            let mut equivalences: Vec<Vec<RuleId>> = Vec::new();
            for g in 0..n {
                let members: Vec<RuleId> = (0..n)
                    .filter(|&i| groups[i] == g)
                    .map(|i| RuleId::from(names[i].as_str()))
                    .collect();
                if members.len() >= 2 {
                    equivalences.push(members);
                }
            }
            Rulebook::build(names.iter().map(|s| rule(s)).collect(), edges, equivalences).ok()
        })
}

/// Rulebook whose classes form a chain: each rule gets a level; all rules of
/// a level are equivalent and every rule outranks the next level's rules.
pub fn arb_total_rulebook(max: usize) -> impl Strategy<Value = Rulebook> {
    (1..=max)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0usize..n, n)))
        .prop_map(|(n, raw)| {
            let names = ids(n);
            let mut used: Vec<usize> = raw.clone();
            used.sort_unstable();
            used.dedup();
            let level: Vec<usize> = raw.iter().map(|l| used.iter().position(|u| u == l).unwrap()).collect();
            let members = |l: usize| -> Vec<RuleId> {
                (0..n).filter(|&i| level[i] == l).map(|i| RuleId::from(names[i].as_str())).collect()
            };
            let mut edges = Vec::new();
            for l in 0..used.len().saturating_sub(1) {
                for a in members(l) {
                    for b in members(l + 1) {
                        edges.push((a.clone(), b));
                    }
                }
            }
            let equivalences = (0..used.len()).map(members).filter(|m| m.len() >= 2).collect();
            Rulebook::build(names.iter().map(|s| rule(s)).collect(), edges, equivalences).unwrap()
        })
}

/// Chain `r0 > r1 > ... > r{n-1}`.
pub fn chain(n: usize) -> Rulebook {
    let names = ids(n);
    let edges = names.windows(2).map(|w| (w[0].as_str().into(), w[1].as_str().into())).collect();
    Rulebook::build(names.iter().map(|s| rule(s)).collect(), edges, vec![]).unwrap()
}

/// Rulebook with singleton classes and random acyclic edges.
pub fn arb_singleton_rulebook(max: usize) -> impl Strategy<Value = Rulebook> {
    (1..=max)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(any::<bool>(), n * n)))
        .prop_map(|(n, bits)| {
            let names = ids(n);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if bits[a * n + b] {
                        edges.push((names[a].as_str().into(), names[b].as_str().into()));
                    }
                }
            }
            Rulebook::build(names.iter().map(|s| rule(s)).collect(), edges, vec![]).unwrap()
        })
}

/// Scores that are exact multiples of 1/4 in [0, 2].
pub fn rational_scores(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..=8).prop_map(|k| f64::from(k) / 4.0), n)
}

pub fn profile(rb: &Rulebook, id: &str, scores: &[f64]) -> ViolationProfile {
    ViolationProfile {
        trajectory_id: id.to_owned(),
        scores: rb.rule_ids().cloned().zip(scores.iter().copied()).collect(),
    }
}

/// A rulebook together with `k` profiles over it.
pub fn with_profiles<S>(rbs: S, k: usize) -> impl Strategy<Value = (Rulebook, Vec<ViolationProfile>)>
where
    S: Strategy<Value = Rulebook>,
{
    rbs.prop_flat_map(move |rb| {
        let n = rb.len();
        (Just(rb), prop::collection::vec(rational_scores(n), k))
    })
    .prop_map(|(rb, vs)| {
        let ps = vs
            .iter()
            .enumerate()
            .map(|(i, v)| profile(&rb, &format!("t{i}"), v))
            .collect();
        (rb, ps)
    })
}

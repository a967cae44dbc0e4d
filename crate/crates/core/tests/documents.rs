//! Document round-trips, canonical output, and parser robustness.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use proptest::prelude::*;
use rulekit::geometry::{Point, Polygon};
use rulekit::io::{self, parse_report, parse_rulebook, parse_scenario, parse_trajectory, serialize, Document, ParseError};
use rulekit::model::{EgoDims, EgoState, Goal, MetricBinding, Obstacle, ObstacleFootprint, Rule, RuleId, Rulebook, Scenario, Trajectory};
use rulekit::verify::{Aggregates, CaseReport, CaseStatus, CriticalityTag, VerificationReport};
use serde_json::json;

fn arb_id() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_-]{0,10}"
}

fn arb_binding() -> impl Strategy<Value = MetricBinding> {
    prop_oneof![
        Just(MetricBinding::new("stay_in_lane")),
        Just(MetricBinding::new("time_to_goal")),
        (0.01..5.0f64, 0.0..2.0f64, any::<bool>(), 0.0..3.0f64).prop_map(|(base, gain, shortfall, ped)| {
            MetricBinding::with_params(
                "clearance",
                json!({
                    "base_clearance": base,
                    "speed_gain": gain,
                    "mode": if shortfall { "shortfall" } else { "fraction" },
                    "category_offsets": {"pedestrian": ped},
                }),
            )
        }),
    ]
}

fn arb_rulebook_doc() -> impl Strategy<Value = Rulebook> {
    (
        arb_id(),
        common::arb_rulebook(6),
        prop::collection::vec((arb_binding(), prop::option::of(0.0..10.0f64), any::<bool>(), ".{0,20}"), 6),
    )
        .prop_map(|(id, shape, extras)| {
            let rules = shape
                .rules()
                .iter()
                .zip(extras)
                .map(|(r, (metric, threshold, counted, desc))| Rule {
                    id: r.id.clone(),
                    description: desc,
                    metric,
                    acceptable_violation: threshold,
                    count_in_criticality: counted,
                })
                .collect();
            Rulebook::build_with_id(id, rules, shape.strict_edges().to_vec(), shape.equivalences().to_vec()).unwrap()
        })
}

fn arb_polygon() -> impl Strategy<Value = Polygon> {
    (-100.0..100.0f64, -100.0..100.0f64, 0.5..20.0f64, 3usize..8, 0.0..TAU).prop_map(|(cx, cy, r, k, rot)| {
        let pts = (0..k)
            .map(|i| {
                let a = rot + TAU * i as f64 / k as f64;
                Point::new(cx + r * a.cos(), cy + r * a.sin())
            })
            .collect();
        Polygon::new(pts).unwrap()
    })
}

fn arb_scenario() -> impl Strategy<Value = Scenario> {
    (1usize..6).prop_flat_map(|horizon| {
        let obstacle = (
            "[a-z]{1,8}",
            prop_oneof![
                arb_polygon().prop_map(ObstacleFootprint::Static),
                prop::collection::vec(arb_polygon(), horizon + 1).prop_map(ObstacleFootprint::Steps),
            ],
        )
            .prop_map(|(category, footprint)| Obstacle { category, footprint });
        (
            arb_id(),
            0.01..2.0f64,
            Just(horizon),
            (0.5..10.0f64, 0.5..4.0f64),
            prop::collection::vec(arb_polygon(), 1..3),
            prop::collection::vec(obstacle, 0..3),
            (-50.0..50.0f64, -50.0..50.0f64, 0.1..5.0f64),
        )
            .prop_map(|(id, dt, horizon_steps, (length, width), lanes, obstacles, (gx, gy, radius))| Scenario {
                id,
                dt,
                horizon_steps,
                ego: EgoDims { length, width },
                lanes,
                obstacles,
                goal: Goal { center: Point::new(gx, gy), radius },
            })
    })
}

fn arb_trajectory() -> impl Strategy<Value = Trajectory> {
    (
        arb_id(),
        0.01..1.0f64,
        -100.0..100.0f64,
        any::<bool>(),
        prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64, -3.2..3.2f64, 0.0..40.0f64), 1..30),
    )
        .prop_map(|(id, dt, t0, declare, raw)| Trajectory {
            id,
            declared_dt: declare.then_some(dt),
            states: raw
                .into_iter()
                .enumerate()
                .map(|(i, (x, y, heading, speed))| EgoState { t: t0 + dt * i as f64, x, y, heading, speed })
                .collect(),
        })
        .prop_filter("spacing", |t| t.validate().is_ok())
}

fn arb_report() -> impl Strategy<Value = VerificationReport> {
    let rule_names: Vec<RuleId> = ["R1", "R2", "R3"].iter().map(|s| RuleId::from(*s)).collect();
    let names = rule_names.clone();
    let row = (
        arb_id(),
        arb_id(),
        0u8..3,
        prop::collection::vec(0.0..50.0f64, 3),
        prop::collection::vec(0u32..3, 3),
        ".{0,30}",
    )
        .prop_map(move |(sid, tid, kind, scores, counts, err)| {
            let status = [CaseStatus::Pass, CaseStatus::Fail, CaseStatus::Error][kind as usize];
            let evaluated = status != CaseStatus::Error;
            CaseReport {
                scenario_id: sid,
                trajectory_id: tid,
                status,
                scores: evaluated.then(|| names.iter().cloned().zip(scores).collect::<BTreeMap<_, _>>()),
                violated: if status == CaseStatus::Fail { vec![names[0].clone()] } else { vec![] },
                criticality: evaluated.then(|| CriticalityTag {
                    scalar: rulekit::verify::criticality_scalar(&counts, 2),
                    counts,
                }),
                error: (!evaluated).then_some(err),
            }
        });
    (arb_id(), prop::collection::vec(row, 1..8), prop::collection::vec(0.0..1.0f64, 3), 0.0..1e-6f64).prop_map(
        move |(id, cases, thresholds, epsilon)| {
            let rules: Vec<(RuleId, f64)> = rule_names.iter().cloned().zip(thresholds).collect();
            let aggregates = Aggregates::compute(&cases, &rules, epsilon);
            VerificationReport { rulebook_id: id, epsilon, cases, aggregates }
        },
    )
}

fn round_trip<D: Document + PartialEq + std::fmt::Debug>(v: &D) -> Result<(), TestCaseError> {
    let text = serialize(v);
    let back: D = io::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
    prop_assert_eq!(&back, v);
    prop_assert_eq!(serialize(&back), text);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rulebooks_round_trip(rb in arb_rulebook_doc()) {
        round_trip(&rb)?;
    }

    #[test]
    fn scenarios_round_trip(sc in arb_scenario()) {
        round_trip(&sc)?;
    }

    #[test]
    fn trajectories_round_trip(t in arb_trajectory()) {
        round_trip(&t)?;
    }

    #[test]
    fn reports_round_trip(r in arb_report()) {
        round_trip(&r)?;
        prop_assert_eq!(parse_report(&serialize(&r)).unwrap().recompute_aggregates(), r.aggregates);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        for result in parse_all(&text) {
            if let Err(ParseError::Syntax { line, .. }) = result {
                prop_assert!(line >= 1);
            }
        }
    }

    #[test]
    fn mutated_documents_never_panic(
        doc in 0usize..4,
        edits in prop::collection::vec((any::<prop::sample::Index>(), 0u8..3, any::<char>()), 1..6),
    ) {
        let mut text: Vec<char> = fixture_texts()[doc].chars().collect();
        for (at, op, c) in edits {
            let i = at.index(text.len().max(1)).min(text.len());
            match op {
                0 if i < text.len() => { text.remove(i); }
                1 => text.insert(i, c),
                _ if i < text.len() => text[i] = c,
                _ => {}
            }
        }
        let text: String = text.into_iter().collect();
        let _ = parse_all(&text);
    }
}

fn parse_all(text: &str) -> Vec<Result<(), ParseError>> {
    vec![
        parse_rulebook(text).map(drop),
        parse_scenario(text).map(drop),
        parse_trajectory(text).map(drop),
        parse_report(text).map(drop),
        io::parse_manifest(text).map(drop),
    ]
}

fn fixture_texts() -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    ["rulebook.json", "scenario2/scenario.json", "scenario1/trajectories/c.json", "expected_report.json"]
        .iter()
        .map(|f| fs::read_to_string(dir.join(f)).unwrap())
        .collect()
}

#[test]
fn committed_fixtures_are_canonical() {
    let texts = fixture_texts();
    assert_eq!(serialize(&parse_rulebook(&texts[0]).unwrap()), texts[0]);
    let sc = parse_scenario(&texts[1]).unwrap();
    assert_eq!(sc.lanes[0].vertices()[1], Point::new(3.8, 0.0));
    assert_eq!(serialize(&sc), texts[1]);
    let t = parse_trajectory(&texts[2]).unwrap();
    assert_eq!((t.len(), t.dt()), (41, Some(0.5)));
    assert_eq!(serialize(&t), texts[2]);
    assert_eq!(serialize(&parse_report(&texts[3]).unwrap()), texts[3]);
}

#[test]
fn tampered_report_aggregates_rejected() {
    let text = fixture_texts()[3].replacen("\"failed\": 3", "\"failed\": 2", 1);
    assert!(matches!(parse_report(&text), Err(ParseError::Schema { path, .. }) if path.starts_with("body.aggregates")));
}

#[test]
fn serialization_is_byte_stable() {
    let rb = parse_rulebook(&fixture_texts()[0]).unwrap();
    let a = serialize(&rb);
    let b = serialize(&rb.clone());
    assert_eq!(a, b);
}

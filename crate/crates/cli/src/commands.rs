use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rulekit::io::{format_table, load_cases, parse_manifest, render_report_table, serialize, Document, Reader};
use rulekit::model::{Combiner, MetricBinding, Rule, Rulebook, Scenario, Trajectory};
use rulekit::ranking::{rank, RankingStrata};
use rulekit::verify::{check_acceptable_within, criticality_within, verify_batch};
use rulekit::{evaluate_profile, MetricRegistry};
use serde_json::{json, Value};

use crate::{Cli, Command, Format, RefineOp, Verdict};

struct Ctx {
    registry: MetricRegistry,
    lenient: bool,
}

impl Ctx {
    fn load<D: Document>(&self, path: &Path) -> Result<D> {
        let reader = Reader {
            registry: &self.registry,
            lenient: self.lenient,
        };
        let parsed = reader.load::<D>(path)?;
        for w in &parsed.warnings {
            eprintln!("warning: {}: {w}", path.display());
        }
        Ok(parsed.value)
    }
}

pub(crate) fn run(cli: Cli) -> Result<Verdict> {
    let ctx = Ctx {
        registry: MetricRegistry::default(),
        lenient: cli.lenient,
    };
    match cli.command {
        Command::Check { rulebook } => check(&ctx, &rulebook),
        Command::Score {
            rulebook,
            scenario,
            trajectory,
            tolerance,
            format,
        } => score(&ctx, &rulebook, &scenario, &trajectory, tolerance.epsilon, format),
        Command::Rank {
            rulebook,
            scenario,
            trajectories,
            comparator,
            tolerance,
            format,
        } => rank_dir(&ctx, &rulebook, &scenario, &trajectories, comparator.into(), tolerance.epsilon, format),
        Command::Verify {
            rulebook,
            cases,
            out,
            tolerance,
            format,
        } => verify(&ctx, &rulebook, &cases, &out, tolerance.epsilon, format),
        Command::Refine {
            rulebook,
            op,
            args,
            combiner,
            weights,
            params,
            threshold,
            description,
            no_criticality,
            out,
        } => {
            let rb: Rulebook = ctx.load(&rulebook)?;
            let refined = match op {
                RefineOp::Refine => match args.as_slice() {
                    [above, below] => rb.refine_priority(above, below)?,
                    _ => bail!("refine takes two rule ids: ABOVE BELOW"),
                },
                RefineOp::Aggregate => {
                    let [new_id, members @ ..] = args.as_slice() else {
                        bail!("aggregate takes NEW_ID MEMBER...");
                    };
                    if members.is_empty() {
                        bail!("aggregate takes NEW_ID MEMBER...");
                    }
                    let weights = (!weights.is_empty()).then_some(weights);
                    let combiner = Combiner::from_name(&combiner, weights).map_err(|e| anyhow!(e))?;
                    let members: Vec<&str> = members.iter().map(String::as_str).collect();
                    rb.aggregate_rules(&members, combiner, new_id)?
                }
                RefineOp::Augment => {
                    let [id, metric] = args.as_slice() else {
                        bail!("augment takes ID METRIC");
                    };
                    let params: Value = match params {
                        Some(text) => serde_json::from_str(&text).context("--params is not valid JSON")?,
                        None => Value::Null,
                    };
                    let binding = MetricBinding::with_params(metric.as_str(), params);
                    ctx.registry.validate_binding(&binding)?;
                    let mut rule = Rule::new(id.as_str(), description, binding);
                    rule.acceptable_violation = threshold;
                    rule.count_in_criticality = !no_criticality;
                    rb.augment_rule(rule)?
                }
            };
            write(&out, &serialize(&refined))?;
            println!("wrote {} ({} rules)", out.display(), refined.len());
            print_structure(&refined);
            Ok(Verdict::Pass)
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn print_structure(rb: &Rulebook) {
    match rb.priority_levels() {
        Ok(levels) => {
            println!("levels:");
            for (i, level) in levels.iter().enumerate() {
                let ids: Vec<&str> = level.iter().map(|r| r.as_str()).collect();
                println!("  {}: {}", i + 1, ids.join(" = "));
            }
        }
        Err(_) => {
            println!("not a total hierarchy; incomparable pairs:");
            for (a, b) in rb.incomparable_pairs() {
                println!("  {a} ~ {b}");
            }
        }
    }
}

fn check(ctx: &Ctx, path: &Path) -> Result<Verdict> {
    let rb: Rulebook = ctx.load(path)?;
    println!("rulebook `{}`: {} rules", rb.id(), rb.len());
    print_structure(&rb);
    Ok(Verdict::Pass)
}

fn score(
    ctx: &Ctx,
    rulebook: &Path,
    scenario: &Path,
    trajectory: &Path,
    eps: f64,
    format: Format,
) -> Result<Verdict> {
    let rb: Rulebook = ctx.load(rulebook)?;
    let sc: Scenario = ctx.load(scenario)?;
    let traj: Trajectory = ctx.load(trajectory)?;
    let profile = evaluate_profile(&rb, &traj, &sc, &ctx.registry)?;
    let acc = check_acceptable_within(&rb, &profile, eps)?;
    let crit = criticality_within(&rb, &profile, eps).ok();
    match format {
        Format::Json => {
            let doc = json!({
                "scenario_id": sc.id,
                "trajectory_id": traj.id,
                "scores": profile.scores,
                "pass": acc.pass,
                "violated": acc.violated,
                "criticality": crit,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = rb
                .rules()
                .iter()
                .map(|r| {
                    let threshold = r.acceptable_violation.map_or_else(|| "-".to_owned(), |t| t.to_string());
                    let status = if acc.violated.contains(&r.id) { "FAIL" } else { "ok" };
                    vec![r.id.to_string(), format!("{:.4}", profile.scores[&r.id]), threshold, status.to_owned()]
                })
                .collect();
            println!("scenario `{}`, trajectory `{}`\n", sc.id, traj.id);
            print!("{}", format_table(&["rule", "score", "threshold", "status"], &rows));
            if let Some(c) = &crit {
                let counts: Vec<String> = c.counts.iter().map(u32::to_string).collect();
                println!("\ncriticality {} ({})", counts.join("/"), c.scalar);
            }
            println!("result: {}", if acc.pass { "pass" } else { "FAIL" });
        }
    }
    Ok(if acc.pass { Verdict::Pass } else { Verdict::Fail })
}

fn trajectory_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"));
    files.sort();
    if files.is_empty() {
        bail!("no .json trajectory documents in {}", dir.display());
    }
    Ok(files)
}

fn rank_dir(
    ctx: &Ctx,
    rulebook: &Path,
    scenario: &Path,
    dir: &Path,
    kind: rulekit::ComparatorKind,
    eps: f64,
    format: Format,
) -> Result<Verdict> {
    let rb: Rulebook = ctx.load(rulebook)?;
    let sc: Scenario = ctx.load(scenario)?;
    let mut profiles = Vec::new();
    for file in trajectory_files(dir)? {
        let traj: Trajectory = ctx.load(&file)?;
        let p = evaluate_profile(&rb, &traj, &sc, &ctx.registry).with_context(|| format!("scoring {}", file.display()))?;
        profiles.push(p);
    }
    let strata = rank(&rb, &profiles, kind, eps)?;
    match format {
        Format::Json => {
            let doc = json!({
                "relation_kind": strata.relation_kind,
                "strata": strata.strata,
                "profiles": profiles,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Format::Table => print_strata(&strata),
    }
    Ok(Verdict::Pass)
}

/// One line per stratum; equivalent trajectories are joined with `=`,
/// incomparable groups with `,`.
fn print_strata(strata: &RankingStrata) {
    println!("relation: {}", strata.relation_kind);
    for (i, s) in strata.strata.iter().enumerate() {
        let groups: Vec<String> = s.iter().map(|g| g.join(" = ")).collect();
        println!("{}: {}", i + 1, groups.join(", "));
    }
}

fn verify(ctx: &Ctx, rulebook: &Path, cases: &Path, out: &Path, eps: f64, format: Format) -> Result<Verdict> {
    let rb: Rulebook = ctx.load(rulebook)?;
    let text = fs::read_to_string(cases).with_context(|| format!("cannot read {}", cases.display()))?;
    let manifest = parse_manifest(&text).with_context(|| format!("{}", cases.display()))?;
    let base = cases.parent().unwrap_or(Path::new("."));
    let reader = Reader {
        registry: &ctx.registry,
        lenient: ctx.lenient,
    };
    let loaded = load_cases(&manifest, base, &reader);
    let report = verify_batch(&rb, &loaded, &ctx.registry, eps)?;
    let doc = serialize(&report);
    write(out, &doc)?;
    match format {
        Format::Json => print!("{doc}"),
        Format::Table => print!("{}", render_report_table(&report)),
    }
    Ok(if report.all_passed() { Verdict::Pass } else { Verdict::Fail })
}

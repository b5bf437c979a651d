use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::ballots::read_ballots;
use super::bench::{run_bench, to_csv};
use super::blackbox::BlackBoxRule;
use super::config::{parse_weight_list, RuleConfig, RuleSpec};
use super::{
    exit, AuditArgs, BenchArgs, BenchCurveArg, CliError, EvaluateArgs, FormatArg, PriorArg, RepresentationArg,
    WelfareArgs, SCHEMA_VERSION,
};
use crate::axioms::{audit_fixed, audit_variable, AuditOptions, AuditReport, Axiom, PhantomRule, Rule};
use crate::domain::{build_x_k, AlternativeDomain, ExtremeProfile, Profile, VoterId, Weights};
use crate::phantoms::{GradingCurve, PhantomFunction, VariableRule, MAX_VALIDATE_VOTERS};
use crate::representations::{cross_check, PhantomRef, Provenance, Representation, RuleOutcome};
use crate::welfare::{minimax_optimal_phantoms, monte_carlo_ex_ante, optimal_curve, PriorSpec};

fn emit(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    writeln!(out, "{value:#}")?;
    Ok(())
}

fn with_schema(fields: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA_VERSION));
    if let Value::Object(rest) = fields {
        m.extend(rest);
    }
    Value::Object(m)
}

fn provenance_json(p: &Provenance, profile: &Profile) -> Result<Value, CliError> {
    Ok(match p {
        Provenance::Ballot(i) => json!({ "kind": "ballot", "voter": profile.voter(*i).0 }),
        Provenance::Phantom(PhantomRef::Profile(x)) => {
            json!({ "kind": "phantom", "extreme_profile": x.to_string() })
        }
        Provenance::Phantom(PhantomRef::Rank(k)) => json!({
            "kind": "phantom",
            "rank": k,
            "extreme_profile": build_x_k(profile, *k)?.to_string(),
        }),
    })
}

fn outcome_json(o: &RuleOutcome, profile: &Profile) -> Result<Value, CliError> {
    Ok(json!({ "outcome": o.value, "provenance": provenance_json(&o.provenance, profile)? }))
}

pub(super) fn evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RuleConfig::load(&a.config)?;
    let domain = cfg.domain()?;
    let ballots = read_ballots(&a.ballots, &domain)?;
    let profile = &ballots.profile;
    let alpha = cfg.phantom(profile.voters(), ballots.weights.clone())?;
    let single = match a.representation {
        RepresentationArg::Curve => Some(Representation::Curve),
        RepresentationArg::Median => Some(Representation::Median),
        RepresentationArg::Direct => Some(Representation::Direct),
        RepresentationArg::Maxmin => Some(Representation::Maxmin),
        RepresentationArg::Issues => Some(Representation::Issues),
        RepresentationArg::All => None,
    };
    let mut body = match single {
        Some(rep) => {
            let start = Instant::now();
            let o = rep.evaluate(&alpha, profile)?;
            let ns = start.elapsed().as_nanos();
            let mut v = outcome_json(&o, profile)?;
            v["representation"] = json!(rep.name());
            if !a.no_timings {
                v["timings_ns"] = json!({ rep.name(): ns as u64 });
            }
            v
        }
        None => {
            let cc = cross_check(&alpha, profile)?;
            let mut v = outcome_json(cc.outcome(), profile)?;
            v["representation"] = json!("all");
            v["agreement"] = json!(true);
            let entries = cc
                .entries
                .iter()
                .map(|e| {
                    let mut item = outcome_json(&e.outcome, profile)?;
                    item["representation"] = json!(e.representation.name());
                    Ok(item)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            v["results"] = json!(entries);
            v["skipped"] = json!(cc
                .skipped
                .iter()
                .map(|(r, why)| json!({ "representation": r.name(), "reason": why }))
                .collect::<Vec<_>>());
            if !a.no_timings {
                let t: Map<String, Value> = cc
                    .entries
                    .iter()
                    .map(|e| (e.representation.name().to_string(), json!(e.elapsed_ns as u64)))
                    .collect();
                v["timings_ns"] = Value::Object(t);
            }
            v
        }
    };
    body["voters"] = json!(profile.len());
    emit(out, &with_schema(body))?;
    Ok(exit::OK)
}

fn parse_axioms(list: &str, variable: bool) -> Result<Vec<Axiom>, CliError> {
    if list.trim() == "all" {
        return Ok(if variable {
            Axiom::VARIABLE.to_vec()
        } else {
            Axiom::FIXED.to_vec()
        });
    }
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Axiom>().map_err(CliError::Parse))
        .collect()
}

fn numbered_voters(n: usize) -> Vec<VoterId> {
    (1..=n).map(|i| VoterId(i.to_string())).collect()
}

/// Rule for the audit: a config-defined rule or an external command.
fn audit_rule(a: &AuditArgs) -> Result<(Box<dyn Rule>, AlternativeDomain), CliError> {
    if let Some(cmd) = &a.black_box {
        if !(a.timeout > 0.0 && a.timeout.is_finite()) {
            return Err(CliError::Parse(format!("timeout {} must be positive", a.timeout)));
        }
        let rule = BlackBoxRule::new(cmd.clone(), Duration::from_secs_f64(a.timeout));
        return Ok((Box::new(rule), AlternativeDomain::new(a.m, a.upper)?));
    }
    let path = a.config.as_ref().expect("clap requires --config or --black-box");
    let cfg = RuleConfig::load(path)?;
    let domain = cfg.domain()?;
    if a.variable {
        if let (RuleSpec::Curve { curve }, None) = (&cfg.rule, &cfg.weights) {
            let g = cfg.curve(curve)?;
            let x = cfg.empty_electorate_value.unwrap_or(domain.midpoint());
            return Ok((Box::new(VariableRule::new(g, x)?), domain));
        }
    }
    let alpha = cfg.phantom(&numbered_voters(a.n), None)?;
    Ok((Box::new(PhantomRule::new(alpha)), domain))
}

pub(super) fn audit(a: &AuditArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let axioms = parse_axioms(&a.axioms, a.variable)?;
    let (rule, domain) = audit_rule(a)?;
    let domain = domain.with_grid(a.grid_steps)?;
    let opts = AuditOptions {
        sampled_fallback: a.sampled,
        samples: a.samples,
        seed: a.seed,
        ..AuditOptions::default()
    };
    let report: AuditReport = if a.variable {
        audit_variable(rule.as_ref(), &domain, &a.sizes, &axioms, &opts)?
    } else {
        audit_fixed(rule.as_ref(), &domain, a.n, &axioms, &opts)?
    };
    let mut body = serde_json::to_value(&report).map_err(|e| CliError::Parse(e.to_string()))?;
    body["all_passed"] = json!(report.all_passed());
    emit(out, &with_schema(body))?;
    Ok(if report.all_passed() {
        exit::OK
    } else {
        exit::AUDIT_FAILURE
    })
}

fn read_density(path: &Path) -> Result<PriorSpec, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Parse(format!("{}: row {}: {e}", path.display(), i + 2)))?;
        let field = |j: usize| -> Result<f64, CliError> {
            rec.get(j)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::Parse(format!("{}: row {}: expected `x,density`", path.display(), i + 2)))
        };
        points.push((field(0)?, field(1)?));
    }
    Ok(PriorSpec::tabulated(points)?)
}

fn prior_of(a: &WelfareArgs) -> Result<PriorSpec, CliError> {
    match a.prior {
        PriorArg::Uniform => Ok(PriorSpec::uniform(a.m, a.upper)?),
        PriorArg::Custom => read_density(a.density.as_ref().expect("clap requires --density")),
    }
}

#[derive(Serialize)]
struct WelfareRow {
    rule: String,
    mean_loss: f64,
    std_error: f64,
    samples: usize,
    seed: u64,
    q: f64,
}

pub(super) fn welfare(a: &WelfareArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let weights = match &a.weights {
        Some(text) => Some(Weights::new(parse_weight_list(text)?)?),
        None => None,
    };
    if a.optimal_curve {
        let prior = prior_of(a)?;
        let g = optimal_curve(&prior, a.q)?;
        let cfg = RuleConfig::for_curve(&g, None)?;
        let body = json!({
            "prior": prior.to_string(),
            "q": a.q,
            "config": serde_json::to_value(&cfg).map_err(|e| CliError::Parse(e.to_string()))?,
        });
        emit(out, &with_schema(body))?;
        return Ok(exit::OK);
    }
    if a.minimax {
        let w = match weights {
            Some(w) => w,
            None => Weights::uniform(a.n)?,
        };
        return minimax(a, &w, out);
    }
    if a.config.is_empty() {
        return Err(CliError::Parse(
            "nothing to do: pass --config rules to compare, --minimax or --optimal-curve".into(),
        ));
    }
    let prior = prior_of(a)?;
    let voters = numbered_voters(a.n);
    let mut rows = Vec::with_capacity(a.config.len());
    for path in &a.config {
        let cfg = RuleConfig::load(path)?;
        let alpha = cfg.phantom(&voters, weights.clone())?;
        let rule = PhantomRule::new(alpha);
        let est = monte_carlo_ex_ante(&rule, &prior, a.q, a.n, a.samples, a.seed, weights.as_ref())?;
        rows.push(WelfareRow {
            rule: path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
            mean_loss: est.mean,
            std_error: est.std_error,
            samples: est.samples,
            seed: est.seed,
            q: est.norm_q,
        });
    }
    match a.format {
        FormatArg::Json => {
            let body = json!({
                "prior": prior.to_string(),
                "q": a.q,
                "n": a.n,
                "samples": a.samples,
                "seed": a.seed,
                "rows": rows,
            });
            emit(out, &with_schema(body))?;
        }
        FormatArg::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).map_err(|e| CliError::Parse(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Parse(e.to_string()))?;
            out.write_all(&bytes)?;
        }
    }
    Ok(exit::OK)
}

fn minimax(a: &WelfareArgs, w: &Weights, out: &mut dyn Write) -> Result<i32, CliError> {
    let alpha: PhantomFunction = minimax_optimal_phantoms(w, a.q, a.m, a.upper)?;
    let n = w.len();
    // voters from heaviest to lightest, ties by index
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w.values()[j].total_cmp(&w.values()[i]).then(i.cmp(&j)));
    let mut by_rank = Vec::with_capacity(n + 1);
    let mut mask = 0u64;
    by_rank.push(alpha.eval(&ExtremeProfile::from_mask(n, 0))?);
    for &i in &order {
        mask |= 1 << i;
        by_rank.push(alpha.eval(&ExtremeProfile::from_mask(n, mask))?);
    }
    let mut body = json!({
        "q": a.q,
        "weights": w.values(),
        "by_weight_rank": by_rank,
    });
    if n <= MAX_VALIDATE_VOTERS {
        let table: Map<String, Value> = (0..1u64 << n)
            .map(|m| {
                let x = ExtremeProfile::from_mask(n, m);
                Ok((x.to_string(), json!(alpha.eval(&x)?)))
            })
            .collect::<Result<_, CliError>>()?;
        body["phantoms"] = Value::Object(table);
    }
    let curve = GradingCurve::closed_form_uniform(AlternativeDomain::new(a.m, a.upper)?, a.q)?;
    let cfg = RuleConfig::for_curve(&curve, Some(w))?;
    body["config"] = serde_json::to_value(&cfg).map_err(|e| CliError::Parse(e.to_string()))?;
    emit(out, &with_schema(body))?;
    Ok(exit::OK)
}

pub(super) fn bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let reps = a
        .representations
        .iter()
        .map(|s| s.parse::<Representation>().map_err(CliError::Parse))
        .collect::<Result<Vec<_>, _>>()?;
    let alpha = match a.curve {
        BenchCurveArg::Linear => PhantomFunction::curve(GradingCurve::linear(AlternativeDomain::unit())),
    };
    let rows = run_bench(&alpha, &reps, &a.sizes, a.repeat, a.seed)?;
    out.write_all(to_csv(&rows).as_bytes())?;
    Ok(exit::OK)
}

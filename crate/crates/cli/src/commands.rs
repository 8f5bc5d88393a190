use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::thread;

use anyhow::{anyhow, bail, Context, Result};
use frobrig_core::acceptance::{random_rank1_modules, run_criterion, AcceptanceConfig, FlagshipParams, CRITERIA};
use frobrig_core::canonical::{build_y, convergence_diagnostic, reduce_to_canonical, CanonicalCase};
use frobrig_core::charsum::{airy_sum, kloosterman};
use frobrig_core::connection::{airy_connection, theta_connection, Form, MatrixConnection};
use frobrig_core::frobenius::{default_twists, fit_integral_frame, normalize_to_oracle, solve_formal, trace_teichmuller, FitReport};
use frobrig_core::lie::{lookup, tables};
use frobrig_core::robba::RankOneModule;
use frobrig_core::slopes::{isoclinic_slope_multiset, SlopeCase};
use frobrig_core::wild::{class_count, gamma_data, hom_space, scalar_action_transitive, trace_form_check, GammaModule};
use frobrig_core::PAdic;
use serde::Serialize;
use serde_json::json;

use crate::golden::GoldenStore;
use crate::{Cli, Command, ConnArgs, FrobAction, Kind, SumKind, WildAction, EXIT_CRITERION, EXIT_PRECISION};

/// `pi`, `pi^k`, `c*pi^k`, `c*pi`, or an integer `c`.
pub fn parse_scalar(p: u32, s: &str) -> Result<PAdic> {
    let s = s.trim();
    let (c, rest) = match s.split_once('*') {
        Some((c, r)) => (c.trim().parse::<i64>().with_context(|| format!("bad coefficient in {s:?}"))?, r.trim()),
        None if s.starts_with("pi") || s.starts_with("-pi") => {
            let neg = s.starts_with('-');
            (if neg { -1 } else { 1 }, s.trim_start_matches('-'))
        }
        None => return Ok(PAdic::from_int(p, s.parse::<i64>().with_context(|| format!("cannot parse {s:?}"))?)),
    };
    let k = match rest {
        "pi" => 1,
        r => r
            .strip_prefix("pi^")
            .and_then(|k| k.parse::<u64>().ok())
            .ok_or_else(|| anyhow!("cannot parse {s:?}: expected pi or pi^k"))?,
    };
    Ok(PAdic::pi(p).pow(k).mul_int(c))
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, v: &impl Serialize) -> Result<()> {
    emit(out, &(serde_json::to_string_pretty(v)? + "\n"))
}

fn csv_string<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn build_connection(args: &ConnArgs) -> Result<MatrixConnection> {
    let lam = parse_scalar(args.p, &args.lam)?;
    Ok(match args.kind {
        Kind::Theta => theta_connection(args.n, &lam)?,
        Kind::Airy => airy_connection(args.n, &lam, None)?,
    })
}

pub fn run(cli: &Cli) -> Result<u8> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Connection(args) => {
            emit_json(out, &build_connection(args)?)?;
            Ok(0)
        }
        Command::Frobenius { action, conn, trunc, prec, depth, budget, modulus } => {
            frobenius(out, *action, conn, *trunc, *prec, *depth, *budget, *modulus)
        }
        Command::Canonical { kind, p, n, trunc, prec } => canonical(out, *kind, *p, *n, *trunc, *prec),
        Command::Slopes { type_name, kind, m } => slopes(out, type_name.as_deref(), *kind, *m),
        Command::Expsum { kind, n, p, prec } => expsum(out, *kind, *n, *p, *prec),
        Command::Rank1 { p, coeffs, random } => rank1(out, *p, coeffs.as_deref(), *random, cli.seed),
        Command::Wild { action, p, q, h, type_name } => wild(out, *action, *p, q.unwrap_or(*p as u64), *h, type_name.as_deref()),
        Command::Tables { type_name } => {
            let rows = match type_name {
                Some(t) => vec![lookup(t)?.clone()],
                None => tables().to_vec(),
            };
            emit(out, &csv_string(&rows)?)?;
            Ok(0)
        }
        Command::Verify { quick, trunc, prec, depth, budget } => {
            let mut cfg = AcceptanceConfig { seed: cli.seed, ..AcceptanceConfig::default() };
            if !quick {
                let d = FlagshipParams::default();
                cfg.flagship = FlagshipParams {
                    depth: depth.unwrap_or(d.depth),
                    budget: budget.unwrap_or(d.budget),
                    trunc: trunc.unwrap_or(d.trunc),
                    prec: prec.unwrap_or(d.prec),
                };
            }
            verify(out, cli.golden.as_deref(), &cfg, *quick)
        }
    }
}

fn fit_frame(conn: &MatrixConnection, depth: i64, budget: usize, prec: i64) -> Result<FitReport> {
    Ok(fit_integral_frame(conn, depth, budget, prec)?)
}

#[allow(clippy::too_many_arguments)]
fn frobenius(
    out: Option<&Path>,
    action: FrobAction,
    args: &ConnArgs,
    trunc: i64,
    prec: i64,
    depth: i64,
    budget: usize,
    modulus: i64,
) -> Result<u8> {
    let conn = build_connection(args)?;
    if let FrobAction::Fit = action {
        emit_json(out, &fit_frame(&conn, depth, budget, prec)?)?;
        return Ok(0);
    }
    let fit = fit_frame(&conn, depth, budget, prec)?;
    let sol = solve_formal(&conn, &fit.frame, trunc, prec)?;
    if let FrobAction::Solve = action {
        emit_json(
            out,
            &json!({
                "frame": fit.frame, "b": fit.b, "objective": fit.objective.to_string(), "loss": sol.loss,
                "trunc": sol.trunc(), "prec": sol.prec, "valuation_profile": sol.phi.valuation_profile(),
            }),
        )?;
        return Ok(0);
    }
    let p = args.p;
    let first = if conn.form == Form::Dlog { 1 } else { 0 };
    let mut traces = BTreeMap::new();
    let mut reports = Vec::new();
    for a in first..p {
        let r = trace_teichmuller(&sol, a, modulus, prec)?;
        traces.insert(a, r.value.clone());
        reports.push(r);
    }
    if let FrobAction::Trace = action {
        emit_json(out, &reports)?;
        return Ok(0);
    }
    let oracle = (first..p)
        .map(|a| {
            let v = match args.kind {
                Kind::Theta => kloosterman(args.n as u32, p, a)?,
                Kind::Airy => airy_sum(args.n as u32, p, a)?,
            };
            Ok((a, v.embed(prec)))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    let m = normalize_to_oracle(&traces, &oracle, &default_twists(p, args.n, prec), modulus);
    let matched = m.twist.is_some();
    emit_json(out, &json!({ "b": fit.b, "objective": fit.objective.to_string(), "traces": reports, "match": m }))?;
    Ok(if matched { 0 } else { EXIT_CRITERION })
}

fn canonical(out: Option<&Path>, kind: Kind, p: u32, n: usize, trunc: i64, prec: i64) -> Result<u8> {
    let case = match kind {
        Kind::Theta => CanonicalCase::Theta,
        Kind::Airy => CanonicalCase::Airy,
    };
    let y = build_y(n, p, case, prec + 200)?;
    let r = reduce_to_canonical(&y, trunc, prec)?;
    let verdict = convergence_diagnostic(&r.valuation_profile, 0.125)?;
    emit_json(
        out,
        &json!({
            "residual_order": r.residual_order, "pole_order": r.pole_order, "pure": r.pure,
            "q1": r.q1(), "z": r.z, "valuation_profile": r.valuation_profile, "verdict": verdict,
        }),
    )?;
    Ok(if verdict.pass { 0 } else { EXIT_CRITERION })
}

#[derive(Serialize)]
struct SlopeRow {
    #[serde(rename = "type")]
    type_name: String,
    case: &'static str,
    slope: String,
    multiplicity: u32,
    nu: String,
    conductor: String,
}

fn slopes(out: Option<&Path>, type_name: Option<&str>, kind: Option<Kind>, m: Option<u32>) -> Result<u8> {
    let types: Vec<String> = match type_name {
        Some(t) => vec![lookup(t)?.name.clone()],
        None => tables().iter().map(|r| r.name.clone()).collect(),
    };
    let cases: Vec<SlopeCase> = match kind {
        Some(Kind::Theta) => vec![SlopeCase::Theta { m }],
        Some(Kind::Airy) => vec![SlopeCase::Airy],
        None => vec![SlopeCase::Theta { m }, SlopeCase::Airy],
    };
    let per_type: Vec<Result<Vec<SlopeRow>>> = thread::scope(|s| {
        let handles: Vec<_> = types
            .iter()
            .map(|t| {
                let cases = &cases;
                s.spawn(move || {
                    let mut rows = Vec::new();
                    for &case in cases {
                        let rep = isoclinic_slope_multiset(case, t)?;
                        for (slope, mult) in &rep.multiset.entries {
                            rows.push(SlopeRow {
                                type_name: rep.type_name.clone(),
                                case: case.name(),
                                slope: slope.to_string(),
                                multiplicity: *mult,
                                nu: rep.nu.to_string(),
                                conductor: rep.conductor.to_string(),
                            });
                        }
                    }
                    Ok(rows)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("slope worker")).collect()
    });
    let mut rows = Vec::new();
    for r in per_type {
        rows.extend(r?);
    }
    emit(out, &csv_string(&rows)?)?;
    Ok(0)
}

#[derive(Serialize)]
struct SumRow {
    a: u32,
    /// `counts[j]` is the coefficient of `ζ^j`.
    counts: String,
    value: String,
}

fn expsum(out: Option<&Path>, kind: SumKind, n: u32, p: u32, prec: i64) -> Result<u8> {
    let range = match kind {
        SumKind::Kloosterman => 1..p,
        SumKind::Airy => 0..p,
    };
    let mut rows = Vec::new();
    for a in range {
        let v = match kind {
            SumKind::Kloosterman => kloosterman(n, p, a)?,
            SumKind::Airy => airy_sum(n, p, a)?,
        };
        rows.push(SumRow {
            a,
            counts: v.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
            value: v.embed(prec).to_string(),
        });
    }
    emit(out, &csv_string(&rows)?)?;
    Ok(0)
}

#[derive(Serialize)]
struct Rank1Row {
    p: u32,
    d: usize,
    a: String,
    irregularity: Option<usize>,
    radius_irregularity: usize,
    agree: bool,
    note: String,
}

fn rank1(out: Option<&Path>, p: u32, coeffs: Option<&str>, random: Option<usize>, seed: u64) -> Result<u8> {
    let modules = match (coeffs, random) {
        (Some(c), _) => vec![RankOneModule::new(p, c.split(',').map(|s| parse_scalar(p, s)).collect::<Result<Vec<_>>>()?)?],
        (None, Some(k)) => random_rank1_modules(seed, k)?,
        (None, None) => bail!("rank1 needs --coeffs or --random"),
    };
    let mut rows = Vec::new();
    for m in modules {
        let oracle = m.irregularity_by_radius();
        let (irr, note) = match m.irregularity() {
            Ok(i) => (Some(i), String::new()),
            Err(e) => (None, e.to_string()),
        };
        rows.push(Rank1Row {
            p: m.p(),
            d: m.d(),
            a: m.a().iter().map(|c| c.to_string()).collect::<Vec<_>>().join("; "),
            irregularity: irr,
            radius_irregularity: oracle,
            agree: irr == Some(oracle),
            note,
        });
    }
    emit(out, &csv_string(&rows)?)?;
    Ok(0)
}

fn wild(out: Option<&Path>, action: WildAction, p: u32, q: u64, h: u64, type_name: Option<&str>) -> Result<u8> {
    match action {
        WildAction::Count => {
            let g = gamma_data(p, q, h)?;
            let m = GammaModule::new(&g)?;
            emit_json(out, &json!({ "gamma": g, "field_degree": g.field_degree(), "presentation_ok": m.check_presentation() }))?;
        }
        WildAction::Homs => {
            let hs = hom_space(p, q, h)?;
            let check = trace_form_check(p, q, h)?;
            emit_json(
                out,
                &json!({
                    "p": p, "q": q, "h": h, "dimension": hs.dimension(), "total": hs.total(), "nonzero": hs.total() - 1,
                    "trace_forms": check, "scalar_action_transitive": scalar_action_transitive(&hs),
                }),
            )?;
        }
        WildAction::Classes => {
            let t = type_name.ok_or_else(|| anyhow!("wild classes needs --type"))?;
            emit_json(out, &json!({ "type": lookup(t)?.name, "q": q, "classes": class_count(t, q)? }))?;
        }
    }
    Ok(0)
}

fn verify(out: Option<&Path>, golden: Option<&Path>, cfg: &AcceptanceConfig, quick: bool) -> Result<u8> {
    let results = thread::scope(|s| {
        let handles: Vec<_> = CRITERIA.iter().map(|(id, _)| s.spawn(move || run_criterion(*id, cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion worker")).collect::<Result<Vec<_>, _>>()
    })?;
    for r in &results {
        eprintln!("{r}");
    }
    let mut golden_report = serde_json::Value::Null;
    let mut golden_ok = true;
    if let Some(path) = golden {
        let current = GoldenStore::from_results(&results);
        if path.exists() {
            let stored = GoldenStore::load(path)?;
            let mismatches = stored.compare(&current)?;
            for m in &mismatches {
                eprintln!("golden mismatch: {m}");
            }
            golden_ok = mismatches.is_empty();
            golden_report = json!({ "path": path.display().to_string(), "created": false, "mismatches": mismatches });
        } else {
            current.save(path)?;
            golden_report = json!({ "path": path.display().to_string(), "created": true, "mismatches": [] });
        }
    }
    let pass = results.iter().all(|r| r.pass) && golden_ok;
    emit_json(out, &json!({ "quick": quick, "config": cfg, "pass": pass, "criteria": results, "golden": golden_report }))?;
    Ok(if pass {
        0
    } else if results.iter().any(|r| r.precision_shortfall) {
        EXIT_PRECISION
    } else {
        EXIT_CRITERION
    })
}

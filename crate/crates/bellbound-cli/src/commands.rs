use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use bellbound::bounds::{self, BoundContext, BoundReport, StateFamily};
use bellbound::dilation::{
    self, lhv_certificate_from_tensor_positive, CandidateKind, DilationBoundOptions, DilationObjective, SearchOptions,
    SourceOperator, TensorPositivity,
};
use bellbound::io::{self, BehaviorJson, CertificateJson, ComplexMatrixJson, PovmJson, StateSource};
use bellbound::lhv::{self, lqhv_from_source, SearchConfig};
use bellbound::quantum::{self, seesaw_optimize, SeesawOptions};
use bellbound::{joint_probabilities, PovmFamily, Scenario};

use crate::render::{self, csv_table};
use crate::{Command, Format, GlobalArgs};

pub struct Outcome {
    pub rendered: String,
    pub bound_violated: bool,
}

fn parse_counts(spec: Option<&str>, parties: usize, default: usize, what: &str) -> Result<Vec<usize>> {
    let Some(spec) = spec else { return Ok(vec![default; parties]) };
    let values: Vec<usize> = spec
        .split([',', 'x'])
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad {what} list `{spec}`")))
        .collect::<Result<_>>()?;
    if values.contains(&0) {
        bail!(bellbound::Error::InvalidScenario(format!("{what} must be positive")));
    }
    match values.len() {
        1 => Ok(vec![values[0]; parties]),
        n if n == parties => Ok(values),
        n => bail!(bellbound::Error::DimensionMismatch(format!("{n} {what} for {parties} parties"))),
    }
}

/// `{+1, -1}` for two outcomes, labels `1..L` otherwise.
fn scenario_for(settings: Vec<usize>, outcomes: &[usize]) -> Result<Scenario> {
    let values = outcomes
        .iter()
        .map(|&l| if l == 2 { vec![1.0, -1.0] } else { (1..=l).map(|v| v as f64).collect() })
        .collect();
    Ok(Scenario::new(settings.len(), settings, values)?)
}

fn envelope(command: &Command, global: &GlobalArgs, result: Value) -> Value {
    json!({
        "tool": "bellbound",
        "version": env!("CARGO_PKG_VERSION"),
        "config": {
            "command": command,
            "seed": global.seed,
            "restarts": global.restarts,
            "cap_dim": global.cap_dim,
            "tolerance": global.tolerance,
        },
        "result": result,
    })
}

fn bound_report_json(report: &BoundReport) -> Value {
    serde_json::to_value(report).expect("serializable report")
}

fn context_for(source: &StateSource, scenario: &Scenario) -> Result<BoundContext> {
    Ok(BoundContext::new(
        source.state.dims().to_vec(),
        scenario.settings().to_vec(),
        scenario.outcome_counts(),
        source.family.clone(),
    )?)
}

pub fn run(command: &Command, global: &GlobalArgs) -> Result<Outcome> {
    let (result, bound_violated, table) = match command {
        Command::ClassicalBound { functional } => (classical_bound(functional)?, false, None),
        Command::Violation { state, povm, optimize, settings, outcomes } => {
            let (v, violated) = violation(global, state, povm.as_deref(), optimize.as_deref(), settings.as_deref(), outcomes.as_deref())?;
            (v, violated, None)
        }
        Command::CertifyLhv { state, settings, outcomes, povm } => {
            (certify_lhv(global, state, settings.as_deref(), outcomes.as_deref(), povm.as_deref())?, false, None)
        }
        Command::BoundFromDilation { state, settings, candidates, export } => {
            (bound_from_dilation(global, state, settings.as_deref(), candidates, export.as_deref())?, false, None)
        }
        Command::BoundsTable { state, dims, settings, outcomes, family, phi, violation } => {
            let report = bounds_table(state.as_deref(), dims.as_deref(), settings.as_deref(), outcomes.as_deref(), family.as_deref(), *phi, *violation)?;
            let violated = report.violation.is_some() && !report.all_pass;
            (bound_report_json(&report), violated, Some(report))
        }
    };
    let report = envelope(command, global, result);
    let default_format = if table.is_some() { Format::Csv } else { Format::Text };
    let format = global.format.unwrap_or(default_format);
    let rendered = match (&table, format) {
        (Some(t), Format::Csv) => {
            let rows: Vec<Vec<String>> = t
                .entries
                .iter()
                .map(|e| vec![e.bound_name.clone(), e.formula.clone(), e.value.to_string(), e.applicable.to_string()])
                .collect();
            csv_table(&["bound_name", "formula", "value", "applicable"], &rows)?
        }
        _ => render::render(&report, format)?,
    };
    Ok(Outcome { rendered, bound_violated })
}

fn classical_bound(spec: &str) -> Result<Value> {
    let f = io::resolve_functional(spec)?;
    let k = lhv::lhv_constants(&f)?;
    let witness = |s: &bellbound::DeterministicStrategy| -> Vec<Vec<usize>> {
        s.assignment().iter().map(|row| row.iter().map(|v| v + 1).collect()).collect()
    };
    let mut out = json!({
        "functional": spec,
        "b_inf": k.b_inf,
        "b_sup": k.b_sup,
        "b_max": k.b_max,
        "degenerate": k.degenerate,
        "witness_inf": witness(&k.witness_inf),
        "witness_sup": witness(&k.witness_sup),
        "strategies": f.scenario().strategy_count().to_string(),
    });
    if k.degenerate {
        eprintln!("warning: functional vanishes on every deterministic strategy");
        out["warning"] = json!("degenerate functional");
    }
    Ok(out)
}

fn violation(
    global: &GlobalArgs,
    state: &str,
    povm: Option<&std::path::Path>,
    optimize: Option<&str>,
    settings: Option<&str>,
    outcomes: Option<&str>,
) -> Result<(Value, bool)> {
    let source = io::resolve_state(state)?;
    let parties = source.state.n_sites();
    let tolerance = global.tolerance.unwrap_or(1e-9);
    let mut out = json!({ "state": state });
    let (povms, behavior, certificate) = if let Some(path) = povm {
        let povms = io::read_json::<PovmJson>(path)?.to_povms()?;
        let behavior = joint_probabilities(&source.state, &povms)?;
        let cert = lhv::maximal_violation(&behavior)?;
        (povms, behavior, cert)
    } else if let Some(spec) = optimize {
        let f = io::resolve_functional(spec)?;
        let options = SeesawOptions {
            restarts: global.restarts.unwrap_or(32),
            seed: global.seed,
            tolerance,
            ..Default::default()
        };
        let res = seesaw_optimize(&source.state, &f, options)?;
        let k = lhv::lhv_constants(&f)?;
        out["seesaw"] = json!({
            "functional": spec,
            "quantum_value": res.value,
            "b_inf": k.b_inf,
            "b_sup": k.b_sup,
            "ratio": if k.degenerate { Value::Null } else { json!(res.value.abs() / k.b_max) },
            "converged": res.converged,
            "restart": res.restart,
            "sweeps": res.history.len() - 1,
        });
        if !res.converged {
            eprintln!("warning: seesaw hit its sweep cap before converging");
        }
        let behavior = joint_probabilities(&source.state, &res.povms)?;
        let cert = lhv::maximal_violation(&behavior)?;
        (res.povms, behavior, cert)
    } else {
        let settings = parse_counts(settings, parties, 2, "settings")?;
        let outcomes = parse_counts(outcomes, parties, 2, "outcomes")?;
        let sc = scenario_for(settings, &outcomes)?;
        let config = SearchConfig {
            restarts: global.restarts.unwrap_or(8),
            seed: global.seed,
            tolerance,
            ..Default::default()
        };
        let res = lhv::maximize_violation(&source.state, &sc, &config)?;
        out["search"] = json!({ "history": res.history, "restart": res.restart });
        (res.povms, res.behavior, res.certificate)
    };
    let context = context_for(&source, povms.scenario())?;
    let report = bounds::compare(&context, Some(certificate.upsilon));
    out["behavior"] = serde_json::to_value(BehaviorJson::from_behavior(&behavior))?;
    out["upsilon"] = json!(certificate.upsilon);
    out["certificate"] = json!({
        "terms": certificate.terms.len(),
        "weight_sum": certificate.weight_sum(),
        "residual": certificate.residual,
        "lp_iterations": certificate.iterations,
        "decomposition": CertificateJson::from_certificate(&certificate),
    });
    out["bounds"] = bound_report_json(&report);
    Ok((out, !report.all_pass))
}

fn candidate_operators(source: &StateSource, copies: &[usize], cap: usize) -> Result<Vec<(&'static str, SourceOperator)>> {
    let mut out = Vec::new();
    if let Some(comps) = &source.separable {
        out.push(("separable", dilation::separable_source_operator(comps, copies)?));
    } else if let Some(factors) = source.state.product_factors(bellbound::tol::MATRIX) {
        out.push(("product", dilation::product_source_operator(&factors, copies)?));
    }
    out.push((
        "solve",
        dilation::solve_source_operator_with_cap(&source.state, copies, DilationObjective::MinFrobenius, cap)?,
    ));
    out.push((
        "trace-norm",
        dilation::solve_source_operator_with_cap(&source.state, copies, DilationObjective::MinTraceNorm { iterations: 300 }, cap)?,
    ));
    Ok(out)
}

fn certify_lhv(
    global: &GlobalArgs,
    state: &str,
    settings: Option<&str>,
    outcomes: Option<&str>,
    povm: Option<&std::path::Path>,
) -> Result<Value> {
    let source = io::resolve_state(state)?;
    let parties = source.state.n_sites();
    let povms = match povm {
        Some(path) => io::read_json::<PovmJson>(path)?.to_povms()?,
        None => {
            let settings = parse_counts(settings, parties, 2, "settings")?;
            let outcomes = parse_counts(outcomes, parties, 2, "outcomes")?;
            let sc = scenario_for(settings, &outcomes)?;
            let mut rng = quantum::seeded_rng(global.seed);
            PovmFamily::random_projective(&sc, source.state.dims(), &mut rng)?
        }
    };
    let copies = povms.scenario().settings().to_vec();
    let cap = global.cap_dim.unwrap_or(bellbound::tol::DEFAULT_COPIED_DIM_CAP);
    let search = SearchOptions { restarts: global.restarts.unwrap_or(32), seed: global.seed, ..Default::default() };
    let mut rows = Vec::new();
    let mut chosen: Option<(&str, SourceOperator, TensorPositivity)> = None;
    for (name, op) in candidate_operators(&source, &copies, cap)? {
        let verdict = dilation::tensor_positivity_check(op.matrix(), &op.slot_dims(), search);
        rows.push(json!({
            "candidate": name,
            "status": verdict.status,
            "value": verdict.value,
            "trace_norm": op.trace_norm(),
        }));
        let rank = |s: TensorPositivity| match s {
            TensorPositivity::PsdCertified => 0,
            TensorPositivity::NoViolationFound => 1,
            TensorPositivity::Violated => 2,
        };
        if chosen.as_ref().is_none_or(|(_, _, s)| rank(verdict.status) < rank(*s)) {
            chosen = Some((name, op, verdict.status));
        }
    }
    let (name, op, status) = chosen.expect("at least one candidate");
    let model = match status {
        TensorPositivity::Violated => lqhv_from_source(&op, &povms)?,
        _ => lhv_certificate_from_tensor_positive(&op, &povms, search)?.model,
    };
    let direct = joint_probabilities(&source.state, &povms)?;
    let recon = model.reconstruct()?;
    let deviation = recon
        .tables()
        .iter()
        .zip(direct.tables())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let min_nu = model.nu().iter().cloned().fold(f64::INFINITY, f64::min);
    let certified = status == TensorPositivity::PsdCertified;
    if status == TensorPositivity::NoViolationFound {
        eprintln!("warning: no tensor-positivity violation found, but the source operator is not PSD; not certified");
    }
    Ok(json!({
        "state": state,
        "settings": copies,
        "certified": certified,
        "status": status,
        "source_operator": name,
        "candidates": rows,
        "nu": {
            "weights": model.nu().len(),
            "negative_weights": model.nu().iter().filter(|v| **v < -bellbound::tol::NONNEGATIVE).count(),
            "min": min_nu,
            "negative_mass": model.negative_mass(),
            "total_variation": model.total_variation(),
            "marginal_deviation": deviation,
        },
        "povms": PovmJson::from_povms(&povms),
    }))
}

fn bound_from_dilation(
    global: &GlobalArgs,
    state: &str,
    settings: Option<&str>,
    candidates: &str,
    export: Option<&std::path::Path>,
) -> Result<Value> {
    let source = io::resolve_state(state)?;
    let settings = parse_counts(settings, source.state.n_sites(), 2, "settings")?;
    let kinds = candidates
        .split(',')
        .map(|c| CandidateKind::parse(c.trim()))
        .collect::<bellbound::Result<Vec<_>>>()?;
    let mut options = DilationBoundOptions { candidates: kinds, ..Default::default() };
    options.search.seed = global.seed;
    if let Some(r) = global.restarts {
        options.search.restarts = r;
    }
    if let Some(t) = global.tolerance {
        options.search.tolerance = t;
    }
    if let Some(cap) = global.cap_dim {
        options.copied_dim_cap = cap;
    }
    let res = dilation::upsilon_upper_bound(&source.state, &settings, &options)?;
    let rows: Vec<Value> = res
        .candidates
        .iter()
        .map(|c| {
            json!({
                "site": c.site + 1,
                "candidate": c.kind.name(),
                "copies": c.copies,
                "lower": c.interval.lower,
                "upper": c.interval.upper,
                "trace": c.interval.trace,
                "tensor_positivity": c.interval.tensor_positivity,
                "dilation_residual": c.dilation_residual,
                "methods": c.interval.methods,
            })
        })
        .collect();
    if let Some(path) = export {
        let json = serde_json::to_string(&ComplexMatrixJson::from_matrix(res.best.matrix()))?;
        std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(json!({
        "state": state,
        "settings": settings,
        "bound": res.bound,
        "best_copies": res.best.copies(),
        "candidates": rows,
    }))
}

fn bounds_table(
    state: Option<&str>,
    dims: Option<&str>,
    settings: Option<&str>,
    outcomes: Option<&str>,
    family: Option<&str>,
    phi: Option<f64>,
    violation: Option<f64>,
) -> Result<BoundReport> {
    let source = state.map(io::resolve_state).transpose()?;
    let dims = match (&source, dims) {
        (_, Some(d)) => d
            .split([',', 'x'])
            .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad dims `{d}`")))
            .collect::<Result<Vec<_>>>()?,
        (Some(s), None) => s.state.dims().to_vec(),
        (None, None) => bail!(bellbound::Error::InvalidScenario("bounds-table needs --dims or --state".into())),
    };
    let parties = dims.len();
    let settings = parse_counts(settings, parties, 2, "settings")?;
    let outcomes = parse_counts(outcomes, parties, 2, "outcomes")?;
    let family = match family {
        None => source.map(|s| s.family).unwrap_or_default(),
        Some("generic") => StateFamily::Generic,
        Some("singlet") => StateFamily::Singlet,
        Some("separable") => StateFamily::Separable,
        Some("ghz") => StateFamily::GhzQudit { d: dims[0] },
        Some("gghz") => StateFamily::GeneralizedGhz {
            phi: phi.ok_or_else(|| bellbound::Error::Parse("family gghz needs --phi".into()))?,
        },
        Some(other) => bail!(bellbound::Error::Parse(format!("unknown family `{other}`"))),
    };
    let context = BoundContext::new(dims, settings, outcomes, family)?;
    Ok(bounds::compare(&context, violation))
}

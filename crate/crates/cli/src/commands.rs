use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gmnf_core::bp::{self, BeliefConvention, BpConfig, MessageInit, Stopping, TieRule};
use gmnf_core::certify::CertifyStatus;
use gmnf_core::generate::{generate_instance, CoefficientMode, GeneratorConfig};
use gmnf_core::io::{flow_from_json, instance_from_json, instance_to_json};
use gmnf_core::oracle::{solve_exact, OracleResult, OracleStatus};
use gmnf_core::ratio::check_bruteforce;
use gmnf_core::residual::{build_residual, cost_profile};
use gmnf_core::scalar::{set_float_tolerance, Show};
use gmnf_core::tree::{build_tree, check_tree_agreement, check_tree_agreement_all};
use gmnf_core::{Endpoint, Error, GmnfInstance, Rational, Scalar, SizeCaps};
use serde_json::{json, Value};

use crate::report::*;
use crate::{BeliefArg, GenerateArgs, InitArg, Method, NumericArg, SolveArgs, TieArg};

pub struct Failure {
    pub message: String,
    pub code: i32,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SizeCap { .. } => EXIT_SIZE_CAP,
            _ => EXIT_USAGE,
        };
        Failure { message: e.to_string(), code }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { message: message.into(), code: EXIT_USAGE }
}

pub type CommandResult = Result<(Option<String>, Outcome), Failure>;

fn read(path: &Path) -> Result<(Vec<u8>, String), Failure> {
    let bytes = fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| usage(format!("{} is not UTF-8", path.display())))?;
    Ok((bytes, text))
}

fn load<S: Scalar>(path: &Path) -> Result<(String, GmnfInstance<S>), Failure> {
    let (bytes, text) = read(path)?;
    Ok((fingerprint(&bytes), instance_from_json(&text)?))
}

fn caps() -> &'static SizeCaps {
    SizeCaps::global()
}

fn oracle_json(res: &OracleResult) -> Value {
    json!({
        "status": match res.status {
            OracleStatus::Optimal => "optimal",
            OracleStatus::Infeasible => "infeasible",
        },
        "value": res.value.as_ref().map(scalar_json),
        "unique": res.unique,
        "solutions": res.solutions.iter().map(|s| vec_json(s)).collect::<Vec<_>>(),
    })
}

pub fn validate(path: &Path, bruteforce: bool) -> CommandResult {
    let (fp, inst) = load::<Rational>(path)?;
    let report = inst.validate();
    let mut text = String::new();
    let _ = writeln!(text, "vertices:  {}", inst.vertex_count());
    let _ = writeln!(text, "edges:     {}", inst.edge_count());
    for err in &report.errors {
        let _ = writeln!(text, "error:     {err}");
    }
    let _ = writeln!(text, "ratio-balanced: {}", report.ratio_balanced);
    let mut payload = json!({
        "vertices": inst.vertex_count(),
        "edges": inst.edge_count(),
        "errors": report.errors,
        "ratio_balanced": report.ratio_balanced,
    });
    if let Some(cert) = &report.certificate {
        let _ = writeln!(text, "gauge p:   {}", show_vec(&cert.node));
        let _ = writeln!(text, "gauge q:   {}", show_vec(&cert.edge));
        payload["certificate"] = json!({ "node": vec_json(&cert.node), "edge": vec_json(&cert.edge) });
    }
    if let Some(cycle) = &report.violating_cycle {
        let _ = writeln!(text, "violating cycle: vertices {:?} edges {:?}", cycle.vertices, cycle.edges);
        payload["violating_cycle"] = json!({ "vertices": cycle.vertices, "edges": cycle.edges });
    }
    if bruteforce && report.errors.is_empty() {
        let violation = check_bruteforce(&inst, caps())?;
        if violation.is_none() != report.ratio_balanced {
            return Err(Error::Inconsistent("gauge and exhaustive ratio-balance checks disagree".into()).into());
        }
        let _ = writeln!(text, "bruteforce: agrees");
        payload["bruteforce_agrees"] = json!(true);
    }
    let code = if report.is_valid() && report.ratio_balanced { EXIT_OK } else { EXIT_USAGE };
    Ok((Some(fp), Outcome::new(payload, text, code)))
}

fn parse_range(text: &str, what: &str) -> Result<(i64, i64), Failure> {
    let bad = || usage(format!("--{what} expects LO..HI, got `{text}`"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo = lo.trim().parse().map_err(|_| bad())?;
    let hi = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn generate(args: &GenerateArgs) -> CommandResult {
    let config = GeneratorConfig {
        vertices: args.vertices,
        edges: args.edges,
        capacity: parse_range(&args.capacity, "capacity")?,
        cost: parse_range(&args.cost, "cost")?,
        seed: args.seed,
        coefficients: if args.unit { CoefficientMode::Unit } else { CoefficientMode::Gauge },
        unique: args.unique,
        acyclic: args.acyclic,
        ..Default::default()
    };
    let inst = generate_instance(&config)?;
    let body = instance_to_json(&inst);
    let fp = fingerprint(body.as_bytes());
    match &args.out {
        Some(path) => {
            fs::write(path, &body).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
            let text = format!("wrote {} ({} vertices, {} edges)\n", path.display(), inst.vertex_count(), inst.edge_count());
            let payload = json!({ "path": path.display().to_string(), "vertices": inst.vertex_count(), "edges": inst.edge_count() });
            Ok((Some(fp), Outcome::new(payload, text, EXIT_OK)))
        }
        None => {
            let payload: Value = serde_json::from_str(&body).expect("generated JSON parses");
            Ok((None, Outcome::new(payload, body, EXIT_OK)))
        }
    }
}

fn bp_config(args: &SolveArgs) -> BpConfig {
    BpConfig {
        init: match args.init {
            InitArg::EdgeCost => MessageInit::EdgeCost,
            InitArg::Zero => MessageInit::Zero,
        },
        belief: match args.belief_convention {
            BeliefArg::Default => BeliefConvention::Single,
            BeliefArg::Paper => BeliefConvention::Paper,
        },
        tie: match args.tie {
            TieArg::Midpoint => TieRule::Midpoint,
            TieArg::Lower => TieRule::Lower,
            TieArg::Upper => TieRule::Upper,
        },
        ..Default::default()
    }
}

struct BpRun<S> {
    flow: Option<Vec<S>>,
    payload: Value,
    text: String,
    code: i32,
}

fn run_bp<S: Scalar>(inst: &GmnfInstance<S>, args: &SolveArgs) -> Result<BpRun<S>, Failure> {
    let stopping = match args.iterations {
        Some(n) => Stopping::Fixed(n),
        None => Stopping::StableArgmin {
            window: args.window.unwrap_or(inst.vertex_count()),
            max_iterations: args.max_iterations,
        },
    };
    let (result, state) = bp::run_with_state(inst, stopping, &bp_config(args))?;
    let mut text = String::new();
    let _ = writeln!(text, "bp iterations: {}", result.iterations);
    let _ = writeln!(text, "bp converged:  {}", result.converged);
    let mut payload = json!({
        "iterations": result.iterations,
        "converged": result.converged,
        "infeasible": result.infeasible,
        "infeasible_edges": result.infeasible_edges,
        "ties": result.ties,
        "flow": result.flow.as_ref().map(|f| vec_json(f)),
    });
    match &result.flow {
        Some(flow) => {
            let _ = writeln!(text, "bp flow:       {}", show_vec(flow));
            let _ = writeln!(text, "bp objective:  {}", Show(&inst.objective(flow)));
            payload["objective"] = scalar_json(&inst.objective(flow));
        }
        None => {
            let _ = writeln!(text, "bp infeasible on edges {:?}", result.infeasible_edges);
        }
    }
    if args.dump_messages {
        let mut messages = Vec::new();
        for e in 0..inst.edge_count() {
            for (side, name) in [(Endpoint::Tail, "tail"), (Endpoint::Head, "head")] {
                let points: Vec<Value> = state
                    .message(e, side)
                    .breakpoints()
                    .iter()
                    .map(|(x, y)| json!([scalar_json(x), scalar_json(y)]))
                    .collect();
                let shown: Vec<String> =
                    state.message(e, side).breakpoints().iter().map(|(x, y)| format!("({}, {})", Show(x), Show(y))).collect();
                let _ = writeln!(text, "m[{e} -> {name}] = {}", shown.join(" "));
                messages.push(json!({ "edge": e, "toward": name, "breakpoints": points }));
            }
        }
        payload["messages"] = Value::Array(messages);
    }
    let code = if result.infeasible {
        EXIT_INFEASIBLE
    } else if !result.converged {
        EXIT_NO_CONVERGENCE
    } else {
        EXIT_OK
    };
    Ok(BpRun { flow: result.flow, payload, text, code })
}

pub fn solve(args: &SolveArgs) -> CommandResult {
    if args.numeric == NumericArg::Float {
        if args.method != Method::Bp {
            return Err(usage("float arithmetic is only available for --method bp"));
        }
        if let Some(tol) = args.tolerance {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(usage("--tolerance must be finite and non-negative"));
            }
            set_float_tolerance(tol);
        }
        let (fp, inst) = load::<f64>(args.instance.as_path())?;
        let run = run_bp(&inst, args)?;
        return Ok((Some(fp), Outcome::new(json!({ "bp": run.payload }), run.text, run.code)));
    }
    let (fp, inst) = load::<Rational>(args.instance.as_path())?;
    let mut payload = json!({});
    let mut text = String::new();
    let mut code = EXIT_OK;
    let mut bp_flow = None;
    if args.method != Method::Oracle {
        let run = run_bp(&inst, args)?;
        payload["bp"] = run.payload;
        text.push_str(&run.text);
        code = run.code;
        bp_flow = run.flow;
    }
    if args.method != Method::Bp {
        let oracle = solve_exact(&inst)?;
        payload["oracle"] = oracle_json(&oracle);
        match (&oracle.status, &oracle.value) {
            (OracleStatus::Optimal, Some(value)) => {
                let _ = writeln!(text, "oracle value:  {}", Show(value));
                let _ = writeln!(text, "oracle unique: {}", oracle.unique);
                for s in &oracle.solutions {
                    let _ = writeln!(text, "oracle flow:   {}", show_vec(s));
                }
            }
            _ => {
                let _ = writeln!(text, "oracle: infeasible");
                code = EXIT_INFEASIBLE;
            }
        }
        if let (Some(flow), Some(best), Some(reference)) = (&bp_flow, &oracle.value, oracle.solutions.first()) {
            let optimal = inst.objective(flow) == *best;
            let matches = oracle.unique_solution().is_some_and(|x| x == flow.as_slice());
            let deviation: Vec<Rational> = flow.iter().zip(reference).map(|(a, b)| (a.clone() - b.clone()).abs()).collect();
            let max_dev = deviation.iter().max().cloned().unwrap_or_default();
            let per_edge: Vec<bool> = flow.iter().zip(reference).map(|(a, b)| a == b).collect();
            let _ = writeln!(text, "bp optimal:    {optimal}");
            let _ = writeln!(text, "bp matches unique optimum: {matches}");
            let _ = writeln!(text, "per-edge agree: {per_edge:?}");
            let _ = writeln!(text, "max deviation: {}", Show(&max_dev));
            payload["agreement"] = json!({
                "optimal": optimal,
                "matches_unique": matches,
                "per_edge": per_edge,
                "max_deviation": scalar_json(&max_dev),
            });
        }
    }
    Ok((Some(fp), Outcome::new(payload, text, code)))
}

pub fn analyze(path: &Path, flow_path: Option<&Path>, use_oracle: bool) -> CommandResult {
    let (fp, inst) = load::<Rational>(path)?;
    if !inst.validate().ratio_balanced {
        return Err(usage("instance is not ratio-balanced"));
    }
    let flow = match (flow_path, use_oracle) {
        (Some(p), _) => flow_from_json::<Rational>(&read(p)?.1)?,
        (None, true) => {
            let oracle = solve_exact(&inst)?;
            if oracle.status == OracleStatus::Infeasible {
                return Err(Failure { message: "instance is infeasible".into(), code: EXIT_INFEASIBLE });
            }
            match oracle.unique_solution() {
                Some(x) => x.to_vec(),
                None => return Err(usage("optimum is not unique")),
            }
        }
        (None, false) => return Err(usage("analyze needs --flow FILE or --oracle")),
    };
    if flow.len() != inst.edge_count() || !inst.is_feasible(&flow) {
        return Err(usage("flow is not feasible for this instance"));
    }
    let net = build_residual(&inst, &flow)?;
    let profile = cost_profile(&net, caps())?;
    if let Some(s) = &profile.sigma {
        if s.value <= <Rational as Scalar>::zero() {
            return Err(usage(format!("sigma = {} is not positive; the flow is not a unique optimum", Show(&s.value))));
        }
    }
    let bound = profile.bound(inst.vertex_count())?;
    let mut text = String::new();
    let _ = writeln!(text, "flow:      {}", show_vec(&flow));
    let _ = writeln!(text, "residual:  {} arcs", net.arc_count());
    match &profile.sigma {
        Some(s) => {
            let _ = writeln!(text, "sigma:     {} (cycle arcs {:?})", Show(&s.value), s.cycle);
        }
        None => {
            let _ = writeln!(text, "sigma:     none (no directed cycles)");
        }
    }
    let _ = writeln!(text, "L:         {}", Show(&profile.l_max));
    let _ = writeln!(text, "T:         {}", Show(&profile.t_min));
    let _ = writeln!(text, "cycles:    {}", profile.cycle_count);
    let _ = writeln!(text, "paths:     {}", profile.path_count);
    let _ = writeln!(text, "bound N:   {bound}");
    let payload = json!({
        "flow": vec_json(&flow),
        "arcs": net.arc_count(),
        "sigma": profile.sigma.as_ref().map(|s| scalar_json(&s.value)),
        "sigma_cycle": profile.sigma.as_ref().map(|s| s.cycle.clone()),
        "l_max": scalar_json(&profile.l_max),
        "t_min": scalar_json(&profile.t_min),
        "cycle_count": profile.cycle_count,
        "path_count": profile.path_count,
        "bound": bound,
    });
    Ok((Some(fp), Outcome::new(payload, text, EXIT_OK)))
}

fn parse_depths(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || usage(format!("--depth expects N or A..B with 1 <= A <= B, got `{text}`"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let n: usize = text.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

pub fn tree_check(path: &Path, edge: &str, depth: &str, dump_tree: bool) -> CommandResult {
    let (fp, inst) = load::<Rational>(path)?;
    let depths = parse_depths(depth)?;
    let edge = match edge {
        "all" => None,
        id => {
            let e: usize = id.parse().map_err(|_| usage(format!("--edge expects an id or `all`, got `{id}`")))?;
            if e >= inst.edge_count() {
                return Err(usage(format!("edge {e} does not exist")));
            }
            Some(e)
        }
    };
    let config = BpConfig::default();
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for &d in &depths {
        let checks = match edge {
            Some(e) => vec![check_tree_agreement(&inst, e, d, &config, caps())?],
            None => check_tree_agreement_all(&inst, d, &config, caps())?,
        };
        for c in checks {
            if dump_tree {
                text.push_str(&build_tree(&inst, c.edge, d, caps())?.dump());
            }
            let value = c.bp_value.as_ref().map_or("infeasible".to_string(), |v| Show(v).to_string());
            let interval = c
                .interval
                .as_ref()
                .map_or("infeasible".to_string(), |(lo, hi)| format!("[{}, {}]", Show(lo), Show(hi)));
            let verdict = if c.holds { "ok" } else { "FAIL" };
            let _ = writeln!(text, "depth {d} edge {}: bp {value} tree {interval} {verdict}", c.edge);
            failures += usize::from(!c.holds);
            rows.push(json!({
                "edge": c.edge,
                "depth": d,
                "bp_value": c.bp_value.as_ref().map(scalar_json),
                "interval": c.interval.as_ref().map(|(lo, hi)| json!([scalar_json(lo), scalar_json(hi)])),
                "holds": c.holds,
            }));
        }
    }
    let _ = writeln!(text, "checks: {}  failures: {failures}", rows.len());
    let payload = json!({ "checks": rows, "failures": failures });
    let code = if failures == 0 { EXIT_OK } else { EXIT_USAGE };
    Ok((Some(fp), Outcome::new(payload, text, code)))
}

pub fn certify(path: &Path, max_iterations: u64) -> CommandResult {
    let (fp, inst) = load::<Rational>(path)?;
    let cert = gmnf_core::certify::certify(&inst, &BpConfig::default(), caps(), max_iterations)?;
    let (status, code) = match cert.status {
        CertifyStatus::Certified => ("certified", EXIT_OK),
        CertifyStatus::Mismatch => ("mismatch", EXIT_USAGE),
        CertifyStatus::NotUnique => ("not-unique", EXIT_USAGE),
        CertifyStatus::Infeasible => ("infeasible", EXIT_INFEASIBLE),
    };
    let mut text = String::new();
    let _ = writeln!(text, "status:    {status}");
    let mut payload = json!({ "status": status, "oracle": oracle_json(&cert.oracle) });
    if let Some(value) = &cert.oracle.value {
        let _ = writeln!(text, "optimum:   {}", Show(value));
    }
    if let Some(x) = cert.oracle.unique_solution() {
        let _ = writeln!(text, "flow:      {}", show_vec(x));
    }
    if let Some(p) = &cert.profile {
        let sigma = p.sigma.as_ref().map_or("none".to_string(), |s| Show(&s.value).to_string());
        let _ = writeln!(text, "sigma:     {sigma}");
        let _ = writeln!(text, "L:         {}", Show(&p.l_max));
        let _ = writeln!(text, "T:         {}", Show(&p.t_min));
        payload["sigma"] = json!(p.sigma.as_ref().map(|s| scalar_json(&s.value)));
        payload["l_max"] = scalar_json(&p.l_max);
        payload["t_min"] = scalar_json(&p.t_min);
    }
    if let Some(bound) = cert.bound {
        let _ = writeln!(text, "bound N:   {bound}");
        payload["bound"] = json!(bound);
    }
    if let Some(bp) = &cert.bp {
        if let Some(flow) = &bp.flow {
            let _ = writeln!(text, "bp flow:   {}", show_vec(flow));
        }
        payload["bp_flow"] = json!(bp.flow.as_ref().map(|f| vec_json(f)));
    }
    if !cert.mismatched_edges.is_empty() {
        let _ = writeln!(text, "mismatched edges: {:?}", cert.mismatched_edges);
    }
    payload["mismatched_edges"] = json!(cert.mismatched_edges);
    Ok((Some(fp), Outcome::new(payload, text, code)))
}

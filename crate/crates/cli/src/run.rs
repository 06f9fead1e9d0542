use condexp::conditional::{
    check_penalty_additivity, check_tower, compose, default_probes, ConditionalKernel, Expectation, FailedInclusion,
    PenaltyOrder,
};
use condexp::credal::CredalSet;
use condexp::demos::{self, DemoReport, GwalkParams, GwalkPayoff, Target};
use condexp::fubini::{check_fubini, interchange_gap};
use condexp::risk::{avar_dual_evaluate, avar_dual_set, compose_risk, compose_sublinear, greedy_dual, oce, TreeValues};
use condexp::sampling;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::report::{num, nums, strs, Obj, Report};
use crate::scenario::{
    parse_scenario, render, Command, DemoParams, ResolvedKernel, Scenario, ScenarioDoc, FORMAT_VERSION,
};

/// Fixed feasibility tolerance of the LP layer, echoed in every report.
pub const CORE_TOL: f64 = condexp::lp::FEAS_TOL;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Threshold for the pass/fail flags computed by the report layer.
    pub tol: f64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol: 1e-9,
            seed: 0,
            threads: 1,
        }
    }
}

type Out = Result<Value, CliError>;

fn vertices(set: &CredalSet) -> Value {
    Value::Array(set.vertices().iter().map(|p| nums(p.weights())).collect())
}

fn set_json(set: &CredalSet) -> Value {
    Obj::new()
        .put("labels", strs(&set.space().labels()))
        .put("vertices", vertices(set))
        .build()
}

fn tree_levels(values: &TreeValues) -> Value {
    Value::Array(values.levels.iter().map(|l| nums(l)).collect())
}

fn direction(d: FailedInclusion) -> &'static str {
    match d {
        FailedInclusion::PastingNotInSet => "pasting-not-in-set",
        FailedInclusion::SetNotInPasting => "set-not-in-pasting",
    }
}

fn order_name(o: PenaltyOrder) -> &'static str {
    match o {
        PenaltyOrder::Equal => "equal",
        PenaltyOrder::JointAbove => "joint-above",
        PenaltyOrder::JointBelow => "joint-below",
        PenaltyOrder::Mixed => "mixed",
    }
}

/// JSON form of a demo report.
pub fn demo_json(r: &DemoReport) -> Value {
    let mut inputs = Obj::new();
    for (k, v) in &r.inputs {
        inputs.insert(k, v.clone());
    }
    let mut values = Obj::new();
    for (k, v) in &r.values {
        values.insert(k, num(*v));
    }
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| {
            let base = Obj::new()
                .put("name", c.name.clone())
                .put("basis", c.basis.as_str())
                .put("pass", c.pass());
            match c.target {
                Target::Value {
                    expected,
                    actual,
                    tolerance,
                } => base
                    .num("expected", expected)
                    .num("actual", actual)
                    .num("tolerance", tolerance)
                    .build(),
                Target::Flag { expected, actual } => base.put("expected", expected).put("actual", actual).build(),
            }
        })
        .collect();
    Obj::new()
        .put("name", r.name.clone())
        .put("inputs", inputs.build())
        .put("values", values.build())
        .put("checks", Value::Array(checks))
        .put("notes", strs(&r.notes))
        .put("pass", r.pass)
        .build()
}

fn demo_with(name: &str, p: &DemoParams) -> Result<DemoReport, CliError> {
    let ctx = format!("demo {name}");
    let op = |e| CliError::operation(&ctx, e);
    match name {
        "continuity_failure_witness" => demos::continuity_failure_witness(p.n.unwrap_or(8)).map_err(op),
        "gwalk" => {
            let d = GwalkParams::default();
            let payoff = match &p.payoff {
                Some(text) => GwalkPayoff::parse(text).map_err(|e| CliError::validation("command.params.payoff", e))?,
                None => d.payoff,
            };
            let params = GwalkParams {
                horizon: p.horizon.unwrap_or(d.horizon),
                sigma_lo: p.sigma_lo.unwrap_or(d.sigma_lo),
                sigma_hi: p.sigma_hi.unwrap_or(d.sigma_hi),
                dt: p.dt.unwrap_or(d.dt),
                payoff,
            };
            demos::gwalk(&params).map_err(op)
        }
        _ => {
            if !p.is_empty() {
                return Err(CliError::Validation(format!("demo `{name}` takes no parameters")));
            }
            demos::run_demo(name).map_err(op)
        }
    }
}

/// SHA-256 of the canonical scenario text.
pub fn digest(s: &Scenario) -> String {
    Sha256::digest(render(&s.doc).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn diagnostics(s: &Scenario, notes: Vec<String>) -> Value {
    let mut drops = Obj::new();
    for (name, set) in &s.sets {
        if set.dropped() > 0 {
            drops.insert(name, set.dropped() as u64);
        }
    }
    let mut shifts = Obj::new();
    for (name, fam) in &s.penalties {
        if fam.shift() != 0.0 {
            shifts.insert(name, num(fam.shift()));
        }
    }
    Obj::new()
        .put("canonicalization_drops", drops.build())
        .put("normalization_shifts", shifts.build())
        .put("notes", strs(&notes))
        .build()
}

/// Dispatches the scenario's command.
pub fn run(s: &Scenario, opts: &RunOptions) -> Result<Report, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| CliError::Operation(format!("thread pool: {e}")))?;
    let mut notes = Vec::new();
    let outputs = pool.install(|| dispatch(s, opts, &mut notes))?;
    let command = serde_json::to_value(&s.doc.command).expect("commands serialize");
    let report = Obj::new()
        .put("format", FORMAT_VERSION)
        .put("command", command)
        .put("input_digest", digest(s))
        .put("outputs", outputs)
        .put("diagnostics", diagnostics(s, notes))
        .put(
            "tolerances",
            Obj::new()
                .num("report", opts.tol)
                .num("core_feasibility", CORE_TOL)
                .build(),
        )
        .build();
    Ok(Report(report))
}

/// Report for a named demo with default parameters, run as a one-command
/// scenario.
pub fn run_demo(name: &str, opts: &RunOptions) -> Result<Report, CliError> {
    let doc = ScenarioDoc {
        format: FORMAT_VERSION,
        spaces: Default::default(),
        sets: Default::default(),
        penalties: Default::default(),
        kernels: Default::default(),
        variables: Default::default(),
        points: Default::default(),
        trees: Default::default(),
        command: Command::Demo {
            name: name.to_string(),
            params: DemoParams::default(),
        },
    };
    run(&parse_scenario(&render(&doc))?, opts)
}

fn dispatch(s: &Scenario, opts: &RunOptions, notes: &mut Vec<String>) -> Out {
    let ctx = s.doc.command.op();
    let op = |e| CliError::operation(ctx, e);
    // References were checked during parsing.
    let set = |n: &str| &s.sets[n];
    let penalty = |n: &str| &s.penalties[n];
    let var = |n: &str| &s.variables[n];
    let point = |n: &str| &s.points[n];
    let mut rng = sampling::rng(opts.seed);

    match &s.doc.command {
        Command::Eval { set: a, variable: x } => {
            let (a, x) = (set(a), var(x));
            Ok(Obj::new()
                .num("value", a.sublinear_expectation(x).map_err(op)?)
                .put("maximizing_vertex", a.maximizing_vertex(x).map_err(op)? as u64)
                .build())
        }
        Command::EvalConvex {
            penalty: a,
            variable: x,
        } => Ok(Obj::new()
            .num("value", penalty(a).convex_expectation(var(x)).map_err(op)?)
            .build()),
        Command::Conditional { kernel, variable: x } => {
            let (values, u) = match &s.kernels[kernel] {
                ResolvedKernel::Credal(k) => (k.conditional_expectation(var(x)).map_err(op)?, k.u_space().clone()),
                ResolvedKernel::Penalty(k) => (k.conditional_convex(var(x)).map_err(op)?, k.u_space().clone()),
            };
            Ok(Obj::new()
                .put("labels", strs(&u.labels()))
                .put("values", nums(values.values()))
                .build())
        }
        Command::Compose {
            outer,
            kernel,
            variable: x,
        } => {
            let (outer, kernel) = match &s.kernels[kernel] {
                ResolvedKernel::Credal(k) => (
                    Expectation::Sublinear(set(outer).clone()),
                    ConditionalKernel::Credal(k.clone()),
                ),
                ResolvedKernel::Penalty(k) => (
                    Expectation::Convex(penalty(outer).clone()),
                    ConditionalKernel::Penalty(k.clone()),
                ),
            };
            let inner = kernel.evaluate(var(x)).map_err(op)?;
            Ok(Obj::new()
                .put("inner", nums(inner.values()))
                .num("value", compose(&outer, &kernel, var(x)).map_err(op)?)
                .build())
        }
        Command::CheckTower {
            set: a,
            kernel,
            variable,
            random_payoffs,
        } => {
            let ResolvedKernel::Credal(k) = &s.kernels[kernel] else {
                unreachable!("checked during parsing")
            };
            let a = set(a);
            let r = check_tower(a, k).map_err(op)?;
            let witnesses: Vec<Value> = r
                .witnesses
                .iter()
                .map(|w| {
                    Obj::new()
                        .put("direction", direction(w.direction))
                        .put("payoff", nums(w.payoff.values()))
                        .num("lhs", w.lhs)
                        .num("rhs", w.rhs)
                        .num("gap", w.gap)
                        .num("margin", w.certificate.margin)
                        .put("separating_payoff", nums(w.certificate.witness.values()))
                        .build()
                })
                .collect();
            let count = random_payoffs.unwrap_or(20);
            let mut max_gap: f64 = 0.0;
            for x in sampling::random_payoffs(&mut rng, a.space(), count) {
                let lhs = a.sublinear_expectation(&x).map_err(op)?;
                let rhs = compose(
                    &Expectation::Sublinear(r.marginal.clone()),
                    &ConditionalKernel::Credal(k.clone()),
                    &x,
                )
                .map_err(op)?;
                max_gap = max_gap.max((rhs - lhs).abs());
            }
            let consistent = if r.rectangular {
                max_gap <= opts.tol
            } else {
                r.witnesses.iter().all(|w| w.gap.abs() > opts.tol)
            };
            let mut out = Obj::new()
                .put("rectangular", r.rectangular)
                .put("marginal", set_json(&r.marginal))
                .put("pasting", set_json(&r.pasting))
                .put("witnesses", Value::Array(witnesses))
                .put("random_payoffs", count as u64)
                .num("max_random_gap", max_gap)
                .put("consistent", consistent);
            if let Some(x) = variable {
                let x = var(x);
                let lhs = a.sublinear_expectation(x).map_err(op)?;
                let rhs = compose(
                    &Expectation::Sublinear(r.marginal.clone()),
                    &ConditionalKernel::Credal(k.clone()),
                    x,
                )
                .map_err(op)?;
                out = out.put(
                    "variable",
                    Obj::new().num("lhs", lhs).num("rhs", rhs).num("gap", rhs - lhs).build(),
                );
            }
            Ok(out.build())
        }
        Command::CheckPenaltyAdditivity {
            joint,
            outer,
            kernel,
            random_probes,
            random_payoffs,
        } => {
            let ResolvedKernel::Penalty(k) = &s.kernels[kernel] else {
                unreachable!("checked during parsing")
            };
            let (joint, outer) = (penalty(joint), penalty(outer));
            let probes = default_probes(outer, k, random_probes.unwrap_or(10), &mut rng).map_err(op)?;
            let payoffs = sampling::random_payoffs(&mut rng, joint.space(), random_payoffs.unwrap_or(20));
            let r = check_penalty_additivity(joint, outer, k, &probes, &payoffs).map_err(op)?;
            let rows: Vec<Value> = r
                .probes
                .iter()
                .map(|p| {
                    Obj::new()
                        .num("joint", p.joint_penalty)
                        .num("additive", p.additive_penalty)
                        .build()
                })
                .collect();
            let bounded = r
                .probes
                .iter()
                .all(|p| p.joint_penalty <= p.additive_penalty + opts.tol || p.additive_penalty.is_infinite());
            Ok(Obj::new()
                .put("probes", Value::Array(rows))
                .put("order", order_name(r.order))
                .num("max_value_gap", r.max_value_gap)
                .put("value_gap_range", nums(&[r.value_gap_range.0, r.value_gap_range.1]))
                .put("joint_below_additive", bounded)
                .put(
                    "tower_holds",
                    r.order == PenaltyOrder::Equal && r.max_value_gap <= opts.tol,
                )
                .build())
        }
        Command::CheckFubini { su, sv, variable } => {
            let (su, sv) = (set(su), set(sv));
            let r = check_fubini(su, sv).map_err(op)?;
            let mut out = Obj::new()
                .put("interchangeable", r.interchangeable)
                .put("forward_set", set_json(&r.forward_set))
                .put("backward_set", set_json(&r.backward_set));
            if let Some(w) = &r.witness {
                out = out.put(
                    "witness",
                    Obj::new()
                        .put("payoff", nums(w.payoff.values()))
                        .num("lhs", w.lhs)
                        .num("rhs", w.rhs)
                        .num("margin", w.certificate.margin)
                        .put("reproduces", (w.lhs - w.rhs).abs() > opts.tol)
                        .build(),
                );
            }
            if let Some(x) = variable {
                let (lhs, rhs) = interchange_gap(su, sv, var(x)).map_err(op)?;
                out = out.put("variable", Obj::new().num("lhs", lhs).num("rhs", rhs).build());
            }
            Ok(out.build())
        }
        Command::Conjugate {
            set: a,
            penalty: b,
            point: p,
        } => {
            let p = point(p);
            match (a, b) {
                (Some(a), _) => {
                    let a = set(a);
                    let m = a.membership(p).map_err(op)?;
                    let mut out = Obj::new()
                        .put("member", m.member)
                        .num("value", a.conjugate_indicator(p).map_err(op)?);
                    if let Some(c) = m.coefficients {
                        out = out.put("coefficients", nums(&c));
                    }
                    Ok(out.build())
                }
                (None, Some(b)) => Ok(Obj::new()
                    .num("value", penalty(b).minimal_penalty(p).map_err(op)?)
                    .build()),
                (None, None) => unreachable!("checked during parsing"),
            }
        }
        Command::Separate { set: a, point: p } => {
            let (a, p) = (set(a), point(p));
            match a.separate(p) {
                Ok(c) => Ok(Obj::new()
                    .put("member", false)
                    .put("witness", nums(c.witness.values()))
                    .num("margin", c.margin)
                    .num("point_value", p.expectation(&c.witness).map_err(op)?)
                    .num("set_value", a.sublinear_expectation(&c.witness).map_err(op)?)
                    .build()),
                Err(condexp::error::Error::Member) => Ok(Obj::new().put("member", true).build()),
                Err(e) => Err(op(e)),
            }
        }
        Command::Oce {
            set: a,
            variable: x,
            loss,
        } => {
            let spec = loss.to_spec().map_err(op)?;
            if spec.is_boundary() {
                notes.push(
                    "avar level 1 lies outside the open range (0, 1); the value collapses to the sublinear expectation"
                        .into(),
                );
            }
            let r = oce(set(a), var(x), &spec).map_err(op)?;
            Ok(Obj::new().num("value", r.value).num("minimizer", r.minimizer).build())
        }
        Command::AvarDual {
            set: a,
            lambda,
            variable,
            vertices: want_vertices,
        } => {
            let a = set(a);
            if *lambda == 1.0 {
                notes.push("avar level 1 lies outside the open range (0, 1)".into());
            }
            let mut out = Obj::new();
            if let Some(x) = variable {
                let x = var(x);
                let exact = avar_dual_evaluate(a, *lambda, x).map_err(op)?;
                let per_vertex = a
                    .vertices()
                    .iter()
                    .map(|p| greedy_dual(p, *lambda, x).map(|(v, _)| v))
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(op)?;
                let best = per_vertex.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                out = out
                    .num("value", exact)
                    .put("vertex_greedy_values", nums(&per_vertex))
                    .num("vertex_greedy_max", best);
                if exact - best > opts.tol {
                    notes.push(
                        "the dual supremum is attained at a mixture of vertices, above every per-vertex greedy value"
                            .into(),
                    );
                }
            }
            if *want_vertices {
                out = out.put("dual_set", set_json(&avar_dual_set(a, *lambda).map_err(op)?));
            }
            Ok(out.build())
        }
        Command::TreeRisk {
            tree,
            variable: x,
            loss,
        } => {
            let spec = loss.to_spec().map_err(op)?;
            if spec.is_boundary() {
                notes.push("avar level 1 lies outside the open range (0, 1)".into());
            }
            let v = compose_risk(&s.trees[tree], var(x), &spec).map_err(op)?;
            Ok(Obj::new().num("root", v.root()).put("levels", tree_levels(&v)).build())
        }
        Command::TreeSublinear { tree, variable: x } => {
            let v = compose_sublinear(&s.trees[tree], var(x)).map_err(op)?;
            Ok(Obj::new().num("root", v.root()).put("levels", tree_levels(&v)).build())
        }
        Command::Demo { name, params } => Ok(demo_json(&demo_with(name, params)?)),
    }
}

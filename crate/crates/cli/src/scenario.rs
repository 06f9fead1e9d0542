//! Scenario documents: named objects plus one command, stored as JSON with a
//! `"format": 1` header.

use std::collections::{BTreeMap, BTreeSet};

use condexp::conditional::{CredalKernel, PenaltyKernel};
use condexp::credal::CredalSet;
use condexp::penalty::PenaltyAtoms;
use condexp::risk::{LossSpec, ScenarioTree};
use condexp::space::{OutcomeSpace, ProbVector, RandomVariable};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceDoc {
    Labels(Vec<String>),
    /// Labels `0, 1, …, n-1`.
    Range(usize),
    Product(String, String),
    Power {
        base: String,
        exponent: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDoc {
    pub space: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<Vec<f64>>,
    /// All probabilities on the space; `vertices` must then be empty.
    #[serde(default, skip_serializing_if = "is_false")]
    pub simplex: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub point: Vec<f64>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyDoc {
    pub space: String,
    pub atoms: Vec<AtomDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelDoc {
    /// One credal set per outcome of `u_space`.
    Credal { u_space: String, sets: Vec<String> },
    /// One penalty family per outcome of `u_space`.
    Penalty { u_space: String, families: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDoc {
    pub space: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub space: String,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeDoc {
    /// `levels[t]` names the `|Ω₁|^t` node sets of level `t`.
    Levels(Vec<Vec<String>>),
    /// The same set at every node.
    Uniform { set: String, horizon: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LossDoc {
    Avar { lambda: f64 },
    PiecewiseLinear { breakpoints: Vec<f64>, slopes: Vec<f64> },
}

impl LossDoc {
    pub fn to_spec(&self) -> condexp::error::Result<LossSpec> {
        match self {
            LossDoc::Avar { lambda } => LossSpec::avar(*lambda),
            LossDoc::PiecewiseLinear { breakpoints, slopes } => {
                LossSpec::piecewise_linear(breakpoints.clone(), slopes.clone())
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<String>,
}

impl DemoParams {
    pub fn is_empty(&self) -> bool {
        *self == DemoParams::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    Eval {
        set: String,
        variable: String,
    },
    EvalConvex {
        penalty: String,
        variable: String,
    },
    Conditional {
        kernel: String,
        variable: String,
    },
    /// `outer` names a set for a credal kernel, a penalty for a penalty kernel.
    Compose {
        outer: String,
        kernel: String,
        variable: String,
    },
    CheckTower {
        set: String,
        kernel: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variable: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_payoffs: Option<usize>,
    },
    CheckPenaltyAdditivity {
        joint: String,
        outer: String,
        kernel: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_probes: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_payoffs: Option<usize>,
    },
    CheckFubini {
        su: String,
        sv: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variable: Option<String>,
    },
    /// Exactly one of `set` (indicator) and `penalty` (minimal penalty).
    Conjugate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        set: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        penalty: Option<String>,
        point: String,
    },
    Separate {
        set: String,
        point: String,
    },
    Oce {
        set: String,
        variable: String,
        loss: LossDoc,
    },
    AvarDual {
        set: String,
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variable: Option<String>,
        #[serde(default, skip_serializing_if = "is_false")]
        vertices: bool,
    },
    TreeRisk {
        tree: String,
        variable: String,
        loss: LossDoc,
    },
    TreeSublinear {
        tree: String,
        variable: String,
    },
    Demo {
        name: String,
        #[serde(default, skip_serializing_if = "DemoParams::is_empty")]
        params: DemoParams,
    },
}

impl Command {
    pub fn op(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::EvalConvex { .. } => "eval-convex",
            Command::Conditional { .. } => "conditional",
            Command::Compose { .. } => "compose",
            Command::CheckTower { .. } => "check-tower",
            Command::CheckPenaltyAdditivity { .. } => "check-penalty-additivity",
            Command::CheckFubini { .. } => "check-fubini",
            Command::Conjugate { .. } => "conjugate",
            Command::Separate { .. } => "separate",
            Command::Oce { .. } => "oce",
            Command::AvarDual { .. } => "avar-dual",
            Command::TreeRisk { .. } => "tree-risk",
            Command::TreeSublinear { .. } => "tree-sublinear",
            Command::Demo { .. } => "demo",
        }
    }
}

/// The document as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub format: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spaces: BTreeMap<String, SpaceDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sets: BTreeMap<String, SetDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub penalties: BTreeMap<String, PenaltyDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub kernels: BTreeMap<String, KernelDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub variables: BTreeMap<String, VariableDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub points: BTreeMap<String, PointDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub trees: BTreeMap<String, TreeDoc>,
    pub command: Command,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug)]
pub enum ResolvedKernel {
    Credal(CredalKernel),
    Penalty(PenaltyKernel),
}

/// A document whose objects all passed their invariants.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub spaces: BTreeMap<String, OutcomeSpace>,
    pub sets: BTreeMap<String, CredalSet>,
    pub penalties: BTreeMap<String, PenaltyAtoms>,
    pub kernels: BTreeMap<String, ResolvedKernel>,
    pub variables: BTreeMap<String, RandomVariable>,
    pub points: BTreeMap<String, ProbVector>,
    pub trees: BTreeMap<String, ScenarioTree>,
}

/// Canonical text of a document: pretty JSON, keys in declaration order of
/// the schema, sections sorted by name, trailing newline.
pub fn render(doc: &ScenarioDoc) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("scenario documents always serialize");
    text.push('\n');
    text
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        CliError::Validation(format!(
            "parse error at `{}` (line {}, column {}): {}",
            e.path(),
            inner.line(),
            inner.column(),
            inner
        ))
    })?;
    resolve(doc)
}

fn missing(kind: &str, name: &str, context: &str) -> CliError {
    CliError::Validation(format!("{context}: unknown {kind} `{name}`"))
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: &str, context: &str) -> Result<&'a T, CliError> {
    map.get(name).ok_or_else(|| missing(kind, name, context))
}

fn resolve_space(
    name: &str,
    docs: &BTreeMap<String, SpaceDoc>,
    done: &mut BTreeMap<String, OutcomeSpace>,
    visiting: &mut BTreeSet<String>,
    context: &str,
) -> Result<OutcomeSpace, CliError> {
    if let Some(s) = done.get(name) {
        return Ok(s.clone());
    }
    let doc = lookup(docs, "space", name, context)?;
    if !visiting.insert(name.to_string()) {
        return Err(CliError::Validation(format!("spaces.{name}: cyclic space definition")));
    }
    let here = format!("spaces.{name}");
    let space = match doc {
        SpaceDoc::Labels(labels) => {
            OutcomeSpace::new(labels.iter().cloned()).map_err(|e| CliError::validation(&here, e))?
        }
        SpaceDoc::Range(n) => OutcomeSpace::range(*n).map_err(|e| CliError::validation(&here, e))?,
        SpaceDoc::Product(u, v) => {
            let u = resolve_space(u, docs, done, visiting, &here)?;
            let v = resolve_space(v, docs, done, visiting, &here)?;
            OutcomeSpace::product(&u, &v)
        }
        SpaceDoc::Power { base, exponent } => {
            if *exponent == 0 {
                return Err(CliError::Validation(format!("{here}: exponent must be at least 1")));
            }
            let b = resolve_space(base, docs, done, visiting, &here)?;
            let size = (b.size() as u128).checked_pow(*exponent as u32).unwrap_or(u128::MAX);
            if size > condexp::risk::NODE_LIMIT {
                return Err(CliError::SizeGuard(format!(
                    "{here}: power space has {size} outcomes, limit is {}",
                    condexp::risk::NODE_LIMIT
                )));
            }
            OutcomeSpace::power(&b, *exponent)
        }
    };
    visiting.remove(name);
    done.insert(name.to_string(), space.clone());
    Ok(space)
}

fn resolve(doc: ScenarioDoc) -> Result<Scenario, CliError> {
    if doc.format != FORMAT_VERSION {
        return Err(CliError::Validation(format!(
            "format: unsupported version {}, expected {FORMAT_VERSION}",
            doc.format
        )));
    }
    let mut spaces = BTreeMap::new();
    for name in doc.spaces.keys() {
        resolve_space(name, &doc.spaces, &mut spaces, &mut BTreeSet::new(), "spaces")?;
    }
    let space_of = |name: &str, context: &str| -> Result<OutcomeSpace, CliError> {
        lookup(&spaces, "space", name, context).cloned()
    };

    let mut sets = BTreeMap::new();
    for (name, d) in &doc.sets {
        let here = format!("sets.{name}");
        let space = space_of(&d.space, &here)?;
        let set = if d.simplex {
            if !d.vertices.is_empty() {
                return Err(CliError::Validation(format!(
                    "{here}: give either `simplex` or `vertices`, not both"
                )));
            }
            CredalSet::simplex(&space)
        } else {
            let points = d
                .vertices
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    ProbVector::new(&space, w.clone())
                        .map_err(|e| CliError::validation(&format!("{here}.vertices[{i}]"), e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            CredalSet::new(points).map_err(|e| CliError::validation(&here, e))?
        };
        sets.insert(name.clone(), set);
    }

    let mut penalties = BTreeMap::new();
    for (name, d) in &doc.penalties {
        let here = format!("penalties.{name}");
        let space = space_of(&d.space, &here)?;
        let atoms = d
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let p = ProbVector::new(&space, a.point.clone())
                    .map_err(|e| CliError::validation(&format!("{here}.atoms[{i}]"), e))?;
                Ok((p, a.cost))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        penalties.insert(
            name.clone(),
            PenaltyAtoms::new(atoms).map_err(|e| CliError::validation(&here, e))?,
        );
    }

    let mut kernels = BTreeMap::new();
    for (name, d) in &doc.kernels {
        let here = format!("kernels.{name}");
        let kernel = match d {
            KernelDoc::Credal { u_space, sets: names } => {
                let u = space_of(u_space, &here)?;
                let values = names
                    .iter()
                    .map(|n| lookup(&sets, "set", n, &here).cloned())
                    .collect::<Result<Vec<_>, _>>()?;
                ResolvedKernel::Credal(CredalKernel::new(&u, values).map_err(|e| CliError::validation(&here, e))?)
            }
            KernelDoc::Penalty { u_space, families } => {
                let u = space_of(u_space, &here)?;
                let values = families
                    .iter()
                    .map(|n| lookup(&penalties, "penalty", n, &here).cloned())
                    .collect::<Result<Vec<_>, _>>()?;
                ResolvedKernel::Penalty(PenaltyKernel::new(&u, values).map_err(|e| CliError::validation(&here, e))?)
            }
        };
        kernels.insert(name.clone(), kernel);
    }

    let mut variables = BTreeMap::new();
    for (name, d) in &doc.variables {
        let here = format!("variables.{name}");
        let space = space_of(&d.space, &here)?;
        let x = RandomVariable::new(&space, d.values.clone()).map_err(|e| CliError::validation(&here, e))?;
        variables.insert(name.clone(), x);
    }

    let mut points = BTreeMap::new();
    for (name, d) in &doc.points {
        let here = format!("points.{name}");
        let space = space_of(&d.space, &here)?;
        let p = ProbVector::new(&space, d.weights.clone()).map_err(|e| CliError::validation(&here, e))?;
        points.insert(name.clone(), p);
    }

    let mut trees = BTreeMap::new();
    for (name, d) in &doc.trees {
        let here = format!("trees.{name}");
        let tree = match d {
            TreeDoc::Levels(levels) => {
                let resolved = levels
                    .iter()
                    .map(|level| {
                        level
                            .iter()
                            .map(|n| lookup(&sets, "set", n, &here).cloned())
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let step = resolved
                    .first()
                    .and_then(|l| l.first())
                    .map(|s| s.space().clone())
                    .ok_or_else(|| CliError::Validation(format!("{here}: tree needs at least one level")))?;
                ScenarioTree::new(&step, resolved).map_err(|e| CliError::validation(&here, e))?
            }
            TreeDoc::Uniform { set, horizon } => {
                let s = lookup(&sets, "set", set, &here)?;
                ScenarioTree::uniform_ambiguity(s, *horizon).map_err(|e| CliError::validation(&here, e))?
            }
        };
        trees.insert(name.clone(), tree);
    }

    let scenario = Scenario {
        doc,
        spaces,
        sets,
        penalties,
        kernels,
        variables,
        points,
        trees,
    };
    check_references(&scenario)?;
    Ok(scenario)
}

fn check_references(s: &Scenario) -> Result<(), CliError> {
    let c = "command";
    let set = |n: &str| lookup(&s.sets, "set", n, c).map(|_| ());
    let penalty = |n: &str| lookup(&s.penalties, "penalty", n, c).map(|_| ());
    let kernel = |n: &str| lookup(&s.kernels, "kernel", n, c);
    let variable = |n: &str| lookup(&s.variables, "variable", n, c).map(|_| ());
    let point = |n: &str| lookup(&s.points, "point", n, c).map(|_| ());
    let tree = |n: &str| lookup(&s.trees, "tree", n, c).map(|_| ());
    let credal = |n: &str| match kernel(n)? {
        ResolvedKernel::Credal(_) => Ok(()),
        ResolvedKernel::Penalty(_) => Err(CliError::Validation(format!("{c}: kernel `{n}` must be credal"))),
    };
    let penalty_kernel = |n: &str| match kernel(n)? {
        ResolvedKernel::Penalty(_) => Ok(()),
        ResolvedKernel::Credal(_) => Err(CliError::Validation(format!(
            "{c}: kernel `{n}` must be a penalty kernel"
        ))),
    };
    let loss = |l: &LossDoc| {
        l.to_spec()
            .map(|_| ())
            .map_err(|e| CliError::validation("command.loss", e))
    };

    match &s.doc.command {
        Command::Eval { set: a, variable: x } => {
            set(a)?;
            variable(x)
        }
        Command::EvalConvex {
            penalty: a,
            variable: x,
        } => {
            penalty(a)?;
            variable(x)
        }
        Command::Conditional { kernel: k, variable: x } => {
            kernel(k)?;
            variable(x)
        }
        Command::Compose {
            outer,
            kernel: k,
            variable: x,
        } => {
            match kernel(k)? {
                ResolvedKernel::Credal(_) => set(outer)?,
                ResolvedKernel::Penalty(_) => penalty(outer)?,
            }
            variable(x)
        }
        Command::CheckTower {
            set: a,
            kernel: k,
            variable: x,
            ..
        } => {
            set(a)?;
            credal(k)?;
            x.as_deref().map_or(Ok(()), variable)
        }
        Command::CheckPenaltyAdditivity {
            joint,
            outer,
            kernel: k,
            ..
        } => {
            penalty(joint)?;
            penalty(outer)?;
            penalty_kernel(k)
        }
        Command::CheckFubini { su, sv, variable: x } => {
            set(su)?;
            set(sv)?;
            x.as_deref().map_or(Ok(()), variable)
        }
        Command::Conjugate {
            set: a,
            penalty: b,
            point: p,
        } => {
            match (a, b) {
                (Some(a), None) => set(a)?,
                (None, Some(b)) => penalty(b)?,
                _ => {
                    return Err(CliError::Validation(format!(
                        "{c}: conjugate needs exactly one of `set` and `penalty`"
                    )))
                }
            }
            point(p)
        }
        Command::Separate { set: a, point: p } => {
            set(a)?;
            point(p)
        }
        Command::Oce {
            set: a,
            variable: x,
            loss: l,
        } => {
            set(a)?;
            variable(x)?;
            loss(l)
        }
        Command::AvarDual {
            set: a,
            lambda,
            variable: x,
            ..
        } => {
            set(a)?;
            LossSpec::avar(*lambda).map_err(|e| CliError::validation("command.lambda", e))?;
            x.as_deref().map_or(Ok(()), variable)
        }
        Command::TreeRisk {
            tree: t,
            variable: x,
            loss: l,
        } => {
            tree(t)?;
            variable(x)?;
            loss(l)
        }
        Command::TreeSublinear { tree: t, variable: x } => {
            tree(t)?;
            variable(x)
        }
        Command::Demo { name, .. } => {
            if condexp::demos::DEMO_NAMES.contains(&name.as_str()) {
                Ok(())
            } else {
                Err(CliError::Validation(format!("{c}: unknown demo `{name}`")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "format": 1,
        "spaces": {"S": {"labels": ["a", "b"]}},
        "sets": {"P": {"space": "S", "vertices": [[0.5, 0.5]]}},
        "variables": {"X": {"space": "S", "values": [2, 4]}},
        "command": {"op": "eval", "set": "P", "variable": "X"}
    }"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.sets["P"].vertices().len(), 1);
        let again = parse_scenario(&render(&s.doc)).unwrap();
        assert_eq!(again.doc, s.doc);
    }

    #[test]
    fn negative_weight_is_rejected() {
        let text = MINIMAL.replace("[[0.5, 0.5]]", "[[-0.1, 1.1]]");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("sets.P.vertices[0]"), "{err}");
    }

    #[test]
    fn bad_sum_names_the_invariant() {
        let text = MINIMAL.replace("[[0.5, 0.5]]", "[[0.5, 0.52]]");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("weights sum 1.02 exceeds tolerance"), "{err}");
    }

    #[test]
    fn dangling_kernel_reference() {
        let text = MINIMAL.replace(
            r#"{"op": "eval", "set": "P", "variable": "X"}"#,
            r#"{"op": "conditional", "kernel": "K", "variable": "X"}"#,
        );
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("unknown kernel `K`"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_a_path() {
        let text = MINIMAL.replace(r#""values": [2, 4]"#, r#""values": [2, "x"]"#);
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("variables.X.values"), "{err}");
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn cyclic_spaces_rejected() {
        let text = MINIMAL.replace(
            r#""S": {"labels": ["a", "b"]}"#,
            r#""S": {"labels": ["a", "b"]}, "A": {"product": ["B", "S"]}, "B": {"product": ["A", "S"]}"#,
        );
        assert!(parse_scenario(&text).unwrap_err().to_string().contains("cyclic"));
    }
}

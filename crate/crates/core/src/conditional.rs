//! Conditional expectations on `U × V`, their composition with an outer
//! expectation on `U`, the pasting product, and tower-property checks.
//!
//! A conditional expectation is given by a kernel `u ↦ K(u)` of credal sets
//! (sublinear case) or penalty families (convex case) on `V`. Composition is
//! plain backward induction. The pasting `SU ⊗ K` is the hull of all
//! `Q ⊗ R_s` where `Q` is a vertex of `SU` and `s` selects one vertex of
//! `K(u)` for every `u` charged by `Q`; its support function coincides with
//! the composition, which the tests check on random payoffs.

use rand::Rng;

use crate::credal::{CredalSet, SeparationCertificate};
use crate::error::{Error, Result};
use crate::lp::FEAS_TOL;
use crate::penalty::PenaltyAtoms;
use crate::sampling;
use crate::space::{Kernel, OutcomeSpace, ProbVector, RandomVariable};

/// Hard limit on enumerated generators in pastings and composed families.
pub const GENERATOR_LIMIT: u128 = 1_000_000;

/// `u ↦ 𝒫_V(u)`.
#[derive(Clone, Debug)]
pub struct CredalKernel {
    u_space: OutcomeSpace,
    v_space: OutcomeSpace,
    sets: Vec<CredalSet>,
}

impl CredalKernel {
    pub fn new(u_space: &OutcomeSpace, sets: Vec<CredalSet>) -> Result<Self> {
        if sets.len() != u_space.size() {
            return Err(Error::dim(format!(
                "credal kernel has {} sets for a space of size {}",
                sets.len(),
                u_space.size()
            )));
        }
        let v_space = sets[0].space().clone();
        for s in &sets {
            v_space.expect_same(s.space(), "credal kernel value")?;
        }
        Ok(CredalKernel {
            u_space: u_space.clone(),
            v_space,
            sets,
        })
    }

    pub fn constant(u_space: &OutcomeSpace, set: &CredalSet) -> Self {
        CredalKernel {
            u_space: u_space.clone(),
            v_space: set.space().clone(),
            sets: vec![set.clone(); u_space.size()],
        }
    }

    pub fn u_space(&self) -> &OutcomeSpace {
        &self.u_space
    }

    pub fn v_space(&self) -> &OutcomeSpace {
        &self.v_space
    }

    pub fn sets(&self) -> &[CredalSet] {
        &self.sets
    }

    pub fn joint_space(&self) -> OutcomeSpace {
        OutcomeSpace::product(&self.u_space, &self.v_space)
    }

    /// `𝓔(X|U)(u) = sup_{P ∈ K(u)} E_P[X(u, ·)]`.
    pub fn conditional_expectation(&self, x: &RandomVariable) -> Result<RandomVariable> {
        self.joint_space().expect_same(x.space(), "conditional expectation")?;
        let values = self
            .sets
            .iter()
            .enumerate()
            .map(|(u, set)| Ok(set.support(x.slice(u)?.values())))
            .collect::<Result<Vec<_>>>()?;
        RandomVariable::new(&self.u_space, values)
    }
}

/// `u ↦ α_V(u, ·)`.
#[derive(Clone, Debug)]
pub struct PenaltyKernel {
    u_space: OutcomeSpace,
    v_space: OutcomeSpace,
    families: Vec<PenaltyAtoms>,
}

impl PenaltyKernel {
    pub fn new(u_space: &OutcomeSpace, families: Vec<PenaltyAtoms>) -> Result<Self> {
        if families.len() != u_space.size() {
            return Err(Error::dim(format!(
                "penalty kernel has {} families for a space of size {}",
                families.len(),
                u_space.size()
            )));
        }
        let v_space = families[0].space().clone();
        for f in &families {
            v_space.expect_same(f.space(), "penalty kernel value")?;
        }
        Ok(PenaltyKernel {
            u_space: u_space.clone(),
            v_space,
            families,
        })
    }

    pub fn from_credal(kernel: &CredalKernel) -> Self {
        PenaltyKernel {
            u_space: kernel.u_space.clone(),
            v_space: kernel.v_space.clone(),
            families: kernel.sets.iter().map(PenaltyAtoms::from_credal).collect(),
        }
    }

    pub fn u_space(&self) -> &OutcomeSpace {
        &self.u_space
    }

    pub fn v_space(&self) -> &OutcomeSpace {
        &self.v_space
    }

    pub fn families(&self) -> &[PenaltyAtoms] {
        &self.families
    }

    pub fn joint_space(&self) -> OutcomeSpace {
        OutcomeSpace::product(&self.u_space, &self.v_space)
    }

    /// `𝓔(X|U)(u) = max_i (E_{P_i}[X(u, ·)] - c_i)` with atoms of `K(u)`.
    pub fn conditional_convex(&self, x: &RandomVariable) -> Result<RandomVariable> {
        self.joint_space()
            .expect_same(x.space(), "conditional convex expectation")?;
        let values = self
            .families
            .iter()
            .enumerate()
            .map(|(u, fam)| Ok(fam.value(x.slice(u)?.values())))
            .collect::<Result<Vec<_>>>()?;
        RandomVariable::new(&self.u_space, values)
    }
}

/// An unconditional expectation on `U`.
#[derive(Clone, Debug)]
pub enum Expectation {
    Sublinear(CredalSet),
    Convex(PenaltyAtoms),
}

impl Expectation {
    pub fn evaluate(&self, x: &RandomVariable) -> Result<f64> {
        match self {
            Expectation::Sublinear(s) => s.sublinear_expectation(x),
            Expectation::Convex(a) => a.convex_expectation(x),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ConditionalKernel {
    Credal(CredalKernel),
    Penalty(PenaltyKernel),
}

impl ConditionalKernel {
    pub fn evaluate(&self, x: &RandomVariable) -> Result<RandomVariable> {
        match self {
            ConditionalKernel::Credal(k) => k.conditional_expectation(x),
            ConditionalKernel::Penalty(k) => k.conditional_convex(x),
        }
    }
}

/// `𝓔_U(𝓔(X|U))`; outer and kernel must both be sublinear or both convex.
pub fn compose(outer: &Expectation, kernel: &ConditionalKernel, x: &RandomVariable) -> Result<f64> {
    match (outer, kernel) {
        (Expectation::Sublinear(s), ConditionalKernel::Credal(k)) => compose_sublinear(s, k, x),
        (Expectation::Convex(a), ConditionalKernel::Penalty(k)) => compose_convex(a, k, x),
        _ => Err(Error::invalid(
            "compose needs a credal outer set with a credal kernel, or penalty atoms with a penalty kernel",
        )),
    }
}

pub fn compose_sublinear(outer: &CredalSet, kernel: &CredalKernel, x: &RandomVariable) -> Result<f64> {
    outer.sublinear_expectation(&kernel.conditional_expectation(x)?)
}

pub fn compose_convex(outer: &PenaltyAtoms, kernel: &PenaltyKernel, x: &RandomVariable) -> Result<f64> {
    outer.convex_expectation(&kernel.conditional_convex(x)?)
}

/// Enumerates `(selection, Q ⊗ R_s)` for one outer point; rows of `Q`-null
/// states always take option 0.
fn for_each_selection(q: &ProbVector, options: &[usize], mut visit: impl FnMut(&[usize])) {
    let active: Vec<usize> = (0..options.len()).filter(|&u| q[u] > 0.0).collect();
    let mut selection = vec![0usize; options.len()];
    loop {
        visit(&selection);
        // Odometer over the charged states, last state fastest.
        let mut pos = active.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            let u = active[pos];
            selection[u] += 1;
            if selection[u] < options[u] {
                break;
            }
            selection[u] = 0;
        }
    }
}

fn selection_count(outer: &[&ProbVector], options: &[usize]) -> u128 {
    outer
        .iter()
        .map(|q| {
            (0..options.len())
                .filter(|&u| q[u] > 0.0)
                .fold(1u128, |acc, u| acc.saturating_mul(options[u] as u128))
        })
        .fold(0u128, |acc, c| acc.saturating_add(c))
}

fn guard(what: &'static str, count: u128) -> Result<()> {
    if count > GENERATOR_LIMIT {
        Err(Error::SizeGuard {
            what,
            count,
            limit: GENERATOR_LIMIT,
        })
    } else {
        Ok(())
    }
}

fn paste_point(joint: &OutcomeSpace, q: &ProbVector, rows: &[&ProbVector]) -> ProbVector {
    let mut weights = Vec::with_capacity(joint.size());
    for (u, r) in rows.iter().enumerate() {
        weights.extend(r.weights().iter().map(|w| q[u] * w));
    }
    ProbVector::normalized(joint, weights)
}

/// One atom per outer atom and per-state atom selection, costed by
/// `c_i + Σ_u Q_i(u) · cost(s(u))`.
pub fn composed_atoms(outer: &PenaltyAtoms, kernel: &PenaltyKernel) -> Result<PenaltyAtoms> {
    outer.space().expect_same(kernel.u_space(), "composed atoms")?;
    let options: Vec<usize> = kernel.families.iter().map(PenaltyAtoms::len).collect();
    let points: Vec<&ProbVector> = outer.atoms().iter().map(|a| &a.point).collect();
    guard("composed atoms", selection_count(&points, &options))?;

    let joint = kernel.joint_space();
    let mut atoms = Vec::new();
    for a in outer.atoms() {
        for_each_selection(&a.point, &options, |sel| {
            let rows: Vec<&ProbVector> = sel
                .iter()
                .enumerate()
                .map(|(u, &i)| &kernel.families[u].atoms()[i].point)
                .collect();
            let cost = a.cost
                + sel
                    .iter()
                    .enumerate()
                    .filter(|&(u, _)| a.point[u] > 0.0)
                    .map(|(u, &i)| a.point[u] * kernel.families[u].atoms()[i].cost)
                    .sum::<f64>();
            atoms.push((paste_point(&joint, &a.point, &rows), cost));
        });
    }
    PenaltyAtoms::new(atoms)
}

/// `𝒫_U ⊗ 𝒫_V`, canonicalized.
pub fn pasting(outer: &CredalSet, kernel: &CredalKernel) -> Result<CredalSet> {
    outer.space().expect_same(kernel.u_space(), "pasting")?;
    let options: Vec<usize> = kernel.sets.iter().map(|s| s.vertices().len()).collect();
    let points: Vec<&ProbVector> = outer.vertices().iter().collect();
    guard("pasting generators", selection_count(&points, &options))?;

    let joint = kernel.joint_space();
    let mut generators = Vec::new();
    for q in outer.vertices() {
        for_each_selection(q, &options, |sel| {
            let rows: Vec<&ProbVector> = sel
                .iter()
                .enumerate()
                .map(|(u, &i)| &kernel.sets[u].vertices()[i])
                .collect();
            generators.push(paste_point(&joint, q, &rows));
        });
    }
    CredalSet::new(generators)
}

/// Which inclusion between the set and the pasting failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailedInclusion {
    /// A pasting vertex lies outside the set: `𝓔(X) < 𝓔(𝓔(X|U))` for the witness.
    PastingNotInSet,
    /// A set vertex lies outside the pasting: `𝓔(X) > 𝓔(𝓔(X|U))` for the witness.
    SetNotInPasting,
}

#[derive(Clone, Debug)]
pub struct TowerWitness {
    pub direction: FailedInclusion,
    /// Separating payoff rescaled onto `[0, 1]`.
    pub payoff: RandomVariable,
    /// `𝓔(X)` over the set.
    pub lhs: f64,
    /// `𝓔(𝓔(X|U))` through the marginal and the kernel.
    pub rhs: f64,
    /// `rhs - lhs`.
    pub gap: f64,
    /// Sup-norm separation certificate of the offending vertex.
    pub certificate: SeparationCertificate,
}

#[derive(Clone, Debug)]
pub struct TowerReport {
    pub rectangular: bool,
    pub marginal: CredalSet,
    pub pasting: CredalSet,
    /// One witness per failed inclusion, pasting-in-set direction first.
    pub witnesses: Vec<TowerWitness>,
}

impl TowerReport {
    pub fn witness(&self) -> Option<&TowerWitness> {
        self.witnesses.first()
    }

    pub fn failed(&self, direction: FailedInclusion) -> bool {
        self.witnesses.iter().any(|w| w.direction == direction)
    }
}

/// Decides whether `𝓔 = 𝓔(𝓔(·|U))` for the set `S` and kernel `K`, i.e.
/// whether `S` equals the pasting of its marginal with `K`.
pub fn check_tower(set: &CredalSet, kernel: &CredalKernel) -> Result<TowerReport> {
    kernel.joint_space().expect_same(set.space(), "tower check")?;
    let marginal = set.marginal_set()?;
    let pasted = pasting(&marginal, kernel)?;

    let mut witnesses = Vec::new();
    if let Some(i) = pasted.first_vertex_outside(set)? {
        let certificate = set.separate(&pasted.vertices()[i])?;
        witnesses.push(tower_witness(
            set,
            &marginal,
            kernel,
            certificate,
            FailedInclusion::PastingNotInSet,
        )?);
    }
    if let Some(i) = set.first_vertex_outside(&pasted)? {
        let certificate = pasted.separate(&set.vertices()[i])?;
        witnesses.push(tower_witness(
            set,
            &marginal,
            kernel,
            certificate,
            FailedInclusion::SetNotInPasting,
        )?);
    }
    Ok(TowerReport {
        rectangular: witnesses.is_empty(),
        marginal,
        pasting: pasted,
        witnesses,
    })
}

fn tower_witness(
    set: &CredalSet,
    marginal: &CredalSet,
    kernel: &CredalKernel,
    certificate: SeparationCertificate,
    direction: FailedInclusion,
) -> Result<TowerWitness> {
    let payoff = certificate.witness.to_unit_range();
    let lhs = set.sublinear_expectation(&payoff)?;
    let rhs = compose_sublinear(marginal, kernel, &payoff)?;
    Ok(TowerWitness {
        direction,
        payoff,
        lhs,
        rhs,
        gap: rhs - lhs,
        certificate,
    })
}

/// A probe point `P = Q ⊗ R` for the penalty-additivity check.
#[derive(Clone, Debug)]
pub struct Probe {
    pub outer: ProbVector,
    pub kernel: Kernel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    /// `α(Q ⊗ R)` from the joint family.
    pub joint_penalty: f64,
    /// `α_U(Q) + Σ_u Q(u) α_V(u, R(u))`.
    pub additive_penalty: f64,
}

/// How the joint penalty compares with the additive one across probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PenaltyOrder {
    /// Equal at every probe: evidence for the tower property.
    Equal,
    /// Joint ≥ additive everywhere: evidence for `𝓔 ≤ 𝓔(𝓔(·|U))`.
    JointAbove,
    /// Joint ≤ additive everywhere: evidence for `𝓔 ≥ 𝓔(𝓔(·|U))`.
    JointBelow,
    Mixed,
}

#[derive(Clone, Debug)]
pub struct AdditivityReport {
    pub probes: Vec<ProbeResult>,
    pub order: PenaltyOrder,
    /// `max |𝓔(X) - 𝓔_U(𝓔(X|U))|` over the test payoffs.
    pub max_value_gap: f64,
    /// Smallest and largest `𝓔(X) - 𝓔_U(𝓔(X|U))` over the test payoffs.
    pub value_gap_range: (f64, f64),
}

fn additive_penalty(outer: &PenaltyAtoms, kernel: &PenaltyKernel, probe: &Probe) -> Result<f64> {
    let mut total = outer.minimal_penalty(&probe.outer)?;
    for (u, fam) in kernel.families.iter().enumerate() {
        let q = probe.outer[u];
        if q > 0.0 {
            total += q * fam.minimal_penalty(probe.kernel.row(u))?;
        }
    }
    Ok(total)
}

fn agree(a: f64, b: f64) -> bool {
    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= FEAS_TOL
}

/// Compares the joint penalty with the additive one at each probe, and the
/// two expectations directly on the test payoffs.
pub fn check_penalty_additivity(
    joint: &PenaltyAtoms,
    outer: &PenaltyAtoms,
    kernel: &PenaltyKernel,
    probes: &[Probe],
    payoffs: &[RandomVariable],
) -> Result<AdditivityReport> {
    kernel.joint_space().expect_same(joint.space(), "penalty additivity")?;
    outer.space().expect_same(kernel.u_space(), "penalty additivity")?;

    let mut results = Vec::with_capacity(probes.len());
    for probe in probes {
        let p = probe.outer.product(&probe.kernel)?;
        results.push(ProbeResult {
            joint_penalty: joint.minimal_penalty(&p)?,
            additive_penalty: additive_penalty(outer, kernel, probe)?,
        });
    }
    let above = results
        .iter()
        .all(|r| agree(r.joint_penalty, r.additive_penalty) || r.joint_penalty > r.additive_penalty);
    let below = results
        .iter()
        .all(|r| agree(r.joint_penalty, r.additive_penalty) || r.joint_penalty < r.additive_penalty);
    let order = match (above, below) {
        (true, true) => PenaltyOrder::Equal,
        (true, false) => PenaltyOrder::JointAbove,
        (false, true) => PenaltyOrder::JointBelow,
        (false, false) => PenaltyOrder::Mixed,
    };

    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut max_gap: f64 = 0.0;
    for x in payoffs {
        let d = joint.convex_expectation(x)? - compose_convex(outer, kernel, x)?;
        range = (range.0.min(d), range.1.max(d));
        max_gap = max_gap.max(d.abs());
    }
    if payoffs.is_empty() {
        range = (0.0, 0.0);
    }
    Ok(AdditivityReport {
        probes: results,
        order,
        max_value_gap: max_gap,
        value_gap_range: range,
    })
}

/// Every decomposable atom pair `(Q_i, R_s)` plus `random` draws of `Q` and
/// `R(u)` from the atom hulls.
pub fn default_probes(
    outer: &PenaltyAtoms,
    kernel: &PenaltyKernel,
    random: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Probe>> {
    outer.space().expect_same(kernel.u_space(), "probes")?;
    let options: Vec<usize> = kernel.families.iter().map(PenaltyAtoms::len).collect();
    let points: Vec<&ProbVector> = outer.atoms().iter().map(|a| &a.point).collect();
    guard("probes", selection_count(&points, &options))?;

    let mut probes = Vec::new();
    for a in outer.atoms() {
        let mut rows_err = None;
        for_each_selection(&a.point, &options, |sel| {
            let rows = sel
                .iter()
                .enumerate()
                .map(|(u, &i)| kernel.families[u].atoms()[i].point.clone())
                .collect();
            match Kernel::new(kernel.u_space(), kernel.v_space(), rows) {
                Ok(k) => probes.push(Probe {
                    outer: a.point.clone(),
                    kernel: k,
                }),
                Err(e) => rows_err = Some(e),
            }
        });
        if let Some(e) = rows_err {
            return Err(e);
        }
    }
    for _ in 0..random {
        let q = sampling::random_mixture(rng, &points);
        let rows = kernel
            .families
            .iter()
            .map(|f| {
                let pts: Vec<&ProbVector> = f.atoms().iter().map(|a| &a.point).collect();
                sampling::random_mixture(rng, &pts)
            })
            .collect();
        probes.push(Probe {
            outer: q,
            kernel: Kernel::new(kernel.u_space(), kernel.v_space(), rows)?,
        });
    }
    Ok(probes)
}

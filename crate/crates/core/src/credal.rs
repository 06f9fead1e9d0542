//! Credal sets: probability polytopes in vertex representation.
//!
//! The sublinear expectation of a payoff is the largest vertex expectation.
//! Membership is an LP feasibility problem over barycentric coefficients, and
//! non-members are separated by a payoff of sup-norm one that maximizes the
//! gap between the point and the set.

use crate::error::{Error, Result};
use crate::lp::{Problem, Relation, Solution, FEAS_TOL};
use crate::space::{OutcomeSpace, ProbVector, RandomVariable};

/// Points closer than this (sup-norm) are merged during canonicalization.
const DUPLICATE_TOL: f64 = 1e-12;

/// A nonempty convex polytope of probability vectors.
#[derive(Clone, Debug)]
pub struct CredalSet {
    space: OutcomeSpace,
    vertices: Vec<ProbVector>,
    dropped: usize,
}

/// Outcome of the hull-membership LP.
#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// Barycentric coefficients over the set's vertices; `None` for points
    /// outside the hull or inside it only up to the tolerance.
    pub coefficients: Option<Vec<f64>>,
}

/// A payoff whose expectation under a point exceeds the set's sublinear
/// expectation.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationCertificate {
    pub witness: RandomVariable,
    /// `E_P[witness] - sup_{P' ∈ S} E_{P'}[witness]`, strictly positive.
    pub margin: f64,
}

impl CredalSet {
    /// Convex hull of `generators`, with redundant generators removed.
    pub fn new(generators: Vec<ProbVector>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::invalid("credal set needs at least one vertex"))?;
        let space = first.space().clone();
        for g in &generators {
            space.expect_same(g.space(), "credal set vertex")?;
        }
        let total = generators.len();
        let vertices = canonicalize(generators)?;
        Ok(CredalSet {
            dropped: total - vertices.len(),
            space,
            vertices,
        })
    }

    /// The full probability simplex, spanned by the Dirac measures.
    pub fn simplex(space: &OutcomeSpace) -> Self {
        CredalSet {
            space: space.clone(),
            vertices: (0..space.size()).map(|i| ProbVector::dirac(space, i)).collect(),
            dropped: 0,
        }
    }

    pub fn singleton(p: ProbVector) -> Self {
        CredalSet {
            space: p.space().clone(),
            vertices: vec![p],
            dropped: 0,
        }
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn vertices(&self) -> &[ProbVector] {
        &self.vertices
    }

    /// Number of generators removed as redundant at construction.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// `sup_{P ∈ S} E_P[X]`, attained at a vertex.
    pub fn sublinear_expectation(&self, x: &RandomVariable) -> Result<f64> {
        self.space.expect_same(x.space(), "sublinear expectation")?;
        Ok(self.support(x.values()))
    }

    pub(crate) fn support(&self, x: &[f64]) -> f64 {
        self.vertices.iter().map(|v| v.dot(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the first vertex attaining the sublinear expectation.
    pub fn maximizing_vertex(&self, x: &RandomVariable) -> Result<usize> {
        let best = self.sublinear_expectation(x)?;
        Ok(self
            .vertices
            .iter()
            .position(|v| v.dot(x.values()) >= best)
            .unwrap_or(0))
    }

    pub fn membership(&self, p: &ProbVector) -> Result<Membership> {
        self.space.expect_same(p.space(), "membership")?;
        let points: Vec<&ProbVector> = self.vertices.iter().collect();
        let coefficients = hull_coefficients(&points, p.weights())?;
        // A point the LP rejects but no payoff separates by more than the
        // tolerance counts as a member, so `contains` and `separate` agree.
        let member = coefficients.is_some() || self.max_margin(p)?.1 <= FEAS_TOL;
        Ok(Membership { member, coefficients })
    }

    pub fn contains(&self, p: &ProbVector) -> Result<bool> {
        Ok(self.membership(p)?.member)
    }

    /// Separating payoff for a point outside the set.
    ///
    /// The witness maximizes `min_i E_P[X] - E_{v_i}[X]` over `‖X‖_∞ ≤ 1`,
    /// the dual of the L1 distance from `P` to the hull. Fails with
    /// [`Error::Member`] when `P` belongs to the set.
    pub fn separate(&self, p: &ProbVector) -> Result<SeparationCertificate> {
        self.space.expect_same(p.space(), "separation")?;
        let points: Vec<&ProbVector> = self.vertices.iter().collect();
        if hull_coefficients(&points, p.weights())?.is_some() {
            return Err(Error::Member);
        }
        let (witness, margin) = self.max_margin(p)?;
        if margin <= FEAS_TOL {
            return Err(Error::Member);
        }
        Ok(SeparationCertificate { witness, margin })
    }

    fn max_margin(&self, p: &ProbVector) -> Result<(RandomVariable, f64)> {
        let n = self.space.size();
        // Variables: z_j = x_j + 1 ∈ [0, 2], then t⁺, t⁻.
        let mut lp = Problem::new(n + 2);
        let mut objective = vec![0.0; n + 2];
        objective[n] = -1.0;
        objective[n + 1] = 1.0;
        lp.minimize(objective);
        for v in &self.vertices {
            let mut row: Vec<f64> = p.weights().iter().zip(v.weights()).map(|(a, b)| a - b).collect();
            let rhs: f64 = row.iter().sum();
            row.push(-1.0);
            row.push(1.0);
            lp.constrain(row, Relation::Ge, rhs);
        }
        for j in 0..n {
            let mut row = vec![0.0; n + 2];
            row[j] = 1.0;
            lp.constrain(row, Relation::Le, 2.0);
        }
        let x = match lp.solve()? {
            Solution::Optimal { x, .. } => x,
            other => return Err(Error::Lp(format!("separation LP: {other:?}"))),
        };
        let mut values: Vec<f64> = x[..n].iter().map(|z| z - 1.0).collect();
        let norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        let witness = RandomVariable::new(&self.space, values)?;
        let margin = p.dot(witness.values()) - self.support(witness.values());
        Ok((witness, margin))
    }

    /// Convex indicator of the set: `0` inside, `+∞` outside.
    pub fn conjugate_indicator(&self, p: &ProbVector) -> Result<f64> {
        Ok(if self.contains(p)? { 0.0 } else { f64::INFINITY })
    }

    /// Mutual containment of vertex sets.
    pub fn equal(&self, other: &CredalSet) -> Result<bool> {
        Ok(self.first_vertex_outside(other)?.is_none() && other.first_vertex_outside(self)?.is_none())
    }

    /// First vertex of `self` that is not a member of `other`.
    pub fn first_vertex_outside(&self, other: &CredalSet) -> Result<Option<usize>> {
        self.space.expect_same(other.space(), "set comparison")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if !other.contains(v)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// `{P(· × V) : P ∈ S}` for a set on `U × V`.
    pub fn marginal_set(&self) -> Result<CredalSet> {
        self.space.expect_factors("marginal set")?;
        let marginals = self
            .vertices
            .iter()
            .map(ProbVector::marginal)
            .collect::<Result<Vec<_>>>()?;
        CredalSet::new(marginals)
    }

    /// Image of a set on `U × V` under `(u, v) ↦ (v, u)`.
    pub fn transpose(&self) -> Result<CredalSet> {
        let vertices = self
            .vertices
            .iter()
            .map(ProbVector::transpose)
            .collect::<Result<Vec<_>>>()?;
        Ok(CredalSet {
            space: vertices[0].space().clone(),
            vertices,
            dropped: 0,
        })
    }
}

/// Barycentric coefficients of `target` over `points`, or `None` when the
/// point lies outside their hull.
pub(crate) fn hull_coefficients(points: &[&ProbVector], target: &[f64]) -> Result<Option<Vec<f64>>> {
    let m = points.len();
    let n = target.len();
    let mut lp = Problem::new(m);
    for j in 0..n {
        lp.constrain(points.iter().map(|p| p[j]).collect(), Relation::Eq, target[j]);
    }
    lp.constrain(vec![1.0; m], Relation::Eq, 1.0);
    match lp.solve()? {
        Solution::Optimal { x, .. } => Ok(Some(x)),
        Solution::Infeasible { .. } => Ok(None),
        Solution::Unbounded => Err(Error::Lp("membership LP unbounded".to_string())),
    }
}

/// Drops duplicates, then every generator lying in the hull of the others.
fn canonicalize(generators: Vec<ProbVector>) -> Result<Vec<ProbVector>> {
    let mut unique: Vec<ProbVector> = Vec::with_capacity(generators.len());
    for g in generators {
        if !unique.iter().any(|u| u.distance_inf(&g) <= DUPLICATE_TOL) {
            unique.push(g);
        }
    }
    let mut keep = vec![true; unique.len()];
    for i in 0..unique.len() {
        let others: Vec<&ProbVector> = unique
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i && keep[k])
            .map(|(_, p)| p)
            .collect();
        if others.is_empty() {
            continue;
        }
        if hull_coefficients(&others, unique[i].weights())?.is_some() {
            keep[i] = false;
        }
    }
    Ok(unique
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect())
}

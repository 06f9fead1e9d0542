//! Convex expectations generated by finitely many penalized measures.
//!
//! `𝓔(X) = max_i (E_{P_i}[X] - c_i)`; its minimal penalty at a point `P` is the
//! cheapest convex combination of atoms landing on `P`, and `+∞` off the hull.

use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::lp::{Problem, Relation, Solution};
use crate::space::{OutcomeSpace, ProbVector, RandomVariable};

/// Slack allowed when deciding whether an atom is dominated.
pub const DOMINANCE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: ProbVector,
    pub cost: f64,
}

/// A nonempty family of `(P_i, c_i)` with `min_i c_i = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyAtoms {
    space: OutcomeSpace,
    atoms: Vec<Atom>,
    shift: f64,
}

impl PenaltyAtoms {
    /// Builds the family, shifting all costs so the cheapest atom costs zero.
    /// The applied shift is available through [`PenaltyAtoms::shift`].
    pub fn new(atoms: Vec<(ProbVector, f64)>) -> Result<Self> {
        let (first, _) = atoms
            .first()
            .ok_or_else(|| Error::invalid("penalty family needs at least one atom"))?;
        let space = first.space().clone();
        for (p, c) in &atoms {
            space.expect_same(p.space(), "penalty atom")?;
            if !c.is_finite() {
                return Err(Error::invalid(format!("atom cost {c} is not finite")));
            }
        }
        let shift = atoms.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
        let atoms = atoms
            .into_iter()
            .map(|(point, cost)| Atom {
                point,
                cost: cost - shift,
            })
            .collect();
        Ok(PenaltyAtoms { space, atoms, shift })
    }

    /// Zero-cost atoms at the vertices of a credal set.
    pub fn from_credal(set: &CredalSet) -> Self {
        PenaltyAtoms {
            space: set.space().clone(),
            atoms: set
                .vertices()
                .iter()
                .map(|p| Atom {
                    point: p.clone(),
                    cost: 0.0,
                })
                .collect(),
            shift: 0.0,
        }
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Amount subtracted from every input cost during normalization.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `max_i (E_{P_i}[X] - c_i)`.
    pub fn convex_expectation(&self, x: &RandomVariable) -> Result<f64> {
        self.space.expect_same(x.space(), "convex expectation")?;
        Ok(self.value(x.values()))
    }

    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.point.dot(x) - a.cost)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min { Σ λ_i c_i : λ ∈ Δ, Σ λ_i P_i = P }`, `+∞` when infeasible.
    pub fn minimal_penalty(&self, p: &ProbVector) -> Result<f64> {
        self.space.expect_same(p.space(), "minimal penalty")?;
        let atoms: Vec<&Atom> = self.atoms.iter().collect();
        envelope_value(&atoms, p.weights())
    }

    /// Removes atoms lying strictly above the convex envelope of the others.
    pub fn envelope_atoms(&self) -> Result<PenaltyAtoms> {
        let mut keep = vec![true; self.atoms.len()];
        for i in 0..self.atoms.len() {
            let others: Vec<&Atom> = self
                .atoms
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && keep[k])
                .map(|(_, a)| a)
                .collect();
            if others.is_empty() {
                continue;
            }
            let env = envelope_value(&others, self.atoms[i].point.weights())?;
            if self.atoms[i].cost > env + DOMINANCE_TOL {
                keep[i] = false;
            }
        }
        Ok(PenaltyAtoms {
            space: self.space.clone(),
            atoms: self
                .atoms
                .iter()
                .zip(keep)
                .filter(|&(_, k)| k)
                .map(|(a, _)| a.clone())
                .collect(),
            shift: self.shift,
        })
    }

    /// Credal set spanned by the atom points (the effective domain).
    pub fn hull(&self) -> Result<CredalSet> {
        CredalSet::new(self.atoms.iter().map(|a| a.point.clone()).collect())
    }
}

fn envelope_value(atoms: &[&Atom], target: &[f64]) -> Result<f64> {
    let m = atoms.len();
    let mut lp = Problem::new(m);
    lp.minimize(atoms.iter().map(|a| a.cost).collect());
    for (j, &t) in target.iter().enumerate() {
        lp.constrain(atoms.iter().map(|a| a.point[j]).collect(), Relation::Eq, t);
    }
    lp.constrain(vec![1.0; m], Relation::Eq, 1.0);
    match lp.solve()? {
        Solution::Optimal { objective, .. } => Ok(objective.max(0.0)),
        Solution::Infeasible { .. } => Ok(f64::INFINITY),
        Solution::Unbounded => Err(Error::Lp("penalty LP unbounded".to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> OutcomeSpace {
        OutcomeSpace::new(["a", "b"]).unwrap()
    }

    fn pv(s: &OutcomeSpace, w: &[f64]) -> ProbVector {
        ProbVector::new(s, w.to_vec()).unwrap()
    }

    fn corner_family(s: &OutcomeSpace) -> PenaltyAtoms {
        PenaltyAtoms::new(vec![(ProbVector::dirac(s, 0), 0.0), (ProbVector::dirac(s, 1), 2.0)]).unwrap()
    }

    #[test]
    fn convex_expectation_examples() {
        let s = two();
        let a = corner_family(&s);
        let x = RandomVariable::new(&s, vec![4.0, 0.0]).unwrap();
        assert_eq!(a.convex_expectation(&x).unwrap(), 4.0);
        let x = RandomVariable::new(&s, vec![0.0, 4.0]).unwrap();
        assert_eq!(a.convex_expectation(&x).unwrap(), 2.0);
    }

    #[test]
    fn zero_costs_collapse_to_sublinear() {
        let s = OutcomeSpace::range(3).unwrap();
        let pts = vec![pv(&s, &[0.2, 0.3, 0.5]), pv(&s, &[0.6, 0.4, 0.0])];
        let a = PenaltyAtoms::new(pts.iter().map(|p| (p.clone(), 0.0)).collect()).unwrap();
        let set = CredalSet::new(pts).unwrap();
        let x = RandomVariable::new(&s, vec![1.5, -2.0, 0.25]).unwrap();
        assert_eq!(
            a.convex_expectation(&x).unwrap(),
            set.sublinear_expectation(&x).unwrap()
        );
    }

    #[test]
    fn normalization_shifts_costs() {
        let s = two();
        let a = PenaltyAtoms::new(vec![(ProbVector::dirac(&s, 0), 3.0), (ProbVector::dirac(&s, 1), 5.0)]).unwrap();
        assert_eq!(a.shift(), 3.0);
        assert_eq!(a.atoms()[0].cost, 0.0);
        assert_eq!(a.atoms()[1].cost, 2.0);
        let c = RandomVariable::constant(&s, 7.0);
        assert_eq!(a.convex_expectation(&c).unwrap(), 7.0);
        assert!(PenaltyAtoms::new(vec![(ProbVector::dirac(&s, 0), f64::NAN)]).is_err());
        assert!(PenaltyAtoms::new(vec![]).is_err());
    }

    #[test]
    fn minimal_penalty_examples() {
        let s = two();
        let a = corner_family(&s);
        let v = a.minimal_penalty(&pv(&s, &[0.5, 0.5])).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        for atom in a.atoms() {
            assert!(a.minimal_penalty(&atom.point).unwrap() <= atom.cost + 1e-12);
        }
        let t = OutcomeSpace::range(3).unwrap();
        let b = PenaltyAtoms::new(vec![(ProbVector::dirac(&t, 0), 0.0), (ProbVector::dirac(&t, 1), 1.0)]).unwrap();
        assert_eq!(b.minimal_penalty(&ProbVector::dirac(&t, 2)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn envelope_examples() {
        let s = two();
        let a = PenaltyAtoms::new(vec![
            (ProbVector::dirac(&s, 0), 0.0),
            (ProbVector::dirac(&s, 1), 0.0),
            (pv(&s, &[0.5, 0.5]), 1.0),
        ])
        .unwrap();
        let e = a.envelope_atoms().unwrap();
        assert_eq!(e.len(), 2);
        assert!(e.atoms().iter().all(|x| x.cost == 0.0));

        let minimal = corner_family(&s);
        assert_eq!(minimal.envelope_atoms().unwrap(), minimal);

        let dup = PenaltyAtoms::new(vec![
            (ProbVector::dirac(&s, 0), 0.0),
            (ProbVector::dirac(&s, 1), 1.0),
            (ProbVector::dirac(&s, 0), 0.5),
        ])
        .unwrap();
        assert_eq!(dup.envelope_atoms().unwrap().len(), 2);
    }
}

//! Interchanging iterated sublinear expectations over `U × V` with constant
//! ambiguity sets on each factor.

use crate::conditional::{pasting, CredalKernel};
use crate::credal::{CredalSet, SeparationCertificate};
use crate::error::Result;
use crate::space::{OutcomeSpace, RandomVariable};

#[derive(Clone, Debug)]
pub struct FubiniWitness {
    /// Separating payoff on `U × V`, rescaled onto `[0, 1]`.
    pub payoff: RandomVariable,
    /// `U` outer, `V` inner.
    pub lhs: f64,
    /// `V` outer, `U` inner.
    pub rhs: f64,
    pub certificate: SeparationCertificate,
}

#[derive(Clone, Debug)]
pub struct FubiniReport {
    pub interchangeable: bool,
    /// `SU ⊗ SV` on `U × V`.
    pub forward_set: CredalSet,
    /// `SV ⊗ SU` pulled back to `U × V`.
    pub backward_set: CredalSet,
    pub witness: Option<FubiniWitness>,
}

/// Both iterated values of `X`: `(sup_U ∫ sup_V ∫ X, sup_V ∫ sup_U ∫ X)`.
pub fn interchange_gap(su: &CredalSet, sv: &CredalSet, x: &RandomVariable) -> Result<(f64, f64)> {
    let joint = OutcomeSpace::product(su.space(), sv.space());
    joint.expect_same(x.space(), "interchange gap")?;
    let forward = CredalKernel::constant(su.space(), sv);
    let backward = CredalKernel::constant(sv.space(), su);
    let lhs = su.sublinear_expectation(&forward.conditional_expectation(x)?)?;
    let rhs = sv.sublinear_expectation(&backward.conditional_expectation(&x.transpose()?)?)?;
    Ok((lhs, rhs))
}

/// Tests whether the two pasting orders produce the same set of measures.
pub fn check_fubini(su: &CredalSet, sv: &CredalSet) -> Result<FubiniReport> {
    let forward_set = pasting(su, &CredalKernel::constant(su.space(), sv))?;
    let backward_set = pasting(sv, &CredalKernel::constant(sv.space(), su))?.transpose()?;

    let certificate = if let Some(i) = forward_set.first_vertex_outside(&backward_set)? {
        Some(backward_set.separate(&forward_set.vertices()[i])?)
    } else if let Some(i) = backward_set.first_vertex_outside(&forward_set)? {
        Some(forward_set.separate(&backward_set.vertices()[i])?)
    } else {
        None
    };
    let witness = match certificate {
        None => None,
        Some(certificate) => {
            let payoff = certificate.witness.to_unit_range();
            let (lhs, rhs) = interchange_gap(su, sv, &payoff)?;
            Some(FubiniWitness {
                payoff,
                lhs,
                rhs,
                certificate,
            })
        }
    };
    Ok(FubiniReport {
        interchangeable: witness.is_none(),
        forward_set,
        backward_set,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ProbVector;

    fn bit() -> OutcomeSpace {
        OutcomeSpace::new(["0", "1"]).unwrap()
    }

    fn same_diagonal(s: &OutcomeSpace) -> RandomVariable {
        let uv = OutcomeSpace::product(s, s);
        RandomVariable::from_fn2(&uv, |u, v| if u == v { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn singletons_give_classical_fubini() {
        let u = OutcomeSpace::range(3).unwrap();
        let v = bit();
        let su = CredalSet::singleton(ProbVector::new(&u, vec![0.2, 0.3, 0.5]).unwrap());
        let sv = CredalSet::singleton(ProbVector::new(&v, vec![0.4, 0.6]).unwrap());
        let uv = OutcomeSpace::product(&u, &v);
        let x = RandomVariable::from_fn2(&uv, |i, j| (i * i) as f64 - 2.0 * j as f64).unwrap();
        let (lhs, rhs) = interchange_gap(&su, &sv, &x).unwrap();
        let direct = 0.3 * 1.0 + 0.5 * 4.0 - 2.0 * 0.6;
        assert!((lhs - direct).abs() < 1e-12 && (rhs - direct).abs() < 1e-12);
        assert!(check_fubini(&su, &sv).unwrap().interchangeable);
    }

    #[test]
    fn uniform_versus_simplex_counterexample() {
        let s = bit();
        let su = CredalSet::singleton(ProbVector::uniform(&s));
        let sv = CredalSet::simplex(&s);
        let x = same_diagonal(&s);
        assert_eq!(interchange_gap(&su, &sv, &x).unwrap(), (1.0, 0.5));
        assert_eq!(interchange_gap(&sv, &su, &x).unwrap(), (0.5, 1.0));

        let r = check_fubini(&su, &sv).unwrap();
        assert!(!r.interchangeable);
        let w = r.witness.unwrap();
        assert_eq!(w.payoff, x);
        assert_eq!((w.lhs, w.rhs), (1.0, 0.5));
    }

    #[test]
    fn separable_payoffs_interchange() {
        let s = bit();
        let su = CredalSet::new(vec![ProbVector::dirac(&s, 0), ProbVector::uniform(&s)]).unwrap();
        let sv = CredalSet::simplex(&s);
        let (f, g) = ([0.3, -1.0], [2.0, 0.5]);
        let uv = OutcomeSpace::product(&s, &s);
        let x = RandomVariable::from_fn2(&uv, |u, v| f[u] + g[v]).unwrap();
        let (lhs, rhs) = interchange_gap(&su, &sv, &x).unwrap();
        let expected = su
            .sublinear_expectation(&RandomVariable::new(&s, f.to_vec()).unwrap())
            .unwrap()
            + sv.sublinear_expectation(&RandomVariable::new(&s, g.to_vec()).unwrap())
                .unwrap();
        assert!((lhs - expected).abs() < 1e-12 && (rhs - expected).abs() < 1e-12);
    }

    #[test]
    fn full_simplices_interchange() {
        let s = bit();
        let r = check_fubini(&CredalSet::simplex(&s), &CredalSet::simplex(&s)).unwrap();
        assert!(r.interchangeable);
        assert!(r
            .forward_set
            .equal(&CredalSet::simplex(&OutcomeSpace::product(&s, &s)))
            .unwrap());
    }
}

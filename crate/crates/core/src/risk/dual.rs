//! The AVaR dual set `𝒬 = {Q ∈ 𝔓 : Q ≤ P/λ for some P ∈ S}`.
//!
//! For a single measure the supremum of `E_Q[X]` over `𝒬` is a fractional
//! knapsack: fill the best outcomes up to their caps `P/λ`. Over a polytope
//! `S` the optimal `P` may be a mixture of vertices, so evaluation solves the
//! joint LP in `(μ, Q)` instead.

use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::lp::{Problem, Relation, Solution};
use crate::space::{ProbVector, RandomVariable};

/// Explicit dual sets are only built up to this many outcomes.
pub const DUAL_SET_MAX_OUTCOMES: usize = 10;

fn check_level(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("avar level {lambda} outside (0, 1]")))
    }
}

/// Greedy maximizer of `E_Q[X]` over `Q ≤ P/λ`; returns the value and `Q`.
pub fn greedy_dual(p: &ProbVector, lambda: f64, x: &RandomVariable) -> Result<(f64, ProbVector)> {
    check_level(lambda)?;
    p.space().expect_same(x.space(), "greedy dual")?;
    let xs = x.values();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[b].total_cmp(&xs[a]).then(a.cmp(&b)));
    let mut q = vec![0.0; xs.len()];
    let mut remaining = 1.0_f64;
    for &i in &order {
        if remaining <= 0.0 {
            break;
        }
        let take = (p[i] / lambda).min(remaining);
        q[i] = take;
        remaining -= take;
    }
    let q = ProbVector::normalized(p.space(), q);
    Ok((q.dot(xs), q))
}

/// `sup { E_Q[X] : Q ∈ 𝒬(S, λ) }`.
pub fn avar_dual_evaluate(set: &CredalSet, lambda: f64, x: &RandomVariable) -> Result<f64> {
    check_level(lambda)?;
    set.space().expect_same(x.space(), "avar dual")?;
    if let [p] = set.vertices() {
        return Ok(greedy_dual(p, lambda, x)?.0);
    }
    let m = set.vertices().len();
    let n = x.len();
    // Variables: μ ∈ Δ_m (mixing weights), then Q ∈ Δ_n.
    let mut lp = Problem::new(m + n);
    let mut objective = vec![0.0; m + n];
    for (j, v) in x.values().iter().enumerate() {
        objective[m + j] = -v;
    }
    lp.minimize(objective);
    let mut row = vec![0.0; m + n];
    row[..m].iter_mut().for_each(|c| *c = 1.0);
    lp.constrain(row, Relation::Eq, 1.0);
    let mut row = vec![0.0; m + n];
    row[m..].iter_mut().for_each(|c| *c = 1.0);
    lp.constrain(row, Relation::Eq, 1.0);
    for j in 0..n {
        let mut row = vec![0.0; m + n];
        for (i, p) in set.vertices().iter().enumerate() {
            row[i] = -p[j];
        }
        row[m + j] = lambda;
        lp.constrain(row, Relation::Le, 0.0);
    }
    match lp.solve()? {
        Solution::Optimal { objective, .. } => Ok(-objective),
        other => Err(Error::Lp(format!("avar dual LP: {other:?}"))),
    }
}

/// Vertex representation of `𝒬(S, λ)`.
///
/// The map `P ↦ Q` that fills a set `T` of outcomes to `P/λ` and puts the
/// remainder on outcome `j` is affine on the slab
/// `Σ_T P ≤ λ ≤ Σ_T P + P_j`. Vertices of `S ∩ slab` are vertices of `S`
/// inside the slab or points where a segment between two vertices meets a
/// slab face, so the images of those points over all `(T, j)` span `𝒬`.
pub fn avar_dual_set(set: &CredalSet, lambda: f64) -> Result<CredalSet> {
    check_level(lambda)?;
    let n = set.space().size();
    if n > DUAL_SET_MAX_OUTCOMES {
        return Err(Error::SizeGuard {
            what: "avar dual set outcomes",
            count: n as u128,
            limit: DUAL_SET_MAX_OUTCOMES as u128,
        });
    }
    const EPS: f64 = 1e-12;
    let vertices: Vec<&[f64]> = set.vertices().iter().map(ProbVector::weights).collect();
    let mut points: Vec<Vec<f64>> = Vec::new();

    for j in 0..n {
        for mask in 0u32..(1 << n) {
            if mask & (1 << j) != 0 {
                continue;
            }
            let in_t = |k: usize| mask & (1 << k) != 0;
            let lower = |p: &[f64]| -> f64 { (0..n).filter(|&k| in_t(k)).map(|k| p[k]).sum() };
            // h1 = Σ_T P - λ ≤ 0 and h2 = λ - Σ_T P - P_j ≤ 0.
            let h1 = |p: &[f64]| lower(p) - lambda;
            let h2 = |p: &[f64]| lambda - lower(p) - p[j];
            let inside = |p: &[f64]| h1(p) <= EPS && h2(p) <= EPS;

            let mut local: Vec<Vec<f64>> = vertices.iter().filter(|p| inside(p)).map(|p| p.to_vec()).collect();
            for a in 0..vertices.len() {
                for b in a + 1..vertices.len() {
                    let (pa, pb) = (vertices[a], vertices[b]);
                    for h in [&h1 as &dyn Fn(&[f64]) -> f64, &h2] {
                        let (ha, hb) = (h(pa), h(pb));
                        if ha * hb < 0.0 {
                            let t = ha / (ha - hb);
                            let p: Vec<f64> = pa.iter().zip(pb).map(|(x, y)| x + t * (y - x)).collect();
                            if inside(&p) {
                                local.push(p);
                            }
                        }
                    }
                }
            }
            for p in local {
                let mut q = vec![0.0; n];
                let mut filled = 0.0;
                for k in (0..n).filter(|&k| in_t(k)) {
                    q[k] = p[k] / lambda;
                    filled += q[k];
                }
                q[j] = (1.0 - filled).max(0.0);
                if !points
                    .iter()
                    .any(|o| o.iter().zip(&q).all(|(a, b)| (a - b).abs() <= 1e-12))
                {
                    points.push(q);
                }
            }
        }
    }
    let generators = points
        .into_iter()
        .map(|q| ProbVector::new(set.space(), q))
        .collect::<Result<Vec<_>>>()?;
    CredalSet::new(generators)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::OutcomeSpace;

    #[test]
    fn greedy_fill_example() {
        let s = OutcomeSpace::range(2).unwrap();
        let set = CredalSet::singleton(ProbVector::uniform(&s));
        let x = RandomVariable::new(&s, vec![0.0, 10.0]).unwrap();
        let (v, q) = greedy_dual(&set.vertices()[0], 0.5, &x).unwrap();
        assert_eq!(v, 10.0);
        assert_eq!(q.weights(), &[0.0, 1.0]);
        assert_eq!(avar_dual_evaluate(&set, 0.5, &x).unwrap(), 10.0);
    }

    #[test]
    fn level_one_equals_sublinear() {
        let s = OutcomeSpace::range(3).unwrap();
        let set = CredalSet::new(vec![
            ProbVector::new(&s, vec![0.2, 0.3, 0.5]).unwrap(),
            ProbVector::new(&s, vec![0.7, 0.1, 0.2]).unwrap(),
        ])
        .unwrap();
        let x = RandomVariable::new(&s, vec![1.0, -4.0, 2.5]).unwrap();
        let v = avar_dual_evaluate(&set, 1.0, &x).unwrap();
        assert!((v - set.sublinear_expectation(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn small_level_saturates_top_outcome() {
        let s = OutcomeSpace::range(4).unwrap();
        let set = CredalSet::new(vec![
            ProbVector::new(&s, vec![0.5, 0.5, 0.0, 0.0]).unwrap(),
            ProbVector::new(&s, vec![0.0, 0.4, 0.6, 0.0]).unwrap(),
        ])
        .unwrap();
        let x = RandomVariable::new(&s, vec![3.0, 1.0, 2.0, 9.0]).unwrap();
        // Outcome 3 is charged by no vertex; the best charged outcome is 0.
        assert!((avar_dual_evaluate(&set, 0.4, &x).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_beats_every_vertex() {
        let s = OutcomeSpace::range(3).unwrap();
        let set = CredalSet::new(vec![
            ProbVector::dirac(&s, 1),
            ProbVector::new(&s, vec![0.95, 0.0, 0.05]).unwrap(),
        ])
        .unwrap();
        let x = RandomVariable::new(&s, vec![0.0, 1.0, 10.0]).unwrap();
        let per_vertex = set
            .vertices()
            .iter()
            .map(|p| greedy_dual(p, 0.5, &x).unwrap().0)
            .fold(f64::NEG_INFINITY, f64::max);
        let exact = avar_dual_evaluate(&set, 0.5, &x).unwrap();
        assert!((per_vertex - 1.0).abs() < 1e-12);
        let s_star = 0.5 / 0.95;
        assert!((exact - (s_star + 2.0 * (1.0 - s_star))).abs() < 1e-9);
    }

    #[test]
    fn dual_set_examples() {
        let s = OutcomeSpace::range(2).unwrap();
        let p = ProbVector::new(&s, vec![0.3, 0.7]).unwrap();
        let single = CredalSet::singleton(p.clone());
        assert!(avar_dual_set(&single, 1.0).unwrap().equal(&single).unwrap());

        let half = CredalSet::singleton(ProbVector::uniform(&s));
        assert!(avar_dual_set(&half, 0.5)
            .unwrap()
            .equal(&CredalSet::simplex(&s))
            .unwrap());

        let dirac = CredalSet::singleton(ProbVector::dirac(&s, 0));
        let d = avar_dual_set(&dirac, 0.5).unwrap();
        assert_eq!(d.vertices().len(), 1);
        assert_eq!(d.vertices()[0].weights(), &[1.0, 0.0]);
    }

    #[test]
    fn dual_set_guard() {
        let s = OutcomeSpace::range(11).unwrap();
        let err = avar_dual_set(&CredalSet::singleton(ProbVector::uniform(&s)), 0.5).unwrap_err();
        assert!(matches!(err, Error::SizeGuard { .. }));
        assert!(avar_dual_evaluate(
            &CredalSet::singleton(ProbVector::uniform(&s)),
            0.0,
            &RandomVariable::constant(&s, 1.0)
        )
        .is_err());
    }
}

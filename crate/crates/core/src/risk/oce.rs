use super::LossSpec;
use crate::credal::CredalSet;
use crate::error::Result;
use crate::space::RandomVariable;

/// Value and smallest minimizer of `s ↦ s + sup_P E_P[l(X - s)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Oce {
    pub value: f64,
    pub minimizer: f64,
}

/// Exact one-step optimized certainty equivalent.
///
/// Each vertex term `g_P(s) = E_P[l(X - s)]` is affine between consecutive
/// kinks `X_j - b` (b a kink of `l`), so the objective is convex
/// piecewise-linear. Its minimum sits at a kink or where two vertex terms
/// cross inside a kink interval; every such point is evaluated.
pub fn oce(set: &CredalSet, x: &RandomVariable, loss: &LossSpec) -> Result<Oce> {
    loss.validate()?;
    set.space().expect_same(x.space(), "oce")?;
    let xs = x.values();

    let mut kinks: Vec<f64> = xs
        .iter()
        .flat_map(|&v| loss.kinks().into_iter().map(move |b| v - b))
        .collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();

    let vertex_terms = |s: f64| -> Vec<f64> {
        set.vertices()
            .iter()
            .map(|p| {
                p.weights()
                    .iter()
                    .zip(xs)
                    .map(|(w, &v)| if *w > 0.0 { w * loss.eval(v - s) } else { 0.0 })
                    .sum()
            })
            .collect()
    };

    let mut candidates = kinks.clone();
    if set.vertices().len() > 1 {
        let at: Vec<Vec<f64>> = kinks.iter().map(|&s| vertex_terms(s)).collect();
        for k in 0..kinks.len().saturating_sub(1) {
            let (a, b) = (kinks[k], kinks[k + 1]);
            let (ga, gb) = (&at[k], &at[k + 1]);
            for i in 0..ga.len() {
                for j in i + 1..ga.len() {
                    let da = ga[i] - ga[j];
                    let db = gb[i] - gb[j];
                    if da * db < 0.0 {
                        let t = da / (da - db);
                        candidates.push(a + t * (b - a));
                    }
                }
            }
        }
    }
    candidates.sort_by(f64::total_cmp);

    let objective = |s: f64| s + vertex_terms(s).into_iter().fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<f64> = candidates.iter().map(|&s| objective(s)).collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * best.abs().max(1.0);
    let k = values
        .iter()
        .position(|&v| v <= best + slack)
        .expect("at least one candidate");
    Ok(Oce {
        value: best,
        minimizer: candidates[k],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{OutcomeSpace, ProbVector};

    fn two() -> OutcomeSpace {
        OutcomeSpace::range(2).unwrap()
    }

    #[test]
    fn constant_payoff() {
        let s = OutcomeSpace::range(3).unwrap();
        let set = CredalSet::simplex(&s);
        let r = oce(&set, &RandomVariable::constant(&s, 2.5), &LossSpec::avar(0.3).unwrap()).unwrap();
        assert_eq!(
            r,
            Oce {
                value: 2.5,
                minimizer: 2.5
            }
        );
    }

    #[test]
    fn flat_minimum_reports_smallest_kink() {
        let s = two();
        let set = CredalSet::singleton(ProbVector::uniform(&s));
        let x = RandomVariable::new(&s, vec![0.0, 10.0]).unwrap();
        let r = oce(&set, &x, &LossSpec::avar(0.5).unwrap()).unwrap();
        assert_eq!(r.value, 10.0);
        assert_eq!(r.minimizer, 0.0);
    }

    #[test]
    fn level_one_is_sublinear_expectation() {
        let s = OutcomeSpace::range(3).unwrap();
        let set = CredalSet::new(vec![
            ProbVector::new(&s, vec![0.2, 0.3, 0.5]).unwrap(),
            ProbVector::new(&s, vec![0.7, 0.1, 0.2]).unwrap(),
        ])
        .unwrap();
        let x = RandomVariable::new(&s, vec![1.0, -4.0, 2.5]).unwrap();
        let r = oce(&set, &x, &LossSpec::avar(1.0).unwrap()).unwrap();
        assert!((r.value - set.sublinear_expectation(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn minimum_between_kinks() {
        // Vertex terms cross at s = 0.5 / 0.95 inside (0, 1).
        let s = OutcomeSpace::range(3).unwrap();
        let set = CredalSet::new(vec![
            ProbVector::dirac(&s, 1),
            ProbVector::new(&s, vec![0.95, 0.0, 0.05]).unwrap(),
        ])
        .unwrap();
        let x = RandomVariable::new(&s, vec![0.0, 1.0, 10.0]).unwrap();
        let r = oce(&set, &x, &LossSpec::avar(0.5).unwrap()).unwrap();
        let s_star = 0.5 / 0.95;
        assert!((r.minimizer - s_star).abs() < 1e-12);
        assert!((r.value - (s_star + 2.0 * (1.0 - s_star))).abs() < 1e-12);
    }
}

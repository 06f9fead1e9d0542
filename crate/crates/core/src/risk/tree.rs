use rayon::prelude::*;

use super::{oce, LossSpec};
use crate::conditional::{pasting, CredalKernel};
use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::space::{OutcomeSpace, RandomVariable};

/// Largest total node count a tree may have, terminal level included.
pub const NODE_LIMIT: u128 = 2_000_000;

/// Non-recombining tree over `Ω₁^t`, `t = 0..T`, with one ambiguity set per
/// non-terminal node.
///
/// Node `k` of level `t` has children `k·|Ω₁| + j` at level `t + 1`, which
/// matches the indexing of [`OutcomeSpace::power`].
#[derive(Clone, Debug)]
pub struct ScenarioTree {
    step: OutcomeSpace,
    horizon: usize,
    levels: Vec<Vec<CredalSet>>,
}

/// Node values by level; `levels[0][0]` is the root, `levels[T]` the payoff.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeValues {
    pub levels: Vec<Vec<f64>>,
}

impl TreeValues {
    pub fn root(&self) -> f64 {
        self.levels[0][0]
    }
}

fn node_count(branching: usize, horizon: usize) -> u128 {
    let b = branching as u128;
    let mut total: u128 = 0;
    let mut width: u128 = 1;
    for _ in 0..=horizon {
        total = total.saturating_add(width);
        width = width.saturating_mul(b);
    }
    total
}

impl ScenarioTree {
    /// `levels[t]` must hold `|Ω₁|^t` sets on `Ω₁`, for `t < T`.
    pub fn new(step: &OutcomeSpace, levels: Vec<Vec<CredalSet>>) -> Result<Self> {
        let horizon = levels.len();
        if horizon == 0 {
            return Err(Error::invalid("scenario tree needs horizon at least 1"));
        }
        Self::guard(step, horizon)?;
        let mut width = 1usize;
        for (t, level) in levels.iter().enumerate() {
            if level.len() != width {
                return Err(Error::dim(format!(
                    "tree level {t} has {} sets, expected {width}",
                    level.len()
                )));
            }
            for set in level {
                step.expect_same(set.space(), "tree node ambiguity")?;
            }
            width *= step.size();
        }
        Ok(ScenarioTree {
            step: step.clone(),
            horizon,
            levels,
        })
    }

    /// The same set at every node.
    pub fn uniform_ambiguity(set: &CredalSet, horizon: usize) -> Result<Self> {
        let step = set.space().clone();
        if horizon == 0 {
            return Err(Error::invalid("scenario tree needs horizon at least 1"));
        }
        Self::guard(&step, horizon)?;
        let levels = (0..horizon)
            .map(|t| vec![set.clone(); step.size().pow(t as u32)])
            .collect();
        Self::new(&step, levels)
    }

    fn guard(step: &OutcomeSpace, horizon: usize) -> Result<()> {
        let count = node_count(step.size(), horizon);
        if count > NODE_LIMIT {
            return Err(Error::SizeGuard {
                what: "scenario tree nodes",
                count,
                limit: NODE_LIMIT,
            });
        }
        Ok(())
    }

    pub fn step(&self) -> &OutcomeSpace {
        &self.step
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn levels(&self) -> &[Vec<CredalSet>] {
        &self.levels
    }

    pub fn node_count(&self) -> u128 {
        node_count(self.step.size(), self.horizon)
    }

    /// `Ω₁^T`.
    pub fn terminal_space(&self) -> OutcomeSpace {
        OutcomeSpace::power(&self.step, self.horizon)
    }

    /// Path of step labels leading to node `k` of level `t`; the root is `"root"`.
    pub fn node_label(&self, t: usize, k: usize) -> String {
        if t == 0 {
            return "root".to_string();
        }
        let b = self.step.size();
        let mut parts = Vec::with_capacity(t);
        let mut k = k;
        for _ in 0..t {
            parts.push(self.step.label(k % b));
            k /= b;
        }
        parts.reverse();
        parts.join(",")
    }

    /// `𝒫_{0,T} = 𝒫_0 ⊗ 𝒫_1 ⊗ ⋯ ⊗ 𝒫_{T-1}` on `Ω₁^T`.
    pub fn path_set(&self) -> Result<CredalSet> {
        let mut acc = self.levels[0][0].clone();
        for t in 1..self.horizon {
            let nodes = OutcomeSpace::power(&self.step, t);
            let kernel = CredalKernel::new(&nodes, self.levels[t].clone())?;
            acc = pasting(&acc, &kernel)?;
        }
        Ok(acc)
    }

    fn backward<F>(&self, x: &RandomVariable, node: F) -> Result<TreeValues>
    where
        F: Fn(&CredalSet, &RandomVariable) -> Result<f64> + Sync,
    {
        self.terminal_space().expect_same(x.space(), "tree payoff")?;
        let b = self.step.size();
        let mut levels = vec![Vec::new(); self.horizon + 1];
        levels[self.horizon] = x.values().to_vec();
        for t in (0..self.horizon).rev() {
            let children = &levels[t + 1];
            let values = self.levels[t]
                .par_iter()
                .enumerate()
                .map(|(k, set)| {
                    let child = RandomVariable::new(&self.step, children[k * b..(k + 1) * b].to_vec())?;
                    node(set, &child)
                })
                .collect::<Result<Vec<f64>>>()?;
            levels[t] = values;
        }
        Ok(TreeValues { levels })
    }
}

/// Backward induction with the one-step OCE at every node.
pub fn compose_risk(tree: &ScenarioTree, x: &RandomVariable, loss: &LossSpec) -> Result<TreeValues> {
    loss.validate()?;
    tree.backward(x, |set, child| Ok(oce(set, child, loss)?.value))
}

/// Backward induction with the sublinear expectation at every node.
pub fn compose_sublinear(tree: &ScenarioTree, x: &RandomVariable) -> Result<TreeValues> {
    tree.backward(x, |set, child| set.sublinear_expectation(child))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ProbVector;

    fn updown() -> OutcomeSpace {
        OutcomeSpace::new(["up", "down"]).unwrap()
    }

    #[test]
    fn tail_indicator_two_levels() {
        let s = updown();
        let tree = ScenarioTree::uniform_ambiguity(&CredalSet::singleton(ProbVector::uniform(&s)), 2).unwrap();
        let x = RandomVariable::indicator(&tree.terminal_space(), &[0]);
        let v = compose_risk(&tree, &x, &LossSpec::avar(0.5).unwrap()).unwrap();
        assert_eq!(v.root(), 1.0);
        assert_eq!(v.levels[1], vec![1.0, 0.0]);
        assert_eq!(tree.node_label(2, 0), "up,up");
        assert_eq!(tree.node_label(1, 1), "down");
    }

    #[test]
    fn level_one_is_linear_expectation() {
        let s = updown();
        let p = ProbVector::new(&s, vec![0.3, 0.7]).unwrap();
        let tree = ScenarioTree::uniform_ambiguity(&CredalSet::singleton(p.clone()), 3).unwrap();
        let terminal = tree.terminal_space();
        let x = RandomVariable::new(&terminal, (0..8).map(|i| (i * i) as f64 - 3.0).collect()).unwrap();
        let direct: f64 = (0..8)
            .map(|i: usize| {
                let w: f64 = (0..3).map(|bit| p[(i >> (2 - bit)) & 1]).product();
                w * x[i]
            })
            .sum();
        let risk = compose_risk(&tree, &x, &LossSpec::avar(1.0).unwrap()).unwrap();
        let sub = compose_sublinear(&tree, &x).unwrap();
        assert!((risk.root() - direct).abs() < 1e-12);
        assert!((sub.root() - direct).abs() < 1e-12);
    }

    #[test]
    fn simplices_give_max() {
        let s = updown();
        let tree = ScenarioTree::uniform_ambiguity(&CredalSet::simplex(&s), 2).unwrap();
        let x = RandomVariable::new(&tree.terminal_space(), vec![1.0, -2.0, 5.0, 0.5]).unwrap();
        assert_eq!(compose_sublinear(&tree, &x).unwrap().root(), 5.0);
    }

    #[test]
    fn sublinear_root_matches_path_set() {
        let s = updown();
        let a = CredalSet::new(vec![
            ProbVector::new(&s, vec![0.2, 0.8]).unwrap(),
            ProbVector::new(&s, vec![0.6, 0.4]).unwrap(),
        ])
        .unwrap();
        let b = CredalSet::singleton(ProbVector::new(&s, vec![0.9, 0.1]).unwrap());
        let tree = ScenarioTree::new(&s, vec![vec![a.clone()], vec![b, a]]).unwrap();
        let x = RandomVariable::new(&tree.terminal_space(), vec![3.0, -1.0, 0.0, 2.0]).unwrap();
        let root = compose_sublinear(&tree, &x).unwrap().root();
        let path = tree.path_set().unwrap().sublinear_expectation(&x).unwrap();
        assert!((root - path).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let s = updown();
        let set = CredalSet::simplex(&s);
        assert!(ScenarioTree::new(&s, vec![]).is_err());
        assert!(ScenarioTree::new(&s, vec![vec![set.clone()], vec![set.clone()]]).is_err());
        let tree = ScenarioTree::uniform_ambiguity(&set, 2).unwrap();
        assert_eq!(tree.node_count(), 7);
        let wrong = RandomVariable::constant(&s, 1.0);
        assert!(compose_sublinear(&tree, &wrong).is_err());
        let big = OutcomeSpace::range(10).unwrap();
        let err = ScenarioTree::uniform_ambiguity(&CredalSet::simplex(&big), 7).unwrap_err();
        assert!(matches!(err, Error::SizeGuard { .. }));
    }
}

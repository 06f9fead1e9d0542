//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Sized for desk-scale problems (tens of rows, a few hundred columns). All
//! variables are nonnegative; free variables must be split by the caller.

use crate::error::{Error, Result};

/// Phase-one objective above this value means the constraints are infeasible.
pub const FEAS_TOL: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `minimize c·x` subject to linear rows and `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct Problem {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    Optimal {
        x: Vec<f64>,
        objective: f64,
    },
    /// Carries the residual phase-one objective.
    Infeasible {
        residual: f64,
    },
    Unbounded,
}

impl Problem {
    pub fn new(num_vars: usize) -> Self {
        Problem {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn minimize(&mut self, objective: Vec<f64>) -> &mut Self {
        assert_eq!(objective.len(), self.num_vars);
        self.objective = objective;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push(Row { coeffs, relation, rhs });
        self
    }

    pub fn solve(&self) -> Result<Solution> {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    num_vars: usize,
    cols: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(p: &Problem) -> Self {
        let m = p.rows.len();
        let n = p.num_vars;
        let mut rows: Vec<Row> = p.rows.clone();
        for r in rows.iter_mut() {
            if r.rhs < 0.0 {
                r.rhs = -r.rhs;
                r.coeffs.iter_mut().for_each(|c| *c = -*c);
                r.relation = match r.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let slacks = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let artificials = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let first_artificial = n + slacks;
        let cols = first_artificial + artificials;

        let mut t = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (n, first_artificial);
        for (i, r) in rows.iter().enumerate() {
            t[i][..n].copy_from_slice(&r.coeffs);
            t[i][cols] = r.rhs;
            match r.relation {
                Relation::Le => {
                    t[i][s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    t[i][s] = -1.0;
                    s += 1;
                    t[i][a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    t[i][a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        Tableau {
            t,
            basis,
            num_vars: n,
            cols,
            first_artificial,
        }
    }

    fn run(mut self, objective: &[f64]) -> Result<Solution> {
        if self.first_artificial < self.cols {
            let mut phase_one = vec![0.0; self.cols];
            phase_one[self.first_artificial..].iter_mut().for_each(|c| *c = 1.0);
            let value = self
                .optimize(&phase_one, self.cols)?
                .ok_or_else(|| Error::Lp("phase one reported unbounded".to_string()))?;
            if value > FEAS_TOL {
                return Ok(Solution::Infeasible { residual: value });
            }
            self.drive_out_artificials();
        }
        let mut cost = vec![0.0; self.cols];
        cost[..self.num_vars].copy_from_slice(objective);
        match self.optimize(&cost, self.first_artificial)? {
            None => Ok(Solution::Unbounded),
            Some(value) => {
                let mut x = vec![0.0; self.num_vars];
                for (i, &b) in self.basis.iter().enumerate() {
                    if b < self.num_vars {
                        x[b] = self.t[i][self.cols].max(0.0);
                    }
                }
                Ok(Solution::Optimal { x, objective: value })
            }
        }
    }

    /// Minimizes `cost` over columns `< allowed`; `None` when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<Option<f64>> {
        let rhs = self.cols;
        for _ in 0..MAX_PIVOTS {
            let reduced = |j: usize, t: &Vec<Vec<f64>>, basis: &[usize]| -> f64 {
                cost[j] - basis.iter().enumerate().map(|(i, &b)| cost[b] * t[i][j]).sum::<f64>()
            };
            // Bland: lowest-index improving column.
            let entering = (0..allowed)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| reduced(j, &self.t, &self.basis) < -COST_EPS);
            let Some(j) = entering else {
                let value = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| cost[b] * self.t[i][rhs])
                    .sum();
                return Ok(Some(value));
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][j];
                if a > PIVOT_EPS {
                    let ratio = self.t[i][rhs] / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k]) {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((i, _)) = leaving else {
                return Ok(None);
            };
            self.pivot(i, j);
        }
        Err(Error::Lp(format!("no convergence after {MAX_PIVOTS} pivots")))
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        self.t[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Pivots zero-level artificials out of the basis; drops redundant rows.
    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .filter(|j| !self.basis.contains(j))
                    .max_by(|&a, &b| self.t[i][a].abs().total_cmp(&self.t[i][b].abs()))
                    .filter(|&j| self.t[i][j].abs() > 1e-9);
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.t.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(s: Solution) -> (Vec<f64>, f64) {
        match s {
            Solution::Optimal { x, objective } => (x, objective),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut p = Problem::new(2);
        p.minimize(vec![-3.0, -5.0])
            .constrain(vec![1.0, 0.0], Relation::Le, 4.0)
            .constrain(vec![0.0, 2.0], Relation::Le, 12.0)
            .constrain(vec![3.0, 2.0], Relation::Le, 18.0);
        let (x, v) = optimal(p.solve().unwrap());
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
        assert!((v + 36.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y + 3z, x + y + z = 1, y + z ≥ 0.5
        let mut p = Problem::new(3);
        p.minimize(vec![1.0, 2.0, 3.0])
            .constrain(vec![1.0, 1.0, 1.0], Relation::Eq, 1.0)
            .constrain(vec![0.0, 1.0, 1.0], Relation::Ge, 0.5);
        let (x, v) = optimal(p.solve().unwrap());
        assert!((v - 1.5).abs() < 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut p = Problem::new(1);
        p.constrain(vec![1.0], Relation::Ge, 2.0)
            .constrain(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(p.solve().unwrap(), Solution::Infeasible { .. }));

        let mut p = Problem::new(2);
        p.minimize(vec![-1.0, 0.0])
            .constrain(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(p.solve().unwrap(), Solution::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        // The last row is the sum of the first two.
        let mut p = Problem::new(2);
        p.minimize(vec![1.0, 0.0])
            .constrain(vec![0.2, 0.6], Relation::Eq, 0.4)
            .constrain(vec![0.8, 0.4], Relation::Eq, 0.6)
            .constrain(vec![1.0, 1.0], Relation::Eq, 1.0);
        let (x, _) = optimal(p.solve().unwrap());
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_is_normalized() {
        // -x ≤ -3  ⇔  x ≥ 3
        let mut p = Problem::new(1);
        p.minimize(vec![1.0]).constrain(vec![-1.0], Relation::Le, -3.0);
        let (x, _) = optimal(p.solve().unwrap());
        assert!((x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic Beale cycling example; Bland's rule must terminate.
        let mut p = Problem::new(4);
        p.minimize(vec![-0.75, 150.0, -0.02, 6.0])
            .constrain(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .constrain(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .constrain(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let (_, v) = optimal(p.solve().unwrap());
        assert!((v + 0.05).abs() < 1e-9);
    }
}

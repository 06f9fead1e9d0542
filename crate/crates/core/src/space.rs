//! Finite outcome spaces, payoffs, probability vectors and kernels.
//!
//! Every object is immutable after construction. Product spaces are indexed
//! row-major: the joint index of `(u, v)` is `u * |V| + v`.

use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Weights below this (in absolute value) are treated as rounding noise.
pub const NEG_WEIGHT_TOL: f64 = 1e-12;
/// Allowed deviation of the input mass from one before renormalization.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Debug, PartialEq, Eq)]
enum Repr {
    Finite(Vec<String>),
    Product(OutcomeSpace, OutcomeSpace),
}

/// A finite, label-ordered outcome space, possibly a product `U × V`.
#[derive(Clone)]
pub struct OutcomeSpace {
    repr: Arc<Repr>,
    size: usize,
}

impl OutcomeSpace {
    /// Builds a space from pairwise distinct labels.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::invalid("outcome space needs at least one label"));
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::invalid(format!("duplicate outcome label `{l}`")));
            }
        }
        let size = labels.len();
        Ok(OutcomeSpace {
            repr: Arc::new(Repr::Finite(labels)),
            size,
        })
    }

    /// Space with labels `0, 1, …, n-1`.
    pub fn range(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn product(u: &OutcomeSpace, v: &OutcomeSpace) -> Self {
        OutcomeSpace {
            size: u.size * v.size,
            repr: Arc::new(Repr::Product(u.clone(), v.clone())),
        }
    }

    /// `base^power` as nested products `((base × base) × base) …`.
    pub fn power(base: &OutcomeSpace, power: usize) -> Self {
        assert!(power >= 1, "power must be at least one");
        let mut acc = base.clone();
        for _ in 1..power {
            acc = OutcomeSpace::product(&acc, base);
        }
        acc
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn factors(&self) -> Option<(&OutcomeSpace, &OutcomeSpace)> {
        match &*self.repr {
            Repr::Product(u, v) => Some((u, v)),
            Repr::Finite(_) => None,
        }
    }

    pub fn is_product(&self) -> bool {
        self.factors().is_some()
    }

    /// Human-readable label; product labels join the factor labels with `,`.
    pub fn label(&self, index: usize) -> String {
        match &*self.repr {
            Repr::Finite(labels) => labels[index].clone(),
            Repr::Product(u, v) => {
                let (i, j) = (index / v.size, index % v.size);
                format!("{},{}", u.label(i), v.label(j))
            }
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.size).map(|i| self.label(i)).collect()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        match &*self.repr {
            Repr::Finite(labels) => labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string())),
            Repr::Product(..) => (0..self.size)
                .find(|&i| self.label(i) == label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string())),
        }
    }

    pub(crate) fn expect_same(&self, other: &OutcomeSpace, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::dim(format!(
                "{what}: space of size {} vs space of size {}",
                self.size, other.size
            )))
        }
    }

    pub(crate) fn expect_factors(&self, what: &str) -> Result<(&OutcomeSpace, &OutcomeSpace)> {
        self.factors()
            .ok_or_else(|| Error::dim(format!("{what}: expected a product space")))
    }
}

impl PartialEq for OutcomeSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.repr, &other.repr) || (self.size == other.size && self.repr == other.repr)
    }
}

impl Eq for OutcomeSpace {}

impl fmt::Debug for OutcomeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.repr {
            Repr::Finite(labels) => write!(f, "{labels:?}"),
            Repr::Product(u, v) => write!(f, "({u:?} x {v:?})"),
        }
    }
}

/// A bounded payoff: one finite value per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomVariable {
    space: OutcomeSpace,
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(space: &OutcomeSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::dim(format!(
                "random variable has {} values for a space of size {}",
                values.len(),
                space.size()
            )));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "random variable value at `{}` is not finite",
                space.label(i)
            )));
        }
        Ok(RandomVariable {
            space: space.clone(),
            values,
        })
    }

    pub fn constant(space: &OutcomeSpace, c: f64) -> Self {
        RandomVariable {
            space: space.clone(),
            values: vec![c; space.size()],
        }
    }

    pub fn indicator(space: &OutcomeSpace, indices: &[usize]) -> Self {
        let mut values = vec![0.0; space.size()];
        for &i in indices {
            values[i] = 1.0;
        }
        RandomVariable {
            space: space.clone(),
            values,
        }
    }

    /// Builds `(u, v) ↦ f(u, v)` on a product space.
    pub fn from_fn2(space: &OutcomeSpace, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let (_, v) = space.expect_factors("from_fn2")?;
        let nv = v.size();
        let values = (0..space.size()).map(|k| f(k / nv, k % nv)).collect();
        Self::new(space, values)
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(&self.space, self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn scale(&self, a: f64) -> Self {
        RandomVariable {
            space: self.space.clone(),
            values: self.values.iter().map(|x| a * x).collect(),
        }
    }

    pub fn shift(&self, c: f64) -> Self {
        RandomVariable {
            space: self.space.clone(),
            values: self.values.iter().map(|x| x + c).collect(),
        }
    }

    pub fn add(&self, other: &RandomVariable) -> Result<Self> {
        self.space.expect_same(&other.space, "add")?;
        Ok(RandomVariable {
            space: self.space.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// `v ↦ X(u, v)` for a payoff on `U × V`.
    pub fn slice(&self, u: usize) -> Result<RandomVariable> {
        let (us, vs) = self.space.expect_factors("slice")?;
        if u >= us.size() {
            return Err(Error::UnknownLabel(format!("index {u}")));
        }
        let nv = vs.size();
        Ok(RandomVariable {
            space: vs.clone(),
            values: self.values[u * nv..(u + 1) * nv].to_vec(),
        })
    }

    pub fn slice_label(&self, u: &str) -> Result<RandomVariable> {
        let (us, _) = self.space.expect_factors("slice")?;
        let i = us.index_of(u)?;
        self.slice(i)
    }

    /// Re-indexes a payoff on `U × V` as a payoff on `V × U`.
    pub fn transpose(&self) -> Result<RandomVariable> {
        let (us, vs) = self.space.expect_factors("transpose")?;
        let swapped = OutcomeSpace::product(vs, us);
        let (nu, nv) = (us.size(), vs.size());
        let values = (0..nu * nv)
            .map(|k| {
                let (v, u) = (k / nu, k % nu);
                self.values[u * nv + v]
            })
            .collect();
        Ok(RandomVariable { space: swapped, values })
    }

    /// Affine rescale onto `[0, 1]`; constant payoffs map to zero.
    pub fn to_unit_range(&self) -> RandomVariable {
        let (lo, hi) = (self.min(), self.max());
        let width = hi - lo;
        let values = if width > 0.0 {
            self.values.iter().map(|x| (x - lo) / width).collect()
        } else {
            vec![0.0; self.values.len()]
        };
        RandomVariable {
            space: self.space.clone(),
            values,
        }
    }
}

impl Index<usize> for RandomVariable {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// A probability mass function on a finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector {
    space: OutcomeSpace,
    weights: Vec<f64>,
}

impl ProbVector {
    /// Validates and renormalizes `weights`.
    ///
    /// Entries in `[-1e-12, 0)` are clamped to zero; anything more negative is
    /// rejected, as is a total mass farther than `1e-9` from one.
    pub fn new(space: &OutcomeSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.size() {
            return Err(Error::dim(format!(
                "probability vector has {} weights for a space of size {}",
                weights.len(),
                space.size()
            )));
        }
        let mut weights = weights;
        for (i, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::invalid(format!("weight at `{}` is not finite", space.label(i))));
            }
            if *w < -NEG_WEIGHT_TOL {
                return Err(Error::invalid(format!("negative weight {} at `{}`", w, space.label(i))));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!(
                "weights sum {total} exceeds tolerance {MASS_TOL}"
            )));
        }
        Ok(Self::normalized(space, weights))
    }

    /// Renormalizes without validation; the input must already be a near-probability.
    pub(crate) fn normalized(space: &OutcomeSpace, mut weights: Vec<f64>) -> Self {
        for w in weights.iter_mut() {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if total != 1.0 && total > 0.0 {
            for w in weights.iter_mut() {
                *w /= total;
            }
            // Absorb the last rounding residue into the largest weight.
            for _ in 0..4 {
                let s: f64 = weights.iter().sum();
                if s == 1.0 {
                    break;
                }
                let (imax, _) = weights
                    .iter()
                    .enumerate()
                    .fold((0, f64::MIN), |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc });
                weights[imax] += 1.0 - s;
            }
        }
        ProbVector {
            space: space.clone(),
            weights,
        }
    }

    pub fn dirac(space: &OutcomeSpace, index: usize) -> Self {
        let mut weights = vec![0.0; space.size()];
        weights[index] = 1.0;
        ProbVector {
            space: space.clone(),
            weights,
        }
    }

    pub fn uniform(space: &OutcomeSpace) -> Self {
        let n = space.size();
        Self::normalized(space, vec![1.0 / n as f64; n])
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ_ω P(ω) X(ω)`.
    pub fn expectation(&self, x: &RandomVariable) -> Result<f64> {
        self.space.expect_same(x.space(), "expectation")?;
        Ok(self.dot(x.values()))
    }

    pub(crate) fn dot(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(p, x)| p * x).sum()
    }

    /// Largest coordinate difference to another vector on the same space.
    pub fn distance_inf(&self, other: &ProbVector) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Convex combination `Σ λ_i P_i`.
    pub fn mixture(points: &[&ProbVector], coefficients: &[f64]) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::invalid("mixture of zero points"))?;
        if points.len() != coefficients.len() {
            return Err(Error::dim("mixture coefficient count"));
        }
        let mut weights = vec![0.0; first.len()];
        for (p, &c) in points.iter().zip(coefficients) {
            first.space.expect_same(&p.space, "mixture")?;
            for (w, pw) in weights.iter_mut().zip(&p.weights) {
                *w += c * pw;
            }
        }
        Self::new(&first.space, weights)
    }

    /// `Q ⊗ R` on `U × V`.
    pub fn product(&self, kernel: &Kernel) -> Result<ProbVector> {
        self.space.expect_same(kernel.u_space(), "product")?;
        let joint = OutcomeSpace::product(kernel.u_space(), kernel.v_space());
        let mut weights = Vec::with_capacity(joint.size());
        for (q, row) in self.weights.iter().zip(kernel.rows()) {
            weights.extend(row.weights.iter().map(|r| q * r));
        }
        Ok(Self::normalized(&joint, weights))
    }

    /// First marginal on `U` of a measure on `U × V`.
    pub fn marginal(&self) -> Result<ProbVector> {
        let (us, vs) = self.space.expect_factors("marginal")?;
        let nv = vs.size();
        let weights = self.weights.chunks(nv).map(|row| row.iter().sum()).collect();
        Ok(Self::normalized(us, weights))
    }

    /// Splits a joint measure into its `U`-marginal and a conditional kernel.
    ///
    /// Rows with zero marginal mass get the uniform law on `V`.
    pub fn disintegrate(&self) -> Result<(ProbVector, Kernel)> {
        let (us, vs) = self.space.expect_factors("disintegrate")?;
        let nv = vs.size();
        let q = self.marginal()?;
        let rows = self
            .weights
            .chunks(nv)
            .map(|row| {
                let mass: f64 = row.iter().sum();
                if mass > 0.0 {
                    Self::normalized(vs, row.iter().map(|w| w / mass).collect())
                } else {
                    ProbVector::uniform(vs)
                }
            })
            .collect();
        Ok((q, Kernel::new(us, vs, rows)?))
    }

    /// Re-indexes a measure on `U × V` as the image measure on `V × U`.
    pub fn transpose(&self) -> Result<ProbVector> {
        let (us, vs) = self.space.expect_factors("transpose")?;
        let swapped = OutcomeSpace::product(vs, us);
        let (nu, nv) = (us.size(), vs.size());
        let weights = (0..nu * nv)
            .map(|k| {
                let (v, u) = (k / nu, k % nu);
                self.weights[u * nv + v]
            })
            .collect();
        Ok(ProbVector {
            space: swapped,
            weights,
        })
    }
}

impl Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

/// A stochastic kernel `U → 𝔓(V)`, stored as one row per `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    u_space: OutcomeSpace,
    v_space: OutcomeSpace,
    rows: Vec<ProbVector>,
}

impl Kernel {
    pub fn new(u_space: &OutcomeSpace, v_space: &OutcomeSpace, rows: Vec<ProbVector>) -> Result<Self> {
        if rows.len() != u_space.size() {
            return Err(Error::dim(format!(
                "kernel has {} rows for a space of size {}",
                rows.len(),
                u_space.size()
            )));
        }
        for r in &rows {
            v_space.expect_same(r.space(), "kernel row")?;
        }
        Ok(Kernel {
            u_space: u_space.clone(),
            v_space: v_space.clone(),
            rows,
        })
    }

    /// The same law on `V` for every `u`.
    pub fn constant(u_space: &OutcomeSpace, row: &ProbVector) -> Self {
        Kernel {
            u_space: u_space.clone(),
            v_space: row.space().clone(),
            rows: vec![row.clone(); u_space.size()],
        }
    }

    pub fn u_space(&self) -> &OutcomeSpace {
        &self.u_space
    }

    pub fn v_space(&self) -> &OutcomeSpace {
        &self.v_space
    }

    pub fn rows(&self) -> &[ProbVector] {
        &self.rows
    }

    pub fn row(&self, u: usize) -> &ProbVector {
        &self.rows[u]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> OutcomeSpace {
        OutcomeSpace::new(["0", "1"]).unwrap()
    }

    fn pv(s: &OutcomeSpace, w: &[f64]) -> ProbVector {
        ProbVector::new(s, w.to_vec()).unwrap()
    }

    #[test]
    fn labels_must_be_distinct_and_nonempty() {
        assert!(OutcomeSpace::new(["a", "a"]).is_err());
        assert!(OutcomeSpace::new(Vec::<String>::new()).is_err());
        let s = OutcomeSpace::new(["a", "b"]).unwrap();
        assert_eq!(s.index_of("b").unwrap(), 1);
        assert!(matches!(s.index_of("c"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn product_indexing_is_row_major() {
        let u = OutcomeSpace::new(["a", "b"]).unwrap();
        let v = OutcomeSpace::new(["x", "y", "z"]).unwrap();
        let uv = OutcomeSpace::product(&u, &v);
        assert_eq!(uv.size(), 6);
        assert_eq!(uv.label(4), "b,y");
        assert_eq!(uv.index_of("a,z").unwrap(), 2);
        assert_eq!(OutcomeSpace::product(&u, &v), uv);
        assert_ne!(OutcomeSpace::product(&v, &u), uv);
    }

    #[test]
    fn expectation_examples() {
        let s = two();
        let x = RandomVariable::new(&s, vec![3.0, -1.0]).unwrap();
        assert_eq!(pv(&s, &[1.0, 0.0]).expectation(&x).unwrap(), 3.0);
        let x = RandomVariable::new(&s, vec![2.0, 4.0]).unwrap();
        assert_eq!(pv(&s, &[0.5, 0.5]).expectation(&x).unwrap(), 3.0);
        let x = RandomVariable::new(&s, vec![1.0, 0.0]).unwrap();
        assert!((pv(&s, &[0.3, 0.7]).expectation(&x).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_space_mismatch() {
        let s = two();
        let t = OutcomeSpace::range(3).unwrap();
        let x = RandomVariable::constant(&t, 1.0);
        assert!(matches!(
            ProbVector::uniform(&s).expectation(&x),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn probability_validation() {
        let s = two();
        assert!(ProbVector::new(&s, vec![-0.1, 1.1]).is_err());
        assert!(ProbVector::new(&s, vec![0.5, 0.52]).is_err());
        let p = ProbVector::new(&s, vec![-1e-13, 1.0]).unwrap();
        assert_eq!(p.weights(), &[0.0, 1.0]);
        let p = ProbVector::new(&s, vec![0.5 + 4e-10, 0.5]).unwrap();
        assert_eq!(p.weights().iter().sum::<f64>(), 1.0);
        assert!(ProbVector::new(&s, vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn random_variable_rejects_non_finite() {
        assert!(RandomVariable::new(&two(), vec![f64::INFINITY, 0.0]).is_err());
        assert!(RandomVariable::new(&two(), vec![0.0]).is_err());
    }

    #[test]
    fn product_examples() {
        let s = two();
        let k = Kernel::new(&s, &s, vec![ProbVector::dirac(&s, 0), ProbVector::dirac(&s, 1)]).unwrap();
        assert_eq!(
            pv(&s, &[0.5, 0.5]).product(&k).unwrap().weights(),
            &[0.5, 0.0, 0.0, 0.5]
        );

        let k = Kernel::constant(&s, &ProbVector::dirac(&s, 1));
        assert_eq!(
            ProbVector::dirac(&s, 0).product(&k).unwrap().weights(),
            &[0.0, 1.0, 0.0, 0.0]
        );

        let k = Kernel::constant(&s, &ProbVector::uniform(&s));
        let p = pv(&s, &[0.3, 0.7]).product(&k).unwrap();
        for (a, b) in p.weights().iter().zip([0.15, 0.15, 0.35, 0.35]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn disintegrate_examples() {
        let s = two();
        let uv = OutcomeSpace::product(&s, &s);
        let (q, r) = pv(&uv, &[0.5, 0.0, 0.0, 0.5]).disintegrate().unwrap();
        assert_eq!(q.weights(), &[0.5, 0.5]);
        assert_eq!(r.row(0).weights(), &[1.0, 0.0]);
        assert_eq!(r.row(1).weights(), &[0.0, 1.0]);

        let (q, r) = ProbVector::dirac(&uv, 0).disintegrate().unwrap();
        assert_eq!(q.weights(), &[1.0, 0.0]);
        assert_eq!(r.row(0).weights(), &[1.0, 0.0]);
        assert_eq!(r.row(1).weights(), &[0.5, 0.5]);

        let (q, r) = pv(&uv, &[0.15, 0.15, 0.35, 0.35]).disintegrate().unwrap();
        assert!((q[0] - 0.3).abs() < 1e-15 && (q[1] - 0.7).abs() < 1e-15);
        for row in r.rows() {
            assert!((row[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn slice_examples() {
        let s = two();
        let uv = OutcomeSpace::product(&s, &s);
        let x = RandomVariable::indicator(&uv, &[0]);
        assert_eq!(x.slice(0).unwrap().values(), &[1.0, 0.0]);
        assert_eq!(x.slice_label("0").unwrap().values(), &[1.0, 0.0]);
        let c = RandomVariable::constant(&uv, 2.5);
        assert_eq!(c.slice(1).unwrap().values(), &[2.5, 2.5]);
        let x = RandomVariable::indicator(&uv, &[3]);
        assert_eq!(x.slice(0).unwrap().values(), &[0.0, 0.0]);
        assert!(matches!(x.slice_label("7"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn transpose_swaps_coordinates() {
        let u = OutcomeSpace::range(2).unwrap();
        let v = OutcomeSpace::range(3).unwrap();
        let uv = OutcomeSpace::product(&u, &v);
        let x = RandomVariable::from_fn2(&uv, |i, j| (10 * i + j) as f64).unwrap();
        let t = x.transpose().unwrap();
        assert_eq!(t.values(), &[0.0, 10.0, 1.0, 11.0, 2.0, 12.0]);
        assert_eq!(t.transpose().unwrap(), x);
    }
}

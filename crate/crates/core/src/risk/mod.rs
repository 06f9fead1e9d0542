//! Robust optimized certainty equivalents and their multi-period composition.
//!
//! One step: `R(X) = inf_s ( s + sup_{P ∈ S} E_P[l(X - s)] )` for a convex
//! nondecreasing piecewise-linear loss `l`. With `l(x) = x⁺/λ` this is the
//! robust average value at risk, whose dual set is every probability with
//! density at most `1/λ` against some member of `S`.

mod dual;
mod loss;
mod oce;
mod tree;

pub use dual::{avar_dual_evaluate, avar_dual_set, greedy_dual, DUAL_SET_MAX_OUTCOMES};
pub use loss::LossSpec;
pub use oce::{oce, Oce};
pub use tree::{compose_risk, compose_sublinear, ScenarioTree, TreeValues, NODE_LIMIT};

use crate::error::{Error, Result};

/// A convex, nondecreasing, piecewise-linear loss with `l(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum LossSpec {
    /// `l(x) = max(x, 0) / λ`.
    Avar { lambda: f64 },
    /// Slope `slopes[k]` between `breakpoints[k-1]` and `breakpoints[k]`;
    /// `slopes` has one more entry than `breakpoints`.
    PiecewiseLinear { breakpoints: Vec<f64>, slopes: Vec<f64> },
}

impl LossSpec {
    /// `λ ∈ (0, 1]`; `λ = 1` collapses the OCE to the plain sublinear expectation.
    pub fn avar(lambda: f64) -> Result<Self> {
        let spec = LossSpec::Avar { lambda };
        spec.validate()?;
        Ok(spec)
    }

    pub fn piecewise_linear(breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let spec = LossSpec::PiecewiseLinear { breakpoints, slopes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LossSpec::Avar { lambda } => {
                if !(lambda.is_finite() && *lambda > 0.0 && *lambda <= 1.0) {
                    return Err(Error::invalid(format!("avar level {lambda} outside (0, 1]")));
                }
            }
            LossSpec::PiecewiseLinear { breakpoints, slopes } => {
                if slopes.len() != breakpoints.len() + 1 {
                    return Err(Error::invalid("loss needs exactly one more slope than breakpoints"));
                }
                if breakpoints.iter().chain(slopes).any(|v| !v.is_finite()) {
                    return Err(Error::invalid("loss parameters must be finite"));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid("loss breakpoints must be strictly increasing"));
                }
                if slopes.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::invalid("loss slopes must be nondecreasing (convexity)"));
                }
                let (first, last) = (slopes[0], slopes[slopes.len() - 1]);
                if !(0.0..=1.0).contains(&first) {
                    return Err(Error::invalid(format!(
                        "leftmost loss slope {first} must lie in [0, 1] for the infimum to be attained"
                    )));
                }
                if last <= 1.0 {
                    return Err(Error::invalid(format!("largest loss slope {last} must exceed 1")));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LossSpec::Avar { lambda } => x.max(0.0) / lambda,
            LossSpec::PiecewiseLinear { breakpoints, slopes } => {
                // ∫_0^x slope(t) dt, piece by piece.
                let (lo, hi, sign) = if x >= 0.0 { (0.0, x, 1.0) } else { (x, 0.0, -1.0) };
                let mut total = 0.0;
                for (k, slope) in slopes.iter().enumerate() {
                    let a = if k == 0 { f64::NEG_INFINITY } else { breakpoints[k - 1] };
                    let b = breakpoints.get(k).copied().unwrap_or(f64::INFINITY);
                    let width = hi.min(b) - lo.max(a);
                    if width > 0.0 {
                        total += slope * width;
                    }
                }
                sign * total
            }
        }
    }

    /// Kinks of `l`.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            LossSpec::Avar { .. } => vec![0.0],
            LossSpec::PiecewiseLinear { breakpoints, .. } => breakpoints.clone(),
        }
    }

    pub fn avar_level(&self) -> Option<f64> {
        match self {
            LossSpec::Avar { lambda } => Some(*lambda),
            LossSpec::PiecewiseLinear { .. } => None,
        }
    }

    /// `λ = 1`: admitted for cross-checks, outside the open interval of
    /// genuine AVaR levels.
    pub fn is_boundary(&self) -> bool {
        matches!(self, LossSpec::Avar { lambda } if *lambda == 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avar_loss_shape() {
        let l = LossSpec::avar(0.25).unwrap();
        assert_eq!(l.eval(-3.0), 0.0);
        assert_eq!(l.eval(2.0), 8.0);
        assert!(LossSpec::avar(0.0).is_err());
        assert!(LossSpec::avar(1.5).is_err());
        assert!(LossSpec::avar(1.0).unwrap().is_boundary());
    }

    #[test]
    fn piecewise_loss_integrates_slopes() {
        let l = LossSpec::piecewise_linear(vec![-1.0, 2.0], vec![0.5, 1.0, 3.0]).unwrap();
        assert_eq!(l.eval(0.0), 0.0);
        assert_eq!(l.eval(1.0), 1.0);
        assert_eq!(l.eval(3.0), 2.0 + 3.0);
        assert_eq!(l.eval(-1.0), -1.0);
        assert_eq!(l.eval(-3.0), -1.0 - 1.0);
    }

    #[test]
    fn piecewise_loss_validation() {
        assert!(LossSpec::piecewise_linear(vec![0.0], vec![0.0]).is_err());
        assert!(LossSpec::piecewise_linear(vec![0.0], vec![2.0, 1.0]).is_err());
        assert!(LossSpec::piecewise_linear(vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(LossSpec::piecewise_linear(vec![0.0], vec![-0.5, 2.0]).is_err());
        assert!(LossSpec::piecewise_linear(vec![1.0, 0.0], vec![0.0, 1.0, 2.0]).is_err());
        assert!(LossSpec::piecewise_linear(vec![0.0], vec![0.0, 2.0]).is_ok());
    }
}

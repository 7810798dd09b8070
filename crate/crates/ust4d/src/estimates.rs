//! Point estimates with uncertainty, shared by the Monte Carlo estimators.

use serde::{Deserialize, Serialize};

use crate::Real;

/// Which estimator produced a [`CapacityEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    /// Escape-probability Monte Carlo for the capacity.
    EscapeMc,
    /// Variational (equilibrium-measure) route through a Green table.
    Variational,
    /// Monte Carlo hitting sums (uniform start points).
    HitSum,
    /// Visit-counting Green's function estimate.
    GreenMc,
}

/// Point estimate, standard error, and trial count for a capacity or a
/// related hitting sum. Truncation bias bounds are folded into
/// `std_error` by the estimators that truncate; `std_error == 0` only
/// for exact or degenerate cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub value: Real,
    pub std_error: Real,
    pub trials: u64,
    pub method: EstimateMethod,
}

impl CapacityEstimate {
    /// `|self - other|` measured in combined standard errors.
    pub fn sigma_distance(&self, other: &CapacityEstimate) -> Real {
        let combined = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        if combined == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                Real::INFINITY
            }
        } else {
            (self.value - other.value).abs() / combined
        }
    }

    /// Agreement within `k` combined standard errors.
    pub fn agrees_within(&self, other: &CapacityEstimate, k: Real) -> bool {
        self.sigma_distance(other) <= k
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(samples: &[Real]) -> (Real, Real) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<Real>() / n as Real;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<Real>() / (n as Real - 1.0);
    (mean, (var / n as Real).sqrt())
}

/// Standard error of a Bernoulli proportion from `hits` over `trials`.
pub fn binomial_se(hits: u64, trials: u64) -> Real {
    if trials < 2 {
        return 0.0;
    }
    let p = hits as Real / trials as Real;
    (p * (1.0 - p) / trials as Real).sqrt()
}

/// Median of a sample; the input order is not preserved.
pub fn median(samples: &mut [Real]) -> Real {
    assert!(!samples.is_empty(), "median of empty sample");
    samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in sample"));
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

/// Quantile by linear interpolation, `q` in `[0, 1]`.
pub fn quantile(samples: &mut [Real], q: Real) -> Real {
    assert!(!samples.is_empty(), "quantile of empty sample");
    samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in sample"));
    let pos = q.clamp(0.0, 1.0) * (samples.len() - 1) as Real;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        samples[lo]
    } else {
        let w = pos - lo as Real;
        samples[lo] * (1.0 - w) + samples[hi] * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_se_basics() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-12);
        assert!(se > 0.0);
        let (m1, se1) = mean_and_se(&[7.0]);
        assert_eq!(m1, 7.0);
        assert_eq!(se1, 0.0);
    }

    #[test]
    fn median_and_quantile() {
        let mut xs = vec![5.0, 1.0, 3.0];
        assert_eq!(median(&mut xs), 3.0);
        let mut ys = vec![4.0, 1.0, 2.0, 3.0];
        assert_eq!(median(&mut ys), 2.5);
        let mut zs = vec![0.0, 10.0];
        assert_eq!(quantile(&mut zs, 0.5), 5.0);
    }

    #[test]
    fn sigma_distance_degenerate() {
        let a = CapacityEstimate {
            value: 1.0,
            std_error: 0.0,
            trials: 1,
            method: EstimateMethod::EscapeMc,
        };
        assert_eq!(a.sigma_distance(&a), 0.0);
    }
}

//! Correlation and moment statistics.
//!
//! Moments are accumulated in a single streaming pass (Welford/Pebay
//! updates); the test suites check the results against an independent
//! two-pass reference. Skewness is the adjusted Fisher-Pearson coefficient
//! and kurtosis is sample excess kurtosis, the conventions used by common
//! spreadsheet software. Standard deviation uses the n-1 denominator.

use crate::error::{Error, Result};

/// Streaming accumulator for the first four central moments plus range.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
    min: f64,
    max: f64,
}

impl Default for Moments {
    fn default() -> Self {
        Moments {
            n: 0,
            mean: 0.0,
            m2: 0.0,
            m3: 0.0,
            m4: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Sample standard deviation (n-1 denominator); `None` for n < 2.
    pub fn sample_std(&self) -> Option<f64> {
        if self.n < 2 {
            return None;
        }
        Some((self.m2 / (self.n as f64 - 1.0)).sqrt())
    }

    /// Adjusted Fisher-Pearson skewness; `None` for n < 4 or zero spread.
    ///
    /// The n >= 4 guard is stricter than the formula needs (n >= 3) but keeps
    /// skewness and kurtosis defined on the same inputs.
    pub fn skewness(&self) -> Option<f64> {
        if self.n < 4 || self.m2 == 0.0 {
            return None;
        }
        let n = self.n as f64;
        let g1 = (self.m3 / n) / (self.m2 / n * (self.m2 / n).sqrt());
        Some(g1 * (n * (n - 1.0)).sqrt() / (n - 2.0))
    }

    /// Sample excess kurtosis; `None` for n < 4 or zero spread.
    pub fn excess_kurtosis(&self) -> Option<f64> {
        if self.n < 4 || self.m2 == 0.0 {
            return None;
        }
        let n = self.n as f64;
        let g2 = n * self.m4 / (self.m2 * self.m2) - 3.0;
        Some(((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0)))
    }

    pub(crate) fn sum_sq_deviations(&self) -> f64 {
        self.m2
    }
}

/// Product-moment correlation, accumulated in one pass.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    let mut mx = Moments::new();
    let mut my = Moments::new();
    let mut co = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        // Update the co-moment with the pre-update x mean and post-update
        // y mean; this is the standard stable pairwise form.
        let dx = a - mx.mean();
        my.push(b);
        co += dx * (b - my.mean());
        mx.push(a);
    }
    if mx.sum_sq_deviations() == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if my.sum_sq_deviations() == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    Ok(co / (mx.sum_sq_deviations() * my.sum_sq_deviations()).sqrt())
}

/// Mid-rank (average-tie) ranks, 1-based.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN in ranks"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average of ranks i+1..=j+1
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Rank correlation: Pearson correlation of mid-rank ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    pearson(&midranks(x), &midranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_identity_and_negation() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_frozen_value() {
        // Independent covariance/sigma-sigma computation gives this value.
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 2.0, 3.0, 10.0];
        assert!((pearson(&x, &y).unwrap() - 0.885_437_744_847_146_3).abs() < 1e-12);
    }

    #[test]
    fn pearson_zero_variance_is_explicit_error() {
        let x = [3.0, 3.0, 3.0];
        let y = [1.0, 2.0, 3.0];
        assert!(matches!(pearson(&x, &y), Err(Error::ZeroVariance("x"))));
        assert!(matches!(pearson(&y, &x), Err(Error::ZeroVariance("y"))));
    }

    #[test]
    fn spearman_rank_invariance_and_reversal() {
        let x = [0.5, 2.0, 3.5, 9.0, 11.0];
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert!((spearman(&x, &rev).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_tied_hand_case() {
        // ranks of x are (1.5, 1.5, 3)
        let x = [1.0, 1.0, 2.0];
        let y = [1.0, 2.0, 3.0];
        assert!((spearman(&x, &y).unwrap() - 0.866_025_403_784_438_7).abs() < 1e-12);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[10.0, 10.0, 20.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(midranks(&[5.0, 1.0, 5.0, 5.0]), vec![3.0, 1.0, 3.0, 3.0]);
    }

    #[test]
    fn moments_of_constant_sequence() {
        let mut m = Moments::new();
        for _ in 0..5 {
            m.push(15.0);
        }
        assert_eq!(m.sample_std(), Some(0.0));
        assert_eq!(m.skewness(), None);
        assert_eq!(m.excess_kurtosis(), None);
        assert_eq!(m.min(), 15.0);
        assert_eq!(m.max(), 15.0);
    }

    #[test]
    fn moments_undefined_below_four_observations() {
        let mut m = Moments::new();
        for x in [1.0, 2.0, 5.0] {
            m.push(x);
        }
        assert!(m.sample_std().is_some());
        assert_eq!(m.skewness(), None);
        assert_eq!(m.excess_kurtosis(), None);
    }

    #[test]
    fn pearson_affine_invariance() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0];
        let y = [2.0, 3.0, 7.0, 1.0, 9.0];
        let xs: Vec<f64> = x.iter().map(|v| 3.0 * v + 11.0).collect();
        let a = pearson(&x, &y).unwrap();
        let b = pearson(&xs, &y).unwrap();
        assert!((a - b).abs() < 1e-12);
        let c = pearson(&y, &x).unwrap();
        assert!((a - c).abs() < 1e-12);
    }
}

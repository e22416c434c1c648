//! Compensated (Neumaier) accumulation.

use std::iter::Sum;
use std::ops::AddAssign;

/// Running sum with a separately tracked compensation term.
///
/// Uses the Neumaier variant of Kahan summation, which stays exact when an
/// incoming term is larger in magnitude than the running sum. That matters
/// for the alternating series in this crate where early terms dominate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Merge another accumulator into this one.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().sum::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn alternating_exponential_series() {
        // e^{-x} = sum (-x)^j / j!; at x = 10 naive summation loses ~4 digits.
        let x = 10.0_f64;
        let mut term = 1.0;
        let mut acc = CompensatedSum::new();
        for j in 0..200 {
            if j > 0 {
                term *= -x / j as f64;
            }
            acc.add(term);
        }
        let rel = (acc.value() - (-x).exp()).abs() / (-x).exp();
        // terms are individually rounded, so accuracy is bounded by the largest term
        assert!(rel < 1e-9, "rel = {rel}");
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (1..1000).map(|i| 1.0 / i as f64).collect();
        let mut a: CompensatedSum = xs[..500].iter().copied().sum();
        let b: CompensatedSum = xs[500..].iter().copied().sum();
        a.merge(&b);
        assert!((a.value() - compensated_sum(xs.iter().copied())).abs() < 1e-15);
    }
}

use std::collections::BTreeMap;

use crate::{Error, Result};

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Probability mass function on integer states.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalPdf {
    /// Increasing integer states.
    pub support: Vec<i64>,
    pub probabilities: Vec<f64>,
}

impl EmpiricalPdf {
    /// Validates support ordering, nonnegativity and normalization.
    pub fn new(support: Vec<i64>, probabilities: Vec<f64>) -> Result<Self> {
        if support.len() != probabilities.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: probabilities.len(),
            });
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "pdf support must be strictly increasing".into(),
            ));
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidArgument(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let pdf = EmpiricalPdf {
            support,
            probabilities,
        };
        pdf.check_normalized()?;
        Ok(pdf)
    }

    /// Histogram of `values` rounded to the nearest integer.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for &v in values {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(
                    "cannot bin a non-finite sample".into(),
                ));
            }
            *counts.entry(v.round() as i64).or_insert(0u64) += 1;
        }
        Self::from_counts(&counts)
    }

    pub fn from_counts(counts: &BTreeMap<i64, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::InvalidArgument(
                "cannot build a pdf from zero samples".into(),
            ));
        }
        let support = counts.keys().copied().collect();
        let probabilities = counts.values().map(|&c| c as f64 / total as f64).collect();
        Ok(EmpiricalPdf {
            support,
            probabilities,
        })
    }

    pub fn total_mass(&self) -> f64 {
        // pairwise-free but compensated enough for 1e-12 on long supports
        let mut sum = 0.0;
        let mut comp = 0.0;
        for &p in &self.probabilities {
            let y = p - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    fn check_normalized(&self) -> Result<()> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Unnormalized(mass));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(&k, &p)| k as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(&k, &p)| (k as f64 - m).powi(2) * p)
            .sum()
    }
}

/// Density distance area `sum_k |p(k) - q(k)|` over the union of supports.
pub fn dda(p: &EmpiricalPdf, q: &EmpiricalPdf) -> Result<f64> {
    p.check_normalized()?;
    q.check_normalized()?;
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    while i < p.support.len() || j < q.support.len() {
        let kp = p.support.get(i).copied().unwrap_or(i64::MAX);
        let kq = q.support.get(j).copied().unwrap_or(i64::MAX);
        if kp == kq {
            total += (p.probabilities[i] - q.probabilities[j]).abs();
            i += 1;
            j += 1;
        } else if kp < kq {
            total += p.probabilities[i];
            i += 1;
        } else {
            total += q.probabilities[j];
            j += 1;
        }
    }
    Ok(total.min(2.0))
}

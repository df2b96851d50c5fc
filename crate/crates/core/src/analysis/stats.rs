use std::collections::BTreeMap;

/// Per-species moments over an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub n_samples: usize,
    pub mean: Vec<f64>,
    /// Unbiased sample variance; zero for a single sample.
    pub variance: Vec<f64>,
    /// `sqrt(variance / n_samples)`.
    pub std_error_mean: Vec<f64>,
    /// Per-species counts in unit bins (values rounded to the nearest integer).
    pub histogram: Option<Vec<BTreeMap<i64, u64>>>,
}

impl EnsembleStats {
    pub fn std(&self) -> Vec<f64> {
        self.variance.iter().map(|v| v.sqrt()).collect()
    }
}

/// Welford accumulator: a constant input leaves the variance at exactly zero.
#[derive(Clone, Debug)]
pub struct MomentAccumulator {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
    histogram: Option<Vec<BTreeMap<i64, u64>>>,
}

impl MomentAccumulator {
    pub fn new(dim: usize, histogram: bool) -> Self {
        MomentAccumulator {
            n: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
            histogram: histogram.then(|| vec![BTreeMap::new(); dim]),
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.mean.len());
        self.n += 1;
        let k = self.n as f64;
        for (i, &v) in x.iter().enumerate() {
            let delta = v - self.mean[i];
            self.mean[i] += delta / k;
            self.m2[i] += delta * (v - self.mean[i]);
        }
        if let Some(h) = &mut self.histogram {
            for (i, &v) in x.iter().enumerate() {
                *h[i].entry(v.round() as i64).or_insert(0) += 1;
            }
        }
    }

    pub fn finish(self) -> EnsembleStats {
        let n = self.n;
        let variance: Vec<f64> = self
            .m2
            .iter()
            .map(|m2| {
                if n > 1 {
                    (m2 / (n - 1) as f64).max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        let std_error_mean = variance
            .iter()
            .map(|v| if n > 0 { (v / n as f64).sqrt() } else { 0.0 })
            .collect();
        EnsembleStats {
            n_samples: n,
            mean: self.mean,
            variance,
            std_error_mean,
            histogram: self.histogram,
        }
    }
}

impl EnsembleStats {
    pub fn from_samples<'a>(
        samples: impl IntoIterator<Item = &'a [f64]>,
        dim: usize,
        histogram: bool,
    ) -> Self {
        let mut acc = MomentAccumulator::new(dim, histogram);
        for s in samples {
            acc.push(s);
        }
        acc.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample() {
        let s = EnsembleStats::from_samples([&[3.0, -1.5][..]], 2, false);
        assert_eq!(s.n_samples, 1);
        assert_eq!(s.mean, vec![3.0, -1.5]);
        assert_eq!(s.variance, vec![0.0, 0.0]);
    }

    #[test]
    fn identical_values_have_zero_variance() {
        let mut acc = MomentAccumulator::new(1, false);
        for _ in 0..1_000_000 {
            acc.push(&[0.1]);
        }
        let s = acc.finish();
        assert_eq!(s.variance, vec![0.0]);
        assert_eq!(s.mean, vec![0.1]);
    }

    #[test]
    fn matches_two_pass() {
        let data: Vec<f64> = (0..1000)
            .map(|i| ((i * 37) % 101) as f64 * 0.3 + 1e6)
            .collect();
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let s = EnsembleStats::from_samples(data.iter().map(std::slice::from_ref), 1, true);
        assert!((s.mean[0] - mean).abs() < 1e-9);
        assert!((s.variance[0] - var).abs() < 1e-9 * var);
        assert!((s.std_error_mean[0] - (var / n).sqrt()).abs() < 1e-9);
        let h = &s.histogram.unwrap()[0];
        assert_eq!(h.values().sum::<u64>(), 1000);
    }
}

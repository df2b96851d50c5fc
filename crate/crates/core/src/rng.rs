//! Per-trajectory random streams and the samplers the integrators draw from.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

/// Independent random stream for one trajectory.
///
/// Streams are keyed by `(seed, index)`: the seed selects the ChaCha key and
/// the index selects the ChaCha stream, so trajectory `i` of an ensemble draws
/// the same numbers no matter which worker runs it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        RngStream(rng)
    }

    /// An independent stream seeded from the next output of this one.
    pub fn fork(&mut self) -> Self {
        RngStream(ChaCha8Rng::from_rng(&mut self.0))
    }

    /// Poisson draw with the given mean. Non-positive means return 0; a mean
    /// that is non-finite or beyond the sampler's range returns NaN so the
    /// caller's finiteness check flags the blow-up.
    pub fn poisson(&mut self, mean: f64) -> f64 {
        if mean <= 0.0 {
            return 0.0;
        }
        match Poisson::new(mean) {
            Ok(dist) => dist.sample(&mut self.0),
            Err(_) => f64::NAN,
        }
    }

    /// Standard exponential draw (rate 1).
    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.0)
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_keyed_by_seed_and_index() {
        let a: Vec<u64> = (0..4)
            .map({
                let mut r = RngStream::new(7, 3);
                move |_| r.next_u64()
            })
            .collect();
        let mut again = RngStream::new(7, 3);
        assert!(a.iter().all(|&v| v == again.next_u64()));
        let mut other_index = RngStream::new(7, 4);
        let mut other_seed = RngStream::new(8, 3);
        assert_ne!(a[0], other_index.next_u64());
        assert_ne!(a[0], other_seed.next_u64());
    }

    #[test]
    fn poisson_edge_means() {
        let mut r = RngStream::new(1, 0);
        assert_eq!(r.poisson(0.0), 0.0);
        assert_eq!(r.poisson(-3.0), 0.0);
        assert!(r.poisson(f64::NAN).is_nan());
        assert!(r.poisson(1e30).is_nan());
    }

    #[test]
    fn poisson_moments_small_and_large_mean() {
        for &mean in &[0.7, 4.0, 37.5, 2.5e4] {
            let mut r = RngStream::new(11, 0);
            let n = 200_000;
            let draws: Vec<f64> = (0..n).map(|_| r.poisson(mean)).collect();
            assert!(draws.iter().all(|d| d.fract() == 0.0 && *d >= 0.0));
            let m = draws.iter().sum::<f64>() / n as f64;
            let v = draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se_mean = (mean / n as f64).sqrt();
            assert!((m - mean).abs() < 4.0 * se_mean, "mean {m} vs {mean}");
            // variance of the sample variance for a Poisson law: (mu4 - sigma^4)/n
            let se_var = ((mean + 2.0 * mean * mean) / n as f64).sqrt();
            assert!((v - mean).abs() < 4.0 * se_var, "var {v} vs {mean}");
        }
    }
}

//! Deterministic point sampling for the verification suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform sampler over the chart box, shrunk by a 5% margin per side so
/// expressions never sit on domain edges.
pub struct BoxSampler {
    lo: Vec<f64>,
    hi: Vec<f64>,
    rng: ChaCha8Rng,
}

impl BoxSampler {
    pub fn new(bounds: &[[f64; 2]], seed: u64) -> BoxSampler {
        let mut lo = Vec::with_capacity(bounds.len());
        let mut hi = Vec::with_capacity(bounds.len());
        for b in bounds {
            let margin = 0.05 * (b[1] - b[0]);
            lo.push(b[0] + margin);
            hi.push(b[1] - margin);
        }
        BoxSampler {
            lo,
            hi,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(lo, hi)| self.rng.gen_range(*lo..*hi))
            .collect()
    }

    pub fn take(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.next_point()).collect()
    }

    /// A uniform value from the remaining stream (for auxiliary test data).
    pub fn coefficient(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}

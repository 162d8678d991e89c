//! End-customer demand.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Seeded stream behind the external demand draws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandRng(ChaCha8Rng);

impl DemandRng {
    pub fn seed_from(seed: u64) -> Self {
        DemandRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on the open interval (0, 1) from a single 64-bit word.
    fn next_open_unit(&mut self) -> f64 {
        let bits = self.0.next_u64() >> 11;
        (bits as f64 + 0.5) / (1u64 << 53) as f64
    }
}

/// One week of end-customer demand: a normal sample truncated at zero and
/// rounded to whole units.
///
/// Uses inverse-CDF sampling so that every call consumes exactly one word
/// from `rng`, whatever the parameters.
pub fn generate_demand(rng: &mut DemandRng, mean: f64, std: f64) -> u64 {
    let u = rng.next_open_unit();
    let sample = if std > 0.0 {
        match Normal::new(mean, std) {
            Ok(normal) => normal.inverse_cdf(u),
            Err(_) => mean,
        }
    } else {
        mean
    };
    if sample.is_nan() || sample <= 0.0 {
        0
    } else {
        sample.round().min(u64::MAX as f64) as u64
    }
}

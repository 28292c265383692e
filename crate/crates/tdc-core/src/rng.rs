//! Seeded pseudo-randomness for characterization runs.
//!
//! The generator is SplitMix64 (Steele/Lea/Vigna), chosen because the
//! algorithm is short enough to restate exactly and has published
//! reference outputs, so any reimplementation in another language can
//! reproduce every sampled phase bit-for-bit. Bounded draws use modulo
//! rejection; normal deviates use the basic Box-Muller transform over
//! 53-bit uniforms. The identifier below is recorded in density reports
//! so a report names the exact stream that produced it.

use alloc::vec::Vec;

use crate::time::SimTime;

/// Identifies the PRNG algorithm and derivation scheme used by every
/// seeded harness in this crate.
pub const RNG_ALGORITHM: &str = "splitmix64/modrej/box-muller";

/// SplitMix64: `state += 0x9E3779B97F4A7C15`, then two xor-multiply mixes.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
    spare_gaussian: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 {
            state: seed,
            spare_gaussian: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, bound)` by modulo rejection: draws below the
    /// largest multiple of `bound` are reduced, the rest are retried.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    /// Uniform phase in `[0, t_clk)` femtoseconds.
    pub fn next_phase(&mut self, t_clk: SimTime) -> SimTime {
        SimTime::from_fs(self.next_below(t_clk.fs() as u64) as i64)
    }

    /// Uniform in the half-open unit interval `(0, 1]`, from the top 53
    /// bits (never zero, so it is safe under a logarithm).
    fn next_unit_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate via Box-Muller; the paired deviate is
    /// cached so consecutive calls consume the stream deterministically.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        let u1 = self.next_unit_open_low();
        let u2 = self.next_unit();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare_gaussian = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

/// Zero-mean Gaussian per-tap delay perturbations with standard deviation
/// `sigma_fs`, rounded to the nearest femtosecond.
pub fn gaussian_perturbations(count: usize, sigma_fs: f64, seed: u64) -> Vec<SimTime> {
    assert!(
        sigma_fs >= 0.0 && sigma_fs.is_finite(),
        "sigma must be finite and non-negative"
    );
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| SimTime::from_fs(libm::round(rng.next_gaussian() * sigma_fs) as i64))
        .collect()
}

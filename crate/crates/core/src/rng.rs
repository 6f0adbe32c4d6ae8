//! Deterministic random number generation for simulation fixtures.
//!
//! The seed-to-stream mapping is part of the crate contract and is stable
//! across releases:
//!
//! 1. the `u64` seed is expanded into a 256-bit state by four successive
//!    SplitMix64 steps,
//! 2. raw `u64` draws come from the xoshiro256++ recurrence,
//! 3. a uniform in `[0, 1)` is the top 53 bits of a draw scaled by `2^-53`,
//! 4. standard normal deviates are produced in pairs by the Box-Muller
//!    transform; `next_normal` hands out the cached second member of the
//!    most recent pair before starting a new one.
//!
//! Anything simulated from a fixed seed and a fixed call sequence is
//! therefore bit-reproducible.

use num_complex::Complex64;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256++ generator with Box-Muller normal sampling.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s, spare_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform draw in `[0, 1)` with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fair coin from the top bit of a raw draw.
    pub fn bit(&mut self) -> bool {
        (self.next_u64() >> 63) == 1
    }

    /// One Box-Muller pair of independent standard normals.
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        // 1 - uniform() lies in (0, 1], keeping the log argument nonzero.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = TWO_PI * u2;
        (r * libm::cos(theta), r * libm::sin(theta))
    }

    /// Single standard normal; consumes a pair and caches the spare.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let (z0, z1) = self.next_normal_pair();
        self.spare_normal = Some(z1);
        z0
    }

    /// Circularly symmetric complex normal with `E[|z|^2] = 1`.
    pub fn next_complex_normal(&mut self) -> Complex64 {
        let (re, im) = self.next_normal_pair();
        Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
    }

    /// Rayleigh draw with scale `sigma` (inverse-CDF method).
    pub fn rayleigh(&mut self, sigma: f64) -> f64 {
        let u = 1.0 - self.uniform();
        sigma * libm::sqrt(-2.0 * libm::log(u))
    }

    /// Lognormal draw: `exp(mu + sigma * N(0,1))`.
    pub fn lognormal(&mut self, mu: f64, sigma: f64) -> f64 {
        libm::exp(mu + sigma * self.next_normal())
    }

    /// Gamma draw by the Marsaglia-Tsang squeeze method.
    pub fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        assert!(shape > 0.0 && scale > 0.0);
        if shape < 1.0 {
            // Boost: draw for shape+1 and scale back down.
            let u = 1.0 - self.uniform();
            return self.gamma(shape + 1.0, scale) * libm::pow(u, 1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / libm::sqrt(9.0 * d);
        loop {
            let x = self.next_normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v * scale;
            }
            if libm::log(u) < 0.5 * x2 + d * (1.0 - v + libm::log(v)) {
                return d * v * scale;
            }
        }
    }
}

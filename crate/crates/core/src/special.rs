//! Gamma-family special functions.
//!
//! These back the distribution fits and the chi-square p-value. Accuracy
//! targets: `ln_gamma` and `digamma` are good to better than 1e-12 relative
//! on `[0.1, 50]` (checked in tests against quadrature and series oracles),
//! and the regularized incomplete gamma is good to 1e-10 relative over the
//! chi-square ranges used here.

/// Lanczos approximation with g = 607/128 and 15 coefficients (Godfrey's
/// table). Relative error is below 1e-13 over the positive axis.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    9.999_999_999_999_971e-1,
    5.715_623_566_586_292e1,
    -5.959_796_035_547_549e1,
    1.413_609_797_474_175e1,
    -4.919_138_160_976_202e-1,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_274e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162e-6,
];

const LN_SQRT_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the Lanczos argument away from zero.
        let pi = core::f64::consts::PI;
        return libm::log(pi / libm::sin(pi * x)) - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_TWO_PI + (z + 0.5) * libm::log(t) - t + libm::log(acc)
}

/// Gamma function for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    libm::exp(ln_gamma(x))
}

/// Digamma (psi) function for `x > 0`: recurrence up to `x >= 10`, then the
/// Bernoulli asymptotic series.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    let mut x = x;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let z = inv * inv;
    let series = z
        * (1.0 / 12.0
            - z * (1.0 / 120.0
                - z * (1.0 / 252.0
                    - z * (1.0 / 240.0
                        - z * (1.0 / 132.0 - z * (691.0 / 32760.0 - z / 12.0))))));
    acc + libm::log(x) - 0.5 * inv - series
}

/// Trigamma function for `x > 0`, used by the gamma-fit Newton step.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    let mut x = x;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let z = inv * inv;
    let series = inv
        * (1.0
            + inv * (0.5
                + inv * (1.0 / 6.0
                    - z * (1.0 / 30.0 - z * (1.0 / 42.0 - z * (1.0 / 30.0 - z * 5.0 / 66.0))))));
    acc + series
}

const IGAMMA_EPS: f64 = 1e-16;
const IGAMMA_MAX_ITER: usize = 500;
const FPMIN: f64 = 1e-300;

/// Regularized lower incomplete gamma P(a, x).
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn reg_upper_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_continued_fraction(a, x)
    }
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    while n < IGAMMA_MAX_ITER as f64 {
        term *= x / (a + n);
        sum += term;
        if libm::fabs(term) < libm::fabs(sum) * IGAMMA_EPS {
            break;
        }
        n += 1.0;
    }
    sum * libm::exp(a * libm::log(x) - x - ln_gamma(a))
}

// Lentz's algorithm on the standard continued fraction for Q(a, x).
fn upper_continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=IGAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if libm::fabs(d) < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if libm::fabs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < IGAMMA_EPS {
            break;
        }
    }
    h * libm::exp(a * libm::log(x) - x - ln_gamma(a))
}

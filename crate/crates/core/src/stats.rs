//! Empirical PDFs, maximum-likelihood distribution fits, moments, and the
//! chi-square goodness-of-fit test.
//!
//! Four families are supported: Rayleigh, normal, lognormal, and gamma.
//! Lognormal and gamma are fitted in their two-parameter forms with the
//! location fixed at zero. All kurtosis values are excess kurtosis.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::special::{digamma, ln_gamma, reg_upper_gamma, trigamma};

/// Default histogram bin count: 101 bins, so a goodness-of-fit test over
/// the density array runs at 100 degrees of freedom.
pub const DEFAULT_PDF_BINS: usize = 101;

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

/// Distribution family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistFamily {
    Rayleigh,
    Normal,
    Lognormal,
    Gamma,
}

impl DistFamily {
    pub const ALL: [DistFamily; 4] = [
        DistFamily::Rayleigh,
        DistFamily::Normal,
        DistFamily::Lognormal,
        DistFamily::Gamma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DistFamily::Rayleigh => "rayleigh",
            DistFamily::Normal => "normal",
            DistFamily::Lognormal => "lognormal",
            DistFamily::Gamma => "gamma",
        }
    }

    pub fn parse(name: &str) -> Option<DistFamily> {
        match name {
            "rayleigh" => Some(DistFamily::Rayleigh),
            "normal" | "norm" | "gaussian" => Some(DistFamily::Normal),
            "lognormal" | "lognorm" => Some(DistFamily::Lognormal),
            "gamma" => Some(DistFamily::Gamma),
            _ => None,
        }
    }
}

/// A fitted distribution: family tag plus its estimated parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionFit {
    /// Scale `sigma` (the mode).
    Rayleigh { sigma: f64 },
    /// Location `mean` and (biased, 1/n) `variance`.
    Normal { mean: f64, variance: f64 },
    /// `log_mean` and `log_sigma` are the mean and standard deviation of
    /// ln(x); `median` is exp(log_mean).
    Lognormal { log_mean: f64, log_sigma: f64, median: f64 },
    /// Shape and scale, location fixed at zero.
    Gamma { shape: f64, scale: f64 },
}

impl DistributionFit {
    pub fn family(&self) -> DistFamily {
        match self {
            DistributionFit::Rayleigh { .. } => DistFamily::Rayleigh,
            DistributionFit::Normal { .. } => DistFamily::Normal,
            DistributionFit::Lognormal { .. } => DistFamily::Lognormal,
            DistributionFit::Gamma { .. } => DistFamily::Gamma,
        }
    }

    /// Shape parameter in the sense of the fit reports: the lognormal
    /// log-sigma or the gamma shape. Other families have none.
    pub fn shape(&self) -> Option<f64> {
        match self {
            DistributionFit::Lognormal { log_sigma, .. } => Some(*log_sigma),
            DistributionFit::Gamma { shape, .. } => Some(*shape),
            _ => None,
        }
    }
}

/// First four moments; kurtosis is excess kurtosis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skew: f64,
    pub excess_kurtosis: f64,
}

/// Uniform-width histogram normalized to unit integral.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPdf {
    /// `bins + 1` strictly increasing edges spanning `[min, max]`.
    pub bin_edges: Vec<f64>,
    /// `bins` nonnegative densities; `sum(density * width) == 1`.
    pub density: Vec<f64>,
    pub n_samples: usize,
}

impl EmpiricalPdf {
    pub fn bins(&self) -> usize {
        self.density.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }
}

/// Chi-square test output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    /// One less than the array length.
    pub dof: usize,
    /// Upper-tail probability of chi-square(dof) at the statistic.
    pub p_value: f64,
}

fn check_finite(samples: &[f64]) -> Result<()> {
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(String::from("non-finite sample")));
    }
    Ok(())
}

/// Histogram of `samples` over `[min, max]` with `bins` uniform bins,
/// normalized so the density integrates to one.
pub fn empirical_pdf(samples: &[f64], bins: usize) -> Result<EmpiricalPdf> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: samples.len() });
    }
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bins, got {bins}")));
    }
    check_finite(samples)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in samples {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo == hi {
        return Err(Error::DegenerateInput(String::from(
            "all samples identical: histogram support has zero width",
        )));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let norm = 1.0 / (samples.len() as f64 * width);
    let density = counts.iter().map(|&c| c as f64 * norm).collect();
    let bin_edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
    Ok(EmpiricalPdf { bin_edges, density, n_samples: samples.len() })
}

/// Gaussian MLE: sample mean and biased (1/n) variance.
pub fn fit_normal(samples: &[f64]) -> Result<DistributionFit> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: samples.len() });
    }
    check_finite(samples)?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let variance = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok(DistributionFit::Normal { mean, variance })
}

/// Rayleigh MLE: `sigma^2 = sum(x^2) / (2n)`, requiring positive samples.
pub fn fit_rayleigh(samples: &[f64]) -> Result<DistributionFit> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    check_finite(samples)?;
    if samples.iter().any(|&x| x <= 0.0) {
        return Err(Error::Domain(String::from("rayleigh samples must be positive")));
    }
    let n = samples.len() as f64;
    let sigma2 = samples.iter().map(|x| x * x).sum::<f64>() / (2.0 * n);
    Ok(DistributionFit::Rayleigh { sigma: libm::sqrt(sigma2) })
}

/// Lognormal MLE with location fixed at zero: mean and biased standard
/// deviation of ln(x), median `exp(mean)`.
pub fn fit_lognormal(samples: &[f64]) -> Result<DistributionFit> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    check_finite(samples)?;
    if samples.iter().any(|&x| x <= 0.0) {
        return Err(Error::Domain(String::from("lognormal samples must be positive")));
    }
    let n = samples.len() as f64;
    let logs: Vec<f64> = samples.iter().map(|&x| libm::log(x)).collect();
    let log_mean = logs.iter().sum::<f64>() / n;
    let log_var = logs.iter().map(|l| (l - log_mean) * (l - log_mean)).sum::<f64>() / n;
    Ok(DistributionFit::Lognormal {
        log_mean,
        log_sigma: libm::sqrt(log_var),
        median: libm::exp(log_mean),
    })
}

const GAMMA_FIT_TOL: f64 = 1e-10;
const GAMMA_FIT_MAX_ITER: usize = 100;

/// Two-parameter gamma MLE. The shape solves
/// `log(shape) - digamma(shape) = log(mean / geometric mean)` by a
/// safeguarded Newton iteration (bisection fallback keeps the iterate in a
/// bracket); the scale is `mean / shape`.
pub fn fit_gamma(samples: &[f64]) -> Result<DistributionFit> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: samples.len() });
    }
    check_finite(samples)?;
    if samples.iter().any(|&x| x <= 0.0) {
        return Err(Error::Domain(String::from("gamma samples must be positive")));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let log_mean = samples.iter().map(|&x| libm::log(x)).sum::<f64>() / n;
    // s = log(arithmetic mean / geometric mean) >= 0, zero only when all
    // samples are equal.
    let s = libm::log(mean) - log_mean;
    if s <= 0.0 {
        return Err(Error::DegenerateInput(String::from(
            "gamma fit needs dispersed samples (arithmetic mean equals geometric mean)",
        )));
    }

    // Standard closed-form starting point.
    let mut shape = (3.0 - s + libm::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    let mut trace = Vec::with_capacity(8);
    for _ in 0..GAMMA_FIT_MAX_ITER {
        trace.push(shape);
        let f = libm::log(shape) - digamma(shape) - s;
        if f > 0.0 {
            // log(g) - psi(g) is strictly decreasing, so the root is above.
            lo = shape;
        } else {
            hi = shape;
        }
        let fprime = 1.0 / shape - trigamma(shape);
        let mut next = shape - f / fprime;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { shape * 2.0 };
        }
        let delta = next - shape;
        shape = next;
        if libm::fabs(delta) < GAMMA_FIT_TOL {
            return Ok(DistributionFit::Gamma { shape, scale: mean / shape });
        }
    }
    Err(Error::NumericalFailure { context: String::from("gamma shape solve"), trace })
}

/// Density of a fitted distribution at `x`. Points outside the support
/// return zero rather than erroring.
pub fn pdf_value(fit: &DistributionFit, x: f64) -> f64 {
    match *fit {
        DistributionFit::Rayleigh { sigma } => {
            if x < 0.0 || sigma <= 0.0 {
                return 0.0;
            }
            let s2 = sigma * sigma;
            x / s2 * libm::exp(-x * x / (2.0 * s2))
        }
        DistributionFit::Normal { mean, variance } => {
            if variance <= 0.0 {
                // Degenerate fit: a point mass at the mean.
                return if x == mean { f64::INFINITY } else { 0.0 };
            }
            let d = x - mean;
            libm::exp(-d * d / (2.0 * variance)) / (libm::sqrt(variance) * SQRT_TWO_PI)
        }
        DistributionFit::Lognormal { log_mean, log_sigma, median } => {
            if x <= 0.0 {
                return 0.0;
            }
            if log_sigma <= 0.0 {
                return if x == median { f64::INFINITY } else { 0.0 };
            }
            let d = libm::log(x) - log_mean;
            libm::exp(-d * d / (2.0 * log_sigma * log_sigma)) / (x * log_sigma * SQRT_TWO_PI)
        }
        DistributionFit::Gamma { shape, scale } => {
            if x < 0.0 || shape <= 0.0 || scale <= 0.0 {
                return 0.0;
            }
            if x == 0.0 {
                return if shape > 1.0 {
                    0.0
                } else if shape == 1.0 {
                    1.0 / scale
                } else {
                    f64::INFINITY
                };
            }
            let z = x / scale;
            libm::exp((shape - 1.0) * libm::log(z) - z - ln_gamma(shape)) / scale
        }
    }
}

/// Closed-form moments of a fitted distribution.
pub fn moments(fit: &DistributionFit) -> Moments {
    use core::f64::consts::PI;
    match *fit {
        DistributionFit::Rayleigh { sigma } => {
            let mean = sigma * libm::sqrt(PI / 2.0);
            let variance = (2.0 - PI / 2.0) * sigma * sigma;
            let skew = 2.0 * libm::sqrt(PI) * (PI - 3.0) / libm::pow(4.0 - PI, 1.5);
            let excess_kurtosis = -(6.0 * PI * PI - 24.0 * PI + 16.0) / ((4.0 - PI) * (4.0 - PI));
            Moments { mean, variance, skew, excess_kurtosis }
        }
        DistributionFit::Normal { mean, variance } => Moments {
            mean,
            variance,
            skew: 0.0,
            excess_kurtosis: 0.0,
        },
        DistributionFit::Lognormal { log_mean, log_sigma, .. } => {
            let s2 = log_sigma * log_sigma;
            let omega = libm::exp(s2);
            let mean = libm::exp(log_mean + s2 / 2.0);
            let variance = (omega - 1.0) * libm::exp(2.0 * log_mean + s2);
            let skew = (omega + 2.0) * libm::sqrt(omega - 1.0);
            let excess_kurtosis =
                omega * omega * (omega * omega + 2.0 * omega + 3.0) - 6.0;
            Moments { mean, variance, skew, excess_kurtosis }
        }
        DistributionFit::Gamma { shape, scale } => Moments {
            mean: shape * scale,
            variance: shape * scale * scale,
            skew: 2.0 / libm::sqrt(shape),
            excess_kurtosis: 6.0 / shape,
        },
    }
}

/// Central sample moments: mean, biased variance, skew, excess kurtosis.
pub fn sample_moments(samples: &[f64]) -> Result<Moments> {
    if samples.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: samples.len() });
    }
    check_finite(samples)?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 == 0.0 {
        return Err(Error::DegenerateInput(String::from(
            "constant samples: skew and kurtosis are undefined",
        )));
    }
    Ok(Moments {
        mean,
        variance: m2,
        skew: m3 / libm::pow(m2, 1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

/// Pearson chi-square statistic over paired arrays, with the degrees of
/// freedom fixed at one less than the array length and the p-value taken
/// from the upper tail.
pub fn chi_square(observed: &[f64], expected: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != expected.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} observed vs {} expected",
            observed.len(),
            expected.len()
        )));
    }
    if observed.len() < 2 {
        return Err(Error::InvalidArgument(String::from("need at least 2 bins")));
    }
    check_finite(observed)?;
    check_finite(expected)?;
    if expected.iter().any(|&e| e <= 0.0) {
        return Err(Error::Domain(String::from("expected values must be positive")));
    }
    let statistic = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum::<f64>();
    let dof = observed.len() - 1;
    Ok(ChiSquareResult { statistic, dof, p_value: chi2_survival(statistic, dof) })
}

/// Upper-tail probability of a chi-square distribution with `dof` degrees
/// of freedom, i.e. the regularized upper incomplete gamma Q(dof/2, x/2).
pub fn chi2_survival(x: f64, dof: usize) -> f64 {
    debug_assert!(dof >= 1);
    if x <= 0.0 {
        return 1.0;
    }
    reg_upper_gamma(dof as f64 / 2.0, x / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    const E: f64 = core::f64::consts::E;

    fn log_likelihood(fit: &DistributionFit, samples: &[f64]) -> f64 {
        samples.iter().map(|&x| pdf_value(fit, x).ln()).sum()
    }

    #[test]
    fn empirical_pdf_hand_case() {
        let pdf = empirical_pdf(&[0.0, 1.0], 2).unwrap();
        assert_eq!(pdf.density, vec![1.0, 1.0]);
        assert!((pdf.bin_width() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empirical_pdf_default_bins_and_normalization() {
        let mut rng = Rng::new(5);
        let samples: Vec<f64> = (0..5000).map(|_| rng.uniform()).collect();
        let pdf = empirical_pdf(&samples, DEFAULT_PDF_BINS).unwrap();
        assert_eq!(pdf.density.len(), 101);
        assert_eq!(pdf.bin_edges.len(), 102);
        let integral: f64 = pdf.density.iter().map(|d| d * pdf.bin_width()).sum();
        assert!((integral - 1.0).abs() < 1e-9, "integral {integral}");
    }

    #[test]
    fn empirical_pdf_uniform_density_near_one() {
        // Law-of-large-numbers check; n sized so the worst bin of 101 sits
        // well inside the tolerance.
        let mut rng = Rng::new(17);
        let samples: Vec<f64> = (0..4_000_000).map(|_| rng.uniform()).collect();
        let pdf = empirical_pdf(&samples, 101).unwrap();
        for (i, d) in pdf.density.iter().enumerate() {
            assert!((d - 1.0).abs() < 0.02, "bin {i}: density {d}");
        }
    }

    #[test]
    fn empirical_pdf_degenerate_and_short_inputs() {
        assert!(matches!(
            empirical_pdf(&[3.0, 3.0, 3.0], 10),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            empirical_pdf(&[1.0], 10),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            empirical_pdf(&[1.0, 2.0], 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn normal_fit_hand_cases() {
        match fit_normal(&[1.0, 1.0, 1.0]).unwrap() {
            DistributionFit::Normal { mean, variance } => {
                assert_eq!(mean, 1.0);
                assert_eq!(variance, 0.0);
            }
            _ => unreachable!(),
        }
        match fit_normal(&[0.0, 2.0]).unwrap() {
            DistributionFit::Normal { mean, variance } => {
                assert_eq!(mean, 1.0);
                assert_eq!(variance, 1.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn rayleigh_fit_hand_cases() {
        // Eq.-style MLE: sigma^2 = sum(x^2) / (2n).
        match fit_rayleigh(&[2.0]).unwrap() {
            DistributionFit::Rayleigh { sigma } => assert!((sigma * sigma - 2.0).abs() < 1e-15),
            _ => unreachable!(),
        }
        match fit_rayleigh(&[1.0, 1.0]).unwrap() {
            DistributionFit::Rayleigh { sigma } => assert!((sigma * sigma - 0.5).abs() < 1e-15),
            _ => unreachable!(),
        }
        assert!(matches!(fit_rayleigh(&[1.0, -0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn lognormal_fit_hand_cases() {
        match fit_lognormal(&[E, E]).unwrap() {
            DistributionFit::Lognormal { log_mean, log_sigma, median } => {
                assert!((log_mean - 1.0).abs() < 1e-15);
                assert_eq!(log_sigma, 0.0);
                assert!((median - E).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
        match fit_lognormal(&[1.0, E * E]).unwrap() {
            DistributionFit::Lognormal { log_mean, log_sigma, median } => {
                assert!((log_mean - 1.0).abs() < 1e-14);
                assert!((log_sigma - 1.0).abs() < 1e-14);
                assert!((median - E).abs() < 1e-13);
            }
            _ => unreachable!(),
        }
        assert!(matches!(fit_lognormal(&[0.0, 1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_fit_degenerate_input() {
        assert!(matches!(
            fit_gamma(&[2.0, 2.0, 2.0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn mle_consistency_monte_carlo() {
        let n = 100_000;
        let mut rng = Rng::new(2024);

        let rayleigh: Vec<f64> = (0..n).map(|_| rng.rayleigh(2.0)).collect();
        match fit_rayleigh(&rayleigh).unwrap() {
            DistributionFit::Rayleigh { sigma } => {
                assert!((sigma - 2.0).abs() / 2.0 < 0.02, "sigma {sigma}")
            }
            _ => unreachable!(),
        }

        let normal: Vec<f64> = (0..n).map(|_| 3.0 + 2.0 * rng.next_normal()).collect();
        match fit_normal(&normal).unwrap() {
            DistributionFit::Normal { mean, variance } => {
                assert!((mean - 3.0).abs() < 0.05, "mean {mean}");
                assert!((variance - 4.0).abs() < 0.1, "variance {variance}");
            }
            _ => unreachable!(),
        }

        let lognormal: Vec<f64> = (0..n).map(|_| rng.lognormal(0.0, 0.5)).collect();
        match fit_lognormal(&lognormal).unwrap() {
            DistributionFit::Lognormal { log_sigma, .. } => {
                assert!((log_sigma - 0.5).abs() / 0.5 < 0.02, "log_sigma {log_sigma}")
            }
            _ => unreachable!(),
        }

        for &true_shape in &[2.0, 5.0] {
            let gamma: Vec<f64> = (0..n).map(|_| rng.gamma(true_shape, 1.0)).collect();
            match fit_gamma(&gamma).unwrap() {
                DistributionFit::Gamma { shape, scale } => {
                    assert!(
                        (shape - true_shape).abs() / true_shape < 0.03,
                        "shape {shape} vs {true_shape}"
                    );
                    assert!((scale - 1.0).abs() < 0.03, "scale {scale}");
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn mle_is_local_likelihood_maximum() {
        let n = 5000;
        let mut rng = Rng::new(99);
        let datasets: [(DistFamily, Vec<f64>); 4] = [
            (DistFamily::Rayleigh, (0..n).map(|_| rng.rayleigh(1.3)).collect()),
            (DistFamily::Normal, (0..n).map(|_| 0.7 + 1.9 * rng.next_normal()).collect()),
            (DistFamily::Lognormal, (0..n).map(|_| rng.lognormal(0.2, 0.6)).collect()),
            (DistFamily::Gamma, (0..n).map(|_| rng.gamma(3.0, 0.8)).collect()),
        ];
        for (family, samples) in &datasets {
            let fit = match family {
                DistFamily::Rayleigh => fit_rayleigh(samples).unwrap(),
                DistFamily::Normal => fit_normal(samples).unwrap(),
                DistFamily::Lognormal => fit_lognormal(samples).unwrap(),
                DistFamily::Gamma => fit_gamma(samples).unwrap(),
            };
            let base = log_likelihood(&fit, samples);
            for scale in [0.99, 1.01] {
                let perturbed = match fit.clone() {
                    DistributionFit::Rayleigh { sigma } => {
                        DistributionFit::Rayleigh { sigma: sigma * scale }
                    }
                    DistributionFit::Normal { mean, variance } => DistributionFit::Normal {
                        mean: mean * scale,
                        variance: variance * scale,
                    },
                    DistributionFit::Lognormal { log_mean, log_sigma, median } => {
                        DistributionFit::Lognormal {
                            log_mean: log_mean * scale,
                            log_sigma: log_sigma * scale,
                            median,
                        }
                    }
                    DistributionFit::Gamma { shape, scale: sc } => DistributionFit::Gamma {
                        shape: shape * scale,
                        scale: sc * scale,
                    },
                };
                let perturbed_ll = log_likelihood(&perturbed, samples);
                assert!(
                    perturbed_ll <= base + 1e-9,
                    "{}: perturbation {scale} raised the likelihood ({perturbed_ll} > {base})",
                    family.name()
                );
            }
        }
    }

    #[test]
    fn pdf_values_hand_cases() {
        let std_normal = DistributionFit::Normal { mean: 0.0, variance: 1.0 };
        assert!((pdf_value(&std_normal, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-12);

        let rayleigh = DistributionFit::Rayleigh { sigma: 1.0 };
        assert!((pdf_value(&rayleigh, 1.0) - (-0.5f64).exp()).abs() < 1e-12);
        assert_eq!(pdf_value(&rayleigh, -1.0), 0.0);

        let std_gamma = DistributionFit::Gamma { shape: 1.0, scale: 1.0 };
        assert!((pdf_value(&std_gamma, 2.0) - (-2.0f64).exp()).abs() < 1e-12);

        let lognorm = DistributionFit::Lognormal { log_mean: 0.0, log_sigma: 0.5, median: 1.0 };
        assert_eq!(pdf_value(&lognorm, 0.0), 0.0);
        assert_eq!(pdf_value(&lognorm, -3.0), 0.0);
    }

    /// Every density integrates to one over its support; randomized
    /// parameters, quadrature by fine Simpson sum.
    #[test]
    fn pdf_integrates_to_one() {
        let mut rng = Rng::new(31);
        let simpson = |fit: &DistributionFit, lo: f64, hi: f64| {
            let n = 20_000;
            let h = (hi - lo) / n as f64;
            let mut acc = pdf_value(fit, lo) + pdf_value(fit, hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * pdf_value(fit, lo + i as f64 * h);
            }
            acc * h / 3.0
        };
        for _ in 0..5 {
            let sigma = 0.5 + 2.0 * rng.uniform();
            let fit = DistributionFit::Rayleigh { sigma };
            let integral = simpson(&fit, 0.0, sigma * 12.0);
            assert!((integral - 1.0).abs() < 1e-6, "rayleigh {integral}");

            let mean = rng.next_normal();
            let variance = 0.3 + rng.uniform();
            let fit = DistributionFit::Normal { mean, variance };
            let sd = variance.sqrt();
            let integral = simpson(&fit, mean - 12.0 * sd, mean + 12.0 * sd);
            assert!((integral - 1.0).abs() < 1e-6, "normal {integral}");

            // Integrate the lognormal in log space where it is Gaussian:
            // integral f(x) dx = integral f(e^u) e^u du.
            let log_sigma = 0.2 + 0.6 * rng.uniform();
            let fit = DistributionFit::Lognormal { log_mean: 0.1, log_sigma, median: 0.1f64.exp() };
            let (u_lo, u_hi) = (0.1 - 14.0 * log_sigma, 0.1 + 14.0 * log_sigma);
            let n = 20_000;
            let h = (u_hi - u_lo) / n as f64;
            let g = |u: f64| pdf_value(&fit, u.exp()) * u.exp();
            let mut acc = g(u_lo) + g(u_hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * g(u_lo + i as f64 * h);
            }
            let integral = acc * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-6, "lognormal {integral}");

            // Same log-space treatment for the gamma: its derivative is
            // singular at the origin for shape in (1, 2).
            let shape = 1.0 + 4.0 * rng.uniform();
            let scale = 0.5 + rng.uniform();
            let fit = DistributionFit::Gamma { shape, scale };
            let u_lo = (scale * (-24.0 / shape).exp()).ln();
            let u_hi = (scale * (20.0 * shape + 60.0)).ln();
            let n = 20_000;
            let h = (u_hi - u_lo) / n as f64;
            let g = |u: f64| pdf_value(&fit, u.exp()) * u.exp();
            let mut acc = g(u_lo) + g(u_hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * g(u_lo + i as f64 * h);
            }
            let integral = acc * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-6, "gamma {integral}");
        }
    }

    #[test]
    fn closed_form_moments_match_reference_rows() {
        // Reference rows are rounded to their printed digits, so compare at
        // the max of 1% relative and half a step of the last printed digit.
        let close = |value: f64, table: f64, step: f64| {
            let tol = (0.01 * table.abs()).max(0.5 * step);
            assert!(
                (value - table).abs() <= tol,
                "value {value} vs table {table} (tol {tol})"
            );
        };
        let m = moments(&DistributionFit::Rayleigh { sigma: 1.0 });
        close(m.mean, 1.25, 0.01);
        close(m.variance, 0.43, 0.01);
        close(m.skew, 0.63, 0.01);
        close(m.excess_kurtosis, 0.25, 0.01);

        let m = moments(&DistributionFit::Gamma { shape: 2.0, scale: 1.0 });
        close(m.mean, 2.0, 0.1);
        close(m.variance, 2.0, 0.1);
        close(m.skew, 1.41, 0.01);
        close(m.excess_kurtosis, 3.0, 0.1);

        let m = moments(&DistributionFit::Gamma { shape: 5.0, scale: 1.0 });
        close(m.mean, 5.0, 0.1);
        close(m.variance, 5.0, 0.1);
        close(m.skew, 0.89, 0.01);
        close(m.excess_kurtosis, 1.2, 0.1);

        let m = moments(&DistributionFit::Lognormal {
            log_mean: 0.0,
            log_sigma: 0.5,
            median: 1.0,
        });
        close(m.mean, 1.13, 0.01);
        close(m.variance, 0.36, 0.01);
        close(m.skew, 1.75, 0.01);
        close(m.excess_kurtosis, 5.89, 0.01);

        let m = moments(&DistributionFit::Normal { mean: 0.0, variance: 1.0 });
        assert_eq!(m.skew, 0.0);
        assert_eq!(m.excess_kurtosis, 0.0);
    }

    #[test]
    fn fitted_moments_match_sample_moments() {
        let mut rng = Rng::new(8);
        let samples: Vec<f64> = (0..100_000).map(|_| rng.gamma(2.5, 1.2)).collect();
        let fit = fit_gamma(&samples).unwrap();
        let fitted = moments(&fit);
        let sampled = sample_moments(&samples).unwrap();
        assert!((fitted.mean - sampled.mean).abs() / sampled.mean < 0.02);
        assert!((fitted.variance - sampled.variance).abs() / sampled.variance < 0.05);
        assert!((fitted.skew - sampled.skew).abs() < 0.1);
        assert!((fitted.excess_kurtosis - sampled.excess_kurtosis).abs() < 0.3);
    }

    #[test]
    fn sample_moments_hand_cases() {
        let m = sample_moments(&[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.mean, 0.5);
        assert_eq!(m.variance, 0.25);
        assert!(matches!(
            sample_moments(&[2.0, 2.0, 2.0, 2.0]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            sample_moments(&[1.0, 2.0]),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn sample_moments_standard_normal() {
        let mut rng = Rng::new(77);
        let samples: Vec<f64> = (0..1_000_000).map(|_| rng.next_normal()).collect();
        let m = sample_moments(&samples).unwrap();
        assert!(m.mean.abs() < 0.01);
        assert!((m.variance - 1.0).abs() < 0.01);
        assert!(m.skew.abs() < 0.02);
        assert!(m.excess_kurtosis.abs() < 0.05);
    }

    #[test]
    fn chi_square_hand_cases() {
        let same = chi_square(&[3.0, 4.0, 5.0], &[3.0, 4.0, 5.0]).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.dof, 2);
        assert_eq!(same.p_value, 1.0);

        let r = chi_square(&[10.0, 10.0], &[8.0, 12.0]).unwrap();
        assert!((r.statistic - (4.0 / 8.0 + 4.0 / 12.0)).abs() < 1e-12);
        assert_eq!(r.dof, 1);

        let wide = chi_square(&vec![1.0; 101], &vec![1.0; 101]).unwrap();
        assert_eq!(wide.dof, 100);

        assert!(matches!(
            chi_square(&[1.0, 2.0], &[1.0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            chi_square(&[1.0, 2.0], &[0.0, 2.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn chi_square_monotone_in_single_deviation() {
        let expected = [5.0, 5.0, 5.0];
        let mut prev = -1.0;
        for k in 0..10 {
            let obs = [5.0 + k as f64, 5.0, 5.0];
            let stat = chi_square(&obs, &expected).unwrap().statistic;
            assert!(stat >= prev);
            prev = stat;
        }
    }

    #[test]
    fn chi2_survival_reference_points() {
        assert_eq!(chi2_survival(0.0, 5), 1.0);
        // dof = 2 closed form: Q = exp(-x/2)
        let x = 2.0 * 20.0f64.ln();
        assert!((chi2_survival(x, 2) - 0.05).abs() < 1e-9);
        // 95th percentile of chi-square(1)
        assert!((chi2_survival(3.841, 1) - 0.05).abs() < 5e-4);
    }

    /// With a correct model and equal-probability bins, goodness-of-fit
    /// p-values over repeated trials should be close to uniform.
    #[test]
    fn chi_square_pvalues_approximately_uniform() {
        let trials = 200;
        let per_trial = 2000;
        let bins = 20;
        let mut rng = Rng::new(1234);
        let mut p_values = Vec::with_capacity(trials);
        for _ in 0..trials {
            // Fit on an independent calibration draw so the tested counts
            // are independent of the fitted parameter and the len-1 degrees
            // of freedom are exact.
            let calibration: Vec<f64> = (0..per_trial).map(|_| rng.rayleigh(1.0)).collect();
            let sigma = match fit_rayleigh(&calibration).unwrap() {
                DistributionFit::Rayleigh { sigma } => sigma,
                _ => unreachable!(),
            };
            let samples: Vec<f64> = (0..per_trial).map(|_| rng.rayleigh(1.0)).collect();
            // Equal-probability bin edges from the fitted inverse CDF.
            let mut counts = vec![0usize; bins];
            for &x in &samples {
                let u = 1.0 - (-x * x / (2.0 * sigma * sigma)).exp();
                let idx = ((u * bins as f64) as usize).min(bins - 1);
                counts[idx] += 1;
            }
            let observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let expected = vec![per_trial as f64 / bins as f64; bins];
            p_values.push(chi_square(&observed, &expected).unwrap().p_value);
        }
        p_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = p_values
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let cdf_hi = (i + 1) as f64 / trials as f64;
                let cdf_lo = i as f64 / trials as f64;
                (p - cdf_lo).abs().max((p - cdf_hi).abs())
            })
            .fold(0.0f64, f64::max);
        assert!(ks < 0.1, "KS distance {ks}");
    }
}

//! Multipath channel and AWGN simulation with recorded ground truth.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::burst::{build_burst, Modulator, INFO_BITS, SYMBOL_RATE_HZ};
use crate::error::{Error, Result};
use crate::iq::IqStream;
use crate::rng::Rng;

/// Channel impulse response: complex taps at one-symbol spacing. The tap
/// count fixes how many multipath components the model resolves.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    pub taps: Vec<Complex64>,
}

impl Cir {
    pub fn new(taps: Vec<Complex64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidArgument("CIR needs at least one tap".into()));
        }
        Ok(Cir { taps })
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Tap magnitudes, sqrt(I^2 + Q^2) per tap.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.taps.iter().map(|t| t.norm()).collect()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }

    /// Taps spread to sample spacing: tap k lands at sample k * oversample.
    fn upsampled(&self, oversample: usize) -> Vec<Complex64> {
        if oversample == 1 {
            return self.taps.clone();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); (self.taps.len() - 1) * oversample + 1];
        for (k, &tap) in self.taps.iter().enumerate() {
            out[k * oversample] = tap;
        }
        out
    }
}

/// AWGN description: target SNR in dB and the generator seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Linear convolution of a stream with the channel taps; output length is
/// `x.len() + taps.len() - 1`.
pub fn apply_channel(x: &[Complex64], cir: &Cir) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("cannot convolve an empty stream".into()));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + cir.taps.len() - 1];
    for (k, &tap) in cir.taps.iter().enumerate() {
        if tap.norm_sqr() == 0.0 {
            continue;
        }
        for (i, &xi) in x.iter().enumerate() {
            y[i + k] += tap * xi;
        }
    }
    Ok(y)
}

/// Add complex circular white Gaussian noise at `snr_db` relative to the
/// mean power of `x`. Reproducible for a fixed seed.
pub fn add_awgn(x: &[Complex64], noise: &NoiseSpec) -> Result<Vec<Complex64>> {
    if !noise.snr_db.is_finite() {
        return Err(Error::InvalidArgument("snr_db must be finite".into()));
    }
    let signal_power = crate::iq::mean_power(x);
    Ok(add_awgn_with_signal_power(x, signal_power, noise))
}

/// AWGN with an explicitly chosen signal-power reference, for callers that
/// define SNR over a subset of the stream (e.g. active bursts only).
pub fn add_awgn_with_signal_power(
    x: &[Complex64],
    signal_power: f64,
    noise: &NoiseSpec,
) -> Vec<Complex64> {
    let noise_power = signal_power * libm::pow(10.0, -noise.snr_db / 10.0);
    let sigma = libm::sqrt(noise_power);
    let mut rng = Rng::new(noise.seed);
    x.iter().map(|&s| s + rng.next_complex_normal() * sigma).collect()
}

/// Scenario description for a simulated capture.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub label: String,
    pub bursts: usize,
    pub tsc_id: u8,
    /// CIR template; every burst draws its channel around these taps.
    pub template: Vec<Complex64>,
    /// RMS magnitude of the per-burst complex Gaussian perturbation added
    /// to each tap. Zero keeps the channel fixed across bursts.
    pub tap_spread: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub oversample: usize,
    pub guard_amplitude: f64,
    /// Emit one guard period before the first burst so every burst is
    /// bracketed by guards. Disable to get the bare concatenation.
    pub lead_in_guard: bool,
}

impl ScenarioSpec {
    pub fn new(label: &str, bursts: usize, template: Vec<Complex64>, snr_db: f64, seed: u64) -> Self {
        ScenarioSpec {
            label: String::from(label),
            bursts,
            tsc_id: 0,
            template,
            tap_spread: 0.0,
            snr_db,
            seed,
            oversample: 1,
            guard_amplitude: 0.0,
            lead_in_guard: true,
        }
    }
}

/// A simulated capture: the noisy stream plus per-burst ground truth.
#[derive(Debug, Clone)]
pub struct SimulatedCapture {
    pub stream: IqStream,
    /// True CIR for each burst, in emission order.
    pub truth: Vec<Cir>,
    /// Half-open active sample span of each burst within the stream.
    pub boundaries: Vec<(usize, usize)>,
}

/// Synthesize a burst train through per-burst channels with AWGN.
///
/// Draw order from the seed is fixed: per burst first the 114 data bits,
/// then one complex perturbation per tap; noise samples are drawn last,
/// one complex normal per output sample. SNR is defined over the active
/// burst spans only (guards excluded).
pub fn simulate_capture(spec: &ScenarioSpec) -> Result<SimulatedCapture> {
    if spec.bursts == 0 {
        return Err(Error::InvalidArgument("burst count must be positive".into()));
    }
    if spec.template.is_empty() {
        return Err(Error::InvalidArgument("CIR template needs at least one tap".into()));
    }
    if spec.oversample < 1 {
        return Err(Error::InvalidArgument("oversample must be >= 1".into()));
    }
    let os = spec.oversample;
    let cl = spec.template.len();
    let mut rng = Rng::new(spec.seed);
    let mut modulator = Modulator::new(os, spec.guard_amplitude)?;

    // Clean (pre-channel) timeline and burst spans.
    let mut clean = Vec::new();
    let mut spans = Vec::with_capacity(spec.bursts);
    let mut truth = Vec::with_capacity(spec.bursts);
    if spec.lead_in_guard {
        modulator.push_guard(&mut clean);
    }
    let per_component = spec.tap_spread * core::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..spec.bursts {
        let data: Vec<bool> = (0..INFO_BITS).map(|_| rng.bit()).collect();
        let burst = build_burst(&data, spec.tsc_id, &[false, false])?;
        spans.push(modulator.push_burst(&burst, &mut clean));
        let taps: Vec<Complex64> = spec
            .template
            .iter()
            .map(|&t| {
                if spec.tap_spread == 0.0 {
                    t
                } else {
                    let (re, im) = rng.next_normal_pair();
                    t + Complex64::new(re, im) * per_component
                }
            })
            .collect();
        truth.push(Cir::new(taps)?);
    }

    // Per-burst convolution, overlap-added onto the shared timeline.
    // Guard samples are copied verbatim; each burst span is replaced by its
    // convolution with that burst's channel, whose tail spills into the
    // following guard.
    let tail = (cl - 1) * os;
    let mut out = vec![Complex64::new(0.0, 0.0); clean.len() + tail];
    for (i, &s) in clean.iter().enumerate() {
        out[i] = s;
    }
    for (span, cir) in spans.iter().zip(&truth) {
        let (start, end) = *span;
        // Remove the unconvolved copy of the burst before adding the
        // convolved one.
        for i in start..end {
            out[i] = Complex64::new(0.0, 0.0);
        }
        let h = cir.upsampled(os);
        let segment = &clean[start..end];
        for (k, &tap) in h.iter().enumerate() {
            if tap.norm_sqr() == 0.0 {
                continue;
            }
            for (i, &xi) in segment.iter().enumerate() {
                out[start + i + k] += tap * xi;
            }
        }
    }

    // Active-span signal power defines the SNR reference.
    let mut active_power = 0.0;
    let mut active_count = 0usize;
    for &(start, end) in &spans {
        for s in &out[start..end] {
            active_power += s.norm_sqr();
        }
        active_count += end - start;
    }
    let signal_power = active_power / active_count as f64;
    let noise_power = signal_power * libm::pow(10.0, -spec.snr_db / 10.0);
    let sigma = libm::sqrt(noise_power);
    for s in out.iter_mut() {
        *s += rng.next_complex_normal() * sigma;
    }

    Ok(SimulatedCapture {
        stream: IqStream::new(out, SYMBOL_RATE_HZ * os as f64),
        truth,
        boundaries: spans,
    })
}

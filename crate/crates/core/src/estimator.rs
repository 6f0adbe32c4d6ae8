//! Channel impulse response estimation from received training windows, by
//! least squares over the training convolution matrix or by sliding
//! correlation, plus the stream-level pipeline that turns a raw IQ capture
//! into a per-burst dataset.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::burst::{training_sequence, TRAINING_OFFSET};
use crate::dataset::{CaptureDataset, CaptureMethod};
use crate::error::{Error, Result};
use crate::iq::IqStream;
use crate::linalg::{lstsq, singular_values, CMat};
use crate::sync::{apply_freq_correction, detect_bursts, TrainingWindow};

/// Relative singular-value threshold below which the training matrix is
/// treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Convolution matrix of a known reference sequence: `(p + cl - 1) x cl`,
/// column `j` holding the reference shifted down by `j` rows with zero
/// fill.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzTrainingMatrix {
    mat: CMat,
    p: usize,
    cl: usize,
}

impl ToeplitzTrainingMatrix {
    pub fn rows(&self) -> usize {
        self.mat.rows
    }

    pub fn cols(&self) -> usize {
        self.cl
    }

    pub fn reference_len(&self) -> usize {
        self.p
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.mat.get(r, c)
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// `M h` for a tap vector.
    pub fn apply(&self, h: &[Complex64]) -> Vec<Complex64> {
        self.mat.matvec(h)
    }
}

/// Build the training convolution matrix from the first `p` entries of the
/// reference `m`, for a CIR of `cl` taps.
pub fn build_training_matrix(
    m: &[Complex64],
    p: usize,
    cl: usize,
) -> Result<ToeplitzTrainingMatrix> {
    if cl == 0 {
        return Err(Error::InvalidArgument("cl must be at least 1".into()));
    }
    if cl > p {
        return Err(Error::InvalidArgument(format!(
            "cl {cl} exceeds reference length {p}: system is underdetermined"
        )));
    }
    if m.len() < p {
        return Err(Error::InvalidArgument(format!(
            "reference holds {} symbols, need {p}",
            m.len()
        )));
    }
    let rows = p + cl - 1;
    let mut mat = CMat::zeros(rows, cl);
    for c in 0..cl {
        for (i, &sym) in m[..p].iter().enumerate() {
            mat.set(i + c, c, sym);
        }
    }
    Ok(ToeplitzTrainingMatrix { mat, p, cl })
}

/// Which estimator produced a CIR estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimationMethod {
    LeastSquares,
    Correlation,
}

impl From<EstimationMethod> for CaptureMethod {
    fn from(m: EstimationMethod) -> CaptureMethod {
        match m {
            EstimationMethod::LeastSquares => CaptureMethod::LeastSquares,
            EstimationMethod::Correlation => CaptureMethod::Correlation,
        }
    }
}

/// An estimated channel impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedCir {
    pub taps: Vec<Complex64>,
    pub method: EstimationMethod,
    /// Residual two-norm of the least-squares fit; zero for correlation.
    pub residual: f64,
}

impl EstimatedCir {
    /// Tap magnitudes, sqrt(I^2 + Q^2).
    pub fn magnitudes(&self) -> Vec<f64> {
        self.taps.iter().map(|t| t.norm()).collect()
    }
}

/// Least-squares CIR estimate: the tap vector minimizing `||y - M h||`,
/// equal to the pseudo-inverse solution `(M^H M)^-1 M^H y`. Rank-deficient
/// systems are rejected rather than regularized.
pub fn ls_estimate(y: &[Complex64], m: &ToeplitzTrainingMatrix) -> Result<EstimatedCir> {
    if y.len() != m.rows() {
        return Err(Error::InvalidArgument(format!(
            "window holds {} samples, matrix expects {}",
            y.len(),
            m.rows()
        )));
    }
    let sv = singular_values(&m.mat);
    let max_sv = sv.first().copied().unwrap_or(0.0);
    if max_sv == 0.0 || sv.last().copied().unwrap_or(0.0) < RANK_TOL * max_sv {
        return Err(Error::SingularSystem);
    }
    let (taps, residual) = lstsq(&m.mat, y)?;
    Ok(EstimatedCir { taps, method: EstimationMethod::LeastSquares, residual })
}

/// Correlation CIR estimate: normalized cross-correlation of the window
/// against the known training symbols at lags `0..cl`, scaled by the
/// sequence energy so an identity channel yields a unit first tap.
pub fn correlation_estimate(
    y: &[Complex64],
    training: &[Complex64],
    cl: usize,
) -> Result<EstimatedCir> {
    if training.is_empty() {
        return Err(Error::InvalidArgument("training sequence is empty".into()));
    }
    if y.len() < training.len() {
        return Err(Error::InvalidArgument(format!(
            "window holds {} samples, shorter than the {}-symbol training sequence",
            y.len(),
            training.len()
        )));
    }
    let max_cl = y.len() - training.len() + 1;
    if cl == 0 || cl > max_cl {
        return Err(Error::InvalidArgument(format!(
            "cl {cl} out of range 1..={max_cl} for this window"
        )));
    }
    let energy: f64 = training.iter().map(|t| t.norm_sqr()).sum();
    let mut taps = Vec::with_capacity(cl);
    for lag in 0..cl {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &t) in training.iter().enumerate() {
            acc += t.conj() * y[lag + i];
        }
        taps.push(acc / energy);
    }
    Ok(EstimatedCir { taps, method: EstimationMethod::Correlation, residual: 0.0 })
}

/// Configuration for the stream pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    pub method: EstimationMethod,
    pub window: TrainingWindow,
    pub cl: usize,
    pub tsc_id: u8,
    pub oversample: usize,
    /// Guard decision level as a fraction of mean stream power.
    pub power_threshold: f64,
    /// Known carrier offset to remove before any processing.
    pub freq_offset_hz: Option<f64>,
    pub label: String,
}

impl StreamConfig {
    pub fn new(method: EstimationMethod, window: TrainingWindow, cl: usize, tsc_id: u8) -> Self {
        StreamConfig {
            method,
            window,
            cl,
            tsc_id,
            oversample: 1,
            power_threshold: 0.2,
            freq_offset_hz: None,
            label: String::from("capture"),
        }
    }
}

/// Run sync, extraction, and estimation over a whole stream: one dataset
/// row per accepted burst, bursts failing the guard rule skipped.
pub fn estimate_stream(stream: &IqStream, config: &StreamConfig) -> Result<CaptureDataset> {
    if config.cl == 0 {
        return Err(Error::InvalidArgument("cl must be at least 1".into()));
    }
    let os = config.oversample.max(1);
    let tsc = training_sequence(config.tsc_id)?;
    let full_symbols = tsc.symbols();

    // Reference symbols and window geometry for the chosen method.
    let (ref_symbols, p) = match config.window {
        TrainingWindow::Full26 => (full_symbols.clone(), 26),
        TrainingWindow::Central16 => (tsc.core_symbols(), 16),
    };
    let matrix = match config.method {
        EstimationMethod::LeastSquares => Some(build_training_matrix(&ref_symbols, p, config.cl)?),
        EstimationMethod::Correlation => None,
    };

    let corrected;
    let samples: &[Complex64] = match config.freq_offset_hz {
        Some(offset) => {
            corrected = apply_freq_correction(&stream.samples, offset, stream.sample_rate_hz);
            &corrected
        }
        None => &stream.samples,
    };

    let boundaries = detect_bursts(samples, os, config.power_threshold);
    let mut rows = Vec::new();
    let mut indices = Vec::new();
    for (burst_idx, boundary) in boundaries.iter().enumerate() {
        // Anchor the training sequence by correlation in a small window
        // around its nominal position; this decouples symbol alignment
        // from boundary jitter, which can reach a few samples when heavy
        // multipath bleeds into the guards.
        let nominal = boundary.start_sample + TRAINING_OFFSET * os;
        let Some(anchor) = anchor_training(samples, &full_symbols, nominal, 5 * os, os) else {
            continue;
        };

        let window_start = match config.window {
            TrainingWindow::Full26 => anchor,
            TrainingWindow::Central16 => anchor + 5 * os,
        };
        let taps = match config.method {
            EstimationMethod::LeastSquares => {
                let matrix = matrix.as_ref().unwrap();
                let span = p + config.cl - 1;
                let Some(window) = symbol_spaced(samples, window_start, span, os) else {
                    continue;
                };
                match ls_estimate(&window, matrix) {
                    Ok(est) => est.taps,
                    Err(Error::SingularSystem) => return Err(Error::SingularSystem),
                    Err(_) => continue,
                }
            }
            EstimationMethod::Correlation => {
                let span = 26 + config.cl - 1;
                let Some(window) = symbol_spaced(samples, anchor, span, os) else {
                    continue;
                };
                correlation_estimate(&window, &full_symbols, config.cl)?.taps
            }
        };
        rows.push(taps);
        indices.push(burst_idx);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut dataset = CaptureDataset::new(
        config.label.clone(),
        config.method.into(),
        config.tsc_id,
        config.cl,
        rows,
    )?;
    dataset.burst_indices = indices;
    Ok(dataset)
}

/// Samples at symbol spacing: `count` samples starting at `start`, one per
/// `oversample` step. None when the span leaves the stream.
fn symbol_spaced(x: &[Complex64], start: usize, count: usize, os: usize) -> Option<Vec<Complex64>> {
    let last = start.checked_add((count - 1) * os)?;
    if last >= x.len() {
        return None;
    }
    Some((0..count).map(|i| x[start + i * os]).collect())
}

/// Correlation peak of the known training symbols near its nominal sample
/// position; returns the refined anchor.
fn anchor_training(
    x: &[Complex64],
    training: &[Complex64],
    nominal: usize,
    slack: usize,
    os: usize,
) -> Option<usize> {
    let lo = nominal.saturating_sub(slack);
    let hi = nominal + slack;
    let mut best: Option<(usize, f64)> = None;
    for lag in lo..=hi {
        let Some(window) = symbol_spaced(x, lag, training.len(), os) else {
            continue;
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, s) in training.iter().zip(&window) {
            acc += t.conj() * s;
        }
        let metric = acc.norm_sqr();
        if best.is_none_or(|(_, b)| metric > b) {
            best = Some((lag, metric));
        }
    }
    best.map(|(lag, _)| lag)
}

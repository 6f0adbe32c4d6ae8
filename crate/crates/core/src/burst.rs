//! GSM-style normal-burst structure and baseband synthesis.
//!
//! A normal burst carries 148 bits: 3 tail, 57 data, 1 flag, 26 training,
//! 1 flag, 57 data, 3 tail, followed by a guard period of exactly 33/4
//! symbol durations. Modulation here is a memoryless antipodal map with
//! rectangular pulses (bit 0 -> +1, bit 1 -> -1); the estimation math
//! downstream only needs known unit-modulus symbols, not GMSK fidelity.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iq::IqStream;

pub const TAIL_BITS: usize = 3;
pub const DATA_HALF_BITS: usize = 57;
pub const TRAINING_BITS: usize = 26;
pub const INFO_BITS: usize = 2 * DATA_HALF_BITS;
/// Total bits in a serialized burst: 3 + 57 + 1 + 26 + 1 + 57 + 3.
pub const BURST_BITS: usize = 148;
/// Bit offset of the training sequence inside the burst.
pub const TRAINING_OFFSET: usize = TAIL_BITS + DATA_HALF_BITS + 1;
/// The central training window used for equalization: 16 bits at offset 5.
pub const TRAINING_CORE_OFFSET: usize = 5;
pub const TRAINING_CORE_BITS: usize = 16;
/// Guard duration in symbol periods, as an exact rational: 33/4 = 8.25.
pub const GUARD_NUM: usize = 33;
pub const GUARD_DEN: usize = 4;
/// Nominal symbol rate: 156.25 symbol periods per 577 us timeslot,
/// i.e. 1625/6 kHz.
pub const SYMBOL_RATE_HZ: f64 = 1_625_000.0 / 6.0;

/// The eight standard 26-bit training sequence codes. Each code is a
/// cyclic extension of its central 16 bits: the first five bits repeat the
/// core's last five and the last five repeat the core's first five.
const TSC_TABLE: [[u8; TRAINING_BITS]; 8] = [
    [0, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1],
    [0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1],
    [0, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1, 1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 1, 0],
    [0, 1, 0, 0, 0, 1, 1, 1, 1, 0, 1, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1, 0],
    [0, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0, 1, 0, 1, 1],
    [0, 1, 0, 0, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 0, 1, 0],
    [1, 0, 1, 0, 0, 1, 1, 1, 1, 1, 0, 1, 1, 0, 0, 0, 1, 0, 1, 0, 0, 1, 1, 1, 1, 1],
    [1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0],
];

/// Antipodal bit-to-symbol map: 0 -> +1+0j, 1 -> -1+0j. Unit modulus and
/// injective by construction.
#[inline]
pub fn bit_symbol(bit: bool) -> Complex64 {
    if bit {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// A known 26-bit training sequence and its symbol form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSequence {
    pub tsc_id: u8,
    pub bits: [bool; TRAINING_BITS],
}

impl TrainingSequence {
    pub fn symbols(&self) -> Vec<Complex64> {
        self.bits.iter().map(|&b| bit_symbol(b)).collect()
    }

    /// The central 16 bits (offset 5).
    pub fn core_bits(&self) -> &[bool] {
        &self.bits[TRAINING_CORE_OFFSET..TRAINING_CORE_OFFSET + TRAINING_CORE_BITS]
    }

    pub fn core_symbols(&self) -> Vec<Complex64> {
        self.core_bits().iter().map(|&b| bit_symbol(b)).collect()
    }
}

/// Standard training sequence for a TSC id in 0..=7.
pub fn training_sequence(tsc_id: u8) -> Result<TrainingSequence> {
    if tsc_id > 7 {
        return Err(Error::InvalidArgument(format!("tsc_id {tsc_id} out of range 0..=7")));
    }
    let mut bits = [false; TRAINING_BITS];
    for (b, &v) in bits.iter_mut().zip(&TSC_TABLE[tsc_id as usize]) {
        *b = v == 1;
    }
    Ok(TrainingSequence { tsc_id, bits })
}

/// One normal burst. Tail bits are always zero and are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalBurst {
    pub data_a: [bool; DATA_HALF_BITS],
    pub flag_a: bool,
    pub training: [bool; TRAINING_BITS],
    pub flag_b: bool,
    pub data_b: [bool; DATA_HALF_BITS],
}

/// Assemble a burst from 114 data bits, a TSC id, and the two stealing
/// flags.
pub fn build_burst(data: &[bool], tsc_id: u8, flags: &[bool]) -> Result<NormalBurst> {
    if data.len() != INFO_BITS {
        return Err(Error::InvalidArgument(format!(
            "data must be {INFO_BITS} bits, got {}",
            data.len()
        )));
    }
    if flags.len() != 2 {
        return Err(Error::InvalidArgument(format!("flags must be 2 bits, got {}", flags.len())));
    }
    let training = training_sequence(tsc_id)?;
    let mut data_a = [false; DATA_HALF_BITS];
    let mut data_b = [false; DATA_HALF_BITS];
    data_a.copy_from_slice(&data[..DATA_HALF_BITS]);
    data_b.copy_from_slice(&data[DATA_HALF_BITS..]);
    Ok(NormalBurst {
        data_a,
        flag_a: flags[0],
        training: training.bits,
        flag_b: flags[1],
        data_b,
    })
}

impl NormalBurst {
    /// Serialize to the 148-bit wire layout.
    pub fn serialize_bits(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(BURST_BITS);
        bits.extend([false; TAIL_BITS]);
        bits.extend_from_slice(&self.data_a);
        bits.push(self.flag_a);
        bits.extend_from_slice(&self.training);
        bits.push(self.flag_b);
        bits.extend_from_slice(&self.data_b);
        bits.extend([false; TAIL_BITS]);
        bits
    }

    /// Inverse of [`NormalBurst::serialize_bits`].
    pub fn parse_bits(bits: &[bool]) -> Result<NormalBurst> {
        if bits.len() != BURST_BITS {
            return Err(Error::InvalidArgument(format!(
                "burst must be {BURST_BITS} bits, got {}",
                bits.len()
            )));
        }
        let mut data_a = [false; DATA_HALF_BITS];
        let mut training = [false; TRAINING_BITS];
        let mut data_b = [false; DATA_HALF_BITS];
        let mut pos = TAIL_BITS;
        data_a.copy_from_slice(&bits[pos..pos + DATA_HALF_BITS]);
        pos += DATA_HALF_BITS;
        let flag_a = bits[pos];
        pos += 1;
        training.copy_from_slice(&bits[pos..pos + TRAINING_BITS]);
        pos += TRAINING_BITS;
        let flag_b = bits[pos];
        pos += 1;
        data_b.copy_from_slice(&bits[pos..pos + DATA_HALF_BITS]);
        Ok(NormalBurst { data_a, flag_a, training, flag_b, data_b })
    }

    pub fn extract_training(&self) -> [bool; TRAINING_BITS] {
        self.training
    }

    /// Symbols of the full 148-bit burst.
    pub fn symbols(&self) -> Vec<Complex64> {
        self.serialize_bits().iter().map(|&b| bit_symbol(b)).collect()
    }
}

/// Streaming modulator that carries the fractional guard remainder across
/// bursts, so long multi-burst timelines stay aligned to 156.25 symbol
/// periods per burst.
#[derive(Debug, Clone)]
pub struct Modulator {
    oversample: usize,
    guard_amplitude: f64,
    /// Accumulated guard duration in quarter samples.
    guard_quarters: usize,
}

impl Modulator {
    pub fn new(oversample: usize, guard_amplitude: f64) -> Result<Self> {
        if oversample < 1 {
            return Err(Error::InvalidArgument("oversample must be >= 1".into()));
        }
        Ok(Modulator { oversample, guard_amplitude, guard_quarters: 0 })
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    /// Append one burst's active samples followed by its guard period.
    /// Returns the half-open active span within `out`.
    pub fn push_burst(&mut self, burst: &NormalBurst, out: &mut Vec<Complex64>) -> (usize, usize) {
        let start = out.len();
        for bit in burst.serialize_bits() {
            let sym = bit_symbol(bit);
            for _ in 0..self.oversample {
                out.push(sym);
            }
        }
        let end = out.len();
        self.push_guard(out);
        (start, end)
    }

    /// Append one guard period (33/4 symbols), emitting whole samples and
    /// carrying the remainder.
    pub fn push_guard(&mut self, out: &mut Vec<Complex64>) {
        self.guard_quarters += GUARD_NUM * self.oversample;
        let whole = self.guard_quarters / GUARD_DEN;
        self.guard_quarters %= GUARD_DEN;
        let g = Complex64::new(self.guard_amplitude, 0.0);
        for _ in 0..whole {
            out.push(g);
        }
    }
}

/// One-shot modulation of a single burst: active samples then the guard,
/// with the fractional remainder simply dropped.
pub fn modulate(burst: &NormalBurst, oversample: usize, guard_amplitude: f64) -> Result<IqStream> {
    let mut modulator = Modulator::new(oversample, guard_amplitude)?;
    let mut samples = Vec::with_capacity((BURST_BITS + 9) * oversample);
    modulator.push_burst(burst, &mut samples);
    Ok(IqStream { samples, sample_rate_hz: SYMBOL_RATE_HZ * oversample as f64 })
}

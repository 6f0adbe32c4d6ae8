//! Binary IQ files: a small self-describing header followed by
//! interleaved little-endian f32 sample pairs.
//!
//! Layout (all little endian):
//!
//! ```text
//! offset 0   6 bytes   magic "SNDRIQ"
//! offset 6   u16       format version (1)
//! offset 8   f64       sample rate in Hz
//! offset 16  u32       oversampling factor
//! offset 20  u32       scenario-id byte length S
//! offset 24  S bytes   scenario id, UTF-8
//! ...        u64       sample count N
//! ...        8N bytes  N samples as f32 re, f32 im
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use sounder_core::iq::IqStream;

use crate::error::{CliError, CliResult};

const MAGIC: &[u8; 6] = b"SNDRIQ";
const VERSION: u16 = 1;

/// An IQ stream plus the header metadata it was stored with.
#[derive(Debug, Clone, PartialEq)]
pub struct IqFile {
    pub stream: IqStream,
    pub oversample: u32,
    pub scenario: String,
}

pub fn iq_to_bytes(file: &IqFile) -> Vec<u8> {
    let n = file.stream.samples.len();
    let id = file.scenario.as_bytes();
    let mut out = Vec::with_capacity(32 + id.len() + 8 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&file.stream.sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&file.oversample.to_le_bytes());
    out.extend_from_slice(&(id.len() as u32).to_le_bytes());
    out.extend_from_slice(id);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for s in &file.stream.samples {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    out
}

pub fn write_iq(path: &Path, file: &IqFile) -> CliResult<()> {
    fs::write(path, iq_to_bytes(file)).map_err(|e| CliError::io(path, e))
}

pub fn iq_from_bytes(bytes: &[u8], path: &Path) -> CliResult<IqFile> {
    let err = |offset: usize, msg: &str| {
        CliError::Usage(format!("{}: {msg} (byte offset {offset})", path.display()))
    };
    let need = |offset: usize, len: usize| -> CliResult<&[u8]> {
        bytes
            .get(offset..offset + len)
            .ok_or_else(|| err(offset, "file truncated"))
    };

    if need(0, 6)? != MAGIC {
        return Err(err(0, "not a SNDRIQ file"));
    }
    let version = u16::from_le_bytes(need(6, 2)?.try_into().unwrap());
    if version != VERSION {
        return Err(err(6, &format!("unsupported version {version}, expected {VERSION}")));
    }
    let sample_rate_hz = f64::from_le_bytes(need(8, 8)?.try_into().unwrap());
    let oversample = u32::from_le_bytes(need(16, 4)?.try_into().unwrap());
    let id_len = u32::from_le_bytes(need(20, 4)?.try_into().unwrap()) as usize;
    let scenario = String::from_utf8(need(24, id_len)?.to_vec())
        .map_err(|_| err(24, "scenario id is not UTF-8"))?;
    let count_off = 24 + id_len;
    let n = u64::from_le_bytes(need(count_off, 8)?.try_into().unwrap()) as usize;
    let body_off = count_off + 8;
    let body = &bytes[body_off.min(bytes.len())..];
    if body.len() != 8 * n {
        return Err(err(
            body_off,
            &format!(
                "body holds {} bytes ({} floats), header declares {n} samples ({} floats)",
                body.len(),
                body.len() / 4,
                2 * n
            ),
        ));
    }
    let mut samples = Vec::with_capacity(n);
    for pair in body.chunks_exact(8) {
        let re = f32::from_le_bytes(pair[0..4].try_into().unwrap());
        let im = f32::from_le_bytes(pair[4..8].try_into().unwrap());
        samples.push(Complex64::new(re as f64, im as f64));
    }
    Ok(IqFile { stream: IqStream::new(samples, sample_rate_hz), oversample, scenario })
}

pub fn read_iq(path: &Path) -> CliResult<IqFile> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    iq_from_bytes(&bytes, path)
}

//! Text capture files: one header block, one line of interleaved Re,Im
//! tap values per burst. Values are printed with Rust's shortest-exact
//! float formatting, so a read-back is bit identical.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use sounder_core::dataset::{CaptureDataset, CaptureMethod};

use crate::error::{CliError, CliResult};

const MAGIC: &str = "sounder-capture";
const VERSION: u32 = 1;

/// Serialize a dataset to the capture text format.
pub fn capture_to_string(dataset: &CaptureDataset, created_utc: &str) -> CliResult<String> {
    if dataset.is_empty() {
        return Err(CliError::Usage("refusing to write an empty capture".into()));
    }
    let mut out = String::new();
    out.push_str(&format!("{MAGIC} v{VERSION}\n"));
    out.push_str(&format!("label = {}\n", dataset.label));
    out.push_str(&format!("method = {}\n", dataset.method.name()));
    out.push_str(&format!("tsc = {}\n", dataset.tsc_id));
    out.push_str(&format!("cl = {}\n", dataset.cl));
    out.push_str(&format!("bursts = {}\n", dataset.len()));
    if let Some(snr) = dataset.snr_db {
        out.push_str(&format!("snr_db = {snr}\n"));
    }
    out.push_str(&format!("created_utc = {created_utc}\n"));
    out.push_str("---\n");
    for row in &dataset.rows {
        let mut first = true;
        for tap in row {
            if !first {
                out.push(' ');
            }
            out.push_str(&format!("{} {}", tap.re, tap.im));
            first = false;
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_capture(path: &Path, dataset: &CaptureDataset, created_utc: &str) -> CliResult<()> {
    let body = capture_to_string(dataset, created_utc)?;
    fs::write(path, body).map_err(|e| CliError::io(path, e))
}

/// Parse the capture text format; all header invariants are enforced.
pub fn capture_from_str(text: &str, path: &Path) -> CliResult<CaptureDataset> {
    let err = |line: usize, msg: String| {
        CliError::Usage(format!("{}:{line}: {msg}", path.display()))
    };
    let mut lines = text.lines().enumerate();

    let (_, first) = lines
        .next()
        .ok_or_else(|| err(1, "empty file".into()))?;
    let rest = first
        .strip_prefix(MAGIC)
        .ok_or_else(|| err(1, format!("not a {MAGIC} file")))?;
    let version: u32 = rest
        .trim()
        .strip_prefix('v')
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| err(1, "malformed version".into()))?;
    if version != VERSION {
        return Err(err(1, format!("unsupported version {version}, expected {VERSION}")));
    }

    let mut label = None;
    let mut method = None;
    let mut tsc = None;
    let mut cl: Option<usize> = None;
    let mut bursts: Option<usize> = None;
    let mut snr_db = None;
    let mut body_start = None;
    for (idx, line) in lines.by_ref() {
        let line_no = idx + 1;
        if line.trim() == "---" {
            body_start = Some(line_no);
            break;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "label" => label = Some(value.to_string()),
            "method" => {
                method = Some(CaptureMethod::parse(value).ok_or_else(|| {
                    err(line_no, format!("unknown method '{value}' (ls | corr | truth)"))
                })?)
            }
            "tsc" => {
                tsc = Some(value.parse::<u8>().map_err(|_| {
                    err(line_no, format!("tsc must be an integer 0..=7, got '{value}'"))
                })?)
            }
            "cl" => {
                cl = Some(value.parse().map_err(|_| {
                    err(line_no, format!("cl must be a positive integer, got '{value}'"))
                })?)
            }
            "bursts" => {
                bursts = Some(value.parse().map_err(|_| {
                    err(line_no, format!("bursts must be an integer, got '{value}'"))
                })?)
            }
            "snr_db" => {
                snr_db = Some(value.parse::<f64>().map_err(|_| {
                    err(line_no, format!("snr_db must be a number, got '{value}'"))
                })?)
            }
            "created_utc" => {}
            other => return Err(err(line_no, format!("unknown header key '{other}'"))),
        }
    }
    let body_line = body_start.ok_or_else(|| err(1, "missing '---' body separator".into()))?;
    let label = label.ok_or_else(|| err(body_line, "missing 'label' header".into()))?;
    let method = method.ok_or_else(|| err(body_line, "missing 'method' header".into()))?;
    let tsc = tsc.ok_or_else(|| err(body_line, "missing 'tsc' header".into()))?;
    let cl = cl.ok_or_else(|| err(body_line, "missing 'cl' header".into()))?;
    let bursts = bursts.ok_or_else(|| err(body_line, "missing 'bursts' header".into()))?;

    let mut rows = Vec::with_capacity(bursts);
    let offset_of_line = |line_no: usize| -> usize {
        text.lines().take(line_no - 1).map(|l| l.len() + 1).sum()
    };
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let values: Result<Vec<f64>, _> =
            line.split_whitespace().map(|t| t.parse::<f64>()).collect();
        let values = values.map_err(|_| {
            err(line_no, format!("malformed record at byte offset {}", offset_of_line(line_no)))
        })?;
        if values.len() != 2 * cl {
            return Err(err(
                line_no,
                format!(
                    "record holds {} values, expected {} (cl = {cl}); byte offset {}",
                    values.len(),
                    2 * cl,
                    offset_of_line(line_no)
                ),
            ));
        }
        let row: Vec<Complex64> =
            values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        rows.push(row);
    }
    if rows.len() != bursts {
        return Err(CliError::Usage(format!(
            "{}: header declares {bursts} bursts but the body holds {} records",
            path.display(),
            rows.len()
        )));
    }
    let mut dataset = CaptureDataset::new(label, method, tsc, cl, rows)
        .map_err(CliError::from)?;
    dataset.snr_db = snr_db;
    Ok(dataset)
}

pub fn read_capture(path: &Path) -> CliResult<CaptureDataset> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    capture_from_str(&text, path)
}

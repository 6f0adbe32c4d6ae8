//! Flat key-value scenario configuration files with `#` comments.
//!
//! ```text
//! label = scene_a
//! bursts = 200
//! tsc = 0
//! taps = 1+0j 0.5-0.2j 0.1+0.05j
//! spread = 0.02
//! snr_db = 15
//! seed = 42
//! oversample = 1
//! guard_amplitude = 0
//! lead_in = true
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use sounder_core::channel::ScenarioSpec;

use crate::error::{CliError, CliResult};

/// Parse a complex literal: `1`, `-0.5`, `1+0.5j`, `-1-2j`, `0.25j`.
pub fn parse_complex(token: &str) -> Result<Complex64, String> {
    let t = token.trim();
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    if let Some(body) = t.strip_suffix(['j', 'J']) {
        // Split at the last sign that is not the leading one and not part
        // of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let c = bytes[i] as char;
            if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let re: f64 =
                    body[..i].parse().map_err(|_| format!("bad real part in '{t}'"))?;
                let im_str = &body[i..];
                let im: f64 = if im_str == "+" || im_str == "-" {
                    format!("{im_str}1").parse().unwrap()
                } else {
                    im_str.parse().map_err(|_| format!("bad imaginary part in '{t}'"))?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() || body == "+" || body == "-" {
                    format!("{body}1").parse().unwrap()
                } else {
                    body.parse().map_err(|_| format!("bad imaginary part in '{t}'"))?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().map_err(|_| format!("bad real value '{t}'"))?;
        Ok(Complex64::new(re, 0.0))
    }
}

/// Parse a scenario config, reporting the offending line and field on
/// failure.
pub fn scenario_from_str(text: &str, path: &Path) -> CliResult<ScenarioSpec> {
    let err = |line: usize, msg: String| {
        CliError::Usage(format!("{}:{line}: {msg}", path.display()))
    };

    let default_label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let mut label = default_label;
    let mut bursts = None;
    let mut tsc = None;
    let mut taps: Option<Vec<Complex64>> = None;
    let mut spread = 0.0f64;
    let mut snr_db = None;
    let mut seed = None;
    let mut oversample = 1usize;
    let mut guard_amplitude = 0.0f64;
    let mut lead_in = true;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "label" => label = value.to_string(),
            "bursts" => {
                bursts = Some(value.parse::<usize>().map_err(|_| {
                    err(line_no, format!("field 'bursts' must be a positive integer, got '{value}'"))
                })?)
            }
            "tsc" => {
                tsc = Some(value.parse::<u8>().map_err(|_| {
                    err(line_no, format!("field 'tsc' must be an integer 0..=7, got '{value}'"))
                })?)
            }
            "taps" => {
                let parsed: Result<Vec<Complex64>, String> =
                    value.split_whitespace().map(parse_complex).collect();
                taps = Some(parsed.map_err(|m| err(line_no, format!("field 'taps': {m}")))?);
            }
            "spread" => {
                spread = value.parse().map_err(|_| {
                    err(line_no, format!("field 'spread' must be a number, got '{value}'"))
                })?
            }
            "snr_db" => {
                snr_db = Some(value.parse::<f64>().map_err(|_| {
                    err(line_no, format!("field 'snr_db' must be a number, got '{value}'"))
                })?)
            }
            "seed" => {
                seed = Some(value.parse::<u64>().map_err(|_| {
                    err(line_no, format!("field 'seed' must be an unsigned integer, got '{value}'"))
                })?)
            }
            "oversample" => {
                oversample = value.parse().map_err(|_| {
                    err(line_no, format!("field 'oversample' must be a positive integer, got '{value}'"))
                })?
            }
            "guard_amplitude" => {
                guard_amplitude = value.parse().map_err(|_| {
                    err(line_no, format!("field 'guard_amplitude' must be a number, got '{value}'"))
                })?
            }
            "lead_in" => {
                lead_in = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => {
                        return Err(err(
                            line_no,
                            format!("field 'lead_in' must be true or false, got '{value}'"),
                        ))
                    }
                }
            }
            other => return Err(err(line_no, format!("unknown field '{other}'"))),
        }
    }

    let missing = |field: &str| {
        CliError::Usage(format!("{}: missing required field '{field}'", path.display()))
    };
    let bursts = bursts.ok_or_else(|| missing("bursts"))?;
    let tsc = tsc.ok_or_else(|| missing("tsc"))?;
    let taps = taps.ok_or_else(|| missing("taps"))?;
    let snr_db = snr_db.ok_or_else(|| missing("snr_db"))?;
    let seed = seed.ok_or_else(|| missing("seed"))?;

    Ok(ScenarioSpec {
        label,
        bursts,
        tsc_id: tsc,
        template: taps,
        tap_spread: spread,
        snr_db,
        seed,
        oversample,
        guard_amplitude,
        lead_in_guard: lead_in,
    })
}

pub fn read_scenario(path: &Path) -> CliResult<ScenarioSpec> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    scenario_from_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1").unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(parse_complex("-0.5").unwrap(), Complex64::new(-0.5, 0.0));
        assert_eq!(parse_complex("1+0.5j").unwrap(), Complex64::new(1.0, 0.5));
        assert_eq!(parse_complex("-1-2j").unwrap(), Complex64::new(-1.0, -2.0));
        assert_eq!(parse_complex("0.25j").unwrap(), Complex64::new(0.0, 0.25));
        assert_eq!(parse_complex("-j").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2e-4j").unwrap(), Complex64::new(1e-3, 2e-4));
        assert!(parse_complex("nonsense").is_err());
    }

    #[test]
    fn full_scenario_parses() {
        let text = "\
# two-path scene
label = demo
bursts = 10
tsc = 3
taps = 1+0j 0.5-0.2j
spread = 0.05
snr_db = 15
seed = 7
oversample = 2
guard_amplitude = 0.01
lead_in = false
";
        let s = scenario_from_str(text, &PathBuf::from("demo.conf")).unwrap();
        assert_eq!(s.label, "demo");
        assert_eq!(s.bursts, 10);
        assert_eq!(s.tsc_id, 3);
        assert_eq!(s.template.len(), 2);
        assert_eq!(s.tap_spread, 0.05);
        assert_eq!(s.snr_db, 15.0);
        assert_eq!(s.seed, 7);
        assert_eq!(s.oversample, 2);
        assert_eq!(s.guard_amplitude, 0.01);
        assert!(!s.lead_in_guard);
    }

    #[test]
    fn missing_field_names_the_field() {
        let text = "bursts = 10\ntsc = 0\ntaps = 1\nseed = 1\n";
        let e = scenario_from_str(text, &PathBuf::from("x.conf")).unwrap_err();
        assert!(e.to_string().contains("snr_db"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn bad_line_reports_position() {
        let text = "bursts = 10\nwhat is this\n";
        let e = scenario_from_str(text, &PathBuf::from("x.conf")).unwrap_err();
        assert!(e.to_string().contains("x.conf:2"), "{e}");
    }

    #[test]
    fn label_defaults_to_file_stem() {
        let text = "bursts = 1\ntsc = 0\ntaps = 1\nsnr_db = 10\nseed = 1\n";
        let s = scenario_from_str(text, &PathBuf::from("/tmp/scene_b.conf")).unwrap();
        assert_eq!(s.label, "scene_b");
    }
}

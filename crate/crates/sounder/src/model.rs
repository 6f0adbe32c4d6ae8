//! Classifier model files: the PCA basis plus per-label centroids, as
//! diff-able text. Labels must be whitespace-free tokens.

use std::fs;
use std::path::Path;

use sounder_core::linalg::Mat;
use sounder_core::pca::{CentroidClassifier, PcaModel};

use crate::error::{CliError, CliResult};

const MAGIC: &str = "sounder-classifier";
const VERSION: u32 = 1;

pub fn model_to_string(clf: &CentroidClassifier) -> CliResult<String> {
    for (label, _) in &clf.centroids {
        if label.chars().any(|c| c.is_whitespace() || c == '=') {
            return Err(CliError::Usage(format!(
                "label '{label}' cannot be persisted: labels must be single tokens"
            )));
        }
    }
    let model = &clf.model;
    let k = model.columns();
    let l = model.components();
    let mut out = String::new();
    out.push_str(&format!("{MAGIC} v{VERSION}\n"));
    out.push_str(&format!("dim = {}\n", clf.dim));
    out.push_str(&format!("columns = {k}\n"));
    out.push_str(&format!("components = {l}\n"));
    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    let flagged: Vec<String> =
        model.flagged_columns.iter().map(usize::to_string).collect();
    out.push_str(&format!("flagged = {}\n", flagged.join(" ")));
    out.push_str(&format!("means = {}\n", join(&model.column_means)));
    out.push_str(&format!("scales = {}\n", join(&model.column_scales)));
    out.push_str(&format!("singulars = {}\n", join(&model.singular_values)));
    for r in 0..k {
        out.push_str(&format!("v{r} = {}\n", join(model.v.row(r))));
    }
    for (label, centroid) in &clf.centroids {
        out.push_str(&format!("centroid {label} = {}\n", join(centroid)));
    }
    Ok(out)
}

pub fn write_model(path: &Path, clf: &CentroidClassifier) -> CliResult<()> {
    let body = model_to_string(clf)?;
    fs::write(path, body).map_err(|e| CliError::io(path, e))
}

pub fn model_from_str(text: &str, path: &Path) -> CliResult<CentroidClassifier> {
    let err = |line: usize, msg: String| {
        CliError::Usage(format!("{}:{line}: {msg}", path.display()))
    };
    let parse_floats = |line_no: usize, value: &str| -> CliResult<Vec<f64>> {
        value
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| err(line_no, format!("bad number '{t}'")))
            })
            .collect()
    };

    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
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

    let mut dim = None;
    let mut columns = None;
    let mut components = None;
    let mut flagged = Vec::new();
    let mut means = None;
    let mut scales = None;
    let mut singulars = None;
    let mut v_rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut centroids: Vec<(String, Vec<f64>)> = Vec::new();

    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(row) = key.strip_prefix('v').and_then(|r| r.parse::<usize>().ok()) {
            v_rows.push((row, parse_floats(line_no, value)?));
            continue;
        }
        if let Some(label) = key.strip_prefix("centroid ") {
            centroids.push((label.trim().to_string(), parse_floats(line_no, value)?));
            continue;
        }
        match key {
            "dim" => dim = value.parse::<usize>().ok(),
            "columns" => columns = value.parse::<usize>().ok(),
            "components" => components = value.parse::<usize>().ok(),
            "flagged" => {
                flagged = value
                    .split_whitespace()
                    .map(|t| t.parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| err(line_no, "bad flagged column index".into()))?
            }
            "means" => means = Some(parse_floats(line_no, value)?),
            "scales" => scales = Some(parse_floats(line_no, value)?),
            "singulars" => singulars = Some(parse_floats(line_no, value)?),
            other => return Err(err(line_no, format!("unknown key '{other}'"))),
        }
    }

    let whole = |what: &str| CliError::Usage(format!("{}: missing '{what}'", path.display()));
    let dim = dim.ok_or_else(|| whole("dim"))?;
    let k = columns.ok_or_else(|| whole("columns"))?;
    let l = components.ok_or_else(|| whole("components"))?;
    let means = means.ok_or_else(|| whole("means"))?;
    let scales = scales.ok_or_else(|| whole("scales"))?;
    let singulars = singulars.ok_or_else(|| whole("singulars"))?;
    if means.len() != k || scales.len() != k || singulars.len() != l {
        return Err(CliError::Usage(format!(
            "{}: header sizes disagree with vector lengths",
            path.display()
        )));
    }
    if v_rows.len() != k {
        return Err(CliError::Usage(format!(
            "{}: expected {k} v rows, found {}",
            path.display(),
            v_rows.len()
        )));
    }
    v_rows.sort_by_key(|(r, _)| *r);
    let mut v = Mat::zeros(k, l);
    for (r, row) in &v_rows {
        if row.len() != l {
            return Err(CliError::Usage(format!(
                "{}: v{r} holds {} values, expected {l}",
                path.display(),
                row.len()
            )));
        }
        for (c, &val) in row.iter().enumerate() {
            v.set(*r, c, val);
        }
    }
    if centroids.len() < 2 {
        return Err(CliError::Usage(format!(
            "{}: a classifier needs at least two centroids",
            path.display()
        )));
    }
    for (label, c) in &centroids {
        if c.len() != dim {
            return Err(CliError::Usage(format!(
                "{}: centroid '{label}' holds {} values, expected dim {dim}",
                path.display(),
                c.len()
            )));
        }
    }
    centroids.sort_by(|a, b| a.0.cmp(&b.0));

    Ok(CentroidClassifier {
        model: PcaModel {
            column_means: means,
            column_scales: scales,
            v,
            singular_values: singulars,
            flagged_columns: flagged,
        },
        dim,
        centroids,
    })
}

pub fn read_model(path: &Path) -> CliResult<CentroidClassifier> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    model_from_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use sounder_core::dataset::{CaptureDataset, CaptureMethod};
    use sounder_core::pca::train_classifier;
    use sounder_core::rng::Rng;
    use std::path::PathBuf;

    fn trained() -> CentroidClassifier {
        let mut rng = Rng::new(70);
        let mut cloud = |center: [f64; 3]| -> CaptureDataset {
            let rows: Vec<Vec<Complex64>> = (0..30)
                .map(|_| {
                    center
                        .iter()
                        .map(|&c| Complex64::new(c + 0.05 * rng.next_normal(), 0.0))
                        .collect()
                })
                .collect();
            CaptureDataset::new("x".into(), CaptureMethod::Correlation, 0, 3, rows).unwrap()
        };
        let a = cloud([1.0, 0.2, 0.1]);
        let b = cloud([0.1, 1.0, 0.4]);
        train_classifier(&[(&a, "a"), (&b, "b")], 2).unwrap()
    }

    #[test]
    fn model_round_trip_preserves_classification() {
        let clf = trained();
        let text = model_to_string(&clf).unwrap();
        let back = model_from_str(&text, &PathBuf::from("m")).unwrap();
        assert_eq!(back.dim, clf.dim);
        assert_eq!(back.centroids, clf.centroids);
        let mut rng = Rng::new(71);
        for _ in 0..20 {
            let row = [
                0.5 + rng.next_normal(),
                0.5 + rng.next_normal(),
                0.3 + rng.next_normal(),
            ];
            let a = clf.classify(&row).unwrap();
            let b = back.classify(&row).unwrap();
            assert_eq!(a.label, b.label);
            for (x, y) in a.distances.iter().zip(&b.distances) {
                assert_eq!(x.0, y.0);
                assert_eq!(x.1.to_bits(), y.1.to_bits());
            }
        }
    }

    #[test]
    fn foreign_file_rejected() {
        assert!(model_from_str("garbage", &PathBuf::from("m")).is_err());
    }

    #[test]
    fn whitespace_label_refused() {
        let mut clf = trained();
        clf.centroids[0].0 = "bad label".into();
        assert!(model_to_string(&clf).is_err());
    }
}

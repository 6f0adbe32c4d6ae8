//! SVD-based principal component analysis of capture datasets and
//! nearest-centroid scene classification.
//!
//! Datasets are stacked, z-scored per column (center by mean, scale by
//! standard deviation), and decomposed as `A_norm = U Sigma V^T`. Scores
//! are `F = A_norm V = U Sigma`; scenes are told apart by the per-label
//! centroid of the leading score dimensions.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::CaptureDataset;
use crate::error::{Error, Result};
use crate::linalg::{jacobi_svd, Mat};

/// A fitted PCA basis.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub column_means: Vec<f64>,
    pub column_scales: Vec<f64>,
    /// `K x L` right singular vectors, one component per column.
    pub v: Mat,
    /// Descending singular values of the normalized matrix.
    pub singular_values: Vec<f64>,
    /// Columns whose variance vanished; their scale is pinned to one.
    pub flagged_columns: Vec<usize>,
}

/// Model plus the training scores.
#[derive(Debug, Clone)]
pub struct PcaFit {
    pub model: PcaModel,
    /// `J x L` training scores (`A_norm V`).
    pub scores: Mat,
}

/// Scores of one labeled dataset in an existing basis.
#[derive(Debug, Clone)]
pub struct ProjectedDataset {
    pub label: String,
    pub scores: Mat,
}

impl PcaModel {
    pub fn components(&self) -> usize {
        self.singular_values.len()
    }

    pub fn columns(&self) -> usize {
        self.column_means.len()
    }

    /// Fraction of total variance captured by each component.
    pub fn explained_variance(&self) -> Vec<f64> {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        if total == 0.0 {
            return vec![0.0; self.singular_values.len()];
        }
        self.singular_values.iter().map(|s| s * s / total).collect()
    }

    fn normalize(&self, a: &Mat) -> Mat {
        let mut out = Mat::zeros(a.rows, a.cols);
        for r in 0..a.rows {
            for c in 0..a.cols {
                out.set(r, c, (a.get(r, c) - self.column_means[c]) / self.column_scales[c]);
            }
        }
        out
    }

    /// Project rows onto the basis: `F = normalize(A) V`.
    pub fn project(&self, a: &Mat) -> Result<Mat> {
        if a.cols != self.columns() {
            return Err(Error::InvalidArgument(format!(
                "matrix has {} columns, model expects {}",
                a.cols,
                self.columns()
            )));
        }
        Ok(self.normalize(a).matmul(&self.v))
    }

    pub fn project_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        let m = Mat::from_rows(&[row.to_vec()])?;
        Ok(self.project(&m)?.row(0).to_vec())
    }
}

/// Fit a PCA basis to a `J x K` matrix: z-score the columns, then take the
/// SVD. Zero-variance columns are flagged and given unit scale instead of
/// erroring.
pub fn fit_pca(a: &Mat) -> Result<PcaFit> {
    if a.rows < 2 || a.cols < 1 {
        return Err(Error::InvalidArgument(format!(
            "PCA needs at least 2 rows and 1 column, got {}x{}",
            a.rows, a.cols
        )));
    }
    if a.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix contains non-finite values".into()));
    }
    let j = a.rows;
    let k = a.cols;
    let mut means = vec![0.0; k];
    for r in 0..j {
        for c in 0..k {
            means[c] += a.get(r, c);
        }
    }
    for m in means.iter_mut() {
        *m /= j as f64;
    }
    let mut scales = vec![0.0; k];
    for r in 0..j {
        for c in 0..k {
            let d = a.get(r, c) - means[c];
            scales[c] += d * d;
        }
    }
    let mut flagged = Vec::new();
    for (c, s) in scales.iter_mut().enumerate() {
        // Sample standard deviation (1/(J-1)).
        *s = libm::sqrt(*s / (j - 1) as f64);
        if *s == 0.0 {
            *s = 1.0;
            flagged.push(c);
        }
    }

    let mut normalized = Mat::zeros(j, k);
    for r in 0..j {
        for c in 0..k {
            normalized.set(r, c, (a.get(r, c) - means[c]) / scales[c]);
        }
    }
    let mut svd = jacobi_svd(&normalized);

    // Sign convention: the largest-magnitude entry of each V column is
    // nonnegative, flipping scores to match.
    for c in 0..svd.v.cols {
        let mut lead = 0.0f64;
        for r in 0..svd.v.rows {
            let v = svd.v.get(r, c);
            if libm::fabs(v) > libm::fabs(lead) {
                lead = v;
            }
        }
        if lead < 0.0 {
            for r in 0..svd.v.rows {
                let v = svd.v.get(r, c);
                svd.v.set(r, c, -v);
            }
            for r in 0..svd.scores.rows {
                let v = svd.scores.get(r, c);
                svd.scores.set(r, c, -v);
            }
        }
    }

    Ok(PcaFit {
        model: PcaModel {
            column_means: means,
            column_scales: scales,
            v: svd.v,
            singular_values: svd.singular_values,
            flagged_columns: flagged,
        },
        scores: svd.scores,
    })
}

/// Nearest-centroid classifier over the leading PCA scores.
#[derive(Debug, Clone)]
pub struct CentroidClassifier {
    pub model: PcaModel,
    /// Number of leading score dimensions used for distances.
    pub dim: usize,
    /// Per-label centroids, sorted by label so distance ties resolve to
    /// the lexicographically first label.
    pub centroids: Vec<(String, Vec<f64>)>,
}

/// Classification of one observation row.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: String,
    /// Euclidean distance to every centroid, in centroid order.
    pub distances: Vec<(String, f64)>,
}

/// Fit PCA on the stacked labeled datasets and place one centroid per
/// label in the leading `dim` score dimensions.
pub fn train_classifier(
    datasets: &[(&CaptureDataset, &str)],
    dim: usize,
) -> Result<CentroidClassifier> {
    if datasets.is_empty() {
        return Err(Error::InvalidArgument("no datasets given".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dim must be at least 1".into()));
    }
    let k = datasets[0].0.cl;
    let mut labels: Vec<&str> = Vec::new();
    for (ds, label) in datasets {
        if ds.is_empty() {
            return Err(Error::InvalidArgument(format!("dataset '{label}' is empty")));
        }
        if ds.cl != k {
            return Err(Error::InvalidArgument(format!(
                "dataset '{label}' has {} columns, expected {k}",
                ds.cl
            )));
        }
        if !labels.contains(label) {
            labels.push(label);
        }
    }
    if labels.len() < 2 {
        return Err(Error::InvalidArgument("need at least two distinct labels".into()));
    }

    let mut stacked_rows: Vec<Vec<f64>> = Vec::new();
    let mut row_labels: Vec<&str> = Vec::new();
    for (ds, label) in datasets {
        let mags = ds.magnitude_matrix();
        for r in 0..mags.rows {
            stacked_rows.push(mags.row(r).to_vec());
            row_labels.push(label);
        }
    }
    let stacked = Mat::from_rows(&stacked_rows)?;
    let fit = fit_pca(&stacked)?;
    if dim > fit.model.components() {
        return Err(Error::InvalidArgument(format!(
            "dim {dim} exceeds the {} available components",
            fit.model.components()
        )));
    }

    labels.sort_unstable();
    let mut centroids = Vec::with_capacity(labels.len());
    for label in &labels {
        let mut centroid = vec![0.0; dim];
        let mut count = 0usize;
        for (r, row_label) in row_labels.iter().enumerate() {
            if row_label == label {
                for (d, c) in centroid.iter_mut().enumerate() {
                    *c += fit.scores.get(r, d);
                }
                count += 1;
            }
        }
        for c in centroid.iter_mut() {
            *c /= count as f64;
        }
        centroids.push((label.to_string(), centroid));
    }
    Ok(CentroidClassifier { model: fit.model, dim, centroids })
}

impl CentroidClassifier {
    /// Labels of any pair of coincident centroids, a degenerate but valid
    /// training outcome worth warning about.
    pub fn coincident_labels(&self) -> Option<(&str, &str)> {
        for i in 0..self.centroids.len() {
            for j in i + 1..self.centroids.len() {
                let d: f64 = self.centroids[i]
                    .1
                    .iter()
                    .zip(&self.centroids[j].1)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if libm::sqrt(d) < 1e-12 {
                    return Some((&self.centroids[i].0, &self.centroids[j].0));
                }
            }
        }
        None
    }

    /// Assign the label of the nearest centroid in PC space; ties resolve
    /// to the lexicographically first label.
    pub fn classify(&self, row: &[f64]) -> Result<Classification> {
        if row.len() != self.model.columns() {
            return Err(Error::InvalidArgument(format!(
                "row has {} values, model expects {}",
                row.len(),
                self.model.columns()
            )));
        }
        let projected = self.model.project_row(row)?;
        let mut distances = Vec::with_capacity(self.centroids.len());
        for (label, centroid) in &self.centroids {
            let d: f64 = centroid
                .iter()
                .zip(&projected[..self.dim])
                .map(|(c, p)| (c - p) * (c - p))
                .sum();
            distances.push((label.clone(), libm::sqrt(d)));
        }
        let best = distances
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        Ok(Classification { label: distances[best].0.clone(), distances })
    }
}

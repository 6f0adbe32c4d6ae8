//! Per-burst channel-estimate datasets, the unit of all downstream
//! statistical analysis.

use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// How the rows of a capture were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaptureMethod {
    LeastSquares,
    Correlation,
    /// Simulation ground truth.
    GroundTruth,
}

impl CaptureMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CaptureMethod::LeastSquares => "ls",
            CaptureMethod::Correlation => "corr",
            CaptureMethod::GroundTruth => "truth",
        }
    }

    pub fn parse(name: &str) -> Option<CaptureMethod> {
        match name {
            "ls" => Some(CaptureMethod::LeastSquares),
            "corr" => Some(CaptureMethod::Correlation),
            "truth" => Some(CaptureMethod::GroundTruth),
            _ => None,
        }
    }
}

/// A labeled matrix of per-burst channel estimates: one row of `cl` complex
/// taps per accepted burst. Magnitudes are derived on demand; the complex
/// values are what gets persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureDataset {
    pub label: String,
    pub method: CaptureMethod,
    pub tsc_id: u8,
    /// Scenario SNR when known (simulation provenance).
    pub snr_db: Option<f64>,
    pub cl: usize,
    pub rows: Vec<Vec<Complex64>>,
    /// Original burst index of each row within the source stream. Not
    /// persisted; reconstructed as 0..n on read.
    pub burst_indices: Vec<usize>,
}

impl CaptureDataset {
    pub fn new(
        label: String,
        method: CaptureMethod,
        tsc_id: u8,
        cl: usize,
        rows: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if cl == 0 {
            return Err(Error::InvalidArgument("cl must be positive".into()));
        }
        if rows.iter().any(|r| r.len() != cl) {
            return Err(Error::InvalidArgument("row width differs from cl".into()));
        }
        let burst_indices = (0..rows.len()).collect();
        Ok(CaptureDataset { label, method, tsc_id, snr_db: None, cl, rows, burst_indices })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// J x cl matrix of tap magnitudes.
    pub fn magnitude_matrix(&self) -> Mat {
        let mut m = Mat::zeros(self.rows.len(), self.cl);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, tap) in row.iter().enumerate() {
                m.set(r, c, tap.norm());
            }
        }
        m
    }

    /// Magnitudes of one tap index across all bursts.
    pub fn index_magnitudes(&self, index: usize) -> Result<Vec<f64>> {
        if index >= self.cl {
            return Err(Error::InvalidArgument(alloc::format!(
                "index {index} out of range for cl {}",
                self.cl
            )));
        }
        Ok(self.rows.iter().map(|r| r[index].norm()).collect())
    }

    /// All tap magnitudes pooled into one sample vector, row major.
    pub fn pooled_magnitudes(&self) -> Vec<f64> {
        self.rows.iter().flat_map(|r| r.iter().map(|t| t.norm())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cplx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn magnitudes_and_indexing() {
        let rows = vec![
            vec![cplx(3.0, 4.0), cplx(1.0, 0.0)],
            vec![cplx(0.0, 2.0), cplx(0.0, 0.0)],
        ];
        let ds = CaptureDataset::new("t".into(), CaptureMethod::Correlation, 0, 2, rows).unwrap();
        let m = ds.magnitude_matrix();
        assert_eq!(m.get(0, 0), 5.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(ds.index_magnitudes(1).unwrap(), vec![1.0, 0.0]);
        assert_eq!(ds.pooled_magnitudes(), vec![5.0, 1.0, 2.0, 0.0]);
        assert!(ds.index_magnitudes(2).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![cplx(1.0, 0.0)], vec![cplx(1.0, 0.0), cplx(2.0, 0.0)]];
        assert!(CaptureDataset::new("t".into(), CaptureMethod::LeastSquares, 0, 1, rows).is_err());
    }
}

//! Small dense linear algebra: just enough for the estimator and PCA.
//!
//! Everything is row-major over `Vec`. The sizes in this crate are tiny
//! (training matrices around 20 x 5, capture matrices around a few hundred
//! by 40), so simplicity and numerical robustness win over blocking.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            data.extend_from_slice(r);
        }
        Ok(Mat { rows: rows.len(), cols, data })
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    /// `self * x` for a column vector.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..self.cols {
                acc += self.get(r, c) * x[c];
            }
            out[r] = acc;
        }
        out
    }

    /// `self^H * x`.
    pub fn conj_transpose_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, x.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c] += self.get(r, c).conj() * x[r];
            }
        }
        out
    }

    fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }
}

/// Least-squares solve of `min ||y - M h||` by Householder QR.
///
/// Returns the solution and the residual two-norm. The caller is expected
/// to have checked conditioning (see [`singular_values`]); a zero pivot
/// still reports a singular system rather than dividing through.
pub fn lstsq(m: &CMat, y: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let rows = m.rows;
    let cols = m.cols;
    if y.len() != rows {
        return Err(Error::InvalidArgument(format!(
            "rhs length {} does not match {} rows",
            y.len(),
            rows
        )));
    }
    if rows < cols {
        return Err(Error::InvalidArgument(format!(
            "underdetermined system: {rows} rows < {cols} columns"
        )));
    }
    let mut a = m.clone();
    let mut b: Vec<Complex64> = y.to_vec();

    for k in 0..cols {
        // Householder vector for column k below the diagonal.
        let mut norm2 = 0.0;
        for r in k..rows {
            norm2 += a.get(r, k).norm_sqr();
        }
        let norm = libm::sqrt(norm2);
        if norm == 0.0 {
            return Err(Error::SingularSystem);
        }
        let akk = a.get(k, k);
        // alpha = -exp(i arg(a_kk)) * ||x||, so v = x - alpha e_k never cancels.
        let phase = if akk.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { akk / akk.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..rows).map(|r| a.get(r, k)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            // Column already reduced.
            continue;
        }
        let beta = 2.0 / vnorm2;

        // Apply H = I - beta v v^H to the remaining columns and to b.
        for c in k..cols {
            let mut dot = Complex64::new(0.0, 0.0);
            for (i, vr) in v.iter().enumerate() {
                dot += vr.conj() * a.get(k + i, c);
            }
            dot *= beta;
            for (i, vr) in v.iter().enumerate() {
                let cur = a.get(k + i, c);
                a.set(k + i, c, cur - dot * vr);
            }
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for (i, vr) in v.iter().enumerate() {
            dot += vr.conj() * b[k + i];
        }
        dot *= beta;
        for (i, vr) in v.iter().enumerate() {
            b[k + i] -= dot * vr;
        }
    }

    // Back substitution on the R factor.
    let mut h = vec![Complex64::new(0.0, 0.0); cols];
    for k in (0..cols).rev() {
        let mut acc = b[k];
        for c in k + 1..cols {
            acc -= a.get(k, c) * h[c];
        }
        let pivot = a.get(k, k);
        if pivot.norm() == 0.0 {
            return Err(Error::SingularSystem);
        }
        h[k] = acc / pivot;
    }
    let residual = libm::sqrt(b[cols..].iter().map(|z| z.norm_sqr()).sum::<f64>());
    Ok((h, residual))
}

const JACOBI_MAX_SWEEPS: usize = 60;
const JACOBI_TOL: f64 = 1e-14;

/// Singular values of a complex matrix by one-sided Jacobi, descending.
///
/// Column pairs are rotated (with a phase to make the inner product real)
/// until all pairs are orthogonal; the singular values are then the column
/// norms. Only the values are accumulated, not the factors.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    // Work on the transpose when it is taller, values are identical.
    let mut cols: Vec<Vec<Complex64>> = if m.rows >= m.cols {
        (0..m.cols).map(|c| m.column(c)).collect()
    } else {
        (0..m.rows).map(|r| (0..m.cols).map(|c| m.get(r, c).conj()).collect()).collect()
    };
    let n = cols.len();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (app, aqq, apq) = {
                    let mut app = 0.0;
                    let mut aqq = 0.0;
                    let mut apq = Complex64::new(0.0, 0.0);
                    for i in 0..cols[p].len() {
                        app += cols[p][i].norm_sqr();
                        aqq += cols[q][i].norm_sqr();
                        apq += cols[p][i].conj() * cols[q][i];
                    }
                    (app, aqq, apq)
                };
                let off = apq.norm();
                if off <= JACOBI_TOL * libm::sqrt(app * aqq) || off == 0.0 {
                    continue;
                }
                rotated = true;
                // Phase-align column q so the pair rotation is real.
                let phase = apq / off;
                let zeta = (aqq - app) / (2.0 * off);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..cols[p].len() {
                    let xp = cols[p][i];
                    let xq = cols[q][i] * phase.conj();
                    cols[p][i] = xp * c - xq * s;
                    cols[q][i] = (xp * s + xq * c) * phase;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|col| libm::sqrt(col.iter().map(|z| z.norm_sqr()).sum::<f64>()))
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Thin SVD of a real matrix via one-sided Jacobi.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x L` matrix of scores `U * Sigma` (the rotated columns).
    pub scores: Mat,
    /// `L` singular values, descending.
    pub singular_values: Vec<f64>,
    /// `cols x L` right singular vectors.
    pub v: Mat,
}

/// One-sided Jacobi SVD of `a` (`J x K`), with `L = min(J, K)`.
///
/// For `J >= K` the rotations act directly on the columns of `a`; the
/// accumulated rotation matrix is `V` and the rotated columns are `U*Sigma`.
/// For `J < K` the same procedure runs on the transpose and the roles swap.
pub fn jacobi_svd(a: &Mat) -> Svd {
    if a.rows >= a.cols {
        let (rotated, w) = jacobi_orthogonalize(a);
        assemble_svd_tall(rotated, w)
    } else {
        let at = a.transpose();
        let (rotated, w) = jacobi_orthogonalize(&at);
        // at = V' Sigma U'^T with V' = rotated/sigma (K x J), U' = w (J x J).
        let l = at.cols;
        let mut sigma: Vec<f64> = (0..l)
            .map(|c| libm::sqrt((0..at.rows).map(|r| { let v = rotated.get(r, c); v * v }).sum()))
            .collect();
        let mut order: Vec<usize> = (0..l).collect();
        order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
        let sigma_sorted: Vec<f64> = order.iter().map(|&i| sigma[i]).collect();
        sigma = sigma_sorted;

        let mut v = Mat::zeros(at.rows, l);
        let mut scores = Mat::zeros(l, l);
        for (new_c, &old_c) in order.iter().enumerate() {
            let s = sigma[new_c];
            if s > 0.0 {
                for r in 0..at.rows {
                    v.set(r, new_c, rotated.get(r, old_c) / s);
                }
            }
            // scores = U * Sigma = w column scaled by sigma
            for r in 0..l {
                scores.set(r, new_c, w.get(r, old_c) * s);
            }
        }
        complete_null_columns(&mut v, &sigma);
        Svd { scores, singular_values: sigma, v }
    }
}

/// Rotate column pairs of `a` until mutually orthogonal; returns the rotated
/// matrix and the accumulated orthogonal transform `w` (`a * w = rotated`).
fn jacobi_orthogonalize(a: &Mat) -> (Mat, Mat) {
    let rows = a.rows;
    let n = a.cols;
    let mut m = a.clone();
    let mut w = Mat::zeros(n, n);
    for i in 0..n {
        w.set(i, i, 1.0);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for r in 0..rows {
                    let xp = m.get(r, p);
                    let xq = m.get(r, q);
                    app += xp * xp;
                    aqq += xq * xq;
                    apq += xp * xq;
                }
                if libm::fabs(apq) <= JACOBI_TOL * libm::sqrt(app * aqq) || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for r in 0..rows {
                    let xp = m.get(r, p);
                    let xq = m.get(r, q);
                    m.set(r, p, c * xp - s * xq);
                    m.set(r, q, s * xp + c * xq);
                }
                for r in 0..n {
                    let wp = w.get(r, p);
                    let wq = w.get(r, q);
                    w.set(r, p, c * wp - s * wq);
                    w.set(r, q, s * wp + c * wq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (m, w)
}

fn assemble_svd_tall(rotated: Mat, w: Mat) -> Svd {
    let l = rotated.cols;
    let sigma_unsorted: Vec<f64> = (0..l)
        .map(|c| libm::sqrt((0..rotated.rows).map(|r| { let v = rotated.get(r, c); v * v }).sum()))
        .collect();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&i, &j| sigma_unsorted[j].partial_cmp(&sigma_unsorted[i]).unwrap());

    let singular_values: Vec<f64> = order.iter().map(|&i| sigma_unsorted[i]).collect();
    let mut scores = Mat::zeros(rotated.rows, l);
    let mut v = Mat::zeros(w.rows, l);
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..rotated.rows {
            scores.set(r, new_c, rotated.get(r, old_c));
        }
        for r in 0..w.rows {
            v.set(r, new_c, w.get(r, old_c));
        }
    }
    Svd { scores, singular_values, v }
}

/// Replace V columns whose singular value vanished with an orthonormal
/// completion, so `V^T V = I` holds even for rank-deficient input.
fn complete_null_columns(v: &mut Mat, sigma: &[f64]) {
    let k = v.rows;
    let tol = sigma.first().copied().unwrap_or(0.0) * 1e-300;
    for (c, &s) in sigma.iter().enumerate() {
        if s > tol && s > 0.0 {
            continue;
        }
        // Gram-Schmidt a basis vector against the existing columns.
        'basis: for b in 0..k {
            let mut cand = vec![0.0; k];
            cand[b] = 1.0;
            for other in 0..sigma.len() {
                if other == c {
                    continue;
                }
                let dot: f64 = (0..k).map(|r| cand[r] * v.get(r, other)).sum();
                for (r, item) in cand.iter_mut().enumerate() {
                    *item -= dot * v.get(r, other);
                }
            }
            let norm = libm::sqrt(cand.iter().map(|x| x * x).sum::<f64>());
            if norm > 1e-6 {
                for (r, item) in cand.iter().enumerate() {
                    v.set(r, c, item / norm);
                }
                break 'basis;
            }
        }
    }
}

//! Symmetric positive-semidefinite matrices.

use crate::error::{Error, Result};

/// Relative symmetry tolerance: |X_ij - X_ji| <= SYM_TOL * ||X||_F.
const SYM_TOL: f64 = 1e-12;
/// Numerical PSD tolerance: eigenvalues >= -PSD_TOL * ||X||_F.
const PSD_TOL: f64 = 1e-10;

/// A real symmetric p x p matrix validated to be numerically PSD.
///
/// Construction checks symmetry against `||X||_F` and runs a symmetric
/// eigen-decomposition (cyclic Jacobi) to verify that no eigenvalue is
/// meaningfully negative. The estimators themselves only need the trace and
/// Frobenius norm; the eigenvalues are a validation path.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdMatrix {
    data: Vec<f64>, // row-major p x p
    p: usize,
}

impl PsdMatrix {
    pub fn new(data: Vec<f64>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::param("p", "matrix dimension must be >= 1"));
        }
        if data.len() != p * p {
            return Err(Error::param(
                "data",
                format!("expected {} entries for p = {p}, got {}", p * p, data.len()),
            ));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("data", format!("non-finite entry {bad}")));
        }
        let m = PsdMatrix { data, p };
        let fro = m.frobenius_norm();
        for i in 0..p {
            for j in (i + 1)..p {
                let d = (m.data[i * p + j] - m.data[j * p + i]).abs();
                if d > SYM_TOL * fro.max(f64::MIN_POSITIVE) {
                    return Err(Error::domain(format!(
                        "matrix not symmetric: |X[{i}][{j}] - X[{j}][{i}]| = {d:.3e}"
                    )));
                }
            }
        }
        if fro > 0.0 {
            let min_eig = m
                .eigenvalues()
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if min_eig < -PSD_TOL * fro {
                return Err(Error::domain(format!(
                    "matrix not numerically PSD: min eigenvalue {min_eig:.3e} < -{PSD_TOL:e} * ||X||_F"
                )));
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        let mut data = Vec::with_capacity(p * p);
        for r in rows {
            if r.len() != p {
                return Err(Error::param("rows", "matrix must be square"));
            }
            data.extend_from_slice(r);
        }
        PsdMatrix::new(data, p)
    }

    pub fn identity(p: usize) -> Result<Self> {
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            data[i * p + i] = 1.0;
        }
        PsdMatrix::new(data, p)
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let p = diag.len();
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            data[i * p + i] = diag[i];
        }
        PsdMatrix::new(data, p)
    }

    /// Rank-one matrix v v^T.
    pub fn outer(v: &[f64]) -> Result<Self> {
        let p = v.len();
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                data[i * p + j] = v[i] * v[j];
            }
        }
        PsdMatrix::new(data, p)
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.p).map(|i| self.data[i * self.p + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    /// Eigenvalues by cyclic Jacobi sweeps (ascending order not guaranteed).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let p = self.p;
        let mut a = self.data.clone();
        let off = |a: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..p {
                for j in (i + 1)..p {
                    s += a[i * p + j] * a[i * p + j];
                }
            }
            (2.0 * s).sqrt()
        };
        let fro = self.frobenius_norm();
        if fro == 0.0 {
            return vec![0.0; p];
        }
        let tol = 1e-14 * fro;
        for _sweep in 0..50 {
            if off(&a) <= tol {
                break;
            }
            for i in 0..p {
                for j in (i + 1)..p {
                    let apq = a[i * p + j];
                    if apq.abs() <= tol / (p as f64) {
                        continue;
                    }
                    let app = a[i * p + i];
                    let aqq = a[j * p + j];
                    let theta = 0.5 * (aqq - app) / apq;
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..p {
                        let aik = a[i * p + k];
                        let ajk = a[j * p + k];
                        a[i * p + k] = c * aik - s * ajk;
                        a[j * p + k] = s * aik + c * ajk;
                    }
                    for k in 0..p {
                        let aki = a[k * p + i];
                        let akj = a[k * p + j];
                        a[k * p + i] = c * aki - s * akj;
                        a[k * p + j] = s * aki + c * akj;
                    }
                }
            }
        }
        (0..p).map(|i| a[i * p + i]).collect()
    }
}

//! Measurement operators: explicit matrices and seed-streamed Gaussian
//! ensembles whose rows are regenerated on demand.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stable::{fill_stable, StableKind};
use rayon::prelude::*;
use std::borrow::Cow;
use std::sync::OnceLock;

/// Above this many doubles a seed-streamed operator stops caching its rows
/// and regenerates them inside every product (about 0.5 GB of rows).
const MAX_CACHED_DOUBLES: usize = 1 << 26;

/// Row block size for parallel products. Fixed so that the combination order
/// of partial sums never depends on the thread count.
const ROW_CHUNK: usize = 128;

/// A linear map R^p -> R^n.
#[derive(Clone, Debug)]
pub enum MeasurementOperator {
    /// Dense row-major n x p matrix.
    Explicit {
        rows: Vec<f64>,
        n: usize,
        p: usize,
        gamma: f64,
    },
    /// Gaussian ensemble with i.i.d. N(0, gamma^2) entries; row `i` is
    /// regenerated from `rows.substream(i)`.
    SeedStreamedGaussian {
        n: usize,
        p: usize,
        gamma: f64,
        rows: RngStream,
        cache: OnceLock<Vec<f64>>,
        cache_enabled: bool,
    },
}

impl MeasurementOperator {
    pub fn explicit(rows: Vec<f64>, n: usize, p: usize, gamma: f64) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::param("n/p", "operator dimensions must be >= 1"));
        }
        if rows.len() != n * p {
            return Err(Error::param(
                "rows",
                format!("expected {} entries, got {}", n * p, rows.len()),
            ));
        }
        if !(gamma > 0.0) {
            return Err(Error::param("gamma", "must be positive"));
        }
        Ok(MeasurementOperator::Explicit { rows, n, p, gamma })
    }

    pub fn identity(p: usize) -> Result<Self> {
        let mut rows = vec![0.0; p * p];
        for i in 0..p {
            rows[i * p + i] = 1.0;
        }
        Self::explicit(rows, p, p, 1.0)
    }

    pub fn seed_streamed_gaussian(n: usize, p: usize, gamma: f64, rows: RngStream) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::param("n/p", "operator dimensions must be >= 1"));
        }
        if !(gamma > 0.0) {
            return Err(Error::param("gamma", "must be positive"));
        }
        Ok(MeasurementOperator::SeedStreamedGaussian {
            n,
            p,
            gamma,
            rows,
            cache: OnceLock::new(),
            cache_enabled: n.saturating_mul(p) <= MAX_CACHED_DOUBLES,
        })
    }

    /// Force row caching on or off (streamed operators only).
    pub fn with_caching(mut self, enabled: bool) -> Self {
        if let MeasurementOperator::SeedStreamedGaussian {
            cache_enabled,
            cache,
            ..
        } = &mut self
        {
            *cache_enabled = enabled;
            *cache = OnceLock::new();
        }
        self
    }

    pub fn n(&self) -> usize {
        match self {
            MeasurementOperator::Explicit { n, .. } => *n,
            MeasurementOperator::SeedStreamedGaussian { n, .. } => *n,
        }
    }

    pub fn p(&self) -> usize {
        match self {
            MeasurementOperator::Explicit { p, .. } => *p,
            MeasurementOperator::SeedStreamedGaussian { p, .. } => *p,
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            MeasurementOperator::Explicit { gamma, .. } => *gamma,
            MeasurementOperator::SeedStreamedGaussian { gamma, .. } => *gamma,
        }
    }

    pub fn kind_label(&self) -> &'static str {
        match self {
            MeasurementOperator::Explicit { .. } => "explicit",
            MeasurementOperator::SeedStreamedGaussian { .. } => "seed-streamed-gaussian",
        }
    }

    /// The generating stream of a seed-streamed operator.
    pub fn row_stream(&self) -> Option<RngStream> {
        match self {
            MeasurementOperator::Explicit { .. } => None,
            MeasurementOperator::SeedStreamedGaussian { rows, .. } => Some(*rows),
        }
    }

    /// Materialize row `i` into `out`.
    pub fn row(&self, i: usize, out: &mut [f64]) {
        match self {
            MeasurementOperator::Explicit { rows, p, .. } => {
                out.copy_from_slice(&rows[i * p..(i + 1) * p]);
            }
            MeasurementOperator::SeedStreamedGaussian { gamma, rows, .. } => {
                fill_stable(
                    StableKind::Gaussian,
                    *gamma,
                    out,
                    &mut rows.substream(i as u64).rng(),
                );
            }
        }
    }

    fn cached_rows(&self) -> Option<&[f64]> {
        match self {
            MeasurementOperator::Explicit { rows, .. } => Some(rows),
            MeasurementOperator::SeedStreamedGaussian {
                n,
                p,
                cache,
                cache_enabled,
                ..
            } => {
                if !cache_enabled {
                    return None;
                }
                Some(cache.get_or_init(|| self.generate_rows(*n, *p)))
            }
        }
    }

    fn generate_rows(&self, n: usize, p: usize) -> Vec<f64> {
        let mut rows = vec![0.0; n * p];
        rows.par_chunks_mut(p).enumerate().for_each(|(i, out)| {
            self.row(i, out);
        });
        rows
    }

    /// Dense rows for Gram-matrix formation, generated on the fly when the
    /// operator is beyond its cache budget.
    pub(crate) fn rows_for_gram(&self) -> Cow<'_, [f64]> {
        match self.cached_rows() {
            Some(r) => Cow::Borrowed(r),
            None => Cow::Owned(self.generate_rows(self.n(), self.p())),
        }
    }

    /// `A v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.p());
        if let Some(rows) = self.cached_rows() {
            let p = self.p();
            rows.par_chunks(p)
                .map(|row| crate::dense::dot(row, v))
                .collect()
        } else {
            let p = self.p();
            (0..self.n())
                .into_par_iter()
                .map_init(
                    || vec![0.0; p],
                    |buf, i| {
                        self.row(i, buf);
                        crate::dense::dot(buf, v)
                    },
                )
                .collect()
        }
    }

    /// `A^T w`. Partial sums are accumulated per fixed-size row chunk and
    /// combined in chunk order.
    pub fn apply_transpose(&self, w: &[f64]) -> Vec<f64> {
        let (n, p) = (self.n(), self.p());
        assert_eq!(w.len(), n);
        let chunk_starts: Vec<usize> = (0..n).step_by(ROW_CHUNK).collect();
        let partials: Vec<Vec<f64>> = chunk_starts
            .par_iter()
            .map(|&start| {
                let end = (start + ROW_CHUNK).min(n);
                let mut acc = vec![0.0; p];
                match self.cached_rows() {
                    Some(rows) => {
                        for i in start..end {
                            let wi = w[i];
                            let row = &rows[i * p..(i + 1) * p];
                            for j in 0..p {
                                acc[j] += wi * row[j];
                            }
                        }
                    }
                    None => {
                        let mut buf = vec![0.0; p];
                        for i in start..end {
                            self.row(i, &mut buf);
                            let wi = w[i];
                            for j in 0..p {
                                acc[j] += wi * buf[j];
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![0.0; p];
        for part in partials {
            for j in 0..p {
                out[j] += part[j];
            }
        }
        out
    }
}

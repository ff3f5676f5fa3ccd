//! Two-ensemble sketching of a vector and the confidence interval for its
//! numerical sparsity.
//!
//! `n1` Cauchy measurement vectors estimate `||x||_1` through the median of
//! absolute measurements, `n2` Gaussian vectors estimate `||x||_2` through
//! the root mean square, and the ratio of squares estimates
//! `s(x) = ||x||_1^2 / ||x||_2^2`. The confidence interval width depends on
//! the measurement count and the noise-to-signal ratio only, never on the
//! ambient dimension.

use crate::error::{Error, Result};
use crate::quantile::normal_quantile;
use crate::rng::RngStream;
use crate::signal::Signal;
use crate::stable::{fill_stable, StableKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Stream tags for the blocks of one acquisition. Measurement row `i` of a
/// block uses `root.substream(BLOCK).substream(i)`, so rows are individually
/// regenerable and the Gaussian block extends past the initial sketch without
/// disturbing earlier rows.
pub(crate) const BLOCK_CAUCHY_ROWS: u64 = 0;
pub(crate) const BLOCK_GAUSS_ROWS: u64 = 1;
pub(crate) const BLOCK_CAUCHY_NOISE: u64 = 2;
pub(crate) const BLOCK_GAUSS_NOISE: u64 = 3;

/// Independent bounded noise on each measurement, |eps_i| <= sigma0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    sigma0: f64,
    law: NoiseLaw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseLaw {
    /// eps_i ~ Uniform[-sigma0, sigma0].
    UniformSymmetric,
    /// Noiseless measurements.
    None,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec {
            sigma0: 0.0,
            law: NoiseLaw::None,
        }
    }

    pub fn uniform(sigma0: f64) -> Result<Self> {
        if !(sigma0 >= 0.0) || !sigma0.is_finite() {
            return Err(Error::param(
                "sigma0",
                format!("must be non-negative, got {sigma0}"),
            ));
        }
        Ok(NoiseSpec {
            sigma0,
            law: NoiseLaw::UniformSymmetric,
        })
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn law(&self) -> NoiseLaw {
        self.law
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.law {
            NoiseLaw::None => 0.0,
            NoiseLaw::UniformSymmetric => (2.0 * rng.random::<f64>() - 1.0) * self.sigma0,
        }
    }
}

/// Measurements of one signal: `n1` Cauchy values followed by `n2` Gaussian
/// values, all at energy `gamma`. The acquisition stream is retained so the
/// Gaussian rows can be regenerated and extended for recovery.
#[derive(Clone, Debug)]
pub struct VectorSketch {
    y_cauchy: Vec<f64>,
    y_gauss: Vec<f64>,
    gamma: f64,
    p: usize,
    sigma0: f64,
    acquisition: RngStream,
}

impl VectorSketch {
    /// Assemble a sketch from stored measurements (file round trips, tests).
    pub fn from_parts(
        y_cauchy: Vec<f64>,
        y_gauss: Vec<f64>,
        gamma: f64,
        p: usize,
        sigma0: f64,
        acquisition: RngStream,
    ) -> Result<Self> {
        if y_cauchy.is_empty() || y_gauss.is_empty() {
            return Err(Error::param("measurements", "n1 and n2 must be >= 1"));
        }
        if !(gamma > 0.0) {
            return Err(Error::param("gamma", "must be positive"));
        }
        Ok(VectorSketch {
            y_cauchy,
            y_gauss,
            gamma,
            p,
            sigma0,
            acquisition,
        })
    }

    pub fn y_cauchy(&self) -> &[f64] {
        &self.y_cauchy
    }

    pub fn y_gauss(&self) -> &[f64] {
        &self.y_gauss
    }

    pub fn n1(&self) -> usize {
        self.y_cauchy.len()
    }

    pub fn n2(&self) -> usize {
        self.y_gauss.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    /// Stream the acquisition was keyed to.
    pub fn acquisition(&self) -> RngStream {
        self.acquisition
    }

    /// Base stream of the Cauchy block; row `i` is `.substream(i)`.
    pub fn cauchy_row_stream(&self) -> RngStream {
        self.acquisition.substream(BLOCK_CAUCHY_ROWS)
    }

    /// Base stream of the Gaussian block; row `i` is `.substream(i)`.
    pub fn gauss_row_stream(&self) -> RngStream {
        self.acquisition.substream(BLOCK_GAUSS_ROWS)
    }

    /// Base stream of the Gaussian-block noise; measurement `i` is `.substream(i)`.
    pub fn gauss_noise_stream(&self) -> RngStream {
        self.acquisition.substream(BLOCK_GAUSS_NOISE)
    }
}

/// Acquire `y_i = <a_i, x> + eps_i` with `n1` Cauchy rows and `n2` Gaussian
/// rows of energy `gamma`.
pub fn acquire_sketch(
    x: &Signal,
    n1: usize,
    n2: usize,
    gamma: f64,
    noise: &NoiseSpec,
    rng: RngStream,
) -> Result<VectorSketch> {
    if x.is_zero() {
        return Err(Error::domain("cannot sketch the zero signal"));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::param("n1/n2", "both measurement counts must be >= 1"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }
    let p = x.len();
    let y_cauchy = measure_block(
        StableKind::Cauchy,
        x,
        n1,
        0,
        gamma,
        noise,
        rng.substream(BLOCK_CAUCHY_ROWS),
        rng.substream(BLOCK_CAUCHY_NOISE),
    );
    let y_gauss = measure_block(
        StableKind::Gaussian,
        x,
        n2,
        0,
        gamma,
        noise,
        rng.substream(BLOCK_GAUSS_ROWS),
        rng.substream(BLOCK_GAUSS_NOISE),
    );
    Ok(VectorSketch {
        y_cauchy,
        y_gauss,
        gamma,
        p,
        sigma0: noise.sigma0(),
        acquisition: rng,
    })
}

/// Measurements `first_row..first_row + count` of one ensemble block.
pub(crate) fn measure_block(
    kind: StableKind,
    x: &Signal,
    count: usize,
    first_row: usize,
    gamma: f64,
    noise: &NoiseSpec,
    row_base: RngStream,
    noise_base: RngStream,
) -> Vec<f64> {
    use rayon::prelude::*;
    let p = x.len();
    (first_row..first_row + count)
        .into_par_iter()
        .map_init(
            || vec![0.0; p],
            |row, i| {
                fill_stable(kind, gamma, row, &mut row_base.substream(i as u64).rng());
                let eps = noise.sample(&mut noise_base.substream(i as u64).rng());
                crate::dense::dot(row, x.entries()) + eps
            },
        )
        .collect()
}

/// Median with the even-length convention (mean of the two central order
/// statistics).
fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `T1 = median(|y_1|, ..., |y_n1|) / gamma`, the Cauchy scale estimate of
/// `||x||_1`.
pub fn estimate_l1(y_cauchy: &[f64], gamma: f64) -> Result<f64> {
    if y_cauchy.is_empty() {
        return Err(Error::param("y_cauchy", "empty measurement vector"));
    }
    if !(gamma > 0.0) {
        return Err(Error::param("gamma", "must be positive"));
    }
    let abs: Vec<f64> = y_cauchy.iter().map(|v| v.abs()).collect();
    Ok(median(&abs) / gamma)
}

/// `T2 = sqrt(sum y_i^2 / (gamma^2 n2))`, the Gaussian scale estimate of
/// `||x||_2`.
pub fn estimate_l2(y_gauss: &[f64], gamma: f64) -> Result<f64> {
    if y_gauss.is_empty() {
        return Err(Error::param("y_gauss", "empty measurement vector"));
    }
    if !(gamma > 0.0) {
        return Err(Error::param("gamma", "must be positive"));
    }
    let ss: f64 = y_gauss.iter().map(|v| v * v).sum();
    Ok((ss / (gamma * gamma * y_gauss.len() as f64)).sqrt())
}

/// Sparsity estimate with its confidence interval.
#[derive(Clone, Debug)]
pub struct SketchEstimate {
    /// Estimate of `||x||_1`.
    pub t1_hat: f64,
    /// Estimate of `||x||_2`.
    pub t2_hat: f64,
    /// Raw ratio `t1_hat^2 / t2_hat^2`; may fall outside `[1, p]` at small n.
    pub s_hat: f64,
    /// `s_hat` clamped into the a-priori range `[1, p]`.
    pub s_hat_clamped: f64,
    /// Confidence interval for `s(x)`, clamped into `[1, p]`.
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
    pub rho: f64,
    /// Effective n in the interval formula (`n1 + n2`, or `2 min(n1, n2)`
    /// when the blocks are unbalanced).
    pub n: usize,
    pub delta_n: f64,
    pub eta_n: f64,
    /// Set when `n1 != n2`; the interval then uses the conservative
    /// `n = 2 min(n1, n2)`.
    pub unbalanced: bool,
}

/// Estimate `s(x)` from a sketch and invert the coverage interval
/// `sqrt(s_hat/s) in [(1-delta_n)/(1+eta_n), (1+delta_n)/(1-eta_n)]`
/// into a confidence interval for `s(x)`.
///
/// `rho` is the caller's bound on the noise-to-signal ratio
/// `sigma0 / (gamma ||x||_2)`; it must be positive whenever the sketch was
/// acquired with noise.
pub fn estimate_sparsity(sk: &VectorSketch, alpha: f64, rho: f64) -> Result<SketchEstimate> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::param(
            "alpha",
            format!("must lie in (0, 1/2), got {alpha}"),
        ));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::param("rho", format!("must be non-negative, got {rho}")));
    }
    if sk.sigma0 > 0.0 && rho == 0.0 {
        return Err(Error::param(
            "rho",
            "sketch was acquired with sigma0 > 0; a zero noise-to-signal bound is refused",
        ));
    }
    let t1 = estimate_l1(&sk.y_cauchy, sk.gamma)?;
    let t2 = estimate_l2(&sk.y_gauss, sk.gamma)?;
    if t2 == 0.0 {
        return Err(Error::DegenerateSketch);
    }

    let unbalanced = sk.n1() != sk.n2();
    let n = if unbalanced {
        2 * sk.n1().min(sk.n2())
    } else {
        sk.n1() + sk.n2()
    };
    let nf = n as f64;
    let z = normal_quantile(1.0 - alpha)?;
    let eta_n = z / nf.sqrt() + rho;
    if eta_n >= 1.0 {
        return Err(Error::HypothesisViolation {
            param: if rho >= 1.0 { "rho" } else { "n" },
            value: if rho >= 1.0 { rho } else { nf },
            bound_name: "eta_n",
            bound: eta_n,
            n,
        });
    }
    let delta_n = PI * z / (2.0 * nf).sqrt() + rho;

    let s_raw = (t1 / t2) * (t1 / t2);
    let lo_factor = (1.0 - eta_n) / (1.0 + delta_n);
    let ci_low_raw = s_raw * lo_factor * lo_factor;
    let ci_high_raw = if delta_n < 1.0 {
        let hi = (1.0 + eta_n) / (1.0 - delta_n);
        s_raw * hi * hi
    } else {
        f64::INFINITY
    };

    let pf = sk.p as f64;
    let clamp = |v: f64| v.clamp(1.0, pf);
    Ok(SketchEstimate {
        t1_hat: t1,
        t2_hat: t2,
        s_hat: s_raw,
        s_hat_clamped: clamp(s_raw),
        ci_low: clamp(ci_low_raw),
        ci_high: clamp(ci_high_raw),
        alpha,
        rho,
        n,
        delta_n,
        eta_n,
        unbalanced,
    })
}

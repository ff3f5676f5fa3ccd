//! Effective-rank estimation for PSD matrices from linear probes.
//!
//! `n1` identity probes `y_i = gamma tr(X) + eps_i` estimate the trace (they
//! are deterministic up to noise), and `n2` Gaussian probes
//! `y_i = gamma <Z_i, X> + eps_i` with i.i.d. standard normal `Z_i` estimate
//! the Frobenius norm through `E <Z, X>^2 = ||X||_F^2`. The ratio of squares
//! estimates `r(X) = tr(X)^2 / ||X||_F^2`.

use crate::error::{Error, Result};
use crate::matrix::PsdMatrix;
use crate::quantile::normal_quantile;
use crate::rng::RngStream;
use crate::sketch::NoiseSpec;
use crate::stable::{sample_standard, StableKind};
use rayon::prelude::*;

const BLOCK_TRACE_NOISE: u64 = 0;
const BLOCK_FROB_PROBES: u64 = 1;
const BLOCK_FROB_NOISE: u64 = 2;

/// Probe measurements of one PSD matrix.
#[derive(Clone, Debug)]
pub struct MatrixSketch {
    y_trace: Vec<f64>,
    y_frob: Vec<f64>,
    gamma: f64,
    p: usize,
    sigma0: f64,
    acquisition: RngStream,
}

impl MatrixSketch {
    pub fn from_parts(
        y_trace: Vec<f64>,
        y_frob: Vec<f64>,
        gamma: f64,
        p: usize,
        sigma0: f64,
        acquisition: RngStream,
    ) -> Result<Self> {
        if y_trace.is_empty() || y_frob.is_empty() {
            return Err(Error::param("measurements", "n1 and n2 must be >= 1"));
        }
        if !(gamma > 0.0) {
            return Err(Error::param("gamma", "must be positive"));
        }
        Ok(MatrixSketch {
            y_trace,
            y_frob,
            gamma,
            p,
            sigma0,
            acquisition,
        })
    }

    pub fn y_trace(&self) -> &[f64] {
        &self.y_trace
    }

    pub fn y_frob(&self) -> &[f64] {
        &self.y_frob
    }

    pub fn n1(&self) -> usize {
        self.y_trace.len()
    }

    pub fn n2(&self) -> usize {
        self.y_frob.len()
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

    pub fn acquisition(&self) -> RngStream {
        self.acquisition
    }
}

/// Acquire `n1` identity-trace probes and `n2` Gaussian Frobenius probes of
/// `X` at energy `gamma`. The probe matrices `Z_i` are streamed entry by
/// entry from the seed and never stored.
pub fn acquire_matrix_sketch(
    x: &PsdMatrix,
    n1: usize,
    n2: usize,
    gamma: f64,
    noise: &NoiseSpec,
    rng: RngStream,
) -> Result<MatrixSketch> {
    if x.is_zero() {
        return Err(Error::domain("cannot sketch the zero matrix"));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::param("n1/n2", "both probe counts must be >= 1"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }

    let trace = x.trace();
    let trace_noise = rng.substream(BLOCK_TRACE_NOISE);
    let y_trace: Vec<f64> = (0..n1)
        .map(|i| gamma * trace + noise.sample(&mut trace_noise.substream(i as u64).rng()))
        .collect();

    let probes = rng.substream(BLOCK_FROB_PROBES);
    let frob_noise = rng.substream(BLOCK_FROB_NOISE);
    let data = x.data();
    let y_frob: Vec<f64> = (0..n2)
        .into_par_iter()
        .map(|i| {
            // <Z, X> accumulated entry by entry in row-major order
            let mut zrng = probes.substream(i as u64).rng();
            let mut acc = 0.0;
            for &v in data {
                acc += sample_standard(StableKind::Gaussian, &mut zrng) * v;
            }
            gamma * acc + noise.sample(&mut frob_noise.substream(i as u64).rng())
        })
        .collect();

    Ok(MatrixSketch {
        y_trace,
        y_frob,
        gamma,
        p: x.dim(),
        sigma0: noise.sigma0(),
        acquisition: rng,
    })
}

/// Effective-rank estimate with its confidence interval.
#[derive(Clone, Debug)]
pub struct RankEstimate {
    /// Estimate of `tr(X)` (mean of trace probes over gamma).
    pub t1_breve: f64,
    /// Estimate of `||X||_F` (root mean square of Frobenius probes over gamma).
    pub t2_breve: f64,
    /// Raw ratio `t1_breve^2 / t2_breve^2`.
    pub r_hat: f64,
    /// `r_hat` clamped into `[1, p]`.
    pub r_hat_clamped: f64,
    /// Confidence interval for `r(X)`, clamped into `[1, p]`.
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
    pub varrho: f64,
    pub n: usize,
    pub zeta_n: f64,
    pub unbalanced: bool,
}

/// Estimate `r(X)` and invert the coverage interval
/// `sqrt(r_hat/r) in [(1-varrho)/(1+zeta_n), (1+varrho)/(1-zeta_n)]`.
///
/// `varrho` bounds the matrix noise-to-signal ratio `sigma0 / (gamma ||X||_F)`.
pub fn estimate_effective_rank(
    sk: &MatrixSketch,
    alpha: f64,
    varrho: f64,
) -> Result<RankEstimate> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::param(
            "alpha",
            format!("must lie in (0, 1/2), got {alpha}"),
        ));
    }
    if !(varrho >= 0.0) || !varrho.is_finite() {
        return Err(Error::param(
            "varrho",
            format!("must be non-negative, got {varrho}"),
        ));
    }
    if sk.sigma0 > 0.0 && varrho == 0.0 {
        return Err(Error::param(
            "varrho",
            "sketch was acquired with sigma0 > 0; a zero noise-to-signal bound is refused",
        ));
    }

    let t1 = sk.y_trace.iter().sum::<f64>() / (sk.gamma * sk.n1() as f64);
    let ss: f64 = sk.y_frob.iter().map(|v| v * v).sum();
    let t2 = (ss / (sk.gamma * sk.gamma * sk.n2() as f64)).sqrt();
    if t2 == 0.0 {
        return Err(Error::DegenerateSketch);
    }

    let unbalanced = sk.n1() != sk.n2();
    let n = if unbalanced {
        2 * sk.n1().min(sk.n2())
    } else {
        sk.n1() + sk.n2()
    };
    let z = normal_quantile(1.0 - alpha)?;
    let zeta_n = z / (n as f64).sqrt() + varrho;
    if zeta_n >= 1.0 {
        return Err(Error::HypothesisViolation {
            param: if varrho >= 1.0 { "varrho" } else { "n" },
            value: if varrho >= 1.0 { varrho } else { n as f64 },
            bound_name: "zeta_n",
            bound: zeta_n,
            n,
        });
    }

    let r_raw = (t1 / t2) * (t1 / t2);
    let lo = (1.0 - zeta_n) / (1.0 + varrho);
    let hi = (1.0 + zeta_n) / (1.0 - varrho);
    let pf = sk.p as f64;
    let clamp = |v: f64| v.clamp(1.0, pf);
    Ok(RankEstimate {
        t1_breve: t1,
        t2_breve: t2,
        r_hat: r_raw,
        r_hat_clamped: clamp(r_raw),
        ci_low: clamp(r_raw * lo * lo),
        ci_high: clamp(r_raw * hi * hi),
        alpha,
        varrho,
        n,
        zeta_n,
        unbalanced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::effective_rank;

    fn stream() -> RngStream {
        RngStream::new(555)
    }

    #[test]
    fn trace_probes_are_deterministic_when_noiseless() {
        let x = PsdMatrix::identity(3).unwrap();
        let sk = acquire_matrix_sketch(&x, 10, 1, 1.0, &NoiseSpec::none(), stream()).unwrap();
        for &y in sk.y_trace() {
            assert_eq!(y, 3.0);
        }

        let x = PsdMatrix::diagonal(&[2.0, 0.0]).unwrap();
        let sk = acquire_matrix_sketch(&x, 5, 1, 2.0, &NoiseSpec::none(), stream()).unwrap();
        for &y in sk.y_trace() {
            assert_eq!(y, 4.0);
        }
    }

    #[test]
    fn frobenius_probe_second_moment() {
        // E <Z, X>^2 = ||X||_F^2; chi-square concentration over 1e5 probes
        let x = PsdMatrix::from_rows(&[
            vec![2.0, 0.5, 0.0],
            vec![0.5, 1.0, -0.3],
            vec![0.0, -0.3, 0.7],
        ])
        .unwrap();
        let fro2 = x.frobenius_norm().powi(2);
        let n2 = 100_000;
        let sk = acquire_matrix_sketch(&x, 1, n2, 1.0, &NoiseSpec::none(), stream()).unwrap();
        let mean_sq: f64 = sk.y_frob().iter().map(|y| y * y).sum::<f64>() / n2 as f64;
        let tol = 3.0 * (2.0 / n2 as f64).sqrt() * fro2;
        assert!(
            (mean_sq - fro2).abs() <= tol,
            "mean square {mean_sq} vs {fro2} (tol {tol})"
        );
    }

    #[test]
    fn identity_rank_estimate_concentrates() {
        let p = 50;
        let x = PsdMatrix::identity(p).unwrap();
        let sk = acquire_matrix_sketch(&x, 100, 10_000, 1.0, &NoiseSpec::none(), stream()).unwrap();
        let est = estimate_effective_rank(&sk, 0.05, 0.0).unwrap();
        assert_eq!(est.t1_breve, p as f64); // noiseless trace probes are exact
        assert!(est.r_hat / p as f64 > 0.9 && est.r_hat / p as f64 < 1.1);
    }

    #[test]
    fn rank_one_estimate() {
        let v = vec![0.6, -0.8, 0.2, 0.1];
        let x = PsdMatrix::outer(&v).unwrap();
        let l22: f64 = v.iter().map(|a| a * a).sum();
        let sk = acquire_matrix_sketch(&x, 7, 4000, 1.0, &NoiseSpec::none(), stream()).unwrap();
        let est = estimate_effective_rank(&sk, 0.05, 0.0).unwrap();
        assert!((est.t1_breve - l22).abs() < 1e-12);
        assert!((est.r_hat_clamped - 1.0).abs() < 0.1);
    }

    #[test]
    fn estimate_scale_invariance() {
        let diag: Vec<f64> = (0..20).map(|i| if i < 6 { 1.5 } else { 0.1 }).collect();
        let x = PsdMatrix::diagonal(&diag).unwrap();
        let cx = PsdMatrix::diagonal(&diag.iter().map(|d| 13.0 * d).collect::<Vec<_>>()).unwrap();
        let a = estimate_effective_rank(
            &acquire_matrix_sketch(&x, 50, 50, 1.0, &NoiseSpec::none(), stream()).unwrap(),
            0.05,
            0.0,
        )
        .unwrap();
        let b = estimate_effective_rank(
            &acquire_matrix_sketch(&cx, 50, 50, 1.0, &NoiseSpec::none(), stream()).unwrap(),
            0.05,
            0.0,
        )
        .unwrap();
        assert!((a.r_hat / b.r_hat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effective_rank_below_rank_on_test_matrices() {
        let matrices = [
            PsdMatrix::identity(8).unwrap(),
            PsdMatrix::diagonal(&[3.0, 1.0, 0.5, 0.0, 0.0]).unwrap(),
            PsdMatrix::outer(&[1.0, 2.0, 3.0]).unwrap(),
        ];
        let ranks = [8usize, 3, 1];
        for (m, rank) in matrices.iter().zip(ranks) {
            let r = effective_rank(m).unwrap();
            assert!(r <= rank as f64 + 1e-9, "r = {r} rank = {rank}");
            assert!(r >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn hypothesis_violation_and_varrho_refusal() {
        let x = PsdMatrix::identity(4).unwrap();
        let sk = acquire_matrix_sketch(&x, 20, 20, 1.0, &NoiseSpec::none(), stream()).unwrap();
        assert!(matches!(
            estimate_effective_rank(&sk, 0.05, 1.5),
            Err(Error::HypothesisViolation { param: "varrho", .. })
        ));

        let noisy = acquire_matrix_sketch(
            &x,
            20,
            20,
            1.0,
            &NoiseSpec::uniform(0.1).unwrap(),
            stream(),
        )
        .unwrap();
        assert!(matches!(
            estimate_effective_rank(&noisy, 0.05, 0.0),
            Err(Error::InvalidParameter { name: "varrho", .. })
        ));
    }
}

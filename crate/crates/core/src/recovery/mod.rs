//! Adaptive-budget signal recovery.
//!
//! The pipeline sketches the unknown signal with 500 + 500 preliminary
//! measurements, estimates its numerical sparsity, converts the estimate to
//! a measurement budget `n_hat = ceil(2 ceil(s_hat) ln(p / ceil(s_hat)))`,
//! re-uses the preliminary Gaussian measurements, draws any extra rows from
//! fresh substreams of the same operator seed, and reconstructs by basis
//! pursuit with `eps0 = sigma0 sqrt(n)`.

mod bp;
mod operator;

pub use bp::{basis_pursuit, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use operator::MeasurementOperator;

use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::sketch::{
    acquire_sketch, estimate_sparsity, measure_block, NoiseSpec, SketchEstimate,
};
use crate::stable::StableKind;
use crate::rng::RngStream;

/// Preliminary measurements per ensemble (n1 = n2 = 500).
pub const INITIAL_SKETCH_MEASUREMENTS: usize = 500;

/// Result of one basis-pursuit solve.
#[derive(Clone, Debug)]
pub struct RecoveryResult {
    pub x_hat: Signal,
    /// Measurements used by the solve.
    pub n_used: usize,
    pub bp_iterations: usize,
    /// `||A x_hat - y||_2` of the returned point; at most
    /// `eps0 (1 + 1e-6)` plus floating-point slack.
    pub residual_norm: f64,
    /// `||x_hat||_1`.
    pub l1_value: f64,
    /// False when the iteration cap was reached before the residual
    /// criterion; the returned point is still feasibility-polished.
    pub converged: bool,
}

/// Full adaptive pipeline outcome.
#[derive(Clone, Debug)]
pub struct AdaptiveRecovery {
    pub result: RecoveryResult,
    /// The preliminary sparsity estimate the budget came from.
    pub estimate: SketchEstimate,
    /// Budget `n_hat` from the estimate (capped at `p` when the formula is
    /// undefined).
    pub n_hat: usize,
    /// Gaussian rows drawn beyond the preliminary 500.
    pub extra_rows: usize,
    /// The `eps0` handed to basis pursuit (`sigma0 * sqrt(n_used)`).
    pub eps0: f64,
}

/// Measurement budget `ceil(2 ceil(s_hat) ln(p / ceil(s_hat)))`.
///
/// Natural logarithm. Errors with [`Error::BudgetUndefined`] when
/// `ceil(s_hat) >= p`, in which case callers should measure all `p`
/// coordinates.
pub fn adaptive_budget(s_hat: f64, p: usize) -> Result<usize> {
    if !(s_hat >= 1.0) || !s_hat.is_finite() {
        return Err(Error::param("s_hat", format!("must be >= 1, got {s_hat}")));
    }
    if p == 0 {
        return Err(Error::param("p", "must be >= 1"));
    }
    let s_ceil = s_hat.ceil() as usize;
    if s_ceil >= p {
        return Err(Error::BudgetUndefined { s_ceil, p });
    }
    let n = 2.0 * s_ceil as f64 * (p as f64 / s_ceil as f64).ln();
    Ok(n.ceil() as usize)
}

/// Sketch, estimate, size, and recover an unknown signal.
///
/// `x` is the oracle signal used to synthesize measurements; `sigma0` bounds
/// the per-measurement noise (Uniform[-sigma0, sigma0]). When the budget
/// stays within the preliminary 500 Gaussian measurements they are re-used
/// as-is (all 500), otherwise the operator is extended row by row from the
/// same seed.
pub fn recover_with_estimated_sparsity(
    x: &Signal,
    gamma: f64,
    sigma0: f64,
    rng: RngStream,
) -> Result<AdaptiveRecovery> {
    if x.is_zero() {
        return Err(Error::domain("cannot recover the zero signal"));
    }
    if !(sigma0 >= 0.0) || !sigma0.is_finite() {
        return Err(Error::param("sigma0", format!("must be non-negative, got {sigma0}")));
    }
    let p = x.len();
    let noise = if sigma0 > 0.0 {
        NoiseSpec::uniform(sigma0)?
    } else {
        NoiseSpec::none()
    };
    let n0 = INITIAL_SKETCH_MEASUREMENTS;
    let sk = acquire_sketch(x, n0, n0, gamma, &noise, rng)?;
    let rho = sigma0 / (gamma * x.l2_norm());
    let estimate = estimate_sparsity(&sk, 0.05, rho)?;

    let n_hat = match adaptive_budget(estimate.s_hat_clamped, p) {
        Ok(n) => n,
        Err(Error::BudgetUndefined { .. }) => p,
        Err(e) => return Err(e),
    };

    let (n_used, extra_rows, y) = if n_hat <= n0 {
        // re-use all preliminary Gaussian measurements
        (n0, 0, sk.y_gauss().to_vec())
    } else {
        let extra = n_hat - n0;
        let mut y = sk.y_gauss().to_vec();
        y.extend(measure_block(
            StableKind::Gaussian,
            x,
            extra,
            n0,
            gamma,
            &noise,
            sk.gauss_row_stream(),
            sk.gauss_noise_stream(),
        ));
        (n_hat, extra, y)
    };

    let operator =
        MeasurementOperator::seed_streamed_gaussian(n_used, p, gamma, sk.gauss_row_stream())?;
    let eps0 = sigma0 * (n_used as f64).sqrt();
    let result = basis_pursuit(&operator, &y, eps0, DEFAULT_TOL, DEFAULT_MAX_ITER)?;

    Ok(AdaptiveRecovery {
        result,
        estimate,
        n_hat,
        extra_rows,
        eps0,
    })
}

//! Symmetric-stable measurement ensembles for q in {1, 2}.
//!
//! A symmetric stable law `S_q(gamma)` has characteristic function
//! `exp(-|gamma t|^q)`; `q = 1` is the Cauchy distribution `C(0, gamma)` and
//! `q = 2` the Gaussian with standard deviation `gamma`. The key property
//! exploited by the sketches: for `a` with i.i.d. `S_q(gamma)` entries,
//! `<a, x>` is distributed as `S_q` with scale `gamma * ||x||_q`.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::signal::Signal;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Which symmetric stable family a measurement ensemble draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StableKind {
    /// `q = 1`, the Cauchy distribution `C(0, gamma)`.
    Cauchy,
    /// `q = 2`, the Gaussian `N(0, gamma^2)` (gamma is the standard deviation,
    /// so a single measurement `<a, x>` has scale `gamma * ||x||_2`).
    Gaussian,
}

impl StableKind {
    /// The stability index q.
    pub fn q(&self) -> f64 {
        match self {
            StableKind::Cauchy => 1.0,
            StableKind::Gaussian => 2.0,
        }
    }

    /// Stable CSV/file label.
    pub fn label(&self) -> &'static str {
        match self {
            StableKind::Cauchy => "cauchy",
            StableKind::Gaussian => "gaussian",
        }
    }
}

/// One standard variate of the family (`gamma = 1`).
///
/// Cauchy uses the exact inverse CDF `tan(pi (u - 1/2))` with `u` uniform on
/// (0,1); Gaussian uses an exact ziggurat sampler.
#[inline]
pub(crate) fn sample_standard(kind: StableKind, rng: &mut ChaCha8Rng) -> f64 {
    match kind {
        StableKind::Cauchy => loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                return (PI * (u - 0.5)).tan();
            }
        },
        StableKind::Gaussian => rng.sample(StandardNormal),
    }
}

/// Fill `out` with i.i.d. `S_q(gamma)` entries from `rng`. Entries are drawn
/// as standard variates and scaled, so the same stream with scales `gamma`
/// and `c * gamma` yields exactly proportional vectors.
#[inline]
pub(crate) fn fill_stable(kind: StableKind, gamma: f64, out: &mut [f64], rng: &mut ChaCha8Rng) {
    for v in out.iter_mut() {
        *v = gamma * sample_standard(kind, rng);
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }
    Ok(())
}

/// Draw a length-`p` measurement vector with i.i.d. `S_q(gamma)` entries.
pub fn draw_stable_vector(
    kind: StableKind,
    gamma: f64,
    p: usize,
    rng: RngStream,
) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    if p == 0 {
        return Err(Error::param("p", "must be at least 1"));
    }
    let mut out = vec![0.0; p];
    fill_stable(kind, gamma, &mut out, &mut rng.rng());
    Ok(out)
}

/// Scale parameter of the projection `<a, x>` for `a ~ S_q(gamma)^(x) p`:
/// `gamma * ||x||_1` for Cauchy and `gamma * ||x||_2` for Gaussian.
pub fn stable_scale_of_projection(kind: StableKind, gamma: f64, x: &Signal) -> Result<f64> {
    check_gamma(gamma)?;
    if x.is_zero() {
        return Err(Error::param("x", "zero vector has no projection scale"));
    }
    Ok(match kind {
        StableKind::Cauchy => gamma * x.l1_norm(),
        StableKind::Gaussian => gamma * x.l2_norm(),
    })
}

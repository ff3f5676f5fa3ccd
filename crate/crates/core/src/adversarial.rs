//! Why deterministic designs fail: dense null-space perturbations and the
//! minimax lower bound.
//!
//! For any fixed matrix `A` with a null space, a signal `x` can be perturbed
//! to `x_tilde = x + ||x||_inf B z` (columns of `B` an orthonormal null-space
//! basis, `z` standard normal) without changing `A x`. With positive
//! probability the perturbed signal is dense in the sense
//! `s(x_tilde) >= (p - n) / (1 + 2 sqrt(2 ln 2p))^2`, so measurements from a
//! deterministic design cannot distinguish a 1-sparse signal from a dense
//! one, and every estimation rule carries a dimension-scale minimax error.

use crate::error::{Error, Result};
use crate::measures::numerical_sparsity;
use crate::rng::RngStream;
use crate::signal::Signal;
use crate::stable::{sample_standard, StableKind};

/// Singular values (estimated by pivoted-QR diagonals) below this fraction of
/// the largest count as zero for the numerical rank.
const RANK_TOL: f64 = 1e-10;

/// A pair of signals indistinguishable under `A` with very different
/// numerical sparsity.
#[derive(Clone, Debug)]
pub struct AdversarialPair {
    pub x_base: Signal,
    pub x_tilde: Signal,
    /// `s(x_tilde)`.
    pub attained_s: f64,
    /// The density bound the construction was required to reach.
    pub bound: f64,
    /// Failed draws before the returned one.
    pub retries: usize,
}

/// Orthonormal basis of the null space of a dense row-major `n x p` matrix,
/// returned as `p - rank(A)` columns of length `p`.
///
/// Computed from a column-pivoted Householder QR of `A^T` with full
/// accumulation of the orthogonal factor; the pivoted diagonal of `R` stands
/// in for the singular values in the rank threshold.
pub fn null_space_basis(a: &[f64], n: usize, p: usize) -> Result<Vec<Vec<f64>>> {
    if p == 0 || n == 0 {
        return Err(Error::param("n/p", "matrix dimensions must be >= 1"));
    }
    if a.len() != n * p {
        return Err(Error::param(
            "a",
            format!("expected {} entries, got {}", n * p, a.len()),
        ));
    }
    // m = A^T, row-major p x n
    let mut m = vec![0.0; p * n];
    for i in 0..n {
        for j in 0..p {
            m[j * n + i] = a[i * p + j];
        }
    }

    let steps = p.min(n);
    let mut reflectors: Vec<Vec<f64>> = Vec::new(); // full-length v, zeros above k
    let mut r_diag: Vec<f64> = Vec::new();
    for k in 0..steps {
        // column pivot: move the largest remaining column into position k
        let mut best = k;
        let mut best_norm = 0.0;
        for c in k..n {
            let norm: f64 = (k..p).map(|r| m[r * n + c] * m[r * n + c]).sum();
            if norm > best_norm {
                best_norm = norm;
                best = c;
            }
        }
        if best_norm == 0.0 {
            break; // remaining columns are zero
        }
        if best != k {
            for r in 0..p {
                m.swap(r * n + k, r * n + best);
            }
        }
        // Householder vector for column k
        let norm = best_norm.sqrt();
        let head = m[k * n + k];
        let alpha = if head >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; p];
        v[k] = head - alpha;
        for r in (k + 1)..p {
            v[r] = m[r * n + k];
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv > 0.0 {
            // apply H = I - 2 v v^T / (v^T v) to the remaining columns
            for c in k..n {
                let dot: f64 = (k..p).map(|r| v[r] * m[r * n + c]).sum();
                let s = 2.0 * dot / vtv;
                for r in k..p {
                    m[r * n + c] -= s * v[r];
                }
            }
        }
        r_diag.push(alpha.abs());
        reflectors.push(v);
    }

    let rank = match r_diag.first() {
        None => 0,
        Some(&r0) => r_diag.iter().filter(|d| **d > RANK_TOL * r0).count(),
    };
    if rank == p {
        return Err(Error::NoNullSpace { rank });
    }

    // accumulate Q = H_0 H_1 ... H_(m-1) applied to the identity
    let mut q = vec![0.0; p * p];
    for i in 0..p {
        q[i * p + i] = 1.0;
    }
    for v in reflectors.iter().rev() {
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        for c in 0..p {
            let dot: f64 = (0..p).map(|r| v[r] * q[r * p + c]).sum();
            let s = 2.0 * dot / vtv;
            if s != 0.0 {
                for r in 0..p {
                    q[r * p + c] -= s * v[r];
                }
            }
        }
    }

    Ok((rank..p)
        .map(|c| (0..p).map(|r| q[r * p + c]).collect())
        .collect())
}

/// Density bound of the null-space construction:
/// `(p - n) / (1 + 2 sqrt(2 ln(2p)))^2`.
pub fn lemma1_bound(p: usize, n: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::param("p", "must be >= 1"));
    }
    if n >= p {
        return Err(Error::param("n", format!("requires p > n, got p = {p}, n = {n}")));
    }
    let denom = 1.0 + 2.0 * (2.0 * (2.0 * p as f64).ln()).sqrt();
    Ok((p - n) as f64 / (denom * denom))
}

/// Minimax relative error floor for estimating `s(x)` from noiseless
/// deterministic measurements:
/// `max(0, (1 - (n+1)/p) / (2 (1 + 2 sqrt(2 ln 2p))^2))`.
pub fn minimax_lower_bound(p: usize, n: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::param("p", "must be >= 1"));
    }
    let denom = 1.0 + 2.0 * (2.0 * (2.0 * p as f64).ln()).sqrt();
    let value = (1.0 - (n as f64 + 1.0) / p as f64) / (2.0 * denom * denom);
    Ok(value.max(0.0))
}

/// Perturb `x` inside the null space of `A` until the perturbed signal is
/// dense: `x_tilde = x + ||x||_inf B z` with fresh standard normal `z` each
/// retry, accepted once `s(x_tilde) >= lemma1_bound(p, n)`.
pub fn dense_null_perturbation(
    a: &[f64],
    n: usize,
    p: usize,
    x: &Signal,
    rng: RngStream,
    max_retries: usize,
) -> Result<AdversarialPair> {
    if x.len() != p {
        return Err(Error::param("x", format!("expected length {p}, got {}", x.len())));
    }
    if x.is_zero() {
        return Err(Error::domain("base signal must be non-zero"));
    }
    if max_retries == 0 {
        return Err(Error::param("max_retries", "must be >= 1"));
    }
    let basis = null_space_basis(a, n, p)?;
    let k = basis.len();
    let bound = if n < p { lemma1_bound(p, n)? } else { 0.0 };
    let scale = x.linf_norm();

    let mut best_s = f64::NEG_INFINITY;
    for attempt in 0..max_retries {
        let mut zrng = rng.substream(attempt as u64).rng();
        let mut tilde = x.entries().to_vec();
        for col in basis.iter().take(k) {
            let z = sample_standard(StableKind::Gaussian, &mut zrng);
            for r in 0..p {
                tilde[r] += scale * z * col[r];
            }
        }
        let x_tilde = Signal::new(tilde)?;
        if x_tilde.is_zero() {
            continue;
        }
        let s = numerical_sparsity(&x_tilde)?;
        if s >= bound {
            return Ok(AdversarialPair {
                x_base: x.clone(),
                x_tilde,
                attained_s: s,
                bound,
                retries: attempt,
            });
        }
        best_s = best_s.max(s);
    }
    Err(Error::RetriesExhausted {
        retries: max_retries,
        best_s,
        bound,
    })
}

/// Frobenius norm of a dense matrix slice, used by demo/residual checks.
pub fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

//! Exact sparsity and rank measures, and T-term approximation bounds.
//!
//! The numerical sparsity `s(x) = ||x||_1^2 / ||x||_2^2` is a continuous,
//! scale-invariant lower bound on the support size `||x||_0`, sharp exactly
//! when the non-zero coordinates have equal magnitude. Its matrix analogue
//! for PSD `X` is the effective rank `r(X) = tr(X)^2 / ||X||_F^2 <= rank(X)`.

use crate::error::{Error, Result};
use crate::matrix::PsdMatrix;
use crate::signal::Signal;

/// `s(x) = ||x||_1^2 / ||x||_2^2`, in `[1, p]` for non-zero `x`.
pub fn numerical_sparsity(x: &Signal) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::domain("numerical sparsity of the zero vector"));
    }
    let l1 = x.l1_norm();
    let l2 = x.l2_norm();
    Ok((l1 / l2) * (l1 / l2))
}

/// `r(X) = tr(X)^2 / ||X||_F^2`, in `[1, rank(X)]` for non-zero PSD `X`.
pub fn effective_rank(x: &PsdMatrix) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::domain("effective rank of the zero matrix"));
    }
    let tr = x.trace();
    let fro = x.frobenius_norm();
    Ok((tr / fro) * (tr / fro))
}

/// Indices of the `t` largest-magnitude coordinates; ties keep the
/// lowest-index coordinate.
fn top_t_indices(x: &Signal, t: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    // stable sort by descending magnitude preserves index order within ties
    idx.sort_by(|&a, &b| x[b].abs().partial_cmp(&x[a].abs()).unwrap());
    idx.truncate(t);
    idx
}

/// Best `t`-term approximation: all but the `t` largest-magnitude
/// coordinates set to zero.
pub fn best_t_term(x: &Signal, t: usize) -> Result<Signal> {
    if t == 0 || t > x.len() {
        return Err(Error::param(
            "t",
            format!("must lie in [1, {}], got {t}", x.len()),
        ));
    }
    let mut out = vec![0.0; x.len()];
    for i in top_t_indices(x, t) {
        out[i] = x[i];
    }
    Signal::new(out)
}

/// Scale-invariant `t`-term approximation error
/// `(1/sqrt(t)) * ||x - x_t||_1 / ||x||_2`.
pub fn t_term_relative_error(x: &Signal, t: usize) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::domain("approximation error of the zero vector"));
    }
    if t == 0 || t > x.len() {
        return Err(Error::param(
            "t",
            format!("must lie in [1, {}], got {t}", x.len()),
        ));
    }
    // ||x - x_t||_1 = ||x||_1 - ||x_t||_1 since x_t keeps coordinates of x
    let kept: f64 = top_t_indices(x, t).iter().map(|&i| x[i].abs()).sum();
    let tail = (x.l1_norm() - kept).max(0.0);
    Ok(tail / ((t as f64).sqrt() * x.l2_norm()))
}

/// Necessity bound: any `t` achieving `t_term_relative_error(x, t) <= eps`
/// satisfies `t >= s(x) / (1 + eps)^2`.
pub fn prop1_necessary_t(x: &Signal, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    let s = numerical_sparsity(x)?;
    Ok(s / ((1.0 + eps) * (1.0 + eps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::make_power_law_signal;

    #[test]
    fn sparsity_examples() {
        let e1 = Signal::basis(100, 0).unwrap();
        assert_eq!(numerical_sparsity(&e1).unwrap(), 1.0);

        for p in [7usize, 100] {
            let ones = Signal::new(vec![1.0; p]).unwrap();
            let s = numerical_sparsity(&ones).unwrap();
            assert!((s - p as f64).abs() < 1e-9 * p as f64);
        }

        let x = make_power_law_signal(10_000, 1.0);
        let s = numerical_sparsity(&x).unwrap();
        assert!((s - 58.0).abs() <= 1.0, "s = {s}");
    }

    #[test]
    fn sparsity_rejects_zero() {
        let zero = Signal::new(vec![0.0; 5]).unwrap();
        assert!(numerical_sparsity(&zero).is_err());
    }

    #[test]
    fn effective_rank_examples() {
        let id = PsdMatrix::identity(10).unwrap();
        assert!((effective_rank(&id).unwrap() - 10.0).abs() < 1e-12);

        let vv = PsdMatrix::outer(&[0.3, -1.2, 0.5]).unwrap();
        assert!((effective_rank(&vv).unwrap() - 1.0).abs() < 1e-12);

        let mut d = vec![0.0; 10];
        d[..3].fill(1.0);
        let m = PsdMatrix::diagonal(&d).unwrap();
        assert!((effective_rank(&m).unwrap() - 3.0).abs() < 1e-12);

        assert!(effective_rank(&PsdMatrix::new(vec![0.0; 4], 2).unwrap()).is_err());
    }

    #[test]
    fn best_t_term_examples() {
        let x = Signal::new(vec![3.0, -1.0, 2.0]).unwrap();
        assert_eq!(best_t_term(&x, 3).unwrap(), x);
        assert_eq!(
            best_t_term(&x, 2).unwrap().entries(),
            &[3.0, 0.0, 2.0]
        );

        // tie case keeps the lowest indices
        let ones = Signal::new(vec![1.0; 4]).unwrap();
        assert_eq!(
            best_t_term(&ones, 2).unwrap().entries(),
            &[1.0, 1.0, 0.0, 0.0]
        );

        assert!(best_t_term(&x, 0).is_err());
        assert!(best_t_term(&x, 4).is_err());
    }

    #[test]
    fn t_term_l1_identity() {
        let x = Signal::new(vec![0.5, -2.0, 1.5, 0.1]).unwrap();
        for t in 1..=4 {
            let xt = best_t_term(&x, t).unwrap();
            let diff: f64 = x
                .entries()
                .iter()
                .zip(xt.entries())
                .map(|(a, b)| (a - b).abs())
                .sum();
            assert!((diff - (x.l1_norm() - xt.l1_norm())).abs() < 1e-14);
            assert!(xt.l0() <= t);
        }
    }

    #[test]
    fn t_term_relative_error_examples() {
        let x = Signal::new(vec![2.0, 0.0, -2.0, 2.0]).unwrap();
        assert_eq!(t_term_relative_error(&x, 3).unwrap(), 0.0);

        let x = Signal::new(vec![1.0, 1.0]).unwrap();
        let e = t_term_relative_error(&x, 1).unwrap();
        assert!((e - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn power_law_error_at_budget_t() {
        let x = make_power_law_signal(10_000, 1.0);
        let s = numerical_sparsity(&x).unwrap();
        let t = ((2.0 * s * (10_000f64).ln()).ceil() as usize).min(10_000);
        assert!(t_term_relative_error(&x, t).unwrap() <= 1.0 / 3.0);
    }

    #[test]
    fn necessary_t_examples() {
        let ones = Signal::new(vec![1.0; 50]).unwrap();
        let b = prop1_necessary_t(&ones, 1e-9).unwrap();
        assert!((b - 50.0).abs() < 1e-6);

        let e1 = Signal::basis(10, 0).unwrap();
        assert_eq!(prop1_necessary_t(&e1, 1.0).unwrap(), 0.25);

        assert!(prop1_necessary_t(&e1, 0.0).is_err());
    }

    // Brute-force oracle for the necessity bound: scan all t and check that
    // none below the bound achieves the target error.
    #[test]
    fn necessity_brute_force_power_law() {
        let x = make_power_law_signal(10_000, 1.0);
        let eps = 1.0 / 3.0;
        let bound = prop1_necessary_t(&x, eps).unwrap();
        // expected ~ 58 / (4/3)^2 ~ 32.8
        assert!((bound - 32.8).abs() < 1.0, "bound = {bound}");
        let mut min_feasible = None;
        for t in 1..=x.len() {
            if t_term_relative_error(&x, t).unwrap() <= eps {
                min_feasible = Some(t);
                break;
            }
        }
        let min_feasible = min_feasible.expect("some t achieves the error");
        assert!(
            (min_feasible as f64) >= bound,
            "min feasible {min_feasible} < bound {bound}"
        );
        assert!(min_feasible >= 33);
    }

    #[test]
    fn necessity_brute_force_small_vectors() {
        use crate::rng::RngStream;
        use rand::Rng;
        let mut rng = RngStream::new(4242).rng();
        for trial in 0..50 {
            let p = 2 + (trial % 199);
            let x = Signal::new((0..p).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).unwrap();
            if x.is_zero() {
                continue;
            }
            for eps in [0.25, 0.5, 1.0] {
                let bound = prop1_necessary_t(&x, eps).unwrap();
                for t in 1..=p {
                    if t_term_relative_error(&x, t).unwrap() <= eps {
                        assert!(t as f64 >= bound - 1e-12);
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn sufficiency_grid() {
        for nu in [0.5, 0.7, 1.0, 1.3, 2.0] {
            for p in [100usize, 1_000, 10_000] {
                let x = make_power_law_signal(p, nu);
                let s = numerical_sparsity(&x).unwrap();
                let t = ((2.0 * s * (p as f64).ln()).ceil() as usize).min(p);
                let err = t_term_relative_error(&x, t).unwrap();
                assert!(
                    err <= 1.0 / 3.0,
                    "nu = {nu}, p = {p}: error {err} > 1/3 at t = {t}"
                );
            }
        }
    }

    #[test]
    fn l1_tail_monotone_in_t() {
        let x = make_power_law_signal(500, 0.8);
        let mut prev = f64::INFINITY;
        for t in 1..=500 {
            let xt = best_t_term(&x, t).unwrap();
            let tail = x.l1_norm() - xt.l1_norm();
            assert!(tail <= prev + 1e-12);
            prev = tail;
        }
    }

    #[test]
    fn sharp_bound_random_vectors() {
        use crate::rng::RngStream;
        use rand::Rng;
        let mut rng = RngStream::new(7).rng();
        for trial in 0..1000 {
            let p = 1 + (trial % 64);
            let dense = trial % 3 != 0;
            let entries: Vec<f64> = (0..p)
                .map(|_| {
                    if dense || rng.random::<f64>() < 0.3 {
                        rng.random::<f64>() * 4.0 - 2.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let x = Signal::new(entries).unwrap();
            if x.is_zero() {
                continue;
            }
            let s = numerical_sparsity(&x).unwrap();
            assert!(s >= 1.0 - 1e-12);
            assert!(s <= x.l0() as f64 + 1e-9);
            assert!(x.l0() <= p);
        }
    }
}

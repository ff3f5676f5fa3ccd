//! Standard normal CDF and quantile function.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};

/// Standard normal CDF `Phi(z)`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal density.
fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Complementary error function, accurate to ~1e-15 relative.
///
/// Alternating Maclaurin series for |x| <= 2 and a Lentz-evaluated continued
/// fraction for the tail.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = (2/sqrt(pi)) * sum_k (-1)^k x^(2k+1) / (k! (2k+1))
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x2 / kf;
        let add = term / (2.0 * kf + 1.0);
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/(x sqrt(pi)) * 1/(1 + v1/(1 + v2/(1 + ...))),
    // v_k = k/(2 x^2); evaluated by the modified Lentz algorithm.
    let tiny = 1e-300;
    let mut f = 1.0f64;
    let mut c = f;
    let mut d = 0.0f64;
    for k in 1..300 {
        let v = k as f64 / (2.0 * x * x);
        d = 1.0 + v * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + v / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (x * std::f64::consts::PI.sqrt()) / f
}

/// Quantile `z` with `Phi(z) = u`, accurate to well below 1e-8 absolute.
///
/// Rational initial approximation refined by one Newton step on `Phi`.
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::param("u", format!("must lie in (0, 1), got {u}")));
    }
    let z0 = rational_approximation(u);
    // One Newton step: z1 = z0 - (Phi(z0) - u) / phi(z0).
    let pdf = normal_pdf(z0);
    let z1 = if pdf > 1e-280 {
        z0 - (normal_cdf(z0) - u) / pdf
    } else {
        z0
    };
    Ok(z1)
}

/// Peter Acklam's rational approximation to the inverse normal CDF
/// (relative error below 1.15e-9 over (0, 1)).
fn rational_approximation(u: f64) -> f64 {
    const A: [f64; 6] = [
        -39.696_830_286_653_8,
        220.946_098_424_521,
        -275.928_510_446_969,
        138.357_751_867_269,
        -30.664_798_066_147_2,
        2.506_628_277_459_24,
    ];
    const B: [f64; 5] = [
        -54.476_098_798_224_1,
        161.585_836_858_041,
        -155.698_979_859_887,
        66.801_311_887_719_7,
        -13.280_681_552_885_7,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_29e-3,
        -0.322_396_458_041_136,
        -2.400_758_277_161_84,
        -2.549_732_539_343_73,
        4.374_664_141_464_97,
        2.938_163_982_698_78,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_46e-3,
        0.322_467_129_070_04,
        2.445_134_137_143,
        3.754_408_661_907_42,
    ];
    const U_LOW: f64 = 0.024_25;

    if u < U_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - U_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: Phi computed by adaptive Simpson quadrature of the
    /// density, inverted by bisection. Shares no code with the erfc path.
    fn phi_quadrature(z: f64) -> f64 {
        fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
            (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        }
        fn adaptive(a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = normal_pdf(lm);
            let frm = normal_pdf(rm);
            let left = simpson(a, m, fa, flm, fm);
            let right = simpson(m, b, fm, frm, fb);
            if depth == 0 || (left + right - whole).abs() < 1e-13 {
                left + right + (left + right - whole) / 15.0
            } else {
                adaptive(a, m, fa, flm, fm, left, depth - 1)
                    + adaptive(m, b, fm, frm, fb, right, depth - 1)
            }
        }
        let (a, b) = if z >= 0.0 { (0.0, z) } else { (z, 0.0) };
        let fa = normal_pdf(a);
        let fb = normal_pdf(b);
        let fm = normal_pdf(0.5 * (a + b));
        let whole = simpson(a, b, fa, fm, fb);
        let integral = adaptive(a, b, fa, fm, fb, whole, 30);
        if z >= 0.0 {
            0.5 + integral
        } else {
            0.5 - integral
        }
    }

    fn quantile_oracle(u: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0f64, 10.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if phi_quadrature(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn median_is_zero() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn frozen_quantiles_match_oracle() {
        // values frozen from the quadrature-bisection oracle
        let q75 = normal_quantile(0.75).unwrap();
        assert!((q75 - 0.674_489_750_196_08).abs() < 1e-8, "q75 = {q75}");
        assert!((q75 - quantile_oracle(0.75)).abs() < 1e-8);

        let q95 = normal_quantile(0.95).unwrap();
        assert!((q95 - 1.644_853_626_951_47).abs() < 1e-8, "q95 = {q95}");
        assert!((q95 - quantile_oracle(0.95)).abs() < 1e-8);
    }

    #[test]
    fn accurate_on_a_grid() {
        for i in 1..200 {
            let u = i as f64 / 200.0;
            let z = normal_quantile(u).unwrap();
            assert!(
                (z - quantile_oracle(u)).abs() < 1e-8,
                "u = {u}: {z} vs {}",
                quantile_oracle(u)
            );
            // round trip through the CDF
            assert!((normal_cdf(z) - u).abs() < 1e-12);
        }
        // tails
        for u in [1e-6, 1e-4, 1.0 - 1e-4, 1.0 - 1e-6] {
            let z = normal_quantile(u).unwrap();
            assert!((normal_cdf(z) - u).abs() < 1e-12 * u.max(1.0 - u).max(1e-3));
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(-0.5).is_err());
        assert!(normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn cdf_symmetry() {
        for z in [0.1, 0.7, 1.3, 2.9, 5.0] {
            assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() < 1e-15);
        }
        assert_eq!(normal_cdf(0.0), 0.5);
    }
}

//! Special functions: log-gamma, Stirling error, Gaussian tail, incomplete gamma, chi-square.

use crate::error::{domain, Error, Result};
use std::f64::consts::{LN_2, PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Stirling error `ln Γ(x+1) - (x+½)ln x + x - ½ln 2π` for `x > 0`.
pub fn stirling_error(x: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if x <= 15.0 {
        let lgam = if x == x.floor() {
            // exact-ish ln x! for small integers
            (2..=x as u64).map(|i| (i as f64).ln()).sum::<f64>()
        } else {
            ln_gamma(x + 1.0)
        };
        return lgam - (x + 0.5) * x.ln() + x - LN_SQRT_2PI;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    (S0 - r2 * (S1 - r2 * (S2 - r2 * (S3 - r2 * S4)))) * r
}

/// Deviance term `x ln(x/m) + m - x`, accurate when `x ≈ m`.
pub fn bd0(x: f64, m: f64) -> f64 {
    if x == 0.0 {
        return m;
    }
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1;
        loop {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1;
            if j > 1000 {
                return s;
            }
        }
    }
    x * (x / m).ln() + m - x
}

/// `ln(x^a e^{-x} / Γ(a+1))`, the Poisson-like kernel shared by gamma quantities.
pub fn ln_gamma_kernel(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if a == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if a == 0.0 {
        return -x;
    }
    if a < 1.0 {
        return a * x.ln() - x - ln_gamma(a + 1.0);
    }
    -stirling_error(a) - bd0(a, x) - (2.0 * PI * a).ln() / 2.0
}

/// Gaussian complementary cdf.
pub fn q_func(t: f64) -> f64 {
    0.5 * libm::erfc(t / SQRT_2)
}

/// Standard Gaussian density.
pub fn gauss_pdf(t: f64) -> f64 {
    (-0.5 * t * t - LN_SQRT_2PI).exp()
}

fn acklam_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Inverse of `q_func` on `(0, 1)`.
pub fn q_inv(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("q_inv needs eps in (0,1), got {eps}"));
    }
    if eps > 0.5 {
        return Ok(-q_inv(1.0 - eps)?);
    }
    if eps == 0.5 {
        return Ok(0.0);
    }
    // lower-tail quantile at eps, negated
    let mut x = -acklam_lower(eps);
    for _ in 0..4 {
        let pdf = gauss_pdf(x);
        if pdf == 0.0 {
            break;
        }
        // Halley step on Q(x) - eps
        let f = q_func(x) - eps;
        let step = f / pdf;
        let next = x + step / (1.0 - 0.5 * x * step);
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

const GAMMA_MAX_ITER: usize = 200_000;

/// Regularized incomplete gamma pair `(P(a,x), Q(a,x))`.
pub fn incomplete_gamma(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || x.is_nan() || x < 0.0 {
        return domain(format!("incomplete gamma needs a > 0, x >= 0 (a={a}, x={x})"));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    let ln_k = ln_gamma_kernel(a, x);
    if x < a + 1.0 {
        // P = kernel * sum_{k>=0} x^k / ((a+1)...(a+k))
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut ap = a;
        for _ in 0..GAMMA_MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term < sum * 1e-17 {
                let p = (ln_k + sum.ln()).exp().min(1.0);
                return Ok((p, 1.0 - p));
            }
        }
        Err(Error::NonConvergence {
            what: "incomplete gamma series",
            achieved: term / sum,
            wanted: 1e-17,
        })
    } else {
        // Q = kernel * a * CF, modified Lentz
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                let q = (ln_k + a.ln() + h.ln()).exp().min(1.0);
                return Ok((1.0 - q, q));
            }
        }
        Err(Error::NonConvergence {
            what: "incomplete gamma continued fraction",
            achieved: f64::NAN,
            wanted: 1e-16,
        })
    }
}

fn check_dof(n: f64) -> Result<()> {
    if !(n >= 1.0) || !n.is_finite() {
        return domain(format!("chi-square needs dof >= 1, got {n}"));
    }
    Ok(())
}

/// Chi-square cdf with `n` degrees of freedom.
pub fn chi2_cdf(n: f64, x: f64) -> Result<f64> {
    check_dof(n)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(incomplete_gamma(n / 2.0, x / 2.0)?.0)
}

/// Chi-square survival function `P[Z > x]`.
pub fn chi2_sf(n: f64, x: f64) -> Result<f64> {
    check_dof(n)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    Ok(incomplete_gamma(n / 2.0, x / 2.0)?.1)
}

/// Natural log of the chi-square density.
pub fn chi2_ln_pdf(n: f64, x: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    let a = n / 2.0;
    let y = x / 2.0;
    if x == 0.0 {
        return match n {
            _ if n < 2.0 => f64::INFINITY,
            _ if n == 2.0 => -LN_2,
            _ => f64::NEG_INFINITY,
        };
    }
    -LN_2 + a.ln() - y.ln() + ln_gamma_kernel(a, y)
}

pub fn chi2_pdf(n: f64, x: f64) -> f64 {
    chi2_ln_pdf(n, x).exp()
}

/// Chi-square quantile: the `x` with `cdf(x) = p`.
pub fn chi2_quantile(n: f64, p: f64) -> Result<f64> {
    check_dof(n)?;
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("chi2 quantile needs p in (0,1), got {p}"));
    }
    if p > 0.5 {
        chi2_solve(n, 1.0 - p, true)
    } else {
        chi2_solve(n, p, false)
    }
}

/// Inverse survival function: the `x` with `sf(x) = q`.
pub fn chi2_isf(n: f64, q: f64) -> Result<f64> {
    check_dof(n)?;
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("chi2 isf needs q in (0,1), got {q}"));
    }
    if q > 0.5 {
        chi2_solve(n, 1.0 - q, false)
    } else {
        chi2_solve(n, q, true)
    }
}

/// Solves `tail(x) = target` where `tail` is the survival function if `upper`,
/// else the cdf. Safeguarded Newton inside a maintained bracket.
fn chi2_solve(n: f64, target: f64, upper: bool) -> Result<f64> {
    let tail = |x: f64| -> Result<f64> {
        let (p, q) = incomplete_gamma(n / 2.0, x / 2.0)?;
        Ok(if upper { q } else { p })
    };
    // f(x) = tail(x) - target; increasing for the cdf, decreasing for sf
    let sign = if upper { -1.0 } else { 1.0 };
    // Wilson-Hilferty start
    let z = if upper { q_inv(target)? } else { -q_inv(target)? };
    let h = 2.0 / (9.0 * n);
    let mut x = (n * (1.0 - h + z * h.sqrt()).powi(3)).max(1e-8 * n);

    let mut lo = 0.0;
    let mut hi = x.max(1.0);
    while sign * (tail(hi)? - target) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Bracket(format!("chi2 quantile for dof {n}")));
        }
    }
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..300 {
        let f = tail(x)? - target;
        if f == 0.0 {
            return Ok(x);
        }
        if sign * f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = chi2_pdf(n, x);
        let mut next = if dens > 0.0 { x - sign * f / dens } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-14 * x.abs() || hi - lo <= 1e-14 * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence {
        what: "chi2 quantile",
        achieved: (hi - lo) / hi,
        wanted: 1e-14,
    })
}

/// Normal estimate of `P[(1/n)Σ Z_i > t]` and the Berry-Esseen radius around it.
///
/// `t` is a threshold on the sample mean; the radius is `6T/(V^{3/2}√n)`.
/// Diagnostic only.
pub fn berry_esseen_window(
    mean: f64,
    variance: f64,
    third_abs_moment: f64,
    n: u64,
    t: f64,
) -> Result<(f64, f64)> {
    if !(variance > 0.0) {
        return domain("Berry-Esseen window needs positive variance");
    }
    let nf = n as f64;
    let est = q_func((t - mean) * (nf / variance).sqrt());
    let radius = 6.0 * third_abs_moment / variance.powf(1.5) / nf.sqrt();
    Ok((est, radius))
}

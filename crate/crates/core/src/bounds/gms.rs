//! Bounds for the memoryless Gaussian source under mean-squared error.

use super::engine::miss_prob;
use super::Remainder;
use crate::error::{domain, Error, Result};
use crate::numerics::quadrature::integrate;
use crate::numerics::{chi2_cdf, chi2_isf, chi2_pdf, chi2_sf, ln_gamma, maximize_1d, q_inv};
use std::f64::consts::PI;

/// Constant of the moderate-radius covering branch, `7^{4 ln 7 / 7} / 4`.
pub const MODERATE_RADIUS_CONSTANT: f64 = 2.175_933_602_546_164;

const QUAD_ABS_TOL: f64 = 1e-13;
const QUAD_REL_TOL: f64 = 1e-10;
const END_HALVINGS: i32 = 48;

fn check(sigma2: f64, d: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return domain(format!("variance must be positive, got {sigma2}"));
    }
    if !(d > 0.0 && d < sigma2) {
        return domain(format!("need 0 < d < {sigma2}, got {d}"));
    }
    Ok(())
}

/// Tilted-information converse: `sup_γ P[χ²_n >= z₀(γ)] - e^{-γ}` with
/// `z₀(γ) = n + 2(ln M + γ - (n/2) ln(σ²/d))`.
pub fn gms_converse_tilted(sigma2: f64, n: u64, d: f64, log_m: f64) -> Result<f64> {
    check(sigma2, d)?;
    let nf = n as f64;
    let shift = nf + 2.0 * (log_m - 0.5 * nf * (sigma2 / d).ln());
    let f = |g: f64| chi2_sf(nf, (shift + 2.0 * g).max(0.0)).unwrap_or(f64::NAN) - (-g).exp();
    let hi = 60.0 + nf.sqrt() * 10.0;
    let (_, best) = maximize_1d(f, 0.0, hi, 1e-10)?;
    Ok(best.max(0.0))
}

/// Normalized squared radius `r²` with `P[χ²_n > n r²] = ε`.
pub fn norm_radius_sq(n: u64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0,1), got {eps}"));
    }
    Ok(chi2_isf(n as f64, eps)? / n as f64)
}

/// Volume converse, solved for `log M`: the balls of radius `√(nd)` must
/// cover a set of probability `1 - ε`.
pub fn gms_converse_volume(sigma2: f64, n: u64, d: f64, eps: f64) -> Result<f64> {
    check(sigma2, d)?;
    let r2 = norm_radius_sq(n, eps)?;
    Ok(0.5 * n as f64 * (sigma2 * r2 / d).ln())
}

/// Ends `(a, b)` of the normalized radius interval on which a reproduction
/// sphere can reach the source point.
pub fn cap_support(sigma2: f64, d: f64) -> (f64, f64) {
    let t = d / sigma2;
    ((1.0 - t).sqrt() - t.sqrt(), (1.0 - t).sqrt() + t.sqrt())
}

/// `ln` of the lower bound on the fraction of the reproduction sphere within
/// distortion `d` of a source point at normalized squared radius `z`.
pub fn ln_cap_fraction(sigma2: f64, n: u64, d: f64, z: f64) -> f64 {
    let nf = n as f64;
    let t = d / sigma2;
    let ratio = (1.0 + z - 2.0 * t).powi(2) / (4.0 * (1.0 - t) * z);
    if !(ratio < 1.0) || z <= 0.0 {
        return f64::NEG_INFINITY;
    }
    ln_gamma(nf / 2.0 + 1.0) - 0.5 * (PI * nf).ln() - ln_gamma((nf - 1.0) / 2.0 + 1.0)
        + 0.5 * (nf - 1.0) * (-ratio).ln_1p()
}

/// Random-coding achievability over codewords uniform on the sphere of
/// squared radius `n(σ² - d)`.
pub fn gms_achievability_cap(sigma2: f64, n: u64, d: f64, log_m: f64) -> Result<f64> {
    check(sigma2, d)?;
    if n < 2 {
        return domain("the sphere-cap bound needs n >= 2");
    }
    if log_m == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    let nf = n as f64;
    let (a, b) = cap_support(sigma2, d);
    let (lo, hi) = (nf * a * a, nf * b * b);
    let outside = chi2_cdf(nf, lo)? + chi2_sf(nf, hi)?;
    let g = |u: f64| {
        let lr = ln_cap_fraction(sigma2, n, d, u / nf);
        miss_prob(lr, log_m) * chi2_pdf(nf, u)
    };
    // the cap fraction peaks at z = |1 - 2t| and vanishes like a power at both
    // ends, so for large M the miss probability steps sharply next to an end;
    // pieces shrink geometrically toward each end to resolve the step
    let peak = (nf * (1.0 - 2.0 * d / sigma2).abs()).clamp(lo, hi);
    let mut inside = 0.0;
    for (end, span, dir) in [(lo, peak - lo, 1.0), (hi, hi - peak, -1.0)] {
        if span <= 0.0 {
            continue;
        }
        let at = |k: i32| end + dir * span * 0.5f64.powi(k);
        for k in 0..END_HALVINGS {
            let (x, y) = (at(k + 1), at(k));
            let (l, r) = if x < y { (x, y) } else { (y, x) };
            inside += integrate(g, l, r, QUAD_ABS_TOL, QUAD_REL_TOL)?.value;
        }
        // the sliver next to the end is charged in full
        let last = at(END_HALVINGS);
        inside += (last - end).abs() * chi2_pdf(nf, end).max(chi2_pdf(nf, last));
    }
    Ok((outside + inside).clamp(0.0, 1.0))
}

/// `ln` of the number of unit balls sufficient to cover an `n`-ball of radius `r`.
pub fn covering_count(r: f64, n: u64) -> Result<f64> {
    if !(r > 1.0) {
        return domain(format!("covering radius ratio must exceed 1, got {r}"));
    }
    if n < 2 {
        return domain("covering needs n >= 2");
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let lnln_n = ln_n.ln();
    let vol = nf * r.ln();
    let rogers = || (nf * ln_n + nf * lnln_n + 5.0 * nf).ln();
    let small_r = |lead: f64| -> Result<f64> {
        let bracket = (nf - 1.0) * (r * nf).ln()
            + (nf - 1.0) * lnln_n
            + 0.5 * ln_n
            + (PI * (2.0 * nf).sqrt() / (PI * nf - 2.0).sqrt()).ln();
        let f1 = 1.0 - 2.0 / ln_n;
        let f2 = 1.0 - 2.0 / (PI * nf).sqrt();
        if !(bracket > 0.0 && f1 > 0.0 && f2 > 0.0) {
            return Err(Error::Domain(format!(
                "covering count undefined at n = {n}, r = {r}"
            )));
        }
        Ok(lead + 0.5 * (2.0 * PI).ln() + bracket.ln() - r.ln() - f1.ln() - f2.ln() + vol)
    };
    let v = if r >= nf {
        1.0 + rogers() + vol
    } else if r >= nf / ln_n {
        ln_n + rogers() + vol
    } else if r > 2.0 {
        small_r(MODERATE_RADIUS_CONSTANT.ln() + 1.5 * ln_n - 2.0 * lnln_n)?
    } else {
        small_r(0.5 * ln_n)?
    };
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("covering count at n = {n}, r = {r}")));
    }
    Ok(v)
}

/// Covering achievability, solved for `log M`: cover the ball holding the
/// source with probability `1 - ε` by balls of radius `√(nd)`.
pub fn gms_achievability_covering(sigma2: f64, n: u64, d: f64, eps: f64) -> Result<f64> {
    check(sigma2, d)?;
    let ratio = (sigma2 * norm_radius_sq(n, eps)? / d).sqrt();
    if ratio <= 1.0 {
        return domain(format!("covering bound vacuous: radius ratio {ratio} <= 1"));
    }
    covering_count(ratio, n)
}

/// Gaussian approximation of the minimum rate, in nats per symbol.
pub fn gms_gaussian_approx(sigma2: f64, n: u64, d: f64, eps: f64, mode: Remainder) -> Result<f64> {
    check(sigma2, d)?;
    let nf = n as f64;
    let rem = match mode {
        Remainder::Zero => 0.0,
        Remainder::HalfLogN => mode.nats(n, 0.5),
        other => {
            return Err(Error::Unsupported(format!(
                "remainder {other:?} not defined for the Gaussian source"
            )))
        }
    };
    Ok(0.5 * (sigma2 / d).ln() + (0.5 / nf).sqrt() * q_inv(eps)? + rem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LOG2_E;

    #[test]
    fn moderate_constant_pinned() {
        let c = 7f64.powf(4.0 * 7f64.ln() / 7.0) / 4.0;
        assert!((c - MODERATE_RADIUS_CONSTANT).abs() < 1e-14);
    }

    #[test]
    fn volume_two_dims_closed_form() {
        let eps = (-1.0f64).exp();
        assert!((norm_radius_sq(2, eps).unwrap() - 1.0).abs() < 1e-12);
        let lm = gms_converse_volume(1.0, 2, 0.25, eps).unwrap();
        assert!((lm - 4f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn volume_matches_expansion() {
        let (n, eps) = (1000u64, 1e-2);
        let rate = gms_converse_volume(1.0, n, 0.25, eps).unwrap() / n as f64 * LOG2_E;
        let first = 1.0 + (0.5 / n as f64).sqrt() * 2.3263 * LOG2_E;
        assert!(rate < first + 0.002 && rate > first - 0.01, "{rate} vs {first}");
    }

    #[test]
    fn tilted_converse_limits() {
        assert!(gms_converse_tilted(1.0, 100, 0.25, 1e4).unwrap() < 1e-12);
        let e = gms_converse_tilted(1.0, 100, 0.25, 0.0).unwrap();
        assert!(e > 0.99);
    }

    #[test]
    fn cap_fraction_behaviour() {
        let (a, b) = cap_support(1.0, 0.3);
        for z in [a * a * 1.0001, 0.5, 1.0, b * b * 0.9999] {
            let lr = ln_cap_fraction(1.0, 50, 0.3, z);
            assert!(lr <= 0.0 && lr.is_finite());
        }
        assert_eq!(ln_cap_fraction(1.0, 50, 0.3, a * a * 0.99), f64::NEG_INFINITY);
        assert_eq!(ln_cap_fraction(1.0, 50, 0.3, b * b * 1.01), f64::NEG_INFINITY);
        assert!(ln_cap_fraction(1.0, 50, 0.3, a * a * (1.0 + 1e-9)) < -100.0);
    }

    #[test]
    fn cap_endpoints() {
        assert_eq!(gms_achievability_cap(1.0, 20, 0.25, f64::NEG_INFINITY).unwrap(), 1.0);
        let a = gms_achievability_cap(1.0, 20, 0.25, 5.0).unwrap();
        let b = gms_achievability_cap(1.0, 20, 0.25, 20.0).unwrap();
        assert!(b < a && a <= 1.0 && b >= 0.0);
    }

    #[test]
    fn covering_branches() {
        let n = 100u64;
        let nf = n as f64;
        let edge = nf / nf.ln();
        for r in [1.5, 2.0, 3.0, edge - 0.01, edge, edge + 0.01, nf - 0.01, nf, nf + 1.0] {
            let v = covering_count(r, n).unwrap();
            assert!(v >= nf * r.ln(), "r={r}");
        }
        let v = covering_count(nf + 1.0, n).unwrap();
        let want = 1.0 + (nf * nf.ln() + nf * nf.ln().ln() + 5.0 * nf).ln() + nf * (nf + 1.0).ln();
        assert!((v - want).abs() < 1e-12);
        assert!(covering_count(1.0, n).is_err());
    }

    #[test]
    fn covering_two_dims() {
        let eps = (-1.0f64).exp();
        let v = gms_achievability_covering(1.0, 2, 1.0 / 9.0, eps).unwrap();
        assert!(v.is_finite() && v >= 2.0 * 3f64.ln());
    }

    #[test]
    fn approx_reference_value() {
        let bits = gms_gaussian_approx(1.0, 1000, 0.25, 1e-2, Remainder::HalfLogN).unwrap() * LOG2_E;
        assert!((bits - 1.080).abs() < 1e-3, "{bits}");
        let h = gms_gaussian_approx(1.0, 1000, 0.25, 0.5, Remainder::Zero).unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-15);
    }
}

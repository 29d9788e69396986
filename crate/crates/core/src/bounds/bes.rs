//! Bounds for the binary erased source under Hamming distortion on the
//! unerased letter, with erasures known to both ends.

use super::engine::{converse_ball, rc_exact, BallMassDist};
use super::Remainder;
use crate::error::{domain, Result};
use crate::numerics::{binom_ln_pmf_table, floor_nudged, ln_choose, log_add, q_inv};
use crate::sources::SourceModel;
use rayon::prelude::*;
use std::f64::consts::LN_2;

/// Mass below which erasure counts and split counts are truncated.
const TAIL_CUT: f64 = 1e-18;

fn check(delta: f64, d: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return domain(format!("erasure probability must lie in [0,1), got {delta}"));
    }
    let lo = delta / 2.0;
    if delta == 0.0 {
        if !(d >= 0.0 && d < 0.5) {
            return domain(format!("need 0 <= d < 1/2 without erasures, got {d}"));
        }
    } else if !(d > lo && d < 1.0 - lo) {
        return domain(format!("need {lo} < d < {}, got {d}", 1.0 - lo));
    }
    Ok(())
}

/// Joint law of the erasure count `k` and the number `j` of erased letters
/// reproduced wrongly at random, paired with the uniform mass of the Hamming
/// ball left for the unerased part. Returns the atoms and the probability of
/// truncated `(k, j)` pairs.
pub fn bes_ball_masses(delta: f64, n: u64, d: f64) -> Result<(BallMassDist, f64)> {
    check(delta, d)?;
    let r = floor_nudged(n as f64 * d);
    let kpmf: Vec<f64> = if delta == 0.0 {
        let mut v = vec![f64::NEG_INFINITY; n as usize + 1];
        v[0] = 0.0;
        v
    } else {
        binom_ln_pmf_table(n, delta)
    };
    let cut = TAIL_CUT.ln();
    let chunks: Vec<(Vec<(f64, f64)>, f64)> = (0..=n)
        .into_par_iter()
        .filter(|&k| kpmf[k as usize] > cut)
        .map(|k| {
            let rest = n - k;
            // ln of partial sums Σ_{i<=s} C(rest, i), for s = 0..=min(rest, r)
            let top = r.min(rest as i64);
            let mut prefix = Vec::with_capacity(top.max(0) as usize + 1);
            let mut acc = f64::NEG_INFINITY;
            for i in 0..=top {
                acc = log_add(acc, ln_choose(rest, i as u64));
                prefix.push(acc);
            }
            let lk = kpmf[k as usize] - k as f64 * LN_2;
            let mut atoms = Vec::new();
            let mut dropped = 0.0;
            let mut empty = 0.0;
            for j in 0..=k {
                let lp = lk + ln_choose(k, j);
                let s = r - j as i64;
                if s < 0 {
                    empty += lp.exp();
                    continue;
                }
                if lp < cut + kpmf[k as usize] {
                    dropped += lp.exp();
                    continue;
                }
                let lw = prefix[s.min(top) as usize] - rest as f64 * LN_2;
                atoms.push((lp.exp(), lw));
            }
            if empty > 0.0 {
                atoms.push((empty, f64::NEG_INFINITY));
            }
            (atoms, dropped)
        })
        .collect();
    let mut ball = BallMassDist::default();
    let mut dropped = 0.0;
    for (atoms, dr) in chunks {
        for (p, lw) in atoms {
            ball.push(p, lw);
        }
        dropped += dr;
    }
    dropped += (1.0 - ball.total_mass() - dropped).max(0.0);
    Ok((ball, dropped))
}

/// Converse: even a decompressor that knows the erasure pattern must cover
/// the unerased part with balls. Truncated mass is left out (lower estimate).
pub fn bes_converse(delta: f64, n: u64, d: f64, log_m: f64) -> Result<f64> {
    let (ball, _) = bes_ball_masses(delta, n, d)?;
    Ok(converse_ball(&ball, log_m).clamp(0.0, 1.0))
}

/// Random-coding achievability over equiprobable codewords. Truncated mass is
/// charged in full (upper estimate).
pub fn bes_achievability(delta: f64, n: u64, d: f64, log_m: f64) -> Result<f64> {
    let (ball, dropped) = bes_ball_masses(delta, n, d)?;
    Ok((rc_exact(&ball, log_m) + dropped).clamp(0.0, 1.0))
}

/// Gaussian approximation of the minimum rate, in nats per symbol.
pub fn bes_gaussian_approx(delta: f64, n: u64, d: f64, eps: f64, mode: Remainder) -> Result<f64> {
    let src = SourceModel::bes(delta)?;
    let nf = n as f64;
    let v = src.dispersion(d)?;
    Ok(src.rate_distortion(d)? + (v / nf).sqrt() * q_inv(eps)? + mode.nats(n, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::binary;
    use proptest::prelude::*;

    #[test]
    fn no_erasures_reduce_to_equiprobable() {
        for &(n, d, lm) in &[(100u64, 0.11, 30.0), (500, 0.2, 100.0), (40, 0.0, 27.0)] {
            let a = bes_converse(0.0, n, d, lm).unwrap();
            let b = binary::ebms_converse(n, d, lm).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} {b}");
            let a = bes_achievability(0.0, n, d, lm).unwrap();
            let b = binary::ebms_achievability(n, d, lm).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn weights_normalize() {
        for &(delta, n, d) in &[(0.1, 300u64, 0.1), (0.5, 80, 0.3), (0.9, 50, 0.46)] {
            let (ball, dropped) = bes_ball_masses(delta, n, d).unwrap();
            assert!((ball.total_mass() + dropped - 1.0).abs() < 1e-9);
            assert!(dropped < 1e-12);
        }
    }

    #[test]
    fn huge_codebooks_leave_erasure_errors() {
        // erased letters are wrong half the time whatever the codebook
        let (delta, n, d) = (0.1, 60u64, 0.1);
        let lm = n as f64 * LN_2 + 10.0;
        let r = floor_nudged(n as f64 * d);
        let kp = binom_ln_pmf_table(n, delta);
        let mut floor = 0.0;
        for k in 0..=n {
            let over = 1.0 - crate::numerics::binom_cdf(k, 0.5, r);
            floor += kp[k as usize].exp() * over;
        }
        let c = bes_converse(delta, n, d, lm).unwrap();
        let a = bes_achievability(delta, n, d, lm).unwrap();
        assert!((c - floor).abs() < 1e-12, "{c} vs {floor}");
        assert!((a - floor).abs() < 1e-12);
        assert!(bes_converse(delta, n, d, 0.0).unwrap() > 0.99);
    }

    #[test]
    fn single_letter_by_hand() {
        // n = 1, delta = 0.5, d = 0.3: floor(nd) = 0. An erased letter costs a
        // coin flip; an unerased one needs the exact bit (ball mass 1/2).
        let lm = 0.0;
        let conv = bes_converse(0.5, 1, 0.3, lm).unwrap();
        // erased: j=0 (w=1, 1-M·1 = 0), j=1 (w=0 → 1); unerased: 1 - 1/2
        let want = 0.5 * 0.5 + 0.5 * 0.5;
        assert!((conv - want).abs() < 1e-12);
        let ach = bes_achievability(0.5, 1, 0.3, lm).unwrap();
        assert!((ach - want).abs() < 1e-12);
    }

    #[test]
    fn dispersion_slope_at_reference_point() {
        let src = SourceModel::bes(0.1).unwrap();
        assert!((src.lambda_star(0.1).unwrap() - 17f64.ln()).abs() < 1e-12);
        let e = bes_gaussian_approx(0.1, 1000, 0.1, 0.5, Remainder::Zero).unwrap();
        assert!((e - src.rate_distortion(0.1).unwrap()).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn converse_below_achievability(delta in 0.0f64..0.6, frac in 0.1f64..0.9,
                                        n in 5u64..120, lm in 0.0f64..40.0) {
            let lo = delta / 2.0;
            let d = lo + frac * (0.5 - lo);
            let c = bes_converse(delta, n, d, lm).unwrap();
            let a = bes_achievability(delta, n, d, lm).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!(c <= a + 1e-12);
        }
    }
}

//! Bounds for binary memoryless sources under Hamming distortion.
//!
//! `p = 1/2` is the equiprobable case, where the ball mass is the same for
//! every source string and the bounds reduce to closed forms.

use super::engine::{miss_prob, BallMassDist, SumDist};
use super::Remainder;
use crate::error::{domain, Result};
use crate::numerics::{
    binary_entropy, binom_ln_pmf, binom_ln_pmf_table, ceil_nudged, floor_nudged, ln_choose,
    ln_neg_log1m_exp, log_add, log_partial_binom_sum, log_sum_exp, q_inv,
};
use rayon::prelude::*;
use std::f64::consts::LN_2;

/// Hamming radius `⌊nd⌋` used throughout.
pub fn radius(n: u64, d: f64) -> i64 {
    floor_nudged(n as f64 * d)
}

fn check_eq(d: f64) -> Result<()> {
    if !(0.0..0.5).contains(&d) {
        return domain(format!("equiprobable binary bounds need 0 <= d < 1/2, got {d}"));
    }
    Ok(())
}

fn check_bms(p: f64, d: f64) -> Result<()> {
    if !(p > 0.0 && p <= 0.5) {
        return domain(format!("binary source needs 0 < p <= 1/2, got {p}"));
    }
    if !(d >= 0.0 && d < p) {
        return domain(format!(
            "binary bounds need 0 <= d < p (d = {d}, p = {p}); the rate is zero beyond p"
        ));
    }
    Ok(())
}

/// `ln` of the uniform-measure mass of a Hamming ball of radius `⌊nd⌋`.
pub fn ebms_ln_ball(n: u64, d: f64) -> f64 {
    log_partial_binom_sum(n, radius(n, d)).ln() - n as f64 * LN_2
}

/// Equiprobable converse: `ε >= 1 - M 2^{-n} <n | ⌊nd⌋>`.
pub fn ebms_converse(n: u64, d: f64, log_m: f64) -> Result<f64> {
    check_eq(d)?;
    Ok((1.0 - (log_m + ebms_ln_ball(n, d)).exp()).max(0.0))
}

/// The equiprobable converse solved for `log M`.
pub fn ebms_converse_log_m(n: u64, d: f64, eps: f64) -> Result<f64> {
    check_eq(d)?;
    Ok((-eps).ln_1p() - ebms_ln_ball(n, d))
}

/// Equiprobable achievability: `ε <= (1 - 2^{-n} <n | ⌊nd⌋>)^M`.
pub fn ebms_achievability(n: u64, d: f64, log_m: f64) -> Result<f64> {
    check_eq(d)?;
    Ok(miss_prob(ebms_ln_ball(n, d), log_m))
}

/// The equiprobable achievability solved for real-valued `log M`.
pub fn ebms_achievability_log_m(n: u64, d: f64, eps: f64) -> Result<f64> {
    check_eq(d)?;
    let lw = ebms_ln_ball(n, d);
    if lw >= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((-eps.ln()).ln() - ln_neg_log1m_exp(lw))
}

/// Distribution of the summed d-tilted information: a binomial lattice.
pub fn bms_tilted_sum(p: f64, n: u64, d: f64) -> Result<SumDist> {
    check_bms(p, d)?;
    let (a, b) = (-p.ln(), -(-p).ln_1p());
    let shift = n as f64 * binary_entropy(d);
    let atoms = (0..=n)
        .map(|k| {
            let kf = k as f64;
            (kf * a + (n as f64 - kf) * b - shift, binom_ln_pmf(n, p, k))
        })
        .collect();
    Ok(SumDist::from_ln_atoms(atoms))
}

/// Tilted-information converse for the binary source.
pub fn bms_converse_tilted(p: f64, n: u64, d: f64, log_m: f64) -> Result<f64> {
    Ok(super::engine::converse_tilted(&bms_tilted_sum(p, n, d)?, log_m))
}

/// Threshold `r*` and randomization `α` of the optimal weight test at level `1-ε`.
/// `r* = -1` when even the all-zero string alone exceeds `1-ε`.
pub fn bms_ht_threshold(p: f64, n: u64, eps: f64) -> Result<(i64, f64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0,1), got {eps}"));
    }
    let target = 1.0 - eps;
    let pmf = binom_ln_pmf_table(n, p);
    let mut cdf = 0.0;
    for (k, &lp) in pmf.iter().enumerate() {
        let next = cdf + lp.exp();
        if next > target {
            let alpha = ((target - cdf) / lp.exp()).clamp(0.0, 1.0);
            return Ok((k as i64 - 1, alpha));
        }
        cdf = next;
    }
    // rounding pushed the whole mass below 1-ε; the test accepts everything
    Ok((n as i64 - 1, 1.0))
}

/// Hypothesis-testing converse, solved for `log M`.
pub fn bms_converse_ht(p: f64, n: u64, d: f64, eps: f64) -> Result<f64> {
    check_bms(p, d)?;
    let (r_star, alpha) = bms_ht_threshold(p, n, eps)?;
    let head = log_partial_binom_sum(n, r_star).ln();
    let edge = if alpha > 0.0 {
        alpha.ln() + ln_choose(n, (r_star + 1) as u64)
    } else {
        f64::NEG_INFINITY
    };
    let num = log_add(head, edge);
    Ok(num - log_partial_binom_sum(n, radius(n, d)).ln())
}

/// Reproduction bias of the rate-distortion achieving test channel.
pub fn test_channel_bias(p: f64, d: f64) -> f64 {
    (p - d) / (1.0 - 2.0 * d)
}

/// `ln L_n(k, t)`: log-count of weight-`t` strings within distance `r` of a weight-`k`
/// string, restricted to the single largest overlap class.
pub fn ln_overlap_count(n: u64, k: u64, t: u64, r: i64) -> f64 {
    let (ki, ti) = (k as i64, t as i64);
    if ki < ti - r || ki > ti + r {
        return f64::NEG_INFINITY;
    }
    let t0 = (ti + ki - r).div_euclid(2) + (ti + ki - r).rem_euclid(2);
    let t0 = t0.max(0);
    if t0 > ki || ti - t0 < 0 || ti - t0 > n as i64 - ki {
        return f64::NEG_INFINITY;
    }
    ln_choose(k, t0 as u64) + ln_choose(n - k, (ti - t0) as u64)
}

/// Ball-mass lower bounds under the i.i.d. reproduction distribution, one atom per source weight.
pub fn bms_ball_masses(p: f64, n: u64, d: f64) -> Result<BallMassDist> {
    check_bms(p, d)?;
    let q = test_channel_bias(p, d);
    let (lq, lq1) = (q.ln(), (-q).ln_1p());
    let r = radius(n, d);
    let atoms: Vec<(f64, f64)> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let lo = (k as i64 - r).max(0) as u64;
            let hi = ((k as i64 + r) as u64).min(n);
            let lw = log_sum_exp((lo..=hi).map(|t| {
                ln_overlap_count(n, k, t, r) + t as f64 * lq + (n - t) as f64 * lq1
            }));
            (binom_ln_pmf(n, p, k).exp(), lw.min(0.0))
        })
        .collect();
    let mut out = BallMassDist::default();
    for (pr, lw) in atoms {
        out.push(pr, lw);
    }
    Ok(out)
}

/// Ball-mass lower bounds under the uniform distribution on weight-`⌈nq⌉` strings.
pub fn bms_cc_ball_masses(p: f64, n: u64, d: f64) -> Result<BallMassDist> {
    check_bms(p, d)?;
    let q = test_channel_bias(p, d);
    let t = ceil_nudged(n as f64 * q).clamp(0, n as i64) as u64;
    let r = radius(n, d);
    let norm = ln_choose(n, t);
    let mut out = BallMassDist::default();
    for k in 0..=n {
        let lw = ln_overlap_count(n, k, t, r) - norm;
        out.push(binom_ln_pmf(n, p, k).exp(), lw.min(0.0));
    }
    Ok(out)
}

/// Random-coding achievability with i.i.d. codewords.
pub fn bms_achievability(p: f64, n: u64, d: f64, log_m: f64) -> Result<f64> {
    Ok(super::engine::rc_exact(&bms_ball_masses(p, n, d)?, log_m))
}

/// Random-coding achievability with constant-composition codewords.
pub fn bms_achievability_cc(p: f64, n: u64, d: f64, log_m: f64) -> Result<f64> {
    Ok(super::engine::rc_exact(&bms_cc_ball_masses(p, n, d)?, log_m))
}

const SHANNON_TAIL: f64 = 1e-22;

fn window(lnpmf: &[f64]) -> (usize, usize) {
    let cut = SHANNON_TAIL.ln();
    let lo = lnpmf.iter().position(|&l| l > cut).unwrap_or(0);
    let hi = lnpmf.iter().rposition(|&l| l > cut).unwrap_or(lnpmf.len() - 1);
    (lo, hi)
}

/// Information-density sum for the backward test channel `X = Y xor Z`, with
/// `Z ~ Bern(d_test)` and `Y` i.i.d. with the matching bias. Returns the sum
/// distribution and the probability mass discarded in negligible tails.
pub fn bms_shannon_info_sum(p: f64, n: u64, d_test: f64) -> Result<(SumDist, f64)> {
    check_bms(p, d_test)?;
    let q = test_channel_bias(p, d_test);
    let (ax, bx) = (-p.ln(), -(-p).ln_1p());
    let nf = n as f64;
    if d_test == 0.0 {
        let atoms = (0..=n)
            .map(|k| (k as f64 * ax + (nf - k as f64) * bx, binom_ln_pmf(n, p, k)))
            .collect();
        return Ok((SumDist::from_ln_atoms(atoms), 0.0));
    }
    let (az, bz) = (d_test.ln(), (-d_test).ln_1p());
    let cpmf = binom_ln_pmf_table(n, d_test);
    let (clo, chi) = window(&cpmf);
    let chunks: Vec<Vec<(f64, f64)>> = (clo..=chi)
        .into_par_iter()
        .map(|c| {
            let c64 = c as u64;
            let u = binom_ln_pmf_table(c64, 1.0 - q);
            let w = binom_ln_pmf_table(n - c64, q);
            let (ulo, uhi) = window(&u);
            let (wlo, whi) = window(&w);
            let mut conv = vec![0.0f64; uhi + whi - ulo - wlo + 1];
            for i in ulo..=uhi {
                let pi = u[i].exp();
                for j in wlo..=whi {
                    conv[i + j - ulo - wlo] += pi * w[j].exp();
                }
            }
            let base = c as f64 * az + (nf - c as f64) * bz;
            conv.iter()
                .enumerate()
                .filter(|(_, &m)| m > 0.0)
                .map(|(off, &m)| {
                    let k = (ulo + wlo + off) as f64;
                    (base + k * ax + (nf - k) * bx, cpmf[c] + m.ln())
                })
                .collect()
        })
        .collect();
    let atoms: Vec<(f64, f64)> = chunks.into_iter().flatten().collect();
    let sum = SumDist::from_ln_atoms(atoms);
    let dropped = (1.0 - sum.total_mass()).max(0.0);
    Ok((sum, dropped))
}

/// Probability that the distortion sum `Bin(n, d_test)` exceeds `⌊nd⌋`.
fn excess_distortion(n: u64, d: f64, d_test: f64) -> f64 {
    if d_test == 0.0 {
        return 0.0;
    }
    1.0 - crate::numerics::binom_cdf(n, d_test, radius(n, d))
}

/// Shannon's achievability at a fixed test channel, in excess-distortion form.
pub fn bms_shannon(p: f64, n: u64, d: f64, d_test: f64, log_m: f64) -> Result<f64> {
    check_bms(p, d)?;
    if !(d_test >= 0.0 && d_test <= d) {
        return domain("test-channel crossover must lie in [0, d]");
    }
    let (sum, dropped) = bms_shannon_info_sum(p, n, d_test)?;
    Ok(super::engine::shannon_ach(&sum, excess_distortion(n, d, d_test) + dropped, log_m))
}

/// Shannon's achievability solved for `log M`, minimized over backward-BSC
/// test channels with crossover in `(0, d]`. Returns `(log M, best crossover)`.
pub fn bms_shannon_log_m(p: f64, n: u64, d: f64, eps: f64) -> Result<(f64, f64)> {
    check_bms(p, d)?;
    let eval = |dt: f64| -> Result<f64> {
        let (sum, dropped) = bms_shannon_info_sum(p, n, dt)?;
        let pd = excess_distortion(n, d, dt) + dropped;
        Ok(super::engine::shannon_ach_log_m(&sum, pd, eps))
    };
    if d == 0.0 {
        return Ok((eval(0.0)?, 0.0));
    }
    const GRID: usize = 12;
    let grid: Vec<f64> = (1..=GRID).map(|j| d * j as f64 / GRID as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| eval(x)).collect::<Result<_>>()?;
    let (mut bi, mut best) = (0usize, f64::INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v < best {
            best = v;
            bi = i;
        }
    }
    let mut best_dt = grid[bi];
    let mut a = if bi == 0 { 0.0 } else { grid[bi - 1] };
    let mut b = grid[(bi + 1).min(GRID - 1)];
    let inv_phi = 0.618_033_988_749_894_8;
    let mut c = b - inv_phi * (b - a);
    let mut e = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fe = eval(e)?;
    for _ in 0..14 {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + inv_phi * (b - a);
            fe = eval(e)?;
        }
    }
    for (x, v) in [(c, fc), (e, fe)] {
        if v < best {
            best = v;
            best_dt = x;
        }
    }
    Ok((best, best_dt))
}

/// Gaussian approximation of the minimum rate, in nats per symbol.
///
/// At `d = 0` with zero varentropy the exact lossless expansion is used and
/// `mode` is ignored.
pub fn binary_gaussian_approx(p: f64, n: u64, d: f64, eps: f64, mode: Remainder) -> Result<f64> {
    check_bms(p, d)?;
    let nf = n as f64;
    let rate = binary_entropy(p) - binary_entropy(d);
    let v = p * (1.0 - p) * ((1.0 - p) / p).ln().powi(2);
    if d == 0.0 && v == 0.0 {
        return Ok(rate - (1.0 / (1.0 - eps)).ln() / nf);
    }
    Ok(rate + (v / nf).sqrt() * q_inv(eps)? + mode.nats(n, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::engine::rc_exact;

    #[test]
    fn ebms_tiny_cases() {
        assert_eq!(ebms_converse(1, 0.0, 2f64.ln()).unwrap(), 0.0);
        assert!((ebms_converse(1, 0.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((ebms_achievability(1, 0.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(ebms_achievability(5, 0.1, f64::NEG_INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn ebms_constant_ball_matches_engine() {
        let lw = (9.0f64 / 256.0).ln();
        let direct = ebms_achievability(8, 0.125, 4f64.ln()).unwrap();
        let engine = rc_exact(&BallMassDist::constant(lw), 4f64.ln());
        assert!((direct - engine).abs() < 1e-15);
        assert!((direct - (1.0 - 9.0 / 256.0f64).powi(4)).abs() < 1e-14);
    }

    #[test]
    fn ebms_inversions_are_exact() {
        for &(n, d, eps) in &[(100u64, 0.11, 1e-2), (37, 0.2, 0.3)] {
            let lc = ebms_converse_log_m(n, d, eps).unwrap();
            assert!((ebms_converse(n, d, lc).unwrap() - eps).abs() < 1e-12);
            let la = ebms_achievability_log_m(n, d, eps).unwrap();
            assert!((ebms_achievability(n, d, la).unwrap() - eps).abs() < 1e-12);
            assert!(lc <= la);
        }
    }

    #[test]
    fn ebms_converse_rate_exceeds_capacity_term() {
        let lc = ebms_converse_log_m(100, 0.11, 1e-2).unwrap();
        let rd = LN_2 - binary_entropy(0.11);
        assert!(lc / 100.0 > rd);
    }

    #[test]
    fn ht_threshold_by_scan() {
        let (p, n, eps) = (0.4, 10u64, 0.01);
        let (r, alpha) = bms_ht_threshold(p, n, eps).unwrap();
        let pmf: Vec<f64> = (0..=n).map(|k| binom_ln_pmf(n, p, k).exp()).collect();
        let cdf_r: f64 = pmf[..=(r as usize)].iter().sum();
        assert!(cdf_r <= 1.0 - eps);
        assert!(cdf_r + pmf[r as usize + 1] > 1.0 - eps);
        assert!((cdf_r + alpha * pmf[r as usize + 1] - (1.0 - eps)).abs() < 1e-14);
        assert!((0.0..1.0).contains(&alpha));
    }

    #[test]
    fn ht_at_half_is_equiprobable_converse() {
        for &(n, d, eps) in &[(100u64, 0.11, 1e-2), (500, 0.3, 0.1), (7, 0.2, 0.5)] {
            let ht = bms_converse_ht(0.5, n, d, eps).unwrap();
            let eq = ebms_converse_log_m(n, d, eps).unwrap();
            assert!((ht - eq).abs() < 1e-10, "n={n}: {ht} vs {eq}");
        }
    }

    #[test]
    fn ht_diverges_as_eps_to_one() {
        let a = bms_converse_ht(0.4, 50, 0.1, 0.5).unwrap();
        let b = bms_converse_ht(0.4, 50, 0.1, 1.0 - 1e-12).unwrap();
        assert!(b < a - 10.0);
    }

    #[test]
    fn zero_distortion_balls_are_exact_matches() {
        let b = bms_ball_masses(0.3, 12, 0.0).unwrap();
        for (k, &(pr, lw)) in b.atoms.iter().enumerate() {
            let want = k as f64 * 0.3f64.ln() + (12 - k) as f64 * 0.7f64.ln();
            assert!((lw - want).abs() < 1e-12);
            assert!((pr - binom_ln_pmf(12, 0.3, k as u64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn iid_ball_bound_is_weaker_than_exact_uniform_ball_at_half() {
        let iid = bms_achievability(0.5, 60, 0.11, 10.0).unwrap();
        let eq = ebms_achievability(60, 0.11, 10.0).unwrap();
        assert!(iid >= eq - 1e-15);
    }

    #[test]
    fn cc_bound_is_a_probability() {
        for lm in [0.0, 2.0, 5.0, 9.0] {
            let e = bms_achievability_cc(0.4, 20, 0.11, lm).unwrap();
            assert!((0.0..=1.0).contains(&e));
        }
    }

    #[test]
    fn tilted_at_half_is_point_mass() {
        let s = bms_tilted_sum(0.5, 40, 0.11).unwrap();
        assert_eq!(s.len(), 1);
        let want = 40.0 * (LN_2 - binary_entropy(0.11));
        assert!((s.atoms().next().unwrap().0 - want).abs() < 1e-10);
    }

    #[test]
    fn shannon_lossless_single_letter_by_hand() {
        // n = 1, p = 1/2, d = 0: the information density is ln 2 surely,
        // so eps(M) = inf over thresholds below ln M of exp(-M/2)
        let lm = 3f64.ln();
        let got = bms_shannon(0.5, 1, 0.0, 0.0, lm).unwrap();
        assert!((got - (-1.5f64).exp()).abs() < 1e-12);
        assert_eq!(bms_shannon(0.5, 1, 0.0, 0.0, LN_2 - 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn shannon_info_sum_normalized() {
        let (s, dropped) = bms_shannon_info_sum(0.4, 300, 0.08).unwrap();
        assert!((s.total_mass() + dropped - 1.0).abs() < 1e-9);
        assert!(dropped < 1e-12);
        // mean information density equals I(X;Y) = h(p) - h(d_test) per letter
        let mi = binary_entropy(0.4) - binary_entropy(0.08);
        assert!((s.mean() - 300.0 * mi).abs() < 1e-6);
    }

    #[test]
    fn gaussian_approx_forms() {
        let n = 1000;
        let e = binary_gaussian_approx(0.5, n, 0.11, 1e-2, Remainder::HalfLogN).unwrap();
        let want = LN_2 - binary_entropy(0.11) + 0.5 * (n as f64).ln() / n as f64;
        assert!((e - want).abs() < 1e-15);
        let l = binary_gaussian_approx(0.5, n, 0.0, 0.1, Remainder::HalfLogN).unwrap();
        assert!((l - (LN_2 - (1.0f64 / 0.9).ln() / n as f64)).abs() < 1e-15);
        let b = binary_gaussian_approx(0.4, n, 0.0, 0.1, Remainder::NegHalfLogN).unwrap();
        let v = 0.24 * 1.5f64.ln().powi(2);
        let want = binary_entropy(0.4) + (v / 1000.0).sqrt() * q_inv(0.1).unwrap()
            - 0.5 * 1000f64.ln() / 1000.0;
        assert!((b - want).abs() < 1e-15);
    }
}

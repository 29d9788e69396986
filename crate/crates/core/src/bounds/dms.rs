//! Bounds for discrete memoryless sources under symbol-error distortion, by type enumeration.

use super::engine::{check_budget, converse_tilted, convolve_iid, miss_prob, BallMassDist};
use super::Remainder;
use crate::error::{domain, Error, Result};
use crate::numerics::combinatorics::composition_count;
use crate::numerics::{
    ceil_nudged, floor_nudged, ln_gamma, log_add, q_inv, HammingBallTable,
};
use crate::sources::{dms_water_level, entropy, SourceModel};
use rayon::prelude::*;

/// Types whose probability falls below this are charged in full to the
/// achievability bound instead of being evaluated.
const NEGLIGIBLE_TYPE_LN_PROB: f64 = -60.0;
const LOCAL_SEARCH_MOVES: usize = 10_000;
const TIE_TOLERANCE: f64 = 1e-10;

fn check_pmf(pmf: &[f64]) -> Result<()> {
    SourceModel::Dms {
        pmf: pmf.to_vec(),
    }
    .validate()
}

fn radius(n: u64, d: f64) -> i64 {
    floor_nudged(n as f64 * d)
}

/// `ln` of the uniform-measure mass of an `m`-ary Hamming ball of radius `⌊nd⌋`.
pub fn edms_ln_ball(n: u64, d: f64, m: u32) -> f64 {
    crate::numerics::log_hamming_ball(n, radius(n, d), m).ln() - n as f64 * (m as f64).ln()
}

fn check_edms(d: f64, m: u32) -> Result<()> {
    if m < 2 {
        return domain("alphabet needs at least two letters");
    }
    if !(d >= 0.0 && d < 1.0 - 1.0 / m as f64) {
        return domain(format!("equiprobable bounds need 0 <= d < 1 - 1/m, got {d}"));
    }
    Ok(())
}

/// Equiprobable converse: `ε >= 1 - M m^{-n} S_{⌊nd⌋}`.
pub fn edms_converse(n: u64, d: f64, log_m: f64, m: u32) -> Result<f64> {
    check_edms(d, m)?;
    Ok((1.0 - (log_m + edms_ln_ball(n, d, m)).exp()).max(0.0))
}

/// Equiprobable achievability: `ε <= (1 - m^{-n} S_{⌊nd⌋})^M`.
pub fn edms_achievability(n: u64, d: f64, log_m: f64, m: u32) -> Result<f64> {
    check_edms(d, m)?;
    Ok(miss_prob(edms_ln_ball(n, d, m), log_m))
}

/// Tilted-information converse through the exact sum distribution.
pub fn dms_converse_tilted(pmf: &[f64], n: u64, d: f64, log_m: f64) -> Result<f64> {
    let src = SourceModel::dms(pmf)?;
    let t = src.tilted_info_dist(d)?;
    Ok(converse_tilted(&convolve_iid(&t, n)?, log_m))
}

fn ln_factorials(n: u64) -> Vec<f64> {
    (0..=n).map(|i| ln_gamma(i as f64 + 1.0)).collect()
}

/// Visits all `m`-part compositions of `n` whose first part equals `first`.
pub(crate) fn visit_types(n: u64, m: usize, first: u64, f: &mut impl FnMut(&[u64])) {
    let mut k = vec![0u64; m];
    k[0] = first;
    fn rec(pos: usize, left: u64, k: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
        if pos + 1 == k.len() {
            k[pos] = left;
            f(k);
            return;
        }
        for x in 0..=left {
            k[pos] = x;
            rec(pos + 1, left - x, k, f);
        }
    }
    if m == 1 {
        f(&k);
    } else {
        rec(1, n - first, &mut k, f);
    }
}

fn check_type_budget(n: u64, m: usize) -> Result<()> {
    check_budget("type enumeration", composition_count(n, m as u32))
}

/// Number of types, enumerated explicitly.
pub fn count_types(n: u64, m: usize) -> Result<u64> {
    check_type_budget(n, m)?;
    let total: u64 = (0..=n)
        .into_par_iter()
        .map(|first| {
            let mut c = 0u64;
            visit_types(n, m, first, &mut |_| c += 1);
            c
        })
        .sum();
    Ok(total)
}

/// Per-type `(ln p^k, ln C(n; k))`, for every type of length-`n` strings.
pub(crate) fn type_weights(pmf: &[f64], n: u64) -> Result<Vec<(f64, f64)>> {
    let m = pmf.len();
    check_type_budget(n, m)?;
    let lf = ln_factorials(n);
    let lp: Vec<f64> = pmf.iter().map(|p| p.ln()).collect();
    let chunks: Vec<Vec<(f64, f64)>> = (0..=n)
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            visit_types(n, m, first, &mut |k| {
                let mut lpk = 0.0;
                let mut lmult = lf[n as usize];
                for a in 0..m {
                    lpk += k[a] as f64 * lp[a];
                    lmult -= lf[k[a] as usize];
                }
                out.push((lpk, lmult));
            });
            out
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Neyman-Pearson quantities against the counting measure: `ln` of
/// `β = Σ_{types before k*} C(n;k) + α C(n;k*+1)`, with tie groups handled as units.
pub fn dms_ln_beta(pmf: &[f64], n: u64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0,1), got {eps}"));
    }
    let mut w = type_weights(pmf, n)?;
    w.par_sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    let target = 1.0 - eps;
    let mut cum_mass = 0.0;
    let mut ln_count = f64::NEG_INFINITY;
    let mut i = 0;
    while i < w.len() {
        let head = w[i].0;
        let mut j = i;
        let mut g_mass = 0.0;
        let mut g_count = f64::NEG_INFINITY;
        while j < w.len() && (w[j].0 - head).abs() <= TIE_TOLERANCE * head.abs().max(1.0) {
            g_mass += (w[j].0 + w[j].1).exp();
            g_count = log_add(g_count, w[j].1);
            j += 1;
        }
        if cum_mass + g_mass > target {
            let alpha = ((target - cum_mass) / g_mass).clamp(0.0, 1.0);
            let edge = if alpha > 0.0 {
                alpha.ln() + g_count
            } else {
                f64::NEG_INFINITY
            };
            return Ok(log_add(ln_count, edge));
        }
        cum_mass += g_mass;
        ln_count = log_add(ln_count, g_count);
        i = j;
    }
    Ok(ln_count)
}

/// Hypothesis-testing converse, solved for `log M`.
pub fn dms_converse_ht(pmf: &[f64], n: u64, d: f64, eps: f64) -> Result<f64> {
    check_pmf(pmf)?;
    let m = pmf.len() as u32;
    if !(d >= 0.0 && d < 1.0 - pmf[0]) {
        return domain(format!("need 0 <= d < 1 - P(1) = {}", 1.0 - pmf[0]));
    }
    let ball = crate::numerics::log_hamming_ball(n, radius(n, d), m).ln();
    Ok(dms_ln_beta(pmf, n, eps)? - ball)
}

/// Rounded reproduction composition: letters after the first are rounded up,
/// the first absorbs the remainder.
pub fn cc_composition(output: &[f64], n: u64) -> Vec<u64> {
    let m = output.len();
    let mut t = vec![0i64; m];
    for b in 1..m {
        if output[b] > 0.0 {
            t[b] = ceil_nudged(n as f64 * output[b]).max(0);
        }
    }
    let rest: i64 = t[1..].iter().sum();
    t[0] = n as i64 - rest;
    if t[0] < 0 {
        // degenerate tiny-n case: fall back to largest remainder
        let mut base: Vec<i64> = output.iter().map(|&q| (n as f64 * q).floor() as i64).collect();
        let mut short = n as i64 - base.iter().sum::<i64>();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            let fa = n as f64 * output[a] - base[a] as f64;
            let fb = n as f64 * output[b] - base[b] as f64;
            fb.total_cmp(&fa)
        });
        for &b in order.iter().cycle() {
            if short == 0 {
                break;
            }
            if output[b] > 0.0 {
                base[b] += 1;
                short -= 1;
            }
        }
        return base.into_iter().map(|x| x as u64).collect();
    }
    t.into_iter().map(|x| x as u64).collect()
}

/// Joint-type search for one source type `k` against composition `tstar`.
///
/// Finds an integer `m × m_eta` matrix with row sums `k`, column sums `tstar`
/// and diagonal sum at least `min_trace`, kept as close to `min_trace` as the
/// margins allow, maximizing `Σ_a ln C(k_a; t_{a,·})`. Returns that log-count,
/// or `-inf` if no admissible matrix exists.
pub fn ln_joint_type_count(
    k: &[u64],
    tstar: &[u64],
    target: &[Vec<f64>],
    min_trace: i64,
    lf: &[f64],
) -> f64 {
    let m = k.len();
    let cols = tstar.len();
    let mut t = vec![vec![0i64; cols]; m];
    for a in 0..m {
        for b in 0..cols {
            t[a][b] = target[a][b].floor().max(0.0) as i64;
        }
    }
    let rows_have = |t: &Vec<Vec<i64>>, a: usize| t[a].iter().sum::<i64>();
    let col_have = |t: &Vec<Vec<i64>>, b: usize| t.iter().map(|r| r[b]).sum::<i64>();
    // remove surpluses from the most over-rounded cells
    for a in 0..m {
        while rows_have(&t, a) > k[a] as i64 {
            let b = (0..cols)
                .filter(|&b| t[a][b] > 0)
                .max_by(|&x, &y| {
                    (t[a][x] as f64 - target[a][x]).total_cmp(&(t[a][y] as f64 - target[a][y]))
                })
                .unwrap();
            t[a][b] -= 1;
        }
    }
    for b in 0..cols {
        while col_have(&t, b) > tstar[b] as i64 {
            let a = (0..m)
                .filter(|&a| t[a][b] > 0)
                .max_by(|&x, &y| {
                    (t[x][b] as f64 - target[x][b]).total_cmp(&(t[y][b] as f64 - target[y][b]))
                })
                .unwrap();
            t[a][b] -= 1;
        }
    }
    // fill deficits where the real target is furthest above the integer value
    loop {
        let rd: Vec<i64> = (0..m).map(|a| k[a] as i64 - rows_have(&t, a)).collect();
        let cd: Vec<i64> = (0..cols).map(|b| tstar[b] as i64 - col_have(&t, b)).collect();
        let mut best: Option<(usize, usize, f64)> = None;
        for a in (0..m).filter(|&a| rd[a] > 0) {
            for b in (0..cols).filter(|&b| cd[b] > 0) {
                let gap = target[a][b] - t[a][b] as f64;
                if best.map_or(true, |x| gap > x.2) {
                    best = Some((a, b, gap));
                }
            }
        }
        match best {
            Some((a, b, _)) => t[a][b] += 1,
            None => break,
        }
    }
    let trace = |t: &Vec<Vec<i64>>| (0..cols.min(m)).map(|b| t[b][b]).sum::<i64>();
    let ln_cells = |x: i64| lf[x as usize];

    // 2x2 exchange: +1 at (a1,b1),(a2,b2), -1 at (a1,b2),(a2,b1)
    let trace_delta = |a1: usize, a2: usize, b1: usize, b2: usize| -> i64 {
        let on = |a: usize, b: usize| (a == b) as i64;
        on(a1, b1) + on(a2, b2) - on(a1, b2) - on(a2, b1)
    };
    let gain = |t: &Vec<Vec<i64>>, a1: usize, a2: usize, b1: usize, b2: usize| -> f64 {
        ln_cells(t[a1][b2]) + ln_cells(t[a2][b1]) - ln_cells(t[a1][b1] + 1) - ln_cells(t[a2][b2] + 1)
            + ln_cells(t[a1][b1])
            + ln_cells(t[a2][b2])
            - ln_cells(t[a1][b2] - 1)
            - ln_cells(t[a2][b1] - 1)
    };
    // gain is the change in -Σ ln t! ; recompute form above is symmetric in the moved cells

    // drive the trace into [min_trace, ...], first upward, then down as far as margins allow
    let mut moves = 0;
    while trace(&t) < min_trace && moves < LOCAL_SEARCH_MOVES {
        let mut best: Option<(usize, usize, usize, usize, f64)> = None;
        for a1 in 0..m {
            for a2 in 0..m {
                for b1 in 0..cols {
                    for b2 in 0..cols {
                        if a1 == a2 || b1 == b2 || t[a1][b2] == 0 || t[a2][b1] == 0 {
                            continue;
                        }
                        if trace_delta(a1, a2, b1, b2) <= 0 {
                            continue;
                        }
                        let g = gain(&t, a1, a2, b1, b2)
                            + 10.0 * trace_delta(a1, a2, b1, b2) as f64;
                        if best.map_or(true, |x| g > x.4) {
                            best = Some((a1, a2, b1, b2, g));
                        }
                    }
                }
            }
        }
        match best {
            Some((a1, a2, b1, b2, _)) => {
                t[a1][b1] += 1;
                t[a2][b2] += 1;
                t[a1][b2] -= 1;
                t[a2][b1] -= 1;
            }
            None => return f64::NEG_INFINITY,
        }
        moves += 1;
    }
    if trace(&t) < min_trace {
        return f64::NEG_INFINITY;
    }
    while trace(&t) > min_trace + 1 && moves < LOCAL_SEARCH_MOVES {
        let cur = trace(&t);
        let mut best: Option<(usize, usize, usize, usize, f64)> = None;
        for a1 in 0..m {
            for a2 in 0..m {
                for b1 in 0..cols {
                    for b2 in 0..cols {
                        if a1 == a2 || b1 == b2 || t[a1][b2] == 0 || t[a2][b1] == 0 {
                            continue;
                        }
                        let dt = trace_delta(a1, a2, b1, b2);
                        if dt >= 0 || cur + dt < min_trace {
                            continue;
                        }
                        let g = gain(&t, a1, a2, b1, b2);
                        if best.map_or(true, |x| g > x.4) {
                            best = Some((a1, a2, b1, b2, g));
                        }
                    }
                }
            }
        }
        match best {
            Some((a1, a2, b1, b2, _)) => {
                t[a1][b1] += 1;
                t[a2][b2] += 1;
                t[a1][b2] -= 1;
                t[a2][b1] -= 1;
            }
            None => break,
        }
        moves += 1;
    }
    // hill-climb on the count with the trace held inside its band
    let hi_trace = trace(&t).max(min_trace + 1);
    while moves < LOCAL_SEARCH_MOVES {
        let cur = trace(&t);
        let mut best: Option<(usize, usize, usize, usize, f64)> = None;
        for a1 in 0..m {
            for a2 in 0..m {
                for b1 in 0..cols {
                    for b2 in 0..cols {
                        if a1 == a2 || b1 == b2 || t[a1][b2] == 0 || t[a2][b1] == 0 {
                            continue;
                        }
                        let nt = cur + trace_delta(a1, a2, b1, b2);
                        if nt < min_trace || nt > hi_trace {
                            continue;
                        }
                        let g = gain(&t, a1, a2, b1, b2);
                        if g > 1e-12 && best.map_or(true, |x| g > x.4) {
                            best = Some((a1, a2, b1, b2, g));
                        }
                    }
                }
            }
        }
        match best {
            Some((a1, a2, b1, b2, _)) => {
                t[a1][b1] += 1;
                t[a2][b2] += 1;
                t[a1][b2] -= 1;
                t[a2][b1] -= 1;
            }
            None => break,
        }
        moves += 1;
    }
    (0..m)
        .map(|a| lf[k[a] as usize] - t[a].iter().map(|&x| lf[x as usize]).sum::<f64>())
        .sum()
}

/// Per-type ball-mass lower bounds for the constant-composition ensemble.
/// Returns the distribution and the probability of types charged in full.
pub fn dms_cc_ball_masses(pmf: &[f64], n: u64, d: f64) -> Result<(BallMassDist, f64)> {
    check_pmf(pmf)?;
    let m = pmf.len();
    if !(d > 0.0 && d < 1.0 - pmf[0]) {
        return domain(format!(
            "constant-composition bound needs 0 < d < {}",
            1.0 - pmf[0]
        ));
    }
    let wl = dms_water_level(pmf, d)?;
    let m_eta = wl.m_eta;
    let tstar_full = cc_composition(&wl.output, n);
    let tstar: Vec<u64> = tstar_full[..m_eta].to_vec();
    if tstar_full[m_eta..].iter().any(|&x| x > 0) {
        return Err(Error::Domain("reproduction composition leaks past m_eta".into()));
    }
    let lf = ln_factorials(n);
    let ln_norm = lf[n as usize] - tstar.iter().map(|&x| lf[x as usize]).sum::<f64>();
    let min_trace = n as i64 - radius(n, d);
    let weights = type_weights(pmf, n)?;
    let nf = n as f64;
    let mf = m_eta as f64;

    // types are re-enumerated in the same order as `type_weights`
    let mut types: Vec<Vec<u64>> = Vec::with_capacity(weights.len());
    for first in 0..=n {
        visit_types(n, m, first, &mut |k| types.push(k.to_vec()));
    }
    let results: Vec<(f64, f64, bool)> = types
        .par_iter()
        .zip(weights.par_iter())
        .map(|(k, &(lpk, lmult))| {
            let lprob = lpk + lmult;
            if lprob < NEGLIGIBLE_TYPE_LN_PROB {
                return (lprob.exp(), f64::NEG_INFINITY, true);
            }
            let delta: Vec<f64> = (0..m).map(|a| k[a] as f64 / nf - pmf[a]).collect();
            let tail_delta: f64 = delta[m_eta..].iter().sum();
            let target: Vec<Vec<f64>> = (0..m)
                .map(|a| {
                    (0..m_eta)
                        .map(|b| {
                            let corr = if a >= m_eta {
                                0.0
                            } else if a == b {
                                tail_delta / (mf * mf)
                            } else {
                                -tail_delta / (mf * mf * (mf - 1.0))
                            };
                            let spread = if a >= m_eta { delta[a] / mf } else { delta[a] / mf + corr };
                            wl.backward[a][b] * tstar[b] as f64 + spread * nf
                        })
                        .collect()
                })
                .collect();
            let lcount = ln_joint_type_count(k, &tstar, &target, min_trace, &lf);
            (lprob.exp(), (lcount - ln_norm).min(0.0), false)
        })
        .collect();
    let mut out = BallMassDist::default();
    let mut charged = 0.0;
    for (p, lw, skipped) in results {
        if skipped {
            charged += p;
        } else {
            out.push(p, lw);
        }
    }
    Ok((out, charged))
}

/// Constant-composition achievability, in excess-distortion form.
pub fn dms_achievability_cc(pmf: &[f64], n: u64, d: f64, log_m: f64) -> Result<f64> {
    let (ball, charged) = dms_cc_ball_masses(pmf, n, d)?;
    Ok((super::engine::rc_exact(&ball, log_m) + charged).min(1.0))
}

/// Gaussian approximation of the minimum rate, in nats per symbol.
pub fn dms_gaussian_approx(pmf: &[f64], n: u64, d: f64, eps: f64, mode: Remainder) -> Result<f64> {
    let src = SourceModel::dms(pmf)?;
    let nf = n as f64;
    let (dmin, dmax) = src.d_range();
    if !(d >= dmin && d < dmax) {
        return domain(format!("need 0 <= d < {dmax}"));
    }
    if d == 0.0 {
        let h = entropy(pmf);
        let v = src.tilted_info_dist(0.0)?.variance();
        if v <= 1e-300 {
            return Ok(h - (1.0 / (1.0 - eps)).ln() / nf);
        }
        return Ok(h + (v / nf).sqrt() * q_inv(eps)? + mode.nats(n, 0.5));
    }
    let m = pmf.len() as f64;
    let m_eta = dms_water_level(pmf, d)?.m_eta as f64;
    let coeff = (m - 1.0) * (m_eta - 1.0) / 2.0;
    let v = src.dispersion(d)?;
    Ok(src.rate_distortion(d)? + (v / nf).sqrt() * q_inv(eps)? + mode.nats(n, coeff))
}

/// Cached `m`-ary Hamming-ball table for repeated radius queries.
pub fn ball_table(n: u64, m: u32) -> HammingBallTable {
    HammingBallTable::new(n, m)
}

//! Ground truth independent of the bounds: exhaustive optimal codes for tiny
//! blocklengths, Monte Carlo simulation of random codebooks, and the exact
//! lossless minimum code size.

use crate::bounds::dms::type_weights;
use crate::error::{domain, Error, Result};
use crate::numerics::floor_nudged;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Largest blocklength the exhaustive search accepts (`2^{2^n}` codebooks).
pub const BRUTE_FORCE_MAX_N: u64 = 4;

/// Minimum code size of a binary source with bias `p` by exhaustive search
/// over all codebooks, in order of increasing size.
pub fn brute_force_mstar(p: f64, n: u64, d: f64, eps: f64) -> Result<u64> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Budget {
            what: "exhaustive codebook search",
            needed: 2f64.powi(1 << n.min(10)),
            cap: 65536.0,
        });
    }
    if n == 0 || !(0.0..=1.0).contains(&p) || !(eps > 0.0 && eps < 1.0) || d < 0.0 {
        return domain("need n >= 1, p in [0,1], eps in (0,1), d >= 0");
    }
    let size = 1usize << n;
    let r = floor_nudged(n as f64 * d) as u32;
    let prob: Vec<f64> = (0..size)
        .map(|x: usize| {
            let w = x.count_ones() as i32;
            p.powi(w) * (1.0 - p).powi(n as i32 - w)
        })
        .collect();
    // cover[c]: bitmask of source strings within distance r of codeword c
    let cover: Vec<u32> = (0..size)
        .map(|c| {
            (0..size)
                .filter(|&x| ((x ^ c) as u32).count_ones() <= r)
                .fold(0u32, |m, x| m | (1 << x))
        })
        .collect();
    let target = 1.0 - eps;
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); size + 1];
    for book in 1u32..(1u32 << size) {
        by_size[book.count_ones() as usize].push(book);
    }
    for (m, books) in by_size.iter().enumerate().skip(1) {
        let hit = books.par_iter().any(|&book| {
            let mut covered = 0u32;
            for c in 0..size {
                if book >> c & 1 == 1 {
                    covered |= cover[c];
                }
            }
            let mass: f64 = (0..size).filter(|&x| covered >> x & 1 == 1).map(|x| prob[x]).sum();
            mass >= target - 1e-12
        });
        if hit {
            return Ok(m as u64);
        }
    }
    Ok(size as u64)
}

/// Monte Carlo estimate of the excess-distortion probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub eps_hat: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Number of independent random streams; fixed so results depend only on the seed.
pub const MC_SHARDS: u64 = 64;

/// Simulates random codebooks: each trial draws a source string from
/// `source_pmf`, `m` codewords i.i.d. from `codeword_pmf`, and checks whether
/// the nearest codeword is within Hamming distortion `d`.
pub fn mc_random_coding(
    source_pmf: &[f64],
    codeword_pmf: &[f64],
    n: u64,
    d: f64,
    m: u64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 || m == 0 || n == 0 {
        return domain("trials, code size and blocklength must be positive");
    }
    let src = WeightedIndex::new(source_pmf)
        .map_err(|e| Error::Domain(format!("source pmf: {e}")))?;
    let cw = WeightedIndex::new(codeword_pmf)
        .map_err(|e| Error::Domain(format!("codeword pmf: {e}")))?;
    let r = floor_nudged(n as f64 * d).max(-1);
    let nu = n as usize;
    let fails: u64 = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = trials / MC_SHARDS + u64::from(shard < trials % MC_SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let mut x = vec![0usize; nu];
            let mut fails = 0u64;
            for _ in 0..count {
                for xi in x.iter_mut() {
                    *xi = src.sample(&mut rng);
                }
                let mut ok = false;
                // all m codewords are drawn even after a hit, keeping streams aligned
                for _ in 0..m {
                    let mut dist = 0i64;
                    for &xi in &x {
                        if cw.sample(&mut rng) != xi {
                            dist += 1;
                        }
                    }
                    ok |= dist <= r;
                }
                if !ok {
                    fails += 1;
                }
            }
            fails
        })
        .sum();
    let eps_hat = fails as f64 / trials as f64;
    let stderr = (eps_hat * (1.0 - eps_hat) / trials as f64).sqrt();
    Ok(McEstimate {
        eps_hat,
        stderr,
        trials,
    })
}

/// Exact lossless minimum code size and the Neyman-Pearson `β` against the
/// counting measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LosslessMstar {
    pub m_star: f64,
    pub beta: f64,
}

/// Minimum number of strings covering probability `1 - ε`, scanning outcomes
/// in order of decreasing probability one type class at a time.
pub fn lossless_mstar(pmf: &[f64], n: u64, eps: f64) -> Result<LosslessMstar> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0,1), got {eps}"));
    }
    let mut w = type_weights(pmf, n)?;
    w.sort_by(|a, b| b.0.total_cmp(&a.0));
    let target = 1.0 - eps;
    let mut cum = 0.0;
    let mut before = 0.0f64;
    let mut i = 0;
    while i < w.len() {
        let head = w[i].0;
        let mut j = i;
        let mut count = 0.0;
        while j < w.len() && (w[j].0 - head).abs() <= 1e-10 * head.abs().max(1.0) {
            count += w[j].1.exp().round();
            j += 1;
        }
        let each = head.exp();
        if cum + count * each >= target * (1.0 - 1e-14) {
            let need = ((target - cum) / each).max(0.0);
            let take = (need - 1e-9).ceil().max(1.0).min(count);
            let m_star = before + take;
            let prev_mass = cum + (take - 1.0) * each;
            let alpha = ((target - prev_mass) / each).clamp(0.0, 1.0);
            if !m_star.is_finite() {
                return Err(Error::NonFinite("code size overflows f64".into()));
            }
            return Ok(LosslessMstar {
                m_star,
                beta: m_star - 1.0 + alpha,
            });
        }
        cum += count * each;
        before += count;
        i = j;
    }
    Ok(LosslessMstar {
        m_star: before,
        beta: before,
    })
}

//! Log-domain binomial coefficients, Hamming-ball sizes and binomial probabilities.

use super::logreal::{log_add, log_sum_exp, LogReal};
use super::special::{bd0, stirling_error};
use crate::error::{domain, Result};
use std::f64::consts::PI;

/// Binary entropy in nats. `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.ln() - (1.0 - x) * (-x).ln_1p()
}

/// `ln C(n, k)` as a plain float. Caller guarantees `k <= n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if k <= 30 {
        let nk = (n - k) as f64;
        return (1..=k)
            .map(|i| ((nk + i as f64) / i as f64).ln())
            .sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    let frac = kf / nf;
    let ent = -kf * frac.ln() - rest * (-frac).ln_1p();
    ent - 0.5 * (2.0 * PI * kf * rest / nf).ln() + stirling_error(nf)
        - stirling_error(kf)
        - stirling_error(rest)
}

/// `ln C(n, k)` with a domain check.
pub fn log_binomial(n: u64, k: u64) -> Result<LogReal> {
    if k > n {
        return domain(format!("binomial coefficient needs k <= n (n={n}, k={k})"));
    }
    Ok(LogReal::from_ln(ln_choose(n, k)))
}

/// `ln C(n, k)` returning zero for `k < 0` or `k > n`.
pub fn ln_choose_or_zero(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        f64::NEG_INFINITY
    } else {
        ln_choose(n as u64, k as u64)
    }
}

/// `ln Σ_{j<=k} C(n,j)`, zero for `k < 0`, `2^n` for `k >= n`.
pub fn log_partial_binom_sum(n: u64, k: i64) -> LogReal {
    log_hamming_ball(n, k, 2)
}

/// Log-size of a Hamming ball of radius `k` in an `m`-ary space of length `n`.
pub fn log_hamming_ball(n: u64, k: i64, m: u32) -> LogReal {
    if k < 0 {
        return LogReal::ZERO;
    }
    let lm1 = ((m - 1) as f64).ln();
    if k as u64 >= n {
        return LogReal::from_ln(n as f64 * (m as f64).ln());
    }
    let mut acc = f64::NEG_INFINITY;
    for j in 0..=k as u64 {
        acc = log_add(acc, ln_choose(n, j) + j as f64 * lm1);
    }
    LogReal::from_ln(acc)
}

/// Cached prefix sums `ln S_k` for all radii of one `(n, m)` space.
#[derive(Clone, Debug)]
pub struct HammingBallTable {
    n: u64,
    prefix: Vec<f64>,
}

impl HammingBallTable {
    pub fn new(n: u64, m: u32) -> Self {
        let lm1 = ((m - 1) as f64).ln();
        let mut prefix = Vec::with_capacity(n as usize + 1);
        let mut acc = f64::NEG_INFINITY;
        for j in 0..=n {
            acc = log_add(acc, ln_choose(n, j) + j as f64 * lm1);
            prefix.push(acc);
        }
        // pin the full-space value exactly
        prefix[n as usize] = n as f64 * (m as f64).ln();
        HammingBallTable { n, prefix }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `ln S_k` with the out-of-range conventions.
    pub fn ln_size(&self, k: i64) -> f64 {
        if k < 0 {
            f64::NEG_INFINITY
        } else if k as u64 >= self.n {
            self.prefix[self.n as usize]
        } else {
            self.prefix[k as usize]
        }
    }
}

/// `ln P[Bin(n,p) = k]`, computed with the saddle-point form for accuracy at large `n`.
pub fn binom_ln_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if k == 0 {
        return nf * (-p).ln_1p();
    }
    if k == n {
        return nf * p.ln();
    }
    let (kf, rf) = (k as f64, (n - k) as f64);
    stirling_error(nf) - stirling_error(kf) - stirling_error(rf) - bd0(kf, nf * p) - bd0(rf, nf * q)
        + 0.5 * (nf / (2.0 * PI * kf * rf)).ln()
}

/// All `ln P[Bin(n,p)=k]` for `k = 0..=n`.
pub fn binom_ln_pmf_table(n: u64, p: f64) -> Vec<f64> {
    (0..=n).map(|k| binom_ln_pmf(n, p, k)).collect()
}

/// `P[Bin(n,p) <= r]` by exact log-domain summation of the smaller tail.
pub fn binom_cdf(n: u64, p: f64, r: i64) -> f64 {
    if r < 0 {
        return 0.0;
    }
    if r as u64 >= n {
        return 1.0;
    }
    let r = r as u64;
    let mean = n as f64 * p;
    if (r as f64) < mean {
        log_sum_exp((0..=r).map(|k| binom_ln_pmf(n, p, k))).exp().min(1.0)
    } else {
        let upper = log_sum_exp((r + 1..=n).map(|k| binom_ln_pmf(n, p, k))).exp();
        (1.0 - upper).max(0.0)
    }
}

/// `floor(x)` tolerant of representation error just below an integer.
pub fn floor_nudged(x: f64) -> i64 {
    (x + 1e-9).floor() as i64
}

/// `ceil(x)` tolerant of representation error just above an integer.
pub fn ceil_nudged(x: f64) -> i64 {
    (x - 1e-9).ceil() as i64
}

/// Number of compositions of `n` into `m` nonnegative parts, `C(n+m-1, m-1)`, as a float.
pub fn composition_count(n: u64, m: u32) -> f64 {
    ln_choose(n + m as u64 - 1, m as u64 - 1).exp().round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{Binomial, DiscreteCDF};

    #[test]
    fn small_binomials() {
        assert!((log_binomial(4, 2).unwrap().ln() - 6f64.ln()).abs() < 1e-15);
        assert_eq!(log_binomial(9, 0).unwrap().ln(), 0.0);
        assert!(log_binomial(3, 4).is_err());
    }

    #[test]
    fn binomial_matches_exact_integers() {
        // C(60, 30) = 118264581564861424
        let exact = 118_264_581_564_861_424f64.ln();
        assert!((ln_choose(60, 30) - exact).abs() / exact < 1e-14);
        // C(100, 50) ~ 1.0089134454556419e29
        let v = 1.008_913_445_455_641_9e29f64.ln();
        assert!((ln_choose(100, 50) - v).abs() / v < 1e-13);
    }

    #[test]
    fn binomial_switch_is_seamless() {
        for n in [61u64, 100, 500] {
            for k in 28..34u64 {
                let direct: f64 = (1..=k)
                    .map(|i| (((n - k + i) as f64) / i as f64).ln())
                    .sum();
                assert!((ln_choose(n, k) - direct).abs() < 1e-12 * direct);
            }
        }
    }

    #[test]
    fn partial_sums_conventions() {
        assert!((log_partial_binom_sum(5, 2).ln() - 16f64.ln()).abs() < 1e-14);
        assert!(log_partial_binom_sum(5, -1).is_zero());
        assert!((log_partial_binom_sum(5, 9).ln() - 32f64.ln()).abs() < 1e-14);
        assert!((log_hamming_ball(2, 1, 3).ln() - 5f64.ln()).abs() < 1e-14);
        assert_eq!(log_hamming_ball(17, 0, 5).ln(), 0.0);
    }

    #[test]
    fn table_agrees_with_direct() {
        let t = HammingBallTable::new(200, 4);
        for k in [-3i64, 0, 1, 22, 150, 199, 200, 250] {
            let a = t.ln_size(k);
            let b = log_hamming_ball(200, k, 4).ln();
            if b.is_finite() {
                assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
            } else {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn binom_cdf_edges() {
        assert_eq!(binom_cdf(10, 0.5, 10), 1.0);
        assert!((binom_cdf(2, 0.5, 0) - 0.25).abs() < 1e-15);
        assert_eq!(binom_cdf(10, 0.5, -1), 0.0);
    }

    #[test]
    fn binom_cdf_against_statrs() {
        for &(n, p) in &[(1000u64, 0.4), (37, 0.11), (5000, 0.5)] {
            let b = Binomial::new(p, n).unwrap();
            for r in [0, n / 10, n / 3, (n as f64 * p) as u64, n - 2] {
                let ours = binom_cdf(n, p, r as i64);
                let theirs = b.cdf(r);
                assert!(
                    (ours - theirs).abs() < 1e-10,
                    "n={n} p={p} r={r} ours={ours} theirs={theirs}"
                );
            }
        }
    }

    #[test]
    fn pmf_normalizes() {
        for &(n, p) in &[(1u64, 0.3), (50, 0.5), (3000, 0.07)] {
            let total = log_sum_exp(binom_ln_pmf_table(n, p)).exp();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nudged_rounding() {
        assert_eq!(floor_nudged(100.0 * 0.11), 11);
        assert_eq!(floor_nudged(10.999), 10);
        assert_eq!(ceil_nudged(200.0 * 0.35), 70);
        assert_eq!(ceil_nudged(70.2), 71);
    }

    proptest! {
        #[test]
        fn stirling_sandwich(n in 2u64..10_000, frac in 0.0f64..1.0) {
            let k = 1 + ((n - 2) as f64 * frac) as u64;
            let (nf, kf) = (n as f64, k as f64);
            let ent = nf * binary_entropy(kf / nf);
            let lower = 0.5 * (nf / (8.0 * kf * (nf - kf))).ln() + ent;
            let upper = 0.5 * (nf / (2.0 * PI * kf * (nf - kf))).ln() + ent;
            let c = ln_choose(n, k);
            prop_assert!(c >= lower - 1e-9 && c <= upper + 1e-9);
        }

        #[test]
        fn partial_sum_sandwich(n in 2u64..2000, frac in 0.0f64..0.499) {
            let k = (n as f64 * frac) as u64;
            prop_assume!(2 * k < n);
            let c = ln_choose(n, k);
            let s = log_partial_binom_sum(n, k as i64).ln();
            let up = c + ((n - k) as f64 / (n - 2 * k) as f64).ln();
            prop_assert!(s >= c - 1e-9 && s <= up + 1e-9);
        }

        #[test]
        fn hamming_ball_sandwich(n in 2u64..600, m in 2u32..6, frac in 0.0f64..1.0) {
            let mf = m as f64;
            let kmax = (n as f64) * (mf - 1.0) / mf;
            let k = ((kmax - 1.0).max(0.0) * frac) as u64;
            let denom = n as f64 - k as f64 * mf / (mf - 1.0);
            prop_assume!(denom > 0.0);
            let base = ln_choose(n, k) + k as f64 * (mf - 1.0).ln();
            let s = log_hamming_ball(n, k as i64, m).ln();
            let up = base + ((n - k) as f64 / denom).ln();
            prop_assert!(s >= base - 1e-9 && s <= up + 1e-9);
        }
    }
}

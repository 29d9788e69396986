//! Source-generic bound engines over discrete sum distributions and ball masses.

use crate::error::{Error, Result};
use crate::numerics::{ln_gamma, ln_neg_log1m_exp};
use crate::sources::TiltedInfoDist;
use rayon::prelude::*;

/// Largest number of lattice points any exact enumeration may visit.
pub const ENUMERATION_BUDGET: f64 = 1e7;

/// Distribution of a sum of i.i.d. discrete terms, as sorted atoms with exact tails.
#[derive(Clone, Debug)]
pub struct SumDist {
    values: Vec<f64>,
    probs: Vec<f64>,
    /// `tail[i] = Σ_{j >= i} probs[j]`, one extra trailing zero.
    tail: Vec<f64>,
}

impl SumDist {
    /// Builds from unsorted `(value, ln_prob)` pairs; merges values closer than `1e-12` relative.
    pub fn from_ln_atoms(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.retain(|a| a.1 > f64::NEG_INFINITY);
        atoms.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, lp) in atoms {
            let p = lp.exp();
            match values.last() {
                Some(&last) if (last - v).abs() <= 1e-12 * v.abs().max(1.0) => {
                    *probs.last_mut().unwrap() += p;
                }
                _ => {
                    values.push(v);
                    probs.push(p);
                }
            }
        }
        let mut tail = vec![0.0; probs.len() + 1];
        for i in (0..probs.len()).rev() {
            tail[i] = tail[i + 1] + probs[i];
        }
        SumDist {
            values,
            probs,
            tail,
        }
    }

    pub fn point_mass(v: f64) -> Self {
        SumDist::from_ln_atoms(vec![(v, 0.0)])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.tail[0]
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, p)| v * p).sum::<f64>() / self.total_mass()
    }

    /// `P[S >= t]`.
    pub fn sf_ge(&self, t: f64) -> f64 {
        let i = self.values.partition_point(|&v| v < t);
        self.tail[i]
    }

    /// `P[S > t]`.
    pub fn sf_gt(&self, t: f64) -> f64 {
        let i = self.values.partition_point(|&v| v <= t);
        self.tail[i]
    }
}

/// Checks an enumeration size against the exact-computation budget.
pub fn check_budget(what: &'static str, needed: f64) -> Result<()> {
    if needed > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            what,
            needed,
            cap: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

fn ln_factorials(n: u64) -> Vec<f64> {
    (0..=n).map(|i| ln_gamma(i as f64 + 1.0)).collect()
}

/// Visits every composition of `n` into `k` parts.
fn for_each_composition(n: u64, k: usize, f: &mut impl FnMut(&[u64])) {
    let mut c = vec![0u64; k];
    fn rec(pos: usize, left: u64, c: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
        if pos + 1 == c.len() {
            c[pos] = left;
            f(c);
            return;
        }
        for x in 0..=left {
            c[pos] = x;
            rec(pos + 1, left - x, c, f);
        }
    }
    rec(0, n, &mut c, f);
}

/// Exact distribution of the `n`-fold sum of i.i.d. copies of a discrete variable.
///
/// Enumerates count vectors over the distinct atoms with multinomial weights;
/// refuses when the number of count vectors exceeds the budget.
pub fn convolve_iid(dist: &TiltedInfoDist, n: u64) -> Result<SumDist> {
    let atoms = &dist.atoms;
    let k = atoms.len();
    if k == 0 {
        return Err(Error::Domain("empty single-letter distribution".into()));
    }
    if k > 8 {
        return Err(Error::Unsupported(format!(
            "{k} distinct atoms; exact convolution supports at most 8"
        )));
    }
    let count = crate::numerics::combinatorics::composition_count(n, k as u32);
    check_budget(
        "sum-distribution count vectors (use the Berry-Esseen window for a diagnostic)",
        count,
    )?;
    let lf = ln_factorials(n);
    let ln_p: Vec<f64> = atoms.iter().map(|a| a.1.ln()).collect();
    let mut out = Vec::with_capacity(count as usize);
    for_each_composition(n, k, &mut |c| {
        let mut v = 0.0;
        let mut lw = lf[n as usize];
        for i in 0..k {
            v += c[i] as f64 * atoms[i].0;
            lw += c[i] as f64 * ln_p[i] - lf[c[i] as usize];
        }
        out.push((v, lw));
    });
    Ok(SumDist::from_ln_atoms(out))
}

/// Tilted-information converse: `sup_{γ>=0} P[S >= log M + γ] - e^{-γ}`, clamped to `[0,1]`.
///
/// The survival function is a step function, so the supremum is attained with
/// the threshold at an atom; every atom at or above `log M` is evaluated.
pub fn converse_tilted(sum: &SumDist, log_m: f64) -> f64 {
    let start = sum.values.partition_point(|&v| v < log_m);
    let mut best: f64 = 0.0;
    for i in start..sum.values.len() {
        let s = sum.tail[i];
        if s <= best {
            break;
        }
        let g = sum.values[i] - log_m;
        best = best.max(s - (-g).exp());
    }
    best.clamp(0.0, 1.0)
}

/// Distribution of the ball mass `W = P_Y(B_d(X))` under the source, as
/// `(probability, ln w)` atoms.
#[derive(Clone, Debug, Default)]
pub struct BallMassDist {
    pub atoms: Vec<(f64, f64)>,
}

impl BallMassDist {
    pub fn constant(ln_w: f64) -> Self {
        BallMassDist {
            atoms: vec![(1.0, ln_w)],
        }
    }

    pub fn push(&mut self, prob: f64, ln_w: f64) {
        if prob > 0.0 {
            self.atoms.push((prob, ln_w));
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.0).sum()
    }
}

/// `(1-w)^M` with `M = e^{log_m}`, zero when `w = 1`.
pub fn miss_prob(ln_w: f64, log_m: f64) -> f64 {
    if ln_w >= 0.0 {
        return 0.0;
    }
    if ln_w == f64::NEG_INFINITY {
        return 1.0;
    }
    // M ln(1-w) = -exp(log_m + ln(-ln(1-w)))
    (-(log_m + ln_neg_log1m_exp(ln_w)).exp()).exp()
}

/// Exact random-coding bound `E[(1 - W)^M]`.
pub fn rc_exact(ball: &BallMassDist, log_m: f64) -> f64 {
    let s: f64 = ball.atoms.iter().map(|&(p, lw)| p * miss_prob(lw, log_m)).sum();
    s.clamp(0.0, 1.0)
}

/// Relaxed random-coding bound `E[exp(-M W)]`.
pub fn rc_relaxed(ball: &BallMassDist, log_m: f64) -> f64 {
    let s: f64 = ball
        .atoms
        .iter()
        .map(|&(p, lw)| p * (-(log_m + lw).exp()).exp())
        .sum();
    s.clamp(0.0, 1.0)
}

/// Union-bound converse `E[(1 - M W)^+]`.
pub fn converse_ball(ball: &BallMassDist, log_m: f64) -> f64 {
    let s: f64 = ball
        .atoms
        .iter()
        .map(|&(p, lw)| p * (1.0 - (log_m + lw).exp()).max(0.0))
        .sum();
    s.clamp(0.0, 1.0)
}

/// Hypothesis-testing converse: `log M >= log β - log (max ball mass)`.
pub fn ht_converse(log_beta: f64, log_max_ball: f64) -> f64 {
    log_beta - log_max_ball
}

/// Shannon's achievability for one test channel:
/// `P_dist + inf_{γ>0} { P[S > log M - γ] + exp(-e^γ) }`, where `S` is the
/// information-density sum and `P_dist` the probability the distortion sum
/// exceeds the target.
pub fn shannon_ach(info: &SumDist, p_dist: f64, log_m: f64) -> f64 {
    let mut best = 1.0f64;
    let end = info.values.partition_point(|&v| v < log_m);
    for i in 0..end {
        let g = log_m - info.values[i];
        best = best.min(info.tail[i + 1] + (-g.exp()).exp());
    }
    (p_dist + best).clamp(0.0, 1.0)
}

/// Smallest `log M` for which `shannon_ach <= eps`, exact over the atoms.
/// Returns `+inf` when no finite code size meets the target.
pub fn shannon_ach_log_m(info: &SumDist, p_dist: f64, eps: f64) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..info.values.len() {
        let slack = eps - p_dist - info.tail[i + 1];
        if slack <= 0.0 {
            continue;
        }
        // smallest γ > 0 with exp(-e^γ) <= slack
        let gamma = if slack >= (-1.0f64).exp() {
            0.0
        } else {
            (-slack.ln()).ln()
        };
        best = best.min(info.values[i] + gamma);
    }
    best
}

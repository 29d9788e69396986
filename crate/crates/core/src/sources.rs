//! Source models, rate-distortion functions, d-tilted information and dispersion.

use crate::error::{domain, Error, Result};
use crate::numerics::{binary_entropy, bisect_predicate, q_inv};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// A memoryless source together with its distortion measure.
///
/// Discrete sources use the Hamming (symbol error) distortion; the Gaussian
/// source uses mean-square error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceModel {
    /// Binary memoryless, `P[X = 1] = p <= 1/2`.
    Bms { p: f64 },
    /// Discrete memoryless with a nonincreasing pmf.
    Dms { pmf: Vec<f64> },
    /// Equiprobable bits observed through an erasure channel with erasure rate `delta`.
    Bes { delta: f64 },
    /// Zero-mean Gaussian with variance `sigma2`.
    Gms { sigma2: f64 },
}

/// Rate-distortion quantities at a single distortion level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RdPoint {
    pub d: f64,
    pub rate_nats: f64,
    /// Negative slope of the rate-distortion function, in nats per unit distortion.
    pub lambda_star: f64,
    /// Water level, discrete memoryless sources only.
    pub eta: Option<f64>,
    pub m_eta: Option<usize>,
    pub dispersion: f64,
}

/// Single-letter distribution of the d-tilted information, as `(value_nats, prob)` atoms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiltedInfoDist {
    pub atoms: Vec<(f64, f64)>,
}

impl TiltedInfoDist {
    /// Builds the distribution, merging values closer than `1e-12` (relative).
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.retain(|&(_, p)| p > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if (last.0 - v).abs() <= 1e-12 * v.abs().max(1.0) => {
                    last.0 = (last.0 * last.1 + v * p) / (last.1 + p);
                    last.1 += p;
                }
                _ => merged.push((v, p)),
            }
        }
        TiltedInfoDist { atoms: merged }
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.atoms.iter().map(|&(v, p)| p * (v - mu).powi(2)).sum()
    }

    pub fn third_abs_central_moment(&self) -> f64 {
        let mu = self.mean();
        self.atoms.iter().map(|&(v, p)| p * (v - mu).abs().powi(3)).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, p)| p).sum()
    }
}

/// Reverse water-filling solution for a discrete memoryless source.
#[derive(Clone, Debug, PartialEq)]
pub struct WaterLevel {
    pub eta: f64,
    /// Number of letters that receive reproduction mass.
    pub m_eta: usize,
    /// Optimal reproduction distribution (length `m`, zero beyond `m_eta`).
    pub output: Vec<f64>,
    /// Backward channel `[a][b]` = P[X = a | Y = b] for `b < m_eta`.
    pub backward: Vec<Vec<f64>>,
}

/// Solves the reverse water-filling equations for a sorted pmf and `0 < d < 1 - pmf[0]`.
pub fn dms_water_level(pmf: &[f64], d: f64) -> Result<WaterLevel> {
    let m = pmf.len();
    if !(d > 0.0 && d < 1.0 - pmf[0]) {
        return domain(format!("water level needs 0 < d < {} (got {d})", 1.0 - pmf[0]));
    }
    let mut tail = 0.0;
    for m_eta in (2..=m).rev() {
        let eta = (d - tail) / (m_eta - 1) as f64;
        let next = if m_eta < m { pmf[m_eta] } else { 0.0 };
        if eta > 0.0 && pmf[m_eta - 1] > eta && eta >= next {
            let mut output = vec![0.0; m];
            for b in 0..m_eta {
                output[b] = (pmf[b] - eta) / (1.0 - d - eta);
            }
            let backward = (0..m)
                .map(|a| {
                    (0..m_eta)
                        .map(|b| {
                            if a >= m_eta {
                                pmf[a]
                            } else if a == b {
                                1.0 - d
                            } else {
                                eta
                            }
                        })
                        .collect()
                })
                .collect();
            return Ok(WaterLevel {
                eta,
                m_eta,
                output,
                backward,
            });
        }
        tail += pmf[m_eta - 1];
    }
    Err(Error::Domain(format!(
        "no consistent water level for d = {d}; pmf must be sorted and positive"
    )))
}

/// Which quantity a blocklength estimate targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    /// Fixed distortion, rate within a relative excess of the rate-distortion function.
    Rate,
    /// Fixed rate, distortion within a relative excess of the distortion-rate function.
    Distortion,
}

/// Blocklength needed to come within a relative excess of the asymptotic limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlocklengthPlan {
    pub n: f64,
    /// Dispersion over squared limit; the only source-dependent factor.
    pub source_factor: f64,
    /// `(Q^{-1}(eps)/excess)^2`.
    pub reliability_factor: f64,
    pub zero_dispersion: bool,
}

impl SourceModel {
    pub fn bms(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 0.5) {
            return domain(format!("binary source needs 0 < p <= 1/2, got {p}"));
        }
        Ok(SourceModel::Bms { p })
    }

    /// Sorts the pmf into nonincreasing order; rejects non-positive entries
    /// and sums farther than `1e-12` from one.
    pub fn dms(pmf: &[f64]) -> Result<Self> {
        if pmf.len() < 2 {
            return domain("discrete source needs at least two letters");
        }
        if pmf.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return domain("discrete source pmf must be strictly positive");
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("pmf sums to {total}, not 1"));
        }
        let mut v: Vec<f64> = pmf.iter().map(|p| p / total).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        Ok(SourceModel::Dms { pmf: v })
    }

    pub fn bes(delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return domain(format!("erasure rate must lie in [0, 1), got {delta}"));
        }
        Ok(SourceModel::Bes { delta })
    }

    pub fn gms(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return domain(format!("Gaussian source needs sigma2 > 0, got {sigma2}"));
        }
        Ok(SourceModel::Gms { sigma2 })
    }

    /// Checks the invariants of a possibly hand-built or deserialized model.
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceModel::Bms { p } => SourceModel::bms(*p).map(|_| ()),
            SourceModel::Dms { pmf } => {
                SourceModel::dms(pmf)?;
                if pmf.windows(2).any(|w| w[0] < w[1]) {
                    return domain("pmf must be sorted nonincreasing");
                }
                Ok(())
            }
            SourceModel::Bes { delta } => SourceModel::bes(*delta).map(|_| ()),
            SourceModel::Gms { sigma2 } => SourceModel::gms(*sigma2).map(|_| ()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SourceModel::Bms { .. } => "bms",
            SourceModel::Dms { .. } => "dms",
            SourceModel::Bes { .. } => "bes",
            SourceModel::Gms { .. } => "gms",
        }
    }

    /// Size of the reproduction alphabet, if finite.
    pub fn alphabet_size(&self) -> Option<usize> {
        match self {
            SourceModel::Bms { .. } | SourceModel::Bes { .. } => Some(2),
            SourceModel::Dms { pmf } => Some(pmf.len()),
            SourceModel::Gms { .. } => None,
        }
    }

    /// `(d_min, d_max)`: the rate is zero at and beyond `d_max`.
    pub fn d_range(&self) -> (f64, f64) {
        match self {
            SourceModel::Bms { p } => (0.0, *p),
            SourceModel::Dms { pmf } => (0.0, 1.0 - pmf[0]),
            SourceModel::Bes { delta } => (delta / 2.0, 0.5),
            SourceModel::Gms { sigma2 } => (0.0, *sigma2),
        }
    }

    fn check_d(&self, d: f64) -> Result<()> {
        let (lo, _) = self.d_range();
        if !(d >= lo) || !d.is_finite() {
            return domain(format!(
                "distortion {d} below the minimum {lo} for the {} source",
                self.name()
            ));
        }
        if let SourceModel::Gms { .. } = self {
            if d <= 0.0 {
                return domain("Gaussian source needs d > 0");
            }
        }
        Ok(())
    }

    /// Rate-distortion function in nats.
    pub fn rate_distortion(&self, d: f64) -> Result<f64> {
        self.check_d(d)?;
        let (_, dmax) = self.d_range();
        if d >= dmax {
            return Ok(0.0);
        }
        Ok(match self {
            SourceModel::Bms { p } => binary_entropy(*p) - binary_entropy(d),
            SourceModel::Dms { pmf } => {
                if d == 0.0 {
                    entropy(pmf)
                } else {
                    let wl = dms_water_level(pmf, d)?;
                    let head: f64 = pmf[..wl.m_eta].iter().map(|p| -p * p.ln()).sum();
                    head + (1.0 - d) * (-d).ln_1p() + (wl.m_eta - 1) as f64 * wl.eta * wl.eta.ln()
                }
            }
            SourceModel::Bes { delta } => {
                (1.0 - delta) * (LN_2 - binary_entropy((d - delta / 2.0) / (1.0 - delta)))
            }
            SourceModel::Gms { sigma2 } => 0.5 * (sigma2 / d).ln(),
        })
    }

    /// Negative slope of the rate-distortion function at `d`, in nats.
    pub fn lambda_star(&self, d: f64) -> Result<f64> {
        self.check_d(d)?;
        let (_, dmax) = self.d_range();
        if d >= dmax {
            return Ok(0.0);
        }
        Ok(match self {
            SourceModel::Bms { .. } => ((1.0 - d) / d).ln(),
            SourceModel::Dms { pmf } => {
                if d == 0.0 {
                    f64::INFINITY
                } else {
                    ((1.0 - d) / dms_water_level(pmf, d)?.eta).ln()
                }
            }
            SourceModel::Bes { delta } => {
                ((1.0 - delta / 2.0 - d) / (d - delta / 2.0)).ln()
            }
            SourceModel::Gms { .. } => 0.5 / d,
        })
    }

    /// Per-letter d-tilted information. Undefined for the Gaussian source,
    /// whose tilted information is continuous.
    pub fn tilted_info_dist(&self, d: f64) -> Result<TiltedInfoDist> {
        self.check_d(d)?;
        let (dmin, dmax) = self.d_range();
        if d >= dmax {
            return domain(format!(
                "d-tilted information needs d < {dmax} for the {} source",
                self.name()
            ));
        }
        match self {
            SourceModel::Bms { p } => {
                let hd = binary_entropy(d);
                Ok(TiltedInfoDist::new(vec![
                    (-(1.0 - p).ln() - hd, 1.0 - p),
                    (-p.ln() - hd, *p),
                ]))
            }
            SourceModel::Dms { pmf } => {
                if d == 0.0 {
                    return Ok(TiltedInfoDist::new(
                        pmf.iter().map(|&p| (-p.ln(), p)).collect(),
                    ));
                }
                let wl = dms_water_level(pmf, d)?;
                let base = (1.0 - d) * (-d).ln_1p() + d * wl.eta.ln();
                let cap = -wl.eta.ln();
                Ok(TiltedInfoDist::new(
                    pmf.iter().map(|&p| (base + (-p.ln()).min(cap), p)).collect(),
                ))
            }
            SourceModel::Bes { delta } => {
                if d <= dmin {
                    if *delta == 0.0 {
                        return Ok(TiltedInfoDist::new(vec![(LN_2, 1.0)]));
                    }
                    return domain("erased source needs d > delta/2 for tilted information");
                }
                let lam = self.lambda_star(d)?;
                let kept = LN_2 - (-lam).exp().ln_1p();
                Ok(TiltedInfoDist::new(vec![
                    (kept - lam * d, 1.0 - delta),
                    (lam - lam * d, delta / 2.0),
                    (-lam * d, delta / 2.0),
                ]))
            }
            SourceModel::Gms { .. } => Err(Error::Unsupported(
                "Gaussian d-tilted information is continuous; use the chi-square form".into(),
            )),
        }
    }

    /// Rate-dispersion function in nats².
    pub fn dispersion(&self, d: f64) -> Result<f64> {
        self.check_d(d)?;
        let (dmin, dmax) = self.d_range();
        if d >= dmax {
            return Ok(0.0);
        }
        Ok(match self {
            SourceModel::Bms { p } => p * (1.0 - p) * ((1.0 - p) / p).ln().powi(2),
            SourceModel::Dms { .. } => self.tilted_info_dist(d)?.variance(),
            SourceModel::Bes { delta } => {
                if d <= dmin {
                    return if *delta == 0.0 {
                        Ok(0.0)
                    } else {
                        Ok(f64::INFINITY)
                    };
                }
                let lam = self.lambda_star(d)?;
                delta * (1.0 - delta) * (lam / 2.0).cosh().ln().powi(2) + delta * lam * lam / 4.0
            }
            SourceModel::Gms { .. } => 0.5,
        })
    }

    pub fn rd_point(&self, d: f64) -> Result<RdPoint> {
        let (eta, m_eta) = match self {
            SourceModel::Dms { pmf } if d > 0.0 && d < 1.0 - pmf[0] => {
                let wl = dms_water_level(pmf, d)?;
                (Some(wl.eta), Some(wl.m_eta))
            }
            _ => (None, None),
        };
        Ok(RdPoint {
            d,
            rate_nats: self.rate_distortion(d)?,
            lambda_star: self.lambda_star(d)?,
            eta,
            m_eta,
            dispersion: self.dispersion(d)?,
        })
    }

    /// Largest rate with a positive distortion-rate value (rate at `d_min`).
    pub fn max_rate(&self) -> f64 {
        match self {
            SourceModel::Gms { .. } => f64::INFINITY,
            _ => {
                let (dmin, _) = self.d_range();
                self.rate_distortion(dmin).unwrap_or(0.0)
            }
        }
    }

    /// Distortion-rate function: the inverse of `rate_distortion`.
    pub fn distortion_rate(&self, rate: f64) -> Result<f64> {
        let rmax = self.max_rate();
        if !(rate > 0.0 && rate < rmax) {
            return domain(format!(
                "rate {rate} nats outside (0, {rmax}) for the {} source",
                self.name()
            ));
        }
        if let SourceModel::Gms { sigma2 } = self {
            return Ok(sigma2 * (-2.0 * rate).exp());
        }
        let (dmin, dmax) = self.d_range();
        // rate_distortion is decreasing: find the smallest d with R(d) <= rate
        let (lo, hi) = bisect_predicate(|d| Ok(self.rate_distortion(d)? <= rate), dmin, dmax)?;
        Ok(0.5 * (lo + hi))
    }

    /// Distortion-dispersion function `(D'(R))^2 V(D(R))`, with `D'(R) = -1/λ*`.
    pub fn distortion_dispersion(&self, rate: f64) -> Result<f64> {
        let d = self.distortion_rate(rate)?;
        let lam = self.lambda_star(d)?;
        Ok(self.dispersion(d)? / (lam * lam))
    }

    /// Blocklength at which the Gaussian approximation reaches `(1 + excess)` times
    /// the asymptotic limit. `target` is `d` in rate mode and the rate (nats) in
    /// distortion mode.
    pub fn required_blocklength(
        &self,
        mode: PlanMode,
        target: f64,
        excess: f64,
        eps: f64,
    ) -> Result<BlocklengthPlan> {
        if !(excess > 0.0) {
            return domain("relative excess must be positive");
        }
        let z = q_inv(eps)?;
        let reliability_factor = (z / excess).powi(2);
        let source_factor = match mode {
            PlanMode::Rate => {
                let r = self.rate_distortion(target)?;
                if r <= 0.0 {
                    return domain("rate mode needs d below d_max");
                }
                self.dispersion(target)? / (r * r)
            }
            PlanMode::Distortion => {
                let d = self.distortion_rate(target)?;
                self.distortion_dispersion(target)? / (d * d)
            }
        };
        Ok(BlocklengthPlan {
            n: source_factor * reliability_factor,
            source_factor,
            reliability_factor,
            zero_dispersion: source_factor == 0.0,
        })
    }
}

/// Entropy of a pmf in nats.
pub fn entropy(pmf: &[f64]) -> f64 {
    pmf.iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum()
}

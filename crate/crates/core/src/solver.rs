//! Turning excess-distortion bounds into bounds on the minimum code size,
//! the minimum rate and the minimum distortion.

use crate::bounds::engine::{converse_ball, converse_tilted, convolve_iid, rc_exact};
use crate::bounds::{bes, binary, dms, gms, BoundKind, BoundValue, Remainder};
use crate::error::{domain, Error, Result};
use crate::numerics::bisect_predicate;
use crate::sources::SourceModel;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Every bound the solver knows, by command-line name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundId {
    EbmsConv,
    EbmsAch,
    BmsTiltedConv,
    BmsHtConv,
    BmsAch,
    BmsCcAch,
    ShannonAch,
    EdmsConv,
    EdmsAch,
    DmsTiltedConv,
    DmsHtConv,
    DmsCcAch,
    BesConv,
    BesAch,
    GmsTiltedConv,
    VolumeConverse,
    CapAch,
    CoveringAch,
    Approx,
}

impl BoundId {
    pub const ALL: [BoundId; 19] = [
        BoundId::EbmsConv,
        BoundId::EbmsAch,
        BoundId::BmsTiltedConv,
        BoundId::BmsHtConv,
        BoundId::BmsAch,
        BoundId::BmsCcAch,
        BoundId::ShannonAch,
        BoundId::EdmsConv,
        BoundId::EdmsAch,
        BoundId::DmsTiltedConv,
        BoundId::DmsHtConv,
        BoundId::DmsCcAch,
        BoundId::BesConv,
        BoundId::BesAch,
        BoundId::GmsTiltedConv,
        BoundId::VolumeConverse,
        BoundId::CapAch,
        BoundId::CoveringAch,
        BoundId::Approx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::EbmsConv => "ebms-conv",
            BoundId::EbmsAch => "ebms-ach",
            BoundId::BmsTiltedConv => "bms-tilted-conv",
            BoundId::BmsHtConv => "bms-ht-conv",
            BoundId::BmsAch => "bms-ach",
            BoundId::BmsCcAch => "bms-cc-ach",
            BoundId::ShannonAch => "shannon-ach",
            BoundId::EdmsConv => "edms-conv",
            BoundId::EdmsAch => "edms-ach",
            BoundId::DmsTiltedConv => "dms-tilted-conv",
            BoundId::DmsHtConv => "dms-ht-conv",
            BoundId::DmsCcAch => "dms-cc-ach",
            BoundId::BesConv => "bes-conv",
            BoundId::BesAch => "bes-ach",
            BoundId::GmsTiltedConv => "gms-tilted-conv",
            BoundId::VolumeConverse => "volume-converse",
            BoundId::CapAch => "cap-ach",
            BoundId::CoveringAch => "covering-ach",
            BoundId::Approx => "approx",
        }
    }

    pub fn parse(s: &str) -> Option<BoundId> {
        BoundId::ALL.iter().copied().find(|b| b.name() == s)
    }

    pub fn kind(self) -> BoundKind {
        use BoundId::*;
        match self {
            EbmsConv | BmsTiltedConv | BmsHtConv | EdmsConv | DmsTiltedConv | DmsHtConv
            | BesConv | GmsTiltedConv | VolumeConverse => BoundKind::Converse,
            Approx => BoundKind::Approximation,
            _ => BoundKind::Achievability,
        }
    }

    /// Whether the bound applies to this source.
    pub fn supports(self, src: &SourceModel) -> bool {
        use BoundId::*;
        match (self, src) {
            (Approx, _) => true,
            (EbmsConv | EbmsAch, SourceModel::Bms { p }) => *p == 0.5,
            (BmsTiltedConv | BmsHtConv | BmsAch | BmsCcAch | ShannonAch, SourceModel::Bms { .. }) => {
                true
            }
            (EdmsConv | EdmsAch, SourceModel::Dms { pmf }) => pmf.iter().all(|&x| x == pmf[0]),
            (DmsTiltedConv | DmsHtConv | DmsCcAch, SourceModel::Dms { .. }) => true,
            (BesConv | BesAch, SourceModel::Bes { .. }) => true,
            (GmsTiltedConv | VolumeConverse | CapAch | CoveringAch, SourceModel::Gms { .. }) => {
                true
            }
            _ => false,
        }
    }

    /// All bounds applicable to a source, in declaration order.
    pub fn for_source(src: &SourceModel) -> Vec<BoundId> {
        BoundId::ALL.iter().copied().filter(|b| b.supports(src)).collect()
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Knobs for turning an excess-distortion bound into a code-size bound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveOptions {
    /// Round the code size to an integer (up for achievability, down for converse).
    pub integer_m: bool,
    /// Remainder for the Gaussian approximation; `None` picks the source default.
    pub remainder: Option<Remainder>,
}

/// Largest `log M` searched when inverting a bound.
pub fn log_m_ceiling(src: &SourceModel, n: u64, d: f64) -> f64 {
    let nf = n as f64;
    let per_letter = match src {
        SourceModel::Bms { .. } | SourceModel::Bes { .. } => std::f64::consts::LN_2,
        SourceModel::Dms { pmf } => (pmf.len() as f64).ln(),
        SourceModel::Gms { sigma2 } => 0.5 * (sigma2 / d).ln().max(0.0) + 5.0,
    };
    nf * per_letter + 64.0
}

const SPOT_CHECKS: usize = 6;
const MONOTONE_SLACK: f64 = 1e-12;

/// Inverts a nonincreasing map `log M -> ε` at level `eps`.
///
/// Achievability: the smallest `log M` whose bound is at most `eps`, an upper
/// bound on `log M*`. Converse: the largest `log M` whose lower bound on ε still
/// exceeds `eps`, a lower bound on `log M*`.
pub fn rate_from_eps_bound(
    mut bound: impl FnMut(f64) -> Result<f64>,
    eps: f64,
    kind: BoundKind,
    ceiling: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0,1), got {eps}"));
    }
    let mut prev = f64::INFINITY;
    for i in 0..SPOT_CHECKS {
        let x = ceiling * i as f64 / (SPOT_CHECKS - 1) as f64;
        let v = bound(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("bound value {v} at log M = {x}")));
        }
        if v > prev + MONOTONE_SLACK {
            return Err(Error::Monotonicity(format!(
                "bound rises from {prev} to {v} at log M = {x}"
            )));
        }
        prev = v;
    }
    if bound(0.0)? <= eps {
        return Ok(0.0);
    }
    if bound(ceiling)? > eps {
        return Err(Error::Bracket(format!(
            "bound stays above eps = {eps} up to log M = {ceiling}"
        )));
    }
    let (lo, hi) = bisect_predicate(|x| Ok(bound(x)? <= eps), 0.0, ceiling)?;
    Ok(match kind {
        BoundKind::Converse => lo,
        _ => hi,
    })
}

fn round_log_m(log_m: f64, kind: BoundKind) -> f64 {
    // beyond e^700 the integer rounding is far below double resolution
    if log_m > 700.0 {
        return log_m;
    }
    let m = log_m.exp();
    match kind {
        BoundKind::Achievability => m.ceil().ln(),
        BoundKind::Converse => m.floor().max(1.0).ln(),
        BoundKind::Approximation => log_m,
    }
}

/// Default Gaussian-approximation remainder per source, matching the figures.
pub fn default_remainder(src: &SourceModel, d: f64) -> Remainder {
    match src {
        SourceModel::Bms { .. } | SourceModel::Dms { .. } if d == 0.0 => Remainder::NegHalfLogN,
        SourceModel::Bms { p } if *p == 0.5 => Remainder::HalfLogN,
        SourceModel::Bms { .. } => Remainder::Zero,
        SourceModel::Dms { pmf } if pmf.iter().all(|&x| x == pmf[0]) => Remainder::HalfLogN,
        SourceModel::Dms { .. } => Remainder::Zero,
        SourceModel::Bes { .. } | SourceModel::Gms { .. } => Remainder::HalfLogN,
    }
}

/// Gaussian approximation of the minimum rate in nats per symbol.
pub fn gaussian_approx(
    src: &SourceModel,
    n: u64,
    d: f64,
    eps: f64,
    mode: Remainder,
) -> Result<f64> {
    if n == 0 {
        return domain("blocklength must be positive");
    }
    match src {
        SourceModel::Bms { p } => binary::binary_gaussian_approx(*p, n, d, eps, mode),
        SourceModel::Dms { pmf } => dms::dms_gaussian_approx(pmf, n, d, eps, mode),
        SourceModel::Bes { delta } => bes::bes_gaussian_approx(*delta, n, d, eps, mode),
        SourceModel::Gms { sigma2 } => gms::gms_gaussian_approx(*sigma2, n, d, eps, mode),
    }
}

type EpsFn = Box<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// How a bound is evaluated: as an excess-distortion map of `log M`, or as a
/// direct bound on `log M`.
enum Form {
    Eps(EpsFn),
    Direct(f64, Vec<(&'static str, f64)>),
}

fn source_form(src: &SourceModel, id: BoundId, n: u64, d: f64, eps: f64) -> Result<Form> {
    use BoundId::*;
    if !id.supports(src) {
        return Err(Error::Unsupported(format!(
            "bound {id} does not apply to the {} source",
            src.name()
        )));
    }
    if n == 0 {
        return domain("blocklength must be positive");
    }
    Ok(match (id, src) {
        (EbmsConv, _) => {
            binary::ebms_converse(n, d, 0.0)?;
            Form::Eps(Box::new(move |lm| binary::ebms_converse(n, d, lm)))
        }
        (EbmsAch, _) => {
            binary::ebms_achievability(n, d, 0.0)?;
            Form::Eps(Box::new(move |lm| binary::ebms_achievability(n, d, lm)))
        }
        (BmsTiltedConv, SourceModel::Bms { p }) => {
            let sum = binary::bms_tilted_sum(*p, n, d)?;
            Form::Eps(Box::new(move |lm| Ok(converse_tilted(&sum, lm))))
        }
        (BmsHtConv, SourceModel::Bms { p }) => {
            Form::Direct(binary::bms_converse_ht(*p, n, d, eps)?.max(0.0), vec![])
        }
        (BmsAch, SourceModel::Bms { p }) => {
            let ball = binary::bms_ball_masses(*p, n, d)?;
            Form::Eps(Box::new(move |lm| Ok(rc_exact(&ball, lm))))
        }
        (BmsCcAch, SourceModel::Bms { p }) => {
            let ball = binary::bms_cc_ball_masses(*p, n, d)?;
            Form::Eps(Box::new(move |lm| Ok(rc_exact(&ball, lm))))
        }
        (ShannonAch, SourceModel::Bms { p }) => {
            let (lm, dt) = binary::bms_shannon_log_m(*p, n, d, eps)?;
            if !lm.is_finite() {
                return Err(Error::Bracket(format!(
                    "Shannon bound cannot reach eps = {eps} at n = {n}"
                )));
            }
            Form::Direct(lm.max(0.0), vec![("test_crossover", dt)])
        }
        (EdmsConv, SourceModel::Dms { pmf }) => {
            let m = pmf.len() as u32;
            dms::edms_converse(n, d, 0.0, m)?;
            Form::Eps(Box::new(move |lm| dms::edms_converse(n, d, lm, m)))
        }
        (EdmsAch, SourceModel::Dms { pmf }) => {
            let m = pmf.len() as u32;
            dms::edms_achievability(n, d, 0.0, m)?;
            Form::Eps(Box::new(move |lm| dms::edms_achievability(n, d, lm, m)))
        }
        (DmsTiltedConv, SourceModel::Dms { .. }) => {
            let sum = convolve_iid(&src.tilted_info_dist(d)?, n)?;
            Form::Eps(Box::new(move |lm| Ok(converse_tilted(&sum, lm))))
        }
        (DmsHtConv, SourceModel::Dms { pmf }) => {
            Form::Direct(dms::dms_converse_ht(pmf, n, d, eps)?.max(0.0), vec![])
        }
        (DmsCcAch, SourceModel::Dms { pmf }) => {
            let (ball, charged) = dms::dms_cc_ball_masses(pmf, n, d)?;
            Form::Eps(Box::new(move |lm| Ok((rc_exact(&ball, lm) + charged).min(1.0))))
        }
        (BesConv, SourceModel::Bes { delta }) => {
            let (ball, _) = bes::bes_ball_masses(*delta, n, d)?;
            Form::Eps(Box::new(move |lm| Ok(converse_ball(&ball, lm))))
        }
        (BesAch, SourceModel::Bes { delta }) => {
            let (ball, dropped) = bes::bes_ball_masses(*delta, n, d)?;
            Form::Eps(Box::new(move |lm| Ok((rc_exact(&ball, lm) + dropped).min(1.0))))
        }
        (GmsTiltedConv, SourceModel::Gms { sigma2 }) => {
            let s2 = *sigma2;
            gms::gms_converse_tilted(s2, n, d, 0.0)?;
            Form::Eps(Box::new(move |lm| gms::gms_converse_tilted(s2, n, d, lm)))
        }
        (VolumeConverse, SourceModel::Gms { sigma2 }) => {
            Form::Direct(gms::gms_converse_volume(*sigma2, n, d, eps)?.max(0.0), vec![])
        }
        (CapAch, SourceModel::Gms { sigma2 }) => {
            let s2 = *sigma2;
            gms::gms_achievability_cap(s2, n, d, 0.0)?;
            Form::Eps(Box::new(move |lm| gms::gms_achievability_cap(s2, n, d, lm)))
        }
        (CoveringAch, SourceModel::Gms { sigma2 }) => {
            Form::Direct(gms::gms_achievability_covering(*sigma2, n, d, eps)?.max(0.0), vec![])
        }
        _ => unreachable!("support table and dispatch disagree for {id}"),
    })
}

/// Bound on `log M*(n, d, ε)` (or its Gaussian approximation) for one source.
pub fn rate_bound(
    src: &SourceModel,
    id: BoundId,
    n: u64,
    d: f64,
    eps: f64,
    opts: SolveOptions,
) -> Result<BoundValue> {
    src.validate()?;
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0,1), got {eps}"));
    }
    let kind = id.kind();
    if id == BoundId::Approx {
        let mode = opts.remainder.unwrap_or_else(|| default_remainder(src, d));
        let r = gaussian_approx(src, n, d, eps, mode)?;
        return Ok(BoundValue::from_rate_nats(kind, id.name(), n, r));
    }
    let (mut log_m, diag) = match source_form(src, id, n, d, eps)? {
        Form::Direct(v, diag) => (v, diag),
        Form::Eps(f) => {
            let ceiling = log_m_ceiling(src, n, d);
            let v = rate_from_eps_bound(&f, eps, kind, ceiling)?;
            let at = f(v)?;
            (v, vec![("eps_at_bound", at)])
        }
    };
    if opts.integer_m {
        log_m = round_log_m(log_m, kind);
    }
    let mut out = BoundValue::new(kind, id.name(), n, log_m);
    for (k, v) in diag {
        out = out.with(k, v);
    }
    Ok(out)
}

/// Bound on the minimum distortion `D(n, R, ε)` at rate `rate_nats`, by
/// bisection over `d` of the rate bound. Achievability bounds give an upper
/// bound on the distortion, converse bounds a lower bound.
pub fn distortion_bound(
    src: &SourceModel,
    id: BoundId,
    n: u64,
    rate_nats: f64,
    eps: f64,
    opts: SolveOptions,
) -> Result<f64> {
    let (dmin, dmax) = src.d_range();
    if let Some(m) = src.alphabet_size() {
        if rate_nats >= (m as f64).ln() && !matches!(src, SourceModel::Bes { .. }) {
            return Ok(0.0);
        }
    }
    let target = rate_nats * n as f64;
    // the rate bound decreases in d; find where it crosses the target
    let below = |d: f64| -> Result<bool> {
        match rate_bound(src, id, n, d, eps, opts) {
            Ok(b) => Ok(b.log_m_nats <= target),
            // vacuous or undefined bounds at this d count as "not yet below"
            Err(Error::Bracket(_)) | Err(Error::Domain(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let span = dmax - dmin;
    let lo = dmin + span * 1e-9;
    let hi = dmax - span * 1e-9;
    if below(lo)? {
        return Ok(dmin);
    }
    // some achievability bounds tie their codebook to d and are not monotone
    // near the top of the range, so locate the first crossing on a grid
    let grid: Vec<f64> = (0..=DISTORTION_SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / DISTORTION_SCAN as f64)
        .collect();
    let mut first = None;
    for i in 1..grid.len() {
        if below(grid[i])? {
            first = Some(i);
            break;
        }
    }
    let Some(i) = first else {
        return Err(Error::Bracket(format!(
            "{id} stays above rate {rate_nats} nats on the whole distortion range (vacuous)"
        )));
    };
    let (lo, hi) = (grid[i - 1], grid[i]);
    let (a, b) = bisect_predicate(below, lo, hi)?;
    Ok(match id.kind() {
        BoundKind::Converse => a,
        _ => b,
    })
}

/// Grid intervals scanned before bisecting a distortion crossing.
const DISTORTION_SCAN: usize = 64;

/// One point of the standard test grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub source: SourceModel,
    pub n: u64,
    pub d: f64,
    pub eps: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn bms(p: f64) -> SourceModel {
        SourceModel::bms(p).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for id in BoundId::ALL {
            assert_eq!(BoundId::parse(id.name()), Some(id));
        }
        assert_eq!(BoundId::parse("nope"), None);
    }

    #[test]
    fn constant_bound_below_target() {
        let v = rate_from_eps_bound(|_| Ok(0.001), 0.01, BoundKind::Achievability, 10.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn rising_bound_rejected() {
        let r = rate_from_eps_bound(|x| Ok(x / 100.0), 0.01, BoundKind::Achievability, 10.0);
        assert!(matches!(r, Err(Error::Monotonicity(_))));
    }

    #[test]
    fn unreachable_target_is_a_bracket_error() {
        let r = rate_from_eps_bound(|_| Ok(0.5), 0.01, BoundKind::Converse, 10.0);
        assert!(matches!(r, Err(Error::Bracket(_))));
    }

    #[test]
    fn bisection_converse_and_achievability_straddle() {
        let f = |x: f64| Ok((-x).exp());
        let c = rate_from_eps_bound(f, 0.1, BoundKind::Converse, 10.0).unwrap();
        let a = rate_from_eps_bound(f, 0.1, BoundKind::Achievability, 10.0).unwrap();
        assert!(c < a && a - c < 1e-14);
        assert!((a - 10f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn equiprobable_sandwich() {
        let src = bms(0.5);
        let o = SolveOptions::default();
        let c = rate_bound(&src, BoundId::EbmsConv, 100, 0.11, 1e-2, o).unwrap();
        let a = rate_bound(&src, BoundId::EbmsAch, 100, 0.11, 1e-2, o).unwrap();
        assert!(c.rate_bits <= a.rate_bits);
        let want = binary::ebms_converse_log_m(100, 0.11, 1e-2).unwrap();
        assert!((c.log_m_nats - want).abs() < 1e-10);
        let want = binary::ebms_achievability_log_m(100, 0.11, 1e-2).unwrap();
        assert!((a.log_m_nats - want).abs() < 1e-10);
    }

    #[test]
    fn integer_rounding_direction() {
        let src = bms(0.5);
        let o = SolveOptions { integer_m: true, ..Default::default() };
        let a = rate_bound(&src, BoundId::EbmsAch, 6, 0.2, 0.1, o).unwrap();
        let m = a.log_m_nats.exp();
        assert!((m - m.round()).abs() < 1e-9);
        let raw = rate_bound(&src, BoundId::EbmsAch, 6, 0.2, 0.1, SolveOptions::default()).unwrap();
        assert!(a.log_m_nats >= raw.log_m_nats);
    }

    #[test]
    fn unsupported_pairs() {
        let r = rate_bound(&bms(0.4), BoundId::EbmsAch, 10, 0.1, 0.1, SolveOptions::default());
        assert!(matches!(r, Err(Error::Unsupported(_))));
        assert!(BoundId::for_source(&bms(0.5)).contains(&BoundId::EbmsConv));
        assert!(!BoundId::for_source(&bms(0.4)).contains(&BoundId::EbmsConv));
    }

    #[test]
    fn approx_dispatch_is_identity() {
        let src = bms(0.4);
        let b = rate_bound(&src, BoundId::Approx, 1000, 0.11, 1e-4, SolveOptions::default()).unwrap();
        let r = binary::binary_gaussian_approx(0.4, 1000, 0.11, 1e-4, Remainder::Zero).unwrap();
        assert_eq!(b.rate_nats(), r * 1000.0 / 1000.0);
    }

    #[test]
    fn approx_between_binary_bounds() {
        let src = bms(0.4);
        let o = SolveOptions::default();
        let (n, d, eps) = (1000, 0.11, 1e-4);
        let c = rate_bound(&src, BoundId::BmsHtConv, n, d, eps, o).unwrap();
        let a = rate_bound(&src, BoundId::BmsCcAch, n, d, eps, o).unwrap();
        let g = rate_bound(&src, BoundId::Approx, n, d, eps, o).unwrap();
        assert!(c.rate_bits < g.rate_bits && g.rate_bits < a.rate_bits, "{c:?} {g:?} {a:?}");
    }

    #[test]
    fn gaussian_distortion_first_order() {
        let src = SourceModel::gms(1.0).unwrap();
        let (n, r, eps) = (1000u64, 1.0, 1e-2);
        let o = SolveOptions { remainder: Some(Remainder::Zero), ..Default::default() };
        let d = distortion_bound(&src, BoundId::Approx, n, r, eps, o).unwrap();
        let z = crate::numerics::q_inv(eps).unwrap();
        let exact = (-2.0 * r + (2.0 / n as f64).sqrt() * z).exp();
        assert!((d / exact - 1.0).abs() < 1e-9, "{d} vs {exact}");
        let first = (-2.0 * r).exp() * (1.0 + (2.0 / n as f64).sqrt() * z);
        assert!((d / first - 1.0).abs() < 1e-2);
    }

    #[test]
    fn distortion_round_trip() {
        let src = bms(0.5);
        let o = SolveOptions::default();
        let (n, d, eps) = (200, 0.11, 1e-2);
        let rb = rate_bound(&src, BoundId::EbmsConv, n, d, eps, o).unwrap();
        let back = distortion_bound(&src, BoundId::EbmsConv, n, rb.rate_nats(), eps, o).unwrap();
        // the ball radius only changes at multiples of 1/n
        assert!((back - d).abs() <= 1.0 / n as f64, "{back}");
        assert_eq!(distortion_bound(&src, BoundId::EbmsAch, n, LN_2, eps, o).unwrap(), 0.0);
    }
}

//! Parameter sets and data generation for the reference figures.

use crate::bounds::{BoundKind, Remainder};
use crate::error::{Error, Result};
use crate::solver::{rate_bound, BoundId, SolveOptions};
use crate::sources::{PlanMode, SourceModel};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig8,
    Fig9,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig8,
        FigureId::Fig9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
        }
    }

    pub fn parse(s: &str) -> Option<FigureId> {
        FigureId::ALL.iter().copied().find(|f| f.name() == s)
    }
}

/// A figure of rate bounds against blocklength.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundFigure {
    pub id: FigureId,
    pub title: &'static str,
    pub source: SourceModel,
    pub d: f64,
    pub eps: f64,
    pub bounds: Vec<BoundId>,
    pub n_grid: Vec<u64>,
    pub remainder: Remainder,
}

const BINARY_GRID: [u64; 14] = [10, 20, 30, 50, 75, 100, 150, 200, 300, 400, 500, 600, 800, 1000];
const EBMS_GRID: [u64; 16] = [8, 16, 32, 50, 64, 100, 128, 200, 256, 400, 500, 700, 1000, 1300, 1600, 2000];
const GAUSS_GRID: [u64; 13] = [10, 20, 30, 50, 75, 100, 150, 200, 300, 400, 500, 700, 1000];

/// Parameters of a rate-vs-blocklength figure; `None` for the curve figures.
pub fn bound_figure(id: FigureId) -> Option<BoundFigure> {
    use BoundId::*;
    let binary = |eps: f64, id: FigureId, title| BoundFigure {
        id,
        title,
        source: SourceModel::Bms { p: 0.4 },
        d: 0.11,
        eps,
        bounds: vec![ShannonAch, BmsCcAch, BmsAch, BmsHtConv, BmsTiltedConv, Approx],
        n_grid: BINARY_GRID.to_vec(),
        remainder: Remainder::Zero,
    };
    let gauss = |eps: f64, id: FigureId, title| BoundFigure {
        id,
        title,
        source: SourceModel::Gms { sigma2: 1.0 },
        d: 0.25,
        eps,
        bounds: vec![CapAch, CoveringAch, VolumeConverse, GmsTiltedConv, Approx],
        n_grid: GAUSS_GRID.to_vec(),
        remainder: Remainder::HalfLogN,
    };
    Some(match id {
        FigureId::Fig1 => BoundFigure {
            id,
            title: "equiprobable binary source, d = 0.11, eps = 1e-2",
            source: SourceModel::Bms { p: 0.5 },
            d: 0.11,
            eps: 1e-2,
            bounds: vec![ShannonAch, EbmsAch, EbmsConv, Approx],
            n_grid: EBMS_GRID.to_vec(),
            remainder: Remainder::HalfLogN,
        },
        FigureId::Fig2 => binary(1e-2, id, "binary source p = 2/5, d = 0.11, eps = 1e-2"),
        FigureId::Fig3 => binary(1e-4, id, "binary source p = 2/5, d = 0.11, eps = 1e-4"),
        FigureId::Fig6 => BoundFigure {
            id,
            title: "binary erased source, delta = 0.1, d = 0.1, eps = 0.1",
            source: SourceModel::Bes { delta: 0.1 },
            d: 0.1,
            eps: 0.1,
            bounds: vec![BesAch, BesConv, Approx],
            n_grid: vec![10, 20, 50, 100, 150, 200, 300, 400, 500, 700, 1000, 1500, 2000],
            remainder: Remainder::HalfLogN,
        },
        FigureId::Fig8 => gauss(1e-2, id, "Gaussian source sigma = 1, d = 1/4, eps = 1e-2"),
        FigureId::Fig9 => gauss(1e-4, id, "Gaussian source sigma = 1, d = 1/4, eps = 1e-4"),
        FigureId::Fig4 | FigureId::Fig5 => return None,
    })
}

/// One point of a rate-vs-blocklength figure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundPoint {
    pub n: u64,
    pub bound: BoundId,
    /// `None` when the bound could not be evaluated at this point.
    pub kind: Option<BoundKind>,
    pub rate_bits: Option<f64>,
    pub error: Option<String>,
}

/// Evaluates bounds over a blocklength grid, in parallel, sorted by `(n, bound name)`.
pub fn sweep(
    source: &SourceModel,
    d: f64,
    eps: f64,
    bounds: &[BoundId],
    n_grid: &[u64],
    opts: SolveOptions,
) -> Vec<BoundPoint> {
    let jobs: Vec<(u64, BoundId)> = n_grid
        .iter()
        .flat_map(|&n| bounds.iter().map(move |&b| (n, b)))
        .collect();
    let mut out: Vec<BoundPoint> = jobs
        .par_iter()
        .map(|&(n, bound)| match rate_bound(source, bound, n, d, eps, opts) {
            Ok(v) => BoundPoint {
                n,
                bound,
                kind: Some(v.kind),
                rate_bits: Some(v.rate_bits),
                error: None,
            },
            Err(e) => BoundPoint {
                n,
                bound,
                kind: None,
                rate_bits: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    out.sort_by(|a, b| (a.n, a.bound.name()).cmp(&(b.n, b.bound.name())));
    out
}

/// Data for a rate-vs-blocklength figure.
pub fn bound_figure_data(fig: &BoundFigure) -> Vec<BoundPoint> {
    let opts = SolveOptions {
        remainder: Some(fig.remainder),
        ..Default::default()
    };
    sweep(&fig.source, fig.d, fig.eps, &fig.bounds, &fig.n_grid, opts)
}

/// Excess-distortion levels drawn in the blocklength panels.
pub const PLAN_EPS: [f64; 3] = [1e-4, 1e-2, 1e-1];
/// Rate excess over the rate-distortion function in the blocklength panels.
pub const PLAN_EXCESS: f64 = 0.1;

/// One row of a distortion-indexed curve figure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub d: f64,
    pub rate_bits: f64,
    pub dispersion_bits2: f64,
    /// Required blocklength for each entry of [`PLAN_EPS`].
    pub blocklength: Vec<f64>,
}

/// Source and distortion grid of a curve figure.
pub fn curve_figure(id: FigureId) -> Option<(SourceModel, Vec<f64>)> {
    let grid = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
        (1..k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect()
    };
    match id {
        FigureId::Fig4 => Some((
            SourceModel::Dms {
                pmf: vec![1.0 / 3.0, 0.25, 0.25, 1.0 / 6.0],
            },
            grid(0.0, 2.0 / 3.0, 40),
        )),
        FigureId::Fig5 => Some((SourceModel::Bes { delta: 0.1 }, grid(0.05, 0.5, 45))),
        _ => None,
    }
}

/// Rate-distortion, dispersion and blocklength curves over a distortion grid.
pub fn curve_figure_data(src: &SourceModel, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    grid.iter()
        .map(|&d| {
            let rate = src.rate_distortion(d)?;
            let v = src.dispersion(d)?;
            let blocklength = PLAN_EPS
                .iter()
                .map(|&e| Ok(src.required_blocklength(PlanMode::Rate, d, PLAN_EXCESS, e)?.n))
                .collect::<Result<Vec<f64>>>()?;
            Ok(CurvePoint {
                d,
                rate_bits: rate / LN_2,
                dispersion_bits2: v / (LN_2 * LN_2),
                blocklength,
            })
        })
        .collect()
}

/// Rate of `bound` at blocklength `n` in a computed figure.
pub fn rate_at(points: &[BoundPoint], n: u64, bound: BoundId) -> Option<f64> {
    points
        .iter()
        .find(|p| p.n == n && p.bound == bound)
        .and_then(|p| p.rate_bits)
}

/// Tightest converse and achievability rates at `n`.
pub fn envelope_at(points: &[BoundPoint], n: u64) -> Result<(f64, f64)> {
    let mut conv = f64::NEG_INFINITY;
    let mut ach = f64::INFINITY;
    for p in points.iter().filter(|p| p.n == n) {
        match (p.kind, p.rate_bits) {
            (Some(BoundKind::Converse), Some(r)) => conv = conv.max(r),
            (Some(BoundKind::Achievability), Some(r)) => ach = ach.min(r),
            _ => {}
        }
    }
    if conv.is_finite() && ach.is_finite() {
        Ok((conv, ach))
    } else {
        Err(Error::Domain(format!("no converse/achievability pair at n = {n}")))
    }
}

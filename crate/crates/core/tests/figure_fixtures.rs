//! The reference figures keep their published parameters.

use fbl_core::bounds::Remainder;
use fbl_core::figures::{self, FigureId};
use fbl_core::solver::BoundId;
use fbl_core::sources::SourceModel;

#[test]
fn rate_figures_match_captions() {
    let expect = [
        (FigureId::Fig1, SourceModel::Bms { p: 0.5 }, 0.11, 1e-2),
        (FigureId::Fig2, SourceModel::Bms { p: 0.4 }, 0.11, 1e-2),
        (FigureId::Fig3, SourceModel::Bms { p: 0.4 }, 0.11, 1e-4),
        (FigureId::Fig6, SourceModel::Bes { delta: 0.1 }, 0.1, 0.1),
        (FigureId::Fig8, SourceModel::Gms { sigma2: 1.0 }, 0.25, 1e-2),
        (FigureId::Fig9, SourceModel::Gms { sigma2: 1.0 }, 0.25, 1e-4),
    ];
    for (id, src, d, eps) in expect {
        let fig = figures::bound_figure(id).unwrap();
        assert_eq!(fig.source, src, "{}", id.name());
        assert_eq!(fig.d, d, "{}", id.name());
        assert_eq!(fig.eps, eps, "{}", id.name());
        assert!(fig.bounds.contains(&BoundId::Approx));
        assert!(fig.n_grid.windows(2).all(|w| w[0] < w[1]));
        for b in &fig.bounds {
            assert!(b.supports(&fig.source), "{} {b}", id.name());
        }
    }
}

#[test]
fn rate_figures_carry_the_expected_curves() {
    use BoundId::*;
    let fig1 = figures::bound_figure(FigureId::Fig1).unwrap();
    assert_eq!(fig1.bounds, vec![ShannonAch, EbmsAch, EbmsConv, Approx]);
    assert_eq!(fig1.remainder, Remainder::HalfLogN);
    for id in [FigureId::Fig2, FigureId::Fig3] {
        let f = figures::bound_figure(id).unwrap();
        for b in [ShannonAch, BmsCcAch, BmsAch, BmsHtConv, BmsTiltedConv] {
            assert!(f.bounds.contains(&b));
        }
        assert_eq!(f.remainder, Remainder::Zero);
    }
    for id in [FigureId::Fig8, FigureId::Fig9] {
        let f = figures::bound_figure(id).unwrap();
        for b in [CapAch, CoveringAch, VolumeConverse, GmsTiltedConv] {
            assert!(f.bounds.contains(&b));
        }
    }
}

#[test]
fn curve_figures_match_captions() {
    let (src4, grid4) = figures::curve_figure(FigureId::Fig4).unwrap();
    assert_eq!(
        src4,
        SourceModel::Dms {
            pmf: vec![1.0 / 3.0, 0.25, 0.25, 1.0 / 6.0]
        }
    );
    assert!(grid4.iter().all(|&d| d > 0.0 && d < 2.0 / 3.0));
    let (src5, grid5) = figures::curve_figure(FigureId::Fig5).unwrap();
    assert_eq!(src5, SourceModel::Bes { delta: 0.1 });
    assert!(grid5.iter().all(|&d| d > 0.05 && d < 0.5));
    assert_eq!(figures::PLAN_EXCESS, 0.1);
    assert!(figures::bound_figure(FigureId::Fig4).is_none());
    assert!(figures::curve_figure(FigureId::Fig1).is_none());
}

#[test]
fn curve_figure_rows_are_consistent() {
    let (src, grid) = figures::curve_figure(FigureId::Fig5).unwrap();
    let rows = figures::curve_figure_data(&src, &grid).unwrap();
    assert_eq!(rows.len(), grid.len());
    for r in &rows {
        assert!(r.rate_bits > 0.0 && r.dispersion_bits2 >= 0.0);
        // smaller eps always needs a longer block
        assert!(r.blocklength.windows(2).all(|w| w[0] >= w[1]));
    }
    assert!(rows.windows(2).all(|w| w[1].rate_bits < w[0].rate_bits));
}

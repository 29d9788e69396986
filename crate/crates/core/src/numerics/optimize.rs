//! One-dimensional maximization and monotone threshold search.

use crate::error::{domain, Error, Result};

const GRID_POINTS: usize = 256;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn checked(f: &mut impl FnMut(f64) -> f64, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("objective at x = {x}")))
    }
}

/// Maximizes `f` on `[lo, hi]`: a 256-point grid locates the bracket, golden
/// section refines it to `tol`. Returns `(argmax, max)`.
pub fn maximize_1d(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(lo < hi) {
        return domain(format!("maximize_1d needs lo < hi (lo={lo}, hi={hi})"));
    }
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let mut best = (lo, checked(&mut f, lo)?);
    let mut best_i = 0;
    for i in 1..GRID_POINTS {
        let x = if i == GRID_POINTS - 1 {
            hi
        } else {
            lo + step * i as f64
        };
        let v = checked(&mut f, x)?;
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = checked(&mut f, c)?;
    let mut fd = checked(&mut f, d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = checked(&mut f, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = checked(&mut f, d)?;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Finds the boundary of a monotone predicate on `[lo, hi]` where `pred(lo)`
/// is false and `pred(hi)` is true. Bisects until the midpoint coincides with
/// an endpoint in floating point, and returns the final `(lo, hi)` pair.
pub fn bisect_predicate(
    mut pred: impl FnMut(f64) -> Result<bool>,
    mut lo: f64,
    mut hi: f64,
) -> Result<(f64, f64)> {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_maximum() {
        let (x, v) = maximize_1d(|x| -(x - 1.0) * (x - 1.0), 0.0, 3.0, 1e-10).unwrap();
        assert!((x - 1.0).abs() < 1e-8);
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn maximum_on_boundary() {
        let (x, _) = maximize_1d(|x| x, 0.0, 2.0, 1e-10).unwrap();
        assert!((x - 2.0).abs() < 1e-9);
    }

    #[test]
    fn grid_escapes_local_maximum() {
        // narrow global peak near 2.5, broad local one at 0.5
        let f = |x: f64| (-(x - 0.5).powi(2)).exp() + 2.0 * (-(x - 2.5).powi(2) * 400.0).exp();
        let (x, _) = maximize_1d(f, 0.0, 3.0, 1e-10).unwrap();
        assert!((x - 2.5).abs() < 1e-3);
    }

    #[test]
    fn non_finite_is_an_error() {
        assert!(matches!(
            maximize_1d(|_| f64::NAN, 0.0, 1.0, 1e-6),
            Err(Error::NonFinite(_))
        ));
        assert!(maximize_1d(|x| x, 1.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn bisection_finds_threshold() {
        let (lo, hi) = bisect_predicate(|x| Ok(x * x >= 2.0), 0.0, 2.0).unwrap();
        assert!(lo < hi);
        assert!((lo - 2f64.sqrt()).abs() < 1e-15);
    }
}

//! Adaptive Simpson quadrature with an explicit interval stack.

use crate::error::{domain, Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_REL_TOL: f64 = 1e-9;
const MAX_DEPTH: u32 = 48;
const MAX_EVALS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    depth: u32,
}

/// Integrates `f` over `[lo, hi]` to `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    if !(lo <= hi) {
        return domain(format!("integrate needs lo <= hi (lo={lo}, hi={hi})"));
    }
    if lo == hi {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |x: f64| -> Result<f64> {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("integrand at x = {x}")))
        }
    };

    // seed with a 16-panel partition so narrow features are not skipped
    let seeds = 16;
    let width = (hi - lo) / seeds as f64;
    let mut stack = Vec::with_capacity(64);
    let mut coarse = 0.0;
    let mut left = eval(lo)?;
    for i in 0..seeds {
        let a = lo + width * i as f64;
        let b = if i + 1 == seeds { hi } else { a + width };
        let fm = eval(0.5 * (a + b))?;
        let fb = eval(b)?;
        let whole = (b - a) / 6.0 * (left + 4.0 * fm + fb);
        coarse += whole;
        stack.push(Panel {
            a,
            b,
            fa: left,
            fm,
            fb,
            whole,
            depth: 0,
        });
        left = fb;
    }
    let tol = abs_tol.max(rel_tol * coarse.abs());
    let total_width = hi - lo;

    let mut value = 0.0;
    let mut err = 0.0;
    let mut forced = false;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = eval(lm)?;
        let frm = eval(rm)?;
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let diff = left + right - p.whole;
        let local_tol = tol * (p.b - p.a) / total_width;
        // a difference at the level of rounding in the panel sums cannot shrink further
        let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if diff.abs() <= (15.0 * local_tol).max(noise)
            || p.depth >= MAX_DEPTH
            || m <= p.a
            || m >= p.b
        {
            if diff.abs() > (15.0 * local_tol).max(noise) {
                forced = true;
            }
            value += left + right + diff / 15.0;
            err += diff.abs() / 15.0;
            continue;
        }
        if evals.get() > MAX_EVALS {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (evaluation cap)",
                achieved: err,
                wanted: tol,
            });
        }
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            depth: p.depth + 1,
        });
    }
    let wanted = abs_tol.max(rel_tol * value.abs());
    if forced && err > wanted {
        return Err(Error::NonConvergence {
            what: "adaptive quadrature (depth cap)",
            achieved: err,
            wanted,
        });
    }
    Ok(Quadrature {
        value,
        error_estimate: err,
        evaluations: evals.get(),
    })
}

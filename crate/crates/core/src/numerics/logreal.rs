//! Nonnegative reals carried as natural logarithms.

use std::cmp::Ordering;
use std::ops::{Div, Mul};

/// `ln(e^a + e^b)` without overflow. Either argument may be `-inf`.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`. Returns `None` when `b > a`.
pub fn log_sub(a: f64, b: f64) -> Option<f64> {
    if b > a {
        return None;
    }
    if b == f64::NEG_INFINITY {
        return Some(a);
    }
    Some(a + log1m_exp(b - a))
}

/// `ln(1 - e^x)` for `x <= 0`, accurate across the whole range.
pub fn log1m_exp(x: f64) -> f64 {
    if x > 0.0 {
        f64::NAN
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln(-ln(1 - e^x))` for `x < 0`, without underflow when `e^x` is tiny.
pub fn ln_neg_log1m_exp(x: f64) -> f64 {
    if x < -20.0 {
        // -ln(1-w) = w (1 + w/2 + w^2/3 + ...)
        let w = x.exp();
        x + (w * (0.5 + w / 3.0)).ln_1p()
    } else {
        (-log1m_exp(x)).ln()
    }
}

/// Log-sum-exp over an iterator of logarithms.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let v: Vec<f64> = terms.into_iter().collect();
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY || hi == f64::INFINITY {
        return hi;
    }
    hi + v.iter().map(|&t| (t - hi).exp()).sum::<f64>().ln()
}

/// A nonnegative real stored as its natural log; `-inf` is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogReal {
    ln: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: LogReal = LogReal { ln: 0.0 };

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogReal { ln }
    }

    /// Panics in debug builds on negative input.
    pub fn from_value(v: f64) -> Self {
        debug_assert!(v >= 0.0);
        LogReal { ln: v.ln() }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    /// Materializes the value; overflows to `inf` for huge logs.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    pub fn add(self, other: LogReal) -> LogReal {
        LogReal::from_ln(log_add(self.ln, other.ln))
    }

    /// `self - other`, or `None` if the difference would be negative.
    pub fn checked_sub(self, other: LogReal) -> Option<LogReal> {
        log_sub(self.ln, other.ln).map(LogReal::from_ln)
    }

    /// `max(0, self - other)`.
    pub fn saturating_sub(self, other: LogReal) -> LogReal {
        self.checked_sub(other).unwrap_or(LogReal::ZERO)
    }

    pub fn powf(self, e: f64) -> LogReal {
        if self.is_zero() && e == 0.0 {
            return LogReal::ONE;
        }
        LogReal::from_ln(self.ln * e)
    }

    pub fn sum<I: IntoIterator<Item = LogReal>>(it: I) -> LogReal {
        LogReal::from_ln(log_sum_exp(it.into_iter().map(|x| x.ln)))
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.is_zero() || rhs.is_zero() {
            return LogReal::ZERO;
        }
        LogReal::from_ln(self.ln + rhs.ln)
    }
}

impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        if self.is_zero() {
            return LogReal::ZERO;
        }
        LogReal::from_ln(self.ln - rhs.ln)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln.partial_cmp(&other.ln)
    }
}

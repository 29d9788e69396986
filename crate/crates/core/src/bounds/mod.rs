//! Converse and achievability bounds on the minimum code size.
//!
//! Every bound is expressed either in excess-distortion form (`log M -> ε`,
//! monotone nonincreasing in `log M`) or directly as a bound on `log M`.

pub mod bes;
pub mod binary;
pub mod dms;
pub mod engine;
pub mod gms;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::LN_2;

/// Whether a bound limits the best code from below, above, or only approximates it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Converse,
    Achievability,
    Approximation,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Converse => "converse",
            BoundKind::Achievability => "achievability",
            BoundKind::Approximation => "approximation",
        }
    }
}

/// A bound on `log M*` at one operating point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub name: String,
    pub n: u64,
    pub log_m_nats: f64,
    pub rate_bits: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl BoundValue {
    pub fn new(kind: BoundKind, name: impl Into<String>, n: u64, log_m_nats: f64) -> Self {
        BoundValue {
            kind,
            name: name.into(),
            n,
            log_m_nats,
            rate_bits: log_m_nats / (n as f64 * LN_2),
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn from_rate_nats(kind: BoundKind, name: impl Into<String>, n: u64, rate: f64) -> Self {
        BoundValue::new(kind, name, n, rate * n as f64)
    }

    pub fn rate_nats(&self) -> f64 {
        self.log_m_nats / self.n as f64
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}

/// Second-order remainder used by Gaussian approximations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Remainder {
    /// No remainder.
    Zero,
    /// `+ ln(n) / (2n)`.
    HalfLogN,
    /// `- ln(n) / (2n)`, the almost-lossless behaviour.
    NegHalfLogN,
    /// The source-specific upper envelope, including the `ln ln n / n` term.
    UpperEnvelope,
}

impl Remainder {
    pub fn parse(s: &str) -> Option<Remainder> {
        match s {
            "zero" => Some(Remainder::Zero),
            "half_log_n" | "half-log-n" => Some(Remainder::HalfLogN),
            "neg_half_log_n" | "neg-half-log-n" | "lossless" => Some(Remainder::NegHalfLogN),
            "upper_envelope" | "upper-envelope" | "envelope" => Some(Remainder::UpperEnvelope),
            _ => None,
        }
    }

    /// Remainder in nats per symbol, given the `ln n` coefficient of the envelope.
    pub fn nats(self, n: u64, envelope_coeff: f64) -> f64 {
        let nf = n as f64;
        let ln_n = nf.ln();
        match self {
            Remainder::Zero => 0.0,
            Remainder::HalfLogN => 0.5 * ln_n / nf,
            Remainder::NegHalfLogN => -0.5 * ln_n / nf,
            Remainder::UpperEnvelope => {
                let lnln = if ln_n > 1.0 { ln_n.ln() } else { 0.0 };
                (envelope_coeff * ln_n + lnln) / nf
            }
        }
    }
}

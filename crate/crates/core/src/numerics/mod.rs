//! Numerical building blocks shared by every bound.

pub mod combinatorics;
pub mod logreal;
pub mod optimize;
pub mod quadrature;
pub mod special;

pub use combinatorics::{
    binary_entropy, binom_cdf, binom_ln_pmf, binom_ln_pmf_table, ceil_nudged, composition_count, floor_nudged, ln_choose, ln_choose_or_zero,
    log_binomial, log_hamming_ball, log_partial_binom_sum, HammingBallTable,
};
pub use logreal::{ln_neg_log1m_exp, log1m_exp, log_add, log_sub, log_sum_exp, LogReal};
pub use optimize::{bisect_predicate, maximize_1d};
pub use quadrature::{integrate, Quadrature};
pub use special::{
    berry_esseen_window, chi2_cdf, chi2_isf, chi2_ln_pdf, chi2_pdf, chi2_quantile, chi2_sf,
    ln_gamma, q_func, q_inv,
};

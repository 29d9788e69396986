//! Finite-blocklength lossy source coding bounds.
//!
//! Converse and achievability bounds on the minimum code size of fixed-length
//! lossy compressors, for binary, discrete memoryless, binary erased and
//! Gaussian sources, with Gaussian approximations and brute-force / Monte
//! Carlo oracles. All internal logarithms are natural.

pub mod bounds;
pub mod error;
pub mod figures;
pub mod numerics;
pub mod oracle;
pub mod solver;
pub mod sources;

pub use error::{Error, Result};
pub use sources::{SourceModel, TiltedInfoDist};

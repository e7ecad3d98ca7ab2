//! Design and evaluation toolkit for LDPC-coded cooperative jamming over
//! Gaussian wiretap channels: channel analysis, degree-distribution
//! optimization, finite-length code construction, Monte-Carlo simulation and
//! secrecy-rate accounting.

pub mod analysis;
pub mod degdist;
pub mod construct;
pub mod densevo;
pub mod error;
pub mod jointopt;
pub mod reference;
pub mod secrecy;
pub mod simulate;

pub use error::{Error, Result};

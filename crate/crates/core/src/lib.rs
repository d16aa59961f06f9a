//! Super-resolved separation estimation with entangled photon pairs.
//!
//! A transverse separation is applied to one photon of a spontaneous
//! parametric down-conversion pair. Both photons are then projected onto
//! Hermite-Gauss modes and the coincidence counts are used to estimate the
//! separation. This crate provides:
//!
//! * [`specfun`]: Hermite and Laguerre polynomials, normalized Hermite-Gauss
//!   amplitudes and Gaussian quadrature rules used as numerical oracles.
//! * [`source`]: the Schmidt decomposition of the two-photon state.
//! * [`overlap`]: overlaps between Hermite-Gauss modes and displaced copies.
//! * [`model`]: coincidence probabilities, calibration, and the direct
//!   imaging pixel model used as a classical baseline.
//! * [`inference`]: Fisher information, Cramér-Rao bounds, multinomial
//!   sampling, maximum-likelihood estimation and Monte-Carlo studies.
//! * [`cli`]: configuration, file formats and the subcommands behind the
//!   `spade` binary.
//!
//! All coordinates are adimensional: a Hermite-Gauss envelope is `e^(-x²/2)`.
//! Each incoherent component of the signal photon is shifted by `±d`; the
//! total separation is `delta = 2d`. Fisher information is always quoted
//! with respect to `delta`.

pub mod cli;
pub mod error;
pub mod inference;
pub mod model;
pub mod overlap;
pub mod source;
pub mod specfun;

pub use error::{Error, Result};

/// Crate version, embedded in every emitted table header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

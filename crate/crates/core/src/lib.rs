//! Fractional Poisson process and fractional Cramér–Lundberg risk analytics.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] evaluates the Mittag-Leffler family, the one-sided stable
//!   density, the inverse-subordinator density and Caputo derivatives.
//! * [`sampling`] draws stable variates, Mittag-Leffler waiting times and
//!   paths of the stable subordinator and its inverse.
//! * [`processes`] covers the fractional Poisson process (FPP), its pmf and
//!   moments, the generalized Erlang law and the non-homogeneous variant.
//! * [`risk`] simulates the fractional surplus process and estimates ruin
//!   probabilities and bailout capital.
//! * [`risk_measures`] holds VaR, AVaR, EVaR and premium comparisons.
//! * [`empirics`] fits survival curves to inter-arrival data.
//! * [`acceptance`] bundles the end-to-end verification suite.
//!
//! Monte Carlo estimators take an [`McConfig`]; results depend only on the
//! seed and the number of paths, never on the worker count.

pub mod acceptance;
pub mod empirics;
mod error;
pub mod mc;
pub mod processes;
pub mod quad;
pub mod risk;
pub mod risk_measures;
pub mod sampling;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use mc::McConfig;
pub use sampling::RngStream;
pub use specfun::Tolerance;

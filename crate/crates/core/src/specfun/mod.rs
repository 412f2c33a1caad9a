//! Special functions: the Mittag-Leffler family, the one-sided stable
//! density and its inverse-subordinator counterpart, Caputo derivatives and
//! the closed-form moments of the inverse stable subordinator.

mod caputo;
mod mittag_leffler;
mod moments;
mod stable;

pub use caputo::caputo_derivative;
pub use mittag_leffler::{
    generalized_ml, ln_mittag_leffler, mittag_leffler, mittag_leffler_two, ml_crossover,
    ml_derivative, ml_integral, ml_series,
};
pub use moments::{d_alpha, inv_sub_cov, inv_sub_moment, renewal_function};
pub use stable::{
    inverse_subordinator_density, stable_density, stable_density_integral, stable_density_series,
};

use serde::Serialize;

use crate::error::{domain, Result};

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Truncation control for series and quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_terms: 20_000,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_terms < 1 {
            return domain(format!(
                "tolerance needs abs_tol > 0, rel_tol > 0, max_terms >= 1; got ({abs_tol}, {rel_tol}, {max_terms})"
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_terms,
        })
    }

    pub(crate) fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    pub(crate) fn quad(&self) -> crate::quad::QuadOptions {
        crate::quad::QuadOptions::with_tol(0.1 * self.abs_tol, self.rel_tol.min(1e-10))
    }
}

/// Parameters `(α, β, γ)` of the three-parameter Mittag-Leffler function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MLParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_shape: f64,
}

impl MLParams {
    pub fn new(alpha: f64, beta: f64, gamma_shape: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(beta > 0.0) || !(gamma_shape > 0.0) || !beta.is_finite() || !gamma_shape.is_finite() {
            return domain(format!(
                "need beta > 0 and gamma > 0, got beta = {beta}, gamma = {gamma_shape}"
            ));
        }
        Ok(Self {
            alpha,
            beta,
            gamma_shape,
        })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 1], got {alpha}"))
    }
}

pub(crate) fn check_alpha_open(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}

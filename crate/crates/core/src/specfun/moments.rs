use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::{gamma, ln_gamma};

use super::check_alpha;
use crate::error::{domain, Result};

/// `E[Y_α(t)^ν] = Γ(ν+1)/Γ(αν+1) · t^{αν}`.
pub fn inv_sub_moment(alpha: f64, nu: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(nu > 0.0) || !(t >= 0.0) {
        return domain(format!(
            "moment needs nu > 0 and t >= 0, got nu = {nu}, t = {t}"
        ));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok((ln_gamma(nu + 1.0) - ln_gamma(alpha * nu + 1.0) + alpha * nu * t.ln()).exp())
}

/// Renewal function `U(t) = E Y_α(t) = t^α/Γ(1+α)`.
pub fn renewal_function(alpha: f64, t: f64) -> Result<f64> {
    inv_sub_moment(alpha, 1.0, t)
}

/// `d(α) = 2/Γ(1+2α) - 1/Γ(1+α)²`, so that `Var Y_α(t) = d(α) t^{2α}`.
pub fn d_alpha(alpha: f64) -> f64 {
    2.0 / gamma(1.0 + 2.0 * alpha) - 1.0 / gamma(1.0 + alpha).powi(2)
}

/// `Cov(Y_α(s), Y_α(t))` for `s ≤ t` (arguments are symmetrised):
/// `[t^{2α} B(s/t; α, 1+α) + s^{2α} B(α, 1+α)] / (Γ(1+α)Γ(α)) - (st)^α/Γ(1+α)²`
/// with the unnormalised incomplete Beta function.
pub fn inv_sub_cov(alpha: f64, s: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(s >= 0.0) || !(t >= 0.0) {
        return domain(format!(
            "covariance needs nonnegative times, got s = {s}, t = {t}"
        ));
    }
    if alpha == 1.0 {
        return Ok(0.0);
    }
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if s == 0.0 {
        return Ok(0.0);
    }
    let a = alpha;
    let b_full = beta(a, 1.0 + a);
    let b_inc = beta_reg(a, 1.0 + a, s / t) * b_full;
    let g1 = gamma(1.0 + a);
    Ok(
        (t.powf(2.0 * a) * b_inc + s.powf(2.0 * a) * b_full) / (g1 * gamma(a))
            - (s * t).powf(a) / (g1 * g1),
    )
}

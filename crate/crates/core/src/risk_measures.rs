//! Value-at-Risk, Average Value-at-Risk and Entropic Value-at-Risk, the
//! compound FPP moment generating function, and the premium comparison
//! between classical and fractional compound claims.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::risk::ClaimLaw;
use crate::specfun::{check_alpha, ln_gamma, ln_mittag_leffler, mittag_leffler, Tolerance};

/// Finite sample of a loss variable, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSample {
    sorted: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return domain("empirical sample must not be empty");
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return domain(format!(
                "empirical sample contains a non-finite value {bad}"
            ));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn mean(&self) -> f64 {
        crate::stats::mean(&self.sorted)
    }
}

fn check_level(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        domain(format!("risk level must lie in (0, 1), got {beta}"))
    }
}

/// `VaR_β = inf{z : F(z) ≥ β}`.
pub fn var_quantile(s: &EmpiricalSample, beta: f64) -> Result<f64> {
    check_level(beta)?;
    let n = s.len();
    let mut i = (beta * n as f64).ceil() as usize;
    if i > 1 && (i - 1) as f64 / n as f64 >= beta {
        i -= 1;
    }
    Ok(s.sorted[i.clamp(1, n) - 1])
}

/// `AVaR_β = (1/(1−β)) ∫_β^1 F^{-1}(p) dp` on the empirical quantile
/// function, which weights a partial atom at `VaR_β` correctly.
pub fn avar(s: &EmpiricalSample, beta: f64) -> Result<f64> {
    check_level(beta)?;
    let n = s.len() as f64;
    let mut acc = 0.0;
    let mut comp = 0.0;
    for (i, &z) in s.sorted.iter().enumerate() {
        let hi = (i + 1) as f64 / n;
        if hi <= beta {
            continue;
        }
        let w = hi - (i as f64 / n).max(beta);
        // Kahan summation keeps the tail integral independent of sample order effects.
        let y = w * z - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    Ok(acc / (1.0 - beta))
}

type LnMgf = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Moment generating function of a loss `Z`, given as `h ↦ ln E e^{hZ}` on
/// `(0, h_max)`.
#[derive(Clone)]
pub struct MgfSpec {
    ln_mgf: LnMgf,
    pub h_max: f64,
    /// `E Z`, the value of EVaR at level 0.
    pub mean: f64,
    /// Essential supremum when finite; the limit of the EVaR objective as `h → ∞`.
    pub ess_sup: Option<f64>,
}

impl fmt::Debug for MgfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MgfSpec")
            .field("h_max", &self.h_max)
            .field("mean", &self.mean)
            .field("ess_sup", &self.ess_sup)
            .finish()
    }
}

impl MgfSpec {
    pub fn new<F>(ln_mgf: F, h_max: f64, mean: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        if !(h_max > 0.0) {
            return domain(format!(
                "MGF must be finite on some (0, h_max); got h_max = {h_max}"
            ));
        }
        Ok(Self {
            ln_mgf: Arc::new(ln_mgf),
            h_max,
            mean,
            ess_sup: None,
        })
    }

    pub fn with_ess_sup(mut self, sup: f64) -> Self {
        self.ess_sup = Some(sup);
        self
    }

    pub fn ln_mgf(&self, h: f64) -> Result<f64> {
        if h == 0.0 {
            return Ok(0.0);
        }
        if !(h > 0.0 && h < self.h_max) {
            return domain(format!("h = {h} outside (0, {})", self.h_max));
        }
        (self.ln_mgf)(h)
    }

    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        Self::new(
            move |h| Ok(mean * h + 0.5 * sd * sd * h * h),
            f64::INFINITY,
            mean,
        )
    }

    pub fn degenerate(c: f64) -> Result<Self> {
        Ok(Self::new(move |h| Ok(c * h), f64::INFINITY, c)?.with_ess_sup(c))
    }

    /// A single claim `X`.
    pub fn claim(law: &ClaimLaw) -> Result<Self> {
        let l = law.clone();
        let mut spec = Self::new(move |h| l.ln_mgf(h), law.h_max(), law.mean())?;
        spec.ess_sup = match law {
            ClaimLaw::Point { value } => Some(*value),
            ClaimLaw::Empirical { values } => values.iter().copied().reduce(f64::max),
            _ => None,
        };
        Ok(spec)
    }

    /// Classical compound Poisson sum over `[0, t]` with rate `lambda`.
    pub fn compound_poisson(lambda: f64, t: f64, law: &ClaimLaw) -> Result<Self> {
        let l = law.clone();
        let m = lambda * t;
        Self::new(
            move |h| Ok(m * (l.mgf(h)? - 1.0)),
            law.h_max(),
            m * law.mean(),
        )
    }

    /// Compound FPP sum `Σ_{i ≤ N_α(t)} X_i`.
    pub fn compound_fpp(alpha: f64, lambda: f64, t: f64, law: &ClaimLaw) -> Result<Self> {
        check_alpha(alpha)?;
        let l = law.clone();
        let scale = lambda * t.powf(alpha);
        let tol = Tolerance::default();
        let mean = scale / crate::specfun::gamma(1.0 + alpha) * law.mean();
        Self::new(
            move |h| {
                let z = scale * (l.mgf(h)? - 1.0);
                if z.is_finite() {
                    ln_mittag_leffler(alpha, z, &tol)
                } else {
                    Ok(f64::INFINITY)
                }
            },
            law.h_max(),
            mean,
        )
    }
}

/// `E e^{hS} = E_α(λt^α(φ_X(h) − 1))` for the compound FPP sum.
pub fn compound_fpp_mgf(alpha: f64, lambda: f64, t: f64, claims: &ClaimLaw, h: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let phi = claims.mgf(h)?;
    mittag_leffler(
        alpha,
        lambda * t.powf(alpha) * (phi - 1.0),
        &Tolerance::default(),
    )
}

/// `EVaR_κ(Z) = inf_{0<h<h_max} (1/h)(ln(1/(1−κ)) + ln E e^{hZ})`.
///
/// The objective is unimodal in `h`. A logarithmic scan brackets the
/// minimum, then golden-section search narrows it to `1e-10` relative.
pub fn evar(mgf: &MgfSpec, kappa: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&kappa) {
        return domain(format!("EVaR level must lie in [0, 1), got {kappa}"));
    }
    if kappa == 0.0 {
        return Ok(mgf.mean);
    }
    let a = -(1.0 - kappa).ln();
    let f = |h: f64| -> Result<f64> {
        let v = (a + mgf.ln_mgf(h)?) / h;
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    };

    let lo = 1e-8;
    let hi = (0.999 * mgf.h_max).min(1e8);
    if hi <= lo {
        return domain(format!(
            "h_max = {} leaves no room for the EVaR search",
            mgf.h_max
        ));
    }
    let n = 241;
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|j| lo * (ratio * j as f64).exp()).collect();
    let mut best = (0, f64::INFINITY);
    for (j, &h) in grid.iter().enumerate() {
        let v = f(h)?;
        if v < best.1 {
            best = (j, v);
        }
    }
    let j = best.0;
    if j == n - 1 {
        if mgf.h_max.is_finite() {
            return Ok(best.1);
        }
        if let Some(sup) = mgf.ess_sup {
            return Ok(sup);
        }
        return Err(Error::Accuracy(format!(
            "EVaR objective still decreasing at h = {hi:e} (value {}); the loss may be bounded with unknown supremum",
            best.1
        )));
    }
    if j == 0 {
        return Err(Error::Accuracy(format!(
            "EVaR objective minimal at the lower bracket h = {lo:e} (value {}); check the MGF near 0",
            best.1
        )));
    }
    let (mut x0, mut x3) = (grid[j - 1], grid[j + 1]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = x3 - g * (x3 - x0);
    let mut x2 = x0 + g * (x3 - x0);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..200 {
        if (x3 - x0) <= 1e-10 * x1.abs() {
            break;
        }
        if f1 < f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - g * (x3 - x0);
            f1 = f(x1)?;
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + g * (x3 - x0);
            f2 = f(x2)?;
        }
    }
    Ok(f1.min(f2).min(best.1))
}

/// EVaR premiums for classical compound Poisson claims over `[0, t2]` at
/// rate `lambda2` and for compound FPP claims over `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PremiumPair {
    pub classical: f64,
    pub fractional: f64,
}

/// Premium comparison under the calibration `λ′t′ ≤ λt^α/Γ(1+α)`; the
/// classical premium never exceeds the fractional one.
pub fn premium_comparison(
    alpha: f64,
    lambda: f64,
    t: f64,
    lambda2: f64,
    t2: f64,
    claims: &ClaimLaw,
    kappa: f64,
) -> Result<PremiumPair> {
    check_alpha(alpha)?;
    claims.validate()?;
    if !(claims.h_max() > 0.0) {
        return domain(format!(
            "claim law {claims} has no finite MGF for h > 0, so EVaR is infinite"
        ));
    }
    for (name, x) in [
        ("lambda", lambda),
        ("t", t),
        ("lambda2", lambda2),
        ("t2", t2),
    ] {
        if !(x > 0.0) || !x.is_finite() {
            return domain(format!("{name} must be positive and finite, got {x}"));
        }
    }
    let fractional_mean = lambda * t.powf(alpha) / crate::specfun::gamma(1.0 + alpha);
    if lambda2 * t2 > fractional_mean * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "calibration requires lambda2*t2 <= lambda*t^alpha/Gamma(1+alpha) = {fractional_mean}, got {}",
            lambda2 * t2
        )));
    }
    let classical = evar(&MgfSpec::compound_poisson(lambda2, t2, claims)?, kappa)?;
    let fractional = evar(&MgfSpec::compound_fpp(alpha, lambda, t, claims)?, kappa)?;
    Ok(PremiumPair {
        classical,
        fractional,
    })
}

/// `Γ(1+αk) / (Γ(1+α)^k k!)`, at most 1 for `α ∈ (0, 1]`.
pub fn gamma_ratio_bound(alpha: f64, k: u32) -> Result<f64> {
    check_alpha(alpha)?;
    let k = k as f64;
    Ok((ln_gamma(1.0 + alpha * k) - k * ln_gamma(1.0 + alpha) - ln_gamma(k + 1.0)).exp())
}

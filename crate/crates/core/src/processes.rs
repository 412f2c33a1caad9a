//! The fractional Poisson process `N_α(t) = N(Y_α(t))`.
//!
//! Two simulators are provided: the renewal construction with
//! Mittag-Leffler waiting times and the time change of a Poisson process by
//! a grid path of `Y_α`. The one-dimensional law, moments and covariance
//! are available in closed form. The non-homogeneous variant (FNPP) runs a
//! unit Poisson process on `Λ(Y_α(t))`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::mc::{map_paths, McConfig};
use crate::quad::{integrate, integrate_pieces, integrate_to_infinity};
use crate::sampling::{
    check_grid, clock_increment, ml_waiting_unchecked, simulate_inverse_grid, InverseSampler,
};
use crate::specfun::{
    caputo_derivative, check_alpha, d_alpha, generalized_ml, inv_sub_cov,
    inverse_subordinator_density, mittag_leffler, stable_density, MLParams, Tolerance,
};
use crate::stats::{linear_fit, Summary};

/// Arrival epochs of one realization, observed on `[0, t_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventTimes {
    pub times: Vec<f64>,
    pub t_max: f64,
}

impl EventTimes {
    /// `#{T_j ≤ t}`.
    pub fn count(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x <= t)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub(crate) fn check_rate(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        domain(format!(
            "rate lambda must be positive and finite, got {lambda}"
        ))
    }
}

pub(crate) fn check_time(name: &str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be finite and nonnegative, got {t}"))
    }
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or enormous means.
    Poisson::new(mean)
        .map(|d| d.sample(rng) as u64)
        .unwrap_or(u64::MAX)
}

/// Renewal construction: partial sums of Mittag-Leffler waiting times up to `t_max`.
pub fn simulate_fpp_renewal<R: Rng + ?Sized>(
    alpha: f64,
    lambda: f64,
    t_max: f64,
    rng: &mut R,
) -> Result<EventTimes> {
    check_alpha(alpha)?;
    check_rate(lambda)?;
    check_time("t_max", t_max)?;
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += ml_waiting_unchecked(alpha, lambda, rng);
        if t > t_max {
            break;
        }
        times.push(t);
    }
    Ok(EventTimes { times, t_max })
}

/// Time-change construction `N(Y_α(t))` on a grid, with `Y_α` read off one
/// grid path of the subordinator (see [`simulate_inverse_grid`]).
pub fn simulate_fpp_timechange<R: Rng + ?Sized>(
    alpha: f64,
    lambda: f64,
    t_grid: &[f64],
    step: Option<f64>,
    rng: &mut R,
) -> Result<Vec<u64>> {
    check_rate(lambda)?;
    let y = simulate_inverse_grid(alpha, t_grid, step, rng)?;
    Ok(poisson_on_clock(lambda, &y, rng))
}

/// Counts at `t_grid` with `Y_α` sampled exactly.
pub fn simulate_fpp_counts<R: Rng + ?Sized>(
    sampler: &InverseSampler,
    lambda: f64,
    t_grid: &[f64],
    rng: &mut R,
) -> Result<Vec<u64>> {
    check_rate(lambda)?;
    let y = sampler.sample_at(t_grid, rng)?;
    Ok(poisson_on_clock(lambda, &y, rng))
}

fn poisson_on_clock<R: Rng + ?Sized>(lambda: f64, clock: &[f64], rng: &mut R) -> Vec<u64> {
    let mut prev = 0.0;
    let mut n = 0u64;
    clock
        .iter()
        .map(|&y| {
            n += poisson_draw(lambda * (y - prev), rng);
            prev = y;
            n
        })
        .collect()
}

/// `p_k = P(N_α(t) = k)` for `k = 0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfTable {
    pub alpha: f64,
    pub lambda: f64,
    pub t: f64,
    pub probs: Vec<f64>,
}

impl PmfTable {
    /// `1 - Σ p_k`.
    pub fn mass_deficit(&self) -> f64 {
        1.0 - crate::stats::neumaier_sum(self.probs.iter().copied())
    }
}

const PMF_DEFICIT: f64 = 1e-10;
const PMF_CAP: usize = 10_000;

fn ln_poisson(k: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k as f64 * mean.ln() - mean - ln_gamma(k as f64 + 1.0)
}

/// `P(N_α(t) = k) = ∫ e^{-λw}(λw)^k/k! f_α(t,w) dw`, the quadrature form.
pub fn fpp_pmf_quadrature(
    alpha: f64,
    lambda: f64,
    t: f64,
    k: usize,
    tol: &Tolerance,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_rate(lambda)?;
    check_time("t", t)?;
    if alpha == 1.0 || t == 0.0 {
        return Ok(ln_poisson(k, lambda * t.powf(alpha)).exp());
    }
    let width = (k as f64 + 1.0).sqrt() / lambda;
    let centre = k as f64 / lambda;
    let kernel = |w: f64| ln_poisson(k, lambda * w).exp();
    let v = mix_over_clock(
        alpha,
        t,
        kernel,
        &[centre - 8.0 * width, centre, centre + 8.0 * width],
        tol,
    )?;
    if !v.is_finite() {
        return Err(Error::Accuracy(format!("pmf quadrature failed at k = {k}")));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// `∫ kernel(w) f_α(t, w) dw` with extra breakpoints where the kernel is concentrated.
fn mix_over_clock(
    alpha: f64,
    t: f64,
    kernel: impl Fn(f64) -> f64,
    marks: &[f64],
    tol: &Tolerance,
) -> Result<f64> {
    let f = |w: f64| {
        let k = kernel(w);
        if k == 0.0 {
            return 0.0;
        }
        k * inverse_subordinator_density(alpha, t, w, tol).unwrap_or(f64::NAN)
    };
    let scale = t.powf(alpha);
    let mut pts = vec![0.0, scale, 4.0 * scale];
    pts.extend(marks.iter().copied().filter(|m| *m > 0.0 && m.is_finite()));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let last = *pts.last().expect("nonempty");
    let head = integrate_pieces(f, &pts, tol.quad())?;
    let tail = integrate_to_infinity(f, last, tol.quad())?;
    Ok(head.value + tail.value)
}

/// `p_k = (λt^α)^k E^{k+1}_{α,αk+1}(-λt^α)`; falls back to quadrature when the
/// series loses accuracy.
fn pmf_term(alpha: f64, lambda: f64, t: f64, k: usize, tol: &Tolerance) -> Result<f64> {
    let z = lambda * t.powf(alpha);
    if alpha == 1.0 || z == 0.0 {
        return Ok(ln_poisson(k, z).exp());
    }
    let p = MLParams::new(alpha, alpha * k as f64 + 1.0, k as f64 + 1.0)?;
    // The series value is multiplied by z^k, so its absolute error must shrink accordingly.
    let inner = Tolerance::new(
        (tol.abs_tol * (-(k as f64) * z.ln()).exp()).max(f64::MIN_POSITIVE),
        tol.rel_tol,
        tol.max_terms,
    )?;
    match generalized_ml(&p, -z, &inner) {
        Ok(e) if e > 0.0 => Ok((k as f64 * z.ln() + e.ln()).exp().min(1.0)),
        Ok(_) => Ok(0.0),
        Err(e) if e.is_accuracy() => fpp_pmf_quadrature(alpha, lambda, t, k, tol),
        Err(e) => Err(e),
    }
}

/// The law of `N_α(t)` from the generalized Mittag-Leffler closed form.
///
/// With `k_max = None` the table stops at the smallest `K` whose mass
/// deficit is below `1e-10`, or at `10^4`.
pub fn fpp_pmf(
    alpha: f64,
    lambda: f64,
    t: f64,
    k_max: Option<usize>,
    tol: &Tolerance,
) -> Result<PmfTable> {
    check_alpha(alpha)?;
    check_rate(lambda)?;
    check_time("t", t)?;
    let mut probs = Vec::new();
    let mut mass = 0.0;
    let limit = k_max.unwrap_or(PMF_CAP);
    for k in 0..=limit {
        let p = pmf_term(alpha, lambda, t, k, tol)?;
        probs.push(p);
        mass += p;
        if k_max.is_none() && 1.0 - mass < PMF_DEFICIT {
            break;
        }
    }
    Ok(PmfTable {
        alpha,
        lambda,
        t,
        probs,
    })
}

/// `E N_α(t) = λt^α/Γ(1+α)`.
pub fn fpp_mean(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_time("t", t)?;
    Ok(lambda * crate::specfun::renewal_function(alpha, t)?)
}

/// `Var N_α(t) = λt^α/Γ(1+α) + λ² d(α) t^{2α}`.
pub fn fpp_var(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    Ok(fpp_mean(alpha, lambda, t)? + lambda * lambda * d_alpha(alpha) * t.powf(2.0 * alpha))
}

/// `Cov(N_α(s), N_α(t)) = λ min(s,t)^α/Γ(1+α) + λ² Cov(Y_α(s), Y_α(t))`.
pub fn fpp_cov(alpha: f64, lambda: f64, s: f64, t: f64) -> Result<f64> {
    check_time("s", s)?;
    Ok(fpp_mean(alpha, lambda, s.min(t))? + lambda * lambda * inv_sub_cov(alpha, s, t)?)
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 {
        domain("Erlang order k must be at least 1")
    } else {
        Ok(())
    }
}

/// Density of `T_1 + … + T_k`, `h^{(k)}(x) = λ^k x^{αk-1} E^k_{α,αk}(-λx^α)`.
pub fn erlang_density(alpha: f64, lambda: f64, k: usize, x: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha(alpha)?;
    check_rate(lambda)?;
    check_order(k)?;
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("Erlang density needs finite x > 0, got {x}"));
    }
    let kf = k as f64;
    if alpha == 1.0 {
        return Ok((kf * lambda.ln() + (kf - 1.0) * x.ln() - lambda * x - ln_gamma(kf)).exp());
    }
    let p = MLParams::new(alpha, alpha * kf, kf)?;
    let pre = lambda.powf(kf) * x.powf(alpha * kf - 1.0);
    let inner = Tolerance::new(
        (tol.abs_tol / pre).max(f64::MIN_POSITIVE),
        tol.rel_tol,
        tol.max_terms,
    )?;
    match generalized_ml(&p, -lambda * x.powf(alpha), &inner) {
        Ok(e) => Ok((pre * e).max(0.0)),
        Err(e) if e.is_accuracy() => erlang_density_mixture(alpha, lambda, k, x, tol),
        Err(e) => Err(e),
    }
}

/// `T_1 + … + T_k = σ^{1/α} S` with `σ ~ Gamma(k, λ)`; mixes the stable density over `σ`.
fn erlang_density_mixture(
    alpha: f64,
    lambda: f64,
    k: usize,
    x: f64,
    tol: &Tolerance,
) -> Result<f64> {
    let kf = k as f64;
    let f = |sigma: f64| {
        if sigma == 0.0 {
            return 0.0;
        }
        let ln_gamma_pdf =
            kf * lambda.ln() + (kf - 1.0) * sigma.ln() - lambda * sigma - ln_gamma(kf);
        let scale = sigma.powf(1.0 / alpha);
        ln_gamma_pdf.exp() * stable_density(alpha, x / scale, tol).unwrap_or(f64::NAN) / scale
    };
    let mode = ((kf - 1.0) / lambda).max(1.0 / lambda);
    let pts = [0.0, mode, 4.0 * mode + 10.0 / lambda];
    let head = integrate_pieces(f, &pts, tol.quad())?;
    let tail = integrate_to_infinity(f, pts[2], tol.quad())?;
    let v = head.value + tail.value;
    if !v.is_finite() {
        return Err(Error::Accuracy(format!(
            "Erlang density quadrature failed at x = {x}"
        )));
    }
    Ok(v)
}

/// `G(t) = ∫_0^t h^{(k)}(x) dx`, integrated in `w = x^α` where the integrand is smooth.
pub fn erlang_cdf(alpha: f64, lambda: f64, k: usize, t: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha(alpha)?;
    check_rate(lambda)?;
    check_order(k)?;
    check_time("t", t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let p = MLParams::new(alpha, alpha * kf, kf)?;
    let failed = std::cell::Cell::new(false);
    let f = |w: f64| {
        if w == 0.0 {
            return if k == 1 {
                1.0 / crate::specfun::gamma(alpha)
            } else {
                0.0
            };
        }
        match generalized_ml(&p, -lambda * w, tol) {
            Ok(e) => w.powf(kf - 1.0) * e,
            Err(_) => {
                failed.set(true);
                0.0
            }
        }
    };
    let w_max = t.powf(alpha);
    let r = integrate(f, 0.0, w_max, tol.quad());
    if let (Ok(r), false) = (&r, failed.get()) {
        return Ok((lambda.powf(kf) / alpha * r.value).clamp(0.0, 1.0));
    }
    // G(t) = P(N_α(t) ≥ k).
    let head = fpp_pmf(alpha, lambda, t, Some(k - 1), tol)?;
    Ok((1.0 - head.probs.iter().sum::<f64>()).clamp(0.0, 1.0))
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Intensity `λ(s)` of a non-homogeneous Poisson process with its
/// cumulative `Λ(t) = ∫_0^t λ(s) ds` and optionally `B = Λ^{-1}`.
#[derive(Clone)]
pub struct RateFunction {
    label: String,
    rate: RealFn,
    cumulative: RealFn,
    inverse: Option<RealFn>,
    bisection: bool,
    supremum: f64,
}

impl fmt::Debug for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateFunction")
            .field("label", &self.label)
            .field("has_inverse", &self.inverse.is_some())
            .field("bisection", &self.bisection)
            .field("supremum", &self.supremum)
            .finish()
    }
}

impl RateFunction {
    pub fn constant(lambda: f64) -> Result<Self> {
        check_rate(lambda)?;
        Ok(Self {
            label: format!("constant({lambda})"),
            rate: Arc::new(move |_| lambda),
            cumulative: Arc::new(move |t| lambda * t),
            inverse: Some(Arc::new(move |y| y / lambda)),
            bisection: false,
            supremum: f64::INFINITY,
        })
    }

    /// `Λ(t) = c·t^p`.
    pub fn power(c: f64, p: f64) -> Result<Self> {
        if !(c > 0.0) || !(p > 0.0) || !c.is_finite() || !p.is_finite() {
            return domain(format!(
                "power rate needs c > 0 and p > 0, got c = {c}, p = {p}"
            ));
        }
        Ok(Self {
            label: format!("power(c={c},p={p})"),
            rate: Arc::new(move |s: f64| c * p * s.powf(p - 1.0)),
            cumulative: Arc::new(move |t: f64| c * t.powf(p)),
            inverse: Some(Arc::new(move |y: f64| (y / c).powf(1.0 / p))),
            bisection: false,
            supremum: f64::INFINITY,
        })
    }

    /// `Λ(t) = total·(1 - e^{-kt})`, a bounded cumulative intensity.
    pub fn saturating(total: f64, k: f64) -> Result<Self> {
        if !(total > 0.0) || !(k > 0.0) || !total.is_finite() || !k.is_finite() {
            return domain(format!(
                "saturating rate needs total > 0 and k > 0, got {total}, {k}"
            ));
        }
        Ok(Self {
            label: format!("saturating(total={total},k={k})"),
            rate: Arc::new(move |s: f64| total * k * (-k * s).exp()),
            cumulative: Arc::new(move |t: f64| -total * (-k * t).exp_m1()),
            inverse: Some(Arc::new(move |y: f64| -(-y / total).ln_1p() / k)),
            bisection: false,
            supremum: total,
        })
    }

    /// User-supplied `λ`, `Λ` and optionally `B`. `supremum` is `sup Λ`
    /// (`f64::INFINITY` when unbounded).
    pub fn custom<F, G>(label: &str, rate: F, cumulative: G, supremum: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.to_string(),
            rate: Arc::new(rate),
            cumulative: Arc::new(cumulative),
            inverse: None,
            bisection: false,
            supremum,
        }
    }

    pub fn with_inverse<H>(mut self, inverse: H) -> Self
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    /// Allows `B = Λ^{-1}` by bisection when no closed form was given.
    pub fn with_bisection_inverse(mut self) -> Self {
        self.bisection = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rate(&self, s: f64) -> f64 {
        (self.rate)(s)
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        (self.cumulative)(t)
    }

    pub fn supremum(&self) -> f64 {
        self.supremum
    }

    pub fn is_bounded(&self) -> bool {
        self.supremum.is_finite()
    }

    /// `B(y) = inf{t : Λ(t) ≥ y}`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) || y >= self.supremum {
            return domain(format!(
                "Λ^(-1)({y}) undefined: Λ is bounded by {}",
                self.supremum
            ));
        }
        if let Some(b) = &self.inverse {
            return Ok(b(y));
        }
        if !self.bisection {
            return Err(Error::Precondition(format!(
                "rate function `{}` has no inverse; supply one or enable bisection",
                self.label
            )));
        }
        let mut hi = 1.0;
        while self.cumulative(hi) < y {
            hi *= 2.0;
            if hi > 1e300 {
                return domain(format!("Λ never reaches {y}"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cumulative(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(hi)
    }
}

/// One FNPP path `N(Λ(Y_α(t)))` on `[0, t_max]`, simulated exactly: unit
/// Poisson epochs `e_k` are mapped to operational times `B(e_k)` and then
/// to calendar time through `L_α`.
pub fn simulate_fnpp<R: Rng + ?Sized>(
    alpha: f64,
    rate: &RateFunction,
    t_max: f64,
    rng: &mut R,
) -> Result<EventTimes> {
    check_alpha(alpha)?;
    check_time("t_max", t_max)?;
    let mut times = Vec::new();
    let mut e = 0.0;
    let mut op = 0.0;
    let mut clock = 0.0;
    loop {
        let gap: f64 = Exp1.sample(rng);
        e += gap;
        if e >= rate.supremum() {
            break;
        }
        let w = rate.inverse(e)?;
        clock += clock_increment(alpha, w - op, rng);
        op = w;
        if clock > t_max {
            break;
        }
        times.push(clock);
    }
    Ok(EventTimes { times, t_max })
}

/// `P(NN_α(t) = k) = ∫ e^{-Λ(u)} Λ(u)^k/k! f_α(t,u) du`.
pub fn fnpp_pmf(alpha: f64, rate: &RateFunction, t: f64, k: usize, tol: &Tolerance) -> Result<f64> {
    check_alpha(alpha)?;
    check_time("t", t)?;
    if alpha == 1.0 || t == 0.0 {
        return Ok(ln_poisson(k, rate.cumulative(t)).exp());
    }
    let kernel = |u: f64| ln_poisson(k, rate.cumulative(u)).exp();
    let mut marks = Vec::new();
    if let Ok(c) = rate.inverse(k as f64) {
        let w = (k as f64 + 1.0).sqrt();
        marks.push(c);
        marks.extend(rate.inverse(k as f64 + 8.0 * w));
        marks.extend(rate.inverse((k as f64 - 8.0 * w).max(0.0)));
    }
    let v = mix_over_clock(alpha, t, kernel, &marks, tol)?;
    if !v.is_finite() {
        return Err(Error::Accuracy(format!(
            "FNPP pmf quadrature failed at k = {k}"
        )));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Slope of `ln var` against `ln t` over the last decade of `t`.
pub fn variance_slope(t: &[f64], var: &[f64]) -> Result<f64> {
    let t_top = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lx, ly): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(var)
        .filter(|(ti, _)| **ti >= t_top / 10.0 * (1.0 - 1e-12))
        .map(|(ti, v)| (ti.ln(), v.ln()))
        .unzip();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(Error::Estimation(
            "variance is zero or infinite on the regression range".into(),
        ));
    }
    Ok(linear_fit(&lx, &ly)?.0)
}

fn check_decades(t_grid: &[f64]) -> Result<()> {
    check_grid(t_grid)?;
    let lo = t_grid.iter().copied().find(|t| *t > 0.0).unwrap_or(0.0);
    let hi = t_grid.last().copied().unwrap_or(0.0);
    if !(lo > 0.0) || hi / lo < 100.0 * (1.0 - 1e-12) {
        return domain("Hurst regression needs a positive time grid spanning at least two decades");
    }
    Ok(())
}

/// Closed-form counterpart of [`hurst_estimate`], regressing `fpp_var`.
pub fn hurst_closed_form(alpha: f64, lambda: f64, t_grid: &[f64]) -> Result<f64> {
    check_decades(t_grid)?;
    let var = t_grid
        .iter()
        .map(|&t| fpp_var(alpha, lambda, t))
        .collect::<Result<Vec<_>>>()?;
    variance_slope(t_grid, &var)
}

/// Slope of `ln Var N_α(t)` against `ln t` over the largest decade of
/// `t_grid`, from `n_paths` simulated trajectories. The slope tends to `2α`.
pub fn hurst_estimate(
    alpha: f64,
    lambda: f64,
    t_grid: &[f64],
    n_paths: usize,
    cfg: &McConfig,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_rate(lambda)?;
    check_decades(t_grid)?;
    if n_paths < 2 {
        return domain("Hurst estimate needs at least two paths");
    }
    let sampler = InverseSampler::new(alpha)?;
    let paths = map_paths(cfg, n_paths, |s| {
        simulate_fpp_counts(&sampler, lambda, t_grid, &mut s.rng())
    });
    let paths = paths.into_iter().collect::<Result<Vec<_>>>()?;
    let var: Vec<f64> = (0..t_grid.len())
        .map(|j| Summary::of(&paths.iter().map(|p| p[j] as f64).collect::<Vec<_>>()).var)
        .collect();
    variance_slope(t_grid, &var)
}

/// Correlation decay of the counts: `Cor(N(s), N(t))` for each `t` and the
/// log-log slope against `t`, both simulated and from the closed form.
#[derive(Debug, Clone, Serialize)]
pub struct LrdReport {
    pub t: Vec<f64>,
    pub correlation: Vec<f64>,
    pub slope: f64,
    pub closed_form_slope: f64,
}

/// Closed-form `Cor(N_α(s), N_α(t))`.
pub fn fpp_correlation(alpha: f64, lambda: f64, s: f64, t: f64) -> Result<f64> {
    Ok(fpp_cov(alpha, lambda, s, t)?
        / (fpp_var(alpha, lambda, s)? * fpp_var(alpha, lambda, t)?).sqrt())
}

pub fn lrd_counts(
    alpha: f64,
    lambda: f64,
    s: f64,
    t_list: &[f64],
    n_paths: usize,
    cfg: &McConfig,
) -> Result<LrdReport> {
    check_alpha(alpha)?;
    check_rate(lambda)?;
    if !(s > 0.0) || t_list.len() < 2 || t_list.iter().any(|t| *t <= s) {
        return domain("LRD check needs s > 0 and at least two times t > s");
    }
    let mut grid = vec![s];
    grid.extend_from_slice(t_list);
    check_grid(&grid)?;
    let sampler = InverseSampler::new(alpha)?;
    let paths = map_paths(cfg, n_paths, |st| {
        simulate_fpp_counts(&sampler, lambda, &grid, &mut st.rng())
    });
    let paths = paths.into_iter().collect::<Result<Vec<_>>>()?;
    let col = |j: usize| paths.iter().map(|p| p[j] as f64).collect::<Vec<_>>();
    let base = col(0);
    let correlation: Vec<f64> = (1..grid.len())
        .map(|j| crate::stats::correlation(&base, &col(j)))
        .collect();
    let slope = crate::stats::loglog_slope(t_list, &correlation)?;
    let exact = t_list
        .iter()
        .map(|&t| fpp_correlation(alpha, lambda, s, t))
        .collect::<Result<Vec<_>>>()?;
    let closed_form_slope = crate::stats::loglog_slope(t_list, &exact)?;
    Ok(LrdReport {
        t: t_list.to_vec(),
        correlation,
        slope,
        closed_form_slope,
    })
}

/// Residual `D^α p_k(t) + λ(p_k(t) - p_{k-1}(t))` of the fractional
/// differential-difference system, with the Caputo derivative taken on
/// `n_intervals` uniform steps of `[0, t]`.
pub fn verify_fractional_dde(
    alpha: f64,
    lambda: f64,
    t: f64,
    k: usize,
    n_intervals: usize,
    tol: &Tolerance,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_rate(lambda)?;
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    let h = t / n_intervals as f64;
    let mut pk = Vec::with_capacity(n_intervals + 1);
    let mut pk1 = 0.0;
    for i in 0..=n_intervals {
        let tau = if i == n_intervals { t } else { i as f64 * h };
        let table = fpp_pmf(alpha, lambda, tau, Some(k), tol)?;
        pk.push(table.probs[k]);
        if i == n_intervals && k > 0 {
            pk1 = table.probs[k - 1];
        }
    }
    let d = caputo_derivative(&pk, alpha, t)?;
    Ok(d + lambda * (pk[n_intervals] - pk1))
}

/// `P(N_α(t) = 0) = E_α(-λt^α)`.
pub fn fpp_zero_probability(alpha: f64, lambda: f64, t: f64, tol: &Tolerance) -> Result<f64> {
    check_rate(lambda)?;
    check_time("t", t)?;
    mittag_leffler(alpha, -lambda * t.powf(alpha), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_is_right_continuous() {
        let e = EventTimes {
            times: vec![0.5, 1.0, 2.0],
            t_max: 3.0,
        };
        assert_eq!(e.count(0.49), 0);
        assert_eq!(e.count(1.0), 2);
        assert_eq!(e.count(3.0), 3);
    }

    #[test]
    fn poisson_limit_of_pmf() {
        let t = fpp_pmf(1.0, 2.0, 1.5, Some(5), &Tolerance::default()).unwrap();
        for (k, p) in t.probs.iter().enumerate() {
            let want =
                (-3.0f64).exp() * 3f64.powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
            assert!((p - want).abs() < 1e-15);
        }
    }

    #[test]
    fn large_argument_uses_quadrature() {
        // λt^α = 60 makes the series cancel catastrophically.
        let tol = Tolerance::default();
        let direct = fpp_pmf_quadrature(0.5, 60.0, 1.0, 3, &tol).unwrap();
        let via = fpp_pmf(0.5, 60.0, 1.0, Some(3), &tol).unwrap().probs[3];
        assert!((direct - via).abs() < 1e-12);
    }

    #[test]
    fn rate_function_inverse() {
        let r = RateFunction::custom("t^2", |s| 2.0 * s, |t| t * t, f64::INFINITY);
        assert!(matches!(r.inverse(1.0), Err(Error::Precondition(_))));
        let r = r.with_bisection_inverse();
        assert!((r.inverse(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let s = RateFunction::saturating(3.0, 1.0).unwrap();
        assert!(s.inverse(3.0).is_err());
        assert!((s.cumulative(s.inverse(1.5).unwrap()) - 1.5).abs() < 1e-12);
    }
}

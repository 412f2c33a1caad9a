//! The fractional Cramér–Lundberg surplus
//! `R(t) = u + μλ(1+ρ)Y_α(t) − Σ_{i ≤ N(Y_α(t))} X_i`.
//!
//! Premiums and claims run on the same clock `Y_α`, so in operational time
//! the process is the classical compound Poisson surplus. Ruin is therefore
//! simulated exactly at claim epochs: claims arrive at Poisson(λ) epochs
//! `τ_k` in operational time and occur in calendar time at `L_α(τ_k)`.
//! Between claims the surplus only rises, so its running minimum is the
//! minimum over post-claim values.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma, Open01, StandardNormal};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::mc::{map_paths, McConfig};
use crate::processes::{
    check_rate, check_time, poisson_draw, simulate_fpp_renewal, LrdReport, RateFunction,
};
use crate::quad::{integrate_pieces, integrate_to_infinity, QuadOptions};
use crate::risk_measures::{avar, EmpiricalSample};
use crate::sampling::{
    check_grid, clock_increment, sample_inverse_marginal, simulate_inverse_grid, InverseSampler,
    RngStream,
};
use crate::specfun::{check_alpha, gamma, inv_sub_cov};
use crate::stats::{correlation, ks_one_sample, loglog_slope, Summary};

/// Probability bound on ruin after the Lundberg stop fires.
pub const LUNDBERG_EPS: f64 = 0.002;

const OP_STREAM: u8 = 0;
const CLAIM_STREAM: u8 = 1;
const CLOCK_STREAM: u8 = 2;

/// Distribution of the individual claim sizes `X_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClaimLaw {
    Exponential {
        mean: f64,
    },
    LogNormal {
        mu_log: f64,
        sigma_log: f64,
    },
    /// Classical Pareto on `[scale, ∞)` with tail `(scale/x)^shape`.
    Pareto {
        shape: f64,
        scale: f64,
    },
    Point {
        value: f64,
    },
    /// Resampling from a finite set of observed claims.
    Empirical {
        values: Vec<f64>,
    },
}

impl ClaimLaw {
    pub fn exponential(mean: f64) -> Result<Self> {
        Self::Exponential { mean }.validated()
    }

    pub fn lognormal(mu_log: f64, sigma_log: f64) -> Result<Self> {
        Self::LogNormal { mu_log, sigma_log }.validated()
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        Self::Pareto { shape, scale }.validated()
    }

    pub fn point(value: f64) -> Result<Self> {
        Self::Point { value }.validated()
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        Self::Empirical { values }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                domain(format!("claim {name} must be positive and finite, got {x}"))
            }
        };
        match self {
            Self::Exponential { mean } => pos("mean", *mean),
            Self::LogNormal { mu_log, sigma_log } => {
                if !mu_log.is_finite() {
                    return domain(format!("claim log-mean must be finite, got {mu_log}"));
                }
                pos("log-sd", *sigma_log)
            }
            Self::Pareto { shape, scale } => {
                if !(*shape > 2.0) || !shape.is_finite() {
                    return domain(format!(
                        "Pareto shape must exceed 2 for a finite second moment, got {shape}"
                    ));
                }
                pos("scale", *scale)
            }
            Self::Point { value } => pos("value", *value),
            Self::Empirical { values } => {
                if values.is_empty() {
                    return domain("empirical claim law needs at least one value");
                }
                values.iter().try_for_each(|v| pos("value", *v))
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { mean } => *mean,
            Self::LogNormal { mu_log, sigma_log } => (mu_log + 0.5 * sigma_log * sigma_log).exp(),
            Self::Pareto { shape, scale } => shape * scale / (shape - 1.0),
            Self::Point { value } => *value,
            Self::Empirical { values } => crate::stats::mean(values),
        }
    }

    /// `E X²`.
    pub fn ex2(&self) -> f64 {
        match self {
            Self::Exponential { mean } => 2.0 * mean * mean,
            Self::LogNormal { mu_log, sigma_log } => {
                (2.0 * mu_log + 2.0 * sigma_log * sigma_log).exp()
            }
            Self::Pareto { shape, scale } => shape * scale * scale / (shape - 2.0),
            Self::Point { value } => value * value,
            Self::Empirical { values } => {
                crate::stats::neumaier_sum(values.iter().map(|v| v * v)) / values.len() as f64
            }
        }
    }

    /// Supremum of the `h` with finite `E e^{hX}`; 0 for heavy tails.
    pub fn h_max(&self) -> f64 {
        match self {
            Self::Exponential { mean } => 1.0 / mean,
            Self::LogNormal { .. } | Self::Pareto { .. } => 0.0,
            Self::Point { .. } | Self::Empirical { .. } => f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Self::Point { .. } | Self::Empirical { .. })
    }

    /// `φ_X(h) = E e^{hX}` for `h < h_max` (any `h ≤ 0` is allowed).
    pub fn mgf(&self, h: f64) -> Result<f64> {
        if h == 0.0 {
            return Ok(1.0);
        }
        if !h.is_finite() || (h > 0.0 && h >= self.h_max()) {
            return domain(format!(
                "MGF argument h = {h} must be below h_max = {}",
                self.h_max()
            ));
        }
        Ok(match self {
            Self::Exponential { mean } => 1.0 / (1.0 - mean * h),
            Self::Point { value } => (h * value).exp(),
            Self::Empirical { values } => {
                crate::stats::neumaier_sum(values.iter().map(|v| (h * v).exp()))
                    / values.len() as f64
            }
            Self::LogNormal { mu_log, sigma_log } => {
                let (m, s) = (*mu_log, *sigma_log);
                // In z = ln x the integrand is a Gaussian density damped by exp(h e^z).
                let f = |y: f64| {
                    let z = m + s * y;
                    (h * z.exp()).exp() * (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt()
                };
                integrate_pieces(
                    f,
                    &[-40.0, -5.0, 0.0, 5.0, 40.0],
                    QuadOptions::with_tol(1e-13, 1e-11),
                )?
                .value
            }
            Self::Pareto { shape, scale } => {
                let (a, k) = (*shape, *scale);
                let f = |x: f64| (h * x).exp() * a * k.powf(a) * x.powf(-a - 1.0);
                integrate_to_infinity(f, k, QuadOptions::with_tol(1e-13, 1e-11))?.value
            }
        })
    }

    /// `ln φ_X(h)`, computed without overflow for bounded laws.
    pub fn ln_mgf(&self, h: f64) -> Result<f64> {
        match self {
            Self::Point { value } if h.is_finite() => Ok(h * value),
            Self::Empirical { values } if h.is_finite() => {
                let top = h * values.iter().copied().fold(
                    if h >= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    },
                    |a, b| {
                        if h >= 0.0 {
                            a.max(b)
                        } else {
                            a.min(b)
                        }
                    },
                );
                let s = crate::stats::neumaier_sum(values.iter().map(|v| (h * v - top).exp()));
                Ok(top + (s / values.len() as f64).ln())
            }
            Self::Exponential { mean } if h < 1.0 / mean => Ok(-(-mean * h).ln_1p()),
            _ => self.mgf(h).map(f64::ln),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            Self::LogNormal { mu_log, sigma_log } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu_log + sigma_log * z).exp()
            }
            Self::Pareto { shape, scale } => {
                let v: f64 = Open01.sample(rng);
                scale * v.powf(-1.0 / shape)
            }
            Self::Point { value } => *value,
            Self::Empirical { values } => values[rng.random_range(0..values.len())],
        }
    }

    /// Sum of `n` independent claims.
    pub fn sample_sum<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self {
            Self::Exponential { mean } => gamma_draw(n as f64, *mean, rng),
            Self::Point { value } => n as f64 * value,
            _ => crate::stats::neumaier_sum((0..n).map(|_| self.sample(rng))),
        }
    }

    /// The law of `c·X`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return domain(format!("claim scale factor must be positive, got {c}"));
        }
        Ok(match self {
            Self::Exponential { mean } => Self::Exponential { mean: mean * c },
            Self::LogNormal { mu_log, sigma_log } => Self::LogNormal {
                mu_log: mu_log + c.ln(),
                sigma_log: *sigma_log,
            },
            Self::Pareto { shape, scale } => Self::Pareto {
                shape: *shape,
                scale: scale * c,
            },
            Self::Point { value } => Self::Point { value: value * c },
            Self::Empirical { values } => Self::Empirical {
                values: values.iter().map(|v| v * c).collect(),
            },
        })
    }

    /// Positive root `r` of `φ_X(r) − 1 = μ(1+ρ)r`, if it exists.
    pub fn adjustment_coefficient(&self, rho: f64) -> Option<f64> {
        if !(rho > 0.0) {
            return None;
        }
        let mu = self.mean();
        match self {
            Self::Exponential { .. } => Some(rho / ((1.0 + rho) * mu)),
            Self::LogNormal { .. } | Self::Pareto { .. } => None,
            Self::Point { .. } | Self::Empirical { .. } => {
                let g = |r: f64| {
                    self.mgf(r)
                        .map(|m| m - 1.0 - mu * (1.0 + rho) * r)
                        .unwrap_or(f64::INFINITY)
                };
                let mut hi = 1.0 / mu;
                while g(hi) <= 0.0 {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                // g is convex with g(0) = 0 and g'(0) < 0, so the sign change is the root.
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) <= 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(0.5 * (lo + hi))
            }
        }
    }

    fn blockable(&self) -> bool {
        matches!(self, Self::Exponential { .. } | Self::Point { .. })
    }
}

impl fmt::Display for ClaimLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { mean } => write!(f, "exp:mean={mean}"),
            Self::LogNormal { mu_log, sigma_log } => {
                write!(f, "lognorm:mlog={mu_log},slog={sigma_log}")
            }
            Self::Pareto { shape, scale } => write!(f, "pareto:shape={shape},scale={scale}"),
            Self::Point { value } => write!(f, "point:value={value}"),
            Self::Empirical { values } => write!(f, "empirical:n={}", values.len()),
        }
    }
}

/// Parses `exp:mean=1`, `lognorm:mlog=0,slog=0.5`, `pareto:shape=2.5,scale=1`
/// and `point:value=1`.
impl FromStr for ClaimLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = Vec::new();
        for item in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::Input(format!(
                    "claim parameter `{item}` is not of the form key=value"
                ))
            })?;
            let v: f64 = v.trim().parse().map_err(|_| {
                Error::Input(format!(
                    "claim parameter `{}` has a non-numeric value `{v}`",
                    k.trim()
                ))
            })?;
            params.push((k.trim().to_string(), v));
        }
        let take = |key: &str| {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Input(format!("claim law `{kind}` needs `{key}=...`")))
        };
        let allowed: &[&str] = match kind.trim() {
            "exp" => &["mean"],
            "lognorm" => &["mlog", "slog"],
            "pareto" => &["shape", "scale"],
            "point" => &["value"],
            other => {
                return Err(Error::Input(format!(
                    "unknown claim law `{other}`; expected exp, lognorm, pareto or point"
                )))
            }
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Input(format!(
                "claim law `{kind}` has no parameter `{k}`"
            )));
        }
        match kind.trim() {
            "exp" => Self::exponential(take("mean")?),
            "lognorm" => Self::lognormal(take("mlog")?, take("slog")?),
            "pareto" => Self::pareto(take("shape")?, take("scale")?),
            _ => Self::point(take("value")?),
        }
    }
}

fn gamma_draw<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, scale)
        .expect("positive shape and scale")
        .sample(rng)
}

fn beta_draw<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    Beta::new(a, b).expect("positive shapes").sample(rng)
}

/// Parameters of the fractional surplus process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskModel {
    pub u: f64,
    pub mu: f64,
    pub rho: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub claims: ClaimLaw,
}

impl RiskModel {
    pub fn new(
        u: f64,
        mu: f64,
        rho: f64,
        lambda: f64,
        alpha: f64,
        claims: ClaimLaw,
    ) -> Result<Self> {
        let m = Self {
            u,
            mu,
            rho,
            lambda,
            alpha,
            claims,
        };
        m.validate()?;
        Ok(m)
    }

    /// Model whose `μ` is read off the claim law.
    pub fn with_claims(
        u: f64,
        rho: f64,
        lambda: f64,
        alpha: f64,
        claims: ClaimLaw,
    ) -> Result<Self> {
        Self::new(u, claims.mean(), rho, lambda, alpha, claims)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_rate(self.lambda)?;
        if !self.u.is_finite() || self.u < 0.0 {
            return domain(format!(
                "initial capital u must be finite and nonnegative, got {}",
                self.u
            ));
        }
        if !self.rho.is_finite() || self.rho <= -1.0 {
            return domain(format!(
                "safety loading rho must exceed -1, got {}",
                self.rho
            ));
        }
        self.claims.validate()?;
        if !(self.mu > 0.0) || (self.claims.mean() - self.mu).abs() > 1e-9 * self.mu {
            return domain(format!(
                "mu = {} does not match the claim mean {}",
                self.mu,
                self.claims.mean()
            ));
        }
        Ok(())
    }

    /// Premium income per unit of operational time, `μλ(1+ρ)`.
    pub fn premium_rate(&self) -> f64 {
        self.mu * self.lambda * (1.0 + self.rho)
    }

    pub fn net_profit(&self) -> bool {
        self.rho > 0.0
    }

    pub fn with_u(&self, u: f64) -> Result<Self> {
        Self::new(
            u,
            self.mu,
            self.rho,
            self.lambda,
            self.alpha,
            self.claims.clone(),
        )
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(
            self.u,
            self.mu,
            self.rho,
            self.lambda,
            alpha,
            self.claims.clone(),
        )
    }

    /// Diffusion scaling: `λ → nλ`, claims `→ X/√n`, `ρ → ρ/√n`. Drift
    /// `λμρ` and variance rate `λ E X²` are unchanged.
    pub fn diffusion_scaled(&self, n: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return domain(format!("diffusion scale must be positive, got {n}"));
        }
        let r = n.sqrt();
        let claims = self.claims.scaled(1.0 / r)?;
        Self::new(
            self.u,
            claims.mean(),
            self.rho / r,
            self.lambda * n,
            self.alpha,
            claims,
        )
    }

    /// Gap above the running minimum beyond which later ruin has probability
    /// below [`LUNDBERG_EPS`].
    pub fn lundberg_gap(&self) -> Option<f64> {
        self.claims
            .adjustment_coefficient(self.rho)
            .map(|r| (1.0 / LUNDBERG_EPS).ln() / r)
    }
}

/// Ruin probability estimate `ψ_α(v, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuinEstimate {
    pub probability: f64,
    pub half_width_95: f64,
    pub n_paths: usize,
    /// Calendar horizon; infinite for the long-run probability.
    pub horizon: f64,
    /// Upper bound on the bias from stopping paths early.
    pub truncation_bound: f64,
}

impl RuinEstimate {
    fn from_count(hits: usize, n: usize, horizon: f64, truncation_bound: f64) -> Self {
        let p = hits as f64 / n as f64;
        Self {
            probability: p,
            half_width_95: 1.96 * (p * (1.0 - p) / n as f64).sqrt(),
            n_paths: n,
            horizon,
            truncation_bound,
        }
    }

    /// `p ± half_width`, clipped to `[0, 1]`.
    pub fn interval(&self) -> (f64, f64) {
        (
            (self.probability - self.half_width_95).max(0.0),
            (self.probability + self.half_width_95).min(1.0),
        )
    }

    pub fn std_error(&self) -> f64 {
        self.half_width_95 / 1.96
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

impl Horizon {
    pub fn value(&self) -> f64 {
        match self {
            Horizon::Finite(t) => *t,
            Horizon::Infinite => f64::INFINITY,
        }
    }
}

// ---------------------------------------------------------------------------
// Paths and moments

/// One trajectory of `R_α` on `t_grid`. Premium and claims share a single
/// path of `Y_α`: the exact sampler when `step` is `None`, otherwise the
/// grid sampler with that subordinator step.
pub fn simulate_risk_path<R: Rng + ?Sized>(
    m: &RiskModel,
    t_grid: &[f64],
    step: Option<f64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    m.validate()?;
    let y = match step {
        None => InverseSampler::new(m.alpha)?.sample_at(t_grid, rng)?,
        Some(h) => simulate_inverse_grid(m.alpha, t_grid, Some(h), rng)?,
    };
    let c = m.premium_rate();
    let mut prev = 0.0;
    let mut claims = 0.0;
    Ok(y.iter()
        .map(|&yt| {
            let n = poisson_draw(m.lambda * (yt - prev), rng);
            claims += m.claims.sample_sum(n, rng);
            prev = yt;
            m.u + c * yt - claims
        })
        .collect())
}

/// `t^α/Γ(1+α)`, the mean operational time elapsed by `t`.
pub fn mean_clock(alpha: f64, t: f64) -> f64 {
    t.powf(alpha) / gamma(1.0 + alpha)
}

/// Time where `t^α/Γ(1+α)` crosses `t`: `Γ(1+α)^{-1/(1−α)}`. The mean
/// operational clock runs ahead of calendar time before it and behind after.
pub fn clock_crossing_time(alpha: f64) -> Result<f64> {
    crate::specfun::check_alpha_open(alpha)?;
    Ok(gamma(1.0 + alpha).powf(-1.0 / (1.0 - alpha)))
}

/// Surplus with the premium replaced by its mean, `u + μλ(1+ρ)t^α/Γ(1+α)`,
/// and FPP claims from the renewal construction.
pub fn simulate_simplified_path<R: Rng + ?Sized>(
    m: &RiskModel,
    t_grid: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    m.validate()?;
    check_grid(t_grid)?;
    let t_max = t_grid.last().copied().unwrap_or(0.0);
    let events = simulate_fpp_renewal(m.alpha, m.lambda, t_max, rng)?;
    let c = m.premium_rate();
    let mut seen = 0;
    let mut claims = 0.0;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let n = events.count(t);
            claims += m.claims.sample_sum((n - seen) as u64, rng);
            seen = n;
            m.u + c * mean_clock(m.alpha, t) - claims
        })
        .collect())
}

/// `E R_α(t) = u + λμρ t^α/Γ(1+α)`.
pub fn risk_mean(m: &RiskModel, t: f64) -> Result<f64> {
    check_time("t", t)?;
    Ok(m.u + m.lambda * m.mu * m.rho * mean_clock(m.alpha, t))
}

/// `Cov(R(s), R(t)) = μ²λ²ρ² Cov(Y(s), Y(t)) + λ E X² s^α/Γ(1+α)` for `s ≤ t`.
pub fn risk_cov(m: &RiskModel, s: f64, t: f64) -> Result<f64> {
    check_time("s", s)?;
    check_time("t", t)?;
    let lo = s.min(t);
    let k = m.mu * m.lambda * m.rho;
    Ok(k * k * inv_sub_cov(m.alpha, s, t)? + m.lambda * m.claims.ex2() * mean_clock(m.alpha, lo))
}

pub fn risk_var(m: &RiskModel, t: f64) -> Result<f64> {
    risk_cov(m, t, t)
}

/// `Cov(S(s), S(t)) = E X² E N(s) + λ²μ² Cov(Y(s), Y(t))` for the aggregate claims.
pub fn compound_claims_cov(m: &RiskModel, s: f64, t: f64) -> Result<f64> {
    check_time("s", s)?;
    check_time("t", t)?;
    let k = m.lambda * m.mu;
    Ok(m.claims.ex2() * m.lambda * mean_clock(m.alpha, s.min(t))
        + k * k * inv_sub_cov(m.alpha, s, t)?)
}

/// Simulated and closed-form decay of `Cor(R(s), R(t))` over `t_list`.
pub fn lrd_check(
    m: &RiskModel,
    s: f64,
    t_list: &[f64],
    n_paths: usize,
    cfg: &McConfig,
) -> Result<LrdReport> {
    m.validate()?;
    if !(s > 0.0) || t_list.len() < 2 || t_list.iter().any(|t| *t <= s) {
        return domain("LRD check needs s > 0 and at least two times t > s");
    }
    let mut grid = vec![s];
    grid.extend_from_slice(t_list);
    check_grid(&grid)?;
    let paths = map_paths(cfg, n_paths, |st| {
        simulate_risk_path(m, &grid, None, &mut st.rng())
    });
    let paths = paths.into_iter().collect::<Result<Vec<_>>>()?;
    let col = |j: usize| paths.iter().map(|p| p[j]).collect::<Vec<_>>();
    let base = col(0);
    let corr: Vec<f64> = (1..grid.len())
        .map(|j| correlation(&base, &col(j)))
        .collect();
    let slope = loglog_slope(t_list, &corr)?;
    let exact = t_list
        .iter()
        .map(|&t| Ok(risk_cov(m, s, t)? / (risk_var(m, s)? * risk_var(m, t)?).sqrt()))
        .collect::<Result<Vec<_>>>()?;
    let closed_form_slope = loglog_slope(t_list, &exact)?;
    Ok(LrdReport {
        t: t_list.to_vec(),
        correlation: corr,
        slope,
        closed_form_slope,
    })
}

// ---------------------------------------------------------------------------
// Ruin engine

/// Running-minimum records of simulated paths, shared by every `u` and `v`.
///
/// Each path stores `(calendar time, x)` whenever the relative surplus
/// `x = c·τ_k − S_k` after a claim hits a new minimum, so
/// `R̲(t) = u + min{x : time ≤ t}`.
#[derive(Debug, Clone)]
pub struct MinimaSample {
    pub horizon: Horizon,
    pub truncation_bound: f64,
    paths: Vec<Vec<(f64, f64)>>,
}

impl MinimaSample {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    fn relative_min(&self, i: usize, t: Option<f64>) -> f64 {
        let recs = &self.paths[i];
        match t {
            None => recs.last().map_or(f64::INFINITY, |r| r.1),
            Some(t) => recs
                .iter()
                .take_while(|r| r.0 <= t)
                .last()
                .map_or(f64::INFINITY, |r| r.1),
        }
    }

    /// Post-claim minimum `u + min_k x_k` of each path by time `t`
    /// (`+∞` when no claim arrived).
    pub fn minima(&self, u: f64, t: Option<f64>) -> Vec<f64> {
        (0..self.paths.len())
            .map(|i| u + self.relative_min(i, t))
            .collect()
    }

    /// `ψ(u, v, t)`; `t = None` uses the full simulated horizon.
    pub fn ruin(&self, u: f64, v: f64, t: Option<f64>) -> Result<RuinEstimate> {
        if let Some(t) = t {
            if self.horizon == Horizon::Infinite {
                return domain("infinite-horizon samples carry no calendar times; simulate with a finite horizon");
            }
            if t > self.horizon.value() {
                return Err(Error::Horizon {
                    requested: t,
                    available: self.horizon.value(),
                });
            }
        }
        let hits = self.minima(u, t).iter().filter(|&&r| r <= v).count();
        Ok(RuinEstimate::from_count(
            hits,
            self.n_paths(),
            t.unwrap_or(self.horizon.value()),
            self.truncation_bound,
        ))
    }

    /// `−R̲` over the ruined paths, `{R̲ ≤ v}`.
    pub fn shortfalls(&self, u: f64, v: f64) -> Vec<f64> {
        self.minima(u, None)
            .into_iter()
            .filter(|&r| r <= v)
            .map(|r| -r)
            .collect()
    }

    /// Bailout capital `κ(v) = −E[R̲ | R̲ ≤ v]` with its two cross-checks.
    pub fn capital(&self, u: f64, v: f64) -> Result<CapitalEstimate> {
        let minima = self.minima(u, None);
        let ruined: Vec<f64> = minima.iter().copied().filter(|&r| r <= v).collect();
        if ruined.is_empty() {
            return Err(Error::Conditioning(format!(
                "no path fell to v = {v} in {} paths; increase n_paths or the horizon",
                self.n_paths()
            )));
        }
        let ruin = self.ruin(u, v, None)?;
        let s = Summary::of(&ruined.iter().map(|r| -r).collect::<Vec<_>>());

        // κ(v) = −v + (1/ψ(v)) ∫_{−∞}^v ψ(w) dw on a uniform level grid.
        let lowest = ruined.iter().copied().fold(f64::INFINITY, f64::min);
        let mut sorted = ruined.clone();
        sorted.sort_by(f64::total_cmp);
        let n = self.n_paths() as f64;
        let psi = |w: f64| sorted.partition_point(|&r| r <= w) as f64 / n;
        let cells = 4096;
        let kappa_integral = if lowest < v {
            let h = (v - lowest) / cells as f64;
            let inner: f64 = (1..cells).map(|j| psi(lowest + j as f64 * h)).sum();
            let area = h * (inner + 0.5 * (psi(lowest) + psi(v)));
            -v + area / ruin.probability
        } else {
            -v
        };

        let losses: Vec<f64> = minima
            .iter()
            .map(|&r| if r.is_finite() { -r } else { -u })
            .collect();
        let kappa_avar = if ruin.probability < 1.0 {
            avar(&EmpiricalSample::new(losses)?, 1.0 - ruin.probability)?
        } else {
            s.mean
        };
        Ok(CapitalEstimate {
            kappa: s.mean,
            std_error: s.se(),
            kappa_integral,
            kappa_avar,
            ruin,
            n_ruined: ruined.len(),
        })
    }
}

/// Bailout capital estimate with the integral and AVaR routes alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapitalEstimate {
    pub kappa: f64,
    pub std_error: f64,
    /// `−v + (1/ψ(v)) ∫_{−∞}^v ψ(w) dw` from the estimated `ψ` curve.
    pub kappa_integral: f64,
    /// `AVaR_{1−ψ(v)}(−R̲)` on the full sample.
    pub kappa_avar: f64,
    pub ruin: RuinEstimate,
    pub n_ruined: usize,
}

struct PathEngine<'a> {
    m: &'a RiskModel,
    c: f64,
    t_max: f64,
    stop_gap: f64,
    op: ChaCha8Rng,
    claim: ChaCha8Rng,
    clock_rng: ChaCha8Rng,
    x: f64,
    min: f64,
    clock: f64,
    done: bool,
    records: Vec<(f64, f64)>,
}

impl PathEngine<'_> {
    fn advance_clock(&mut self, dtau: f64) {
        if self.t_max.is_finite() {
            self.clock += clock_increment(self.m.alpha, dtau, &mut self.clock_rng);
            if self.clock > self.t_max {
                self.done = true;
            }
        }
    }

    fn claim(&mut self, dtau: f64, size: f64) {
        self.advance_clock(dtau);
        if self.done {
            return;
        }
        self.x += self.c * dtau - size;
        if self.x < self.min {
            self.min = self.x;
            self.records.push((self.clock, self.x));
        }
    }

    /// `k` claims with total operational duration `dtau` and total size
    /// `total`. Skipped in one move when even the full claim total taken at
    /// once cannot set a new minimum; otherwise split by a Beta bridge.
    fn block(&mut self, k: u64, dtau: f64, total: f64) {
        if self.x - total > self.min {
            self.advance_clock(dtau);
            if !self.done {
                self.x += self.c * dtau - total;
            }
            return;
        }
        if k == 1 {
            self.claim(dtau, total);
            return;
        }
        let k1 = k / 2;
        let k2 = k - k1;
        let tau1 = dtau * beta_draw(k1 as f64, k2 as f64, &mut self.op);
        let c1 = match self.m.claims {
            ClaimLaw::Point { value } => k1 as f64 * value,
            _ => total * beta_draw(k1 as f64, k2 as f64, &mut self.claim),
        };
        self.block(k1, tau1, c1);
        if !self.done {
            self.block(k2, dtau - tau1, total - c1);
        }
    }

    fn run(mut self) -> Vec<(f64, f64)> {
        let blockable = self.m.claims.blockable();
        let mean = self.m.mu;
        let lambda = self.m.lambda;
        while !self.done {
            let gap = self.x - self.min;
            if gap > self.stop_gap {
                break;
            }
            if blockable && gap.is_finite() {
                let k = (gap / (2.0 * mean)).floor();
                if k >= 4.0 {
                    let k = k.min(1e9) as u64;
                    let dtau = gamma_draw(k as f64, 1.0 / lambda, &mut self.op);
                    let total = self.m.claims.sample_sum(k, &mut self.claim);
                    self.block(k, dtau, total);
                    continue;
                }
            }
            let e: f64 = Exp1.sample(&mut self.op);
            let size = self.m.claims.sample(&mut self.claim);
            self.claim(e / lambda, size);
        }
        self.records
    }
}

fn run_path(m: &RiskModel, t_max: f64, stop_gap: f64, st: RngStream) -> Vec<(f64, f64)> {
    PathEngine {
        m,
        c: m.premium_rate(),
        t_max,
        stop_gap,
        op: st.sub(OP_STREAM),
        claim: st.sub(CLAIM_STREAM),
        clock_rng: st.sub(CLOCK_STREAM),
        x: 0.0,
        min: f64::INFINITY,
        clock: 0.0,
        done: false,
        records: Vec::new(),
    }
    .run()
}

/// Simulates `n_paths` running-minimum records. Paths stop at the calendar
/// horizon or, under the net-profit condition with light-tailed claims, once
/// the surplus is far enough above its minimum that later ruin has
/// probability below [`LUNDBERG_EPS`].
///
/// Operational-time and claim draws use separate sub-streams from the
/// calendar clock, so paths for different `α` share their operational-time
/// trajectory and all `u`, `v` are evaluated on the same paths.
pub fn simulate_minima(
    m: &RiskModel,
    horizon: Horizon,
    n_paths: usize,
    cfg: &McConfig,
) -> Result<MinimaSample> {
    m.validate()?;
    if n_paths == 0 {
        return domain("n_paths must be positive");
    }
    if let Horizon::Finite(t) = horizon {
        if !(t > 0.0) || t.is_nan() {
            return domain(format!("horizon must be positive, got {t}"));
        }
    }
    let gap = m.lundberg_gap();
    if horizon == Horizon::Infinite && gap.is_none() {
        return Err(Error::Precondition(if m.rho <= 0.0 {
            format!(
                "infinite-horizon ruin is certain without a positive safety loading (rho = {})",
                m.rho
            )
        } else {
            format!(
                "claim law {} has no adjustment coefficient; use a finite horizon",
                m.claims
            )
        }));
    }
    let stop_gap = gap.unwrap_or(f64::INFINITY);
    let t_max = horizon.value();
    let paths = map_paths(cfg, n_paths, |st| run_path(m, t_max, stop_gap, st));
    Ok(MinimaSample {
        horizon,
        truncation_bound: if gap.is_some() { LUNDBERG_EPS } else { 0.0 },
        paths,
    })
}

/// `ψ_α(v, t) = P(R̲_α(t) ≤ v)` at the model's `u`.
pub fn ruin_probability(
    m: &RiskModel,
    v: f64,
    horizon: Horizon,
    n_paths: usize,
    cfg: &McConfig,
) -> Result<RuinEstimate> {
    simulate_minima(m, horizon, n_paths, cfg)?.ruin(m.u, v, None)
}

/// `ψ` at several initial capitals on common paths.
pub fn ruin_curve(
    m: &RiskModel,
    us: &[f64],
    v: f64,
    horizon: Horizon,
    n_paths: usize,
    cfg: &McConfig,
) -> Result<Vec<RuinEstimate>> {
    let sample = simulate_minima(m, horizon, n_paths, cfg)?;
    us.iter().map(|&u| sample.ruin(u, v, None)).collect()
}

/// `(1/(1+ρ)) exp(−ρu/((1+ρ)μ))`, the classical ruin probability with
/// exponential claims.
pub fn classical_ruin_exponential(u: f64, rho: f64, mu: f64) -> f64 {
    if rho <= 0.0 {
        return 1.0;
    }
    (-rho * u / ((1.0 + rho) * mu)).exp() / (1.0 + rho)
}

/// Monte Carlo bailout capital at the model's `u`.
pub fn bailout_capital(
    m: &RiskModel,
    v: f64,
    horizon: Horizon,
    n_paths: usize,
    cfg: &McConfig,
) -> Result<CapitalEstimate> {
    simulate_minima(m, horizon, n_paths, cfg)?.capital(m.u, v)
}

fn check_loading(rho: f64, mu: f64, ex2: f64) -> Result<()> {
    if !(rho > 0.0) || !(mu > 0.0) || !(ex2 > 0.0) {
        return domain(format!(
            "need rho > 0, mu > 0 and E X^2 > 0, got rho = {rho}, mu = {mu}, ex2 = {ex2}"
        ));
    }
    Ok(())
}

/// Diffusion-limit bailout capital `κ(v) = −v + E X²/(2ρμ)`.
pub fn bailout_capital_limit(v: f64, rho: f64, mu: f64, ex2: f64) -> Result<f64> {
    check_loading(rho, mu, ex2)?;
    Ok(-v + ex2 / (2.0 * rho * mu))
}

/// Proportional-hazard capital `κ_c = κ/c` with `κ = E X²/(2ρμ)`.
pub fn proportional_hazard_capital(c: f64, rho: f64, mu: f64, ex2: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return domain(format!("hazard exponent c must lie in (0, 1], got {c}"));
    }
    Ok(bailout_capital_limit(0.0, rho, mu, ex2)? / c)
}

/// `∫_0^∞ S(z)^c dz` for the empirical survival function of a nonnegative sample.
pub fn proportional_hazard_empirical(shortfalls: &[f64], c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return domain(format!("hazard exponent c must lie in (0, 1], got {c}"));
    }
    if shortfalls.is_empty() || shortfalls.iter().any(|z| !(*z >= 0.0) || !z.is_finite()) {
        return domain("proportional hazard needs a nonempty sample of finite nonnegative values");
    }
    let mut z = shortfalls.to_vec();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (i, &zi) in z.iter().enumerate() {
        acc += (zi - prev) * ((n - i as f64) / n).powf(c);
        prev = zi;
    }
    Ok(acc)
}

/// Drift of the normalized diffusion limit, `δ = ρμ/E X²`.
pub fn diffusion_drift(rho: f64, mu: f64, ex2: f64) -> f64 {
    rho * mu / ex2
}

/// `P(inf_t (u0 + δt + W_t) ≤ v) = e^{2δ(v − u0)}` for `v ≤ u0`.
pub fn brownian_inf_probability(delta: f64, u0: f64, v: f64) -> f64 {
    if v >= u0 || delta <= 0.0 {
        1.0
    } else {
        (2.0 * delta * (v - u0)).exp()
    }
}

/// Fraction of Brownian paths with drift `delta` started at `u0` whose
/// infimum over `[0, horizon]` reaches `v`. Crossings inside each step are
/// detected with the Brownian bridge probability `exp(−2(a−v)(b−v)/dt)`.
pub fn brownian_inf_law_check(
    delta: f64,
    u0: f64,
    v: f64,
    n_paths: usize,
    step: f64,
    horizon: f64,
    cfg: &McConfig,
) -> Result<f64> {
    if !(step > 0.0) || !(horizon > 0.0) || !delta.is_finite() || n_paths == 0 {
        return domain("Brownian check needs step > 0, horizon > 0, finite delta and n_paths > 0");
    }
    if v >= u0 {
        return Ok(1.0);
    }
    let steps = (horizon / step).ceil() as usize;
    let sd = step.sqrt();
    let hits = map_paths(cfg, n_paths, |st| {
        let mut rng = st.rng();
        let mut a = u0;
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            let b = a + delta * step + sd * z;
            let u: f64 = rng.random();
            if b <= v || u < (-2.0 * (a - v) * (b - v) / step).exp() {
                return true;
            }
            a = b;
        }
        false
    });
    Ok(hits.iter().filter(|h| **h).count() as f64 / n_paths as f64)
}

/// Kolmogorov distance between `R(t) − u` under the diffusion scaling
/// `λ → λ'` and the Gaussian with the same mean `λμρt` and variance
/// `λ E X² t`, for each `λ'` in `lambda_list`. Requires `α = 1`.
pub fn diffusion_limit_check(
    m: &RiskModel,
    lambda_list: &[f64],
    t: f64,
    n_paths: usize,
    cfg: &McConfig,
) -> Result<Vec<f64>> {
    m.validate()?;
    if m.alpha != 1.0 {
        return domain(format!(
            "the diffusion limit check runs on the classical clock (alpha = 1), got {}",
            m.alpha
        ));
    }
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    let mean = m.lambda * m.mu * m.rho * t;
    let sd = (m.lambda * m.claims.ex2() * t).sqrt();
    let normal_cdf =
        |x: f64| 0.5 * statrs::function::erf::erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2));
    lambda_list
        .iter()
        .enumerate()
        .map(|(i, &lam)| {
            check_rate(lam)?;
            let scaled = m.diffusion_scaled(lam / m.lambda)?;
            let c = scaled.premium_rate();
            let sample = map_paths(&cfg.derived(i as u64), n_paths, |st| {
                let mut rng = st.rng();
                let n = poisson_draw(scaled.lambda * t, &mut rng);
                c * t - scaled.claims.sample_sum(n, &mut rng)
            });
            Ok(ks_one_sample(&sample, normal_cdf).statistic)
        })
        .collect()
}

/// Ruin probabilities for the non-homogeneous surplus computed two ways.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    /// Direct simulation of `u + μ(1+ρ)Λ(Y(s)) − Σ_{i ≤ N(Λ(Y(s)))} X_i`, `s ≤ t`.
    pub direct: RuinEstimate,
    /// Unit-rate classical surplus run to operational horizon `Λ(Y_α(t))`.
    pub reduced: RuinEstimate,
    pub warning: Option<String>,
}

/// Non-homogeneous ruin on `[0, t]` against its homogeneous reduction. The
/// rate function takes the place of `λ`; `m.lambda` is not used. At `α = 1`
/// the reduced horizon is the deterministic `Λ(t)`.
pub fn nonhomogeneous_ruin_reduction(
    m: &RiskModel,
    rate: &RateFunction,
    v: f64,
    t: f64,
    n_paths: usize,
    cfg: &McConfig,
) -> Result<ReductionReport> {
    m.validate()?;
    if !(t > 0.0) || !t.is_finite() || n_paths == 0 {
        return domain("reduction check needs a finite t > 0 and n_paths > 0");
    }
    rate.inverse(0.5 * rate.cumulative(t).max(f64::MIN_POSITIVE))?;
    let c = m.mu * (1.0 + m.rho);
    let ruined_at = |x: f64| m.u + x <= v;

    let direct = map_paths(cfg, n_paths, |st| -> Result<bool> {
        let mut op = st.sub(OP_STREAM);
        let mut cl = st.sub(CLAIM_STREAM);
        let mut ck = st.sub(CLOCK_STREAM);
        let (mut e, mut w, mut clock, mut claims) = (0.0, 0.0, 0.0, 0.0);
        loop {
            let gap: f64 = Exp1.sample(&mut op);
            e += gap;
            if e >= rate.supremum() {
                return Ok(false);
            }
            let w_next = rate.inverse(e)?;
            clock += clock_increment(m.alpha, w_next - w, &mut ck);
            w = w_next;
            if clock > t {
                return Ok(false);
            }
            claims += m.claims.sample(&mut cl);
            if ruined_at(c * e - claims) {
                return Ok(true);
            }
        }
    });
    let reduced = map_paths(&cfg.derived(0x4e48), n_paths, |st| {
        let mut op = st.sub(OP_STREAM);
        let mut cl = st.sub(CLAIM_STREAM);
        let mut ck = st.sub(CLOCK_STREAM);
        let h = rate.cumulative(sample_inverse_marginal(m.alpha, t, &mut ck));
        let (mut e, mut claims) = (0.0, 0.0);
        loop {
            let gap: f64 = Exp1.sample(&mut op);
            e += gap;
            if e > h {
                return false;
            }
            claims += m.claims.sample(&mut cl);
            if ruined_at(c * e - claims) {
                return true;
            }
        }
    });
    let direct = direct.into_iter().collect::<Result<Vec<_>>>()?;
    let count = |v: &[bool]| v.iter().filter(|b| **b).count();
    let warning = rate.is_bounded().then(|| {
        format!(
            "cumulative rate {} is bounded (sup = {}); the reduction to a homogeneous process assumes an unbounded rate",
            rate.label(),
            rate.supremum()
        )
    });
    Ok(ReductionReport {
        direct: RuinEstimate::from_count(count(&direct), n_paths, t, 0.0),
        reduced: RuinEstimate::from_count(count(&reduced), n_paths, t, 0.0),
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claim_law_moments() {
        let e = ClaimLaw::exponential(2.0).unwrap();
        assert_eq!(e.ex2(), 8.0);
        assert_eq!(e.h_max(), 0.5);
        assert!(ClaimLaw::pareto(2.0, 1.0).is_err());
        let p = ClaimLaw::pareto(3.0, 1.0).unwrap();
        assert!((p.mean() - 1.5).abs() < 1e-15);
        assert!((p.ex2() - 3.0).abs() < 1e-15);
        assert!(p.mgf(0.1).is_err());
        assert_eq!(ClaimLaw::point(1.0).unwrap().h_max(), f64::INFINITY);
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "exp:mean=1",
            "lognorm:mlog=0,slog=0.5",
            "pareto:shape=2.5,scale=1",
            "point:value=1",
        ] {
            let law: ClaimLaw = s.parse().unwrap();
            assert_eq!(law.to_string(), s);
        }
        assert!("exp".parse::<ClaimLaw>().is_err());
        assert!("gamma:shape=2".parse::<ClaimLaw>().is_err());
        assert!("exp:mean=1,scale=2".parse::<ClaimLaw>().is_err());
    }

    #[test]
    fn adjustment_coefficient_solves_lundberg() {
        let law = ClaimLaw::point(1.0).unwrap();
        let r = law.adjustment_coefficient(0.2).unwrap();
        assert!((r.exp() - 1.0 - 1.2 * r).abs() < 1e-12);
        assert!(ClaimLaw::lognormal(0.0, 1.0)
            .unwrap()
            .adjustment_coefficient(0.2)
            .is_none());
    }
}

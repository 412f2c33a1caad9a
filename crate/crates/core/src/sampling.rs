//! Random variates and paths for the stable subordinator `L_α`, its inverse
//! `Y_α` and Mittag-Leffler waiting times.
//!
//! All samplers take a caller-owned generator. [`RngStream`] is the
//! reproducibility contract: one `(seed, stream_id)` pair per Monte Carlo
//! path, with a handful of independent sub-streams inside each path.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma, Open01};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::specfun::{check_alpha, check_alpha_open};

/// Identifies an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream_id);
        r
    }

    /// Generator for sub-stream `k` of this stream. Sub-streams start 2^56
    /// words apart, far beyond what a single path consumes.
    pub fn sub(&self, k: u8) -> ChaCha8Rng {
        let mut r = self.rng();
        r.set_word_pos(u128::from(k) << 56);
        r
    }
}

/// Parameters of a totally skewed stable law used as a subordinator increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableParams {
    pub alpha: f64,
    pub beta_skew: f64,
    pub gamma_scale: f64,
    pub delta_shift: f64,
}

impl StableParams {
    pub fn new(alpha: f64, gamma_scale: f64) -> Result<Self> {
        check_alpha_open(alpha)?;
        if !(gamma_scale > 0.0) || !gamma_scale.is_finite() {
            return domain(format!("stable scale must be positive, got {gamma_scale}"));
        }
        Ok(Self {
            alpha,
            beta_skew: 1.0,
            gamma_scale,
            delta_shift: 0.0,
        })
    }

    /// Law of `L_α(Δt)`: `γ^α = Δt·cos(πα/2)`.
    pub fn for_increment(alpha: f64, dt: f64) -> Result<Self> {
        check_alpha_open(alpha)?;
        if !(dt > 0.0) {
            return domain(format!("increment length must be positive, got {dt}"));
        }
        Self::new(alpha, (dt * (PI * alpha / 2.0).cos()).powf(1.0 / alpha))
    }

    /// Laplace exponent coefficient `c` in `E e^{-sX} = exp(-c s^α)`.
    pub fn laplace_scale(&self) -> f64 {
        self.gamma_scale.powf(self.alpha) / (PI * self.alpha / 2.0).cos()
    }
}

/// Standard one-sided stable variate, `E e^{-sS} = exp(-s^α)`, by Kanter's
/// representation `S = sin(αU)/sin(U)^{1/α} · (sin((1-α)U)/E)^{(1-α)/α}`.
#[inline]
pub fn standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = PI * open01(rng);
    let e: f64 = Exp1.sample(rng);
    let s_au = (alpha * u).sin();
    let s_u = u.sin();
    let s_bu = ((1.0 - alpha) * u).sin();
    s_au / s_u.powf(1.0 / alpha) * (s_bu / e).powf((1.0 - alpha) / alpha)
}

#[inline]
fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Distribution::<f64>::sample(&Open01, rng)
}

/// Positive stable variate with Laplace transform `exp(-(γ^α/cos(πα/2)) s^α)`.
pub fn sample_stable<R: Rng + ?Sized>(p: &StableParams, rng: &mut R) -> Result<f64> {
    check_alpha_open(p.alpha)?;
    if p.beta_skew != 1.0 || p.delta_shift != 0.0 {
        return domain("subordinator increments need beta_skew = 1 and delta_shift = 0");
    }
    Ok(p.laplace_scale().powf(1.0 / p.alpha) * standard_stable(p.alpha, rng))
}

/// Mittag-Leffler waiting time `T = (E/λ)^{1/α} S`, `P(T > t) = E_α(-λt^α)`.
pub fn sample_ml_waiting<R: Rng + ?Sized>(alpha: f64, lambda: f64, rng: &mut R) -> Result<f64> {
    check_alpha(alpha)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("rate must be positive, got {lambda}"));
    }
    Ok(ml_waiting_unchecked(alpha, lambda, rng))
}

#[inline]
pub(crate) fn ml_waiting_unchecked<R: Rng + ?Sized>(alpha: f64, lambda: f64, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        return e / lambda;
    }
    (e / lambda).powf(1.0 / alpha) * standard_stable(alpha, rng)
}

/// Increment of `L_α` over operational time `du`; equals `du` when `α = 1`.
#[inline]
pub(crate) fn clock_increment<R: Rng + ?Sized>(alpha: f64, du: f64, rng: &mut R) -> f64 {
    if alpha == 1.0 {
        du
    } else {
        du.powf(1.0 / alpha) * standard_stable(alpha, rng)
    }
}

/// Exact draw of `Y_α(t) = (t/S)^α`.
pub fn sample_inverse_marginal<R: Rng + ?Sized>(alpha: f64, t: f64, rng: &mut R) -> f64 {
    if alpha == 1.0 || t == 0.0 {
        return t;
    }
    (t / standard_stable(alpha, rng)).powf(alpha)
}

/// Grid-sampled path of the stable subordinator: `values[n] = L_α(n·step)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubordinatorPath {
    pub step: f64,
    pub values: Vec<f64>,
}

impl SubordinatorPath {
    pub fn horizon(&self) -> f64 {
        *self.values.last().expect("path has at least one point")
    }
}

/// Cumulative sum of `n_steps` iid increments `L_α(u_max/n_steps)`.
pub fn simulate_subordinator<R: Rng + ?Sized>(
    alpha: f64,
    u_max: f64,
    n_steps: usize,
    rng: &mut R,
) -> Result<SubordinatorPath> {
    check_alpha(alpha)?;
    if n_steps < 1 || !(u_max > 0.0) {
        return domain(format!(
            "need n_steps >= 1 and u_max > 0, got {n_steps}, {u_max}"
        ));
    }
    let step = u_max / n_steps as f64;
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(0.0);
    let mut l = 0.0;
    for _ in 0..n_steps {
        l += clock_increment(alpha, step, rng);
        values.push(l);
    }
    Ok(SubordinatorPath { step, values })
}

/// First-passage inversion `Y(t) = step · min{n : values[n] > t}`.
/// The result overestimates the continuous inverse by at most one step.
pub fn inverse_at(path: &SubordinatorPath, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("inverse time must be nonnegative, got {t}"));
    }
    if t >= path.horizon() {
        return Err(Error::Horizon {
            requested: t,
            available: path.horizon(),
        });
    }
    let n = path.values.partition_point(|&v| v <= t);
    Ok(n as f64 * path.step)
}

/// Default operational step `10^{-3} · max(t)^α`.
pub fn default_inverse_step(alpha: f64, t_max: f64) -> f64 {
    1e-3 * t_max.max(f64::MIN_POSITIVE).powf(alpha)
}

/// One trajectory of `Y_α` on an ordered grid, read off a single subordinator
/// path that is extended on the fly until it passes `max(t_grid)`.
pub fn simulate_inverse_grid<R: Rng + ?Sized>(
    alpha: f64,
    t_grid: &[f64],
    step: Option<f64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_grid(t_grid)?;
    let t_max = t_grid.last().copied().unwrap_or(0.0);
    let step = step.unwrap_or_else(|| default_inverse_step(alpha, t_max));
    if !(step > 0.0) {
        return domain(format!("step must be positive, got {step}"));
    }
    let inc_scale = step.powf(1.0 / alpha);
    let mut n: u64 = 0;
    let mut level = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        while level <= t {
            level += if alpha == 1.0 {
                step
            } else {
                inc_scale * standard_stable(alpha, rng)
            };
            n += 1;
        }
        out.push(n as f64 * step);
    }
    Ok(out)
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return domain("time grid must contain finite nonnegative values");
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return domain("time grid must be nondecreasing");
    }
    Ok(())
}

/// Exact sampler for `Y_α` at increasing calendar times.
///
/// It uses the first-passage decomposition of `L_α` at a level `r`: the
/// undershoot `x = L(Y(r)-)` is `r·Beta(α, 1-α)`, the jump across `r` is
/// `(r - x)·V^{-1/α}` with `V` uniform, and `Y(r)` given `x` is `x^α` times a
/// size-biased Mittag-Leffler variable. The process then restarts afresh from
/// the overshoot level.
#[derive(Debug, Clone)]
pub struct InverseSampler {
    alpha: f64,
    undershoot: Option<Beta<f64>>,
    shape: Option<Gamma<f64>>,
    ln_a0: f64,
}

impl InverseSampler {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if alpha == 1.0 {
            return Ok(Self {
                alpha,
                undershoot: None,
                shape: None,
                ln_a0: 0.0,
            });
        }
        let undershoot = Beta::new(alpha, 1.0 - alpha).map_err(|e| Error::Domain(e.to_string()))?;
        let shape = Gamma::new(2.0 - alpha, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
        let q = alpha / (1.0 - alpha);
        Ok(Self {
            alpha,
            undershoot: Some(undershoot),
            shape: Some(shape),
            ln_a0: q * alpha.ln() + (1.0 - alpha).ln(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Draw from the Mittag-Leffler law of `Y_α(1)` size-biased by its value.
    pub fn size_biased_ml<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.alpha;
        let q = a / (1.0 - a);
        // Zolotarev angle with density proportional to A(φ)^{α-1}; A is increasing, so A(0+) bounds it.
        let ln_a = loop {
            let phi: f64 = PI * open01(rng);
            let ln_a = q * (a * phi).sin().ln() + ((1.0 - a) * phi).sin().ln()
                - phi.sin().ln() / (1.0 - a);
            let accept: f64 = rng.random();
            if accept.ln() <= (a - 1.0) * (ln_a - self.ln_a0) {
                break ln_a;
            }
        };
        let e = self.shape.as_ref().expect("alpha < 1").sample(rng);
        ((1.0 - a) * (e.ln() - ln_a)).exp()
    }

    /// Starts a fresh trajectory at `Y(0) = 0`.
    pub fn walker(&self) -> InverseWalker<'_> {
        InverseWalker {
            sampler: self,
            op_time: 0.0,
            level: 0.0,
        }
    }

    /// `Y_α` at each time of a nondecreasing grid, jointly exact.
    pub fn sample_at<R: Rng + ?Sized>(&self, times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        check_grid(times)?;
        let mut w = self.walker();
        Ok(times.iter().map(|&t| w.advance(t, rng)).collect())
    }
}

/// Stateful trajectory of `Y_α` driven by [`InverseSampler`].
#[derive(Debug, Clone)]
pub struct InverseWalker<'a> {
    sampler: &'a InverseSampler,
    op_time: f64,
    level: f64,
}

impl InverseWalker<'_> {
    /// Value of `Y_α(t)`; calls must use nondecreasing `t`.
    pub fn advance<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> f64 {
        let s = self.sampler;
        if s.alpha == 1.0 {
            self.op_time = self.op_time.max(t);
            return self.op_time;
        }
        if t < self.level {
            return self.op_time;
        }
        let r = t - self.level;
        let x = r * s.undershoot.as_ref().expect("alpha < 1").sample(rng);
        let v = open01(rng);
        let jump = (r - x) * v.powf(-1.0 / s.alpha);
        if x > 0.0 {
            self.op_time += x.powf(s.alpha) * s.size_biased_ml(rng);
        }
        self.level += x + jump;
        self.op_time
    }

    pub fn op_time(&self) -> f64 {
        self.op_time
    }
}

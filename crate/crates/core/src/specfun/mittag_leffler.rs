use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use super::{check_alpha, MLParams, Tolerance};
use crate::error::{accuracy, domain, Result};
use crate::quad::{integrate_pieces, QuadOptions};

const EPS: f64 = f64::EPSILON;

/// Running sum of a series together with a rounding-error budget.
struct Acc {
    sum: f64,
    comp: f64,
    err: f64,
}

impl Acc {
    fn new() -> Self {
        Self {
            sum: 0.0,
            comp: 0.0,
            err: 0.0,
        }
    }

    fn add(&mut self, t: f64, rel_err: f64) {
        let s = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - s) + t;
        } else {
            self.comp += (t - s) + self.sum;
        }
        self.sum = s;
        self.err += t.abs() * rel_err;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums `Σ s_k |t_k|` where `term(k)` yields `(|t_k|, relative error of t_k)`
/// and `s_k = (-1)^k` when `alternating`. Terms must be unimodal in `k`.
fn sum_series(
    alternating: bool,
    tol: &Tolerance,
    label: &str,
    mut term: impl FnMut(usize) -> (f64, f64),
) -> Result<f64> {
    let mut acc = Acc::new();
    let mut prev = f64::NEG_INFINITY;
    let mut past_peak = false;
    for k in 0..tol.max_terms {
        let (mag, rel) = term(k);
        if !mag.is_finite() {
            return accuracy(format!("{label}: series term overflowed at k = {k}"));
        }
        let t = if alternating && k % 2 == 1 { -mag } else { mag };
        acc.add(t, rel);
        if mag < prev {
            past_peak = true;
        }
        let v = acc.value();
        if past_peak && (mag <= 1e-17 * v.abs() || mag < 1e-300) {
            if !v.is_finite() {
                return accuracy(format!("{label}: series sum overflowed"));
            }
            if acc.err > tol.target(v) {
                return accuracy(format!(
                    "{label}: cancellation leaves error {:e} above tolerance (value {v:e})",
                    acc.err
                ));
            }
            return Ok(v);
        }
        prev = mag;
    }
    accuracy(format!(
        "{label}: series did not converge within {} terms",
        tol.max_terms
    ))
}

/// Computes `exp(ln_mag)` accurately. When the pieces are representable the
/// value is formed directly from `direct()`, which has smaller rounding error
/// than exponentiating a large logarithm.
fn term_value(ln_mag: f64, ln_parts: f64, direct: impl FnOnce() -> Option<f64>) -> (f64, f64) {
    if ln_mag < -745.0 {
        return (0.0, 0.0);
    }
    if let Some(v) = direct() {
        if v.is_finite() && v > 0.0 {
            return (v, 6.0 * EPS);
        }
    }
    (ln_mag.exp(), EPS * (ln_parts + 4.0))
}

/// Power series of `E_α(z)`, valid for every `z` but subject to cancellation
/// for large negative arguments.
pub fn ml_series(alpha: f64, z: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha(alpha)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    let lz = z.abs().ln();
    let az = z.abs();
    sum_series(z < 0.0, tol, "Mittag-Leffler series", |k| {
        let kf = k as f64;
        let g_arg = alpha * kf + 1.0;
        let lg = ln_gamma(g_arg);
        let ln_mag = kf * lz - lg;
        term_value(ln_mag, (kf * lz).abs() + lg.abs(), || {
            (g_arg < 170.0 && kf * lz < 700.0).then(|| az.powi(k as i32) / gamma(g_arg))
        })
    })
}

/// Integral representation of `E_α(-x)` for `x > 0` and `α < 1`:
/// `E_α(-x) = sin(απ)/(απ) ∫_0^∞ exp(-(xw)^{1/α}) / (w² + 2w cos απ + 1) dw`.
///
/// The substitution `w = s·cot φ − c` with `(s, c) = (sin απ, cos απ)` flattens
/// the kernel, which is a spike of width `s` at `w = 1` when `α → 1`, giving
/// `(1/(απ)) ∫_0^{atan2(s, c)} exp(-(x w(φ))^{1/α}) dφ`.
pub fn ml_integral(alpha: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!(
            "integral representation needs alpha in (0, 1), got {alpha}"
        ));
    }
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!(
            "integral representation needs finite x > 0, got {x}"
        ));
    }
    let (s, c) = (alpha * PI).sin_cos();
    let inv = 1.0 / alpha;
    let w_max = 40f64.powf(alpha) / x;
    let phi = |w: f64| s.atan2(w + c);
    let f = |p: f64| {
        let (sp, cp) = p.sin_cos();
        let w = (s * cp / sp - c).max(0.0);
        let e = (x * w).powf(inv);
        if e > 745.0 {
            0.0
        } else {
            (-e).exp()
        }
    };
    let mut pts = vec![phi(w_max), phi(0.0)];
    if c < 0.0 && -c < w_max {
        pts.push(phi(-c));
    }
    if 1.0 / x < w_max {
        pts.push(phi(1.0 / x));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let pre = 1.0 / (alpha * PI);
    let opts = QuadOptions::with_tol(0.05 * tol.abs_tol / pre, 1e-13);
    let r = integrate_pieces(f, &pts, opts)?;
    Ok(pre * r.value)
}

/// Magnitude `Z*` below which `E_α(-Z*)` is still summed as a power series.
///
/// The absolute rounding error of the alternating series is about
/// a few `ε·E_α(|z|) ≈ ε·exp(|z|^{1/α})/α`; the switch keeps the error budget
/// of [`ml_series`] below `abs_tol`.
pub fn ml_crossover(alpha: f64, tol: &Tolerance) -> f64 {
    let y = (alpha * tol.abs_tol / (16.0 * EPS)).ln().max(1.0);
    y.powf(alpha).min(5.0)
}

/// The Mittag-Leffler function `E_α(z) = Σ z^k / Γ(αk + 1)`.
///
/// Uses the power series for `z ≥ -Z*` and the integral representation
/// below, see [`ml_crossover`].
pub fn mittag_leffler(alpha: f64, z: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha(alpha)?;
    if !z.is_finite() {
        return domain(format!("Mittag-Leffler argument must be finite, got {z}"));
    }
    if alpha == 1.0 {
        return Ok(z.exp());
    }
    if z >= -ml_crossover(alpha, tol) {
        ml_series(alpha, z, tol)
    } else {
        ml_integral(alpha, -z, tol)
    }
}

/// `ln E_α(z)` for `z ≥ 0`, stable for arguments where `E_α` overflows.
pub fn ln_mittag_leffler(alpha: f64, z: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha(alpha)?;
    if !(z >= 0.0) || !z.is_finite() {
        return domain(format!("ln_mittag_leffler needs finite z >= 0, got {z}"));
    }
    if alpha == 1.0 {
        return Ok(z);
    }
    let r = z.powf(1.0 / alpha);
    if r > 50.0 {
        // E_α(z) = exp(z^{1/α})/α minus an algebraic tail that is below e^{-50} relative.
        return Ok(r - alpha.ln());
    }
    Ok(ml_series(alpha, z, tol)?.ln())
}

/// Two-parameter function `E_{α,β}(z)`.
pub fn mittag_leffler_two(alpha: f64, beta: f64, z: f64, tol: &Tolerance) -> Result<f64> {
    generalized_ml(&MLParams::new(alpha, beta, 1.0)?, z, tol)
}

/// Three-parameter (Prabhakar) function
/// `E^γ_{α,β}(z) = Σ (γ)_j z^j / (j! Γ(αj + β))`.
pub fn generalized_ml(p: &MLParams, z: f64, tol: &Tolerance) -> Result<f64> {
    let MLParams {
        alpha,
        beta,
        gamma_shape: g,
    } = *p;
    if !z.is_finite() {
        return domain(format!("argument must be finite, got {z}"));
    }
    if beta == 1.0 && g == 1.0 {
        return mittag_leffler(alpha, z, tol);
    }
    if z == 0.0 {
        return Ok(1.0 / gamma(beta));
    }
    let lz = z.abs().ln();
    let lg0 = ln_gamma(g);
    let az = z.abs();
    // Rising-factorial coefficient (γ)_j / j! kept by recurrence for the direct path.
    let mut coef = 1.0;
    sum_series(z < 0.0, tol, "generalized Mittag-Leffler series", |j| {
        let jf = j as f64;
        if j > 0 {
            coef *= (g + jf - 1.0) / jf;
        }
        let g_arg = alpha * jf + beta;
        let l_poch = ln_gamma(g + jf) - lg0 - ln_gamma(jf + 1.0);
        let lgd = ln_gamma(g_arg);
        let ln_mag = l_poch + jf * lz - lgd;
        let (v, rel) = term_value(ln_mag, l_poch.abs() + (jf * lz).abs() + lgd.abs(), || {
            (g_arg < 170.0 && jf * lz < 700.0 && coef.is_finite())
                .then(|| coef * az.powi(j as i32) / gamma(g_arg))
        });
        (v, rel + jf * EPS)
    })
}

/// `k`-th derivative `E_α^{(k)}(z) = Σ_j (j+k)!/j! z^j / Γ(α(j+k) + 1)`.
pub fn ml_derivative(alpha: f64, k: u32, z: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha(alpha)?;
    if !z.is_finite() {
        return domain(format!("argument must be finite, got {z}"));
    }
    if alpha == 1.0 {
        return Ok(z.exp());
    }
    if k == 0 {
        return mittag_leffler(alpha, z, tol);
    }
    let kf = k as f64;
    let lz = if z == 0.0 {
        f64::NEG_INFINITY
    } else {
        z.abs().ln()
    };
    sum_series(z < 0.0, tol, "Mittag-Leffler derivative series", |j| {
        let jf = j as f64;
        if j > 0 && z == 0.0 {
            return (0.0, 0.0);
        }
        let l_fact = ln_gamma(jf + kf + 1.0) - ln_gamma(jf + 1.0);
        let lgd = ln_gamma(alpha * (jf + kf) + 1.0);
        let lp = if j == 0 { 0.0 } else { jf * lz };
        let ln_mag = l_fact + lp - lgd;
        term_value(ln_mag, l_fact.abs() + lp.abs() + lgd.abs(), || None)
    })
}

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use super::{check_alpha_open, Tolerance};
use crate::error::{accuracy, domain, Result};
use crate::quad::{integrate_pieces, QuadOptions};

/// Zolotarev's function `A(φ)` in log form,
/// `ln A = q ln sin(αφ) + ln sin((1-α)φ) - ln sin(φ)/(1-α)` with `q = α/(1-α)`.
fn ln_zolotarev_a(alpha: f64, phi: f64) -> f64 {
    let q = alpha / (1.0 - alpha);
    q * (alpha * phi).sin().ln() + ((1.0 - alpha) * phi).sin().ln() - phi.sin().ln() / (1.0 - alpha)
}

/// Density of the one-sided stable law with Laplace transform `exp(-s^α)`
/// via the large-`x` series `(1/π) Σ (-1)^{k+1} Γ(αk+1)/k! sin(παk) x^{-αk-1}`.
pub fn stable_density_series(alpha: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(x > 0.0) {
        return domain(format!("stable density needs x > 0, got {x}"));
    }
    let lx = x.ln();
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..=tol.max_terms {
        let kf = k as f64;
        let ln_mag = ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0) - (alpha * kf + 1.0) * lx;
        let mag = ln_mag.exp();
        let t = mag * (PI * alpha * kf).sin();
        sum += if k % 2 == 1 { t } else { -t };
        abs_sum += mag;
        if mag < prev && mag < 1e-17 * sum.abs() {
            let err = 8.0 * f64::EPSILON * abs_sum;
            if err > tol.target(sum / PI) {
                return accuracy(format!("stable density series loses accuracy at x = {x}"));
            }
            return Ok(sum / PI);
        }
        prev = mag;
    }
    accuracy(format!("stable density series did not converge at x = {x}"))
}

/// Same density from Zolotarev's integral over `φ ∈ (0, π)`:
/// `g(x) = (q/(πx)) ∫ A(φ) y exp(-A(φ) y) dφ`, `y = x^{-q}`, `q = α/(1-α)`.
pub fn stable_density_integral(alpha: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(x > 0.0) {
        return domain(format!("stable density needs x > 0, got {x}"));
    }
    let q = alpha / (1.0 - alpha);
    let ln_y = -q * x.ln();
    let pre = q / (PI * x);
    let ln_a0 = q * alpha.ln() + (1.0 - alpha).ln();
    // u e^{-u} with u = A y is largest at u = 1; A is increasing in φ.
    let u0 = (ln_a0 + ln_y).exp();
    let peak = if u0 >= 1.0 {
        (ln_a0 + ln_y - u0).exp()
    } else {
        (-1.0f64).exp()
    };
    if pre * peak * PI < 1e-300 {
        return Ok(0.0);
    }
    let h = |phi: f64| {
        let ln_u = ln_zolotarev_a(alpha, phi) + ln_y;
        if ln_u > 7.0 {
            let u = ln_u.exp();
            if u > 745.0 {
                return 0.0;
            }
            (ln_u - u).exp()
        } else {
            let u = ln_u.exp();
            u * (-u).exp()
        }
    };
    let mut pts = vec![0.0, PI];
    if u0 < 1.0 {
        // Locate A(φ*) y = 1 by bisection.
        let (mut lo, mut hi) = (0.0, PI);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ln_zolotarev_a(alpha, mid) + ln_y < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let star = 0.5 * (lo + hi);
        if star > 0.0 && star < PI {
            pts.insert(1, star);
        }
    }
    let opts = QuadOptions::with_tol((0.01 * tol.abs_tol / pre).max(1e-300), 1e-12);
    let r = integrate_pieces(h, &pts, opts)?;
    Ok(pre * r.value)
}

/// Density `g_α(x)` of the one-sided stable law `E e^{-sS} = e^{-s^α}`.
///
/// Large `x` uses the series expansion; small and moderate `x`, where that
/// series cancels badly, use Zolotarev's integral. Results below `1e-300`
/// flush to zero.
pub fn stable_density(alpha: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("stable density needs finite x > 0, got {x}"));
    }
    if x.powf(-alpha) <= 0.25 {
        if let Ok(v) = stable_density_series(alpha, x, tol) {
            return Ok(v);
        }
    }
    stable_density_integral(alpha, x, tol)
}

/// Density `f_α(t, x) = (t/α) x^{-1-1/α} g_α(t x^{-1/α})` of `Y_α(t)`.
pub fn inverse_subordinator_density(alpha: f64, t: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(t > 0.0) || !(x >= 0.0) || !t.is_finite() || !x.is_finite() {
        return domain(format!(
            "inverse subordinator density needs t > 0 and x >= 0, got t = {t}, x = {x}"
        ));
    }
    if x == 0.0 {
        return Ok(t.powf(-alpha) / gamma(1.0 - alpha));
    }
    let arg = t * x.powf(-1.0 / alpha);
    if arg == 0.0 {
        return Ok(0.0);
    }
    let g = stable_density(alpha, arg, tol)?;
    Ok(t / alpha * x.powf(-1.0 - 1.0 / alpha) * g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levy_half_closed_form() {
        let t = Tolerance::default();
        for &x in &[0.01f64, 0.1, 0.5, 1.0, 3.0, 20.0, 500.0] {
            // Laplace transform exp(-sqrt(s)) is the Lévy law with scale 1/2.
            let expect = (-1.0 / (4.0 * x)).exp() / (2.0 * PI.sqrt() * x.powf(1.5));
            let got = stable_density(0.5, x, &t).unwrap();
            assert!(
                (got - expect).abs() <= 1e-10 * expect + 1e-300,
                "x={x}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn series_and_integral_agree() {
        let t = Tolerance::default();
        for &a in &[0.3, 0.6, 0.9] {
            for &x in &[50.0, 200.0] {
                let s = stable_density_series(a, x, &t).unwrap();
                let i = stable_density_integral(a, x, &t).unwrap();
                assert!((s - i).abs() < 1e-9 * s, "a={a} x={x}: {s} vs {i}");
            }
        }
    }

    #[test]
    fn tiny_argument_underflows_to_zero() {
        assert_eq!(
            stable_density(0.5, 1e-6, &Tolerance::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn nonpositive_argument_rejected() {
        assert!(stable_density(0.5, 0.0, &Tolerance::default()).is_err());
        assert!(stable_density(1.0, 1.0, &Tolerance::default()).is_err());
    }
}

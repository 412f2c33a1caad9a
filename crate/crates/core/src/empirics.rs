//! Inter-arrival data: loading, empirical survival curves, exponential and
//! Mittag-Leffler fits, and CSV/SVG export of the comparison.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::specfun::{mittag_leffler, Tolerance};
use crate::stats::ks_one_sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Seconds,
    Days,
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" | "sec" | "seconds" => Ok(Self::Seconds),
            "d" | "days" => Ok(Self::Days),
            other => Err(Error::Input(format!(
                "unknown time unit `{other}`; use seconds or days"
            ))),
        }
    }
}

/// Positive gaps between consecutive events.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterArrivalSeries {
    pub gaps: Vec<f64>,
    pub unit: TimeUnit,
}

impl InterArrivalSeries {
    pub fn new(gaps: Vec<f64>, unit: TimeUnit) -> Result<Self> {
        if gaps.is_empty() {
            return domain("inter-arrival series is empty");
        }
        if let Some((i, g)) = gaps
            .iter()
            .enumerate()
            .find(|(_, g)| !(**g > 0.0) || !g.is_finite())
        {
            return domain(format!(
                "gap {} must be positive and finite, got {g}",
                i + 1
            ));
        }
        Ok(Self { gaps, unit })
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn mean(&self) -> f64 {
        crate::stats::mean(&self.gaps)
    }

    fn sorted(&self) -> Vec<f64> {
        let mut s = self.gaps.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Reads column `column` of a headed CSV file. Errors name the file line.
pub fn load_interarrivals(path: &Path, column: &str, unit: TimeUnit) -> Result<InterArrivalSeries> {
    let mut rdr = reader(path)?;
    let idx = rdr
        .headers()?
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| {
            Error::Input(format!("column `{column}` not found in {}", path.display()))
        })?;
    let mut gaps = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = rec
            .get(idx)
            .ok_or_else(|| Error::Input(format!("line {line}: missing field `{column}`")))?
            .trim();
        let v: f64 = field.parse().map_err(|_| {
            Error::Input(format!("line {line}: cannot parse `{field}` as a number"))
        })?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Input(format!(
                "line {line}: inter-arrival time must be positive, got {v}"
            )));
        }
        gaps.push(v);
    }
    if gaps.is_empty() {
        return Err(Error::Input(format!("{} has no data rows", path.display())));
    }
    InterArrivalSeries::new(gaps, unit)
}

/// Headed CSV reader that skips `#` comment lines.
fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?)
}

/// Writes one gap per row under the header `column`.
pub fn write_interarrivals(series: &InterArrivalSeries, path: &Path, column: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([column])?;
    for g in &series.gaps {
        w.write_record([format_num(*g)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub t: Vec<f64>,
    pub survival: Vec<f64>,
}

/// `S(t) = #{gaps > t}/n` on an increasing grid.
pub fn empirical_survival(s: &InterArrivalSeries, grid: &[f64]) -> Result<SurvivalCurve> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
        return domain("survival grid must be finite and strictly increasing");
    }
    let sorted = s.sorted();
    let n = sorted.len() as f64;
    let survival = grid
        .iter()
        .map(|&t| (sorted.len() - sorted.partition_point(|&g| g <= t)) as f64 / n)
        .collect();
    Ok(SurvivalCurve {
        t: grid.to_vec(),
        survival,
    })
}

/// Moment-matched exponential rate, `1/mean`.
pub fn fit_exponential(s: &InterArrivalSeries) -> f64 {
    1.0 / s.mean()
}

/// `P(T > t) = E_α(−λt^α)`.
pub fn ml_survival(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    mittag_leffler(alpha, -lambda * t.powf(alpha), &Tolerance::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MlFit {
    pub alpha: f64,
    pub lambda: f64,
    /// Sum of squared log-survival residuals at the optimum.
    pub residual: f64,
    pub iterations: usize,
}

/// Least squares of `ln S_emp(t) − ln E_α(−λt^α)` over the 1%–99% sample
/// quantiles, minimized over `(logit α, ln λ)` by Nelder–Mead.
pub fn fit_mittag_leffler(s: &InterArrivalSeries) -> Result<MlFit> {
    let sorted = s.sorted();
    let n = sorted.len();
    if n < 10 {
        return domain(format!(
            "Mittag-Leffler fit needs at least 10 gaps, got {n}"
        ));
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for j in 1..=99 {
        let k = ((j as f64 / 100.0) * n as f64).ceil() as usize;
        let t = sorted[k.clamp(1, n) - 1];
        let surv = (n - sorted.partition_point(|&g| g <= t)) as f64 / n as f64;
        if surv > 0.0 && pts.last().is_none_or(|p| p.0 < t) {
            pts.push((t, surv.ln()));
        }
    }
    if pts.len() < 3 {
        return Err(Error::Estimation(
            "too few distinct quantiles to fit".into(),
        ));
    }
    let objective = |x: &[f64; 2]| -> f64 {
        let alpha = 1.0 / (1.0 + (-x[0]).exp());
        let lambda = x[1].exp();
        let mut acc = 0.0;
        for &(t, ls) in &pts {
            match ml_survival(alpha, lambda, t) {
                Ok(v) if v > 0.0 => acc += (ls - v.ln()).powi(2),
                _ => return f64::INFINITY,
            }
        }
        acc
    };
    let a0: f64 = 0.8;
    let median = sorted[n / 2];
    let l0 = 2f64.ln() / median.powf(a0);
    let start = [(a0 / (1.0 - a0)).ln(), l0.ln()];
    let (x, fx, iterations) = nelder_mead(objective, start, [0.5, 0.5], 1e-6, 4000)?;
    Ok(MlFit {
        alpha: 1.0 / (1.0 + (-x[0]).exp()),
        lambda: x[1].exp(),
        residual: fx,
        iterations,
    })
}

fn nelder_mead<F: Fn(&[f64; 2]) -> f64>(
    f: F,
    x0: [f64; 2],
    step: [f64; 2],
    rel_tol: f64,
    max_iter: usize,
) -> Result<([f64; 2], f64, usize)> {
    let mut simplex = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut vals = simplex.map(|p| f(&p));
    for it in 0..max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.map(|i| simplex[i]);
        vals = order.map(|i| vals[i]);
        let spread = (vals[2] - vals[0]).abs();
        let size = (0..2)
            .map(|d| {
                (simplex[1][d] - simplex[0][d])
                    .abs()
                    .max((simplex[2][d] - simplex[0][d]).abs())
            })
            .fold(0.0, f64::max);
        if spread <= rel_tol * vals[0].abs().max(1e-12)
            && size <= rel_tol * (1.0 + simplex[0][0].abs().max(simplex[0][1].abs()))
        {
            return Ok((simplex[0], vals[0], it));
        }
        let c = [
            (simplex[0][0] + simplex[1][0]) / 2.0,
            (simplex[0][1] + simplex[1][1]) / 2.0,
        ];
        let along = |t: f64| {
            [
                c[0] + t * (simplex[2][0] - c[0]),
                c[1] + t * (simplex[2][1] - c[1]),
            ]
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            (simplex[2], vals[2]) = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < vals[1] {
            (simplex[2], vals[2]) = (xr, fr);
        } else {
            let xc = if fr < vals[2] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(&xc);
            if fc < vals[2].min(fr) {
                (simplex[2], vals[2]) = (xc, fc);
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        simplex[0][0] + 0.5 * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[i][1] - simplex[0][1]),
                    ];
                    vals[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    Err(Error::Accuracy(format!(
        "Nelder-Mead did not converge in {max_iter} iterations; best residual {} at {:?}",
        vals[best], simplex[best]
    )))
}

/// Kolmogorov distance between the sample and the Mittag-Leffler law, and the
/// 99% band `1.628/√n`.
pub fn kolmogorov_band(s: &InterArrivalSeries, alpha: f64, lambda: f64) -> (f64, f64) {
    let tol = Tolerance::default();
    let d = ks_one_sample(&s.gaps, |t| {
        1.0 - mittag_leffler(alpha, -lambda * t.powf(alpha), &tol).unwrap_or(f64::NAN)
    })
    .statistic;
    (d, 1.628 / (s.len() as f64).sqrt())
}

/// Empirical survival next to the fitted exponential and Mittag-Leffler curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSet {
    pub t: Vec<f64>,
    pub empirical: Vec<f64>,
    pub exponential_model: Vec<f64>,
    pub ml_model: Vec<f64>,
}

/// Fits both models and evaluates all three curves on `grid`.
pub fn compare_curves(s: &InterArrivalSeries, grid: &[f64]) -> Result<(CurveSet, f64, MlFit)> {
    let emp = empirical_survival(s, grid)?;
    let rate = fit_exponential(s);
    let fit = fit_mittag_leffler(s)?;
    let ml = grid
        .iter()
        .map(|&t| ml_survival(fit.alpha, fit.lambda, t))
        .collect::<Result<Vec<_>>>()?;
    let curves = CurveSet {
        t: grid.to_vec(),
        empirical: emp.survival,
        exponential_model: grid.iter().map(|t| (-rate * t).exp()).collect(),
        ml_model: ml,
    };
    Ok((curves, rate, fit))
}

pub const CURVE_HEADER: [&str; 4] = ["t", "empirical", "exponential_model", "ml_model"];

fn format_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the curves as CSV and, when `svg` is given, a log-scale line chart.
pub fn export_curves(curves: &CurveSet, path: &Path, svg: Option<&Path>) -> Result<()> {
    write_curves(curves, fs::File::create(path)?)?;
    if let Some(p) = svg {
        fs::write(p, curves_svg(curves))?;
    }
    Ok(())
}

/// CSV body of [`export_curves`] on any writer.
pub fn write_curves<W: io::Write>(curves: &CurveSet, out: W) -> Result<()> {
    let n = curves.t.len();
    if [
        curves.empirical.len(),
        curves.exponential_model.len(),
        curves.ml_model.len(),
    ]
    .iter()
    .any(|&l| l != n)
    {
        return domain("curve columns have different lengths");
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for i in 0..n {
        w.write_record(
            [
                curves.t[i],
                curves.empirical[i],
                curves.exponential_model[i],
                curves.ml_model[i],
            ]
            .map(format_num),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_curves(path: &Path) -> Result<CurveSet> {
    let mut rdr = reader(path)?;
    if rdr.headers()?.iter().ne(CURVE_HEADER) {
        return Err(Error::Input(format!(
            "{} does not have the curve header",
            path.display()
        )));
    }
    let mut c = CurveSet {
        t: vec![],
        empirical: vec![],
        exponential_model: vec![],
        ml_model: vec![],
    };
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let v = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Input(format!("line {line}: bad number `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if v.len() != 4 {
            return Err(Error::Input(format!("line {line}: expected 4 fields")));
        }
        c.t.push(v[0]);
        c.empirical.push(v[1]);
        c.exponential_model.push(v[2]);
        c.ml_model.push(v[3]);
    }
    Ok(c)
}

/// Line chart of the three curves with a logarithmic ordinate. Points with
/// zero survival are dropped and counted in a footnote.
pub fn curves_svg(c: &CurveSet) -> String {
    let (w, h, pad) = (640.0, 420.0, 50.0);
    let series = [
        ("empirical", &c.empirical, "#222"),
        ("exponential", &c.exponential_model, "#c33"),
        ("Mittag-Leffler", &c.ml_model, "#36c"),
    ];
    let positive = |v: f64| v > 0.0 && v.is_finite();
    let dropped = c.empirical.iter().filter(|v| !positive(**v)).count();
    let floor = series
        .iter()
        .flat_map(|s| s.1.iter().copied())
        .filter(|v| positive(*v))
        .fold(1.0f64, f64::min)
        .log10()
        .floor()
        .min(-1.0);
    let t0 = c.t.first().copied().unwrap_or(0.0);
    let t1 = c.t.last().copied().unwrap_or(1.0).max(t0 + f64::EPSILON);
    let x = |t: f64| pad + (t - t0) / (t1 - t0) * (w - 2.0 * pad);
    let y = |v: f64| pad + (v.log10() / floor) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - pad,
        w - pad,
        h - pad
    );
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}" stroke="black"/>"#,
        h - pad
    );
    for d in 0..=(-floor as i32) {
        let yy = y(10f64.powi(-d));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">1e-{d}</text>"#,
            pad - 4.0,
            yy + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#,
        w / 2.0,
        h - pad / 3.0
    );
    for (k, (name, vals, color)) in series.iter().enumerate() {
        let pts: Vec<String> =
            c.t.iter()
                .zip(vals.iter())
                .filter(|(_, v)| positive(**v))
                .map(|(t, v)| format!("{:.2},{:.2}", x(*t), y(*v)))
                .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            w - pad - 110.0,
            pad + 14.0 * k as f64
        );
    }
    if dropped > 0 {
        let _ = writeln!(
            s,
            r#"<text x="{pad}" y="{}" font-size="10">Note: {dropped} zero-survival point(s) omitted from the log scale.</text>"#,
            h - 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, fx, _) = nelder_mead(
            |p| (p[0] - 1.0).powi(2) + 3.0 * (p[1] + 2.0).powi(2),
            [0.0, 0.0],
            [1.0, 1.0],
            1e-10,
            5000,
        )
        .unwrap();
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 2.0).abs() < 1e-4 && fx < 1e-8);
    }

    #[test]
    fn time_units() {
        assert_eq!("days".parse::<TimeUnit>().unwrap(), TimeUnit::Days);
        assert!("weeks".parse::<TimeUnit>().is_err());
    }
}

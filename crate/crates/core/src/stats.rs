//! Summary statistics and goodness-of-fit tests used by the estimators and
//! the verification suite.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(xs: &[f64]) -> f64 {
    neumaier_sum(xs.iter().copied()) / xs.len() as f64
}

/// Mean, unbiased variance and the standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub var: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let m = mean(xs);
        let var = if n > 1 {
            neumaier_sum(xs.iter().map(|x| (x - m) * (x - m))) / (n - 1) as f64
        } else {
            0.0
        };
        Self { n, mean: m, var }
    }

    pub fn se(&self) -> f64 {
        (self.var / self.n as f64).sqrt()
    }

    /// Standard error of the sample variance, from the fourth central moment.
    pub fn var_se(xs: &[f64]) -> f64 {
        let s = Self::of(xs);
        let m4 = mean(&xs.iter().map(|x| (x - s.mean).powi(4)).collect::<Vec<_>>());
        ((m4 - s.var * s.var) / s.n as f64).max(0.0).sqrt()
    }
}

pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    neumaier_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my))) / (xs.len() - 1) as f64
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / (covariance(xs, xs) * covariance(ys, ys)).sqrt()
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Estimation(
            "regression needs at least two paired points".into(),
        ));
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx = neumaier_sum(x.iter().map(|v| (v - mx) * (v - mx)));
    let sxy = neumaier_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    if sxx == 0.0 {
        return Err(Error::Estimation(
            "regression abscissae are all equal".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if y.iter().any(|v| !(*v > 0.0)) || x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Estimation(
            "log-log regression needs positive values".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lx, &ly)?.0)
}

/// Asymptotic Kolmogorov distribution tail `P(K > lambda)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value for a KS distance `d` with effective sample size `n_eff`, using
/// the small-sample correction of Stephens.
pub fn ks_pvalue(d: f64, n_eff: f64) -> f64 {
    let sn = n_eff.sqrt();
    kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)
}

#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test against a continuous cdf.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> KsResult {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    KsResult {
        statistic: d,
        p_value: ks_pvalue(d, n),
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let n_eff = (na * nb) as f64 / (na + nb) as f64;
    KsResult {
        statistic: d,
        p_value: ks_pvalue(d, n_eff),
    }
}

#[derive(Debug, Clone)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p(stat: f64, dof: usize) -> Result<f64> {
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Estimation(e.to_string()))?;
    Ok(1.0 - dist.cdf(stat))
}

/// Pools cells left to right until every pooled expected count reaches `min_expected`;
/// a short final group is merged into its predecessor.
fn pool_cells(expected: &[f64], min_expected: f64) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, e) in expected.iter().enumerate() {
        acc += e;
        if acc >= min_expected {
            groups.push((start, i + 1));
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < expected.len() {
        match groups.last_mut() {
            Some(last) => last.1 = expected.len(),
            None => groups.push((0, expected.len())),
        }
    }
    groups
}

/// Goodness of fit of observed counts to a probability vector.
/// The probabilities need not sum to one; the remainder forms a tail cell.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareResult> {
    let n: u64 = observed.iter().sum();
    let k = observed.len().max(probs.len());
    let mut exp: Vec<f64> = (0..k)
        .map(|i| probs.get(i).copied().unwrap_or(0.0) * n as f64)
        .collect();
    let mut obs: Vec<f64> = (0..k)
        .map(|i| observed.get(i).copied().unwrap_or(0) as f64)
        .collect();
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0) * n as f64;
    exp.push(tail);
    obs.push(0.0);
    let groups = pool_cells(&exp, 5.0);
    if groups.len() < 2 {
        return Err(Error::Estimation(
            "chi-square test needs at least two cells".into(),
        ));
    }
    let mut stat = 0.0;
    for &(a, b) in &groups {
        let e: f64 = exp[a..b].iter().sum();
        let o: f64 = obs[a..b].iter().sum();
        stat += (o - e) * (o - e) / e;
    }
    let dof = groups.len() - 1;
    Ok(ChiSquareResult {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof)?,
    })
}

/// Two-sample homogeneity test on count histograms.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareResult> {
    let k = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    let pooled: Vec<f64> = (0..k).map(|i| get(a, i) + get(b, i)).collect();
    let min_share = na.min(nb) / (na + nb);
    let groups = pool_cells(
        &pooled.iter().map(|c| c * min_share).collect::<Vec<_>>(),
        5.0,
    );
    if groups.len() < 2 {
        return Err(Error::Estimation(
            "chi-square test needs at least two cells".into(),
        ));
    }
    let mut stat = 0.0;
    for &(lo, hi) in &groups {
        let oa: f64 = (lo..hi).map(|i| get(a, i)).sum();
        let ob: f64 = (lo..hi).map(|i| get(b, i)).sum();
        let tot = oa + ob;
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let dof = groups.len() - 1;
    Ok(ChiSquareResult {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof)?,
    })
}

/// Histogram of nonnegative integer counts.
pub fn count_histogram(counts: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut hist = Vec::new();
    for c in counts {
        let c = c as usize;
        if hist.len() <= c {
            hist.resize(c + 1, 0);
        }
        hist[c] += 1;
    }
    hist
}

//! Small statistics toolkit for the Monte Carlo experiments.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Raw moment `E[x^p]`.
pub fn raw_moment(xs: &[f64], p: i32) -> f64 {
    xs.iter().map(|x| x.powi(p)).sum::<f64>() / xs.len() as f64
}

/// Standard error of the raw moment `E[x^p]`.
pub fn raw_moment_se(xs: &[f64], p: i32) -> f64 {
    let powered: Vec<f64> = xs.iter().map(|x| x.powi(p)).collect();
    (variance(&powered) / xs.len() as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Linear-interpolation empirical quantile.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Leave-one-out jackknife standard error of a statistic.
pub fn jackknife_se(xs: &[f64], stat: impl Fn(&[f64]) -> f64) -> f64 {
    let n = xs.len();
    let mut buf = Vec::with_capacity(n.saturating_sub(1));
    let reps: Vec<f64> = (0..n)
        .map(|i| {
            buf.clear();
            buf.extend(xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x));
            stat(&buf)
        })
        .collect();
    let m = mean(&reps);
    ((n as f64 - 1.0) / n as f64 * reps.iter().map(|r| (r - m) * (r - m)).sum::<f64>()).sqrt()
}

/// Jackknife standard error of the unbiased sample variance, in O(n).
pub fn variance_jackknife_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let s1: f64 = xs.iter().sum();
    let s2: f64 = xs.iter().map(|x| x * x).sum();
    let reps: Vec<f64> = xs
        .iter()
        .map(|x| {
            let (a, b) = (s1 - x, s2 - x * x);
            (b - a * a / (n - 1.0)) / (n - 2.0)
        })
        .collect();
    let m = mean(&reps);
    ((n - 1.0) / n * reps.iter().map(|r| (r - m) * (r - m)).sum::<f64>()).sqrt()
}

/// Kolmogorov–Smirnov test result.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2)`.
pub fn kolmogorov_survival(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 0.3 {
        // The alternating series converges slowly here; use the dual form.
        let c = (2.0 * std::f64::consts::PI).sqrt() / t;
        let k: f64 = (1..=20)
            .map(|j| {
                let a = (2 * j - 1) as f64 * std::f64::consts::PI / (2.0 * t);
                (-a * a / 2.0).exp()
            })
            .sum();
        return (1.0 - c * k).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * t * t).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let sq = effective_n.sqrt();
    kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("KS test needs non-empty samples"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsResult { statistic: d, p_value: ks_p_value(d, n * m / (n + m)) })
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::invalid("KS test needs a non-empty sample"));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let f = cdf(v);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    });
    Ok(KsResult { statistic: d, p_value: ks_p_value(d, n) })
}

//! Empirical distributions, KS distances, correlations and log-log fits.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalDist {
    sorted: Vec<f64>,
}

impl EmpiricalDist {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empirical distribution needs at least one sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::invalid("NaN sample"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Right-continuous ECDF, #{x_i <= x} / n.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.n() as f64
    }

    pub fn mean(&self) -> f64 {
        mean(&self.sorted)
    }

    pub fn variance(&self) -> f64 {
        variance(&self.sorted)
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// sup_x |F_n(x) - F(x)|, checking both sides of each jump.
pub fn ks_distance<F: Fn(f64) -> f64>(dist: &EmpiricalDist, cdf: F) -> f64 {
    let n = dist.n() as f64;
    let mut d = 0.0f64;
    for (i, &x) in dist.sorted().iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &EmpiricalDist, b: &EmpiricalDist) -> f64 {
    a.sorted()
        .iter()
        .chain(b.sorted())
        .map(|&x| (a.ecdf(x) - b.ecdf(x)).abs())
        .fold(0.0, f64::max)
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::invalid("pearson needs two equal-length samples of size >= 2"));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::invalid("pearson correlation of a constant sample"));
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Slope of log Var against log N.
#[derive(Debug, Clone, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    /// max of the two standard errors below.
    pub stderr: f64,
    /// From the residuals of the fit.
    pub stderr_residual: f64,
    /// From the sampling variance 2 / (n - 1) of each log variance.
    pub stderr_sampling: f64,
    pub intercept: f64,
    pub variances: Vec<f64>,
}

/// Least-squares slope of log Var[samples_k] on log n_k.
pub fn fit_log_variance(ns: &[u64], samples: &[Vec<f64>]) -> Result<LogLogFit> {
    if ns.len() != samples.len() || ns.len() < 3 {
        return Err(Error::invalid("fit needs at least 3 sizes with one sample set each"));
    }
    let mut variances = Vec::with_capacity(ns.len());
    for s in samples {
        if s.len() < 2 {
            return Err(Error::invalid("each size needs at least 2 samples"));
        }
        let v = variance(s);
        if !(v > 0.0) {
            return Err(Error::invalid("degenerate variance: all samples equal"));
        }
        variances.push(v);
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let (mx, my) = (mean(&x), mean(&y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let slope = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let k = x.len() as f64;
    let stderr_residual = (rss / (k - 2.0) / sxx).sqrt();
    let sampling: f64 = x
        .iter()
        .zip(samples)
        .map(|(a, s)| (a - mx).powi(2) * 2.0 / (s.len() as f64 - 1.0))
        .sum();
    let stderr_sampling = sampling.sqrt() / sxx;
    Ok(LogLogFit {
        slope,
        stderr: stderr_residual.max(stderr_sampling),
        stderr_residual,
        stderr_sampling,
        intercept,
        variances,
    })
}

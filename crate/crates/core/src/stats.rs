//! Small statistics helpers: Wilson intervals, moments, one-sample KS.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn z_value(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Wilson score interval for `hits` successes out of `m`.
pub fn wilson(hits: u64, m: u64, level: f64) -> Interval {
    assert!(m > 0 && hits <= m);
    let z = z_value(level);
    let n = m as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Interval {
        lo: (center - half).max(0.0).min(p),
        hi: (center + half).min(1.0).max(p),
    }
}

/// Mean and unbiased variance, summed in slice order.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// `sup_x |F_n(x) - F(x)|` for a continuous reference CDF.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

pub fn ks_normal(xs: &[f64], sigma: f64) -> f64 {
    let dist = Normal::new(0.0, sigma).expect("positive sigma");
    ks_statistic(xs, |x| dist.cdf(x))
}

pub fn ks_uniform(xs: &[f64]) -> f64 {
    ks_statistic(xs, |x| x.clamp(0.0, 1.0))
}

/// Asymptotic 5% critical value of the one-sample KS distance.
pub fn ks_critical_5(m: usize) -> f64 {
    1.36 / (m as f64).sqrt()
}

/// Asymptotic 1% critical value.
pub fn ks_critical_1(m: usize) -> f64 {
    1.63 / (m as f64).sqrt()
}

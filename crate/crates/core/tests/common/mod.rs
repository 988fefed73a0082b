#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at the 1% level.
pub fn ks_two_sample_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// One-sample KS statistic against N(0, var).
pub fn ks_normal(sample: &[f64], var: f64) -> f64 {
    let normal = Normal::new(0.0, var.sqrt()).unwrap();
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = normal.cdf(x);
        d.max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs())
    })
}

pub fn ks_one_sample_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample skewness and its large-sample standard error for a symmetric
/// population, `sqrt((m6 - 6 m4 m2 + 9 m2^3) / (n m2^3))`. This reduces to
/// `sqrt(6/n)` for normal data and stays valid for heavy-tailed mixtures.
pub fn skewness(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = mean(v);
    let moment = |k: i32| v.iter().map(|x| (x - m).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4, m6) = (moment(2), moment(3), moment(4), moment(6));
    let var = (m6 - 6.0 * m4 * m2 + 9.0 * m2.powi(3)) / (n * m2.powi(3));
    (m3 / m2.powf(1.5), var.sqrt())
}

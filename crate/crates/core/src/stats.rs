//! Chi-square goodness-of-fit and two-sample tests with the standard
//! Cochran pooling rule: cells with expected count below 5 (combined
//! count below 10 in the two-sample case) are merged into one bucket,
//! deterministically, before the statistic is formed.

use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Goodness of fit of observed counts against cell probabilities.
/// Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], draws: u64) -> Result<(f64, u64, f64)> {
    if observed.len() != probs.len() {
        return Err(Error::invalid("observed/expected length mismatch"));
    }
    let n = draws as f64;
    let mut kept: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut pooled = (0.0f64, 0.0f64);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * n;
        if e >= 5.0 {
            kept.push((o as f64, e));
        } else {
            pooled.0 += o as f64;
            pooled.1 += e;
        }
    }
    if pooled.1 > 0.0 {
        kept.push(pooled);
    }
    if kept.len() < 2 {
        return Err(Error::invalid(
            "chi-square needs at least two cells after pooling",
        ));
    }
    let stat: f64 = kept
        .iter()
        .map(|(o, e)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let df = kept.len() as u64 - 1;
    Ok((stat, df, p_value(stat, df)))
}

/// Two-sample chi-square over a common cell universe, equal-size
/// convention generalized to unequal sizes by the standard weights
/// `K₁ = sqrt(N₂/N₁)`, `K₂ = sqrt(N₁/N₂)`.
pub fn chi_square_two_sample(counts1: &[u64], counts2: &[u64]) -> Result<(f64, u64, f64)> {
    if counts1.len() != counts2.len() {
        return Err(Error::invalid("cell universes differ"));
    }
    let n1: u64 = counts1.iter().sum();
    let n2: u64 = counts2.iter().sum();
    if n1 == 0 || n2 == 0 {
        return Err(Error::invalid("empty sample"));
    }
    let k1 = (n2 as f64 / n1 as f64).sqrt();
    let k2 = (n1 as f64 / n2 as f64).sqrt();
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0f64, 0.0f64);
    for (&a, &b) in counts1.iter().zip(counts2) {
        if a + b >= 10 {
            kept.push((a as f64, b as f64));
        } else {
            pooled.0 += a as f64;
            pooled.1 += b as f64;
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        kept.push(pooled);
    }
    if kept.len() < 2 {
        return Err(Error::invalid(
            "chi-square needs at least two cells after pooling",
        ));
    }
    let stat: f64 = kept
        .iter()
        .filter(|(a, b)| a + b > 0.0)
        .map(|(a, b)| {
            let d = k1 * a - k2 * b;
            d * d / (a + b)
        })
        .sum();
    let df = kept.len() as u64 - 1;
    Ok((stat, df, p_value(stat, df)))
}

fn p_value(stat: f64, df: u64) -> f64 {
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

/// Standard error of a binomial proportion estimate.
pub fn binomial_se(p: f64, draws: u64) -> f64 {
    (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / draws as f64).sqrt()
}

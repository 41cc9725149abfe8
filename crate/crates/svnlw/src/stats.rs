//! Small shared statistics helpers: ordinary least squares, Monte Carlo
//! summaries, and self-normalized importance-sampling estimates.

use crate::{Error, Result};

/// Ordinary least squares of `ys` on `xs`.
#[derive(Clone, Copy, Debug)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> Result<OlsFit> {
    if xs.len() < 3 || xs.len() != ys.len() {
        return Err(Error::DegenerateFit);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 || !sxx.is_finite() {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(OlsFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    /// z-score of the deviation from a target value.
    pub fn z_against(&self, target: f64) -> f64 {
        if self.se == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target) / self.se
        }
    }
}

pub fn mean_se(values: &[f64]) -> MeanSe {
    let n = values.len();
    assert!(n >= 2, "standard error needs at least two samples");
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    MeanSe {
        mean,
        se: (var / n as f64).sqrt(),
        n,
    }
}

/// Sample variance with the standard error of the variance estimate
/// (Gaussian-based, `SE ~ s^2 sqrt(2/(n-1))`).
pub fn variance_se(values: &[f64]) -> MeanSe {
    let n = values.len();
    assert!(n >= 2);
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    MeanSe {
        mean: var,
        se: var * (2.0 / (n as f64 - 1.0)).sqrt(),
        n,
    }
}

/// Self-normalized importance-sampling mean of `values` under unnormalized
/// `weights`, with a delta-method standard error.
pub fn weighted_mean_se(values: &[f64], weights: &[f64]) -> MeanSe {
    assert_eq!(values.len(), weights.len());
    let wsum: f64 = weights.iter().sum();
    assert!(wsum > 0.0, "importance weights must have positive mass");
    let mean = values
        .iter()
        .zip(weights)
        .map(|(v, w)| v * w)
        .sum::<f64>()
        / wsum;
    let se_sq: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| {
            let wn = w / wsum;
            wn * wn * (v - mean) * (v - mean)
        })
        .sum();
    MeanSe {
        mean,
        se: se_sq.sqrt(),
        n: values.len(),
    }
}

/// Effective sample size `(sum w)^2 / sum w^2` of importance weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}

/// Empirical log-survival points of a sample against a shape transform of the
/// threshold: returns `(lambda^exponent, log P(X > lambda))` pairs taken
/// between the given quantiles.
pub fn log_survival_points(
    values: &[f64],
    exponent: f64,
    q_lo: f64,
    q_hi: f64,
) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample"));
    let n = sorted.len();
    let lo = ((n as f64) * q_lo) as usize;
    let hi = (((n as f64) * q_hi) as usize).min(n - 1);
    let mut pts = Vec::new();
    for i in lo..hi {
        let surv = (n - 1 - i) as f64 / n as f64;
        if surv > 0.0 {
            pts.push((sorted[i].powf(exponent), surv.ln()));
        }
    }
    pts
}

/// Weighted empirical quantile (weights need not be normalized).
pub fn weighted_quantile(values: &[f64], weights: &[f64], q: f64) -> f64 {
    assert_eq!(values.len(), weights.len());
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("non-finite sample"));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for &i in &idx {
        acc += weights[i];
        if acc >= q * total {
            return values[i];
        }
    }
    values[*idx.last().expect("empty sample")]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = ols(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ols_rejects_degenerate_input() {
        assert!(ols(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(ols(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ess_of_uniform_weights_is_n() {
        let w = vec![0.25; 8];
        assert!((effective_sample_size(&w) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_mean_of_constant_is_exact() {
        let v = vec![3.5; 10];
        let w: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let m = weighted_mean_se(&v, &w);
        assert_eq!(m.mean, 3.5);
        assert_eq!(m.se, 0.0);
    }
}

use crate::stats::{log_survival_points, ols};
use crate::Result;

/// Fitted shape of an empirical survival function: the log-survival of a
/// degree-`k` chaos norm regressed against `lambda^{2/k}`. A negative slope
/// with a tight linear fit is the finite-sample signature of the
/// `exp(-c lambda^{2/k})` tail; the constants themselves are not asserted.
#[derive(Clone, Copy, Debug)]
pub struct TailReport {
    pub degree: u32,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Regression window: upper half of the sample, clipped just below the
/// extreme order statistics where log-survival estimates turn ragged.
const Q_LO: f64 = 0.5;
const Q_HI: f64 = 0.995;

pub fn tail_estimate(norm_ensemble: &[f64], degree: u32) -> Result<TailReport> {
    assert!(
        norm_ensemble.len() >= 1000,
        "tail shapes need at least 10^3 samples"
    );
    assert!(degree >= 1);
    let exponent = 2.0 / degree as f64;
    let pts = log_survival_points(norm_ensemble, exponent, Q_LO, Q_HI);
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let fit = ols(&xs, &ys)?;
    Ok(TailReport {
        degree,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{RngStream, StreamDomain};
    use crate::spectral::Freq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn gaussian_surrogate_has_linear_squared_tail() {
        let stream = RngStream::new(7, 0);
        let mut rng = stream.rng_at(StreamDomain::Scalar, Freq::ZERO, 0);
        let vals: Vec<f64> = (0..4000)
            .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
            .collect();
        let report = tail_estimate(&vals, 1).unwrap();
        assert!(report.slope < 0.0);
        assert!(report.r_squared >= 0.95, "r2 {}", report.r_squared);
    }

    #[test]
    fn small_ensembles_are_rejected() {
        let vals = vec![1.0; 10];
        let result = std::panic::catch_unwind(|| tail_estimate(&vals, 1));
        assert!(result.is_err());
    }
}

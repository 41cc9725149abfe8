//! Experiment orchestration: named experiments binding the solver stack to
//! quantitative checks, fit utilities, statistical reports, and the file
//! outputs behind the CLI (manifest, NDJSON result rows, CSV time series).

mod config;
mod report;
mod suites;

pub use config::{
    EnergyConfig, GibbsConfig, HarnessConfig, LwpConfig, SchauderConfig, VarianceConfig,
    WickConfig,
};
pub use report::{write_manifest, write_reports_ndjson, StatReport, SuiteOutcome};
pub use suites::{
    run_energy_growth, run_gibbs_invariance, run_lwp_convergence, run_schauder,
    run_variance_suite, run_wick_convergence,
};

use crate::stats::{ols, OlsFit};
use crate::Result;

/// Ordinary least squares on an already-transformed axis pair; serves the
/// log-growth fits, decay exponents, tail shapes, and growth envelopes.
pub fn fit_loglinear(xs: &[f64], ys: &[f64]) -> Result<OlsFit> {
    ols(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line_and_rejects_degenerate() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = fit_loglinear(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_loglinear(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
    }
}

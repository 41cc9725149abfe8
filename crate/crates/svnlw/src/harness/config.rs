use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Experiment parameters, deserialized from a TOML config file; every field
/// has a default matching the acceptance-scale run of its suite.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    pub variance: VarianceConfig,
    pub wick: WickConfig,
    pub lwp: LwpConfig,
    pub energy: EnergyConfig,
    pub gibbs: GibbsConfig,
    pub schauder: SchauderConfig,
}

impl HarnessConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Monte Carlo gate shared by every suite: deviations must stay within
/// `z_gate` standard errors.
pub fn default_z_gate() -> f64 {
    4.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VarianceConfig {
    pub replicas: usize,
    /// `(band, t)` pairs for the pointwise variance check.
    pub sigma_checks: Vec<(u32, f64)>,
    /// Band for the stationary-variance check.
    pub band: u32,
    pub alpha_times: Vec<f64>,
    /// Modes whose derivative variance is checked against 1.
    pub derivative_modes: Vec<(i32, i32)>,
    pub growth_bands: Vec<u32>,
    pub growth_replicas: usize,
    /// Relative tolerance of the per-dyad growth increments.
    pub growth_rel_tol: f64,
    pub z_gate: f64,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        VarianceConfig {
            replicas: 10_000,
            sigma_checks: vec![(8, 0.5), (8, 1.0), (16, 1.0)],
            band: 8,
            alpha_times: vec![0.0, 0.5, 2.0],
            derivative_modes: vec![(0, 0), (1, 0), (2, 1)],
            growth_bands: vec![4, 8, 16, 32, 64],
            growth_replicas: 1000,
            growth_rel_tol: 0.2,
            z_gate: default_z_gate(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WickConfig {
    /// Scalar Monte Carlo size for the Hermite orthogonality checks.
    pub moment_replicas: usize,
    pub max_moment_degree: u32,
    /// Field Monte Carlo at `(band, t)` for the Wick-square moments.
    pub band: u32,
    pub t: f64,
    pub field_replicas: usize,
    /// Dyadic bands of the Cauchy-difference study (each paired with half).
    pub cauchy_bands: Vec<u32>,
    pub cauchy_replicas: usize,
    pub tail_replicas: usize,
    pub z_gate: f64,
}

impl Default for WickConfig {
    fn default() -> Self {
        WickConfig {
            moment_replicas: 10_000,
            max_moment_degree: 4,
            band: 8,
            t: 1.0,
            field_replicas: 10_000,
            cauchy_bands: vec![8, 16, 32, 64],
            cauchy_replicas: 1000,
            tail_replicas: 2000,
            z_gate: default_z_gate(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LwpConfig {
    /// Noise bands of the coupled convergence study (consecutive dyads).
    pub bands: Vec<u32>,
    pub replicas: usize,
    pub t_loc: f64,
    pub step: f64,
    pub solver_band: u32,
    pub grid_size: usize,
    /// Negative regularity of the comparison norm.
    pub epsilon: f64,
    /// Fraction of replicas that must order every dyad strictly.
    pub required_fraction: f64,
    /// Deterministic cross-method case.
    pub picard_horizon: f64,
    pub picard_step: f64,
    pub picard_iterations: usize,
    pub picard_tolerance: f64,
}

impl Default for LwpConfig {
    fn default() -> Self {
        LwpConfig {
            bands: vec![4, 8, 16, 32, 64],
            replicas: 20,
            t_loc: 0.1,
            step: 5e-3,
            solver_band: 64,
            grid_size: 512,
            epsilon: 0.1,
            required_fraction: 0.9,
            picard_horizon: 0.05,
            picard_step: 2.5e-4,
            picard_iterations: 10,
            picard_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyConfig {
    pub replicas: usize,
    pub noise_band: u32,
    pub solver_band: u32,
    pub grid_size: usize,
    pub horizon: f64,
    pub step: f64,
    /// Step of the deterministic dissipation-identity run.
    pub dissipation_step: f64,
    pub dissipation_horizon: f64,
    /// Relative residual gate per unit time for the energy identity.
    pub dissipation_tol: f64,
    pub record_every: usize,
    pub gauge_eps: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            replicas: 20,
            noise_band: 16,
            solver_band: 48,
            grid_size: 320,
            horizon: 10.0,
            step: 0.01,
            dissipation_step: 1e-3,
            dissipation_horizon: 1.0,
            dissipation_tol: 1e-3,
            record_every: 10,
            gauge_eps: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GibbsConfig {
    pub samples: usize,
    pub band: u32,
    pub degree: u32,
    pub grid_size: usize,
    pub horizon: f64,
    pub step: f64,
    pub min_ess: f64,
    /// Sentinel mode outside the cutoff for the decoupling audit.
    pub sentinel: (i32, i32),
    /// Linear-control ensemble size.
    pub control_samples: usize,
    /// Long-horizon percentile study.
    pub growth_samples: usize,
    pub growth_horizon: f64,
    pub growth_step: f64,
    pub epsilon: f64,
    pub z_gate: f64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            samples: 10_000,
            band: 1,
            degree: 3,
            grid_size: 8,
            horizon: 2.0,
            step: 1e-3,
            min_ess: 500.0,
            sentinel: (2, 0),
            control_samples: 4000,
            growth_samples: 2000,
            growth_horizon: 10.0,
            growth_step: 2e-3,
            epsilon: 0.1,
            z_gate: default_z_gate(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchauderConfig {
    /// `(alpha, slope tolerance)` pairs.
    pub alphas: Vec<(f64, f64)>,
    pub max_band: u32,
    /// Dyadic time grid `2^-j` for `j` in this inclusive range.
    pub dyadic_range: (i32, i32),
}

impl Default for SchauderConfig {
    fn default() -> Self {
        SchauderConfig {
            alphas: vec![(0.0, 0.05), (0.5, 0.1), (1.0, 0.1)],
            max_band: 1024,
            dyadic_range: (2, 8),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_with_partial_override() {
        let text = r#"
[variance]
replicas = 100

[gibbs]
samples = 50
horizon = 0.5
"#;
        let cfg = HarnessConfig::from_toml(text).unwrap();
        assert_eq!(cfg.variance.replicas, 100);
        assert_eq!(cfg.variance.band, 8); // default preserved
        assert_eq!(cfg.gibbs.samples, 50);
        assert_eq!(cfg.gibbs.step, 1e-3);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(HarnessConfig::from_toml("[variance]\nbogus = 1\n").is_err());
    }
}

//! Nonlinear evolution of the residual equation and the full truncated
//! dynamics: exponential integrators with the linear part exact, Picard
//! iteration of the mild formulation, the energy functional with its growth
//! diagnostic, and the Hamiltonian/Ornstein-Uhlenbeck splitting integrator.

mod energy;
mod picard;
mod splitting;
mod stepper;

pub use energy::{b_diagnostic, energy, BGauge, EnergyPoint, EnergyRecord};
pub use picard::{picard_solve, PicardOutcome};
pub use splitting::{
    hamiltonian_energy, split_modes, split_step_full, KeyedOu, OuNoise, RefinedOu, SplitConfig,
    SplitState,
};
pub use stepper::{
    evolve_cubic, run_trajectory, step_v, CubicRun, EnhancedXi, StreamingXi, TrajectoryStatus,
    VStepper, XiProvider, XiSlices, ZeroXi,
};

use crate::spectral::{BandLimit, FrequencyLattice};
use crate::{Error, Result};

/// Exponential quadrature for the forcing integral of one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Forcing frozen at the left node; local error `O(h^2)`.
    ExpEuler,
    /// Two-stage midpoint evaluation; local error `O(h^3)`.
    ExpMidpoint,
}

/// Discretization of the residual equation: degree, bands, grid, step.
///
/// `solver_band` is the Galerkin cutoff applied to the nonlinearity (and
/// hence to the solution); `noise_band` is the cutoff of the driving Wick
/// data. The grid must dealias the worst binomial product exactly.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub degree: u32,
    pub noise_band: u32,
    pub solver_band: u32,
    pub grid_size: usize,
    pub step: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub damping: bool,
    /// Record energy every this many main steps.
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(
        degree: u32,
        noise_band: u32,
        solver_band: u32,
        grid_size: usize,
        step: f64,
        horizon: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        if step <= 0.0 || step > horizon {
            return Err(Error::Config(format!(
                "step {step} must lie in (0, horizon = {horizon}]"
            )));
        }
        let worst = degree as usize * noise_band.max(solver_band) as usize;
        let required = 2 * (worst + 1);
        if grid_size < required {
            return Err(Error::DealiasTooSmall {
                m: grid_size,
                band: noise_band.max(solver_band),
                degree,
                required,
            });
        }
        Ok(SolverConfig {
            degree,
            noise_band,
            solver_band,
            grid_size,
            step,
            horizon,
            scheme,
            damping: true,
            record_every: 1,
        })
    }

    /// Container of the solution fields, tagged with the Galerkin band.
    pub fn lattice(&self) -> FrequencyLattice {
        FrequencyLattice::new(self.grid_size, BandLimit::Limited(self.solver_band))
            .expect("validated in new()")
    }

    /// Full-band container of the same grid (Wick data lives here, since its
    /// band exceeds the Galerkin cutoff).
    pub fn container(&self) -> FrequencyLattice {
        FrequencyLattice::new(self.grid_size, BandLimit::Full).expect("validated in new()")
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.step).round().max(1.0) as usize
    }

    /// Times of the refined node grid (main nodes and midpoints).
    pub fn node_times(&self) -> Vec<f64> {
        let n = self.steps();
        (0..=2 * n).map(|j| 0.5 * self.step * j as f64).collect()
    }
}

//! Simulation and verification laboratory for the renormalized stochastic
//! viscous nonlinear wave equation on the two-dimensional torus.
//!
//! The crate is organized around the pipeline that turns singular Gaussian
//! forcing into testable statistics:
//!
//! * [`spectral`] — frequency lattice, real-field spectral representation,
//!   transforms, Fourier multipliers, Sobolev norms.
//! * [`linflow`] — exact per-mode flows of the damped wave operator and the
//!   Poisson semigroup with its scaling check.
//! * [`noise`] — exact Gaussian sampling of the stochastic convolution, the
//!   Gaussian initial data, and the closed-form variances.
//! * [`wick`] — Hermite polynomials with variance parameter, Wick powers, the
//!   renormalized nonlinearity, and enhanced data assembly.
//! * [`dynamics`] — exponential integrators and Picard iteration for the
//!   residual equation, the energy diagnostic, and the splitting integrator
//!   for the full truncated dynamics.
//! * [`gibbs`] — importance-sampled Gibbs ensembles and the invariance test.
//! * [`harness`] — named experiments, fit utilities, statistical reports, and
//!   the NDJSON/CSV/manifest writers behind the CLI.

pub mod dynamics;
pub mod gibbs;
pub mod harness;
pub mod linflow;
pub mod noise;
pub mod spectral;
pub mod stats;
pub mod wick;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

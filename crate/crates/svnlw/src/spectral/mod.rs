//! Frequency lattice, real-field spectral representation, transforms,
//! Fourier multipliers, and Sobolev norms.
//!
//! Conventions (fixed once, used everywhere):
//!
//! * A real field on the unit-volume 2-torus is stored through its Fourier
//!   coefficients `c(n)`, `f(x) = sum_n c(n) exp(2*pi*i n.x)`, with the
//!   Hermitian constraint `c(-n) = conj(c(n))` and `c(0)` real.
//! * Derivative symbols live on the integer lattice without 2*pi factors:
//!   `D <-> |n|`, `-Laplacian <-> |n|^2`. This makes the closed-form variance
//!   identities hold verbatim.
//! * Grids are `M x M` with `M` even; representable frequencies satisfy
//!   `-M/2 < n_i <= M/2` and the unpaired Nyquist rows `n_i = M/2` are kept
//!   identically zero so real-field symmetry is exact.

mod field;
mod lattice;
mod multiplier;
mod transform;

pub use field::SpectralField;
pub(crate) use lattice::canonical_modes;
pub use lattice::{BandLimit, FrequencyLattice, Freq};
pub use multiplier::{apply_multiplier, MultiplierSymbol};
pub use transform::{grid_mean_square, inverse_transform, transform, FftWorkspace};

use crate::Result;

/// Frequency cutoff onto `{ |n| <= N }`. `BandLimit::Full` is the identity.
///
/// Idempotent; zeroes every coefficient outside the ball.
pub fn project(band: BandLimit, f: &SpectralField) -> SpectralField {
    f.project(band)
}

/// Builds the lattice for an `m x m` grid carrying frequencies `-m/2 < n_i <= m/2`
/// with the given band limit. Rejects odd `m` and grids too small to pair
/// every retained mode with its conjugate.
pub fn make_lattice(m: usize, band: BandLimit) -> Result<FrequencyLattice> {
    FrequencyLattice::new(m, band)
}

/// Exponent for [`sobolev_norm`]: exact spectral `L^2` or grid-max `L^inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormExponent {
    L2,
    LInf,
}

/// Sobolev norm of a spectral field.
///
/// For `L^2` this is the exact sum `(sum <n>^{2s} |c(n)|^2)^{1/2}`. For
/// `L^inf` it is the grid maximum of `|<grad>^s f|`, a declared approximation
/// whose fidelity depends on the grid; callers record the grid size next to
/// any such value.
pub fn sobolev_norm(f: &SpectralField, s: f64, p: NormExponent) -> Result<f64> {
    match p {
        NormExponent::L2 => Ok(f.sobolev_l2(s)),
        NormExponent::LInf => {
            let weighted = apply_multiplier(&MultiplierSymbol::Bessel(s), f);
            let grid = transform(&weighted)?;
            Ok(grid.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
        }
    }
}

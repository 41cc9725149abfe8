use thiserror::Error;

/// Errors from lattice construction, transforms, and solver preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is odd; the transform pairing needs an even grid")]
    OddGridSize(usize),

    #[error("grid size {m} too small: band limit {band} needs at least {required} points per dimension")]
    GridTooSmall { m: usize, band: u32, required: usize },

    #[error("grid size {m} cannot dealias degree {degree} at band {band}: need at least {required} points per dimension")]
    DealiasTooSmall {
        m: usize,
        band: u32,
        degree: u32,
        required: usize,
    },

    #[error("Hermitian symmetry violated: max deviation {max_dev:.3e} exceeds tolerance {tol:.3e}")]
    SymmetryViolation { max_dev: f64, tol: f64 },

    #[error("fields live on different lattices ({0}x{0} vs {1}x{1})")]
    LatticeMismatch(usize, usize),

    #[error("time grid must start at 0 and increase strictly")]
    NonMonotoneTimeGrid,

    #[error("fractional derivative of the Poisson semigroup is unbounded at t = 0 (alpha = {0})")]
    PoissonUnboundedAtZero(f64),

    #[error("least-squares fit needs at least 3 points with non-degenerate abscissae")]
    DegenerateFit,

    #[error("Gibbs density needs degree k >= 2, got {0}")]
    DegreeTooLow(u32),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

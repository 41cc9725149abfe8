use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point on the integer frequency lattice of the 2-torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Freq {
    pub n1: i32,
    pub n2: i32,
}

impl Freq {
    pub const ZERO: Freq = Freq { n1: 0, n2: 0 };

    pub fn new(n1: i32, n2: i32) -> Self {
        Freq { n1, n2 }
    }

    /// `|n|^2` as an integer.
    pub fn norm_sq(self) -> i64 {
        let (a, b) = (self.n1 as i64, self.n2 as i64);
        a * a + b * b
    }

    /// `|n|`.
    pub fn norm(self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// `<n>^2 = 1 + |n|^2`.
    pub fn bessel_sq(self) -> f64 {
        1.0 + self.norm_sq() as f64
    }

    pub fn neg(self) -> Self {
        Freq::new(-self.n1, -self.n2)
    }

    /// Canonical representative of the conjugate pair `{n, -n}`: the zero
    /// mode, the open upper half-plane, and the positive half of the
    /// `n2 = 0` axis.
    pub fn is_canonical(self) -> bool {
        self.n2 > 0 || (self.n2 == 0 && self.n1 >= 0)
    }

    /// Self-paired under conjugation (only the zero mode on a Nyquist-free
    /// lattice), hence constrained to be real.
    pub fn is_self_paired(self) -> bool {
        self.n1 == 0 && self.n2 == 0
    }
}

/// Spectral truncation: either every mode the lattice resolves, or the
/// ball `{ |n| <= N }`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandLimit {
    Full,
    Limited(u32),
}

impl BandLimit {
    pub fn contains(self, n: Freq) -> bool {
        match self {
            BandLimit::Full => true,
            BandLimit::Limited(b) => n.norm_sq() <= (b as i64) * (b as i64),
        }
    }

    /// The tighter of two limits.
    pub fn min(self, other: BandLimit) -> BandLimit {
        match (self, other) {
            (BandLimit::Full, b) | (b, BandLimit::Full) => b,
            (BandLimit::Limited(a), BandLimit::Limited(b)) => BandLimit::Limited(a.min(b)),
        }
    }
}

/// The index set `{ n = (n1, n2) : -M/2 < n_i <= M/2 }` of an `M x M` grid,
/// with band-limit metadata. Nyquist rows (`n_i = M/2`) have no conjugate
/// partner on the lattice and are flagged for zeroing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyLattice {
    m: usize,
    band: BandLimit,
}

impl FrequencyLattice {
    pub fn new(m: usize, band: BandLimit) -> Result<Self> {
        if m % 2 != 0 {
            return Err(Error::OddGridSize(m));
        }
        if m < 4 {
            return Err(Error::GridTooSmall {
                m,
                band: 0,
                required: 4,
            });
        }
        if let BandLimit::Limited(n) = band {
            let required = 2 * (n as usize + 1);
            if m < required {
                return Err(Error::GridTooSmall { m, band: n, required });
            }
        }
        Ok(FrequencyLattice { m, band })
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    pub fn band(&self) -> BandLimit {
        self.band
    }

    /// Largest band the grid resolves with full conjugate pairing.
    pub fn max_resolved_band(&self) -> u32 {
        (self.m / 2 - 1) as u32
    }

    /// Same grid, different band-limit tag.
    pub fn with_band(&self, band: BandLimit) -> Result<Self> {
        FrequencyLattice::new(self.m, band)
    }

    pub fn num_bins(&self) -> usize {
        self.m * self.m
    }

    /// Storage bin of a frequency (row-major, DFT wrap-around order).
    pub fn bin_of(&self, n: Freq) -> usize {
        let m = self.m as i32;
        let k1 = n.n1.rem_euclid(m) as usize;
        let k2 = n.n2.rem_euclid(m) as usize;
        k1 * self.m + k2
    }

    /// Frequency stored in a bin; Nyquist indices map to `n_i = M/2`.
    pub fn freq_of(&self, bin: usize) -> Freq {
        let m = self.m;
        let half = (m / 2) as i32;
        let unwrap = |k: usize| {
            let k = k as i32;
            if k <= half {
                k
            } else {
                k - m as i32
            }
        };
        Freq::new(unwrap(bin / m), unwrap(bin % m))
    }

    /// Frequencies carrying an unpaired Nyquist component.
    pub fn is_nyquist(&self, n: Freq) -> bool {
        let half = (self.m / 2) as i32;
        n.n1 == half || n.n2 == half
    }

    /// All pairable frequencies of the grid (`|n_i| <= M/2 - 1`).
    pub fn active_freqs(&self) -> impl Iterator<Item = Freq> + '_ {
        let half = (self.m / 2) as i32;
        (1 - half..half).flat_map(move |n1| (1 - half..half).map(move |n2| Freq::new(n1, n2)))
    }

    /// Pairable frequencies inside the lattice band.
    pub fn banded_freqs(&self) -> impl Iterator<Item = Freq> + '_ {
        let band = self.band;
        self.active_freqs().filter(move |n| band.contains(*n))
    }

    pub fn contains(&self, n: Freq) -> bool {
        let half = (self.m / 2) as i32;
        n.n1.abs() < half && n.n2.abs() < half && self.band.contains(n)
    }
}

/// Canonical half-lattice representatives of `{ |n| <= band }`, one per
/// conjugate pair, in a fixed deterministic order.
pub(crate) fn canonical_modes(band: u32) -> Vec<Freq> {
    let b = band as i32;
    let r2 = (band as i64) * (band as i64);
    let mut out = Vec::new();
    for n1 in -b..=b {
        for n2 in -b..=b {
            let n = Freq::new(n1, n2);
            if n.norm_sq() <= r2 && n.is_canonical() {
                out.push(n);
            }
        }
    }
    out
}

use num_complex::Complex64;

use super::lattice::{BandLimit, FrequencyLattice, Freq};
use crate::{Error, Result};

/// Complex Fourier coefficients of a real field on the 2-torus.
///
/// Invariants maintained by every operation in this module:
/// `coeff(-n) = conj(coeff(n))`, `coeff(0)` real, Nyquist rows zero, and
/// `coeff(n) = 0` outside the lattice band when it is limited.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    lattice: FrequencyLattice,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(lattice: &FrequencyLattice) -> Self {
        SpectralField {
            coeffs: vec![Complex64::new(0.0, 0.0); lattice.num_bins()],
            lattice: lattice.clone(),
        }
    }

    /// Builds a field from a coefficient rule evaluated on canonical modes;
    /// the conjugate half is filled by symmetry and the rule's value on a
    /// self-paired mode is truncated to its real part.
    pub fn from_rule(lattice: &FrequencyLattice, mut rule: impl FnMut(Freq) -> Complex64) -> Self {
        let mut f = SpectralField::zeros(lattice);
        let half = (lattice.grid_size() / 2) as i32;
        for n1 in 1 - half..half {
            for n2 in 1 - half..half {
                let n = Freq::new(n1, n2);
                if n.is_canonical() && lattice.band().contains(n) {
                    f.set_pair(n, rule(n));
                }
            }
        }
        f
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn from_raw(lattice: FrequencyLattice, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), lattice.num_bins());
        SpectralField { lattice, coeffs }
    }

    pub fn get(&self, n: Freq) -> Complex64 {
        self.coeffs[self.lattice.bin_of(n)]
    }

    /// Sets `coeff(n) = z` and `coeff(-n) = conj(z)`; on a self-paired mode
    /// only the real part of `z` is kept.
    pub fn set_pair(&mut self, n: Freq, z: Complex64) {
        debug_assert!(!self.lattice.is_nyquist(n), "Nyquist modes stay zero");
        if n.is_self_paired() {
            let bin = self.lattice.bin_of(n);
            self.coeffs[bin] = Complex64::new(z.re, 0.0);
        } else {
            let bin = self.lattice.bin_of(n);
            let conj_bin = self.lattice.bin_of(n.neg());
            self.coeffs[bin] = z;
            self.coeffs[conj_bin] = z.conj();
        }
    }

    /// Largest deviation from Hermitian symmetry (including non-zero Nyquist
    /// rows and a complex zero mode).
    pub fn symmetry_deviation(&self) -> f64 {
        let m = self.lattice.grid_size();
        let nyq = m / 2;
        let mut max_dev = 0.0f64;
        for k1 in 0..m {
            let row = k1 * m;
            let conj_row = if k1 == 0 { 0 } else { (m - k1) * m };
            for k2 in 0..m {
                let c = self.coeffs[row + k2];
                if k1 == nyq || k2 == nyq {
                    max_dev = max_dev.max(c.norm());
                    continue;
                }
                let conj_col = if k2 == 0 { 0 } else { m - k2 };
                let dev = (c - self.coeffs[conj_row + conj_col].conj()).norm();
                max_dev = max_dev.max(dev);
            }
        }
        max_dev
    }

    pub fn check_symmetry(&self, tol: f64) -> Result<()> {
        let max_dev = self.symmetry_deviation();
        if max_dev > tol {
            Err(Error::SymmetryViolation { max_dev, tol })
        } else {
            Ok(())
        }
    }

    /// Debug-build audit run after each mutating operation.
    pub(crate) fn debug_assert_symmetric(&self) {
        debug_assert!(
            self.symmetry_deviation() <= 1e-9 * (1.0 + self.linf_coeff()),
            "spectral operation broke Hermitian symmetry"
        );
    }

    fn linf_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()))
    }

    /// Zeroes every coefficient outside `{ |n| <= band }` and tightens the
    /// band-limit tag. Idempotent; `Full` is the identity.
    pub fn project(&self, band: BandLimit) -> SpectralField {
        let new_band = self.lattice.band().min(band);
        let lattice = self
            .lattice
            .with_band(new_band)
            .expect("projection only tightens the band");
        let mut coeffs = self.coeffs.clone();
        if let BandLimit::Limited(_) = band {
            for (bin, c) in coeffs.iter_mut().enumerate() {
                if !band.contains(self.lattice.freq_of(bin)) {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
        SpectralField { lattice, coeffs }
    }

    /// Copies the field onto a (typically finer) grid. The target must
    /// resolve every mode the source band retains.
    pub fn embed(&self, target: &FrequencyLattice) -> Result<SpectralField> {
        match self.lattice.band() {
            BandLimit::Limited(b) if target.max_resolved_band() >= b => {}
            BandLimit::Full if target.grid_size() >= self.lattice.grid_size() => {}
            _ => {
                return Err(Error::LatticeMismatch(
                    self.lattice.grid_size(),
                    target.grid_size(),
                ))
            }
        }
        let mut out = SpectralField::zeros(target);
        for bin in 0..self.coeffs.len() {
            let c = self.coeffs[bin];
            if c != Complex64::new(0.0, 0.0) {
                let n = self.lattice.freq_of(bin);
                if !self.lattice.is_nyquist(n) && target.band().contains(n) {
                    out.coeffs[target.bin_of(n)] = c;
                }
            }
        }
        out.debug_assert_symmetric();
        Ok(out)
    }

    /// Exact `L^2` norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Exact `H^s` norm: `(sum <n>^{2s} |c(n)|^2)^{1/2}`.
    pub fn sobolev_l2(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(bin, c)| {
                if c.norm_sqr() == 0.0 {
                    0.0
                } else {
                    self.lattice.freq_of(bin).bessel_sq().powf(s) * c.norm_sqr()
                }
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Field value at the grid origin `x = 0`, i.e. the plain coefficient sum
    /// (real by symmetry). Used for pointwise statistics without a transform.
    pub fn value_at_origin(&self) -> f64 {
        self.coeffs.iter().map(|c| c.re).sum()
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn add_scaled(&mut self, other: &SpectralField, a: f64) {
        assert_eq!(self.lattice.grid_size(), other.lattice.grid_size());
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_lattice;

    #[test]
    fn set_pair_keeps_symmetry() {
        let lat = make_lattice(8, BandLimit::Limited(2)).unwrap();
        let mut f = SpectralField::zeros(&lat);
        f.set_pair(Freq::new(1, -2), Complex64::new(0.3, -0.7));
        f.set_pair(Freq::new(0, 0), Complex64::new(1.5, 0.9)); // imag dropped
        assert_eq!(f.get(Freq::new(-1, 2)), Complex64::new(0.3, 0.7));
        assert_eq!(f.get(Freq::ZERO), Complex64::new(1.5, 0.0));
        assert!(f.symmetry_deviation() == 0.0);
    }

    #[test]
    fn projection_is_idempotent_and_kills_outside_modes() {
        let lat = make_lattice(16, BandLimit::Full).unwrap();
        let mut f = SpectralField::zeros(&lat);
        f.set_pair(Freq::new(2, 0), Complex64::new(1.0, 0.5));
        let p = f.project(BandLimit::Limited(1));
        assert_eq!(p.get(Freq::new(2, 0)), Complex64::new(0.0, 0.0));
        assert_eq!(p.l2_norm(), 0.0);
        let p2 = p.project(BandLimit::Limited(1));
        assert_eq!(p, p2);
        // Full projection is the identity
        assert_eq!(f.project(BandLimit::Full).coeffs(), f.coeffs());
    }

    #[test]
    fn sobolev_matches_hand_value() {
        // mode (1,0) amplitude 1: coeff(+-(1,0)) = 1/2, s = 1 -> norm 1
        let lat = make_lattice(8, BandLimit::Limited(1)).unwrap();
        let mut f = SpectralField::zeros(&lat);
        f.set_pair(Freq::new(1, 0), Complex64::new(0.5, 0.0));
        assert!((f.sobolev_l2(1.0) - 1.0).abs() < 1e-14);
        // constant field c: any s gives |c|
        let mut c = SpectralField::zeros(&lat);
        c.set_pair(Freq::ZERO, Complex64::new(-2.25, 0.0));
        assert!((c.sobolev_l2(3.7) - 2.25).abs() < 1e-14);
        assert!((c.sobolev_l2(0.0) - c.l2_norm()).abs() < 1e-15);
    }
}

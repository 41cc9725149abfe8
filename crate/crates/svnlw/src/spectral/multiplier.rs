use std::fmt;

use super::field::SpectralField;
use super::lattice::Freq;

/// Real, even Fourier multiplier symbols used throughout the solver stack.
///
/// `DPow(0.0)` is the identity also at `n = 0` (the `D^0 = Id` convention of
/// the semigroup scaling check).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MultiplierSymbol {
    /// `|n|`
    D,
    /// `|n|^alpha`
    DPow(f64),
    /// `<n>^s = (1 + |n|^2)^{s/2}`
    Bessel(f64),
    /// `<<n>>^s = (1 + (3/4)|n|^2)^{s/2}`
    ModBessel(f64),
}

impl MultiplierSymbol {
    pub fn eval(&self, n: Freq) -> f64 {
        match *self {
            MultiplierSymbol::D => n.norm(),
            MultiplierSymbol::DPow(alpha) => {
                if alpha == 0.0 {
                    1.0
                } else {
                    n.norm().powf(alpha)
                }
            }
            MultiplierSymbol::Bessel(s) => n.bessel_sq().powf(0.5 * s),
            MultiplierSymbol::ModBessel(s) => (1.0 + 0.75 * n.norm_sq() as f64).powf(0.5 * s),
        }
    }
}

impl fmt::Display for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MultiplierSymbol::D => write!(f, "D"),
            MultiplierSymbol::DPow(a) => write!(f, "D^{a}"),
            MultiplierSymbol::Bessel(s) => write!(f, "bessel^{s}"),
            MultiplierSymbol::ModBessel(s) => write!(f, "modbessel^{s}"),
        }
    }
}

/// Diagonal Fourier action `coeff(n) -> sym(n) * coeff(n)`. Even symbols
/// preserve Hermitian symmetry, and the action commutes with projection.
pub fn apply_multiplier(sym: &MultiplierSymbol, f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    let lattice = f.lattice().clone();
    for (bin, c) in out.coeffs_mut().iter_mut().enumerate() {
        if c.norm_sqr() != 0.0 {
            *c *= sym.eval(lattice.freq_of(bin));
        }
    }
    out.debug_assert_symmetric();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_lattice, BandLimit};
    use num_complex::Complex64;

    #[test]
    fn d_kills_constants() {
        let lat = make_lattice(8, BandLimit::Limited(2)).unwrap();
        let mut f = SpectralField::zeros(&lat);
        f.set_pair(Freq::ZERO, Complex64::new(3.0, 0.0));
        let g = apply_multiplier(&MultiplierSymbol::D, &f);
        assert_eq!(g.l2_norm(), 0.0);
    }

    #[test]
    fn bessel_squared_on_unit_mode_is_two() {
        let lat = make_lattice(8, BandLimit::Limited(1)).unwrap();
        let mut f = SpectralField::zeros(&lat);
        f.set_pair(Freq::new(1, 0), Complex64::new(1.0, 0.0));
        let g = apply_multiplier(&MultiplierSymbol::Bessel(2.0), &f);
        assert!((g.get(Freq::new(1, 0)).re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn mod_bessel_is_one_at_origin() {
        assert_eq!(MultiplierSymbol::ModBessel(1.0).eval(Freq::ZERO), 1.0);
        // and sqrt(1 + 3/4*4) = 2 on |n| = 2
        assert!((MultiplierSymbol::ModBessel(1.0).eval(Freq::new(2, 0)) - 2.0).abs() < 1e-15);
    }
}

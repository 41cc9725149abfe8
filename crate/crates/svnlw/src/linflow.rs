//! Exact linear flows of the viscous wave operator.
//!
//! Each Fourier mode of the homogeneous equation
//! `dtt u + (1 - Lap) u + D dt u = 0` is a damped oscillator with rate
//! `gamma = |n|/2` and frequency `omega = <<n>> = sqrt(1 + (3/4)|n|^2)`
//! (note `gamma^2 + omega^2 = <n>^2`). The flow matrix, its forcing response,
//! and the Poisson semigroup below are all evaluated from the closed-form
//! entries rather than generic matrix exponentials.

use num_complex::Complex64;

use crate::spectral::{
    apply_multiplier, transform, FrequencyLattice, Freq, MultiplierSymbol, SpectralField,
};
use crate::stats::{ols, OlsFit};
use crate::{Error, Result};

/// Damping rate `|n|/2` of a mode (zero when the damping term is dropped).
pub fn damping_rate(n: Freq, damped: bool) -> f64 {
    if damped {
        0.5 * n.norm()
    } else {
        0.0
    }
}

/// Oscillation frequency of a mode: `<<n>>` with damping, `<n>` without.
pub fn osc_freq(n: Freq, damped: bool) -> f64 {
    if damped {
        (1.0 + 0.75 * n.norm_sq() as f64).sqrt()
    } else {
        n.bessel_sq().sqrt()
    }
}

/// Per-mode 2x2 flow matrix `G(n, t)` acting on `(u(n), dt u(n))`.
///
/// Row one carries the two propagator coefficient functions (the top-right
/// entry is the forcing-response symbol); row two is its time derivative.
pub fn flow_matrix(n: Freq, t: f64, damped: bool) -> [[f64; 2]; 2] {
    let g = damping_rate(n, damped);
    let w = osc_freq(n, damped);
    let e = (-g * t).exp();
    let (s, c) = (w * t).sin_cos();
    let bessel_sq = n.bessel_sq(); // = g^2 + w^2 in both damping conventions
    [
        [e * (c + (g / w) * s), e * s / w],
        [-e * (bessel_sq / w) * s, e * (c - (g / w) * s)],
    ]
}

/// `int_0^h G(s) e2 ds`: the response of one step to forcing held constant.
/// Component two integrates exactly to `G12(h)`.
pub fn forcing_response(n: Freq, h: f64, damped: bool) -> [f64; 2] {
    let g = damping_rate(n, damped);
    let w = osc_freq(n, damped);
    let e = (-g * h).exp();
    let (s, c) = (w * h).sin_cos();
    let bessel_sq = n.bessel_sq();
    let j1 = (w - e * (g * s + w * c)) / (w * bessel_sq);
    let j2 = e * s / w;
    [j1, j2]
}

/// A phase-space point `(v, dt v)` of the wave dynamics at a time stamp.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub v: SpectralField,
    pub vt: SpectralField,
    pub t: f64,
}

impl FlowState {
    pub fn new(v: SpectralField, vt: SpectralField, t: f64) -> Self {
        assert_eq!(
            v.lattice().grid_size(),
            vt.lattice().grid_size(),
            "state components must share one lattice"
        );
        FlowState { v, vt, t }
    }

    pub fn zeros(lattice: &FrequencyLattice) -> Self {
        FlowState {
            v: SpectralField::zeros(lattice),
            vt: SpectralField::zeros(lattice),
            t: 0.0,
        }
    }

    /// `(||v||_{H^s}^2 + ||dt v||_{H^{s-1}}^2)^{1/2}`, the natural pair norm.
    pub fn pair_norm(&self, s: f64) -> f64 {
        self.v
            .sobolev_l2(s)
            .hypot(self.vt.sobolev_l2(s - 1.0))
    }

    pub fn sup_norm(&self) -> Result<f64> {
        let grid = transform(&self.v)?;
        Ok(grid.iter().fold(0.0f64, |a, v| a.max(v.abs())))
    }
}

/// Applies the homogeneous flow for time `t >= 0`, mode by mode. The first
/// component realizes the data-to-solution propagator; the second is its
/// exact time derivative.
pub fn homogeneous_flow(t: f64, state: &FlowState) -> FlowState {
    homogeneous_flow_damped(t, state, true)
}

/// Same flow with the damping symbol optionally zeroed (then the evolution is
/// the conservative wave rotation and `t` may be negative).
pub fn homogeneous_flow_damped(t: f64, state: &FlowState, damped: bool) -> FlowState {
    assert!(t >= 0.0 || !damped, "damped flow runs forward in time");
    let lattice = state.v.lattice().clone();
    let mut v = SpectralField::zeros(&lattice);
    let mut vt = SpectralField::zeros(&lattice);
    for bin in 0..lattice.num_bins() {
        let a = state.v.coeffs()[bin];
        let b = state.vt.coeffs()[bin];
        if a.norm_sqr() == 0.0 && b.norm_sqr() == 0.0 {
            continue;
        }
        let n = lattice.freq_of(bin);
        let g = flow_matrix(n, t, damped);
        v.coeffs_mut()[bin] = g[0][0] * a + g[0][1] * b;
        vt.coeffs_mut()[bin] = g[1][0] * a + g[1][1] * b;
    }
    v.debug_assert_symmetric();
    vt.debug_assert_symmetric();
    FlowState::new(v, vt, state.t + t)
}

/// Forcing-to-solution propagator at time `t`:
/// `coeff(n) -> e^{-|n| t / 2} sin(t <<n>>) / <<n>> * coeff(n)`.
pub fn duhamel_propagate(t: f64, f: &SpectralField) -> SpectralField {
    assert!(t >= 0.0);
    let mut out = f.clone();
    let lattice = f.lattice().clone();
    for (bin, c) in out.coeffs_mut().iter_mut().enumerate() {
        if c.norm_sqr() != 0.0 {
            let n = lattice.freq_of(bin);
            *c *= flow_matrix(n, t, true)[0][1];
        }
    }
    out.debug_assert_symmetric();
    out
}

/// `D^alpha P(t)` with the Poisson semigroup `P(t) = e^{-D t / 2}`.
///
/// Unbounded at `t = 0` for `alpha > 0`; that case is rejected.
pub fn poisson_apply(t: f64, alpha: f64, f: &SpectralField) -> Result<SpectralField> {
    assert!(t >= 0.0 && alpha >= 0.0);
    if t == 0.0 && alpha > 0.0 {
        return Err(Error::PoissonUnboundedAtZero(alpha));
    }
    let mut out = f.clone();
    let lattice = f.lattice().clone();
    for (bin, c) in out.coeffs_mut().iter_mut().enumerate() {
        if c.norm_sqr() != 0.0 {
            let n = lattice.freq_of(bin);
            *c *= poisson_symbol(n.norm(), t, alpha);
        }
    }
    out.debug_assert_symmetric();
    Ok(out)
}

fn poisson_symbol(abs_n: f64, t: f64, alpha: f64) -> f64 {
    let pow = if alpha == 0.0 { 1.0 } else { abs_n.powf(alpha) };
    pow * (-0.5 * abs_n * t).exp()
}

/// `L^2 -> L^2` operator norm of `D^alpha P(t)` on a lattice with the given
/// maximal band: the maximum of the symbol over achievable radii.
pub fn poisson_operator_norm(alpha: f64, t: f64, max_band: u32) -> f64 {
    let b = max_band as i64;
    let mut best: f64 = if alpha == 0.0 { 1.0 } else { 0.0 };
    let mut seen = std::collections::BTreeSet::new();
    for n1 in 0..=b {
        for n2 in 0..=n1 {
            let r2 = n1 * n1 + n2 * n2;
            if r2 <= b * b && seen.insert(r2) && r2 > 0 {
                let v = poisson_symbol((r2 as f64).sqrt(), t, alpha);
                best = best.max(v);
            }
        }
    }
    best
}

/// Fitted decay exponent of the `(p, q) = (2, 2)` semigroup norm.
#[derive(Clone, Copy, Debug)]
pub struct SchauderFit {
    pub alpha: f64,
    pub fitted_exponent: f64,
    pub r_squared: f64,
}

/// Log-log regression of `||D^alpha P(t)||_{L^2 -> L^2}` against `t` over the
/// given grid of times in `(0, 1]`. The decay exponent should come out as
/// `-alpha`.
pub fn schauder_exponent_check(alpha: f64, t_grid: &[f64], max_band: u32) -> Result<SchauderFit> {
    assert!(t_grid.iter().all(|&t| t > 0.0 && t <= 1.0));
    let xs: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = t_grid
        .iter()
        .map(|&t| poisson_operator_norm(alpha, t, max_band).ln())
        .collect();
    let OlsFit {
        slope, r_squared, ..
    } = ols(&xs, &ys)?;
    Ok(SchauderFit {
        alpha,
        fitted_exponent: slope,
        r_squared,
    })
}

/// Apply the 2x2 flow to one complex mode pair.
pub fn apply_mode_flow(g: &[[f64; 2]; 2], z: (Complex64, Complex64)) -> (Complex64, Complex64) {
    (
        g[0][0] * z.0 + g[0][1] * z.1,
        g[1][0] * z.0 + g[1][1] * z.1,
    )
}

/// Sanity identity behind the kernel scaling argument:
/// `|n|^a e^{-|n| t/2} = t^{-a} (t|n|)^a e^{-(t|n|)/2}`, checked pointwise.
pub fn kernel_scaling_residual(alpha: f64, max_band: u32, t_grid: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &t in t_grid {
        for r in 1..=max_band {
            let abs_n = r as f64;
            let lhs = poisson_symbol(abs_n, t, alpha);
            let rhs = t.powf(-alpha) * (t * abs_n).powf(alpha) * (-0.5 * t * abs_n).exp();
            worst = worst.max((lhs - rhs).abs() / rhs.max(1e-300));
        }
    }
    worst
}

/// Per-mode conserved quantity of the undamped flow,
/// `<n>^2 |u(n)|^2 + |dt u(n)|^2`.
pub fn mode_energy(n: Freq, pair: (Complex64, Complex64)) -> f64 {
    n.bessel_sq() * pair.0.norm_sqr() + pair.1.norm_sqr()
}

/// Grid-max `W^{s, inf}` norm helper shared by the growth diagnostics.
pub fn w_inf_norm(f: &SpectralField, s: f64) -> Result<f64> {
    let weighted = apply_multiplier(&MultiplierSymbol::Bessel(s), f);
    let grid = transform(&weighted)?;
    Ok(grid.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_lattice, BandLimit};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn random_state(m: usize, band: u32, seed: u64) -> FlowState {
        let lat = make_lattice(m, BandLimit::Limited(band)).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let mut draw = |_: Freq| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        };
        let v = SpectralField::from_rule(&lat, &mut draw);
        let vt = SpectralField::from_rule(&lat, &mut draw);
        FlowState::new(v, vt, 0.0)
    }

    #[test]
    fn flow_at_zero_is_identity() {
        let state = random_state(16, 5, 7);
        let out = homogeneous_flow(0.0, &state);
        for (a, b) in out.v.coeffs().iter().zip(state.v.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
        for (a, b) in out.vt.coeffs().iter().zip(state.vt.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_mode_solves_sin_t() {
        // (u0, u1) = (0, 1) at n = 0: first component is sin(t)
        let lat = make_lattice(8, BandLimit::Limited(1)).unwrap();
        let mut state = FlowState::zeros(&lat);
        state.vt.set_pair(Freq::ZERO, Complex64::new(1.0, 0.0));
        for &t in &[0.3, 1.0, 2.5] {
            let out = homogeneous_flow(t, &state);
            assert!((out.v.get(Freq::ZERO).re - t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_property() {
        let state = random_state(16, 6, 11);
        let one = homogeneous_flow(0.7, &homogeneous_flow(0.4, &state));
        let two = homogeneous_flow(1.1, &state);
        for (a, b) in one.v.coeffs().iter().zip(two.v.coeffs()) {
            assert!((a - b).norm() < 1e-10);
        }
        for (a, b) in one.vt.coeffs().iter().zip(two.vt.coeffs()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn finite_difference_matches_second_component() {
        let state = random_state(8, 2, 3);
        let t = 0.5;
        let base = homogeneous_flow(t, &state);
        for &h in &[1e-4, 5e-5] {
            let ahead = homogeneous_flow(t + h, &state);
            let mut worst = 0.0f64;
            for bin in 0..base.v.coeffs().len() {
                let fd = (ahead.v.coeffs()[bin] - base.v.coeffs()[bin]) / h;
                worst = worst.max((fd - base.vt.coeffs()[bin]).norm());
            }
            // first-order one-sided difference: error scales with h
            assert!(worst < 40.0 * h, "fd error {worst} too large for h={h}");
        }
    }

    #[test]
    fn duhamel_matches_flow_top_right_exactly() {
        let lat = make_lattice(16, BandLimit::Limited(5)).unwrap();
        let state = random_state(16, 5, 23);
        let t = 0.8;
        let from_flow = homogeneous_flow(t, &FlowState::new(SpectralField::zeros(&lat), state.vt.clone(), 0.0));
        let direct = duhamel_propagate(t, &state.vt);
        assert_eq!(from_flow.v.coeffs(), direct.coeffs());
    }

    #[test]
    fn duhamel_at_zero_vanishes_and_obeys_decay_bound() {
        let state = random_state(16, 7, 5);
        assert_eq!(duhamel_propagate(0.0, &state.v).l2_norm(), 0.0);
        let t = 1.3;
        for n1 in -7..=7 {
            for n2 in -7..=7 {
                let n = Freq::new(n1, n2);
                let sym = flow_matrix(n, t, true)[0][1].abs();
                let bound = (-0.5 * n.norm() * t).exp() / osc_freq(n, true);
                assert!(sym <= bound + 1e-15);
            }
        }
        // n = 0, t = pi/2: symbol is exactly sin(pi/2)/1 = 1
        let sym0 = flow_matrix(Freq::ZERO, std::f64::consts::FRAC_PI_2, true)[0][1];
        assert!((sym0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn undamped_flow_conserves_mode_energy() {
        let state = random_state(16, 6, 31);
        let out = homogeneous_flow_damped(2.3, &state, false);
        let lat = state.v.lattice().clone();
        for bin in 0..lat.num_bins() {
            let n = lat.freq_of(bin);
            let before = mode_energy(n, (state.v.coeffs()[bin], state.vt.coeffs()[bin]));
            let after = mode_energy(n, (out.v.coeffs()[bin], out.vt.coeffs()[bin]));
            assert!((before - after).abs() <= 1e-10 * (1.0 + before));
        }
    }

    #[test]
    fn damped_mode_energy_never_increases() {
        let state = random_state(16, 6, 57);
        let lat = state.v.lattice().clone();
        for &t in &[0.1, 0.5, 2.0, 5.0] {
            let out = homogeneous_flow(t, &state);
            for bin in 0..lat.num_bins() {
                let n = lat.freq_of(bin);
                if n.norm_sq() == 0 {
                    continue;
                }
                let before = mode_energy(n, (state.v.coeffs()[bin], state.vt.coeffs()[bin]));
                let after = mode_energy(n, (out.v.coeffs()[bin], out.vt.coeffs()[bin]));
                assert!(after <= before * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn poisson_basics() {
        let lat = make_lattice(8, BandLimit::Limited(2)).unwrap();
        let mut constant = SpectralField::zeros(&lat);
        constant.set_pair(Freq::ZERO, Complex64::new(4.0, 0.0));
        // alpha = 0, t = 0: identity
        let id = poisson_apply(0.0, 0.0, &constant).unwrap();
        assert_eq!(id.coeffs(), constant.coeffs());
        // constant field, alpha > 0: zero
        let z = poisson_apply(0.5, 1.0, &constant).unwrap();
        assert_eq!(z.l2_norm(), 0.0);
        // t = 0 with alpha > 0 is rejected
        assert!(poisson_apply(0.0, 0.5, &constant).is_err());
    }

    #[test]
    fn schauder_exponents_on_dyadic_grid() {
        let t_grid: Vec<f64> = (2..=8).map(|j| 2f64.powi(-j)).collect();
        for &(alpha, tol) in &[(0.0, 0.05), (0.5, 0.1), (1.0, 0.1)] {
            let fit = schauder_exponent_check(alpha, &t_grid, 1024).unwrap();
            assert!(
                (fit.fitted_exponent + alpha).abs() < tol,
                "alpha={alpha}: slope {}",
                fit.fitted_exponent
            );
        }
    }

    #[test]
    fn kernel_scaling_identity_holds() {
        let t_grid: Vec<f64> = (2..=8).map(|j| 2f64.powi(-j)).collect();
        for &alpha in &[0.25, 0.5, 1.0] {
            assert!(kernel_scaling_residual(alpha, 64, &t_grid) < 1e-12);
        }
    }
}

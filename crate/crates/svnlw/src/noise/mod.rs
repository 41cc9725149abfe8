//! Exact Gaussian sampling of the forcing objects.
//!
//! Every Fourier mode of the linear stochastic equation
//! `dtt z + (1 - Lap) z + D dt z = sqrt(2) D^{1/2} xi` is a damped oscillator
//! driven by an independent complex Brownian motion, so the pair
//! `(z(n), dt z(n))` has an exactly computable Gaussian transition kernel:
//! mean `G(n, h) * previous pair`, covariance the elementary integral of the
//! propagated noise injection. Sampling with that kernel removes all
//! time-discretization bias, so the Monte Carlo suites test the closed-form
//! variance identities directly.

mod path;
mod rng;
mod tail;
mod transition;

pub use path::{sample_mu1, sample_phi_path, sample_psi_path, NoisePath, RandomData};
pub use rng::{RngStream, StreamDomain};
pub use tail::{tail_estimate, TailReport};
pub use transition::ModeTransition;

use crate::spectral::Freq;

/// Time-independent variance of the stationary field:
/// `alpha_N = sum_{|n| <= N} 1 / <n>^2`.
pub fn alpha_closed_form(band: u32) -> f64 {
    let b = band as i64;
    let mut sum = 0.0;
    for n1 in -b..=b {
        for n2 in -b..=b {
            if n1 * n1 + n2 * n2 <= b * b {
                sum += 1.0 / (1.0 + (n1 * n1 + n2 * n2) as f64);
            }
        }
    }
    sum
}

/// One mode's contribution to the pointwise variance of the zero-data
/// stochastic convolution at time `t`.
pub(crate) fn sigma_mode(n: Freq, t: f64) -> f64 {
    let nsq = n.norm_sq() as f64;
    if nsq == 0.0 {
        // unforced mode: the injected noise carries a factor |n|
        return 0.0;
    }
    let abs_n = nsq.sqrt();
    let bessel_sq = 1.0 + nsq;
    let w = (1.0 + 0.75 * nsq).sqrt();
    let (s2, c2) = (2.0 * w * t).sin_cos();
    1.0 / bessel_sq
        - ((-t * abs_n).exp() / (w * w))
            * (1.0 - (nsq / (4.0 * bessel_sq)) * c2 + (abs_n * w / (2.0 * bessel_sq)) * s2)
}

/// Pointwise variance `sigma_N(t)` of the band-limited stochastic convolution,
/// from the closed-form mode sum. Vanishes at `t = 0` and tends to
/// `alpha_N - 1` as `t -> infinity` (the unforced zero mode contributes
/// nothing instead of its stationary `1`).
pub fn sigma_closed_form(t: f64, band: u32) -> f64 {
    assert!(t >= 0.0);
    let b = band as i64;
    let mut sum = 0.0;
    for n1 in -b..=b {
        for n2 in -b..=b {
            if n1 * n1 + n2 * n2 <= b * b {
                sum += sigma_mode(Freq::new(n1 as i32, n2 as i32), t);
            }
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_small_bands_match_hand_sums() {
        assert_eq!(alpha_closed_form(0), 1.0);
        assert!((alpha_closed_form(1) - 3.0).abs() < 1e-15);
        // |n| <= 2: 1 + 4*(1/2) + 4*(1/3) + 4*(1/5)
        assert!((alpha_closed_form(2) - (1.0 + 2.0 + 4.0 / 3.0 + 0.8)).abs() < 1e-14);
    }

    #[test]
    fn sigma_vanishes_at_zero_and_for_the_zero_band() {
        assert!(sigma_closed_form(0.0, 8).abs() < 1e-12);
        assert!(sigma_closed_form(0.0, 32).abs() < 1e-12);
        for &t in &[0.1, 1.0, 10.0] {
            assert_eq!(sigma_closed_form(t, 0), 0.0);
        }
    }

    #[test]
    fn sigma_long_time_limit_is_alpha_minus_one() {
        for &band in &[1u32, 4, 8] {
            let diff = sigma_closed_form(50.0, band) - (alpha_closed_form(band) - 1.0);
            assert!(diff.abs() < 1e-10, "band {band}: {diff}");
        }
    }

    #[test]
    fn sigma_is_nondecreasing_in_band_and_bounded_by_alpha() {
        for &t in &[0.2, 0.7, 1.5, 4.0] {
            let mut prev = 0.0;
            for band in [1u32, 2, 4, 8, 16] {
                let s = sigma_closed_form(t, band);
                assert!(s >= prev - 1e-12);
                assert!(s <= alpha_closed_form(band) + 1e-12);
                prev = s;
            }
        }
    }

    #[test]
    fn sigma_grows_like_log_band() {
        // least-squares slope of sigma_N(1) against log N is positive and the
        // dyadic increments stabilize (ratios of successive increments -> 1)
        let bands = [4u32, 8, 16, 32, 64];
        let vals: Vec<f64> = bands.iter().map(|&b| sigma_closed_form(1.0, b)).collect();
        let xs: Vec<f64> = bands.iter().map(|&b| (b as f64).ln()).collect();
        let fit = crate::stats::ols(&xs, &vals).unwrap();
        assert!(fit.slope > 0.0);
        let incr: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
        for pair in incr.windows(2) {
            let ratio = pair[1] / pair[0];
            assert!((ratio - 1.0).abs() < 0.15, "increment ratio {ratio}");
        }
    }
}

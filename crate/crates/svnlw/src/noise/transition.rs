use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linflow::{damping_rate, flow_matrix, osc_freq};
use crate::spectral::Freq;

/// Exact one-step Gaussian transition of a forced mode pair
/// `(z(n), dt z(n))` over a step of length `h`.
///
/// The conditional law is `N(G(n, h) z, Sigma(n, h))` with the complex
/// covariance `Sigma = 2|n| int_0^h g(s) g(s)^T ds`, `g` the second column of
/// the flow matrix; real and imaginary parts carry half of `Sigma` each.
#[derive(Clone, Debug)]
pub struct ModeTransition {
    pub flow: [[f64; 2]; 2],
    chol: [[f64; 2]; 2],
    forced: bool,
}

impl ModeTransition {
    pub fn new(n: Freq, h: f64) -> Self {
        assert!(h >= 0.0);
        let flow = flow_matrix(n, h, true);
        let cov = Self::covariance(n, h);
        ModeTransition {
            flow,
            chol: cholesky_2x2(cov),
            forced: n.norm_sq() > 0 && h > 0.0,
        }
    }

    /// Closed-form complex covariance of the noise accumulated over one step.
    /// Entry `(0,0)` summed over `{|n| <= N}` reproduces the pointwise
    /// variance closed form.
    pub fn covariance(n: Freq, h: f64) -> [[f64; 2]; 2] {
        let nsq = n.norm_sq() as f64;
        if nsq == 0.0 || h == 0.0 {
            return [[0.0; 2]; 2];
        }
        let abs_n = nsq.sqrt();
        let g = damping_rate(n, true);
        let w = osc_freq(n, true);
        let (a, b) = (2.0 * g, 2.0 * w);
        let den = a * a + b * b; // = 4 <n>^2
        let eah = (-a * h).exp();
        let (sbh, cbh) = (b * h).sin_cos();
        let int_one = (1.0 - eah) / a;
        let int_cos = (a - eah * (a * cbh - b * sbh)) / den;
        let int_sin = (b - eah * (a * sbh + b * cbh)) / den;
        let iss = 0.5 * (int_one - int_cos);
        let isc = 0.5 * int_sin;
        let icc = 0.5 * (int_one + int_cos);
        let s11 = (2.0 * abs_n / (w * w)) * iss;
        let s12 = (2.0 * abs_n / w) * (isc - (g / w) * iss);
        let s22 = 2.0 * abs_n * (icc - 2.0 * (g / w) * isc + (g * g / (w * w)) * iss);
        [[s11, s12], [s12, s22]]
    }

    /// Advances one complex mode pair, drawing 4 standard normals from `rng`
    /// (none when the mode is unforced).
    pub fn advance(
        &self,
        z: (Complex64, Complex64),
        rng: &mut ChaCha8Rng,
    ) -> (Complex64, Complex64) {
        let mean = (
            self.flow[0][0] * z.0 + self.flow[0][1] * z.1,
            self.flow[1][0] * z.0 + self.flow[1][1] * z.1,
        );
        if !self.forced {
            return mean;
        }
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let (g1, g2): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (g3, g4): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n1 = Complex64::new(self.chol[0][0] * g1, self.chol[0][0] * g3) * half;
        let n2 = Complex64::new(
            self.chol[1][0] * g1 + self.chol[1][1] * g2,
            self.chol[1][0] * g3 + self.chol[1][1] * g4,
        ) * half;
        (mean.0 + n1, mean.1 + n2)
    }
}

fn cholesky_2x2(cov: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let a = cov[0][0];
    if a <= 0.0 {
        return [[0.0; 2]; 2];
    }
    let l11 = a.sqrt();
    let l21 = cov[1][0] / l11;
    let l22 = (cov[1][1] - l21 * l21).max(0.0).sqrt();
    [[l11, 0.0], [l21, l22]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::sigma_mode;

    /// Midpoint-rule reference for the covariance integrals.
    fn covariance_quadrature(n: Freq, h: f64, steps: usize) -> [[f64; 2]; 2] {
        let g = damping_rate(n, true);
        let w = osc_freq(n, true);
        let abs_n = n.norm();
        let dt = h / steps as f64;
        let mut out = [[0.0; 2]; 2];
        for i in 0..steps {
            let s = (i as f64 + 0.5) * dt;
            let e = (-g * s).exp();
            let g12 = e * (w * s).sin() / w;
            let g22 = e * ((w * s).cos() - (g / w) * (w * s).sin());
            out[0][0] += 2.0 * abs_n * g12 * g12 * dt;
            out[0][1] += 2.0 * abs_n * g12 * g22 * dt;
            out[1][1] += 2.0 * abs_n * g22 * g22 * dt;
        }
        out[1][0] = out[0][1];
        out
    }

    #[test]
    fn covariance_matches_quadrature() {
        for n in [Freq::new(1, 0), Freq::new(1, 1), Freq::new(2, -3)] {
            for &h in &[0.2, 0.9] {
                let exact = ModeTransition::covariance(n, h);
                let quad = covariance_quadrature(n, h, 400_000);
                for i in 0..2 {
                    for j in 0..2 {
                        assert!(
                            (exact[i][j] - quad[i][j]).abs() < 1e-9,
                            "n={n:?} h={h} entry ({i},{j}): {} vs {}",
                            exact[i][j],
                            quad[i][j]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn covariance_top_left_sums_to_sigma() {
        for n in [Freq::new(1, 0), Freq::new(3, 2), Freq::new(0, 5)] {
            for &t in &[0.3, 1.0, 2.7] {
                let c = ModeTransition::covariance(n, t)[0][0];
                assert!((c - sigma_mode(n, t)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn chapman_kolmogorov_refinement_invariance() {
        // two-step covariance: G(h2) S(h1) G(h2)^T + S(h2) = S(h1 + h2)
        for n in [Freq::new(1, 0), Freq::new(2, 2), Freq::new(4, -1)] {
            let (h1, h2) = (0.4, 0.35);
            let s1 = ModeTransition::covariance(n, h1);
            let s2 = ModeTransition::covariance(n, h2);
            let full = ModeTransition::covariance(n, h1 + h2);
            let g = flow_matrix(n, h2, true);
            for i in 0..2 {
                for j in 0..2 {
                    let mut v = s2[i][j];
                    for a in 0..2 {
                        for b in 0..2 {
                            v += g[i][a] * s1[a][b] * g[j][b];
                        }
                    }
                    assert!(
                        (v - full[i][j]).abs() < 1e-10,
                        "n={n:?} ({i},{j}): {v} vs {}",
                        full[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn stationary_covariance_is_one_over_bessel_and_one() {
        for n in [Freq::new(1, 0), Freq::new(2, 1)] {
            let s = ModeTransition::covariance(n, 60.0);
            assert!((s[0][0] - 1.0 / n.bessel_sq()).abs() < 1e-12);
            assert!((s[1][1] - 1.0).abs() < 1e-12);
            assert!(s[0][1].abs() < 1e-12);
        }
    }
}

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::noise::{RngStream, StreamDomain};
use crate::spectral::{
    canonical_modes, transform, BandLimit, FrequencyLattice, Freq, SpectralField,
};
use crate::wick::{hermite, wick_power};
use crate::{Error, Result};

/// Splitting integrator for the full truncated dynamics in the Ito form
/// `d(u1, u2) = Hamiltonian part + Ornstein-Uhlenbeck part`:
/// a Strang composition of a half velocity-refreshment step, the Hamiltonian
/// flow of the Wick-renormalized wave energy, and another half refreshment.
#[derive(Clone, Debug)]
pub struct SplitConfig {
    /// Frequency cutoff of the dynamics (state and nonlinearity).
    pub band: u32,
    pub degree: u32,
    pub grid_size: usize,
    pub step: f64,
    /// Stationary variance parameter of the Wick powers.
    pub alpha: f64,
    /// Disable to run the pure linear (rotation + OU) dynamics.
    pub kick_enabled: bool,
    /// Disable to run the pure Hamiltonian dynamics.
    pub ou_enabled: bool,
    /// Disable to isolate the refreshment sub-dynamics.
    pub rotation_enabled: bool,
}

impl SplitConfig {
    pub fn new(band: u32, degree: u32, grid_size: usize, step: f64, alpha: f64) -> Result<Self> {
        let required = 2 * ((degree + 1) as usize * band as usize + 1);
        if grid_size < required {
            return Err(Error::DealiasTooSmall {
                m: grid_size,
                band,
                degree: degree + 1,
                required,
            });
        }
        Ok(SplitConfig {
            band,
            degree,
            grid_size,
            step,
            alpha,
            kick_enabled: true,
            ou_enabled: true,
            rotation_enabled: true,
        })
    }

    pub fn lattice(&self) -> FrequencyLattice {
        FrequencyLattice::new(self.grid_size, BandLimit::Limited(self.band))
            .expect("validated in new")
    }
}

/// Phase-space point `(u1, u2) = (position, velocity)` of the truncated
/// dynamics, band-limited to the configured cutoff.
#[derive(Clone, Debug)]
pub struct SplitState {
    pub position: SpectralField,
    pub velocity: SpectralField,
    pub t: f64,
}

/// Source of the standard complex Gaussians refreshing the velocity modes;
/// half-steps are indexed globally so streams are scheduling-independent.
pub trait OuNoise {
    fn draw(&mut self, n: Freq, half_index: u64) -> Complex64;
}

/// Fresh keyed draws, one stream per `(mode, half-step)`.
pub struct KeyedOu {
    pub stream: RngStream,
}

impl OuNoise for KeyedOu {
    fn draw(&mut self, n: Freq, half_index: u64) -> Complex64 {
        standard_complex_from(self.stream, StreamDomain::OuKick, n, half_index)
    }
}

/// Refreshment noise assembled from a fixed fine partition of time, so runs
/// with different step sizes see the same underlying Brownian increments
/// (used by the weak self-convergence check). Each half-step of the driven
/// run covers `fine_per_half` fine cells of width `h_fine`.
pub struct RefinedOu {
    pub stream: RngStream,
    pub fine_per_half: u32,
    pub h_fine: f64,
}

impl OuNoise for RefinedOu {
    fn draw(&mut self, n: Freq, half_index: u64) -> Complex64 {
        let abs_n = n.norm();
        if abs_n == 0.0 {
            return Complex64::default();
        }
        let q = (-2.0 * abs_n * self.h_fine).exp();
        let cell_sd = (1.0 - q).sqrt();
        let mut total = Complex64::default();
        for i in 0..self.fine_per_half {
            let global = half_index * self.fine_per_half as u64 + i as u64;
            let g = standard_complex_from(self.stream, StreamDomain::OuKick, n, global);
            let remaining = (self.fine_per_half - 1 - i) as f64 * self.h_fine;
            total += g * cell_sd * (-abs_n * remaining).exp();
        }
        // the composed variance telescopes to 1 - q^fine_per_half, the exact
        // half-step refreshment variance; rescale to a standard draw
        total / (1.0 - q.powi(self.fine_per_half as i32)).sqrt()
    }
}

fn standard_complex_from(
    stream: RngStream,
    domain: StreamDomain,
    n: Freq,
    step: u64,
) -> Complex64 {
    let mut rng = stream.rng_at(domain, n, step);
    if n.is_self_paired() {
        Complex64::new(rng.sample(StandardNormal), 0.0)
    } else {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal) * half,
            rng.sample::<f64, _>(StandardNormal) * half,
        )
    }
}

/// Exact velocity refreshment over `tau`:
/// `u2(n) <- e^{-|n| tau} u2(n) + gamma_n`, `E|gamma_n|^2 = 1 - e^{-2|n| tau}`
/// (identity on the undamped zero mode). Preserves the white-noise marginal.
fn ou_sub_step(
    state: &mut SplitState,
    modes: &[Freq],
    tau: f64,
    noise: &mut dyn OuNoise,
    half_index: u64,
) {
    for &n in modes {
        let abs_n = n.norm();
        if abs_n == 0.0 {
            continue;
        }
        let decay = (-abs_n * tau).exp();
        let sd = (1.0 - decay * decay).sqrt();
        let gamma = noise.draw(n, half_index) * sd;
        let old = state.velocity.get(n);
        state.velocity.set_pair(n, old * decay + gamma);
    }
}

/// Nonlinearity kick `u2 <- u2 - dt * P_N(H_k(u1; alpha))`.
fn kick_sub_step(state: &mut SplitState, cfg: &SplitConfig, dt: f64) -> Result<()> {
    let wicked = wick_power(&state.position, cfg.degree, cfg.alpha)?;
    let projected = wicked.project(BandLimit::Limited(cfg.band));
    let forced = projected.embed(state.velocity.lattice())?;
    state.velocity.add_scaled(&forced, -dt);
    Ok(())
}

/// Exact rotation of the quadratic wave energy: per mode,
/// `(u1, u2) -> (cos(w t) u1 + sin(w t)/w u2, -w sin(w t) u1 + cos(w t) u2)`
/// with `w = <n>`.
fn rotation_sub_step(state: &mut SplitState, modes: &[Freq], dt: f64) {
    for &n in modes {
        let w = n.bessel_sq().sqrt();
        let (s, c) = (w * dt).sin_cos();
        let p = state.position.get(n);
        let q = state.velocity.get(n);
        state.position.set_pair(n, c * p + (s / w) * q);
        state.velocity.set_pair(n, -w * s * p + c * q);
    }
}

/// One Strang step: half refreshment, full Hamiltonian step (itself a Strang
/// split of the exact quadratic rotation and the nonlinearity kick), half
/// refreshment.
pub fn split_step_full(
    state: &mut SplitState,
    cfg: &SplitConfig,
    modes: &[Freq],
    noise: &mut dyn OuNoise,
    step_index: u64,
) -> Result<()> {
    let h = cfg.step;
    if cfg.ou_enabled {
        ou_sub_step(state, modes, 0.5 * h, noise, 2 * step_index);
    }
    if cfg.kick_enabled {
        kick_sub_step(state, cfg, 0.5 * h)?;
    }
    if cfg.rotation_enabled {
        rotation_sub_step(state, modes, h);
    }
    if cfg.kick_enabled {
        kick_sub_step(state, cfg, 0.5 * h)?;
    }
    if cfg.ou_enabled {
        ou_sub_step(state, modes, 0.5 * h, noise, 2 * step_index + 1);
    }
    state.t += h;
    Ok(())
}

/// The conserved functional of the Hamiltonian sub-flow:
/// quadratic wave energy plus the Wick-renormalized potential,
/// `1/2 sum <n>^2 |u1(n)|^2 + 1/2 sum |u2(n)|^2
///  + 1/(k+1) int H_{k+1}(u1(x); alpha) dx`.
pub fn hamiltonian_energy(state: &SplitState, cfg: &SplitConfig) -> Result<f64> {
    let quad = 0.5 * state.position.sobolev_l2(1.0).powi(2)
        + 0.5 * state.velocity.l2_norm().powi(2);
    let grid = transform(&state.position)?;
    let kp1 = cfg.degree + 1;
    let pot: f64 = grid
        .iter()
        .map(|&x| hermite(kp1, x, cfg.alpha))
        .sum::<f64>()
        / ((kp1 as f64) * grid.len() as f64);
    Ok(quad + pot)
}

/// Canonical mode list of the configured band, in the order the sub-steps
/// traverse it.
pub fn split_modes(cfg: &SplitConfig) -> Vec<Freq> {
    canonical_modes(cfg.band)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::alpha_closed_form;
    use crate::stats::mean_se;

    fn zero_state(cfg: &SplitConfig) -> SplitState {
        let lat = cfg.lattice();
        SplitState {
            position: SpectralField::zeros(&lat),
            velocity: SpectralField::zeros(&lat),
            t: 0.0,
        }
    }

    #[test]
    fn ou_alone_reaches_unit_stationary_variance() {
        // iterate the refreshment from u2 = 0; E|u2(n)|^2 -> 1 for n = (1,0)
        let cfg = SplitConfig::new(1, 3, 10, 0.05, 3.0).unwrap();
        let modes = split_modes(&cfg);
        let n = Freq::new(1, 0);
        let replicas = 2000;
        let steps = 200; // t = 10 >> 1/|n|
        let mut sq = Vec::with_capacity(replicas);
        for r in 0..replicas {
            let mut state = zero_state(&cfg);
            let mut noise = KeyedOu {
                stream: RngStream::new(31337, r as u64),
            };
            for j in 0..steps {
                ou_sub_step(&mut state, &modes, cfg.step, &mut noise, j as u64);
            }
            sq.push(state.velocity.get(n).norm_sqr());
        }
        let m = mean_se(&sq);
        assert!(m.z_against(1.0).abs() < 4.0, "var {} z {}", m.mean, m.z_against(1.0));
    }

    #[test]
    fn hamiltonian_flow_conserves_its_energy() {
        // kick + rotation only (no OU), k = 3, N = 2: relative drift < 1e-4
        // over T = 1 at h = 1e-3
        let mut cfg = SplitConfig::new(2, 3, 18, 1e-3, alpha_closed_form(2)).unwrap();
        cfg.ou_enabled = false;
        let modes = split_modes(&cfg);
        let lat = cfg.lattice();
        let mut state = SplitState {
            position: SpectralField::zeros(&lat),
            velocity: SpectralField::zeros(&lat),
            t: 0.0,
        };
        state.position.set_pair(Freq::new(1, 0), Complex64::new(0.4, -0.2));
        state.position.set_pair(Freq::new(0, 2), Complex64::new(-0.1, 0.3));
        state.position.set_pair(Freq::ZERO, Complex64::new(0.5, 0.0));
        state.velocity.set_pair(Freq::new(1, 1), Complex64::new(0.2, 0.1));
        let mut noise = KeyedOu {
            stream: RngStream::new(1, 0),
        };
        let e0 = hamiltonian_energy(&state, &cfg).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..1000u64 {
            split_step_full(&mut state, &cfg, &modes, &mut noise, j).unwrap();
            let e = hamiltonian_energy(&state, &cfg).unwrap();
            worst = worst.max((e - e0).abs() / e0.abs());
        }
        assert!(worst < 1e-4, "energy drift {worst}");
    }

    #[test]
    fn refined_ou_matches_keyed_variance() {
        // composed fine increments keep the exact half-step variance
        let n = Freq::new(1, 0);
        let mut refined = RefinedOu {
            stream: RngStream::new(5, 0),
            fine_per_half: 4,
            h_fine: 0.025,
        };
        let draws: Vec<f64> = (0..4000)
            .map(|i| {
                let mut r = RefinedOu { stream: RngStream::new(5, i), ..refined };
                let z = r.draw(n, 0);
                z.norm_sqr()
            })
            .collect();
        let _ = refined.draw(n, 1);
        let m = mean_se(&draws);
        assert!(m.z_against(1.0).abs() < 4.0, "refined variance {}", m.mean);
    }
}

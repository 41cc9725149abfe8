use super::SolverConfig;
use crate::linflow::{flow_matrix, FlowState};
use crate::spectral::{BandLimit, FrequencyLattice, SpectralField};
use crate::wick::{renorm_nonlinearity, EnhancedDataSet};
use crate::Result;

/// Fixed-point iteration of the mild formulation on the enhanced data's grid,
/// with the forcing integral by composite trapezoid quadrature. An
/// independent discretization route against the exponential stepper.
#[derive(Clone, Debug)]
pub struct PicardOutcome {
    /// Iterates' trajectories are discarded; the last one is kept.
    pub trajectory: Vec<FlowState>,
    /// `sup_t` pair-H^1 distance between successive iterates.
    pub increments: Vec<f64>,
    /// Increments grew at some iteration (reported, not raised).
    pub diverged: bool,
}

/// Solves `v = Gamma(v)` by `iterations` Picard sweeps starting from the
/// homogeneous evolution of the data. `data.times` must be a uniform grid
/// covering `[0, horizon]`.
pub fn picard_solve(
    v0: &SpectralField,
    v1: &SpectralField,
    data: &EnhancedDataSet,
    cfg: &SolverConfig,
    iterations: usize,
) -> Result<PicardOutcome> {
    let times = &data.times;
    assert!(times.len() >= 2);
    let h = times[1] - times[0];
    assert!(
        times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() < 1e-12 * h.max(1.0)),
        "picard quadrature expects a uniform grid"
    );
    let lattice = FrequencyLattice::new(cfg.grid_size, BandLimit::Limited(cfg.solver_band))?;
    let k = cfg.degree;

    // homogeneous part at every grid time (fixed across iterations)
    let base: Vec<FlowState> = times
        .iter()
        .map(|&t| homogeneous_at(v0, v1, t, &lattice, cfg.damping))
        .collect::<Result<_>>()?;

    let mut current = base.clone();
    let mut increments = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        // forcing at every node from the current iterate
        let forcing: Vec<SpectralField> = current
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let f = renorm_nonlinearity(&s.v, data.xi_at(j), k)?;
                f.project(BandLimit::Limited(cfg.solver_band)).embed(&lattice)
            })
            .collect::<Result<_>>()?;

        let mut next = Vec::with_capacity(times.len());
        next.push(base[0].clone());
        for (j, &t) in times.iter().enumerate().skip(1) {
            let mut v = base[j].v.clone();
            let mut vt = base[j].vt.clone();
            for (i, f) in forcing.iter().enumerate().take(j + 1) {
                let weight = if i == 0 || i == j { 0.5 * h } else { h };
                let dt = t - times[i];
                accumulate_propagated(&mut v, &mut vt, f, dt, -weight, cfg.damping);
            }
            v.debug_assert_symmetric();
            vt.debug_assert_symmetric();
            next.push(FlowState::new(v, vt, t));
        }

        let inc = pair_distance(&current, &next);
        increments.push(inc);
        current = next;
    }
    let diverged = increments.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-9));
    Ok(PicardOutcome {
        trajectory: current,
        increments,
        diverged,
    })
}

fn homogeneous_at(
    v0: &SpectralField,
    v1: &SpectralField,
    t: f64,
    lattice: &FrequencyLattice,
    damped: bool,
) -> Result<FlowState> {
    let mut v = SpectralField::zeros(lattice);
    let mut vt = SpectralField::zeros(lattice);
    let a = v0.embed(lattice)?;
    let b = v1.embed(lattice)?;
    for bin in 0..lattice.num_bins() {
        let (x, y) = (a.coeffs()[bin], b.coeffs()[bin]);
        if x.norm_sqr() == 0.0 && y.norm_sqr() == 0.0 {
            continue;
        }
        let g = flow_matrix(lattice.freq_of(bin), t, damped);
        v.coeffs_mut()[bin] = g[0][0] * x + g[0][1] * y;
        vt.coeffs_mut()[bin] = g[1][0] * x + g[1][1] * y;
    }
    Ok(FlowState::new(v, vt, t))
}

/// `v += scale * S(dt) f`, `vt += scale * dS(dt) f`, mode-wise.
fn accumulate_propagated(
    v: &mut SpectralField,
    vt: &mut SpectralField,
    f: &SpectralField,
    dt: f64,
    scale: f64,
    damped: bool,
) {
    let lattice = f.lattice().clone();
    for (bin, c) in f.coeffs().iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let g = flow_matrix(lattice.freq_of(bin), dt, damped);
        v.coeffs_mut()[bin] += scale * g[0][1] * c;
        vt.coeffs_mut()[bin] += scale * g[1][1] * c;
    }
}

fn pair_distance(a: &[FlowState], b: &[FlowState]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut dv = x.v.clone();
            dv.add_scaled(&y.v, -1.0);
            let mut dvt = x.vt.clone();
            dvt.add_scaled(&y.vt, -1.0);
            dv.sobolev_l2(1.0).hypot(dvt.l2_norm())
        })
        .fold(0.0f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Scheme;
    use crate::spectral::make_lattice;

    #[test]
    fn zero_data_zero_forcing_fixes_zero_immediately() {
        let cfg = SolverConfig::new(3, 0, 4, 32, 0.01, 0.05, Scheme::ExpMidpoint).unwrap();
        let lat = make_lattice(32, BandLimit::Limited(4)).unwrap();
        let zero = SpectralField::zeros(&lat);
        let times: Vec<f64> = (0..=10).map(|j| 0.005 * j as f64).collect();
        let k = 3;
        let xi_zero: Vec<Vec<SpectralField>> =
            times.iter().map(|_| vec![zero.clone(); k]).collect();
        let data = EnhancedDataSet {
            v0: zero.clone(),
            v1: zero.clone(),
            times,
            xi: xi_zero,
            degree: k as u32,
        };
        let out = picard_solve(&zero, &zero, &data, &cfg, 3).unwrap();
        assert!(out.increments[0] == 0.0);
        assert!(!out.diverged);
        assert!(out.trajectory.iter().all(|s| s.v.l2_norm() == 0.0));
    }
}

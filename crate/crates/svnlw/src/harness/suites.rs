use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::config::{
    EnergyConfig, GibbsConfig, LwpConfig, SchauderConfig, VarianceConfig, WickConfig,
};
use super::report::{StatReport, SuiteOutcome};
use crate::dynamics::{
    evolve_cubic, picard_solve, run_trajectory, Scheme, SolverConfig, SplitConfig, StreamingXi,
    VStepper, XiProvider, ZeroXi,
};
use crate::gibbs::{
    default_observables, density_log_rn, gibbs_ensemble, invariance_test, InvarianceConfig,
    Observable,
};
use crate::linflow::{
    homogeneous_flow, kernel_scaling_residual, schauder_exponent_check, w_inf_norm, FlowState,
};
use crate::noise::{
    alpha_closed_form, sample_mu1, sample_phi_path, sample_psi_path, sigma_closed_form,
    tail_estimate, RngStream, StreamDomain,
};
use crate::spectral::{
    canonical_modes, make_lattice, BandLimit, FrequencyLattice, Freq, SpectralField,
};
use crate::stats::{mean_se, ols, variance_se, weighted_quantile};
use crate::wick::{hermite, wick_power, wick_power_series, EnhancedDataSet, VarianceSource};
use crate::Result;

fn finish(suite: &str, started: Instant, reports: Vec<StatReport>) -> SuiteOutcome {
    SuiteOutcome {
        suite: suite.into(),
        reports,
        runtime_seconds: started.elapsed().as_secs_f64(),
    }
}

/// Deterministic parallel map over replicas: results land in replica order,
/// so reductions are bit-stable for any worker count.
fn per_replica<T: Send>(
    replicas: usize,
    f: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(f)
        .collect::<Result<Vec<T>>>()
}

// ---------------------------------------------------------------------------
// variance suite
// ---------------------------------------------------------------------------

/// Pointwise variance of the forced field against the closed form, the
/// stationary variance of the Gaussian-data evolution, and the logarithmic
/// divergence of the band sums.
pub fn run_variance_suite(cfg: &VarianceConfig, seed: u64) -> Result<SuiteOutcome> {
    let suite = "variance";
    let started = Instant::now();
    let mut reports = Vec::new();

    // forced-field pointwise variance at (band, t)
    for &(band, t) in &cfg.sigma_checks {
        let values = per_replica(cfg.replicas, |r| {
            let path = sample_psi_path(&[0.0, t], band, RngStream::new(seed, r))?;
            Ok(path.point_value(1))
        })?;
        let v = variance_se(&values);
        reports.push(StatReport::z_check(
            suite,
            &format!("sigma_mc_band{band}_t{t}"),
            v.mean,
            v.se,
            sigma_closed_form(t, band),
            cfg.replicas,
            cfg.z_gate,
        ));
    }

    // exact identities of the closed form
    for &(band, _) in &cfg.sigma_checks {
        reports.push(StatReport::abs_check(
            suite,
            &format!("sigma_at_zero_band{band}"),
            sigma_closed_form(0.0, band),
            0.0,
            1e-10,
        ));
        reports.push(StatReport::abs_check(
            suite,
            &format!("sigma_longtime_band{band}"),
            sigma_closed_form(50.0, band),
            alpha_closed_form(band) - 1.0,
            1e-10,
        ));
    }

    // stationary variance of the Gaussian-data evolution
    let band = cfg.band;
    let lattice = make_lattice(2 * (band as usize + 1), BandLimit::Limited(band))?;
    let alpha = alpha_closed_form(band);
    let grid: Vec<f64> = {
        let mut ts = cfg.alpha_times.clone();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if ts.first() != Some(&0.0) {
            ts.insert(0, 0.0);
        }
        ts
    };
    let deriv_modes: Vec<Freq> = cfg
        .derivative_modes
        .iter()
        .map(|&(a, b)| Freq::new(a, b))
        .collect();
    let phi_samples = per_replica(cfg.replicas, |r| {
        let stream = RngStream::new(seed ^ 0xA1FA, r);
        let data = sample_mu1(&lattice, stream);
        let path = sample_phi_path(&grid, band, &data, stream)?;
        let points: Vec<f64> = (0..grid.len()).map(|j| path.point_value(j)).collect();
        let derivs: Vec<f64> = deriv_modes
            .iter()
            .map(|n| {
                let idx = path.modes().iter().position(|m| m == n).expect("mode in band");
                path.pair(grid.len() - 1, idx).1.norm_sqr()
            })
            .collect();
        Ok((points, derivs))
    })?;
    for (j, &t) in grid.iter().enumerate() {
        let vals: Vec<f64> = phi_samples.iter().map(|s| s.0[j]).collect();
        let v = variance_se(&vals);
        reports.push(StatReport::z_check(
            suite,
            &format!("alpha_stationarity_t{t}"),
            v.mean,
            v.se,
            alpha,
            cfg.replicas,
            cfg.z_gate,
        ));
    }
    for (mi, n) in deriv_modes.iter().enumerate() {
        let vals: Vec<f64> = phi_samples.iter().map(|s| s.1[mi]).collect();
        // E|dt Phi(n)|^2 = 1; complex modes halve the scalar variance, so the
        // squared magnitude is itself the estimator
        let m = mean_se(&vals);
        reports.push(StatReport::z_check(
            suite,
            &format!("derivative_variance_mode_{}_{}", n.n1, n.n2),
            m.mean,
            m.se,
            1.0,
            cfg.replicas,
            cfg.z_gate,
        ));
    }

    // logarithmic divergence: dyadic increments of E||Psi_N(1)||_L2^2
    let bands = &cfg.growth_bands;
    let max_band = *bands.iter().max().expect("nonempty growth bands");
    let norms = per_replica(cfg.growth_replicas, |r| {
        let path = sample_psi_path(&[0.0, 1.0], max_band, RngStream::new(seed ^ 0x10, r))?;
        let per_band: Vec<f64> = bands
            .iter()
            .map(|&b| {
                let b2 = (b as i64) * (b as i64);
                path.modes()
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| n.norm_sq() <= b2)
                    .map(|(i, n)| {
                        let w = if n.is_self_paired() { 1.0 } else { 2.0 };
                        w * path.pair(1, i).0.norm_sqr()
                    })
                    .sum()
            })
            .collect();
        Ok(per_band)
    })?;
    let target = 2.0 * std::f64::consts::PI * 2f64.ln();
    for d in 0..bands.len() - 1 {
        let incs: Vec<f64> = norms.iter().map(|row| row[d + 1] - row[d]).collect();
        let m = mean_se(&incs);
        let rel = (m.mean / target - 1.0).abs();
        reports.push(StatReport::property(
            suite,
            &format!("log_growth_dyad_{}_{}", bands[d], bands[d + 1]),
            rel <= cfg.growth_rel_tol,
            m.mean,
            cfg.growth_replicas,
            &format!("within {:.0}% of 2 pi log 2", cfg.growth_rel_tol * 100.0),
            json!({ "target": target, "relative_deviation": rel, "se": m.se }),
        ));
    }
    // slope of sigma_N(1) against log N (closed form, report-style fit)
    let xs: Vec<f64> = bands.iter().map(|&b| (b as f64).ln()).collect();
    let ys: Vec<f64> = bands.iter().map(|&b| sigma_closed_form(1.0, b)).collect();
    let fit = ols(&xs, &ys)?;
    reports.push(StatReport::property(
        suite,
        "sigma_log_slope",
        fit.slope > 0.0,
        fit.slope,
        bands.len(),
        "slope > 0",
        json!({ "r_squared": fit.r_squared }),
    ));

    Ok(finish(suite, started, reports))
}

// ---------------------------------------------------------------------------
// wick suite
// ---------------------------------------------------------------------------

/// Hermite algebra, Wick-power moments, the renormalization-vs-divergence
/// contrast, and tail shapes.
pub fn run_wick_convergence(cfg: &WickConfig, seed: u64) -> Result<SuiteOutcome> {
    let suite = "wick";
    let started = Instant::now();
    let mut reports = Vec::new();

    // generating-function identity (deterministic)
    {
        let (t, x, sigma) = (0.3f64, 0.7, 2.0);
        let mut sum = 0.0;
        let mut factorial = 1.0;
        for l in 0..=12u32 {
            if l > 0 {
                factorial *= l as f64;
            }
            sum += t.powi(l as i32) / factorial * hermite(l, x, sigma);
        }
        reports.push(StatReport::abs_check(
            suite,
            "hermite_generating_function",
            sum,
            (t * x - 0.5 * sigma * t * t).exp(),
            1e-10,
        ));
    }

    // orthogonality E[H_k H_m] = delta_km k! sigma^k for x ~ N(0, sigma)
    for &sigma in &[1.0, alpha_closed_form(8)] {
        let kmax = cfg.max_moment_degree;
        let draws = per_replica(cfg.moment_replicas, |r| {
            let stream = RngStream::new(seed ^ 0xBEEF, r);
            let mut rng = stream.rng_at(StreamDomain::Scalar, Freq::ZERO, 0);
            use rand::Rng;
            let x: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * sigma.sqrt();
            let h: Vec<f64> = (0..=kmax).map(|l| hermite(l, x, sigma)).collect();
            Ok(h)
        })?;
        for k in 1..=kmax {
            for m in k..=kmax {
                let vals: Vec<f64> = draws.iter().map(|h| h[k as usize] * h[m as usize]).collect();
                let target = if k == m {
                    (1..=k).map(|i| i as f64).product::<f64>() * sigma.powi(k as i32)
                } else {
                    0.0
                };
                let stat = mean_se(&vals);
                reports.push(StatReport::z_check(
                    suite,
                    &format!("hermite_orthogonality_k{k}_m{m}_sigma{sigma:.3}"),
                    stat.mean,
                    stat.se,
                    target,
                    cfg.moment_replicas,
                    cfg.z_gate,
                ));
            }
        }
    }

    // pointwise Wick moments of the forced field: E[:Z^l:] = 0 (l = 1..3),
    // E[(:Z^2:)^2] = 2 sigma^2, at x = 0
    {
        let band = cfg.band;
        let t = cfg.t;
        let sigma = sigma_closed_form(t, band);
        let draws = per_replica(cfg.field_replicas, |r| {
            let path = sample_psi_path(&[0.0, t], band, RngStream::new(seed ^ 0x11C3, r))?;
            let z = path.point_value(1);
            Ok([
                hermite(1, z, sigma),
                hermite(2, z, sigma),
                hermite(3, z, sigma),
            ])
        })?;
        for l in 1..=3usize {
            let vals: Vec<f64> = draws.iter().map(|d| d[l - 1]).collect();
            let stat = mean_se(&vals);
            reports.push(StatReport::z_check(
                suite,
                &format!("wick_mean_zero_degree{l}"),
                stat.mean,
                stat.se,
                0.0,
                cfg.field_replicas,
                cfg.z_gate,
            ));
        }
        let sq: Vec<f64> = draws.iter().map(|d| d[1] * d[1]).collect();
        let stat = mean_se(&sq);
        reports.push(StatReport::z_check(
            suite,
            "wick_square_second_moment",
            stat.mean,
            stat.se,
            2.0 * sigma * sigma,
            cfg.field_replicas,
            cfg.z_gate,
        ));
    }

    // renormalization vs divergence: coupled dyads; the plain square of the
    // band sum diverges while the Wick-square differences go Cauchy
    {
        let bands = &cfg.cauchy_bands; // each paired with its half
        let max_band = *bands.iter().max().expect("nonempty");
        let m_fine = 2 * (2 * max_band as usize + 1);
        let m_fine = m_fine.next_multiple_of(32);
        let fine = FrequencyLattice::new(m_fine, BandLimit::Full)?;
        let rows = per_replica(cfg.cauchy_replicas, |r| {
            let path = sample_psi_path(&[0.0, 1.0], max_band, RngStream::new(seed ^ 0xCA0C, r))?;
            let mut row = Vec::with_capacity(bands.len());
            for &b in bands {
                let sigma_b = sigma_closed_form(1.0, b);
                let sigma_h = sigma_closed_form(1.0, b / 2);
                let z_b = restrict_field(&path, 1, b, &fine);
                let z_h = restrict_field(&path, 1, b / 2, &fine);
                let w_b = wick_power(&z_b, 2, sigma_b)?;
                let w_h = wick_power(&z_h, 2, sigma_h)?;
                let mut diff = w_b;
                diff.add_scaled(&w_h, -1.0);
                row.push(diff.sobolev_l2(-0.5));
            }
            Ok(row)
        })?;
        for d in 0..bands.len() - 1 {
            let decr: Vec<f64> = rows.iter().map(|row| row[d] - row[d + 1]).collect();
            let stat = mean_se(&decr);
            let z = stat.z_against(0.0);
            reports.push(StatReport::property(
                suite,
                &format!("wick_cauchy_decrease_{}_{}", bands[d], bands[d + 1]),
                z > cfg.z_gate,
                stat.mean,
                cfg.cauchy_replicas,
                "paired decrease beyond 4 SE",
                json!({ "z": z }),
            ));
        }
    }

    // zero-path smoke: the assembled Xi collapse to Hermite constants
    {
        let band = 2u32;
        let fine = make_lattice(32, BandLimit::Full)?;
        let path = sample_psi_path(&[0.0, 0.7], 0, RngStream::new(seed, 0))?;
        let lat = make_lattice(32, BandLimit::Limited(band))?;
        let data = crate::wick::build_enhanced_data(
            SpectralField::zeros(&lat),
            SpectralField::zeros(&lat),
            &path,
            VarianceSource::SigmaOf { band },
            3,
            &fine,
        )?;
        let sigma = sigma_closed_form(0.7, band);
        let dev = (data.xi[1][1].get(Freq::ZERO).re + sigma).abs()
            + data.xi[1][0].l2_norm()
            + data.xi[1][2].l2_norm();
        reports.push(StatReport::abs_check(suite, "zero_path_smoke", dev, 0.0, 1e-12));
    }

    // tail shapes: Gaussian surrogate (k=1) and Wick powers (k=2,3)
    {
        let surrogate = per_replica(cfg.tail_replicas, |r| {
            let stream = RngStream::new(seed ^ 0x7A11, r);
            let mut rng = stream.rng_at(StreamDomain::Scalar, Freq::ZERO, 1);
            use rand::Rng;
            Ok(rng.sample::<f64, _>(rand_distr::StandardNormal).abs())
        })?;
        let rep = tail_estimate(&surrogate, 1)?;
        reports.push(StatReport::property(
            suite,
            "tail_shape_gaussian_surrogate",
            rep.slope < 0.0 && rep.r_squared >= 0.95,
            rep.slope,
            cfg.tail_replicas,
            "negative slope, R2 >= 0.95",
            json!({ "r_squared": rep.r_squared, "points": rep.points }),
        ));

        let band = cfg.band;
        let m = 2 * (3 * band as usize + 1);
        let m = m.next_multiple_of(16);
        let fine = FrequencyLattice::new(m, BandLimit::Full)?;
        let sigma = sigma_closed_form(1.0, band);
        let norms = per_replica(cfg.tail_replicas, |r| {
            let path = sample_psi_path(&[0.0, 1.0], band, RngStream::new(seed ^ 0x7A12, r))?;
            let z = path.field_at(1, &fine);
            let series = wick_power_series(&z, 3, sigma)?;
            Ok((
                w_inf_norm(&series[1], -0.5)?,
                w_inf_norm(&series[2], -0.5)?,
            ))
        })?;
        let squares: Vec<f64> = norms.iter().map(|n| n.0).collect();
        let cubes: Vec<f64> = norms.iter().map(|n| n.1).collect();
        let rep2 = tail_estimate(&squares, 2)?;
        reports.push(StatReport::property(
            suite,
            "tail_shape_wick_square",
            rep2.slope < 0.0 && rep2.r_squared >= 0.9,
            rep2.slope,
            cfg.tail_replicas,
            "negative slope vs lambda, R2 >= 0.9",
            json!({ "r_squared": rep2.r_squared }),
        ));
        let rep3 = tail_estimate(&cubes, 3)?;
        reports.push(StatReport::property(
            suite,
            "tail_shape_wick_cube",
            rep3.slope < 0.0,
            rep3.slope,
            cfg.tail_replicas,
            "negative slope vs lambda^(2/3)",
            json!({ "r_squared": rep3.r_squared }),
        ));
    }

    Ok(finish(suite, started, reports))
}

/// Field snapshot of a path truncated to a smaller band (shared modes of the
/// coupled truncations).
fn restrict_field(
    path: &crate::noise::NoisePath,
    time_idx: usize,
    band: u32,
    lattice: &FrequencyLattice,
) -> SpectralField {
    let tagged = lattice
        .with_band(BandLimit::Limited(band))
        .expect("lattice resolves band");
    let mut f = SpectralField::zeros(&tagged);
    let b2 = (band as i64) * (band as i64);
    for (i, &n) in path.modes().iter().enumerate() {
        if n.norm_sq() <= b2 {
            f.set_pair(n, path.pair(time_idx, i).0);
        }
    }
    f
}

// ---------------------------------------------------------------------------
// lwp suite
// ---------------------------------------------------------------------------

/// Coupled convergence in the noise band, cross-method agreement of the
/// Picard and exponential-integrator routes, and the forcing-free reduction.
pub fn run_lwp_convergence(cfg: &LwpConfig, seed: u64) -> Result<SuiteOutcome> {
    let suite = "lwp";
    let started = Instant::now();
    let mut reports = Vec::new();

    // coupled D(N) = sup_t ||v_N - v_2N||_{H^-eps} decreasing per dyad
    {
        let bands = &cfg.bands;
        let solver = |noise_band: u32| -> Result<SolverConfig> {
            let mut c = SolverConfig::new(
                3,
                noise_band,
                cfg.solver_band,
                cfg.grid_size,
                cfg.step,
                cfg.t_loc,
                Scheme::ExpMidpoint,
            )?;
            c.record_every = usize::MAX; // energy not needed here
            Ok(c)
        };
        let snapshot_modes = canonical_modes(cfg.solver_band);
        let per_rep: Vec<Vec<f64>> = per_replica(cfg.replicas, |r| {
            let stream = RngStream::new(seed ^ 0x10CA, r);
            // one trajectory per band from the same driving randomness
            let mut snaps: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(bands.len());
            for &b in bands {
                let scfg = solver(b)?;
                let mut provider = StreamingXi::new(
                    b,
                    VarianceSource::SigmaOf { band: b },
                    &scfg,
                    stream,
                )?;
                let lattice = scfg.lattice();
                let zero = FlowState::zeros(&lattice);
                let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(scfg.steps() + 1);
                let modes = snapshot_modes.clone();
                run_trajectory(zero, &mut provider, &scfg, |_, state| {
                    rows.push(modes.iter().map(|&n| state.v.get(n)).collect());
                    Ok(())
                })?;
                snaps.push(rows);
            }
            // D for consecutive dyads
            let mut ds = Vec::with_capacity(bands.len() - 1);
            for d in 0..bands.len() - 1 {
                let mut worst = 0.0f64;
                for (row_a, row_b) in snaps[d].iter().zip(&snaps[d + 1]) {
                    let mut sum = 0.0;
                    for (i, n) in snapshot_modes.iter().enumerate() {
                        let w = if n.is_self_paired() { 1.0 } else { 2.0 };
                        sum += w
                            * n.bessel_sq().powf(-cfg.epsilon)
                            * (row_a[i] - row_b[i]).norm_sqr();
                    }
                    worst = worst.max(sum.sqrt());
                }
                ds.push(worst);
            }
            Ok(ds)
        })?;
        let strictly_decreasing = per_rep
            .iter()
            .filter(|ds| ds.windows(2).all(|w| w[1] < w[0]))
            .count();
        let frac = strictly_decreasing as f64 / cfg.replicas as f64;
        let mean_ds: Vec<f64> = (0..bands.len() - 1)
            .map(|d| per_rep.iter().map(|ds| ds[d]).sum::<f64>() / cfg.replicas as f64)
            .collect();
        reports.push(StatReport::property(
            suite,
            "coupled_band_convergence",
            frac >= cfg.required_fraction,
            frac,
            cfg.replicas,
            &format!(
                ">= {:.0}% of replicas strictly decreasing over {} dyads",
                cfg.required_fraction * 100.0,
                bands.len() - 2
            ),
            json!({ "mean_D": mean_ds, "bands": bands }),
        ));
    }

    // deterministic cross-method case: Picard vs stepper, plus contraction
    {
        let m = 64;
        let solver_band = 9;
        let scfg = SolverConfig::new(
            3,
            0,
            solver_band,
            m,
            cfg.picard_step,
            cfg.picard_horizon,
            Scheme::ExpMidpoint,
        )?;
        let lat = make_lattice(m, BandLimit::Limited(1))?;
        let mut v0 = SpectralField::zeros(&lat);
        v0.set_pair(Freq::new(1, 0), Complex64::new(0.05, 0.0));
        v0.set_pair(Freq::new(0, 1), Complex64::new(0.0, 0.04));
        let mut v1 = SpectralField::zeros(&lat);
        v1.set_pair(Freq::ZERO, Complex64::new(0.03, 0.0));

        // zero Wick data on the refined grid
        let times = scfg.node_times();
        let zero_lat = make_lattice(m, BandLimit::Limited(0))?;
        let zero = SpectralField::zeros(&zero_lat);
        let data = EnhancedDataSet {
            v0: v0.clone(),
            v1: v1.clone(),
            times: times.clone(),
            xi: times.iter().map(|_| vec![zero.clone(); 3]).collect(),
            degree: 3,
        };
        let picard = picard_solve(&v0, &v1, &data, &scfg, cfg.picard_iterations)?;

        let mut provider = ZeroXi::new(m, 3)?;
        let initial = FlowState::new(
            v0.embed(&scfg.lattice())?,
            v1.embed(&scfg.lattice())?,
            0.0,
        );
        let mut stepper_states = Vec::new();
        run_trajectory(initial, &mut provider, &scfg, |_, s| {
            stepper_states.push(s.clone());
            Ok(())
        })?;

        // sup over main grid times of the pair-H1 distance; the Picard grid
        // carries midpoints too (indices 0, 2, 4, ...)
        let mut worst = 0.0f64;
        for (j, s) in stepper_states.iter().enumerate() {
            let p = &picard.trajectory[2 * j];
            let mut dv = s.v.clone();
            dv.add_scaled(&p.v.embed(s.v.lattice())?, -1.0);
            let mut dvt = s.vt.clone();
            dvt.add_scaled(&p.vt.embed(s.vt.lattice())?, -1.0);
            worst = worst.max(dv.sobolev_l2(1.0).hypot(dvt.l2_norm()));
        }
        reports.push(StatReport::abs_check(
            suite,
            "picard_vs_stepper",
            worst,
            0.0,
            cfg.picard_tolerance,
        ));

        let ratios: Vec<f64> = picard
            .increments
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect();
        let contracting = ratios.iter().skip(1).all(|&r| r < 1.0);
        reports.push(StatReport::property(
            suite,
            "picard_contraction",
            contracting && !picard.diverged,
            ratios.get(1).copied().unwrap_or(0.0),
            cfg.picard_iterations,
            "increment ratios < 1 from iteration 2",
            json!({ "increments": picard.increments, "ratios": ratios }),
        ));
    }

    // forcing-free reduction: one tiny-data step against the homogeneous flow
    {
        let m = 32;
        let h = 1e-2;
        let scfg = SolverConfig::new(3, 0, 4, m, h, h, Scheme::ExpEuler)?;
        let lat = make_lattice(m, BandLimit::Limited(1))?;
        let amp = 1e-3;
        let mut v0 = SpectralField::zeros(&lat);
        v0.set_pair(Freq::new(1, 0), Complex64::new(amp, 0.0));
        let state = FlowState::new(
            v0.embed(&scfg.lattice())?,
            SpectralField::zeros(&scfg.lattice()),
            0.0,
        );
        let mut provider = ZeroXi::new(m, 3)?;
        let stepper = VStepper::new(scfg.clone());
        let xi = provider.step(0)?;
        let stepped = stepper.step(&state, &xi)?;
        let homog = homogeneous_flow(h, &state);
        let mut dv = stepped.v.clone();
        dv.add_scaled(&homog.v, -1.0);
        let dev = dv.sobolev_l2(1.0);
        // forcing response of the frozen cubic term: O(h^2 amp^3)
        let bound = 10.0 * h * h * amp.powi(3);
        reports.push(StatReport::property(
            suite,
            "forcing_free_reduction",
            dev <= bound,
            dev,
            1,
            "|step - homogeneous| = O(h^2 |v|^3)",
            json!({ "bound": bound, "h": h, "amplitude": amp }),
        ));
    }

    // step-halving self-convergence of both schemes (single-mode data)
    {
        let m = 64;
        let solver_band = 9;
        let horizon = 0.04;
        let reference_states = |scheme: Scheme, step: f64| -> Result<FlowState> {
            let scfg = SolverConfig::new(3, 0, solver_band, m, step, horizon, scheme)?;
            let lat = make_lattice(m, BandLimit::Limited(1))?;
            let mut v0 = SpectralField::zeros(&lat);
            v0.set_pair(Freq::new(1, 0), Complex64::new(0.4, 0.0));
            let initial = FlowState::new(
                v0.embed(&scfg.lattice())?,
                SpectralField::zeros(&scfg.lattice()),
                0.0,
            );
            let mut provider = ZeroXi::new(m, 3)?;
            let (_, _, final_state) =
                run_trajectory(initial, &mut provider, &scfg, |_, _| Ok(()))?;
            Ok(final_state)
        };
        for (scheme, name, lo, hi) in [
            (Scheme::ExpEuler, "exp_euler", 1.5, 3.0),
            (Scheme::ExpMidpoint, "exp_midpoint", 3.0, 6.0),
        ] {
            // global error halves once (euler) or quarters (midpoint) per
            // step halving; Richardson reference at step/8
            let reference = reference_states(scheme, horizon / 320.0)?;
            let err = |step: f64| -> Result<f64> {
                let s = reference_states(scheme, step)?;
                let mut dv = s.v.clone();
                dv.add_scaled(&reference.v, -1.0);
                Ok(dv.sobolev_l2(1.0))
            };
            let e1 = err(horizon / 20.0)?;
            let e2 = err(horizon / 40.0)?;
            let ratio = e1 / e2;
            reports.push(StatReport::property(
                suite,
                &format!("self_convergence_{name}"),
                ratio > lo && ratio < hi,
                ratio,
                2,
                &format!("error ratio in ({lo}, {hi})"),
                json!({ "e_h": e1, "e_h2": e2 }),
            ));
        }
    }

    Ok(finish(suite, started, reports))
}

// ---------------------------------------------------------------------------
// energy suite
// ---------------------------------------------------------------------------

/// Dissipation identity of the forcing-free flow, no-blowup of the forced
/// cubic runs, and the double-log envelope.
pub fn run_energy_growth(cfg: &EnergyConfig, seed: u64) -> Result<SuiteOutcome> {
    let suite = "energy";
    let started = Instant::now();
    let mut reports = Vec::new();

    // forcing-free energy identity: dE/dt = -||D^{1/2} dt v||^2
    {
        let m = 64;
        let scfg = {
            let mut c = SolverConfig::new(
                3,
                0,
                8,
                m,
                cfg.dissipation_step,
                cfg.dissipation_horizon,
                Scheme::ExpMidpoint,
            )?;
            c.record_every = 1;
            c
        };
        let lat = make_lattice(m, BandLimit::Limited(2))?;
        let mut v0 = SpectralField::zeros(&lat);
        v0.set_pair(Freq::new(1, 0), Complex64::new(0.5, 0.0));
        v0.set_pair(Freq::new(1, 1), Complex64::new(0.0, 0.3));
        let mut v1 = SpectralField::zeros(&lat);
        v1.set_pair(Freq::new(0, 1), Complex64::new(0.4, 0.0));
        let initial = FlowState::new(
            v0.embed(&scfg.lattice())?,
            v1.embed(&scfg.lattice())?,
            0.0,
        );
        let mut provider = ZeroXi::new(m, 3)?;
        let mut dissipation = Vec::new();
        let (status, record, _) = run_trajectory(initial, &mut provider, &scfg, |_, s| {
            // ||D^{1/2} dt v||^2 = sum |n| |vt(n)|^2
            let lat = s.vt.lattice().clone();
            let d: f64 = s
                .vt
                .coeffs()
                .iter()
                .enumerate()
                .map(|(bin, c)| lat.freq_of(bin).norm() * c.norm_sqr())
                .sum();
            dissipation.push(d);
            Ok(())
        })?;
        assert!(!status.is_blowup());
        let e0 = record.points.first().expect("recorded").total;
        let e_end = record.points.last().expect("recorded").total;
        let h = cfg.dissipation_step;
        let integral: f64 = dissipation
            .windows(2)
            .map(|w| 0.5 * h * (w[0] + w[1]))
            .sum();
        let residual = (e_end - e0 + integral).abs() / e0;
        reports.push(StatReport::property(
            suite,
            "dissipation_identity",
            residual < cfg.dissipation_tol * cfg.dissipation_horizon,
            residual,
            record.points.len(),
            &format!("relative residual < {} per unit time", cfg.dissipation_tol),
            json!({ "e0": e0, "e_end": e_end, "dissipated": integral }),
        ));
        // monotone decay of the deterministic damped energy
        let monotone = record
            .points
            .windows(2)
            .all(|w| w[1].total <= w[0].total * (1.0 + 1e-9));
        reports.push(StatReport::property(
            suite,
            "deterministic_energy_monotone",
            monotone,
            e_end / e0,
            record.points.len(),
            "E non-increasing",
            json!({}),
        ));
    }

    // forced cubic runs: zero data, sampled path, no blowups, finite
    // energies, double-log envelope per replica
    {
        let scfg = {
            let mut c = SolverConfig::new(
                3,
                cfg.noise_band,
                cfg.solver_band,
                cfg.grid_size,
                cfg.step,
                cfg.horizon,
                Scheme::ExpMidpoint,
            )?;
            c.record_every = cfg.record_every;
            c
        };
        let runs = per_replica(cfg.replicas, |r| {
            let zero = FlowState::zeros(&scfg.lattice());
            evolve_cubic(
                zero,
                cfg.noise_band,
                &scfg,
                RngStream::new(seed ^ 0xE6E6, r),
                cfg.gauge_eps,
            )
        })?;
        let blowups = runs.iter().filter(|r| r.status.is_blowup()).count();
        let all_finite = runs
            .iter()
            .all(|r| r.record.points.iter().all(|p| p.total.is_finite()));
        reports.push(StatReport::property(
            suite,
            "cubic_no_blowup",
            blowups == 0 && all_finite,
            blowups as f64,
            cfg.replicas,
            "zero blowups, all energies finite",
            json!({ "horizon": cfg.horizon, "band": cfg.noise_band }),
        ));
        let envelope_ok = runs.iter().all(|r| {
            r.envelope_slope.is_finite()
                && r.record.points.iter().all(|p| {
                    (p.total + std::f64::consts::E).ln().ln()
                        <= r.envelope_intercept + r.envelope_slope * p.t + 1e-9
                })
        });
        let max_c = runs
            .iter()
            .map(|r| r.fitted_c)
            .fold(f64::NEG_INFINITY, f64::max);
        let max_b = runs.iter().map(|r| r.b_value).fold(0.0f64, f64::max);
        reports.push(StatReport::property(
            suite,
            "double_log_envelope",
            envelope_ok,
            max_c,
            cfg.replicas,
            "log log(E+e) below an affine envelope per replica",
            json!({ "max_B": max_b, "shared_C": max_c }),
        ));
        let b_finite = runs.iter().all(|r| r.b_value.is_finite() && r.b_value >= 1.0);
        reports.push(StatReport::property(
            suite,
            "growth_gauge_finite",
            b_finite,
            max_b,
            cfg.replicas,
            "B(T) finite on every sampled path",
            json!({}),
        ));
    }

    Ok(finish(suite, started, reports))
}

// ---------------------------------------------------------------------------
// gibbs suite
// ---------------------------------------------------------------------------

/// Invariance of the weighted ensemble under the split dynamics, its linear
/// and refreshment-only controls, the exact density value, and the
/// long-horizon growth percentile.
pub fn run_gibbs_invariance(cfg: &GibbsConfig, seed: u64) -> Result<SuiteOutcome> {
    let suite = "gibbs";
    let started = Instant::now();
    let mut reports = Vec::new();
    let alpha = alpha_closed_form(cfg.band);

    // exact density value at the origin of phase space
    {
        let lat = make_lattice(cfg.grid_size, BandLimit::Limited(cfg.band))?;
        let u = SpectralField::zeros(&lat);
        let expected = {
            // H_{k+1}(0; alpha) has only the constant term
            -hermite(cfg.degree + 1, 0.0, alpha) / (cfg.degree as f64 + 1.0)
        };
        reports.push(StatReport::abs_check(
            suite,
            "log_density_at_zero",
            density_log_rn(&u, cfg.band, cfg.degree, alpha)?,
            expected,
            0.0 + f64::EPSILON,
        ));
    }

    let observables = {
        let mut obs = default_observables(cfg.band);
        obs.push(Observable::SentinelModeSq);
        obs
    };

    // linear-only control on the Gaussian law (kick off, unit weights)
    {
        let mut split = SplitConfig::new(
            cfg.band,
            cfg.degree,
            cfg.grid_size,
            cfg.step,
            alpha,
        )?;
        split.kick_enabled = false;
        let ensemble = gibbs_ensemble(
            cfg.control_samples,
            cfg.band,
            cfg.degree,
            cfg.grid_size,
            alpha,
            seed ^ 0x61BB,
        )?;
        let report = invariance_test(
            &ensemble,
            &InvarianceConfig {
                split,
                horizon: cfg.horizon,
                observables: observables.clone(),
                unit_weights: true,
                sentinel: Some(Freq::new(cfg.sentinel.0, cfg.sentinel.1)),
                master_seed: seed ^ 0x5EED,
            },
        )?;
        reports.push(StatReport::property(
            suite,
            "linear_control_stationary",
            report.passes(cfg.z_gate),
            report.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max),
            cfg.control_samples,
            "all |z| < 4 under the pure linear dynamics",
            json!({ "ess": report.ess, "excluded": report.excluded }),
        ));
        // the velocity marginal must sit at the white-noise variance
        for row in &report.rows {
            if row.observable.starts_with("u2_mode_sq") && !row.observable.ends_with("_0_0") {
                reports.push(StatReport::z_check(
                    suite,
                    &format!("linear_control_{}", row.observable),
                    row.t_t_mean,
                    row.t_t_se,
                    1.0,
                    cfg.control_samples,
                    cfg.z_gate,
                ));
            }
        }
    }

    // refreshment-only control (rotation and kick both off)
    {
        let mut split = SplitConfig::new(
            cfg.band,
            cfg.degree,
            cfg.grid_size,
            cfg.step,
            alpha,
        )?;
        split.kick_enabled = false;
        split.rotation_enabled = false;
        let ensemble = gibbs_ensemble(
            cfg.control_samples,
            cfg.band,
            cfg.degree,
            cfg.grid_size,
            alpha,
            seed ^ 0x0011,
        )?;
        let velocity_obs: Vec<Observable> = observables
            .iter()
            .filter(|o| matches!(o, Observable::VelocityModeSq(_)))
            .cloned()
            .collect();
        let report = invariance_test(
            &ensemble,
            &InvarianceConfig {
                split,
                horizon: cfg.horizon,
                observables: velocity_obs,
                unit_weights: true,
                sentinel: None,
                master_seed: seed ^ 0x0012,
            },
        )?;
        reports.push(StatReport::property(
            suite,
            "refreshment_control_stationary",
            report.passes(cfg.z_gate),
            report.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max),
            cfg.control_samples,
            "all |z| < 4 under the refreshment alone",
            json!({ "ess": report.ess }),
        ));
    }

    // full invariance run
    {
        let split = SplitConfig::new(
            cfg.band,
            cfg.degree,
            cfg.grid_size,
            cfg.step,
            alpha,
        )?;
        let ensemble = gibbs_ensemble(
            cfg.samples,
            cfg.band,
            cfg.degree,
            cfg.grid_size,
            alpha,
            seed,
        )?;
        let ess = ensemble.ess();
        let report = invariance_test(
            &ensemble,
            &InvarianceConfig {
                split,
                horizon: cfg.horizon,
                observables: observables.clone(),
                unit_weights: false,
                sentinel: Some(Freq::new(cfg.sentinel.0, cfg.sentinel.1)),
                master_seed: seed ^ 0xF00D,
            },
        )?;
        let worst_z = report.all_rows().map(|r| r.z.abs()).fold(0.0, f64::max);
        reports.push(StatReport::property(
            suite,
            "invariance_all_observables",
            report.passes(cfg.z_gate),
            worst_z,
            cfg.samples,
            "all |z| < 4 at T and at shifted checkpoints",
            json!({
                "ess": report.ess,
                "excluded": report.excluded,
                "rows": report.rows.len(),
            }),
        ));
        reports.push(StatReport::property(
            suite,
            "effective_sample_size",
            ess > cfg.min_ess,
            ess,
            cfg.samples,
            &format!("ESS > {}", cfg.min_ess),
            json!({}),
        ));
        let excluded_frac = report.excluded as f64 / report.total.max(1) as f64;
        reports.push(StatReport::property(
            suite,
            "exclusions_below_one_percent",
            excluded_frac < 0.01,
            excluded_frac,
            cfg.samples,
            "blowup exclusions < 1%",
            json!({ "excluded": report.excluded }),
        ));
    }

    // long-horizon growth percentile of the running pair norm
    {
        let split = SplitConfig::new(
            cfg.band,
            cfg.degree,
            cfg.grid_size,
            cfg.growth_step,
            alpha,
        )?;
        let ensemble = gibbs_ensemble(
            cfg.growth_samples,
            cfg.band,
            cfg.degree,
            cfg.grid_size,
            alpha,
            seed ^ 0x960,
        )?;
        let steps_total = (cfg.growth_horizon / cfg.growth_step).round() as usize;
        let per_unit = (1.0 / cfg.growth_step).round() as usize;
        let modes = crate::dynamics::split_modes(&split);
        let running: Vec<Vec<f64>> = ensemble
            .samples
            .par_iter()
            .enumerate()
            .map(|(idx, sample)| -> Result<Vec<f64>> {
                let stream = RngStream::new(seed ^ 0x961, idx as u64);
                let mut state = sample.clone();
                let mut noise = crate::dynamics::KeyedOu { stream };
                let pair_norm = |s: &crate::dynamics::SplitState| {
                    s.position
                        .sobolev_l2(-cfg.epsilon)
                        .hypot(s.velocity.sobolev_l2(-1.0 - cfg.epsilon))
                };
                let mut max_so_far = pair_norm(&state);
                let mut at_units = Vec::new();
                for j in 0..steps_total {
                    crate::dynamics::split_step_full(&mut state, &split, &modes, &mut noise, j as u64)?;
                    max_so_far = max_so_far.max(pair_norm(&state));
                    if (j + 1) % per_unit == 0 {
                        at_units.push(max_so_far);
                    }
                }
                Ok(at_units)
            })
            .collect::<Result<_>>()?;
        let weights = ensemble.weights();
        let units = running.first().map(|r| r.len()).unwrap_or(0);
        let pcts: Vec<f64> = (0..units)
            .map(|u| {
                let vals: Vec<f64> = running.iter().map(|r| r[u]).collect();
                weighted_quantile(&vals, &weights, 0.9)
            })
            .collect();
        let ts: Vec<f64> = (1..=units).map(|u| u as f64).collect();
        let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = pcts.iter().map(|p| p.ln()).collect();
        let fit = ols(&xs, &ys)?;
        let monotone = pcts.windows(2).all(|w| w[1] >= w[0]);
        reports.push(StatReport::property(
            suite,
            "running_norm_subpolynomial",
            monotone && fit.slope < 0.5 && pcts.iter().all(|p| p.is_finite()),
            fit.slope,
            cfg.growth_samples,
            "monotone running max, fitted power < 0.5",
            json!({ "percentiles": pcts, "r_squared": fit.r_squared }),
        ));
    }

    Ok(finish(suite, started, reports))
}

// ---------------------------------------------------------------------------
// schauder suite
// ---------------------------------------------------------------------------

/// Decay exponents of the semigroup operator norm and the kernel scaling
/// identity.
pub fn run_schauder(cfg: &SchauderConfig, _seed: u64) -> Result<SuiteOutcome> {
    let suite = "schauder";
    let started = Instant::now();
    let mut reports = Vec::new();
    let t_grid: Vec<f64> = (cfg.dyadic_range.0..=cfg.dyadic_range.1)
        .map(|j| 2f64.powi(-j))
        .collect();
    for &(alpha, tol) in &cfg.alphas {
        let fit = schauder_exponent_check(alpha, &t_grid, cfg.max_band)?;
        reports.push(StatReport::property(
            suite,
            &format!("decay_exponent_alpha_{alpha}"),
            (fit.fitted_exponent + alpha).abs() <= tol,
            fit.fitted_exponent,
            t_grid.len(),
            &format!("slope within {tol} of {}", -alpha),
            json!({ "r_squared": fit.r_squared }),
        ));
    }
    let residual = kernel_scaling_residual(0.5, cfg.max_band.min(256), &t_grid);
    reports.push(StatReport::abs_check(
        suite,
        "kernel_scaling_identity",
        residual,
        0.0,
        1e-12,
    ));
    Ok(finish(suite, started, reports))
}

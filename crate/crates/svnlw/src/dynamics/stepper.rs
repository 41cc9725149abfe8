use num_complex::Complex64;

use super::energy::{energy, BGauge, EnergyRecord};
use super::{Scheme, SolverConfig};
use crate::linflow::{flow_matrix, forcing_response, FlowState};
use crate::noise::{ModeTransition, RngStream, StreamDomain};
use crate::spectral::{
    canonical_modes, BandLimit, FrequencyLattice, Freq, SpectralField,
};
use crate::stats::ols;
use crate::wick::{renorm_nonlinearity, wick_power_series, VarianceSource};
use crate::Result;

/// Wick data for one step: the slice `Xi_1..Xi_k` at the step's left node
/// and at its midpoint.
pub struct XiSlices<'a> {
    pub left: &'a [SpectralField],
    pub mid: &'a [SpectralField],
}

/// Source of the Wick-power time series on the solver's refined node grid
/// (spacing `h/2`; step `j` owns nodes `2j` and `2j+1`).
pub trait XiProvider {
    fn degree(&self) -> u32;
    /// Advance to step `j` (consecutively from 0) and expose its slices.
    fn step(&mut self, j: usize) -> Result<XiSlices<'_>>;
}

/// `Xi = 0`: the forcing-free deterministic equation.
pub struct ZeroXi {
    zeros: Vec<SpectralField>,
    degree: u32,
}

impl ZeroXi {
    pub fn new(m: usize, degree: u32) -> Result<Self> {
        let lat = FrequencyLattice::new(m, BandLimit::Limited(0))?;
        Ok(ZeroXi {
            zeros: vec![SpectralField::zeros(&lat); degree as usize],
            degree,
        })
    }
}

impl XiProvider for ZeroXi {
    fn degree(&self) -> u32 {
        self.degree
    }

    fn step(&mut self, _j: usize) -> Result<XiSlices<'_>> {
        Ok(XiSlices {
            left: &self.zeros,
            mid: &self.zeros,
        })
    }
}

/// Precomputed enhanced data on the refined node grid.
pub struct EnhancedXi<'a> {
    data: &'a crate::wick::EnhancedDataSet,
}

impl<'a> EnhancedXi<'a> {
    /// The enhanced set must carry one slice per refined node.
    pub fn new(data: &'a crate::wick::EnhancedDataSet, cfg: &SolverConfig) -> Result<Self> {
        if data.times.len() != 2 * cfg.steps() + 1 {
            return Err(crate::Error::Config(format!(
                "enhanced data has {} nodes, solver needs {}",
                data.times.len(),
                2 * cfg.steps() + 1
            )));
        }
        Ok(EnhancedXi { data })
    }
}

impl XiProvider for EnhancedXi<'_> {
    fn degree(&self) -> u32 {
        self.data.degree
    }

    fn step(&mut self, j: usize) -> Result<XiSlices<'_>> {
        Ok(XiSlices {
            left: self.data.xi_at(2 * j),
            mid: self.data.xi_at(2 * j + 1),
        })
    }
}

/// Wick slices generated on the fly from exact per-mode transitions of the
/// driving path, one node at a time. Midpoint values come from sampling the
/// refined node grid in order, which realizes the exact joint Gaussian law
/// without interpolation. Memory stays at two slices regardless of horizon.
pub struct StreamingXi {
    band: u32,
    degree: u32,
    variance: VarianceSource,
    lattice: FrequencyLattice,
    modes: Vec<Freq>,
    state: Vec<(Complex64, Complex64)>,
    transition: Vec<ModeTransition>,
    stream: RngStream,
    node_step: f64,
    next_node: usize,
    left: Vec<SpectralField>,
    mid: Vec<SpectralField>,
    /// Growth gauge fed with the left slice of every step when enabled.
    pub gauge: Option<BGauge>,
}

impl StreamingXi {
    pub fn new(
        band: u32,
        variance: VarianceSource,
        cfg: &SolverConfig,
        stream: RngStream,
    ) -> Result<Self> {
        let lattice = cfg.container();
        let modes = canonical_modes(band);
        let node_step = 0.5 * cfg.step;
        let transition = modes
            .iter()
            .map(|&n| ModeTransition::new(n, node_step))
            .collect();
        Ok(StreamingXi {
            band,
            degree: cfg.degree,
            variance,
            lattice,
            state: vec![(Complex64::default(), Complex64::default()); modes.len()],
            modes,
            transition,
            stream,
            node_step,
            next_node: 0,
            left: Vec::new(),
            mid: Vec::new(),
            gauge: None,
        })
    }

    fn advance_to(&mut self, node: usize) -> Result<Vec<SpectralField>> {
        assert!(
            node + 1 >= self.next_node,
            "refined nodes must be requested in order"
        );
        while self.next_node <= node {
            if self.next_node > 0 {
                let step = (self.next_node - 1) as u64;
                for (idx, tr) in self.transition.iter().enumerate() {
                    let mut rng = self.stream.rng_at(StreamDomain::Forcing, self.modes[idx], step);
                    self.state[idx] = tr.advance(self.state[idx], &mut rng);
                }
            }
            self.next_node += 1;
        }
        let t = node as f64 * self.node_step;
        let tagged = self
            .lattice
            .with_band(BandLimit::Limited(self.band))
            .expect("solver lattice resolves the noise band");
        let mut z = SpectralField::zeros(&tagged);
        for (idx, &n) in self.modes.iter().enumerate() {
            z.set_pair(n, self.state[idx].0);
        }
        wick_power_series(&z, self.degree, self.variance.at(t))
    }
}

impl XiProvider for StreamingXi {
    fn degree(&self) -> u32 {
        self.degree
    }

    fn step(&mut self, j: usize) -> Result<XiSlices<'_>> {
        self.left = self.advance_to(2 * j)?;
        if let Some(gauge) = self.gauge.as_mut() {
            gauge.observe(&self.left)?;
        }
        self.mid = self.advance_to(2 * j + 1)?;
        Ok(XiSlices {
            left: &self.left,
            mid: &self.mid,
        })
    }
}

/// Exponential integrator for the residual equation with the linear flow
/// exact: one step of the mild formulation with the forcing integral
/// approximated by the chosen quadrature.
pub struct VStepper {
    cfg: SolverConfig,
    lattice: FrequencyLattice,
    flow_full: Vec<[f64; 4]>,
    resp_full: Vec<[f64; 2]>,
    flow_half: Vec<[f64; 4]>,
    resp_half: Vec<[f64; 2]>,
}

impl VStepper {
    pub fn new(cfg: SolverConfig) -> Self {
        // solution fields carry the Galerkin band tag so dealias checks
        // downstream see the true content band
        let lattice = cfg.lattice();
        let tables = |dt: f64| {
            let mut flows = Vec::with_capacity(lattice.num_bins());
            let mut resps = Vec::with_capacity(lattice.num_bins());
            for bin in 0..lattice.num_bins() {
                let n = lattice.freq_of(bin);
                let g = flow_matrix(n, dt, cfg.damping);
                let j = forcing_response(n, dt, cfg.damping);
                flows.push([g[0][0], g[0][1], g[1][0], g[1][1]]);
                resps.push(j);
            }
            (flows, resps)
        };
        let (flow_full, resp_full) = tables(cfg.step);
        let (flow_half, resp_half) = tables(0.5 * cfg.step);
        VStepper {
            cfg,
            lattice,
            flow_full,
            resp_full,
            flow_half,
            resp_half,
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    fn advance(
        &self,
        state: &FlowState,
        forcing: &SpectralField,
        flows: &[[f64; 4]],
        resps: &[[f64; 2]],
        dt: f64,
    ) -> FlowState {
        let mut v = SpectralField::zeros(&self.lattice);
        let mut vt = SpectralField::zeros(&self.lattice);
        let vc = state.v.coeffs();
        let vtc = state.vt.coeffs();
        let fc = forcing.coeffs();
        {
            let vo = v.coeffs_mut();
            let vto = vt.coeffs_mut();
            for bin in 0..vo.len() {
                let g = flows[bin];
                let r = resps[bin];
                let a = vc[bin];
                let b = vtc[bin];
                let f = fc[bin];
                vo[bin] = g[0] * a + g[1] * b - r[0] * f;
                vto[bin] = g[2] * a + g[3] * b - r[1] * f;
            }
        }
        v.debug_assert_symmetric();
        vt.debug_assert_symmetric();
        FlowState::new(v, vt, state.t + dt)
    }

    fn nonlinearity(&self, state: &FlowState, xi: &[SpectralField]) -> Result<SpectralField> {
        let f = renorm_nonlinearity(&state.v, xi, self.cfg.degree)?;
        let mut projected = f.project(BandLimit::Limited(self.cfg.solver_band));
        // keep the forcing on the shared full-band container so the
        // mode-wise update can zip plain coefficient slices
        projected = projected.embed(&self.lattice)?;
        Ok(projected)
    }

    /// One step of length `h` from `state`, with the Wick slices of this step.
    pub fn step(&self, state: &FlowState, xi: &XiSlices<'_>) -> Result<FlowState> {
        let f_left = self.nonlinearity(state, xi.left)?;
        match self.cfg.scheme {
            Scheme::ExpEuler => Ok(self.advance(
                state,
                &f_left,
                &self.flow_full,
                &self.resp_full,
                self.cfg.step,
            )),
            Scheme::ExpMidpoint => {
                let predictor = self.advance(
                    state,
                    &f_left,
                    &self.flow_half,
                    &self.resp_half,
                    0.5 * self.cfg.step,
                );
                let f_mid = self.nonlinearity(&predictor, xi.mid)?;
                Ok(self.advance(
                    state,
                    &f_mid,
                    &self.flow_full,
                    &self.resp_full,
                    self.cfg.step,
                ))
            }
        }
    }
}

/// One step of the residual solver (module-level convenience wrapper).
pub fn step_v(state: &FlowState, xi: &XiSlices<'_>, cfg: &SolverConfig) -> Result<FlowState> {
    VStepper::new(cfg.clone()).step(state, xi)
}

/// How a trajectory ended. Blowup is a report, not an exception: the last
/// finite state is preserved by the driver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrajectoryStatus {
    Completed,
    Blowup { t: f64, sup_norm: f64 },
}

impl TrajectoryStatus {
    pub fn is_blowup(&self) -> bool {
        matches!(self, TrajectoryStatus::Blowup { .. })
    }
}

/// Coefficient-side sup-norm bound (`|f|_inf <= sum |c(n)|`) used as the
/// cheap per-step divergence trigger; non-finite values trip it too.
fn sup_proxy(f: &SpectralField) -> f64 {
    let mut sum = 0.0;
    for c in f.coeffs() {
        let a = c.norm();
        if !a.is_finite() {
            return f64::INFINITY;
        }
        sum += a;
    }
    sum
}

const BLOWUP_THRESHOLD: f64 = 1e12;

/// Drives the stepper over the horizon, recording energy at the configured
/// stride and watching for divergence before every step so no transform ever
/// runs on non-finite data.
pub fn run_trajectory(
    initial: FlowState,
    provider: &mut dyn XiProvider,
    cfg: &SolverConfig,
    mut observer: impl FnMut(usize, &FlowState) -> Result<()>,
) -> Result<(TrajectoryStatus, EnergyRecord, FlowState)> {
    let stepper = VStepper::new(cfg.clone());
    let mut state = initial.embed_onto(&stepper.lattice)?;
    let mut record = EnergyRecord::default();
    record.push(energy(&state, cfg.degree)?);
    observer(0, &state)?;
    let steps = cfg.steps();
    for j in 0..steps {
        let proxy = sup_proxy(&state.v).max(sup_proxy(&state.vt));
        if proxy > BLOWUP_THRESHOLD {
            return Ok((
                TrajectoryStatus::Blowup {
                    t: state.t,
                    sup_norm: proxy,
                },
                record,
                state,
            ));
        }
        let xi = provider.step(j)?;
        state = stepper.step(&state, &xi)?;
        if (j + 1) % cfg.record_every == 0 || j + 1 == steps {
            record.push(energy(&state, cfg.degree)?);
        }
        observer(j + 1, &state)?;
    }
    Ok((TrajectoryStatus::Completed, record, state))
}

impl FlowState {
    /// Re-homes both components onto a (finer) solver lattice.
    pub fn embed_onto(&self, lattice: &FrequencyLattice) -> Result<FlowState> {
        Ok(FlowState::new(
            self.v.embed(lattice)?,
            self.vt.embed(lattice)?,
            self.t,
        ))
    }
}

/// Outcome of a cubic stochastic run: energy series, growth gauge, and the
/// double-log envelope fit.
#[derive(Clone, Debug)]
pub struct CubicRun {
    pub status: TrajectoryStatus,
    pub record: EnergyRecord,
    pub b_value: f64,
    pub envelope_slope: f64,
    pub envelope_intercept: f64,
    /// slope / B(T), the per-run constant of the double-exponential bound.
    pub fitted_c: f64,
}

/// Integrates the cubic residual equation driven by a fresh sampled path on
/// `[0, T]`, tracking energy, the growth gauge `B(T)`, and an affine upper
/// envelope of `log log(E + e)`.
pub fn evolve_cubic(
    data: FlowState,
    noise_band: u32,
    cfg: &SolverConfig,
    stream: RngStream,
    gauge_eps: f64,
) -> Result<CubicRun> {
    assert_eq!(cfg.degree, 3, "the growth study is cubic");
    let mut provider = StreamingXi::new(
        noise_band,
        VarianceSource::SigmaOf { band: noise_band },
        cfg,
        stream,
    )?;
    provider.gauge = Some(BGauge::new(gauge_eps));
    let (status, mut record, _) = run_trajectory(data, &mut provider, cfg, |_, _| Ok(()))?;
    let b_value = provider.gauge.as_ref().expect("gauge enabled").value();
    record.b_value = Some(b_value);

    // affine upper envelope of y = log log (E + e): least-squares slope,
    // intercept lifted so the line dominates every recorded point
    let ts: Vec<f64> = record.points.iter().map(|p| p.t).collect();
    let ys: Vec<f64> = record
        .points
        .iter()
        .map(|p| (p.total + std::f64::consts::E).ln().ln())
        .collect();
    let fit = ols(&ts, &ys)?;
    let intercept = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| y - fit.slope * t)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CubicRun {
        status,
        record,
        b_value,
        envelope_slope: fit.slope,
        envelope_intercept: intercept,
        fitted_c: fit.slope / b_value,
    })
}

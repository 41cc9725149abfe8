use crate::linflow::{w_inf_norm, FlowState};
use crate::spectral::{transform, BandLimit, SpectralField};
use crate::{Error, Result};

/// One evaluation of the energy functional
/// `E = 1/2 int (v^2 + |grad v|^2) + 1/2 int (dt v)^2 + 1/(k+1) int v^{k+1}`.
///
/// The quadratic terms are exact spectral sums; the potential term is grid
/// quadrature of the pointwise power, exact as long as the grid resolves the
/// zero mode of the degree-`k+1` product.
#[derive(Clone, Copy, Debug)]
pub struct EnergyPoint {
    pub t: f64,
    pub total: f64,
    pub gradient: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub sup_norm: f64,
}

pub fn energy(state: &FlowState, k: u32) -> Result<EnergyPoint> {
    let band = match state.v.lattice().band() {
        BandLimit::Limited(b) => b,
        BandLimit::Full => state.v.lattice().max_resolved_band(),
    };
    let m = state.v.lattice().grid_size();
    if (k as usize + 1) * band as usize >= m {
        return Err(Error::DealiasTooSmall {
            m,
            band,
            degree: k + 1,
            required: (k as usize + 1) * band as usize + 1,
        });
    }
    let gradient = 0.5 * state.v.sobolev_l2(1.0).powi(2);
    let kinetic = 0.5 * state.vt.l2_norm().powi(2);
    let grid = transform(&state.v)?;
    let mut pot_sum = 0.0;
    let mut sup = 0.0f64;
    for &x in &grid {
        pot_sum += x.powi(k as i32 + 1);
        sup = sup.max(x.abs());
    }
    let potential = pot_sum / ((k as f64 + 1.0) * grid.len() as f64);
    Ok(EnergyPoint {
        t: state.t,
        total: gradient + kinetic + potential,
        gradient,
        kinetic,
        potential,
        sup_norm: sup,
    })
}

/// Energy time series of one trajectory, CSV-exportable.
#[derive(Clone, Debug, Default)]
pub struct EnergyRecord {
    pub points: Vec<EnergyPoint>,
    /// Growth diagnostic of the driving path over the horizon, when tracked.
    pub b_value: Option<f64>,
}

impl EnergyRecord {
    pub fn push(&mut self, p: EnergyPoint) {
        self.points.push(p);
    }

    pub fn write_csv(&self, out: &mut impl std::io::Write) -> Result<()> {
        writeln!(out, "t,E,E_grad,E_kin,E_pot,sup_norm")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                p.t, p.total, p.gradient, p.kinetic, p.potential, p.sup_norm
            )?;
        }
        Ok(())
    }
}

/// Growth gauge of a driving path:
/// `B(T) = 1 + sup_t ||<grad>^{-1/2} Xi_2||_inf^2 + sup_t ||<grad>^{-1/2} Xi_3||_inf^2
///           + eps * sup_t ||<grad>^{-eps} Xi_1||_inf^2`,
/// accumulated one grid time at a time (grid-max in time of grid-max norms).
#[derive(Clone, Copy, Debug)]
pub struct BGauge {
    pub eps: f64,
    max_sq_wick2: f64,
    max_sq_wick3: f64,
    max_sq_psi: f64,
    pub samples: usize,
}

impl BGauge {
    pub fn new(eps: f64) -> Self {
        BGauge {
            eps,
            max_sq_wick2: 0.0,
            max_sq_wick3: 0.0,
            max_sq_psi: 0.0,
            samples: 0,
        }
    }

    /// Feed the Wick slice `Xi_1, Xi_2, Xi_3` at one grid time.
    pub fn observe(&mut self, xi: &[SpectralField]) -> Result<()> {
        assert!(xi.len() >= 3, "the growth gauge is cubic");
        let n1 = w_inf_norm(&xi[0], -self.eps)?;
        let n2 = w_inf_norm(&xi[1], -0.5)?;
        let n3 = w_inf_norm(&xi[2], -0.5)?;
        self.max_sq_psi = self.max_sq_psi.max(n1 * n1);
        self.max_sq_wick2 = self.max_sq_wick2.max(n2 * n2);
        self.max_sq_wick3 = self.max_sq_wick3.max(n3 * n3);
        self.samples += 1;
        Ok(())
    }

    pub fn value(&self) -> f64 {
        1.0 + self.max_sq_wick2 + self.max_sq_wick3 + self.eps * self.max_sq_psi
    }
}

/// `B(T)` of explicit series of the path and its two Wick powers on a common
/// time grid.
pub fn b_diagnostic(
    psi: &[SpectralField],
    wick2: &[SpectralField],
    wick3: &[SpectralField],
    eps: f64,
) -> Result<f64> {
    assert!(psi.len() == wick2.len() && wick2.len() == wick3.len());
    let mut gauge = BGauge::new(eps);
    for i in 0..psi.len() {
        let slice = [psi[i].clone(), wick2[i].clone(), wick3[i].clone()];
        gauge.observe(&slice)?;
    }
    Ok(gauge.value())
}

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::field::SpectralField;
use super::lattice::FrequencyLattice;
use crate::Result;

struct Plans {
    synthesis: Arc<dyn Fft<f64>>,
    analysis: Arc<dyn Fft<f64>>,
}

fn plans_for(m: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                synthesis: planner.plan_fft(m, FftDirection::Inverse),
                analysis: planner.plan_fft(m, FftDirection::Forward),
            })
        })
        .clone()
}

/// Reusable 2-d transform buffers for one grid size; hot loops keep one of
/// these instead of allocating per call.
pub struct FftWorkspace {
    m: usize,
    plans: Arc<Plans>,
    buf: Vec<Complex64>,
    transposed: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl FftWorkspace {
    pub fn new(m: usize) -> Self {
        let plans = plans_for(m);
        let scratch_len = plans
            .synthesis
            .get_inplace_scratch_len()
            .max(plans.analysis.get_inplace_scratch_len());
        FftWorkspace {
            m,
            plans,
            buf: vec![Complex64::new(0.0, 0.0); m * m],
            transposed: vec![Complex64::new(0.0, 0.0); m * m],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    fn fft2_inplace(&mut self, dir: FftDirection) {
        let m = self.m;
        let plan = match dir {
            FftDirection::Inverse => &self.plans.synthesis,
            FftDirection::Forward => &self.plans.analysis,
        };
        for row in self.buf.chunks_exact_mut(m) {
            plan.process_with_scratch(row, &mut self.scratch);
        }
        for i in 0..m {
            for j in 0..m {
                self.transposed[j * m + i] = self.buf[i * m + j];
            }
        }
        for row in self.transposed.chunks_exact_mut(m) {
            plan.process_with_scratch(row, &mut self.scratch);
        }
        for i in 0..m {
            for j in 0..m {
                self.buf[j * m + i] = self.transposed[i * m + j];
            }
        }
    }

    /// Coefficients -> real grid values at `x_j = j/M` (row-major).
    pub fn synthesize(&mut self, coeffs: &[Complex64], out: &mut [f64]) {
        assert_eq!(coeffs.len(), self.m * self.m);
        assert_eq!(out.len(), self.m * self.m);
        self.buf.copy_from_slice(coeffs);
        self.fft2_inplace(FftDirection::Inverse);
        for (o, c) in out.iter_mut().zip(&self.buf) {
            *o = c.re;
        }
    }

    /// Real grid values -> coefficients (with the `1/M^2` analysis scale);
    /// Nyquist rows are zeroed and round-off asymmetry is averaged away.
    pub fn analyze(&mut self, grid: &[f64], lattice: &FrequencyLattice) -> SpectralField {
        let m = self.m;
        assert_eq!(grid.len(), m * m);
        assert_eq!(lattice.grid_size(), m);
        for (c, g) in self.buf.iter_mut().zip(grid) {
            *c = Complex64::new(*g, 0.0);
        }
        self.fft2_inplace(FftDirection::Forward);
        let scale = 1.0 / (m * m) as f64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m * m];
        for bin in 0..coeffs.len() {
            let n = lattice.freq_of(bin);
            if lattice.is_nyquist(n) || !lattice.band().contains(n) {
                continue;
            }
            let conj_bin = lattice.bin_of(n.neg());
            // real input makes the DFT symmetric up to rounding; average the
            // pair so the invariant holds exactly
            let avg = 0.5 * (self.buf[bin] + self.buf[conj_bin].conj()) * scale;
            coeffs[bin] = if n.is_self_paired() {
                Complex64::new(avg.re, 0.0)
            } else {
                avg
            };
        }
        SpectralField::from_raw(lattice.clone(), coeffs)
    }
}

thread_local! {
    static WORKSPACES: std::cell::RefCell<HashMap<usize, FftWorkspace>> =
        std::cell::RefCell::new(HashMap::new());
}

/// Runs `f` with this thread's cached workspace for grid size `m`; the
/// buffers are reused across calls so transforms do not churn allocations.
pub fn with_workspace<T>(m: usize, f: impl FnOnce(&mut FftWorkspace) -> T) -> T {
    WORKSPACES.with(|cell| {
        let mut map = cell.borrow_mut();
        let ws = map.entry(m).or_insert_with(|| FftWorkspace::new(m));
        f(ws)
    })
}

/// Spectral coefficients -> real grid values.
///
/// Rejects input whose Hermitian symmetry is broken beyond round-off, since
/// the synthesized grid would silently drop imaginary content.
pub fn transform(field: &SpectralField) -> Result<Vec<f64>> {
    let max_coeff = field.coeffs().iter().fold(0.0f64, |a, c| a.max(c.norm()));
    field.check_symmetry(1e-10 * (1.0 + max_coeff))?;
    let m = field.lattice().grid_size();
    let mut out = vec![0.0; m * m];
    with_workspace(m, |ws| ws.synthesize(field.coeffs(), &mut out));
    Ok(out)
}

/// Real grid values -> spectral coefficients on the given lattice.
pub fn inverse_transform(grid: &[f64], lattice: &FrequencyLattice) -> SpectralField {
    with_workspace(lattice.grid_size(), |ws| ws.analyze(grid, lattice))
}

/// Mean square of grid values, `(1/M^2) sum f(x_j)^2`; equals the coefficient
/// sum `sum |c(n)|^2` by Parseval.
pub fn grid_mean_square(grid: &[f64]) -> f64 {
    grid.iter().map(|v| v * v).sum::<f64>() / grid.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_lattice, BandLimit, Freq};
    use std::f64::consts::PI;

    #[test]
    fn zero_mode_gives_constant_grid() {
        let lat = make_lattice(8, BandLimit::Limited(2)).unwrap();
        let mut f = SpectralField::zeros(&lat);
        f.set_pair(Freq::ZERO, Complex64::new(2.5, 0.0));
        let grid = transform(&f).unwrap();
        assert!(grid.iter().all(|v| (v - 2.5).abs() < 1e-13));
    }

    #[test]
    fn single_cosine() {
        let m = 16;
        let lat = make_lattice(m, BandLimit::Limited(3)).unwrap();
        let mut f = SpectralField::zeros(&lat);
        f.set_pair(Freq::new(1, 0), Complex64::new(0.5, 0.0));
        let grid = transform(&f).unwrap();
        for i in 0..m {
            for j in 0..m {
                let expect = (2.0 * PI * i as f64 / m as f64).cos();
                assert!((grid[i * m + j] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let lat = make_lattice(8, BandLimit::Limited(2)).unwrap();
        let mut f = SpectralField::zeros(&lat);
        f.set_pair(Freq::new(1, 0), Complex64::new(0.5, 0.0));
        f.coeffs_mut()[lat.bin_of(Freq::new(-1, 0))] = Complex64::new(0.9, 0.4);
        assert!(transform(&f).is_err());
    }
}

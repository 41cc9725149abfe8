use svnlw::noise::{sample_psi_path, sigma_closed_form, RngStream};
use svnlw::spectral::{BandLimit, FrequencyLattice, SpectralField};
use svnlw::wick::wick_power;

fn restrict(path: &svnlw::noise::NoisePath, ti: usize, band: u32, lat: &FrequencyLattice) -> SpectralField {
    let tagged = lat.with_band(BandLimit::Limited(band)).unwrap();
    let mut f = SpectralField::zeros(&tagged);
    let b2 = (band as i64) * (band as i64);
    for (i, &n) in path.modes().iter().enumerate() {
        if n.norm_sq() <= b2 {
            f.set_pair(n, path.pair(ti, i).0);
        }
    }
    f
}

fn main() {
    let fine = FrequencyLattice::new(256, BandLimit::Full).unwrap();
    let bands = [4u32, 8, 16, 32];
    for &t in &[0.05, 0.1, 0.5, 1.0] {
        let mut acc = vec![0.0f64; bands.len() - 1];
        let mut acc1 = vec![0.0f64; bands.len() - 1];
        let reps = 20;
        for r in 0..reps {
            let path = sample_psi_path(&[0.0, t], 32, RngStream::new(7, r)).unwrap();
            for d in 0..bands.len() - 1 {
                let (nb, nb2) = (bands[d], bands[d + 1]);
                let za = restrict(&path, 1, nb, &fine);
                let zb = restrict(&path, 1, nb2, &fine);
                let wa = wick_power(&za, 3, sigma_closed_form(t, nb)).unwrap();
                let wb = wick_power(&zb, 3, sigma_closed_form(t, nb2)).unwrap();
                let mut diff = wb;
                diff.add_scaled(&wa, -1.0);
                acc[d] += diff.sobolev_l2(-0.1) / reps as f64;
                // first-order difference too
                let mut d1 = zb.embed(&fine).unwrap();
                d1.add_scaled(&za.embed(&fine).unwrap(), -1.0);
                acc1[d] += d1.sobolev_l2(-0.1) / reps as f64;
            }
        }
        println!("t={t}: cube diffs {acc:?}  psi diffs {acc1:?}");
    }
}

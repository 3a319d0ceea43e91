//! Recovers a Lorentzian noise spectrum from simulated CP decay curves.

use std::f64::consts::PI;

use qsense::filter::ReconstructionOptions;
use qsense::numerics::logspace;
use qsense::protocols::{cp_noise_spectroscopy, SpectroscopyPlan};
use qsense::signal::SpectralDensity;

fn main() -> qsense::Result<()> {
    let psd = SpectralDensity::Lorentzian { s0: 0.1, omega_c: 0.0, half_width: 1.0 };
    let omegas = logspace(0.3, 3.0, 12);
    let plan = SpectroscopyPlan {
        gamma: 1.0,
        taus: omegas.iter().map(|w| PI / w).collect(),
        n_min: 2,
        n_max: 512,
        samples_per_tau: 32,
        trials: 1000,
        chi_min: 0.1,
        chi_max: 1.5,
        options: ReconstructionOptions::default(),
    };
    let r = cp_noise_spectroscopy(&psd, &plan, 7)?;
    println!("{:>10} {:>12} {:>12} {:>8}", "omega", "recovered", "true", "rel_err");
    let mut total = 0.0;
    for (w, s) in r.spectrum.omega.iter().zip(&r.spectrum.value) {
        let truth = psd.evaluate(*w);
        total += (s / truth - 1.0).abs();
        println!("{w:>10.4} {s:>12.5e} {truth:>12.5e} {:>8.3}", s / truth - 1.0);
    }
    println!("mean |relative error| = {:.3}", total / r.spectrum.omega.len() as f64);
    println!("decay points used: {}/{}", r.points.iter().filter(|p| p.used).count(), r.points.len());
    Ok(())
}

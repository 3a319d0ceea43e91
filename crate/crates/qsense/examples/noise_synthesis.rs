//! Gaussian noise synthesized from a Lorentzian spectrum, checked against
//! its analytic autocorrelation.

use qsense::signal::{estimate_autocorrelation, synthesize_noise, SpectralDensity};

fn main() -> qsense::Result<()> {
    let psd = SpectralDensity::Lorentzian { s0: 0.5, omega_c: 0.0, half_width: 4.0 };
    let realizations = 16;
    let mut mean: Vec<f64> = Vec::new();
    let mut lags = Vec::new();
    for seed in 0..realizations {
        let trace = synthesize_noise(&psd, 500.0, 0.01, seed)?;
        let acf = estimate_autocorrelation(&trace, 1.0)?;
        mean.resize(acf.y.len(), 0.0);
        for (m, y) in mean.iter_mut().zip(&acf.y) {
            *m += y / realizations as f64;
        }
        lags = acf.x;
    }
    println!("autocorrelation averaged over {realizations} traces of 500 s");
    for (lag, c) in lags.iter().zip(&mean).step_by(10) {
        println!("  lag {lag:.2}: estimated {c:+.4}, analytic {:+.4}", psd.autocorrelation(*lag).unwrap_or(f64::NAN));
    }
    Ok(())
}

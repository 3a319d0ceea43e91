//! Continuous sampling of a slow signal and of one above the sampling
//! Nyquist frequency, which shows up at its alias.

use qsense::protocols::{aliased_frequency, continuous_sampling_estimate, SamplingProbe};
use qsense::signal::ToneSpec;

fn main() -> qsense::Result<()> {
    let probe = SamplingProbe { gamma: 1.0, t_sense: 1e-3 };
    let t_s = 0.01;
    for f in [7.0, 23.5, 130.0] {
        let tone = ToneSpec::new(200.0, f, 0.0);
        let e = continuous_sampling_estimate(|t| tone.at(t), probe, t_s, 10.24)?;
        println!("f = {f:>6.1} Hz -> f̂ = {:.3} Hz (expected {:.3}, resolution {:.3})", e.f_hat, aliased_frequency(f, t_s), e.resolution);
    }
    Ok(())
}

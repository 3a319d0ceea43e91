//! Correlation spectroscopy: two CP blocks separated by a storage time
//! sweep out an oscillation at the tone frequency.

use qsense::filter::{averaged_weighting, MultipulseKind};
use qsense::numerics::linspace;
use qsense::protocols::{
    aliased_frequency, correlation_response, estimate_from_record, simulate_protocol, AmplitudeModel, CorrelationPhase, Drive,
    SequenceSpec, SimulationSetup,
};

fn main() -> qsense::Result<()> {
    let (n, tau, f_ac, v) = (4, 1e-3, 500.0, 600.0);
    let t1s = linspace(0.0, 0.0126, 64);
    let seqs: Vec<SequenceSpec> = t1s.iter().map(|&t1| SequenceSpec::Correlation { n, tau, t1 }).collect();
    let setup = SimulationSetup::new(0.0, 1.0, Drive::Tone { v, f_ac, model: AmplitudeModel::RandomPhase });
    let r = simulate_protocol(&seqs, &setup, 500, 21)?;
    let phi = (2.0 * averaged_weighting(MultipulseKind::Cp, f_ac, n, tau)?).sqrt() * v * n as f64 * tau;
    for (i, &t1) in t1s.iter().enumerate().step_by(8) {
        println!("t1 = {:.2} ms  p̂ = {:.3}  model {:.3}", 1e3 * t1, r.p_hat[i], correlation_response(phi, f_ac, t1, CorrelationPhase::Random));
    }
    let dt = t1s[1] - t1s[0];
    let e = estimate_from_record(&r.p_hat, dt)?;
    println!("f̂ = {:.1} ± {:.1} Hz (tone appears at {:.1} Hz)", e.f_hat, e.resolution, aliased_frequency(f_ac, dt));
    Ok(())
}

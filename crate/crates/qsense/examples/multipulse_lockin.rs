//! CP lock-in detection of an AC tone: simulated transition probability
//! versus pulse spacing for fixed and random tone phase.

use qsense::filter::{averaged_weighting, MultipulseKind};
use qsense::numerics::linspace;
use qsense::protocols::{multipulse_response, simulate_protocol, AmplitudeModel, Drive, SequenceSpec, SimulationSetup};

fn main() -> qsense::Result<()> {
    let (n, f_ac, v) = (8, 500.0, 100.0);
    let taus = linspace(0.8e-3, 1.2e-3, 9);
    let seqs: Vec<SequenceSpec> = taus.iter().map(|&tau| SequenceSpec::Cp { n, tau }).collect();
    for (name, model, v_peak) in [
        ("fixed phase", AmplitudeModel::FixedPhase { alpha: 0.0 }, v),
        ("random phase", AmplitudeModel::RandomPhase, 2f64.sqrt() * v),
    ] {
        let setup = SimulationSetup::new(0.0, 1.0, Drive::Tone { v: v_peak, f_ac, model });
        let r = simulate_protocol(&seqs, &setup, 2000, 17)?;
        println!("{name}:");
        for (i, s) in seqs.iter().enumerate() {
            let w2 = averaged_weighting(MultipulseKind::Cp, f_ac, n, taus[i])?;
            println!(
                "  τ = {:.3} ms  W̄² = {w2:.4}  p̂ = {:.3} ± {:.3}  model {:.3}",
                1e3 * taus[i],
                r.p_hat[i],
                r.sigma_p[i],
                multipulse_response(s, f_ac, model, 1.0, v)?
            );
        }
    }
    Ok(())
}

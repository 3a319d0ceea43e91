//! Ramsey fringes measured through three readout models, with the
//! efficiency C each one implies.

use std::f64::consts::PI;

use qsense::numerics::linspace;
use qsense::protocols::{ramsey_probability, simulate_protocol, Drive, SequenceSpec, SimulationSetup};
use qsense::qubit::{readout_parameters, ReadoutModel};

fn main() -> qsense::Result<()> {
    let omega0 = 2.0 * PI;
    let times = linspace(0.0, 1.0, 9);
    let seqs: Vec<SequenceSpec> = times.iter().map(|&t| SequenceSpec::Ramsey { t }).collect();
    let models = [
        ("ideal", ReadoutModel::ideal()),
        ("single-shot", ReadoutModel::single_shot(0.0, 1.0, 0.3, 0.5)?),
        ("averaged", ReadoutModel::averaged(0.0, 1.0, 2.0)?),
    ];
    for (name, model) in models {
        let rp = readout_parameters(&model)?;
        println!("{name}: R = {:.3}, C = {:.3}", rp.r, rp.c);
        let setup = SimulationSetup::new(omega0, 1.0, Drive::None).with_readout(model);
        let r = simulate_protocol(&seqs, &setup, 4000, 3)?;
        for (i, &t) in times.iter().enumerate() {
            println!("  t = {t:.3}  p̂ = {:.3} ± {:.3}  (ideal {:.3})", r.p_hat[i], r.sigma_p[i], ramsey_probability(omega0, t));
        }
    }
    Ok(())
}

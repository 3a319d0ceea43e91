//! Filter functions of Ramsey, echo and CP sequences, and the decoherence
//! they pick up from a Lorentzian bath.

use std::f64::consts::PI;

use qsense::filter::{decoherence_delta_approx, decoherence_detailed, FilterFunctionCurve, ModulationFunction, MultipulseKind};
use qsense::numerics::linspace;
use qsense::signal::SpectralDensity;

fn main() -> qsense::Result<()> {
    let (n, tau) = (8, 1.0);
    let t = n as f64 * tau;
    let psd = SpectralDensity::Lorentzian { s0: 0.01, omega_c: 0.0, half_width: 2.0 };
    let omegas = linspace(0.05, 4.0 * PI / tau, 8);
    for (name, y) in [
        ("ramsey", ModulationFunction::ramsey(t)?),
        ("echo", ModulationFunction::echo(t)?),
        ("cp8", ModulationFunction::multipulse(MultipulseKind::Cp, n, tau)?),
    ] {
        let curve = FilterFunctionCurve::sample(&y, &omegas);
        let chi = decoherence_detailed(&psd, &y, 1.0)?;
        println!("{name}: χ = {:.5} (tail {:.2e} above ω = {:.1})", chi.chi, chi.tail, chi.cutoff);
        for (w, v) in curve.omega.iter().zip(&curve.value) {
            println!("  |Y({w:.3})|² = {v:.4}");
        }
    }
    println!("cp8 delta-peak estimate: χ ≈ {:.5}", decoherence_delta_approx(&psd, n, tau, 1.0, 9));
    Ok(())
}

//! Minimum detectable signal, its optimum sensing time, and the classical
//! and quantum Fisher information of a Ramsey measurement.

use qsense::estimation::{
    fisher_information, minimum_detectable_signal, quantum_fisher_information, ramsey_outcome_probability, ramsey_qcrb,
    ramsey_state, ramsey_state_derivative, vmin_at, DetectionOrder, SensitivityInputs,
};

fn main() -> qsense::Result<()> {
    // NV-like magnetometer: γ in rad/(s·T), T2* = 2 µs, C = 0.03
    let inputs =
        SensitivityInputs { gamma: 1.76e11, contrast: 0.03, t_chi: 2e-6, t_m: 0.0, decay_exponent: 1.0, order: DetectionOrder::Slope };
    let best = minimum_detectable_signal(&inputs)?;
    println!("t_opt = {:.3e} s, v_min = {:.3e} T/√Hz", best.t_opt, best.v_min);
    for t in [0.1e-6, 0.5e-6, 1e-6, 2e-6, 4e-6] {
        println!("  t = {t:.1e}: v_min = {:.3e}", vmin_at(&inputs, t));
    }

    let (gamma, t, chi, n) = (1.0, 1.0, 0.2, 100);
    for v in [0.0, 0.5, 1.2] {
        let fi = fisher_information(|x| ramsey_outcome_probability(gamma, x, t, chi), v, n, gamma)?;
        let qfi = quantum_fisher_information(&ramsey_state(gamma, v, t, chi), &ramsey_state_derivative(gamma, v, t, chi))?;
        println!(
            "V = {v}: F = {:.4}, ΔV_CR = {:.4}, ΔV_QCR = {:.4} (= {:.4})",
            fi.fisher,
            fi.bound,
            1.0 / (n as f64 * qfi).sqrt(),
            ramsey_qcrb(gamma, t, chi, n)
        );
    }
    Ok(())
}

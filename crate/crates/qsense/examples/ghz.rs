//! GHZ probes: M-fold fringe frequency and √M tighter Cramér-Rao bound,
//! and how dephasing erodes the advantage.

use std::f64::consts::PI;

use qsense::ensemble::{ghz_probability, ghz_qcrb_dephased, qcrb_scaling, ProbeKind};
use qsense::protocols::estimate_from_record;

fn main() -> qsense::Result<()> {
    let (omega0, dt, len) = (2.0 * PI * 5.0, 1.0 / 1024.0, 1024);
    let (n, t, gamma) = (1, 1.0, 1.0);
    for m in [1usize, 2, 4, 8, 16] {
        let record: Vec<f64> = (0..len).map(|i| ghz_probability(m, omega0, i as f64 * dt)).collect();
        let f = estimate_from_record(&record, dt)?.f_hat;
        let unc = qcrb_scaling(m, n, t, 0.0, gamma, ProbeKind::Uncorrelated)?;
        let ghz = qcrb_scaling(m, n, t, 0.0, gamma, ProbeKind::Ghz)?;
        let noisy = ghz_qcrb_dephased(m, n, t, 0.1, gamma)?;
        println!("M = {m:>2}: fringe {f:>5.1} Hz, ΔV uncorrelated {unc:.4}, GHZ {ghz:.4}, GHZ with χ = 0.1 {noisy:.4}");
    }
    Ok(())
}

//! T1 relaxometry: Monte-Carlo population decay under transverse noise
//! compared with the golden-rule rates.

use std::f64::consts::PI;

use qsense::filter::{relaxation_rate, RelaxationInputs, RelaxationKind};
use qsense::protocols::t1_relaxometry;
use qsense::signal::SpectralDensity;

fn main() -> qsense::Result<()> {
    let omega0 = 2.0 * PI;
    let perp = SpectralDensity::White { s0: 0.1 };
    let times = [2.0, 4.0, 6.0, 8.0, 12.0, 16.0];
    let r = t1_relaxometry(&perp, omega0, 1.0, &times, 1.0 / 40.0, 2000, 11)?;
    let inputs = RelaxationInputs { psd_par: SpectralDensity::zero(), psd_perp: perp, gamma: 1.0, omega0, omega1: 0.0, delta_omega: 0.0 };
    let predicted = relaxation_rate(RelaxationKind::T1, &inputs);
    for i in 0..times.len() {
        println!("t = {:>5.1}  p = {:.4} ± {:.4}", r.times[i], r.p_hat[i], r.sigma_p[i]);
    }
    println!("fitted 1/T1 = {:.5} ± {:.5}, golden rule = {predicted:.5}", r.rate, r.rate_sigma);
    for kind in [RelaxationKind::T2Star, RelaxationKind::SpinLockResonant, RelaxationKind::SpinLockDetuned] {
        println!("{kind:?} rate = {:.5}", relaxation_rate(kind, &inputs));
    }
    Ok(())
}

//! Allan variance of integrated white-noise rates and of white readings.

use qsense::estimation::{allan_curve, AllanSeries};
use qsense::numerics::fit::log_log_slope;
use qsense::numerics::stream_rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> qsense::Result<()> {
    let t_s = 1e-3;
    let mut rng = stream_rng(99, 0);
    let rates: Vec<f64> = (0..1 << 14).map(|_| StandardNormal.sample(&mut rng)).collect();
    let white = AllanSeries::from_rates(&rates, t_s)?;
    // readings themselves white: first differences fall off as 1/τ²
    let readings = AllanSeries::new(rates.clone(), t_s)?;
    for (name, series) in [("white rates", white), ("white readings", readings)] {
        let (taus, vars) = allan_curve(&series)?;
        println!("{name}: log-log slope {:.3}", log_log_slope(&taus, &vars)?);
        for (tau, var) in taus.iter().zip(&vars).step_by(3) {
            println!("  τ = {tau:.3e} s  σ² = {var:.4e}");
        }
    }
    Ok(())
}

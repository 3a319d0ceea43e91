//! Median phase error against total sensing time for the three estimators.

use qsense::estimation::{scaling_benchmark, scaling_exponent, BenchmarkSettings, Estimator};

fn main() -> qsense::Result<()> {
    let settings = BenchmarkSettings { contrast: 1.0, g: 5, f: 2, trials: 300, seed: 2024 };
    for (est, levels) in [
        (Estimator::Adaptive, (2..=12).collect::<Vec<u32>>()),
        (Estimator::Bayesian, (2..=12).collect()),
        (Estimator::Baseline, (2..=14).step_by(2).collect()),
    ] {
        let pts = scaling_benchmark(est, &levels, &settings)?;
        for p in &pts {
            println!("{:>9} level {:>2}  T = {:>9.0}  median error = {:.3e}", est.name(), p.level, p.t_total, p.median_error);
        }
        println!("{} exponent: {:.3}\n", est.name(), scaling_exponent(&pts)?);
    }
    Ok(())
}

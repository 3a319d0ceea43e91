//! Walsh decomposition of a tone over one window and the piecewise-constant
//! reconstruction it yields.

use qsense::protocols::{walsh_coefficients, walsh_reconstruct};
use qsense::signal::ToneSpec;

fn main() -> qsense::Result<()> {
    let tone = ToneSpec::new(1.0, 1.0, 0.3);
    let t = 1.0;
    for count in [4, 16, 64] {
        let c = walsh_coefficients(|x| tone.at(x), count, t)?;
        let series = walsh_reconstruct(&c, t);
        let grid = 512;
        let rms = ((0..grid)
            .map(|i| {
                let x = (i as f64 + 0.5) * t / grid as f64;
                (tone.at(x) - series.eval(x)).powi(2)
            })
            .sum::<f64>()
            / grid as f64)
            .sqrt();
        let shown: Vec<String> = c.iter().take(8).map(|x| format!("{x:+.3}")).collect();
        println!("{count:>3} terms: rms error {rms:.4}; first coefficients {}", shown.join(" "));
    }
    Ok(())
}

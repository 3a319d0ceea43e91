//! One-axis twisting of a coherent spin state and the resulting
//! Wineland squeezing parameter.

use qsense::ensemble::{css, one_axis_twisting, squeezing_parameters, squeezing_scan};
use qsense::numerics::linspace;

fn main() -> qsense::Result<()> {
    for m in [10, 20, 40] {
        let scan = squeezing_scan(m, &linspace(0.0, 0.3, 121))?;
        let (chi_t, xi, angle) = scan.minimum();
        println!("M = {m}: min ξ_R = {xi:.4} at χt = {chi_t:.4}, quadrature angle {angle:.3} rad");
    }
    let twisted = one_axis_twisting(&css(20, [1.0, 0.0, 0.0])?, 0.1);
    let s = squeezing_parameters(&twisted, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0])?;
    println!("M = 20, χt = 0.1: ξ along y = {:.4}, best ξ_R = {:.4}", s.xi, s.xi_r);
    Ok(())
}

//! Dynamic range of fixed-time sensing against a doubling schedule of
//! sensing times.

use qsense::estimation::{dynamic_range, DynamicRangeMode};
use qsense::numerics::logspace;

fn main() -> qsense::Result<()> {
    let (gamma, t0, t2, c) = (1.76e11, 1e-6, 1e-3, 0.1);
    println!("{:>10} {:>12} {:>12}", "T (s)", "fixed", "doubling");
    for total in logspace(1e-2, 1e2, 9) {
        let a = dynamic_range(gamma, t0, total, c, t2, DynamicRangeMode::FixedTime)?;
        let b = dynamic_range(gamma, t0, total, c, t2, DynamicRangeMode::ExponentialSchedule)?;
        println!("{total:>10.3e} {:>12.4e} {:>12.4e}", a.dr, b.dr);
    }
    Ok(())
}

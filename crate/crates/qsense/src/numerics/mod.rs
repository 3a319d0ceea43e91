//! Small numerical building blocks shared by the physics modules.

pub mod fit;
pub mod optimize;
pub mod quad;
pub mod special;
pub mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random source used by every stochastic routine.
pub type Rng = ChaCha8Rng;

/// Independent stream `stream` of the master `seed`.
///
/// Monte-Carlo trials index their stream by trial number, so the result of a
/// run does not depend on how trials are scheduled across threads.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` points evenly spaced over `[start, stop]` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| start + h * i as f64).collect()
        }
    }
}

/// `count` points evenly spaced in log over `[start, stop]` inclusive.
pub fn logspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    linspace(start.ln(), stop.ln(), count)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

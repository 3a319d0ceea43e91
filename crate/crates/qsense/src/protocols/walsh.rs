//! Sequency-ordered Walsh functions and Walsh-series analysis of waveforms.

use crate::error::{ensure, Result};
use crate::numerics::quad::integrate;

/// Walsh function of sequency `n` at `x ∈ [0, 1)`; `n` zero crossings.
pub fn walsh(n: usize, x: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    let bits = usize::BITS - n.leading_zeros();
    let mut parity = 0usize;
    for k in 0..bits {
        let gray = ((n >> k) & 1) ^ ((n >> (k + 1)) & 1);
        let digit = ((x * (1u64 << (k + 1)) as f64).floor() as usize) & 1;
        parity ^= gray & digit;
    }
    if parity == 0 {
        1.0
    } else {
        -1.0
    }
}

/// First `count` Walsh coefficients `V_n = (1/t)∫₀ᵗ V(t′)w_n(t′/t)dt′`.
///
/// `count` must be a power of two; the signal is averaged over `count` equal
/// bins on which all requested Walsh functions are constant.
pub fn walsh_coefficients(signal: impl Fn(f64) -> f64, count: usize, t: f64) -> Result<Vec<f64>> {
    ensure(count.is_power_of_two(), || format!("coefficient count must be a power of two, got {count}"))?;
    ensure(t > 0.0, || format!("t must be positive, got {t}"))?;
    let h = t / count as f64;
    let averages = (0..count)
        .map(|b| {
            let (a, c) = (b as f64 * h, (b + 1) as f64 * h);
            Ok(integrate(&signal, a, c, 1e-15 * h, 1e-12)? / h)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((0..count)
        .map(|n| {
            averages
                .iter()
                .enumerate()
                .map(|(b, v)| walsh(n, (b as f64 + 0.5) / count as f64) * v)
                .sum::<f64>()
                / count as f64
        })
        .collect())
}

/// Partial Walsh series over `[0, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalshSeries {
    pub coeffs: Vec<f64>,
    pub t: f64,
}

impl WalshSeries {
    pub fn eval(&self, time: f64) -> f64 {
        let x = (time / self.t).clamp(0.0, 1.0 - f64::EPSILON);
        self.coeffs.iter().enumerate().map(|(n, c)| c * walsh(n, x)).sum()
    }
}

pub fn walsh_reconstruct(coeffs: &[f64], t: f64) -> WalshSeries {
    WalshSeries { coeffs: coeffs.to_vec(), t }
}

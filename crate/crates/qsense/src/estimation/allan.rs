//! Allan variance of a sampled sensor record.

use crate::error::{ensure, Result};

/// Samples `x_j = x(j t_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllanSeries {
    samples: Vec<f64>,
    t_s: f64,
}

impl AllanSeries {
    pub fn new(samples: Vec<f64>, t_s: f64) -> Result<Self> {
        ensure(samples.len() >= 3, || format!("need at least 3 samples, got {}", samples.len()))?;
        ensure(t_s > 0.0 && t_s.is_finite(), || format!("t_s must be positive, got {t_s}"))?;
        ensure(samples.iter().all(|x| x.is_finite()), || "samples must be finite".into())?;
        Ok(Self { samples, t_s })
    }

    /// Series of accumulated readings `x_j = t_s Σ_{i<j} y_i` built from
    /// per-interval rates `y_i`; the first sample is zero.
    pub fn from_rates(rates: &[f64], t_s: f64) -> Result<Self> {
        let mut acc = 0.0;
        let mut x = Vec::with_capacity(rates.len() + 1);
        x.push(0.0);
        for y in rates {
            acc += y * t_s;
            x.push(acc);
        }
        Self::new(x, t_s)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }
}

/// `σ²(m t_s) = Σ_{j=1}^{N−2m} (x_{j+m} − x_j)² / (2(N−2m) m² t_s²)`.
pub fn allan_variance(series: &AllanSeries, m: usize) -> Result<f64> {
    let n = series.samples.len();
    ensure(m >= 1 && n > 2 * m, || format!("grouping m = {m} too large for {n} samples"))?;
    let count = n - 2 * m;
    let x = &series.samples;
    let sum: f64 = (0..count).map(|j| (x[j + m] - x[j]).powi(2)).sum();
    Ok(sum / (2.0 * count as f64 * (m * m) as f64 * series.t_s * series.t_s))
}

/// Allan variance at octave-spaced groupings `m = 1, 2, 4, …`.
pub fn allan_curve(series: &AllanSeries) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut taus = Vec::new();
    let mut vars = Vec::new();
    let mut m = 1;
    while series.samples.len() > 2 * m {
        taus.push(m as f64 * series.t_s);
        vars.push(allan_variance(series, m)?);
        m *= 2;
    }
    Ok((taus, vars))
}

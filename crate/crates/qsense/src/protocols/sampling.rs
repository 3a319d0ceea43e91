//! Frequency estimation from a continuously sampled sensor record.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{ensure, Error, Result};

/// Short phase measurement repeated every sampling interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingProbe {
    pub gamma: f64,
    /// Sensing time of each sample; the phase is `γ·V·t_sense`.
    pub t_sense: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    /// Apparent (aliased) frequency, Hz.
    pub f_hat: f64,
    /// Frequency bin width `1/duration`.
    pub resolution: f64,
}

/// Slope-biased record `p_j = ½[1 − sin(γ V(j t_s) t_sense)]` over `duration`.
pub fn sampling_record(signal: impl Fn(f64) -> f64, probe: SamplingProbe, t_s: f64, duration: f64) -> Result<Vec<f64>> {
    ensure(t_s > 0.0 && duration >= 16.0 * t_s, || format!("duration {duration} must span many samples of {t_s}"))?;
    let n = (duration / t_s + 1e-9).floor() as usize;
    Ok((0..n).map(|j| 0.5 * (1.0 - (probe.gamma * signal(j as f64 * t_s) * probe.t_sense).sin())).collect())
}

/// Locates the dominant frequency of the slope-biased record
/// `p_j = ½[1 − sin(γ V(j t_s) t_sense)]`.
///
/// The bias ½ is removed before the transform, so a static signal shows up
/// at zero frequency. Signals above the sampling Nyquist appear at their alias.
pub fn continuous_sampling_estimate(
    signal: impl Fn(f64) -> f64,
    probe: SamplingProbe,
    t_s: f64,
    duration: f64,
) -> Result<FrequencyEstimate> {
    estimate_from_record(&sampling_record(signal, probe, t_s, duration)?, t_s)
}

/// Peak frequency of a measured probability record sampled every `t_s`.
pub fn estimate_from_record(record: &[f64], t_s: f64) -> Result<FrequencyEstimate> {
    ensure(t_s > 0.0 && record.len() >= 16, || "record must hold at least 16 samples".into())?;
    let n = record.len();
    let mut rec: Vec<Complex64> = record.iter().map(|p| Complex64::new(0.5 - p, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut rec);
    let power: Vec<f64> = rec[..=n / 2].iter().map(|c| c.norm_sqr()).collect();
    let (peak, max) = power.iter().copied().enumerate().fold((0, 0.0), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    let mut sorted = power.clone();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    if !(max > 0.0) || max <= 10.0 * floor {
        return Err(Error::Estimation(format!("no spectral peak above the noise floor (peak {max:e}, median {floor:e})")));
    }
    let resolution = 1.0 / (n as f64 * t_s);
    Ok(FrequencyEstimate { f_hat: peak as f64 * resolution, resolution })
}

/// Frequency at which a tone `f` appears when sampled every `t_s`.
pub fn aliased_frequency(f: f64, t_s: f64) -> f64 {
    (f - (f * t_s).round() / t_s).abs()
}

//! Noise spectroscopy and relaxometry pipelines built on the Monte-Carlo
//! simulator: measure decays, convert them to χ, and infer the spectrum.

use crate::error::{ensure, Error, Result};
use crate::filter::{reconstruct_psd, ChiMeasurement, ReconstructedSpectrum, ReconstructionOptions};
use crate::numerics::fit::fit_line;
use crate::signal::SpectralDensity;

use super::sequence::SequenceSpec;
use super::simulate::{simulate_protocol, Drive, SimulationSetup};

/// `χ = −ln(1 − 2p)` with its propagated standard error, for decays of the
/// form `p = ½(1 − e^{−χ})`. `None` once the signal is indistinguishable from
/// full decay.
pub fn chi_from_probability(p: f64, sigma_p: f64) -> Option<(f64, f64)> {
    let c = 1.0 - 2.0 * p;
    (c > 0.0).then(|| (-c.ln(), 2.0 * sigma_p / c))
}

/// Power-law fit `χ = rate·t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub exponent: f64,
}

/// Weighted log-log fit of `χ(t)`; points with χ ≤ 0 are dropped.
pub fn fit_decay(t: &[f64], chi: &[f64], sigma_chi: &[f64]) -> Result<DecayFit> {
    ensure(t.len() == chi.len() && t.len() == sigma_chi.len(), || "mismatched decay columns".into())?;
    let (mut x, mut y, mut w) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..t.len() {
        if chi[i] > 0.0 && t[i] > 0.0 {
            x.push(t[i].ln());
            y.push(chi[i].ln());
            let rel = sigma_chi[i] / chi[i];
            w.push(if rel > 0.0 { 1.0 / (rel * rel) } else { 1.0 });
        }
    }
    ensure(x.len() >= 2, || "need at least two decayed points to fit".into())?;
    let f = fit_line(&x, &y, Some(&w))?;
    Ok(DecayFit { rate: f.intercept.exp(), exponent: f.slope })
}

/// Settings of a CP noise-spectroscopy run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectroscopyPlan {
    pub gamma: f64,
    /// Pulse spacings; each probes `ω = π/τ`.
    pub taus: Vec<f64>,
    /// First pulse count of each decay curve (even).
    pub n_min: usize,
    /// Largest pulse count tried.
    pub n_max: usize,
    /// Noise samples per pulse spacing.
    pub samples_per_tau: usize,
    pub trials: usize,
    /// χ range kept for the reconstruction.
    pub chi_min: f64,
    pub chi_max: f64,
    pub options: ReconstructionOptions,
}

impl SpectroscopyPlan {
    fn validate(&self) -> Result<()> {
        ensure(!self.taus.is_empty() && self.taus.iter().all(|t| *t > 0.0 && t.is_finite()), || {
            "taus must be positive".into()
        })?;
        ensure(self.n_min >= 2 && self.n_min.is_multiple_of(2) && self.n_max >= self.n_min, || {
            format!("need even n_min >= 2 and n_max >= n_min, got {} and {}", self.n_min, self.n_max)
        })?;
        ensure(self.samples_per_tau >= 4, || "samples_per_tau must be at least 4".into())?;
        ensure(0.0 < self.chi_min && self.chi_min < self.chi_max, || "need 0 < chi_min < chi_max".into())
    }
}

/// One point of a CP decay curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPoint {
    pub tau: f64,
    pub n: usize,
    pub p_hat: f64,
    pub sigma_p: f64,
    /// NaN when the point had decayed completely.
    pub chi: f64,
    pub sigma_chi: f64,
    /// Whether the point entered the reconstruction.
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectroscopyResult {
    pub points: Vec<DecayPoint>,
    pub spectrum: ReconstructedSpectrum,
}

/// Simulates CP decay curves under parallel noise `psd` and reconstructs the
/// spectrum at `π/τ`.
///
/// For every spacing the pulse count doubles from `n_min` until χ exceeds
/// `chi_max` or `n_max` is reached. Points with χ inside `[chi_min, chi_max]`
/// are handed to [`reconstruct_psd`]. Spacing `i` uses master seed `seed + i`.
pub fn cp_noise_spectroscopy(psd: &SpectralDensity, plan: &SpectroscopyPlan, seed: u64) -> Result<SpectroscopyResult> {
    plan.validate()?;
    let mut points = Vec::new();
    for (i, &tau) in plan.taus.iter().enumerate() {
        let dt = tau / plan.samples_per_tau as f64;
        let setup = SimulationSetup::new(0.0, plan.gamma, Drive::Noise { par: *psd, perp: SpectralDensity::zero(), dt });
        let mut n = plan.n_min;
        while n <= plan.n_max {
            let r = simulate_protocol(&[SequenceSpec::Cp { n, tau }], &setup, plan.trials, seed.wrapping_add(i as u64))?;
            let (p, s) = (r.p_hat[0], r.sigma_p[0]);
            let (chi, sigma_chi) = chi_from_probability(p, s).unwrap_or((f64::NAN, f64::NAN));
            let used = chi >= plan.chi_min && chi <= plan.chi_max;
            points.push(DecayPoint { tau, n, p_hat: p, sigma_p: s, chi, sigma_chi, used });
            if chi.is_nan() || chi > plan.chi_max {
                break;
            }
            n *= 2;
        }
    }
    let measurements: Vec<ChiMeasurement> =
        points.iter().filter(|p| p.used).map(|p| ChiMeasurement { tau: p.tau, n: p.n, chi: p.chi }).collect();
    ensure(!measurements.is_empty(), || "no decay point fell inside the chi window".into())?;
    let spectrum = reconstruct_psd(&measurements, plan.gamma, &plan.options)?;
    Ok(SpectroscopyResult { points, spectrum })
}

/// Simulated population relaxation under transverse noise.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxometryResult {
    pub times: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub sigma_p: Vec<f64>,
    /// Fitted `1/T1` from `p = ½(1 − e^{−t/T1})`.
    pub rate: f64,
    pub rate_sigma: f64,
}

/// Prepares |0⟩, lets transverse noise `psd_perp` act for each time and
/// fits the relaxation rate by weighted least squares through the origin of
/// `−ln(1 − 2p)` against `t`.
pub fn t1_relaxometry(
    psd_perp: &SpectralDensity,
    omega0: f64,
    gamma: f64,
    times: &[f64],
    dt: f64,
    trials: usize,
    seed: u64,
) -> Result<RelaxometryResult> {
    ensure(!times.is_empty(), || "no relaxation times".into())?;
    let setup = SimulationSetup::new(omega0, gamma, Drive::Noise { par: SpectralDensity::zero(), perp: *psd_perp, dt });
    let points: Vec<SequenceSpec> = times.iter().map(|&t| SequenceSpec::T1 { t }).collect();
    let r = simulate_protocol(&points, &setup, trials, seed)?;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..times.len() {
        if let Some((y, s)) = chi_from_probability(r.p_hat[i], r.sigma_p[i]) {
            // a point with zero spread still carries information; floor its error
            let s = s.max(1.0 / trials as f64);
            let w = 1.0 / (s * s);
            num += w * times[i] * y;
            den += w * times[i] * times[i];
        }
    }
    if den == 0.0 {
        return Err(Error::Estimation("no usable relaxation point".into()));
    }
    Ok(RelaxometryResult { times: times.to_vec(), p_hat: r.p_hat, sigma_p: r.sigma_p, rate: num / den, rate_sigma: den.powf(-0.5) })
}

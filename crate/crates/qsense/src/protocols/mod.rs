//! Sensing sequences: closed-form responses and Monte-Carlo simulation.

mod sampling;
mod sequence;
mod simulate;
mod spectroscopy;
mod walsh;

use std::f64::consts::PI;

pub use sampling::{
    aliased_frequency, continuous_sampling_estimate, estimate_from_record, sampling_record, FrequencyEstimate, SamplingProbe,
};
pub use sequence::{Event, SequenceSpec};
pub use simulate::{simulate_cycle, simulate_protocol, AmplitudeModel, Drive, ProtocolResult, SimulationSetup};
pub use spectroscopy::{
    chi_from_probability, cp_noise_spectroscopy, fit_decay, t1_relaxometry, DecayFit, DecayPoint, RelaxometryResult,
    SpectroscopyPlan, SpectroscopyResult,
};
pub use walsh::{walsh, walsh_coefficients, walsh_reconstruct, WalshSeries};

use crate::error::{Error, Result};
use crate::filter::{averaged_weighting, weighting_function, MultipulseKind};
use crate::numerics::special::{bessel_i0_scaled, bessel_j0};
use crate::signal::ToneSpec;

/// Ramsey fringe `sin²(ω0 t/2)`.
pub fn ramsey_probability(omega0: f64, t: f64) -> f64 {
    (0.5 * omega0 * t).sin().powi(2)
}

/// Rabi transition probability for `H = ω0·Z + ω1·σx`.
pub fn rabi_probability(omega0: f64, omega1: f64, t: f64) -> f64 {
    let w2 = omega0 * omega0 + omega1 * omega1;
    if w2 == 0.0 {
        return 0.0;
    }
    omega1 * omega1 / w2 * (w2.sqrt() * t).sin().powi(2)
}

/// Bias point of the second π/2 pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// `p0 = ½`; response linear in the signal.
    Slope,
    /// `p0 = 0`; response quadratic in a fluctuating signal.
    Variance,
}

/// Slope: change `δp = ½γδV t` around `p0 = ½`. Variance: `p` for a
/// Gaussian fluctuation of rms `v`.
pub fn slope_variance_response(mode: DetectionMode, gamma: f64, v: f64, t: f64) -> f64 {
    let phi = gamma * v * t;
    match mode {
        DetectionMode::Slope => 0.5 * phi,
        DetectionMode::Variance => 0.5 * (1.0 - (-0.5 * phi * phi).exp()),
    }
}

/// Echo phase `γ[∫₀^{t/2}V − ∫_{t/2}^t V]` of a single tone.
pub fn spin_echo_phase(tone: &ToneSpec, gamma: f64, t: f64) -> Result<f64> {
    let y = crate::filter::ModulationFunction::echo(t)?;
    Ok(gamma * y.integrate_signal(|x| tone.at(x))?)
}

fn multipulse_kind(seq: &SequenceSpec) -> Result<(MultipulseKind, usize, f64)> {
    match *seq {
        SequenceSpec::Cp { n, tau } => Ok((MultipulseKind::Cp, n, tau)),
        SequenceSpec::Pdd { n, tau } => Ok((MultipulseKind::Pdd, n, tau)),
        other => Err(Error::Unsupported(format!("{other:?} is not a CP or PDD sequence"))),
    }
}

/// Phase accumulated from a set of tones. Pulse trains use the weighting
/// function; Ramsey and echo integrate the waveform directly.
pub fn multipulse_phase(tones: &[ToneSpec], seq: &SequenceSpec, gamma: f64) -> Result<f64> {
    seq.validate()?;
    match seq {
        SequenceSpec::Ramsey { .. } | SequenceSpec::SpinEcho { .. } => {
            let y = seq.modulation()?;
            Ok(gamma * y.integrate_signal(|x| tones.iter().map(|tn| tn.at(x)).sum())?)
        }
        _ => {
            let (kind, n, tau) = multipulse_kind(seq)?;
            let t = n as f64 * tau;
            tones.iter().try_fold(0.0, |acc, tn| {
                Ok(acc + gamma * tn.v_pk * t * weighting_function(kind, tn.f_ac, tn.alpha, n, tau)?)
            })
        }
    }
}

/// Transition probability of a CP or PDD sequence for a tone at `f_ac`.
///
/// `v` is the peak amplitude for `FixedPhase` and the rms amplitude for the
/// random models.
pub fn multipulse_response(seq: &SequenceSpec, f_ac: f64, model: AmplitudeModel, gamma: f64, v: f64) -> Result<f64> {
    seq.validate()?;
    let (kind, n, tau) = multipulse_kind(seq)?;
    let t = n as f64 * tau;
    Ok(match model {
        AmplitudeModel::FixedPhase { alpha } => {
            let w = weighting_function(kind, f_ac, alpha, n, tau)?;
            0.5 * (1.0 - (w * gamma * v * t).cos())
        }
        AmplitudeModel::RandomPhase => {
            let wbar = averaged_weighting(kind, f_ac, n, tau)?.sqrt();
            0.5 * (1.0 - bessel_j0(2.0 * wbar * gamma * v * t))
        }
        AmplitudeModel::RandomAmplitude => {
            let k = (2.0 * f_ac * tau).round().max(1.0);
            let x = averaged_weighting(kind, f_ac, n, tau)? * (gamma * v * t).powi(2) / (2.0 * k * k);
            0.5 * (1.0 - bessel_i0_scaled(x))
        }
    })
}

/// Tone phase across the two blocks of a correlation sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrelationPhase {
    Fixed { alpha: f64 },
    /// Averaged over a uniform phase.
    Random,
}

/// Correlation-sequence probability versus storage time `t1`; `phi` is the
/// peak phase of one block.
pub fn correlation_response(phi: f64, f_ac: f64, t1: f64, model: CorrelationPhase) -> f64 {
    let theta = 2.0 * PI * f_ac * t1;
    match model {
        CorrelationPhase::Fixed { alpha } => 0.5 * (1.0 - (phi * alpha.cos()).sin() * (phi * (alpha + theta).cos()).sin()),
        // exact phase average of the fixed-phase form
        CorrelationPhase::Random => {
            let d = bessel_j0(2.0 * phi * (0.5 * theta).sin()) - bessel_j0(2.0 * phi * (0.5 * theta).cos());
            0.5 * (1.0 - 0.5 * d)
        }
    }
}

//! Signal-to-noise ratio and minimum detectable signal.

use std::f64::consts::E;

use crate::error::{ensure, Error, Result};
use crate::numerics::optimize::golden_section;

/// Slope (`q = 1`) or variance (`q = 2`) detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionOrder {
    Slope,
    Variance,
}

impl DetectionOrder {
    pub fn q(self) -> i32 {
        match self {
            DetectionOrder::Slope => 1,
            DetectionOrder::Variance => 2,
        }
    }
}

/// Sensor figures entering the sensitivity: decay `χ(t) = (t/T_χ)^a`,
/// readout efficiency `C` and per-cycle overhead `t_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityInputs {
    pub gamma: f64,
    pub contrast: f64,
    pub t_chi: f64,
    pub t_m: f64,
    pub decay_exponent: f64,
    pub order: DetectionOrder,
}

impl SensitivityInputs {
    pub fn validate(&self) -> Result<()> {
        ensure(self.gamma > 0.0 && self.gamma.is_finite(), || format!("gamma must be positive, got {}", self.gamma))?;
        ensure(self.contrast > 0.0 && self.contrast <= 1.0, || format!("C must lie in (0, 1], got {}", self.contrast))?;
        ensure(self.t_chi > 0.0 && self.t_chi.is_finite(), || format!("T_chi must be positive, got {}", self.t_chi))?;
        ensure(self.t_m >= 0.0 && self.t_m.is_finite(), || format!("t_m must be >= 0, got {}", self.t_m))?;
        ensure(self.decay_exponent > 0.0 && self.decay_exponent.is_finite(), || {
            format!("decay exponent must be positive, got {}", self.decay_exponent)
        })
    }

    pub fn chi(&self, t: f64) -> f64 {
        (t / self.t_chi).powf(self.decay_exponent)
    }

    /// `|∂_V^q p|` at the bias point: `½γt` (slope) or `¼γ²t²` (variance).
    pub fn response(&self, t: f64) -> f64 {
        match self.order {
            DetectionOrder::Slope => 0.5 * self.gamma * t,
            DetectionOrder::Variance => 0.25 * (self.gamma * t).powi(2),
        }
    }
}

/// `SNR = δV^q |∂_V^q p| e^{−χ(t)} 2C √(T/(t + t_m))`.
pub fn snr(inputs: &SensitivityInputs, delta_v: f64, t: f64, total_time: f64) -> Result<f64> {
    inputs.validate()?;
    ensure(t > 0.0, || format!("sensing time must be positive, got {t}"))?;
    ensure(total_time >= t + inputs.t_m, || format!("total time {total_time} shorter than one cycle"))?;
    Ok(delta_v.abs().powi(inputs.order.q())
        * inputs.response(t)
        * (-inputs.chi(t)).exp()
        * 2.0
        * inputs.contrast
        * (total_time / (t + inputs.t_m)).sqrt())
}

/// Minimum detectable signal (unit SNR in 1 s of averaging) at sensing time `t`.
pub fn vmin_at(inputs: &SensitivityInputs, t: f64) -> f64 {
    let vq = inputs.chi(t).exp() * (t + inputs.t_m).sqrt() / (2.0 * inputs.contrast * inputs.response(t));
    vq.powf(1.0 / inputs.order.q() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    /// Per √Hz.
    pub v_min: f64,
    pub t_opt: f64,
}

/// Optimizes the sensing time numerically (golden section in `ln t`).
pub fn minimum_detectable_signal(inputs: &SensitivityInputs) -> Result<Sensitivity> {
    inputs.validate()?;
    let (lo, hi) = ((inputs.t_chi * 1e-8).ln(), (inputs.t_chi * 1e4).ln());
    let u = golden_section(|u| vmin_at(inputs, u.exp()).ln(), lo, hi, 1e-10);
    if u - lo < 1e-6 || hi - u < 1e-6 {
        return Err(Error::Boundary(format!("optimum sensing time runs to the search edge ({:e} s)", u.exp())));
    }
    let t_opt = u.exp();
    Ok(Sensitivity { v_min: vmin_at(inputs, t_opt), t_opt })
}

/// Slope detection with exponential dephasing at `t = T2*/2`: `√(2e)/(γC√T2*)`.
pub fn vmin_slope_optimal(gamma: f64, contrast: f64, t2star: f64) -> f64 {
    (2.0 * E).sqrt() / (gamma * contrast * t2star.sqrt())
}

/// Variance detection at `t ≈ T_χ`: `√(2e)/(γ√C T_χ^{3/4})`.
pub fn vmin_variance(gamma: f64, contrast: f64, t_chi: f64) -> f64 {
    (2.0 * E).sqrt() / (gamma * contrast.sqrt() * t_chi.powf(0.75))
}

/// Smallest detectable spectral density: `e/(γ²C√T_χ)`.
pub fn psd_vmin(gamma: f64, contrast: f64, t_chi: f64) -> f64 {
    E / (gamma * gamma * contrast * t_chi.sqrt())
}

/// `V_min(T) = v_min·T^{−1/(2q)}` after averaging for `T` seconds.
pub fn integrated_vmin(v_min: f64, order: DetectionOrder, total_time: f64) -> f64 {
    v_min * total_time.powf(-0.5 / order.q() as f64)
}

//! Dynamic range of single-time and doubling-schedule protocols.

use std::f64::consts::PI;

use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicRangeMode {
    /// Every cycle senses for `T2*`.
    FixedTime,
    /// Sensing times `t0, 2t0, 4t0, …` filling the total time.
    ExponentialSchedule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicRange {
    pub v_max: f64,
    pub v_min: f64,
    pub dr: f64,
}

/// Largest unambiguous signal `π/(γt)`.
pub fn v_max(gamma: f64, t: f64) -> f64 {
    PI / (gamma * t)
}

/// `V_max/V_min` with `V_min ≈ 2/(γC√(t_long T))`.
///
/// For the doubling schedule the longest sensing time is `(T + t0)/2`, the
/// last exposure of a sequence `t0, 2t0, …` whose durations add up to `T`.
pub fn dynamic_range(gamma: f64, t0: f64, total_time: f64, contrast: f64, t2star: f64, mode: DynamicRangeMode) -> Result<DynamicRange> {
    ensure(gamma > 0.0 && t0 > 0.0 && total_time > 0.0 && t2star > 0.0, || "times and gamma must be positive".into())?;
    ensure(contrast > 0.0 && contrast <= 1.0, || format!("C must lie in (0, 1], got {contrast}"))?;
    let (short, long) = match mode {
        DynamicRangeMode::FixedTime => (t2star, t2star),
        DynamicRangeMode::ExponentialSchedule => (t0, 0.5 * (total_time + t0)),
    };
    let v_max = v_max(gamma, short);
    let v_min = 2.0 / (gamma * contrast * (long * total_time).sqrt());
    Ok(DynamicRange { v_max, v_min, dr: v_max / v_min })
}

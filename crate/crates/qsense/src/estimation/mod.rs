//! Sensitivity, stability, Cramér-Rao bounds and phase estimation.

mod allan;
mod fisher;
mod phase;
mod range;
mod sensitivity;

pub use allan::{allan_curve, allan_variance, AllanSeries};
pub use fisher::{
    derivative, energy_spread, fisher_information, fisher_information_with_step, pure_state_bound,
    quantum_fisher_information, ramsey_fisher, ramsey_outcome_probability, ramsey_qcrb, ramsey_state,
    ramsey_state_derivative, FisherInfo,
};
pub use phase::{
    adaptive_phase_estimation, bayesian_phase_estimation, benchmark_point, circular_distance, fixed_time_estimate,
    qft_distribution, qft_phase_estimation, qft_phase_sample, quadrature_plan, scaling_benchmark, scaling_exponent,
    write_benchmark_csv, write_qft_csv, BenchmarkSettings, Estimator, PhaseOracle, PhasePosterior, PlannedMeasurement,
    QftOutcome, ResourceSchedule, ScalingPoint,
};
pub use range::{dynamic_range, v_max, DynamicRange, DynamicRangeMode};
pub use sensitivity::{
    integrated_vmin, minimum_detectable_signal, psd_vmin, snr, vmin_at, vmin_slope_optimal, vmin_variance,
    DetectionOrder, Sensitivity, SensitivityInputs,
};

//! Two-level sensor: density matrix, Hamiltonians, ideal pulses, time
//! evolution and readout statistics.
//!
//! Conventions: ħ = 1, all frequencies angular. |0⟩ is the lower level and
//! `Z = |1⟩⟨1| − |0⟩⟨0|`, so the internal Hamiltonian is `½ω0·Z` and a free
//! superposition `(|0⟩ + |1⟩)/√2` evolves into `(|0⟩ + e^{−iω0t}|1⟩)/√2`.
//! Transverse couplings use the usual σx, σy.

use std::sync::Arc;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{ensure, Error, Result};
use crate::numerics::special::erf;
use crate::numerics::Rng;

pub type Mat2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

/// Energy-ordered Pauli Z, +1 on the upper level |1⟩.
pub fn sigma_z() -> Mat2 {
    Mat2::new(-ONE, ZERO, ZERO, ONE)
}

/// Density matrix of the sensor qubit.
///
/// `coherence` is `⟨1|ρ|0⟩ = c1·c0*`; the opposite off-diagonal element is its
/// conjugate. Under free precession it picks up `e^{−iω0t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub rho00: f64,
    pub rho11: f64,
    pub coherence: Complex64,
}

impl QubitState {
    pub fn ground() -> Self {
        Self { rho00: 1.0, rho11: 0.0, coherence: ZERO }
    }

    pub fn excited() -> Self {
        Self { rho00: 0.0, rho11: 1.0, coherence: ZERO }
    }

    /// Checked constructor.
    pub fn new(rho00: f64, rho11: f64, coherence: Complex64) -> Result<Self> {
        let s = Self { rho00, rho11, coherence };
        ensure(s.is_physical(1e-12), || format!("not a density matrix: {s:?}"))?;
        Ok(s)
    }

    /// State with Bloch vector `r` (|r| ≤ 1), components along σx, σy, Z.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        ensure(norm <= 1.0 + 1e-12, || format!("Bloch vector longer than 1: {norm}"))?;
        Ok(Self {
            rho00: 0.5 * (1.0 - r[2]),
            rho11: 0.5 * (1.0 + r[2]),
            coherence: Complex64::new(0.5 * r[0], 0.5 * r[1]),
        })
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        [2.0 * self.coherence.re, 2.0 * self.coherence.im, self.rho11 - self.rho00]
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            Complex64::from(self.rho00),
            self.coherence.conj(),
            self.coherence,
            Complex64::from(self.rho11),
        )
    }

    /// Hermitian part of `m`, read back as a state.
    pub fn from_matrix(m: &Mat2) -> Self {
        Self {
            rho00: m[(0, 0)].re,
            rho11: m[(1, 1)].re,
            coherence: 0.5 * (m[(1, 0)] + m[(0, 1)].conj()),
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho00 + self.rho11
    }

    pub fn purity(&self) -> f64 {
        self.rho00 * self.rho00 + self.rho11 * self.rho11 + 2.0 * self.coherence.norm_sqr()
    }

    /// Unit trace, non-negative populations and determinant, within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        (self.trace() - 1.0).abs() <= tol
            && self.rho00 >= -tol
            && self.rho11 >= -tol
            && self.rho00 * self.rho11 - self.coherence.norm_sqr() >= -tol
    }

    /// Removes all coherence, keeping populations.
    pub fn dephased(&self) -> Self {
        Self { coherence: ZERO, ..*self }
    }

    /// `U ρ U†`.
    pub fn transformed(&self, u: &Mat2) -> Self {
        Self::from_matrix(&(u * self.matrix() * u.adjoint()))
    }
}

/// Level splitting of the bare sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalHamiltonian {
    pub omega0: f64,
}

impl InternalHamiltonian {
    pub fn new(omega0: f64) -> Result<Self> {
        ensure(omega0.is_finite(), || format!("omega0 must be finite, got {omega0}"))?;
        Ok(Self { omega0 })
    }
}

/// Real-valued function of time.
pub type Signal = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coupling of the sensor to a signal `V(t)`:
/// `½γ(V∥·Z + Vx·σx + Vy·σy)`.
#[derive(Clone)]
pub struct SignalHamiltonian {
    pub gamma: f64,
    pub v_par: Option<Signal>,
    pub v_perp_x: Option<Signal>,
    pub v_perp_y: Option<Signal>,
}

impl std::fmt::Debug for SignalHamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SignalHamiltonian")
            .field("gamma", &self.gamma)
            .field("v_par", &self.v_par.is_some())
            .field("v_perp_x", &self.v_perp_x.is_some())
            .field("v_perp_y", &self.v_perp_y.is_some())
            .finish()
    }
}

impl SignalHamiltonian {
    /// No signal, coupling `gamma`.
    pub fn new(gamma: f64) -> Result<Self> {
        ensure(gamma > 0.0 && gamma.is_finite(), || format!("gamma must be positive, got {gamma}"))?;
        Ok(Self { gamma, v_par: None, v_perp_x: None, v_perp_y: None })
    }

    pub fn none() -> Self {
        Self { gamma: 1.0, v_par: None, v_perp_x: None, v_perp_y: None }
    }

    pub fn with_parallel(mut self, v: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.v_par = Some(Arc::new(v));
        self
    }

    pub fn with_perp_x(mut self, v: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.v_perp_x = Some(Arc::new(v));
        self
    }

    pub fn with_perp_y(mut self, v: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.v_perp_y = Some(Arc::new(v));
        self
    }

    pub fn is_static(&self) -> bool {
        self.v_par.is_none() && self.v_perp_x.is_none() && self.v_perp_y.is_none()
    }

    /// Field vector `(γVx, γVy, γV∥)` at time `t`.
    fn field(&self, t: f64) -> Result<[f64; 3]> {
        let eval = |s: &Option<Signal>| s.as_ref().map_or(0.0, |f| f(t));
        let v = [eval(&self.v_perp_x), eval(&self.v_perp_y), eval(&self.v_par)];
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Evolution(format!("non-finite signal sample at t = {t}")));
        }
        Ok(v.map(|x| self.gamma * x))
    }
}

/// `exp(−i·angle·(n̂·σ)/2)` for a unit axis `n̂` in (σx, σy, Z) components.
pub fn rotation(axis: [f64; 3], angle: f64) -> Mat2 {
    let (s, c) = (0.5 * angle).sin_cos();
    let [nx, ny, nz] = axis;
    Mat2::new(
        Complex64::new(c, nz * s),
        Complex64::new(-ny * s, -nx * s),
        Complex64::new(ny * s, -nx * s),
        Complex64::new(c, -nz * s),
    )
}

/// Propagator for the constant Hamiltonian `½(b·σ)` over `dt`.
fn step_propagator(b: [f64; 3], dt: f64) -> Mat2 {
    let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    if norm == 0.0 {
        return Mat2::identity();
    }
    rotation([b[0] / norm, b[1] / norm, b[2] / norm], norm * dt)
}

/// Evolves `state` from time 0 for `duration`.
pub fn evolve(
    state: &QubitState,
    h0: &InternalHamiltonian,
    hv: &SignalHamiltonian,
    duration: f64,
    step: f64,
) -> Result<QubitState> {
    evolve_window(state, h0, hv, 0.0, duration, step)
}

/// Evolves `state` over `[start, start + duration]`.
///
/// The Hamiltonian is held at its mid-step value and each step is applied as
/// an exact SU(2) exponential. The final step is shortened to land on the
/// window end. A signal-free Hamiltonian is applied in a single step.
pub fn evolve_window(
    state: &QubitState,
    h0: &InternalHamiltonian,
    hv: &SignalHamiltonian,
    start: f64,
    duration: f64,
    step: f64,
) -> Result<QubitState> {
    Ok(state.transformed(&propagator(h0, hv, start, duration, step)?))
}

/// Unitary generated over `[start, start + duration]`; see [`evolve_window`].
pub fn propagator(
    h0: &InternalHamiltonian,
    hv: &SignalHamiltonian,
    start: f64,
    duration: f64,
    step: f64,
) -> Result<Mat2> {
    ensure(step > 0.0 && step.is_finite(), || format!("step must be positive, got {step}"))?;
    ensure(duration >= 0.0, || format!("duration must be non-negative, got {duration}"))?;
    if duration == 0.0 {
        return Ok(Mat2::identity());
    }
    if hv.is_static() {
        return Ok(step_propagator([0.0, 0.0, h0.omega0], duration));
    }
    let n = ((duration / step) - 1e-9).ceil().max(1.0) as usize;
    let mut u = Mat2::identity();
    for k in 0..n {
        let t0 = k as f64 * step;
        let dt = if k + 1 == n { duration - t0 } else { step };
        let f = hv.field(start + t0 + 0.5 * dt)?;
        u = step_propagator([f[0], f[1], f[2] + h0.omega0], dt) * u;
    }
    Ok(u)
}

/// Default integration step: 1/200 of the fastest period present.
pub fn default_step(omega0: f64, gamma: f64, v_peak: f64) -> f64 {
    let fastest = omega0.abs().max(gamma * v_peak.abs());
    if fastest == 0.0 {
        f64::INFINITY
    } else {
        2.0 * std::f64::consts::PI / fastest / 200.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

/// Instantaneous rotation `exp(−i·angle·σ_axis/2)` applied at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPulse {
    pub axis: Axis,
    pub angle: f64,
    pub time: f64,
}

impl ControlPulse {
    pub fn new(axis: Axis, angle: f64, time: f64) -> Self {
        Self { axis, angle, time }
    }

    pub fn unitary(&self) -> Mat2 {
        rotation(self.axis.unit(), self.angle)
    }
}

pub fn apply_pulse(state: &QubitState, pulse: &ControlPulse) -> Result<QubitState> {
    ensure(pulse.angle.is_finite(), || format!("pulse angle must be finite, got {}", pulse.angle))?;
    Ok(state.transformed(&pulse.unitary()))
}

/// Detector response model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReadoutKind {
    /// Noiseless projective readout returning 0.0 or 1.0.
    Ideal,
    /// Two Gaussian peaks discriminated by a threshold.
    SingleShot { xbar0: f64, xbar1: f64, sigma_x: f64, threshold: f64 },
    /// Two Gaussian peaks averaged without discrimination.
    Averaged { xbar0: f64, xbar1: f64, sigma_x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutModel {
    pub kind: ReadoutKind,
    /// Initialization fidelity; scales the excited-state probability at readout.
    pub beta: f64,
}

/// Figures of merit derived from a readout model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutParameters {
    pub kappa0: f64,
    pub kappa1: f64,
    /// Readout noise relative to projection noise.
    pub r: f64,
    /// Overall readout efficiency `1/√(1+R²)`.
    pub c: f64,
}

/// Estimated transition probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityEstimate {
    pub p: f64,
    pub sigma: f64,
}

impl ReadoutModel {
    pub fn ideal() -> Self {
        Self { kind: ReadoutKind::Ideal, beta: 1.0 }
    }

    pub fn single_shot(xbar0: f64, xbar1: f64, sigma_x: f64, threshold: f64) -> Result<Self> {
        let m = Self { kind: ReadoutKind::SingleShot { xbar0, xbar1, sigma_x, threshold }, beta: 1.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn averaged(xbar0: f64, xbar1: f64, sigma_x: f64) -> Result<Self> {
        let m = Self { kind: ReadoutKind::Averaged { xbar0, xbar1, sigma_x }, beta: 1.0 };
        m.validate()?;
        Ok(m)
    }

    /// Photon-counting readout: the bright state gives `x1` counts, the dark
    /// state `x1(1 − ε)`, and the shot noise of the mean level sets σx.
    pub fn optical(x1: f64, contrast: f64) -> Result<Self> {
        ensure(x1 > 0.0 && contrast > 0.0 && contrast <= 1.0, || {
            format!("optical readout needs x1 > 0 and 0 < contrast <= 1, got {x1}, {contrast}")
        })?;
        Self::averaged(x1 * (1.0 - contrast), x1, (x1 * (1.0 - 0.5 * contrast)).sqrt())
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        ensure(beta > 0.0 && beta <= 1.0, || format!("beta must be in (0, 1], got {beta}"))?;
        self.beta = beta;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.beta > 0.0 && self.beta <= 1.0, || format!("beta must be in (0, 1], got {}", self.beta))?;
        let check = |x0: f64, x1: f64, s: f64| -> Result<()> {
            if !(x0.is_finite() && x1.is_finite()) || x0 == x1 {
                return Err(Error::Model(format!("degenerate peaks xbar0 = {x0}, xbar1 = {x1}")));
            }
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Model(format!("sigma_x must be positive, got {s}")));
            }
            Ok(())
        };
        match self.kind {
            ReadoutKind::Ideal => Ok(()),
            ReadoutKind::SingleShot { xbar0, xbar1, sigma_x, threshold } => {
                check(xbar0, xbar1, sigma_x)?;
                let (lo, hi) = (xbar0.min(xbar1), xbar0.max(xbar1));
                if !(threshold > lo && threshold < hi) {
                    return Err(Error::Model(format!("threshold {threshold} must lie between the peaks")));
                }
                Ok(())
            }
            ReadoutKind::Averaged { xbar0, xbar1, sigma_x } => check(xbar0, xbar1, sigma_x),
        }
    }

    fn peaks(&self) -> (f64, f64) {
        match self.kind {
            ReadoutKind::Ideal => (0.0, 1.0),
            ReadoutKind::SingleShot { xbar0, xbar1, .. } | ReadoutKind::Averaged { xbar0, xbar1, .. } => {
                (xbar0, xbar1)
            }
        }
    }

    /// Maps a single reading to the outcome bit a threshold detector reports.
    fn classify(&self, x: f64) -> bool {
        match self.kind {
            ReadoutKind::Ideal => x >= 0.5,
            ReadoutKind::SingleShot { xbar0, xbar1, threshold, .. } => (x > threshold) == (xbar1 > xbar0),
            ReadoutKind::Averaged { .. } => unreachable!("averaged readout is not thresholded"),
        }
    }
}

/// Draws one detector reading for `state`.
pub fn readout_sample(state: &QubitState, model: &ReadoutModel, rng: &mut Rng) -> f64 {
    let p = (state.rho11 * model.beta).clamp(0.0, 1.0);
    let excited = rng.random::<f64>() < p;
    let (x0, x1) = model.peaks();
    let mean = if excited { x1 } else { x0 };
    match model.kind {
        ReadoutKind::Ideal => mean,
        ReadoutKind::SingleShot { sigma_x, .. } | ReadoutKind::Averaged { sigma_x, .. } => {
            mean + sigma_x * Normal::new(0.0, 1.0).unwrap().sample(rng)
        }
    }
}

/// Estimates the transition probability from a batch of readings.
///
/// Thresholded models count outcomes; the averaged model maps the mean reading
/// linearly between the peaks and clamps to [0, 1]. The binomial term of the
/// error uses `max(p(1−p), 1/N)` so the reported error never vanishes.
pub fn estimate_probability(readings: &[f64], model: &ReadoutModel) -> Result<ProbabilityEstimate> {
    ensure(!readings.is_empty(), || "no readings to estimate from".into())?;
    let n = readings.len() as f64;
    let binomial = |p: f64| (p * (1.0 - p)).max(1.0 / n) / n;
    match model.kind {
        ReadoutKind::Ideal => {
            let p = readings.iter().filter(|&&x| model.classify(x)).count() as f64 / n;
            Ok(ProbabilityEstimate { p, sigma: binomial(p).sqrt() })
        }
        ReadoutKind::SingleShot { .. } => {
            let p = readings.iter().filter(|&&x| model.classify(x)).count() as f64 / n;
            let rp = readout_parameters(model)?;
            let classical = (rp.kappa0 * (1.0 - rp.kappa0) * p + rp.kappa1 * (1.0 - rp.kappa1) * (1.0 - p)) / n;
            Ok(ProbabilityEstimate { p, sigma: (classical + binomial(p)).sqrt() })
        }
        ReadoutKind::Averaged { xbar0, xbar1, sigma_x } => {
            let mean = readings.iter().sum::<f64>() / n;
            let p = ((mean - xbar0) / (xbar1 - xbar0)).clamp(0.0, 1.0);
            let classical = sigma_x * sigma_x / (n * (xbar1 - xbar0).powi(2));
            Ok(ProbabilityEstimate { p, sigma: (classical + binomial(p)).sqrt() })
        }
    }
}

/// Misassignment probabilities, noise ratio R and efficiency C of `model`.
pub fn readout_parameters(model: &ReadoutModel) -> Result<ReadoutParameters> {
    model.validate()?;
    match model.kind {
        ReadoutKind::Ideal => Ok(ReadoutParameters { kappa0: 0.0, kappa1: 0.0, r: 0.0, c: 1.0 }),
        ReadoutKind::SingleShot { xbar0, xbar1, sigma_x, threshold } => {
            let tail = |x: f64| 0.5 * (1.0 - erf((x - threshold).abs() / (sigma_x * std::f64::consts::SQRT_2)));
            let (kappa0, kappa1) = (tail(xbar0), tail(xbar1));
            let kappa = 0.5 * (kappa0 + kappa1);
            Ok(ReadoutParameters { kappa0, kappa1, r: 2.0 * kappa.sqrt(), c: 1.0 / (1.0 + 4.0 * kappa).sqrt() })
        }
        ReadoutKind::Averaged { xbar0, xbar1, sigma_x } => {
            let r = 2.0 * sigma_x / (xbar1 - xbar0).abs();
            Ok(ReadoutParameters { kappa0: 0.0, kappa1: 0.0, r, c: 1.0 / (1.0 + r * r).sqrt() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stream_rng;
    use std::f64::consts::PI;

    fn x_plus() -> QubitState {
        QubitState::from_bloch([1.0, 0.0, 0.0]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn zero_duration_is_identity() {
        let s = x_plus();
        let hv = SignalHamiltonian::none().with_perp_x(|_| 3.0);
        let out = evolve(&s, &InternalHamiltonian { omega0: 2.0 }, &hv, 0.0, 0.01).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn free_precession_phase() {
        let (w0, t) = (2.3, 0.7);
        let out = evolve(&x_plus(), &InternalHamiltonian { omega0: w0 }, &SignalHamiltonian::none(), t, 1.0).unwrap();
        let expected = 0.5 * Complex64::from_polar(1.0, -w0 * t);
        assert!((out.coherence - expected).norm() < 1e-14);
    }

    #[test]
    fn resonant_drive_flops_population() {
        let (w1, t) = (1.7, 1.3);
        let hv = SignalHamiltonian::new(1.0).unwrap().with_perp_x(move |_| w1);
        let out = evolve(&QubitState::ground(), &InternalHamiltonian { omega0: 0.0 }, &hv, t, 1e-3).unwrap();
        assert!(close(out.rho11, (0.5 * w1 * t).sin().powi(2), 1e-12));
    }

    #[test]
    fn pulses() {
        let pi_x = ControlPulse::new(Axis::X, PI, 0.0);
        let s = apply_pulse(&QubitState::ground(), &pi_x).unwrap();
        assert!(close(s.rho11, 1.0, 1e-15));

        let half_y = ControlPulse::new(Axis::Y, PI / 2.0, 0.0);
        let s = apply_pulse(&QubitState::ground(), &half_y).unwrap();
        assert!((s.coherence - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(close(s.rho00, 0.5, 1e-15));
        let s = apply_pulse(&s, &half_y).unwrap();
        assert!(close(s.rho11, 1.0, 1e-15));
    }

    #[test]
    fn ramsey_sequence_gives_fringe() {
        let (w0, t) = (1.1, 2.0);
        let s = apply_pulse(&QubitState::ground(), &ControlPulse::new(Axis::Y, PI / 2.0, 0.0)).unwrap();
        let s = evolve(&s, &InternalHamiltonian { omega0: w0 }, &SignalHamiltonian::none(), t, 1.0).unwrap();
        let s = apply_pulse(&s, &ControlPulse::new(Axis::Y, -PI / 2.0, t)).unwrap();
        assert!(close(s.rho11, (0.5 * w0 * t).sin().powi(2), 1e-14));
    }

    #[test]
    fn step_halving_converges() {
        let w0 = 2.0 * PI;
        let hv = SignalHamiltonian::new(1.0).unwrap().with_perp_x(|t| 0.8 * (3.0 * t).cos()).with_parallel(|t| 0.3 * t);
        let h0 = InternalHamiltonian { omega0: w0 };
        let step = default_step(w0, 1.0, 1.1);
        let a = evolve(&x_plus(), &h0, &hv, 1.0, step).unwrap();
        let b = evolve(&x_plus(), &h0, &hv, 1.0, step / 2.0).unwrap();
        assert!((a.matrix() - b.matrix()).iter().all(|z| z.norm() < 1e-6));
    }

    #[test]
    fn non_finite_signal_is_an_error() {
        let hv = SignalHamiltonian::none().with_parallel(|t| if t > 0.5 { f64::NAN } else { 0.0 });
        let r = evolve(&x_plus(), &InternalHamiltonian { omega0: 1.0 }, &hv, 1.0, 0.1);
        assert!(matches!(r, Err(Error::Evolution(_))));
        let r = evolve(&x_plus(), &InternalHamiltonian { omega0: 1.0 }, &SignalHamiltonian::none(), 1.0, 0.0);
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn ideal_readout_excited_state() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(readout_sample(&QubitState::excited(), &ReadoutModel::ideal(), &mut rng), 1.0);
        }
        let est = estimate_probability(&[1.0; 10], &ReadoutModel::ideal()).unwrap();
        assert_eq!(est.p, 1.0);
        assert!(est.sigma > 0.0);
    }

    #[test]
    fn ideal_projection_noise() {
        let readings: Vec<f64> = (0..1000).map(|i| (i % 2) as f64).collect();
        let est = estimate_probability(&readings, &ReadoutModel::ideal()).unwrap();
        assert!(close(est.sigma * est.sigma, 1.0 / 4000.0, 1e-18));
    }

    #[test]
    fn single_shot_kappa_at_four_sigma() {
        let m = ReadoutModel::single_shot(0.0, 4.0, 1.0, 2.0).unwrap();
        let p = readout_parameters(&m).unwrap();
        // ½·erfc(2/√2), evaluated independently
        assert!(close(p.kappa0, 0.022750131948179195, 1e-15));
        assert!(close(p.kappa1, p.kappa0, 1e-15));
    }

    #[test]
    fn contrast_from_kappa() {
        // threshold placed so both tails equal 0.01
        let z = 2.326347874040841;
        let m = ReadoutModel::single_shot(0.0, 2.0 * z, 1.0, z).unwrap();
        let p = readout_parameters(&m).unwrap();
        assert!(close(p.kappa0, 0.01, 1e-12));
        assert!(close(p.c, 1.0 / 1.04f64.sqrt(), 1e-12));
    }

    #[test]
    fn averaged_readout_noise_ratio() {
        let m = ReadoutModel::averaged(0.0, 2.0, 0.5).unwrap();
        let p = readout_parameters(&m).unwrap();
        assert!(close(p.r, 0.5, 1e-15));
        let readings = vec![1.0; 400];
        let est = estimate_probability(&readings, &m).unwrap();
        // σ² = R²/(4N) + p(1−p)/N at p = ½
        assert!(close(est.sigma.powi(2), (0.25 + 1.0) / (4.0 * 400.0), 1e-15));
        assert!(close(est.sigma.powi(2), 1.0 / (4.0 * p.c * p.c * 400.0), 1e-15));
    }

    #[test]
    fn optical_readout() {
        let small = readout_parameters(&ReadoutModel::optical(1e4, 0.01).unwrap()).unwrap();
        assert!(close(small.r / (2.0 / (0.01 * 100.0)), 1.0, 3e-3));
        let p = readout_parameters(&ReadoutModel::optical(100.0, 0.2).unwrap()).unwrap();
        assert!(close(p.r, 1.0, 0.06));
        assert!(close(p.c, 0.707, 0.03));
    }

    #[test]
    fn averaged_histogram_mean() {
        let m = ReadoutModel::averaged(1.0, 3.0, 0.4).unwrap();
        let s = QubitState::new(0.7, 0.3, Complex64::new(0.1, 0.2)).unwrap();
        let mut rng = stream_rng(5, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| readout_sample(&s, &m, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // standard error of the mixture mean
        let var = 0.4f64.powi(2) + 0.3 * 0.7 * 4.0;
        assert!((mean - (1.0 + 0.3 * 2.0)).abs() < 5.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn degenerate_peaks_rejected() {
        assert!(matches!(ReadoutModel::averaged(1.0, 1.0, 0.1), Err(Error::Model(_))));
        assert!(matches!(ReadoutModel::single_shot(0.0, 1.0, 0.1, 2.0), Err(Error::Model(_))));
        assert!(ReadoutModel::ideal().with_beta(0.0).is_err());
    }

    #[test]
    fn beta_scales_excitation() {
        let m = ReadoutModel::ideal().with_beta(0.5).unwrap();
        let mut rng = stream_rng(9, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| readout_sample(&QubitState::excited(), &m, &mut rng)).collect();
        let est = estimate_probability(&xs, &m).unwrap();
        assert!((est.p - 0.5).abs() < 5.0 * est.sigma);
    }
}

//! Pulse sequences and their timed event lists.

use std::f64::consts::PI;

use crate::error::{ensure, Result};
use crate::filter::{ModulationFunction, MultipulseKind};
use crate::qubit::{Axis, ControlPulse};

/// A sensing sequence. All durations in seconds, frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SequenceSpec {
    /// π/2 − free evolution `t` − π/2.
    Ramsey { t: f64 },
    /// Continuous drive of Rabi rate `omega1` for `t`, starting in |0⟩.
    Rabi { t: f64, omega1: f64 },
    /// Ramsey with a refocusing π pulse at `t/2`.
    SpinEcho { t: f64 },
    /// Carr-Purcell train, total time `n·tau`.
    Cp { n: usize, tau: f64 },
    /// Periodic decoupling train, total time `n·tau`.
    Pdd { n: usize, tau: f64 },
    /// Two CP blocks of `n` pulses at spacing `tau` separated by a storage
    /// interval `t1` during which the first result is held in the populations.
    Correlation { n: usize, tau: f64, t1: f64 },
    /// Spin lock at drive `omega1` and detuning `delta_omega` for `t`, in the
    /// frame rotating with the drive.
    SpinLock { omega1: f64, delta_omega: f64, t: f64 },
    /// Population relaxation from |0⟩ over `t`.
    T1 { t: f64 },
}

/// Something that happens at an instant during a cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Pulse(ControlPulse),
    /// Coherence is lost completely (storage interval longer than T2*).
    Dephase(f64),
}

impl Event {
    pub fn time(&self) -> f64 {
        match self {
            Event::Pulse(p) => p.time,
            Event::Dephase(t) => *t,
        }
    }
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| ensure(v > 0.0 && v.is_finite(), || format!("{name} must be positive, got {v}"));
        let nonneg = |name: &str, v: f64| ensure(v >= 0.0 && v.is_finite(), || format!("{name} must be >= 0, got {v}"));
        let even = |n: usize| ensure(n >= 2 && n.is_multiple_of(2), || format!("pulse count must be even and >= 2, got {n}"));
        match *self {
            SequenceSpec::Ramsey { t } | SequenceSpec::T1 { t } => nonneg("t", t),
            SequenceSpec::SpinEcho { t } => pos("t", t),
            SequenceSpec::Rabi { t, omega1 } => {
                nonneg("t", t)?;
                ensure(omega1.is_finite(), || "omega1 must be finite".into())
            }
            SequenceSpec::Cp { n, tau } | SequenceSpec::Pdd { n, tau } => {
                even(n)?;
                pos("tau", tau)
            }
            SequenceSpec::Correlation { n, tau, t1 } => {
                even(n)?;
                pos("tau", tau)?;
                nonneg("t1", t1)
            }
            SequenceSpec::SpinLock { omega1, delta_omega, t } => {
                nonneg("t", t)?;
                ensure(omega1.is_finite() && delta_omega.is_finite(), || "spin-lock frequencies must be finite".into())?;
                ensure(omega1 != 0.0 || delta_omega != 0.0, || "spin lock needs a nonzero effective field".into())
            }
        }
    }

    /// Total duration of one cycle.
    pub fn duration(&self) -> f64 {
        match *self {
            SequenceSpec::Ramsey { t }
            | SequenceSpec::Rabi { t, .. }
            | SequenceSpec::SpinEcho { t }
            | SequenceSpec::SpinLock { t, .. }
            | SequenceSpec::T1 { t } => t,
            SequenceSpec::Cp { n, tau } | SequenceSpec::Pdd { n, tau } => n as f64 * tau,
            SequenceSpec::Correlation { n, tau, t1 } => 2.0 * n as f64 * tau + t1,
        }
    }

    /// Value reported in the sweep column: `t1` for correlation, `tau` for
    /// pulse trains and the duration otherwise.
    pub fn sweep_value(&self) -> f64 {
        match *self {
            SequenceSpec::Cp { tau, .. } | SequenceSpec::Pdd { tau, .. } => tau,
            SequenceSpec::Correlation { t1, .. } => t1,
            _ => self.duration(),
        }
    }

    /// Modulation function of the sensing interval, where one exists.
    pub fn modulation(&self) -> Result<ModulationFunction> {
        match *self {
            SequenceSpec::Ramsey { t } => ModulationFunction::ramsey(t),
            SequenceSpec::SpinEcho { t } => ModulationFunction::echo(t),
            SequenceSpec::Cp { n, tau } => ModulationFunction::multipulse(MultipulseKind::Cp, n, tau),
            SequenceSpec::Pdd { n, tau } => ModulationFunction::multipulse(MultipulseKind::Pdd, n, tau),
            other => Err(crate::Error::Unsupported(format!("{other:?} has no single modulation function"))),
        }
    }

    /// Timed control events of one cycle, starting from |0⟩.
    ///
    /// Rabi and spin-lock cycles are driven continuously and are handled by
    /// the simulator directly; their events are the preparation and readout
    /// rotations only.
    pub fn events(&self) -> Result<Vec<Event>> {
        self.validate()?;
        let pulse = |axis, angle, time| Event::Pulse(ControlPulse::new(axis, angle, time));
        let train = |kind: MultipulseKind, n: usize, tau: f64, start: f64| -> Vec<Event> {
            (1..=n)
                .map(|j| {
                    let tj = match kind {
                        MultipulseKind::Cp => (j as f64 - 0.5) * tau,
                        MultipulseKind::Pdd => j as f64 * tau,
                    };
                    pulse(Axis::X, PI, start + tj)
                })
                .collect()
        };
        let t = self.duration();
        let mut ev = Vec::new();
        match *self {
            SequenceSpec::Ramsey { .. } => {
                ev.push(pulse(Axis::Y, PI / 2.0, 0.0));
                ev.push(pulse(Axis::Y, -PI / 2.0, t));
            }
            SequenceSpec::SpinEcho { .. } => {
                ev.push(pulse(Axis::Y, PI / 2.0, 0.0));
                ev.push(pulse(Axis::X, PI, 0.5 * t));
                ev.push(pulse(Axis::Y, -PI / 2.0, t));
            }
            SequenceSpec::Cp { n, tau } | SequenceSpec::Pdd { n, tau } => {
                let kind = if matches!(self, SequenceSpec::Cp { .. }) { MultipulseKind::Cp } else { MultipulseKind::Pdd };
                ev.push(pulse(Axis::Y, PI / 2.0, 0.0));
                ev.extend(train(kind, n, tau, 0.0));
                ev.push(pulse(Axis::Y, -PI / 2.0, t));
            }
            SequenceSpec::Correlation { n, tau, t1 } => {
                let ta = n as f64 * tau;
                ev.push(pulse(Axis::Y, PI / 2.0, 0.0));
                ev.extend(train(MultipulseKind::Cp, n, tau, 0.0));
                ev.push(pulse(Axis::X, PI / 2.0, ta));
                ev.push(Event::Dephase(ta + t1));
                ev.push(pulse(Axis::X, -PI / 2.0, ta + t1));
                ev.extend(train(MultipulseKind::Cp, n, tau, ta + t1));
                ev.push(pulse(Axis::Y, PI / 2.0, t));
            }
            SequenceSpec::SpinLock { omega1, delta_omega, .. } => {
                let theta = omega1.atan2(delta_omega);
                ev.push(pulse(Axis::Y, -theta, 0.0));
                ev.push(pulse(Axis::Y, theta, t));
            }
            SequenceSpec::Rabi { .. } | SequenceSpec::T1 { .. } => {}
        }
        Ok(ev)
    }
}

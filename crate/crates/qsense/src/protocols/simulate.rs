//! Monte-Carlo execution of sensing cycles.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::sequence::{Event, SequenceSpec};
use crate::error::{ensure, Result};
use crate::io::write_columns;
use crate::numerics::{stream_rng, Rng};
use crate::qubit::{
    apply_pulse, estimate_probability, evolve_window, readout_sample, InternalHamiltonian, QubitState,
    ReadoutModel, SignalHamiltonian,
};
use crate::signal::{NoiseSynthesizer, SpectralDensity};

/// How the tone phase and amplitude vary between cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeModel {
    /// Same phase `alpha` every cycle.
    FixedPhase { alpha: f64 },
    /// Phase uniform on [0, 2π) per cycle.
    RandomPhase,
    /// Phase uniform and peak amplitude Gaussian with standard deviation
    /// equal to the nominal amplitude, per cycle.
    RandomAmplitude,
}

/// What acts on the sensor besides the level splitting.
#[derive(Clone, Debug)]
pub enum Drive {
    None,
    /// A fixed, deterministic signal.
    Signal(SignalHamiltonian),
    /// AC tone on the parallel channel, `v·cos(2π f_ac t + α)`, redrawn per
    /// cycle according to `model`.
    Tone { v: f64, f_ac: f64, model: AmplitudeModel },
    /// Gaussian noise sampled at `dt`, one fresh realization per cycle, on the
    /// parallel and on the transverse (σx) channel.
    Noise { par: SpectralDensity, perp: SpectralDensity, dt: f64 },
}

/// Everything except the sequence that defines a simulated experiment.
#[derive(Clone, Debug)]
pub struct SimulationSetup {
    pub omega0: f64,
    pub gamma: f64,
    pub drive: Drive,
    pub readout: ReadoutModel,
    /// Integration step; chosen from the drive when `None`.
    pub step: Option<f64>,
}

impl SimulationSetup {
    pub fn new(omega0: f64, gamma: f64, drive: Drive) -> Self {
        Self { omega0, gamma, drive, readout: ReadoutModel::ideal(), step: None }
    }

    pub fn with_readout(mut self, readout: ReadoutModel) -> Self {
        self.readout = readout;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    fn is_deterministic(&self) -> bool {
        match &self.drive {
            Drive::None | Drive::Signal(_) => true,
            Drive::Tone { model, .. } => matches!(model, AmplitudeModel::FixedPhase { .. }),
            Drive::Noise { par, perp, .. } => par.is_zero() && perp.is_zero(),
        }
    }

    fn step_for(&self, seq: &SequenceSpec) -> f64 {
        if let Some(s) = self.step {
            return s;
        }
        if let Drive::Noise { dt, .. } = self.drive {
            return dt;
        }
        let mut shortest = seq.duration().max(f64::MIN_POSITIVE);
        if let SequenceSpec::Cp { tau, .. } | SequenceSpec::Pdd { tau, .. } | SequenceSpec::Correlation { tau, .. } = *seq {
            shortest = shortest.min(0.5 * tau);
        }
        let mut step = shortest / 64.0;
        if self.omega0 != 0.0 {
            step = step.min(2.0 * PI / self.omega0.abs() / 200.0);
        }
        if let Drive::Tone { f_ac, .. } = self.drive {
            if f_ac > 0.0 {
                step = step.min(1.0 / (200.0 * f_ac));
            }
        }
        match *seq {
            SequenceSpec::SpinLock { omega1, delta_omega, .. } => {
                step = step.min(2.0 * PI / omega1.hypot(delta_omega) / 200.0);
            }
            SequenceSpec::Rabi { omega1, .. } => {
                step = step.min(PI / omega1.hypot(self.omega0).max(f64::MIN_POSITIVE) / 200.0);
            }
            _ => {}
        }
        step
    }
}

/// Per-point Monte-Carlo estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub sweep: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub sigma_p: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
}

impl ProtocolResult {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let n = vec![self.n_trials as f64; self.sweep.len()];
        write_columns(w, &["sweep_value", "p_hat", "sigma_p", "n_trials"], &[&self.sweep, &self.p_hat, &self.sigma_p, &n])
    }
}

/// Prebuilt per-point state shared by all cycles of that point.
struct PointPlan {
    seq: SequenceSpec,
    events: Vec<Event>,
    step: f64,
    noise: Option<(NoiseSynthesizer, NoiseSynthesizer)>,
}

fn sample_hold(samples: Vec<f64>, dt: f64) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let samples = Arc::new(samples);
    move |t: f64| {
        let i = ((t / dt).floor().max(0.0) as usize).min(samples.len() - 1);
        samples[i]
    }
}

impl PointPlan {
    fn new(seq: SequenceSpec, setup: &SimulationSetup) -> Result<Self> {
        let events = seq.events()?;
        let step = setup.step_for(&seq);
        ensure(step > 0.0 && step.is_finite(), || format!("invalid integration step {step}"))?;
        let noise = match &setup.drive {
            Drive::Noise { par, perp, dt } if !(par.is_zero() && perp.is_zero()) => {
                let len = ((seq.duration() / dt).ceil() as usize + 1).max(2);
                Some((NoiseSynthesizer::new(par, len, *dt)?, NoiseSynthesizer::new(perp, len, *dt)?))
            }
            _ => None,
        };
        Ok(Self { seq, events, step, noise })
    }

    /// Signal Hamiltonian realized for one cycle.
    fn realize(&self, setup: &SimulationSetup, rng: &mut Rng) -> Result<SignalHamiltonian> {
        let mut hv = SignalHamiltonian::new(setup.gamma)?;
        match &setup.drive {
            Drive::None => {}
            Drive::Signal(s) => hv = s.clone(),
            Drive::Tone { v, f_ac, model } => {
                let (amp, alpha) = match *model {
                    AmplitudeModel::FixedPhase { alpha } => (*v, alpha),
                    AmplitudeModel::RandomPhase => (*v, 2.0 * PI * rng.random::<f64>()),
                    AmplitudeModel::RandomAmplitude => {
                        let g: f64 = StandardNormal.sample(rng);
                        (*v * g, 2.0 * PI * rng.random::<f64>())
                    }
                };
                let w = 2.0 * PI * f_ac;
                hv = hv.with_parallel(move |t| amp * (w * t + alpha).cos());
            }
            Drive::Noise { par, perp, dt } => {
                if let Some((sp, sx)) = &self.noise {
                    if !par.is_zero() {
                        hv = hv.with_parallel(sample_hold(sp.samples(rng), *dt));
                    }
                    if !perp.is_zero() {
                        hv = hv.with_perp_x(sample_hold(sx.samples(rng), *dt));
                    }
                }
            }
        }
        // continuous drives enter as a constant transverse field
        let drive = match self.seq {
            SequenceSpec::SpinLock { omega1, .. } => Some(omega1),
            SequenceSpec::Rabi { omega1, .. } => Some(2.0 * omega1),
            _ => None,
        };
        if let Some(w1) = drive {
            let bias = w1 / hv.gamma;
            hv.v_perp_x = Some(match hv.v_perp_x.take() {
                Some(f) => Arc::new(move |t| bias + f(t)),
                None => Arc::new(move |_| bias),
            });
        }
        Ok(hv)
    }

    /// Final state of one cycle.
    fn run_cycle(&self, setup: &SimulationSetup, rng: &mut Rng) -> Result<QubitState> {
        let hv = self.realize(setup, rng)?;
        let h0 = match self.seq {
            SequenceSpec::SpinLock { delta_omega, .. } => InternalHamiltonian::new(delta_omega)?,
            // Rabi is parametrized by H = ω0·Z + ω1·σx
            SequenceSpec::Rabi { .. } => InternalHamiltonian::new(2.0 * setup.omega0)?,
            _ => InternalHamiltonian::new(setup.omega0)?,
        };
        let mut state = QubitState::ground();
        let mut now = 0.0;
        for ev in &self.events {
            let at = ev.time();
            if at > now {
                state = evolve_window(&state, &h0, &hv, now, at - now, self.step)?;
                now = at;
            }
            state = match ev {
                Event::Pulse(p) => apply_pulse(&state, p)?,
                Event::Dephase(_) => state.dephased(),
            };
        }
        let end = self.seq.duration();
        if end > now {
            state = evolve_window(&state, &h0, &hv, now, end - now, self.step)?;
        }
        Ok(state)
    }
}

/// Runs `trials` independent cycles of each sequence and estimates the
/// transition probability per point.
///
/// Cycle `j` of point `i` draws from stream `(i << 32) | j` of `seed`, so
/// results do not depend on thread scheduling. When nothing in the drive is
/// random the evolution is computed once per point and only the readout is
/// sampled per cycle.
pub fn simulate_protocol(points: &[SequenceSpec], setup: &SimulationSetup, trials: usize, seed: u64) -> Result<ProtocolResult> {
    ensure(trials >= 1, || "need at least one trial".into())?;
    ensure(!points.is_empty(), || "no sequence points".into())?;
    setup.readout.validate()?;
    let deterministic = setup.is_deterministic();
    let mut result = ProtocolResult { sweep: Vec::new(), p_hat: Vec::new(), sigma_p: Vec::new(), n_trials: trials, seed };
    for (i, seq) in points.iter().enumerate() {
        let plan = PointPlan::new(*seq, setup)?;
        let fixed = if deterministic { Some(plan.run_cycle(setup, &mut stream_rng(seed, (i as u64) << 32))?) } else { None };
        let readings: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|j| -> Result<f64> {
                let mut rng = stream_rng(seed, ((i as u64) << 32) | j as u64);
                let state = match fixed {
                    Some(s) => s,
                    None => plan.run_cycle(setup, &mut rng)?,
                };
                Ok(readout_sample(&state, &setup.readout, &mut rng))
            })
            .collect::<Result<_>>()?;
        let est = estimate_probability(&readings, &setup.readout)?;
        result.sweep.push(seq.sweep_value());
        result.p_hat.push(est.p);
        result.sigma_p.push(est.sigma);
    }
    Ok(result)
}

/// Final state of a single cycle; exposed for inspection and tests.
pub fn simulate_cycle(seq: &SequenceSpec, setup: &SimulationSetup, rng: &mut Rng) -> Result<QubitState> {
    PointPlan::new(*seq, setup)?.run_cycle(setup, rng)
}

//! The experiment registry: schemas, cross-field checks and drivers.

use std::f64::consts::PI;

use rand_distr::{Binomial, Distribution};
use serde_json::{json, Map, Value};

use super::schema::{violation, ParamSpec, Params};
use crate::ensemble::{css, ghz_probability, ghz_qcrb_dephased, qcrb_scaling, squeezing_parameters, squeezing_scan, ProbeKind};
use crate::error::{ConfigViolation, Error, Result};
use crate::estimation::{
    allan_curve, dynamic_range, integrated_vmin, minimum_detectable_signal, psd_vmin, qft_phase_estimation, scaling_benchmark,
    scaling_exponent, vmin_at, vmin_slope_optimal, write_benchmark_csv, write_qft_csv, AllanSeries, BenchmarkSettings,
    DetectionOrder, DynamicRangeMode, Estimator, SensitivityInputs,
};
use crate::filter::{averaged_weighting, relaxation_rate, MultipulseKind, ReconstructionOptions, RelaxationInputs, RelaxationKind};
use crate::io::write_columns;
use crate::numerics::fit::log_log_slope;
use crate::numerics::optimize::golden_section;
use crate::numerics::{linspace, logspace, stream_rng};
use crate::protocols::{
    aliased_frequency, correlation_response, cp_noise_spectroscopy, estimate_from_record, fit_decay, multipulse_response,
    rabi_probability, ramsey_probability, sampling_record, simulate_protocol, t1_relaxometry, walsh_coefficients,
    walsh_reconstruct, AmplitudeModel, CorrelationPhase, Drive, ProtocolResult, SamplingProbe, SequenceSpec,
    SimulationSetup, SpectroscopyPlan,
};
use crate::qubit::ReadoutModel;
use crate::signal::{SpectralDensity, ToneSpec};

/// Seed and trial budget shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunContext {
    pub seed: u64,
    pub trials: usize,
}

/// In-memory results of one run: named files and summary scalars.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Map<String, Value>,
}

impl Outputs {
    fn csv(&mut self, name: &str, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
        let mut buf = Vec::new();
        write_columns(&mut buf, headers, columns)?;
        self.files.push((name.to_owned(), buf));
        Ok(())
    }

    fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_owned(), value.into());
    }
}

type Check = fn(&Params, &mut Vec<ConfigViolation>);
type Run = fn(&Params, &RunContext) -> Result<Outputs>;

/// A registry entry.
pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    /// Files written besides `summary.json` and `manifest.json`.
    pub outputs: &'static [&'static str],
    pub params: fn() -> Vec<ParamSpec>,
    pub(crate) check: Check,
    pub(crate) run: Run,
}

pub static REGISTRY: [Experiment; 14] = [
    Experiment {
        name: "ramsey",
        description: "Ramsey fringe sweep over free-evolution time, optionally under white parallel noise",
        outputs: &["ramsey.csv"],
        params: ramsey_params,
        check: check_t_range,
        run: run_ramsey,
    },
    Experiment {
        name: "rabi",
        description: "Rabi oscillation sweep over drive duration",
        outputs: &["rabi.csv"],
        params: rabi_params,
        check: check_t_range,
        run: run_rabi,
    },
    Experiment {
        name: "multipulse",
        description: "CP or PDD response to an AC tone versus pulse spacing",
        outputs: &["multipulse.csv"],
        params: multipulse_params,
        check: check_multipulse,
        run: run_multipulse,
    },
    Experiment {
        name: "correlation",
        description: "Correlation spectroscopy of an AC tone versus storage time",
        outputs: &["correlation.csv"],
        params: correlation_params,
        check: check_correlation,
        run: run_correlation,
    },
    Experiment {
        name: "walsh",
        description: "Walsh decomposition and reconstruction of a tone over one window",
        outputs: &["walsh.csv", "walsh_reconstruction.csv"],
        params: walsh_params,
        check: check_walsh,
        run: run_walsh,
    },
    Experiment {
        name: "continuous_sampling",
        description: "Frequency estimate from a shot-noise-limited continuously sampled record",
        outputs: &["continuous_sampling.csv"],
        params: sampling_params,
        check: check_sampling,
        run: run_sampling,
    },
    Experiment {
        name: "noise_spectroscopy",
        description: "Lorentzian spectrum recovered from simulated CP decay curves",
        outputs: &["noise_spectroscopy.csv", "decay_curves.csv"],
        params: spectroscopy_params,
        check: check_spectroscopy,
        run: run_spectroscopy,
    },
    Experiment {
        name: "relaxometry",
        description: "Simulated T1 decay under transverse noise with golden-rule predictions",
        outputs: &["relaxometry.csv"],
        params: relaxometry_params,
        check: check_none,
        run: run_relaxometry,
    },
    Experiment {
        name: "sensitivity",
        description: "Minimum detectable signal versus sensing time and its optimum",
        outputs: &["sensitivity.csv"],
        params: sensitivity_params,
        check: check_none,
        run: run_sensitivity,
    },
    Experiment {
        name: "allan",
        description: "Allan variance of a synthetic sensor record",
        outputs: &["allan.csv"],
        params: allan_params,
        check: check_none,
        run: run_allan,
    },
    Experiment {
        name: "phase_estimation",
        description: "Scaling benchmark of adaptive, Bayesian and fixed-time phase estimation",
        outputs: &["phase_estimation.csv", "phase_estimation_qft.csv"],
        params: phase_params,
        check: check_phase,
        run: run_phase,
    },
    Experiment {
        name: "dynamic_range",
        description: "Dynamic range of fixed-time and doubling-schedule protocols versus total time",
        outputs: &["dynamic_range.csv"],
        params: range_params,
        check: check_range,
        run: run_range,
    },
    Experiment {
        name: "ghz",
        description: "GHZ fringe frequency and Cramér-Rao bounds versus probe number",
        outputs: &["ghz.csv", "ghz_fringes.csv"],
        params: ghz_params,
        check: check_none,
        run: run_ghz,
    },
    Experiment {
        name: "squeezing",
        description: "One-axis-twisting squeezing parameter scan",
        outputs: &["squeezing.csv"],
        params: squeezing_params,
        check: check_squeezing,
        run: run_squeezing,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

fn check_none(_: &Params, _: &mut Vec<ConfigViolation>) {}

fn check_order(p: &Params, lo: &str, hi: &str, out: &mut Vec<ConfigViolation>) {
    if let (Ok(a), Ok(b)) = (p.f64(lo), p.f64(hi)) {
        if a >= b {
            out.push(violation(&format!("parameters.{hi}"), format!("must exceed {lo} ({a}), got {b}")));
        }
    }
}

fn check_even(p: &Params, name: &str, out: &mut Vec<ConfigViolation>) {
    if let Ok(n) = p.usize(name) {
        if n % 2 != 0 {
            out.push(violation(&format!("parameters.{name}"), format!("pulse count must be even, got {n}")));
        }
    }
}

fn gamma() -> ParamSpec {
    ParamSpec::number("gamma", "coupling of the signal to the qubit (rad/s per unit signal)").default(1.0).positive()
}

fn t_sweep() -> [ParamSpec; 3] {
    [
        ParamSpec::number("t_min", "first sweep time (s)").default(0.0).at_least(0.0),
        ParamSpec::number("t_max", "last sweep time (s)").default(1.0).positive(),
        ParamSpec::integer("points", "number of sweep points").default(20).at_least(2.0).at_most(100_000.0),
    ]
}

fn check_t_range(p: &Params, out: &mut Vec<ConfigViolation>) {
    check_order(p, "t_min", "t_max", out);
}

/// Largest |p̂ − p|/σ with σ floored at one count.
fn max_abs_z(r: &ProtocolResult, analytic: &[f64]) -> f64 {
    let floor = 1.0 / r.n_trials as f64;
    (0..analytic.len()).map(|i| (r.p_hat[i] - analytic[i]).abs() / r.sigma_p[i].max(floor)).fold(0.0, f64::max)
}

fn sweep_outputs(out: &mut Outputs, name: &str, x_name: &str, r: &ProtocolResult, analytic: &[f64]) -> Result<()> {
    out.csv(name, &[x_name, "p_hat", "sigma_p", "p_analytic"], &[&r.sweep, &r.p_hat, &r.sigma_p, analytic])?;
    out.put("points", r.sweep.len());
    out.put("trials", r.n_trials);
    out.put("max_abs_z", max_abs_z(r, analytic));
    Ok(())
}

fn ramsey_params() -> Vec<ParamSpec> {
    let mut v = vec![ParamSpec::number("omega0", "detuning of the qubit from the reference (rad/s)"), gamma()];
    v.extend(t_sweep());
    v.extend([
        ParamSpec::number("noise_s0", "two-sided white parallel noise level").default(0.0).at_least(0.0),
        ParamSpec::number("noise_dt", "noise sampling interval (s)").default(1e-3).positive(),
        ParamSpec::choice("readout", &["ideal", "optical"], "readout model").default("ideal"),
        ParamSpec::number("photon_counts", "mean bright-state counts per shot (optical)").default(0.03).positive(),
        ParamSpec::number("optical_contrast", "fractional count difference (optical)").default(0.3).positive().at_most(1.0),
    ]);
    v
}

fn run_ramsey(p: &Params, ctx: &RunContext) -> Result<Outputs> {
    let (w0, g, s0) = (p.f64("omega0")?, p.f64("gamma")?, p.f64("noise_s0")?);
    let times = linspace(p.f64("t_min")?, p.f64("t_max")?, p.usize("points")?);
    let drive = if s0 > 0.0 {
        Drive::Noise { par: SpectralDensity::White { s0 }, perp: SpectralDensity::zero(), dt: p.f64("noise_dt")? }
    } else {
        Drive::None
    };
    let mut setup = SimulationSetup::new(w0, g, drive);
    if p.str("readout")? == "optical" {
        setup = setup.with_readout(ReadoutModel::optical(p.f64("photon_counts")?, p.f64("optical_contrast")?)?);
    }
    let seqs: Vec<SequenceSpec> = times.iter().map(|&t| SequenceSpec::Ramsey { t }).collect();
    let r = simulate_protocol(&seqs, &setup, ctx.trials, ctx.seed)?;
    let rate = 0.5 * g * g * s0;
    let model = |gm: f64, t: f64| 0.5 * (1.0 - (-gm * t).exp() * (1.0 - 2.0 * ramsey_probability(w0, t)));
    let analytic: Vec<f64> = times.iter().map(|&t| model(rate, t)).collect();
    let mut out = Outputs::default();
    sweep_outputs(&mut out, "ramsey.csv", "t_s", &r, &analytic)?;
    out.put("predicted_decay_rate", rate);
    if s0 > 0.0 {
        let floor = 1.0 / ctx.trials as f64;
        let cost = |gm: f64| -> f64 {
            (0..times.len()).map(|i| ((r.p_hat[i] - model(gm, times[i])) / r.sigma_p[i].max(floor)).powi(2)).sum()
        };
        let t_max = times.last().copied().unwrap_or(1.0);
        out.put("fitted_decay_rate", golden_section(cost, 0.0, 50.0 / t_max, 1e-10 / t_max));
        if w0 == 0.0 {
            let (mut t, mut chi, mut sc) = (Vec::new(), Vec::new(), Vec::new());
            for i in 0..times.len() {
                if let Some((c, s)) = crate::protocols::chi_from_probability(r.p_hat[i], r.sigma_p[i]) {
                    t.push(times[i]);
                    chi.push(c);
                    sc.push(s);
                }
            }
            if let Ok(f) = fit_decay(&t, &chi, &sc) {
                out.put("fitted_chi_rate", f.rate);
                out.put("fitted_exponent", f.exponent);
            }
        }
    }
    Ok(out)
}

fn rabi_params() -> Vec<ParamSpec> {
    let mut v = vec![
        ParamSpec::number("omega0", "detuning term of H = omega0·Z + omega1·σx (rad/s)").default(0.0),
        ParamSpec::number("omega1", "drive term of H = omega0·Z + omega1·σx (rad/s)").positive(),
    ];
    v.extend(t_sweep());
    v
}

fn run_rabi(p: &Params, ctx: &RunContext) -> Result<Outputs> {
    let (w0, w1) = (p.f64("omega0")?, p.f64("omega1")?);
    let times = linspace(p.f64("t_min")?, p.f64("t_max")?, p.usize("points")?);
    let seqs: Vec<SequenceSpec> = times.iter().map(|&t| SequenceSpec::Rabi { t, omega1: w1 }).collect();
    let r = simulate_protocol(&seqs, &SimulationSetup::new(w0, 1.0, Drive::None), ctx.trials, ctx.seed)?;
    let analytic: Vec<f64> = times.iter().map(|&t| rabi_probability(w0, w1, t)).collect();
    let mut out = Outputs::default();
    sweep_outputs(&mut out, "rabi.csv", "t_s", &r, &analytic)?;
    Ok(out)
}

const AMPLITUDE_MODELS: &[&str] = &["fixed_phase", "random_phase", "random_amplitude"];

fn multipulse_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::choice("sequence", &["cp", "pdd"], "pulse train").default("cp"),
        ParamSpec::integer("n", "number of π pulses (even)").default(8).at_least(2.0).at_most(10_000.0),
        ParamSpec::numbers("tau", "pulse spacings to sweep (s)").positive(),
        ParamSpec::number("f_ac", "tone frequency (Hz)").positive(),
        ParamSpec::number("v", "tone amplitude: peak for fixed_phase, rms otherwise").at_least(0.0),
        ParamSpec::choice("amplitude_model", AMPLITUDE_MODELS, "how the tone varies between cycles").default("fixed_phase"),
        ParamSpec::number("alpha", "tone phase for fixed_phase (rad)").default(0.0),
        gamma(),
    ]
}

fn check_multipulse(p: &Params, out: &mut Vec<ConfigViolation>) {
    check_even(p, "n", out);
}

fn amplitude_model(p: &Params) -> Result<AmplitudeModel> {
    Ok(match p.str("amplitude_model")? {
        "random_phase" => AmplitudeModel::RandomPhase,
        "random_amplitude" => AmplitudeModel::RandomAmplitude,
        _ => AmplitudeModel::FixedPhase { alpha: p.f64("alpha")? },
    })
}

fn run_multipulse(p: &Params, ctx: &RunContext) -> Result<Outputs> {
    let (n, f, v, g) = (p.usize("n")?, p.f64("f_ac")?, p.f64("v")?, p.f64("gamma")?);
    let model = amplitude_model(p)?;
    let taus = p.f64s("tau")?;
    let pdd = p.str("sequence")? == "pdd";
    let seqs: Vec<SequenceSpec> = taus
        .iter()
        .map(|&tau| if pdd { SequenceSpec::Pdd { n, tau } } else { SequenceSpec::Cp { n, tau } })
        .collect();
    // random phase: the rms amplitude v corresponds to a peak of √2·v
    let v_peak = if model == AmplitudeModel::RandomPhase { 2f64.sqrt() * v } else { v };
    let setup = SimulationSetup::new(0.0, g, Drive::Tone { v: v_peak, f_ac: f, model });
    let r = simulate_protocol(&seqs, &setup, ctx.trials, ctx.seed)?;
    let analytic = seqs.iter().map(|s| multipulse_response(s, f, model, g, v)).collect::<Result<Vec<f64>>>()?;
    let mut out = Outputs::default();
    sweep_outputs(&mut out, "multipulse.csv", "tau_s", &r, &analytic)?;
    Ok(out)
}

fn correlation_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::integer("n", "π pulses per CP block (even)").default(4).at_least(2.0).at_most(10_000.0),
        ParamSpec::number("tau", "pulse spacing within each block (s)").positive(),
        ParamSpec::number("f_ac", "tone frequency (Hz)").positive(),
        ParamSpec::number("v", "tone peak amplitude").at_least(0.0),
        ParamSpec::choice("phase", &["fixed", "random"], "tone phase between cycles").default("random"),
        ParamSpec::number("alpha", "tone phase for the fixed model (rad)").default(0.0),
        ParamSpec::number("t1_min", "first storage time (s)").default(0.0).at_least(0.0),
        ParamSpec::number("t1_max", "last storage time (s)").positive(),
        ParamSpec::integer("points", "number of storage times").default(64).at_least(16.0).at_most(100_000.0),
        gamma(),
    ]
}

fn check_correlation(p: &Params, out: &mut Vec<ConfigViolation>) {
    check_even(p, "n", out);
    check_order(p, "t1_min", "t1_max", out);
}

fn run_correlation(p: &Params, ctx: &RunContext) -> Result<Outputs> {
    let (n, tau, f, v, g) = (p.usize("n")?, p.f64("tau")?, p.f64("f_ac")?, p.f64("v")?, p.f64("gamma")?);
    let t1s = linspace(p.f64("t1_min")?, p.f64("t1_max")?, p.usize("points")?);
    let (model, law) = if p.str("phase")? == "fixed" {
        let alpha = p.f64("alpha")?;
        (AmplitudeModel::FixedPhase { alpha }, CorrelationPhase::Fixed { alpha })
    } else {
        (AmplitudeModel::RandomPhase, CorrelationPhase::Random)
    };
    // peak block phase: amplitude of the weighting function over the tone phase
    let phi = (2.0 * averaged_weighting(MultipulseKind::Cp, f, n, tau)?).sqrt() * g * v * n as f64 * tau;
    let seqs: Vec<SequenceSpec> = t1s.iter().map(|&t1| SequenceSpec::Correlation { n, tau, t1 }).collect();
    let r = simulate_protocol(&seqs, &SimulationSetup::new(0.0, g, Drive::Tone { v, f_ac: f, model }), ctx.trials, ctx.seed)?;
    let analytic: Vec<f64> = t1s.iter().map(|&t1| correlation_response(phi, f, t1, law)).collect();
    let mut out = Outputs::default();
    sweep_outputs(&mut out, "correlation.csv", "t1_s", &r, &analytic)?;
    let dt1 = t1s[1] - t1s[0];
    out.put("block_phase", phi);
    out.put("f_expected", aliased_frequency(f, dt1));
    match estimate_from_record(&r.p_hat, dt1) {
        Ok(e) => {
            out.put("f_hat", e.f_hat);
            out.put("f_resolution", e.resolution);
        }
        Err(e) => out.put("f_hat_error", e.to_string()),
    }
    Ok(out)
}

fn walsh_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::number("f_ac", "tone frequency (Hz)").positive(),
        ParamSpec::number("v", "tone peak amplitude").default(1.0),
        ParamSpec::number("alpha", "tone phase (rad)").default(0.0),
        ParamSpec::number("t", "analysis window (s)").positive(),
        ParamSpec::integer("count", "number of Walsh coefficients (power of two)").default(16).at_least(1.0).at_most(4096.0),
        ParamSpec::integer("points", "reconstruction grid size").default(256).at_least(2.0).at_most(1_000_000.0),
    ]
}

fn check_walsh(p: &Params, out: &mut Vec<ConfigViolation>) {
    if let Ok(c) = p.usize("count") {
        if !c.is_power_of_two() {
            out.push(violation("parameters.count", format!("must be a power of two, got {c}")));
        }
    }
}

fn run_walsh(p: &Params, _: &RunContext) -> Result<Outputs> {
    let tone = ToneSpec::new(p.f64("v")?, p.f64("f_ac")?, p.f64("alpha")?);
    let t = p.f64("t")?;
    let coeffs = walsh_coefficients(|x| tone.at(x), p.usize("count")?, t)?;
    let series = walsh_reconstruct(&coeffs, t);
    let n = p.usize("points")?;
    // cell centres avoid the discontinuities of the Walsh functions
    let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * t / n as f64).collect();
    let signal: Vec<f64> = grid.iter().map(|&x| tone.at(x)).collect();
    let recon: Vec<f64> = grid.iter().map(|&x| series.eval(x)).collect();
    let rms = (signal.iter().zip(&recon).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64).sqrt();
    let index: Vec<f64> = (0..coeffs.len()).map(|k| k as f64).collect();
    let dominant = (0..coeffs.len()).fold(0, |b, k| if coeffs[k].abs() > coeffs[b].abs() { k } else { b });
    let mut out = Outputs::default();
    out.csv("walsh.csv", &["index", "coefficient"], &[&index, &coeffs])?;
    out.csv("walsh_reconstruction.csv", &["t_s", "signal", "reconstruction"], &[&grid, &signal, &recon])?;
    out.put("rms_error", rms);
    out.put("dominant_index", dominant);
    out.put("dominant_coefficient", coeffs[dominant]);
    Ok(out)
}

fn sampling_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::number("f_signal", "signal frequency (Hz)").at_least(0.0),
        ParamSpec::number("v", "signal peak amplitude"),
        ParamSpec::number("alpha", "signal phase (rad)").default(0.0),
        gamma(),
        ParamSpec::number("t_sense", "sensing time of each sample (s)").positive(),
        ParamSpec::number("t_s", "sampling interval (s)").positive(),
        ParamSpec::number("duration", "record length (s)").positive(),
        ParamSpec::integer("shots", "binomial shots averaged per sample").default(100).at_least(1.0),
    ]
}

fn check_sampling(p: &Params, out: &mut Vec<ConfigViolation>) {
    if let (Ok(ts), Ok(d)) = (p.f64("t_s"), p.f64("duration")) {
        if d < 16.0 * ts {
            out.push(violation("parameters.duration", format!("must cover at least 16 samples of {ts} s, got {d}")));
        } else if d / ts > 1e8 {
            out.push(violation("parameters.duration", "record longer than 1e8 samples".into()));
        }
    }
}

fn run_sampling(p: &Params, ctx: &RunContext) -> Result<Outputs> {
    let tone = ToneSpec::new(p.f64("v")?, p.f64("f_signal")?, p.f64("alpha")?);
    let probe = SamplingProbe { gamma: p.f64("gamma")?, t_sense: p.f64("t_sense")? };
    let t_s = p.f64("t_s")?;
    let shots = p.usize("shots")? as u64;
    let ideal = sampling_record(|t| tone.at(t), probe, t_s, p.f64("duration")?)?;
    let measured = ideal
        .iter()
        .enumerate()
        .map(|(j, &q)| {
            let dist = Binomial::new(shots, q.clamp(0.0, 1.0)).map_err(|e| Error::Argument(e.to_string()))?;
            Ok(dist.sample(&mut stream_rng(ctx.seed, j as u64)) as f64 / shots as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let times: Vec<f64> = (0..ideal.len()).map(|j| j as f64 * t_s).collect();
    let mut out = Outputs::default();
    out.csv("continuous_sampling.csv", &["t_s", "p_hat", "p_ideal"], &[&times, &measured, &ideal])?;
    let expected = aliased_frequency(tone.f_ac, t_s);
    out.put("samples", ideal.len());
    out.put("f_expected", expected);
    let e = estimate_from_record(&measured, t_s)?;
    out.put("f_hat", e.f_hat);
    out.put("f_resolution", e.resolution);
    out.put("abs_error", (e.f_hat - expected).abs());
    Ok(out)
}

fn spectroscopy_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::number("s0", "Lorentzian peak level").positive(),
        ParamSpec::number("half_width", "Lorentzian half width (rad/s)").positive(),
        ParamSpec::number("omega_c", "Lorentzian centre (rad/s)").default(0.0).at_least(0.0),
        gamma(),
        ParamSpec::number("omega_min", "lowest probed frequency π/τ (rad/s)").positive(),
        ParamSpec::number("omega_max", "highest probed frequency π/τ (rad/s)").positive(),
        ParamSpec::integer("points", "number of pulse spacings").default(12).at_least(1.0).at_most(1000.0),
        ParamSpec::integer("n_min", "first pulse count of each decay curve (even)").default(2).at_least(2.0),
        ParamSpec::integer("n_max", "largest pulse count").default(512).at_least(2.0).at_most(100_000.0),
        ParamSpec::integer("samples_per_tau", "noise samples per pulse spacing").default(32).at_least(4.0).at_most(4096.0),
        ParamSpec::number("chi_min", "smallest decay kept").default(0.1).positive(),
        ParamSpec::number("chi_max", "largest decay kept").default(1.5).positive(),
        ParamSpec::integer("k_max", "highest odd harmonic in the model").default(5).at_least(1.0).at_most(101.0),
    ]
}

fn check_spectroscopy(p: &Params, out: &mut Vec<ConfigViolation>) {
    check_order(p, "omega_min", "omega_max", out);
    check_order(p, "chi_min", "chi_max", out);
    check_even(p, "n_min", out);
    if let (Ok(a), Ok(b)) = (p.usize("n_min"), p.usize("n_max")) {
        if b < a {
            out.push(violation("parameters.n_max", format!("must be >= n_min ({a}), got {b}")));
        }
    }
    if let Ok(k) = p.usize("k_max") {
        if k % 2 == 0 {
            out.push(violation("parameters.k_max", format!("must be odd, got {k}")));
        }
    }
}

fn run_spectroscopy(p: &Params, ctx: &RunContext) -> Result<Outputs> {
    let psd = SpectralDensity::Lorentzian { s0: p.f64("s0")?, omega_c: p.f64("omega_c")?, half_width: p.f64("half_width")? };
    let omegas = logspace(p.f64("omega_min")?, p.f64("omega_max")?, p.usize("points")?);
    let plan = SpectroscopyPlan {
        gamma: p.f64("gamma")?,
        taus: omegas.iter().map(|w| PI / w).collect(),
        n_min: p.usize("n_min")?,
        n_max: p.usize("n_max")?,
        samples_per_tau: p.usize("samples_per_tau")?,
        trials: ctx.trials,
        chi_min: p.f64("chi_min")?,
        chi_max: p.f64("chi_max")?,
        options: ReconstructionOptions { k_max: p.usize("k_max")?, ..ReconstructionOptions::default() },
    };
    let r = cp_noise_spectroscopy(&psd, &plan, ctx.seed)?;
    let s = &r.spectrum;
    let truth: Vec<f64> = s.omega.iter().map(|&w| psd.evaluate(w)).collect();
    let rel: Vec<f64> = s.value.iter().zip(&truth).map(|(a, b)| a / b - 1.0).collect();
    let mut out = Outputs::default();
    out.csv("noise_spectroscopy.csv", &["omega_rad_s", "s_recovered", "s_true", "relative_error"], &[&s.omega, &s.value, &truth, &rel])?;
    let col = |f: fn(&crate::protocols::DecayPoint) -> f64| r.points.iter().map(f).collect::<Vec<f64>>();
    out.csv(
        "decay_curves.csv",
        &["tau_s", "n", "p_hat", "sigma_p", "chi", "used"],
        &[
            &col(|d| d.tau),
            &col(|d| d.n as f64),
            &col(|d| d.p_hat),
            &col(|d| d.sigma_p),
            &col(|d| d.chi),
            &col(|d| f64::from(u8::from(d.used))),
        ],
    )?;
    out.put("omega", s.omega.clone());
    out.put("s_recovered", s.value.clone());
    out.put("s_true", truth);
    out.put("relative_error", rel.clone());
    out.put("mean_abs_relative_error", rel.iter().map(|e| e.abs()).sum::<f64>() / rel.len() as f64);
    out.put("max_abs_relative_error", rel.iter().fold(0.0f64, |m, e| m.max(e.abs())));
    out.put("tail_exponent", s.tail_exponent);
    out.put("decay_points_used", r.points.iter().filter(|d| d.used).count());
    out.put("warning", s.warning.clone());
    Ok(out)
}

fn relaxometry_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::number("omega0", "qubit splitting (rad/s)").positive(),
        gamma(),
        ParamSpec::choice("noise", &["white", "lorentzian"], "transverse noise spectrum").default("white"),
        ParamSpec::number("s0", "transverse noise level").positive(),
        ParamSpec::number("half_width", "Lorentzian half width (rad/s)").default(1.0).positive(),
        ParamSpec::number("omega_c", "Lorentzian centre (rad/s)").default(0.0).at_least(0.0),
        ParamSpec::numbers("t", "relaxation times (s)").positive(),
        ParamSpec::integer("steps_per_period", "noise samples per qubit period").default(40).at_least(8.0).at_most(10_000.0),
        ParamSpec::number("s0_par", "white parallel noise level for the dephasing predictions").default(0.0).at_least(0.0),
        ParamSpec::number("omega1", "spin-lock drive for the predictions (rad/s)").default(0.0).at_least(0.0),
        ParamSpec::number("delta_omega", "spin-lock detuning for the predictions (rad/s)").default(0.0),
    ]
}

fn run_relaxometry(p: &Params, ctx: &RunContext) -> Result<Outputs> {
    let (w0, g) = (p.f64("omega0")?, p.f64("gamma")?);
    let perp = if p.str("noise")? == "lorentzian" {
        SpectralDensity::Lorentzian { s0: p.f64("s0")?, omega_c: p.f64("omega_c")?, half_width: p.f64("half_width")? }
    } else {
        SpectralDensity::White { s0: p.f64("s0")? }
    };
    let times = p.f64s("t")?;
    let dt = 2.0 * PI / w0 / p.usize("steps_per_period")? as f64;
    let r = t1_relaxometry(&perp, w0, g, &times, dt, ctx.trials, ctx.seed)?;
    let inputs = RelaxationInputs {
        psd_par: SpectralDensity::White { s0: p.f64("s0_par")? },
        psd_perp: perp,
        gamma: g,
        omega0: w0,
        omega1: p.f64("omega1")?,
        delta_omega: p.f64("delta_omega")?,
    };
    let rate = relaxation_rate(RelaxationKind::T1, &inputs);
    let analytic: Vec<f64> = times.iter().map(|&t| 0.5 * (1.0 - (-rate * t).exp())).collect();
    let mut out = Outputs::default();
    out.csv("relaxometry.csv", &["t_s", "p_hat", "sigma_p", "p_analytic"], &[&r.times, &r.p_hat, &r.sigma_p, &analytic])?;
    out.put("fitted_rate", r.rate);
    out.put("fitted_rate_sigma", r.rate_sigma);
    out.put("predicted_rate_t1", rate);
    out.put("relative_error", r.rate / rate - 1.0);
    out.put("predicted_rate_t2_star", relaxation_rate(RelaxationKind::T2Star, &inputs));
    out.put("predicted_rate_spin_lock_resonant", relaxation_rate(RelaxationKind::SpinLockResonant, &inputs));
    out.put("predicted_rate_spin_lock_detuned", relaxation_rate(RelaxationKind::SpinLockDetuned, &inputs));
    Ok(out)
}

fn sensitivity_params() -> Vec<ParamSpec> {
    vec![
        gamma(),
        ParamSpec::number("contrast", "readout efficiency C").default(1.0).positive().at_most(1.0),
        ParamSpec::number("t_chi", "decay time T_χ, equal to T2* for exponential decay (s)").positive(),
        ParamSpec::number("t_m", "per-cycle overhead (s)").default(0.0).at_least(0.0),
        ParamSpec::number("decay_exponent", "exponent a of χ = (t/T_χ)^a").default(1.0).positive(),
        ParamSpec::choice("order", &["slope", "variance"], "detection order").default("slope"),
        ParamSpec::number("total_time", "averaging time for the integrated sensitivity (s)").default(1.0).positive(),
        ParamSpec::integer("points", "curve points from 1e-3·T_χ to 10·T_χ").default(100).at_least(2.0).at_most(1_000_000.0),
    ]
}

fn run_sensitivity(p: &Params, _: &RunContext) -> Result<Outputs> {
    let order = if p.str("order")? == "variance" { DetectionOrder::Variance } else { DetectionOrder::Slope };
    let inputs = SensitivityInputs {
        gamma: p.f64("gamma")?,
        contrast: p.f64("contrast")?,
        t_chi: p.f64("t_chi")?,
        t_m: p.f64("t_m")?,
        decay_exponent: p.f64("decay_exponent")?,
        order,
    };
    inputs.validate()?;
    let times = logspace(1e-3 * inputs.t_chi, 10.0 * inputs.t_chi, p.usize("points")?);
    let curve: Vec<f64> = times.iter().map(|&t| vmin_at(&inputs, t)).collect();
    let best = minimum_detectable_signal(&inputs)?;
    let mut out = Outputs::default();
    out.csv("sensitivity.csv", &["t_s", "v_min"], &[&times, &curve])?;
    out.put("t_opt", best.t_opt);
    out.put("v_min", best.v_min);
    out.put("v_min_integrated", integrated_vmin(best.v_min, order, p.f64("total_time")?));
    out.put("psd_v_min", psd_vmin(inputs.gamma, inputs.contrast, inputs.t_chi));
    if order == DetectionOrder::Slope && inputs.decay_exponent == 1.0 && inputs.t_m == 0.0 {
        out.put("t_opt_closed_form", 0.5 * inputs.t_chi);
        out.put("v_min_closed_form", vmin_slope_optimal(inputs.gamma, inputs.contrast, inputs.t_chi));
    }
    Ok(out)
}

fn allan_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::number("t_s", "sampling interval (s)").positive(),
        ParamSpec::integer("samples", "record length").default(4096).at_least(3.0).at_most(10_000_000.0),
        ParamSpec::choice(
            "source",
            &["white_rate", "white_sample", "ramp", "alternating"],
            "white_rate integrates white rates into readings; white_sample uses white readings directly",
        )
        .default("white_rate"),
        ParamSpec::number("sigma", "standard deviation of the white source").default(1.0).positive(),
    ]
}

fn run_allan(p: &Params, ctx: &RunContext) -> Result<Outputs> {
    let (t_s, n, sigma) = (p.f64("t_s")?, p.usize("samples")?, p.f64("sigma")?);
    let mut rng = stream_rng(ctx.seed, 0);
    let mut white = || -> Vec<f64> {
        (0..n).map(|_| sigma * rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut rng)).collect()
    };
    let series = match p.str("source")? {
        "white_rate" => AllanSeries::from_rates(&white()[..n - 1], t_s)?,
        "white_sample" => AllanSeries::new(white(), t_s)?,
        "ramp" => AllanSeries::new((0..n).map(|j| j as f64).collect(), t_s)?,
        _ => AllanSeries::new((0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect(), t_s)?,
    };
    let (taus, vars) = allan_curve(&series)?;
    let mut out = Outputs::default();
    out.csv("allan.csv", &["tau_s", "allan_variance"], &[&taus, &vars])?;
    out.put("groupings", taus.len());
    out.put("t_s", t_s);
    let (t, v): (Vec<f64>, Vec<f64>) = taus.iter().zip(&vars).filter(|(_, v)| **v > 0.0).map(|(a, b)| (*a, *b)).unzip();
    out.put("log_log_slope", if t.len() >= 2 { json!(log_log_slope(&t, &v)?) } else { Value::Null });
    Ok(out)
}

fn phase_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::number("contrast", "fringe contrast C").default(1.0).positive().at_most(1.0),
        ParamSpec::integer("g", "shots at the longest time, G").default(5).at_least(1.0).at_most(1000.0),
        ParamSpec::integer("f", "extra shots per halving of the time, F").default(2).at_least(0.0).at_most(1000.0),
        ParamSpec::integer("level_min", "smallest number of bits").default(2).at_least(1.0).at_most(20.0),
        ParamSpec::integer("level_max", "largest number of bits").default(8).at_least(1.0).at_most(20.0),
        ParamSpec::boolean("include_baseline", "also run the fixed-time protocol").default(true),
        ParamSpec::integer("qft_bits", "register size of the QFT readout").default(5).at_least(1.0).at_most(14.0),
        ParamSpec::number("qft_phi", "phase of the QFT example, in turns").default(0.3125).at_least(0.0).below(1.0),
    ]
}

fn check_phase(p: &Params, out: &mut Vec<ConfigViolation>) {
    if let (Ok(a), Ok(b)) = (p.usize("level_min"), p.usize("level_max")) {
        if b < a + 1 {
            out.push(violation("parameters.level_max", format!("must exceed level_min ({a}), got {b}")));
        }
    }
}

fn run_phase(p: &Params, ctx: &RunContext) -> Result<Outputs> {
    let s = BenchmarkSettings {
        contrast: p.f64("contrast")?,
        g: p.usize("g")? as u32,
        f: p.usize("f")? as u32,
        trials: ctx.trials,
        seed: ctx.seed,
    };
    let levels: Vec<u32> = (p.usize("level_min")? as u32..=p.usize("level_max")? as u32).collect();
    let mut estimators = vec![Estimator::Adaptive, Estimator::Bayesian];
    if p.bool("include_baseline")? {
        estimators.push(Estimator::Baseline);
    }
    let mut out = Outputs::default();
    let mut all = Vec::new();
    for e in estimators {
        let pts = scaling_benchmark(e, &levels, &s)?;
        out.put(&format!("exponent_{}", e.name()), scaling_exponent(&pts)?);
        all.extend(pts);
    }
    let mut buf = Vec::new();
    write_benchmark_csv(&all, &mut buf)?;
    out.files.push(("phase_estimation.csv".into(), buf));
    let (phi, bits) = (p.f64("qft_phi")?, p.usize("qft_bits")? as u32);
    let mut buf = Vec::new();
    write_qft_csv(phi, bits, &mut buf)?;
    out.files.push(("phase_estimation_qft.csv".into(), buf));
    let q = qft_phase_estimation(phi, bits)?;
    out.put("qft_bits", q.bits);
    out.put("qft_estimate", q.estimate);
    out.put("t_total_decades", {
        let t: Vec<f64> = all.iter().filter(|x| x.estimator == Estimator::Adaptive).map(|x| x.t_total).collect();
        (t[t.len() - 1] / t[0]).log10()
    });
    Ok(out)
}

fn range_params() -> Vec<ParamSpec> {
    vec![
        gamma(),
        ParamSpec::number("t0", "shortest sensing time (s)").positive(),
        ParamSpec::number("t2star", "dephasing time, the fixed-time sensing time (s)").positive(),
        ParamSpec::number("contrast", "readout efficiency C").default(1.0).positive().at_most(1.0),
        ParamSpec::number("total_min", "smallest total time (s)").positive(),
        ParamSpec::number("total_max", "largest total time (s)").positive(),
        ParamSpec::integer("points", "number of total times").default(20).at_least(2.0).at_most(1_000_000.0),
    ]
}

fn check_range(p: &Params, out: &mut Vec<ConfigViolation>) {
    check_order(p, "total_min", "total_max", out);
}

fn run_range(p: &Params, _: &RunContext) -> Result<Outputs> {
    let (g, t0, t2, c) = (p.f64("gamma")?, p.f64("t0")?, p.f64("t2star")?, p.f64("contrast")?);
    let totals = logspace(p.f64("total_min")?, p.f64("total_max")?, p.usize("points")?);
    let fixed = totals.iter().map(|&t| dynamic_range(g, t0, t, c, t2, DynamicRangeMode::FixedTime)).collect::<Result<Vec<_>>>()?;
    let expo =
        totals.iter().map(|&t| dynamic_range(g, t0, t, c, t2, DynamicRangeMode::ExponentialSchedule)).collect::<Result<Vec<_>>>()?;
    let col = |v: &[crate::estimation::DynamicRange], f: fn(&crate::estimation::DynamicRange) -> f64| v.iter().map(f).collect::<Vec<f64>>();
    let (df, de) = (col(&fixed, |d| d.dr), col(&expo, |d| d.dr));
    let mut out = Outputs::default();
    out.csv(
        "dynamic_range.csv",
        &["total_time_s", "dr_fixed_time", "dr_exponential", "v_min_fixed_time", "v_min_exponential"],
        &[&totals, &df, &de, &col(&fixed, |d| d.v_min), &col(&expo, |d| d.v_min)],
    )?;
    out.put("slope_fixed_time", log_log_slope(&totals, &df)?);
    out.put("slope_exponential", log_log_slope(&totals, &de)?);
    Ok(out)
}

fn ghz_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::number("omega0", "single-qubit detuning (rad/s)").positive(),
        ParamSpec::integers("m", "probe numbers").default(json!([1, 2, 3, 5, 10])).at_least(1.0).at_most(10_000.0),
        ParamSpec::number("t", "sensing time for the bounds (s)").default(1.0).positive(),
        ParamSpec::integer("n", "repetitions for the bounds").default(1).at_least(1.0),
        ParamSpec::number("chi", "single-qubit decoherence at t").default(0.0).at_least(0.0),
        gamma(),
        ParamSpec::number("fringe_duration", "fringe record length (s)").default(1.0).positive(),
        ParamSpec::integer("fringe_points", "fringe record samples").default(1024).at_least(16.0).at_most(10_000_000.0),
    ]
}

fn run_ghz(p: &Params, _: &RunContext) -> Result<Outputs> {
    let (w0, t, n, chi, g) = (p.f64("omega0")?, p.f64("t")?, p.usize("n")?, p.f64("chi")?, p.f64("gamma")?);
    let ms = p.usizes("m")?;
    let (dur, pts) = (p.f64("fringe_duration")?, p.usize("fringe_points")?);
    let dt = dur / pts as f64;
    let times: Vec<f64> = (0..pts).map(|i| i as f64 * dt).collect();
    let base = estimate_from_record(&times.iter().map(|&x| ghz_probability(1, w0, x)).collect::<Vec<_>>(), dt)?.f_hat;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); 7];
    let mut fringes = vec![times.clone()];
    for &m in &ms {
        let record: Vec<f64> = times.iter().map(|&x| ghz_probability(m, w0, x)).collect();
        let f = estimate_from_record(&record, dt)?.f_hat;
        let unc = qcrb_scaling(m, n, t, chi, g, ProbeKind::Uncorrelated)?;
        let ghz = qcrb_scaling(m, n, t, chi, g, ProbeKind::Ghz)?;
        for (c, v) in cols.iter_mut().zip([m as f64, f, f / base, unc, ghz, unc / ghz, ghz_qcrb_dephased(m, n, t, chi, g)?]) {
            c.push(v);
        }
        fringes.push(record);
    }
    let mut out = Outputs::default();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    out.csv(
        "ghz.csv",
        &["m", "fringe_frequency_hz", "fringe_ratio", "qcrb_uncorrelated", "qcrb_ghz", "qcrb_ratio", "qcrb_ghz_dephased"],
        &refs,
    )?;
    let names: Vec<String> = std::iter::once("t_s".to_owned()).chain(ms.iter().map(|m| format!("p_m{m}"))).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let frefs: Vec<&[f64]> = fringes.iter().map(Vec::as_slice).collect();
    out.csv("ghz_fringes.csv", &name_refs, &frefs)?;
    out.put("m", ms);
    out.put("fringe_ratio", cols[2].clone());
    out.put("qcrb_ratio", cols[5].clone());
    Ok(out)
}

fn squeezing_params() -> Vec<ParamSpec> {
    vec![
        ParamSpec::integer("qubits", "number of spins M").default(20).at_least(1.0).at_most(400.0),
        ParamSpec::number("chi_t_min", "first twisting strength χt").default(0.0).at_least(0.0),
        ParamSpec::number("chi_t_max", "last twisting strength χt").default(0.3).positive(),
        ParamSpec::integer("points", "scan points").default(61).at_least(2.0).at_most(100_000.0),
    ]
}

fn check_squeezing(p: &Params, out: &mut Vec<ConfigViolation>) {
    check_order(p, "chi_t_min", "chi_t_max", out);
}

fn run_squeezing(p: &Params, _: &RunContext) -> Result<Outputs> {
    let m = p.usize("qubits")?;
    let scan = squeezing_scan(m, &linspace(p.f64("chi_t_min")?, p.f64("chi_t_max")?, p.usize("points")?))?;
    let mut buf = Vec::new();
    scan.write_csv(&mut buf)?;
    let mut out = Outputs::default();
    out.files.push(("squeezing.csv".into(), buf));
    let (c, xi, angle) = scan.minimum();
    out.put("qubits", m);
    out.put("chi_t_opt", c);
    out.put("xi_r_min", xi);
    out.put("angle_opt", angle);
    out.put("xi_r_css", squeezing_parameters(&css(m, [1.0, 0.0, 0.0])?, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0])?.xi_r);
    Ok(out)
}

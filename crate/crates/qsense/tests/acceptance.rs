//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Set QSENSE_BLESS=1 to (re)write the CLI golden files.

use std::f64::consts::{E, PI};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use qsense::ensemble::{
    css, ghz_probability, qcrb_scaling, random_direction, squeezing_parameters, squeezing_scan, CollectiveSpinState, ProbeKind,
};
use qsense::estimation::{
    allan_curve, allan_variance, fisher_information, minimum_detectable_signal, qft_distribution, qft_phase_estimation,
    quantum_fisher_information, ramsey_outcome_probability, ramsey_state, ramsey_state_derivative, scaling_benchmark,
    scaling_exponent, AllanSeries, BenchmarkSettings, DetectionOrder, Estimator, SensitivityInputs,
};
use qsense::filter::{averaged_weighting, MultipulseKind, ReconstructionOptions};
use qsense::numerics::fit::log_log_slope;
use qsense::numerics::special::bessel_j0;
use qsense::numerics::{linspace, logspace, stream_rng};
use qsense::protocols::{
    cp_noise_spectroscopy, estimate_from_record, fit_decay, simulate_protocol, t1_relaxometry, AmplitudeModel, Drive,
    SequenceSpec, SimulationSetup, SpectroscopyPlan,
};
use qsense::signal::SpectralDensity;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ramsey_monte_carlo() -> Outcome {
    let (omega0, n) = (1.0, 10_000);
    let times = linspace(0.0, 4.0 * PI, 20);
    let seqs: Vec<SequenceSpec> = times.iter().map(|&t| SequenceSpec::Ramsey { t }).collect();
    let r = simulate_protocol(&seqs, &SimulationSetup::new(omega0, 1.0, Drive::None), n, 101).map_err(fail)?;
    let mut worst: f64 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let p = (0.5 * omega0 * t).sin().powi(2);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let z = if se == 0.0 {
            if r.p_hat[i] == p { 0.0 } else { f64::INFINITY }
        } else {
            (r.p_hat[i] - p).abs() / se
        };
        worst = worst.max(z);
    }
    check(worst <= 5.0, format!("max |z| = {worst:.2} over 20 points"))
}

fn projection_noise() -> Outcome {
    let n = 1000;
    // ω0 t = π/2 gives p = ½
    let seq = [SequenceSpec::Ramsey { t: 0.5 * PI }];
    let setup = SimulationSetup::new(1.0, 1.0, Drive::None);
    let estimates: Vec<f64> =
        (0..1000u64).map(|rep| simulate_protocol(&seq, &setup, n, 5000 + rep).map(|r| r.p_hat[0])).collect::<Result<_, _>>().map_err(fail)?;
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let var = estimates.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (estimates.len() - 1) as f64;
    let expect = 1.0 / (4.0 * n as f64);
    let rel = var / expect - 1.0;
    check(rel.abs() <= 0.10, format!("Var = {var:.4e}, 1/(4N) = {expect:.4e}, rel = {rel:+.3}"))
}

fn cp_peak_transmission() -> Outcome {
    let (n, tau) = (32, 1e-3);
    let f0 = 0.5 / tau;
    let w = |f: f64| averaged_weighting(MultipulseKind::Cp, f, n, tau).unwrap_or(f64::NAN);
    let grid = linspace(0.9 * f0, 1.1 * f0, 4001);
    let (f_peak, peak) = grid.iter().map(|&f| (f, w(f))).fold((0.0, f64::MIN), |b, x| if x.1 > b.1 { x } else { b });
    let expect = 2.0 / (PI * PI);
    let rel = peak / expect - 1.0;
    check(
        rel.abs() <= 0.02 && (f_peak / f0 - 1.0).abs() <= 1e-3,
        format!("peak W̄² = {peak:.6} at f = {f_peak:.3} Hz (1/(2τ) = {f0}), 2/π² = {expect:.6}, rel = {rel:+.2e}"),
    )
}

fn white_noise_dephasing() -> Outcome {
    let (gamma, s0) = (1.0, 2.0);
    let times = logspace(0.05, 1.0, 10);
    let setup = SimulationSetup::new(0.0, gamma, Drive::Noise { par: SpectralDensity::White { s0 }, perp: SpectralDensity::zero(), dt: 0.002 });
    let seqs: Vec<SequenceSpec> = times.iter().map(|&t| SequenceSpec::Ramsey { t }).collect();
    let r = simulate_protocol(&seqs, &setup, 4000, 404).map_err(fail)?;
    let (mut t, mut chi, mut sc) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..times.len() {
        if let Some((c, s)) = qsense::protocols::chi_from_probability(r.p_hat[i], r.sigma_p[i]) {
            t.push(times[i]);
            chi.push(c);
            sc.push(s);
        }
    }
    let fit = fit_decay(&t, &chi, &sc).map_err(fail)?;
    let expect = 0.5 * gamma * gamma * s0;
    let rel = fit.rate / expect - 1.0;
    check(
        rel.abs() <= 0.10 && (fit.exponent - 1.0).abs() <= 0.1,
        format!("Γ = {:.4} (expected {expect}), rel = {rel:+.3}, a = {:.3}", fit.rate, fit.exponent),
    )
}

fn noise_spectroscopy() -> Outcome {
    let psd = SpectralDensity::Lorentzian { s0: 0.1, omega_c: 0.0, half_width: 1.0 };
    let omegas = logspace(0.3, 3.0, 12);
    let plan = SpectroscopyPlan {
        gamma: 1.0,
        taus: omegas.iter().map(|w| PI / w).collect(),
        n_min: 2,
        n_max: 512,
        samples_per_tau: 32,
        trials: 1000,
        chi_min: 0.1,
        chi_max: 1.5,
        options: ReconstructionOptions::default(),
    };
    let r = cp_noise_spectroscopy(&psd, &plan, 505).map_err(fail)?;
    let rel: Vec<f64> = r.spectrum.omega.iter().zip(&r.spectrum.value).map(|(w, s)| s / psd.evaluate(*w) - 1.0).collect();
    let mean = rel.iter().map(|x| x.abs()).sum::<f64>() / rel.len() as f64;
    let max = rel.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    check(
        mean <= 0.20,
        format!("band-averaged |rel err| = {mean:.3} over ω ∈ [0.3, 3] ({} bins, max {max:.3})", rel.len()),
    )
}

fn golden_rule_t1() -> Outcome {
    let (omega0, gamma) = (2.0 * PI, 1.0);
    let times = [2.0, 4.0, 6.0, 8.0, 12.0, 16.0];
    let mut details = Vec::new();
    let mut ok = true;
    for (label, psd) in [
        ("white", SpectralDensity::White { s0: 0.1 }),
        ("lorentzian", SpectralDensity::Lorentzian { s0: 0.12, omega_c: omega0, half_width: 3.0 }),
    ] {
        let r = t1_relaxometry(&psd, omega0, gamma, &times, 1.0 / 40.0, 4000, 606).map_err(fail)?;
        let expect = 0.5 * gamma * gamma * psd.evaluate(omega0);
        let rel = r.rate / expect - 1.0;
        ok &= rel.abs() <= 0.10;
        details.push(format!("{label}: 1/T1 = {:.5} vs {expect:.5} ({rel:+.3})", r.rate));
    }
    check(ok, details.join("; "))
}

fn random_phase_j0() -> Outcome {
    let (n, tau, gamma) = (8, 1e-3, 1.0);
    let seq = SequenceSpec::Cp { n, tau };
    let f = 0.5 / tau;
    let t = n as f64 * tau;
    let wbar = averaged_weighting(MultipulseKind::Cp, f, n, tau).map_err(fail)?.sqrt();
    let mut worst: f64 = 0.0;
    for (k, x) in [0.5, 1.0, 1.5, 2.0, 2.5].into_iter().enumerate() {
        let v_rms = x / (2.0 * wbar * gamma * t);
        let setup = SimulationSetup::new(0.0, gamma, Drive::Tone { v: 2f64.sqrt() * v_rms, f_ac: f, model: AmplitudeModel::RandomPhase });
        let r = simulate_protocol(&[seq], &setup, 10_000, 700 + k as u64).map_err(fail)?;
        let p = 0.5 * (1.0 - bessel_j0(x));
        let se = (p * (1.0 - p) / 10_000.0).sqrt();
        worst = worst.max((r.p_hat[0] - p).abs() / se);
    }
    check(worst <= 5.0, format!("max |z| = {worst:.2} at 2W̄γV_rms t ∈ {{0.5, 1, 1.5, 2, 2.5}}"))
}

fn sensitivity_optimum() -> Outcome {
    let (gamma, c, t2) = (1.76e11, 0.03, 2e-6);
    let inputs = SensitivityInputs { gamma, contrast: c, t_chi: t2, t_m: 0.0, decay_exponent: 1.0, order: DetectionOrder::Slope };
    let s = minimum_detectable_signal(&inputs).map_err(fail)?;
    let v_expect = (2.0 * E).sqrt() / (gamma * c * t2.sqrt());
    let (rt, rv) = (s.t_opt / (0.5 * t2) - 1.0, s.v_min / v_expect - 1.0);
    check(rt.abs() <= 0.01 && rv.abs() <= 0.01, format!("t* rel = {rt:+.2e}, v_min rel = {rv:+.2e}"))
}

fn fisher_consistency() -> Outcome {
    let (gamma, t, chi) = (1.7, 0.8, 0.3);
    let mut rng = stream_rng(909, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let v: f64 = rng.random_range(-3.0..3.0);
        let fi = fisher_information(|x| ramsey_outcome_probability(gamma, x, t, chi), v, 1, gamma).map_err(fail)?;
        let phi = gamma * v * t;
        let d = (-2.0 * chi).exp();
        let closed = t * t * phi.cos().powi(2) * d / (1.0 - d * phi.sin().powi(2));
        worst = worst.max((fi.fisher / closed - 1.0).abs());
    }
    let mut qcrb_worst: f64 = 0.0;
    for n in [1usize, 10, 1000] {
        for v in [0.0, 0.4, 1.3] {
            let q = quantum_fisher_information(&ramsey_state(gamma, v, t, chi), &ramsey_state_derivative(gamma, v, t, chi)).map_err(fail)?;
            let bound = 1.0 / (n as f64 * q).sqrt();
            let expect = chi.exp() / (gamma * t * (n as f64).sqrt());
            qcrb_worst = qcrb_worst.max((bound / expect - 1.0).abs());
        }
    }
    check(worst <= 1e-4 && qcrb_worst <= 1e-12, format!("max F rel err = {worst:.2e}, max QCRB rel err = {qcrb_worst:.2e}"))
}

fn phase_estimation_scaling() -> Outcome {
    let s = BenchmarkSettings { contrast: 1.0, g: 5, f: 2, trials: 300, seed: 1010 };
    let mut details = Vec::new();
    let mut ok = true;
    for (est, levels) in [
        (Estimator::Adaptive, (2..=12).collect::<Vec<u32>>()),
        (Estimator::Bayesian, (2..=12).collect()),
        (Estimator::Baseline, (2..=14).step_by(2).collect()),
    ] {
        let pts = scaling_benchmark(est, &levels, &s).map_err(fail)?;
        let slope = scaling_exponent(&pts).map_err(fail)?;
        let decades = (pts[pts.len() - 1].t_total / pts[0].t_total).log10();
        ok &= decades >= 3.0;
        ok &= match est {
            Estimator::Baseline => (slope + 0.5).abs() <= 0.1,
            _ => slope <= -0.85,
        };
        details.push(format!("{} {slope:.3} over {decades:.2} decades", est.name()));
    }
    check(ok, details.join("; "))
}

fn qft_dyadic() -> Outcome {
    let mut cases = 0;
    for m in 3..=8u32 {
        for j in 0..(1usize << m) {
            let phi = j as f64 / (1u64 << m) as f64;
            let o = qft_phase_estimation(phi, m).map_err(fail)?;
            let p = qft_distribution(phi, m).map_err(fail)?;
            if o.index != j || o.estimate != phi || (p[j] - 1.0).abs() > 1e-12 {
                return Err(format!("M = {m}, j = {j}: read {} with probability {}", o.index, p[j]));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} dyadic phases read exactly"))
}

fn ghz_scaling() -> Outcome {
    let (omega0, n, dt) = (2.0 * PI * 5.0, 1024, 1.0 / 1024.0);
    let freq = |m: usize| {
        let rec: Vec<f64> = (0..n).map(|i| ghz_probability(m, omega0, i as f64 * dt)).collect();
        estimate_from_record(&rec, dt).map(|e| e.f_hat)
    };
    let f1 = freq(1).map_err(fail)?;
    let mut details = Vec::new();
    for m in [2usize, 3, 5, 10] {
        let ratio = freq(m).map_err(fail)? / f1;
        let unc = qcrb_scaling(m, 7, 0.3, 0.2, 1.5, ProbeKind::Uncorrelated).map_err(fail)?;
        let ghz = qcrb_scaling(m, 7, 0.3, 0.2, 1.5, ProbeKind::Ghz).map_err(fail)?;
        let q = unc / ghz;
        if ratio != m as f64 || (q / (m as f64).sqrt() - 1.0).abs() > 1e-14 {
            return Err(format!("M = {m}: fringe ratio {ratio}, QCRB ratio {q}"));
        }
        details.push(format!("M={m}: {ratio}, {q:.6}"));
    }
    Ok(details.join("; "))
}

fn squeezing() -> Outcome {
    let scan = squeezing_scan(20, &linspace(0.0, 0.3, 61)).map_err(fail)?;
    let (chi_t, xi_min, _) = scan.minimum();
    let mut rng = stream_rng(1313, 0);
    let mut css_worst: f64 = 0.0;
    for _ in 0..10 {
        let dir = random_direction(&mut rng);
        let n = Vector3::from(dir);
        let a = n.cross(&if n.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() }).normalize();
        let s = squeezing_parameters(&css(20, dir).map_err(fail)?, a.into(), dir).map_err(fail)?;
        css_worst = css_worst.max((s.xi_r - 1.0).abs());
    }
    let mut min_margin = f64::INFINITY;
    for k in 0..100 {
        let state = CollectiveSpinState::random(1 + k % 12, &mut rng).map_err(fail)?;
        let mom = state.moments();
        let a = Vector3::from(random_direction(&mut rng));
        let b = a.cross(&Vector3::from(random_direction(&mut rng))).normalize();
        let c = a.cross(&b);
        let lhs = mom.spread(&a) * mom.spread(&b);
        let rhs = 0.5 * mom.mean.dot(&c).abs();
        min_margin = min_margin.min(lhs - rhs);
    }
    check(
        xi_min < 1.0 && css_worst <= 1e-9 && min_margin >= -1e-12,
        format!("min ξ_R = {xi_min:.4} at χt = {chi_t}; CSS |ξ_R − 1| ≤ {css_worst:.1e}; min ΔJαΔJβ − |⟨Jγ⟩|/2 = {min_margin:.2e}"),
    )
}

fn allan() -> Outcome {
    let t_s = 0.5;
    let hand = AllanSeries::new(vec![0.0, 1.0, 3.0, 6.0], 1.0).map_err(fail)?;
    // (1² + 2²)/(2·2·1²) and (3²)/(2·1·4)
    let ok_hand = allan_variance(&hand, 1).map_err(fail)? == 1.25 && allan_variance(&hand, 1).is_ok();
    let ramp = AllanSeries::new((0..64).map(|j| j as f64).collect(), t_s).map_err(fail)?;
    let alt = AllanSeries::new((0..64).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect(), t_s).map_err(fail)?;
    let mut ok = ok_hand;
    for m in 1..=31 {
        ok &= allan_variance(&ramp, m).map_err(fail)? == 1.0 / (2.0 * t_s * t_s);
        let expect = if m % 2 == 1 { 2.0 / ((m * m) as f64 * t_s * t_s) } else { 0.0 };
        ok &= (allan_variance(&alt, m).map_err(fail)? - expect).abs() <= 1e-15 * expect.max(1.0);
    }
    let mut rng = stream_rng(1414, 0);
    let rates: Vec<f64> = (0..1 << 16).map(|_| StandardNormal.sample(&mut rng)).collect();
    let (taus, vars) = allan_curve(&AllanSeries::from_rates(&rates, 1e-3).map_err(fail)?).map_err(fail)?;
    // groupings with at least ~30 independent pairs
    let keep = taus.iter().filter(|t| **t <= (1 << 11) as f64 * 1e-3).count();
    let slope = log_log_slope(&taus[..keep], &vars[..keep]).map_err(fail)?;
    check(ok && (slope + 1.0).abs() <= 0.15, format!("hand cases exact: {ok}; white slope = {slope:.3}"))
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run_cli(config: &Path, out: &Path, threads: &str) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_qsense"))
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("QSENSE_THREADS", threads)
        .output()
        .map_err(fail)?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("{}: {}", config.display(), String::from_utf8_lossy(&o.stderr)))
    }
}

/// Manifest with the fields that legitimately vary between runs removed.
fn stable_manifest(path: &Path) -> Result<Value, String> {
    let mut v: Value = serde_json::from_slice(&std::fs::read(path).map_err(fail)?).map_err(fail)?;
    let obj = v.as_object_mut().ok_or("manifest is not an object")?;
    obj.remove("wall_clock_s");
    obj.get_mut("config").and_then(Value::as_object_mut).map(|c| c.remove("output_dir"));
    Ok(v)
}

fn cli_determinism() -> Outcome {
    let bless = std::env::var("QSENSE_BLESS").is_ok_and(|v| v == "1");
    let tmp = tempfile::tempdir().map_err(fail)?;
    let mut configs: Vec<PathBuf> = std::fs::read_dir(crate_dir().join("configs"))
        .map_err(fail)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(fail)?;
    configs.sort();
    let mut names = Vec::new();
    for cfg in &configs {
        let name = cfg.file_stem().and_then(|s| s.to_str()).ok_or("bad config name")?.to_owned();
        let (a, b) = (tmp.path().join(format!("{name}-a")), tmp.path().join(format!("{name}-b")));
        run_cli(cfg, &a, "1")?;
        run_cli(cfg, &b, "4")?;
        let mut files: Vec<String> = std::fs::read_dir(&a)
            .map_err(fail)?
            .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
            .collect::<Result<_, _>>()
            .map_err(fail)?;
        files.sort();
        if stable_manifest(&a.join("manifest.json"))? != stable_manifest(&b.join("manifest.json"))? {
            return Err(format!("{name}: manifests differ"));
        }
        let golden = crate_dir().join("tests/golden").join(&name);
        if bless {
            std::fs::create_dir_all(&golden).map_err(fail)?;
        }
        for f in files.iter().filter(|f| *f != "manifest.json") {
            let bytes = std::fs::read(a.join(f)).map_err(fail)?;
            if bytes != std::fs::read(b.join(f)).map_err(fail)? {
                return Err(format!("{name}/{f}: repeated runs differ"));
            }
            if bless {
                std::fs::write(golden.join(f), &bytes).map_err(fail)?;
            } else {
                let expect = std::fs::read(golden.join(f)).map_err(|e| format!("{name}/{f}: no golden file ({e}); run with QSENSE_BLESS=1"))?;
                if expect != bytes {
                    return Err(format!("{name}/{f}: differs from golden file"));
                }
            }
        }
        names.push(name);
    }
    check(names.len() == 14, format!("{} configs byte-identical across runs and thread counts, matching golden files", names.len()))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "Ramsey Monte-Carlo vs fringe law", budget: Duration::from_secs(10), run: ramsey_monte_carlo },
        Criterion { id: 2, name: "projection noise 1/(4N)", budget: Duration::from_secs(30), run: projection_noise },
        Criterion { id: 3, name: "CP peak transmission 2/π²", budget: Duration::from_secs(5), run: cp_peak_transmission },
        Criterion { id: 4, name: "white-noise dephasing rate", budget: Duration::from_secs(60), run: white_noise_dephasing },
        Criterion { id: 5, name: "noise spectroscopy pipeline", budget: Duration::from_secs(300), run: noise_spectroscopy },
        Criterion { id: 6, name: "golden-rule T1", budget: Duration::from_secs(120), run: golden_rule_t1 },
        Criterion { id: 7, name: "random-phase J0 law", budget: Duration::from_secs(60), run: random_phase_j0 },
        Criterion { id: 8, name: "sensitivity optimum", budget: Duration::from_secs(1), run: sensitivity_optimum },
        Criterion { id: 9, name: "Fisher consistency and QCRB", budget: Duration::from_secs(1), run: fisher_consistency },
        Criterion { id: 10, name: "phase-estimation scaling", budget: Duration::from_secs(600), run: phase_estimation_scaling },
        Criterion { id: 11, name: "QFT exact on dyadic phases", budget: Duration::from_secs(10), run: qft_dyadic },
        Criterion { id: 12, name: "GHZ fringe and QCRB ratios", budget: Duration::from_secs(1), run: ghz_scaling },
        Criterion { id: 13, name: "squeezing", budget: Duration::from_secs(30), run: squeezing },
        Criterion { id: 14, name: "Allan variance", budget: Duration::from_secs(30), run: allan },
        Criterion { id: 15, name: "CLI determinism and golden files", budget: Duration::from_secs(120), run: cli_determinism },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if took <= c.budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; exceeded {:?} budget", c.budget)),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{status} [{:>2}] {} ({:.2} s): {detail}", c.id, c.name, took.as_secs_f64());
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}

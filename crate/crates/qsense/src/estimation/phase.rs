//! Phase estimation with exponentially growing sensing times.
//!
//! Phases are in turns, `φ ∈ [0, 1)`. Exposure `m` accumulates `2π·2^m·φ`
//! and costs `2^m` time units.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng as _;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{ensure, Error, Result};
use crate::io::write_columns;
use crate::numerics::fit::log_log_slope;
use crate::numerics::stats::quantile;
use crate::numerics::{stream_rng, Rng};

/// Smallest distance between two phases on the unit circle, in turns.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Single-qubit sensor exposed to an unknown phase.
#[derive(Debug, Clone)]
pub struct PhaseOracle {
    phi: f64,
    contrast: f64,
    /// Contrast loss per time unit of exposure, `C_m = C·e^{−2^m·rate}`.
    dephasing: f64,
    rng: Rng,
    time_used: u64,
    shots: u64,
}

impl PhaseOracle {
    pub fn new(phi: f64, contrast: f64, rng: Rng) -> Result<Self> {
        ensure(phi.is_finite(), || "phase must be finite".into())?;
        ensure(contrast > 0.0 && contrast <= 1.0, || format!("C must lie in (0, 1], got {contrast}"))?;
        Ok(Self { phi: phi.rem_euclid(1.0), contrast, dephasing: 0.0, rng, time_used: 0, shots: 0 })
    }

    pub fn with_dephasing(mut self, rate: f64) -> Result<Self> {
        ensure(rate >= 0.0 && rate.is_finite(), || format!("dephasing rate must be >= 0, got {rate}"))?;
        self.dephasing = rate;
        Ok(self)
    }

    pub fn phase(&self) -> f64 {
        self.phi
    }

    pub fn contrast_at(&self, m: u32) -> f64 {
        self.contrast * (-(2f64.powi(m as i32)) * self.dephasing).exp()
    }

    /// `½[1 − C_m·cos(2π·2^m·φ + θ)]`.
    pub fn probability(&self, m: u32, theta: f64) -> f64 {
        let arg = 2.0 * PI * (2f64.powi(m as i32) * self.phi).rem_euclid(1.0) + theta;
        0.5 * (1.0 - self.contrast_at(m) * arg.cos())
    }

    /// One shot: returns 1 with [`probability`](Self::probability).
    pub fn query(&mut self, m: u32, theta: f64) -> u8 {
        self.time_used += 1u64 << m;
        self.shots += 1;
        u8::from(self.rng.random::<f64>() < self.probability(m, theta))
    }

    /// Exposure used so far, in units of the shortest sensing time.
    pub fn time_used(&self) -> u64 {
        self.time_used
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }
}

/// `N_m = G + F(M − 1 − m)` repetitions for bit `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceSchedule {
    pub bits: u32,
    pub g: u32,
    pub f: u32,
}

impl ResourceSchedule {
    pub fn new(bits: u32, g: u32, f: u32) -> Result<Self> {
        ensure((1..=52).contains(&bits), || format!("bit count must lie in 1..=52, got {bits}"))?;
        ensure(g >= 1, || "G must be at least 1".into())?;
        Ok(Self { bits, g, f })
    }

    pub fn shots(&self, m: u32) -> u32 {
        self.g + self.f * (self.bits - 1 - m)
    }

    pub fn total_time(&self) -> u64 {
        (0..self.bits).map(|m| u64::from(self.shots(m)) << m).sum()
    }
}

/// Outcome of the Fourier-transform register readout.
#[derive(Debug, Clone, PartialEq)]
pub struct QftOutcome {
    pub index: usize,
    /// Most significant bit first: `φ ≈ 0.φ1φ2…φM`.
    pub bits: String,
    pub estimate: f64,
}

impl QftOutcome {
    fn new(index: usize, bits: u32) -> Self {
        Self { index, bits: format!("{index:0width$b}", width = bits as usize), estimate: index as f64 / 2f64.powi(bits as i32) }
    }
}

/// Register distribution after phase tagging and the inverse transform.
pub fn qft_distribution(phi: f64, bits: u32) -> Result<Vec<f64>> {
    ensure((1..=14).contains(&bits), || format!("register size must lie in 1..=14, got {bits}"))?;
    let n = 1usize << bits;
    let norm = 1.0 / n as f64;
    let mut amp: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(norm.sqrt(), 2.0 * PI * (phi * j as f64).rem_euclid(1.0)))
        .collect();
    // the forward DFT kernel e^{−2πijk/n} is the inverse transform
    FftPlanner::new().plan_fft_forward(n).process(&mut amp);
    Ok(amp.iter().map(|a| a.norm_sqr() * norm).collect())
}

/// Most likely register readout.
pub fn qft_phase_estimation(phi: f64, bits: u32) -> Result<QftOutcome> {
    let p = qft_distribution(phi, bits)?;
    let k = p.iter().enumerate().fold(0, |b, (i, v)| if *v > p[b] { i } else { b });
    Ok(QftOutcome::new(k, bits))
}

/// A projective readout of the register.
pub fn qft_phase_sample(phi: f64, bits: u32, rng: &mut Rng) -> Result<QftOutcome> {
    let p = qft_distribution(phi, bits)?;
    let mut u: f64 = rng.random();
    for (k, w) in p.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return Ok(QftOutcome::new(k, bits));
        }
    }
    Ok(QftOutcome::new(p.len() - 1, bits))
}

/// Least significant bit first, with the known lower bits removed by the
/// controlled phase offset. Majority vote per bit; a tied vote reads 0.
pub fn adaptive_phase_estimation(oracle: &mut PhaseOracle, schedule: &ResourceSchedule) -> f64 {
    let mut est = 0.0;
    for m in (0..schedule.bits).rev() {
        let theta = -PI * est;
        let n = schedule.shots(m);
        let ones: u32 = (0..n).map(|_| u32::from(oracle.query(m, theta))).sum();
        let bit = if 2 * ones > n { 1.0 } else { 0.0 };
        est = 0.5 * (bit + est);
    }
    est
}

/// Grid posterior over `[0, 1)`, kept as log weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePosterior {
    log_w: Vec<f64>,
}

impl PhasePosterior {
    pub fn uniform(grid: usize) -> Result<Self> {
        ensure(grid >= 2, || format!("grid needs at least 2 points, got {grid}"))?;
        Ok(Self { log_w: vec![0.0; grid] })
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.log_w.len() as f64;
        (0..self.log_w.len()).map(|i| i as f64 / n).collect()
    }

    /// Multiplies in `ones` outcomes 1 and `zeros` outcomes 0 of exposure
    /// `m` at offset `theta`.
    pub fn update(&mut self, m: u32, theta: f64, contrast: f64, ones: u64, zeros: u64) {
        let n = self.log_w.len() as f64;
        let scale = 2f64.powi(m as i32);
        for (i, lw) in self.log_w.iter_mut().enumerate() {
            let c = contrast * (2.0 * PI * (scale * i as f64 / n).rem_euclid(1.0) + theta).cos();
            if ones > 0 {
                *lw += ones as f64 * (0.5 * (1.0 - c)).ln();
            }
            if zeros > 0 {
                *lw += zeros as f64 * (0.5 * (1.0 + c)).ln();
            }
        }
    }

    /// Normalized weights.
    pub fn weights(&self) -> Result<Vec<f64>> {
        let top = self.log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY || top.is_nan() {
            return Err(Error::Estimation("posterior vanishes on the whole grid".into()));
        }
        let w: Vec<f64> = self.log_w.iter().map(|l| (l - top).exp()).collect();
        let s: f64 = w.iter().sum();
        Ok(w.into_iter().map(|x| x / s).collect())
    }

    /// Circular mean of the posterior.
    pub fn estimate(&self) -> Result<f64> {
        let w = self.weights()?;
        let n = w.len() as f64;
        let (s, c) = w.iter().enumerate().fold((0.0, 0.0), |(s, c), (i, wi)| {
            let a = 2.0 * PI * i as f64 / n;
            (s + wi * a.sin(), c + wi * a.cos())
        });
        Ok((s.atan2(c) / (2.0 * PI)).rem_euclid(1.0))
    }
}

/// One block of repeated, identical shots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedMeasurement {
    pub m: u32,
    pub theta: f64,
    pub repeats: u32,
}

/// Two quadratures (`θ = 0, π/2`) per exposure with `N_m` shots each.
pub fn quadrature_plan(schedule: &ResourceSchedule) -> Vec<PlannedMeasurement> {
    (0..schedule.bits)
        .flat_map(|m| [0.0, 0.5 * PI].map(|theta| PlannedMeasurement { m, theta, repeats: schedule.shots(m) }))
        .collect()
}

/// Non-adaptive estimation: all planned shots, then a grid posterior.
pub fn bayesian_phase_estimation(oracle: &mut PhaseOracle, plan: &[PlannedMeasurement], grid: usize) -> Result<(PhasePosterior, f64)> {
    let top = plan.iter().map(|p| p.m).max().unwrap_or(0);
    for m in 0..=top {
        let mut thetas: Vec<f64> = plan.iter().filter(|p| p.m == m && p.repeats > 0).map(|p| p.theta.rem_euclid(PI)).collect();
        thetas.sort_by(f64::total_cmp);
        thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        ensure(thetas.len() >= 2, || format!("exposure {m} needs at least two quadratures"))?;
    }
    let mut post = PhasePosterior::uniform(grid)?;
    for p in plan {
        let ones: u64 = (0..p.repeats).map(|_| u64::from(oracle.query(p.m, p.theta))).sum();
        post.update(p.m, p.theta, oracle.contrast_at(p.m), ones, u64::from(p.repeats) - ones);
    }
    let est = post.estimate()?;
    Ok((post, est))
}

/// Fixed sensing time: `shots` per quadrature at the shortest exposure.
pub fn fixed_time_estimate(oracle: &mut PhaseOracle, shots: u32) -> f64 {
    let c = oracle.contrast_at(0);
    let frac = |o: &mut PhaseOracle, theta: f64| (0..shots).map(|_| f64::from(o.query(0, theta))).sum::<f64>() / shots as f64;
    let pc = frac(oracle, 0.0);
    let ps = frac(oracle, 0.5 * PI);
    let (cos, sin) = ((1.0 - 2.0 * pc) / c, (2.0 * ps - 1.0) / c);
    (sin.atan2(cos) / (2.0 * PI)).rem_euclid(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Adaptive,
    Bayesian,
    /// Fixed-time protocol; the level is log2 of the shots per quadrature.
    Baseline,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Adaptive => "adaptive",
            Estimator::Bayesian => "bayesian",
            Estimator::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkSettings {
    pub contrast: f64,
    pub g: u32,
    pub f: u32,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub estimator: Estimator,
    pub level: u32,
    pub t_total: f64,
    pub median_error: f64,
    pub quantile_10: f64,
    pub quantile_90: f64,
}

/// Runs one estimator at one resource level over uniformly drawn phases.
pub fn benchmark_point(estimator: Estimator, level: u32, s: &BenchmarkSettings) -> Result<ScalingPoint> {
    ensure(s.trials >= 1, || "need at least one trial".into())?;
    let schedule = ResourceSchedule::new(level.max(1), s.g, s.f)?;
    let plan = quadrature_plan(&schedule);
    let grid = 4096usize.max(1 << (level + 3).min(24));
    let runs: Vec<(f64, u64)> = (0..s.trials)
        .into_par_iter()
        .map(|j| -> Result<(f64, u64)> {
            let mut rng = stream_rng(s.seed, (u64::from(level) << 32) | j as u64);
            let phi: f64 = rng.random();
            let mut oracle = PhaseOracle::new(phi, s.contrast, rng)?;
            let est = match estimator {
                Estimator::Adaptive => adaptive_phase_estimation(&mut oracle, &schedule),
                Estimator::Bayesian => bayesian_phase_estimation(&mut oracle, &plan, grid)?.1,
                Estimator::Baseline => fixed_time_estimate(&mut oracle, 1 << level),
            };
            Ok((circular_distance(est, phi), oracle.time_used()))
        })
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let t_total = runs.iter().map(|r| r.1 as f64).sum::<f64>() / runs.len() as f64;
    Ok(ScalingPoint {
        estimator,
        level,
        t_total,
        median_error: quantile(&errors, 0.5),
        quantile_10: quantile(&errors, 0.1),
        quantile_90: quantile(&errors, 0.9),
    })
}

/// Benchmark over several resource levels.
pub fn scaling_benchmark(estimator: Estimator, levels: &[u32], s: &BenchmarkSettings) -> Result<Vec<ScalingPoint>> {
    levels.iter().map(|&l| benchmark_point(estimator, l, s)).collect()
}

/// Log-log slope of median error against total time.
pub fn scaling_exponent(points: &[ScalingPoint]) -> Result<f64> {
    let t: Vec<f64> = points.iter().map(|p| p.t_total).collect();
    let e: Vec<f64> = points.iter().map(|p| p.median_error).collect();
    log_log_slope(&t, &e)
}

/// CSV columns `T_total, median_error, quantile_10, quantile_90, estimator`.
pub fn write_benchmark_csv<W: std::io::Write>(points: &[ScalingPoint], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["T_total", "median_error", "quantile_10", "quantile_90", "estimator"])?;
    for p in points {
        wtr.write_record([
            crate::io::fmt_f64(p.t_total),
            crate::io::fmt_f64(p.median_error),
            crate::io::fmt_f64(p.quantile_10),
            crate::io::fmt_f64(p.quantile_90),
            p.estimator.name().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// QFT readout distribution as CSV (`index`, `phase`, `probability`).
pub fn write_qft_csv<W: std::io::Write>(phi: f64, bits: u32, w: W) -> Result<()> {
    let p = qft_distribution(phi, bits)?;
    let idx: Vec<f64> = (0..p.len()).map(|k| k as f64).collect();
    let ph: Vec<f64> = idx.iter().map(|k| k / p.len() as f64).collect();
    write_columns(w, &["index", "phase", "probability"], &[&idx, &ph, &p])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qft_dyadic_exact() {
        assert_eq!(qft_phase_estimation(3.0 / 8.0, 3).unwrap().bits, "011");
        assert_eq!(qft_phase_estimation(0.0, 5).unwrap().bits, "00000");
        for bits in 3..=8u32 {
            let n = 1usize << bits;
            for j in 0..n {
                let out = qft_phase_estimation(j as f64 / n as f64, bits).unwrap();
                assert_eq!(out.index, j);
                let p = qft_distribution(j as f64 / n as f64, bits).unwrap();
                assert!((p[j] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn qft_non_dyadic_sampling() {
        let (phi, bits) = (0.3141, 6);
        let mut rng = stream_rng(8, 0);
        let runs = 10_000;
        let hits = (0..runs)
            .filter(|_| circular_distance(qft_phase_sample(phi, bits, &mut rng).unwrap().estimate, phi) <= 1.0 / 64.0)
            .count();
        let frac = hits as f64 / runs as f64;
        let floor = 4.0 / (PI * PI);
        assert!(frac >= floor - 5.0 * (floor * (1.0 - floor) / runs as f64).sqrt(), "{frac}");
        let total: f64 = qft_distribution(phi, bits).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_noiseless() {
        let sched = ResourceSchedule::new(4, 5, 2).unwrap();
        assert_eq!(sched.shots(3), 5);
        assert_eq!(sched.shots(0), 11);
        let mut o = PhaseOracle::new(5.0 / 16.0, 1.0, stream_rng(1, 0)).unwrap();
        assert_eq!(adaptive_phase_estimation(&mut o, &sched), 5.0 / 16.0);
        assert_eq!(o.time_used(), sched.total_time());
        let mut o = PhaseOracle::new(0.0, 1.0, stream_rng(1, 1)).unwrap();
        assert_eq!(adaptive_phase_estimation(&mut o, &sched), 0.0);
    }

    #[test]
    fn posterior_basics() {
        let mut post = PhasePosterior::uniform(64).unwrap();
        assert!(post.weights().unwrap().iter().all(|w| (w - 1.0 / 64.0).abs() < 1e-15));
        post.update(0, 0.0, 1.0, 1, 0);
        let w = post.weights().unwrap();
        let shape: Vec<f64> = post.grid().iter().map(|p| (PI * p).sin().powi(2)).collect();
        let norm: f64 = shape.iter().sum();
        for (a, b) in w.iter().zip(&shape) {
            assert!((a - b / norm).abs() < 1e-14);
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // contradictory data on the whole grid
        let mut bad = PhasePosterior::uniform(2).unwrap();
        bad.update(0, 0.0, 1.0, 1, 0);
        bad.update(0, PI, 1.0, 1, 0);
        assert!(bad.estimate().is_err());
    }

    #[test]
    fn posterior_order_invariant() {
        let ms = [(0u32, 0.0, 3u64, 1u64), (2, 1.0, 0, 4), (1, 0.3, 2, 2), (3, 2.0, 5, 0)];
        let mut a = PhasePosterior::uniform(512).unwrap();
        for (m, th, o, z) in ms {
            a.update(m, th, 0.9, o, z);
        }
        let mut b = PhasePosterior::uniform(512).unwrap();
        for (m, th, o, z) in ms.iter().rev() {
            b.update(*m, *th, 0.9, *o, *z);
        }
        for (x, y) in a.weights().unwrap().iter().zip(b.weights().unwrap()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn bayesian_recovers_phase() {
        let sched = ResourceSchedule::new(8, 5, 2).unwrap();
        let plan = quadrature_plan(&sched);
        let mut o = PhaseOracle::new(0.61803, 1.0, stream_rng(3, 0)).unwrap();
        let (_, est) = bayesian_phase_estimation(&mut o, &plan, 4096).unwrap();
        assert!(circular_distance(est, 0.61803) < 4.0 / 256.0, "{est}");
        let single = [PlannedMeasurement { m: 0, theta: 0.0, repeats: 3 }];
        assert!(bayesian_phase_estimation(&mut o, &single, 64).is_err());
    }

    #[test]
    fn estimators_respect_cramer_rao() {
        // Fisher information per shot of exposure m is (2π 2^m C)²
        let s = BenchmarkSettings { contrast: 1.0, g: 5, f: 2, trials: 200, seed: 12 };
        for est in [Estimator::Adaptive, Estimator::Bayesian] {
            let level = 6;
            let sched = ResourceSchedule::new(level, 5, 2).unwrap();
            let shots_per_m = if est == Estimator::Bayesian { 2 } else { 1 };
            let info: f64 = (0..level).map(|m| (shots_per_m * sched.shots(m)) as f64 * (2.0 * PI * 2f64.powi(m as i32)).powi(2)).sum();
            let errs: Vec<f64> = (0..s.trials)
                .map(|j| {
                    let mut rng = stream_rng(s.seed, j as u64);
                    let phi: f64 = rng.random();
                    let mut o = PhaseOracle::new(phi, 1.0, rng).unwrap();
                    let e = match est {
                        Estimator::Adaptive => adaptive_phase_estimation(&mut o, &sched),
                        _ => bayesian_phase_estimation(&mut o, &quadrature_plan(&sched), 4096).unwrap().1,
                    };
                    circular_distance(e, phi)
                })
                .collect();
            let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
            assert!(rms >= 1.0 / info.sqrt(), "{est:?}: {rms}");
        }
    }

    #[test]
    fn baseline_scaling() {
        let s = BenchmarkSettings { contrast: 1.0, g: 5, f: 2, trials: 400, seed: 5 };
        let pts = scaling_benchmark(Estimator::Baseline, &[2, 4, 6, 8, 10, 12], &s).unwrap();
        let k = scaling_exponent(&pts).unwrap();
        assert!((k + 0.5).abs() < 0.1, "{k}");
        let mut buf = Vec::new();
        write_benchmark_csv(&pts, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("T_total,median_error,quantile_10,quantile_90,estimator\n"));
    }
}

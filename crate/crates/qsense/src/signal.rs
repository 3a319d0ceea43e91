//! Deterministic tones, Gaussian noise synthesis from a power spectral
//! density, and empirical autocorrelation / PSD estimates.
//!
//! Spectral densities are two-sided: `S(ω) = ∫ G(t) e^{−iωt} dt` with
//! `G(t) = ⟨V(t′)V(t′+t)⟩`, so the variance is `(1/2π)∫S dω`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::error::{ensure, Error, Result};
use crate::io::{read_columns, write_columns};
use crate::numerics::Rng;

/// Single AC tone `v_pk·cos(2π f_ac t + alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSpec {
    pub v_pk: f64,
    /// Hz.
    pub f_ac: f64,
    pub alpha: f64,
}

impl ToneSpec {
    pub fn new(v_pk: f64, f_ac: f64, alpha: f64) -> Self {
        Self { v_pk, f_ac, alpha }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.v_pk * (2.0 * PI * self.f_ac * t + self.alpha).cos()
    }
}

pub fn sample_waveform(tones: &[ToneSpec], t: f64) -> f64 {
    tones.iter().map(|tone| tone.at(t)).sum()
}

/// Parametric two-sided noise spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralDensity {
    /// Flat at `s0`, band-limited by the sampling of whatever uses it.
    White { s0: f64 },
    /// Pair of Lorentzians at ±omega_c whose sum is `s0` at the center when
    /// `omega_c = 0`.
    Lorentzian { s0: f64, omega_c: f64, half_width: f64 },
    /// `amplitude·|ω|^{−exponent}` on [omega_min, omega_max], flat below
    /// omega_min and zero above omega_max.
    PowerLaw { amplitude: f64, exponent: f64, omega_min: f64, omega_max: f64 },
}

impl SpectralDensity {
    pub fn zero() -> Self {
        SpectralDensity::White { s0: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SpectralDensity::White { s0 } => {
                ensure(s0 >= 0.0 && s0.is_finite(), || format!("white level must be >= 0, got {s0}"))
            }
            SpectralDensity::Lorentzian { s0, omega_c, half_width } => ensure(
                s0 >= 0.0 && omega_c >= 0.0 && half_width > 0.0 && s0.is_finite() && omega_c.is_finite(),
                || format!("invalid Lorentzian s0={s0} omega_c={omega_c} half_width={half_width}"),
            ),
            SpectralDensity::PowerLaw { amplitude, exponent, omega_min, omega_max } => ensure(
                amplitude >= 0.0 && exponent.is_finite() && omega_min > 0.0 && omega_max > omega_min && omega_max.is_finite(),
                || "power law needs amplitude >= 0 and finite cutoffs 0 < omega_min < omega_max".into(),
            ),
        }
    }

    pub fn evaluate(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match *self {
            SpectralDensity::White { s0 } => s0,
            SpectralDensity::Lorentzian { s0, omega_c, half_width: g } => {
                let g2 = g * g;
                0.5 * s0 * (g2 / ((w - omega_c).powi(2) + g2) + g2 / ((w + omega_c).powi(2) + g2))
            }
            SpectralDensity::PowerLaw { amplitude, exponent, omega_min, omega_max } => {
                if w > omega_max {
                    0.0
                } else {
                    amplitude * w.max(omega_min).powf(-exponent)
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            SpectralDensity::White { s0 } | SpectralDensity::Lorentzian { s0, .. } => s0 == 0.0,
            SpectralDensity::PowerLaw { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// Analytic autocorrelation `G(t)` where it is an ordinary function.
    pub fn autocorrelation(&self, t: f64) -> Option<f64> {
        match *self {
            SpectralDensity::Lorentzian { s0, omega_c, half_width } => {
                Some(0.5 * s0 * half_width * (-half_width * t.abs()).exp() * (omega_c * t).cos())
            }
            _ => None,
        }
    }

    /// Correlation time, the inverse Lorentzian half-width.
    pub fn correlation_time(&self) -> Option<f64> {
        match *self {
            SpectralDensity::Lorentzian { half_width, .. } => Some(1.0 / half_width),
            _ => None,
        }
    }

    /// Frequency scale beyond which the spectrum has no structure.
    pub fn support(&self) -> f64 {
        match *self {
            SpectralDensity::White { .. } => 0.0,
            SpectralDensity::Lorentzian { omega_c, half_width, .. } => omega_c + half_width,
            SpectralDensity::PowerLaw { omega_max, .. } => omega_max,
        }
    }

    /// Fraction of a Lorentzian's power lying above `omega`.
    fn lorentzian_tail_fraction(omega_c: f64, g: f64, omega: f64) -> f64 {
        let tail = |c: f64| PI / 2.0 - ((omega - c) / g).atan();
        (tail(omega_c) + tail(-omega_c)) / (2.0 * PI)
    }

    /// Rejects spectra with significant power above the Nyquist frequency of
    /// sampling interval `dt`.
    pub fn check_nyquist(&self, dt: f64) -> Result<()> {
        let nyquist = PI / dt;
        match *self {
            SpectralDensity::White { .. } => Ok(()),
            SpectralDensity::Lorentzian { s0, omega_c, half_width } => {
                let frac = Self::lorentzian_tail_fraction(omega_c, half_width, nyquist);
                if s0 > 0.0 && frac > 0.05 {
                    Err(Error::Aliasing(format!("{:.1}% of the Lorentzian power lies above {nyquist} rad/s", 100.0 * frac)))
                } else {
                    Ok(())
                }
            }
            SpectralDensity::PowerLaw { omega_max, .. } => {
                if omega_max > nyquist * (1.0 + 1e-12) {
                    Err(Error::Aliasing(format!("omega_max {omega_max} exceeds Nyquist {nyquist} rad/s")))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Uniformly sampled realization of a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub seed: Option<u64>,
}

impl NoiseTrace {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        ensure(dt > 0.0, || format!("dt must be positive, got {dt}"))?;
        ensure(samples.len() >= 2, || "a trace needs at least two samples".into())?;
        Ok(Self { dt, samples, seed: None })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// Sample-and-hold value at time `t`; clamps outside the record.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = (t / self.dt).floor().max(0.0) as usize;
        self.samples[i.min(self.samples.len() - 1)]
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let times: Vec<f64> = (0..self.len()).map(|i| i as f64 * self.dt).collect();
        write_columns(w, &["time_s", "value"], &[&times, &self.samples])
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let (_, cols) = read_columns(r)?;
        ensure(cols.len() == 2, || format!("expected two columns, found {}", cols.len()))?;
        ensure(cols[0].len() >= 2, || "a trace needs at least two samples".into())?;
        let dt = cols[0][1] - cols[0][0];
        let mut cols = cols;
        Self::new(dt, cols.swap_remove(1))
    }
}

/// Reusable generator of Gaussian traces with a fixed spectrum and length.
///
/// Coefficients are drawn on a grid twice the trace length and the second
/// half is discarded, so the circular wrap of the FFT does not correlate the
/// ends of the returned trace.
#[derive(Clone)]
pub struct NoiseSynthesizer {
    dt: f64,
    len: usize,
    /// Standard deviation of each real and imaginary coefficient.
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    zero: bool,
}

impl NoiseSynthesizer {
    pub fn new(psd: &SpectralDensity, len: usize, dt: f64) -> Result<Self> {
        psd.validate()?;
        ensure(dt > 0.0, || format!("dt must be positive, got {dt}"))?;
        ensure(len >= 2, || "trace length must be at least 2".into())?;
        psd.check_nyquist(dt)?;
        let m = 2 * len;
        let scale = (0..=m / 2)
            .map(|k| {
                let s = psd.evaluate(2.0 * PI * k as f64 / (m as f64 * dt));
                let total = s * m as f64 / dt;
                if k == 0 || k == m / 2 {
                    total.sqrt()
                } else {
                    (0.5 * total).sqrt()
                }
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_inverse(m);
        Ok(Self { dt, len, scale, fft, zero: psd.is_zero() })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn samples(&self, rng: &mut Rng) -> Vec<f64> {
        if self.zero {
            return vec![0.0; self.len];
        }
        let m = 2 * self.len;
        let mut spec = vec![Complex64::new(0.0, 0.0); m];
        let mut draw = || -> f64 { StandardNormal.sample(rng) };
        spec[0] = Complex64::new(self.scale[0] * draw(), 0.0);
        for k in 1..m / 2 {
            let c = Complex64::new(self.scale[k] * draw(), self.scale[k] * draw());
            spec[k] = c;
            spec[m - k] = c.conj();
        }
        spec[m / 2] = Complex64::new(self.scale[m / 2] * draw(), 0.0);
        self.fft.process(&mut spec);
        spec[..self.len].iter().map(|c| c.re / m as f64).collect()
    }
}

/// Draws a Gaussian trace with two-sided spectrum `psd`.
pub fn synthesize_noise(psd: &SpectralDensity, duration: f64, dt: f64, seed: u64) -> Result<NoiseTrace> {
    ensure(dt > 0.0 && duration > 0.0, || "duration and dt must be positive".into())?;
    let n = (duration / dt).round();
    ensure((n * dt - duration).abs() <= 1e-9 * duration, || {
        format!("duration {duration} is not an integer multiple of dt {dt}")
    })?;
    ensure(n >= 64.0, || format!("need at least 64 samples, got {n}"))?;
    let synth = NoiseSynthesizer::new(psd, n as usize, dt)?;
    let mut rng = Rng::seed_from_u64(seed);
    Ok(NoiseTrace { dt, samples: synth.samples(&mut rng), seed: Some(seed) })
}

/// Function sampled on a grid: lags, frequencies, times.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SampledCurve {
    pub fn write_csv<W: std::io::Write>(&self, w: W, x_name: &str, y_name: &str) -> Result<()> {
        write_columns(w, &[x_name, y_name], &[&self.x, &self.y])
    }
}

/// Unbiased lag-product autocorrelation, without mean subtraction, for lags
/// `0, dt, …` up to `max_lag`.
pub fn estimate_autocorrelation(trace: &NoiseTrace, max_lag: f64) -> Result<SampledCurve> {
    ensure(max_lag >= 0.0 && max_lag < 0.25 * trace.duration(), || {
        format!("max_lag must be below a quarter of the record ({}), got {max_lag}", 0.25 * trace.duration())
    })?;
    let n = trace.len();
    let lags = (max_lag / trace.dt + 1e-9).floor() as usize;
    let x = &trace.samples;
    let y = (0..=lags)
        .map(|k| x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / (n - k) as f64)
        .collect();
    Ok(SampledCurve { x: (0..=lags).map(|k| k as f64 * trace.dt).collect(), y })
}

/// Welch estimate of the two-sided PSD at non-negative frequencies.
///
/// Hann-windowed segments with 50% overlap; the default segment length is the
/// largest power of two not above `max(64, len/8)`.
pub fn estimate_psd(trace: &NoiseTrace) -> Result<SampledCurve> {
    let n = trace.len();
    ensure(n >= 64, || format!("need at least 64 samples, got {n}"))?;
    let target = (n / 8).max(64).min(n);
    let seg = 1usize << (usize::BITS - 1 - target.leading_zeros());
    estimate_psd_with(trace, seg)
}

pub fn estimate_psd_with(trace: &NoiseTrace, segment: usize) -> Result<SampledCurve> {
    let n = trace.len();
    ensure(segment >= 4 && segment <= n, || format!("segment length {segment} must be in [4, {n}]"))?;
    let window: Vec<f64> = (0..segment)
        .map(|j| 0.5 * (1.0 - (2.0 * PI * j as f64 / segment as f64).cos()))
        .collect();
    let norm: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(segment);
    let hop = segment / 2;
    let mut acc = vec![0.0; segment / 2 + 1];
    let mut count = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); segment];
    let mut start = 0;
    while start + segment <= n {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(window[j] * trace.samples[start + j], 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += hop;
    }
    let scale = trace.dt / (norm * count as f64);
    Ok(SampledCurve {
        x: (0..acc.len()).map(|k| 2.0 * PI * k as f64 / (segment as f64 * trace.dt)).collect(),
        y: acc.into_iter().map(|a| a * scale).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fit::fit_line, stats};

    #[test]
    fn tones() {
        let t = ToneSpec::new(2.5, 3.0, 0.0);
        assert_eq!(sample_waveform(&[t], 0.0), 2.5);
        let q = ToneSpec::new(1.0, 1.0, PI / 2.0);
        assert!(sample_waveform(&[q], 0.0).abs() < 1e-16);
        let pair = [ToneSpec::new(1.0, 7.0, 0.0), ToneSpec::new(1.0, 7.0, PI)];
        for i in 0..50 {
            assert!(sample_waveform(&pair, 0.013 * i as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn lorentzian_spectrum_is_transform_of_autocorrelation() {
        let psd = SpectralDensity::Lorentzian { s0: 2.0, omega_c: 3.0, half_width: 0.7 };
        for &w in &[0.0, 1.0, 3.0, 7.5] {
            let v = 2.0
                * crate::numerics::quad::integrate(
                    |t| psd.autocorrelation(t).unwrap() * (w * t).cos(),
                    0.0,
                    80.0,
                    1e-13,
                    1e-12,
                )
                .unwrap();
            assert!((v - psd.evaluate(w)).abs() < 1e-9, "w = {w}");
        }
    }

    #[test]
    fn zero_psd_gives_zero_trace() {
        let tr = synthesize_noise(&SpectralDensity::zero(), 1.0, 1.0 / 128.0, 3).unwrap();
        assert!(tr.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn synthesis_rejects_bad_grids() {
        let psd = SpectralDensity::White { s0: 1.0 };
        assert!(synthesize_noise(&psd, 1.0, 0.1, 0).is_err());
        assert!(synthesize_noise(&psd, 1.0, 0.003, 0).is_err());
        let pl = SpectralDensity::PowerLaw { amplitude: 1.0, exponent: 1.0, omega_min: 1.0, omega_max: 1e4 };
        assert!(matches!(synthesize_noise(&pl, 1.0, 1.0 / 1024.0, 0), Err(Error::Aliasing(_))));
        let wide = SpectralDensity::Lorentzian { s0: 1.0, omega_c: 0.0, half_width: 1000.0 };
        assert!(matches!(synthesize_noise(&wide, 1.0, 1.0 / 1024.0, 0), Err(Error::Aliasing(_))));
    }

    #[test]
    fn identical_seed_identical_trace() {
        let psd = SpectralDensity::Lorentzian { s0: 1.0, omega_c: 5.0, half_width: 2.0 };
        let a = synthesize_noise(&psd, 2.0, 1.0 / 256.0, 11).unwrap();
        let b = synthesize_noise(&psd, 2.0, 1.0 / 256.0, 11).unwrap();
        let c = synthesize_noise(&psd, 2.0, 1.0 / 256.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, c.samples);
    }

    fn ensemble_psd(psd: &SpectralDensity, n: usize, dt: f64, traces: u64) -> SampledCurve {
        let mut mean: Option<SampledCurve> = None;
        for seed in 0..traces {
            let tr = synthesize_noise(psd, n as f64 * dt, dt, seed).unwrap();
            let est = estimate_psd_with(&tr, 256).unwrap();
            match &mut mean {
                None => mean = Some(est),
                Some(m) => m.y.iter_mut().zip(&est.y).for_each(|(a, b)| *a += b),
            }
        }
        let mut m = mean.unwrap();
        m.y.iter_mut().for_each(|v| *v /= traces as f64);
        m
    }

    fn band_average(c: &SampledCurve, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
        let idx: Vec<usize> = (0..c.x.len()).filter(|&i| c.x[i] >= lo && c.x[i] <= hi).collect();
        let est = idx.iter().map(|&i| c.y[i]).sum::<f64>() / idx.len() as f64;
        let truth = idx.iter().map(|&i| f(c.x[i])).sum::<f64>() / idx.len() as f64;
        (est, truth)
    }

    #[test]
    fn white_round_trip() {
        let psd = SpectralDensity::White { s0: 0.3 };
        let dt = 1e-3;
        let m = ensemble_psd(&psd, 2048, dt, 200);
        for k in 1..m.x.len() - 1 {
            assert!((m.y[k] / 0.3 - 1.0).abs() < 0.05, "bin {k}: {}", m.y[k]);
        }
        let tr = synthesize_noise(&psd, 2048.0 * dt, dt, 0).unwrap();
        assert!((stats::variance(&tr.samples) * dt / 0.3 - 1.0).abs() < 0.1);
    }

    #[test]
    fn lorentzian_and_power_law_round_trip() {
        let dt = 1e-3;
        let lor = SpectralDensity::Lorentzian { s0: 1.0, omega_c: 600.0, half_width: 150.0 };
        let m = ensemble_psd(&lor, 2048, dt, 200);
        for (lo, hi) in [(100.0, 400.0), (400.0, 800.0), (800.0, 1500.0)] {
            let (e, t) = band_average(&m, |w| lor.evaluate(w), lo, hi);
            assert!((e / t - 1.0).abs() < 0.1, "[{lo},{hi}]: {e} vs {t}");
        }
        let pl = SpectralDensity::PowerLaw { amplitude: 50.0, exponent: 1.0, omega_min: 20.0, omega_max: 3000.0 };
        let m = ensemble_psd(&pl, 2048, dt, 200);
        for (lo, hi) in [(100.0, 300.0), (300.0, 1000.0), (1000.0, 2900.0)] {
            let (e, t) = band_average(&m, |w| pl.evaluate(w), lo, hi);
            assert!((e / t - 1.0).abs() < 0.1, "[{lo},{hi}]: {e} vs {t}");
        }
    }

    #[test]
    fn gaussian_kurtosis() {
        let psd = SpectralDensity::Lorentzian { s0: 1.0, omega_c: 0.0, half_width: 50.0 };
        let mut xs = Vec::with_capacity(1 << 20);
        for seed in 0..16 {
            xs.extend(synthesize_noise(&psd, 65536.0 * 1e-3, 1e-3, seed).unwrap().samples);
        }
        let m = stats::mean(&xs);
        let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / xs.len() as f64;
        assert!((m4 / (m2 * m2) - 3.0).abs() < 0.2);
    }

    #[test]
    fn lorentzian_correlation_time_recovered() {
        let tc = 0.02;
        let psd = SpectralDensity::Lorentzian { s0: 1.0, omega_c: 0.0, half_width: 1.0 / tc };
        let dt = 1e-3;
        let mut acc = vec![0.0; 41];
        let traces = 40;
        for seed in 0..traces {
            let tr = synthesize_noise(&psd, 8192.0 * dt, dt, seed).unwrap();
            let g = estimate_autocorrelation(&tr, 40.0 * dt).unwrap();
            acc.iter_mut().zip(&g.y).for_each(|(a, b)| *a += b / traces as f64);
        }
        // log-linear fit over the first two correlation times
        let lags: Vec<f64> = (0..=40).map(|k| k as f64 * dt).collect();
        let fit = fit_line(&lags, &acc.iter().map(|v| v.ln()).collect::<Vec<_>>(), None).unwrap();
        let tc_hat = -1.0 / fit.slope;
        assert!((tc_hat / tc - 1.0).abs() < 0.1, "{tc_hat}");
    }

    #[test]
    fn autocorrelation_special_cases() {
        let tr = NoiseTrace::new(0.1, vec![1.5; 100]).unwrap();
        let g = estimate_autocorrelation(&tr, 2.0).unwrap();
        assert!(g.y.iter().all(|&v| (v - 2.25).abs() < 1e-14));
        assert!(estimate_autocorrelation(&tr, 2.5).is_err());

        let white = synthesize_noise(&SpectralDensity::White { s0: 1e-3 }, 16.384, 1e-3, 4).unwrap();
        let g = estimate_autocorrelation(&white, 10e-3).unwrap();
        let se = g.y[0] / (white.len() as f64).sqrt();
        for k in 2..g.y.len() {
            assert!(g.y[k].abs() < 5.0 * se, "lag {k}: {}", g.y[k]);
        }

        let f = 5.0;
        let dt = 1e-3;
        let tone = NoiseTrace::new(dt, (0..4000).map(|i| (2.0 * PI * f * i as f64 * dt).cos()).collect()).unwrap();
        let g = estimate_autocorrelation(&tone, 0.5).unwrap();
        for (lag, v) in g.x.iter().zip(&g.y) {
            assert!((v - 0.5 * (2.0 * PI * f * lag).cos()).abs() < 0.01);
        }
    }

    #[test]
    fn psd_special_cases() {
        let zero = NoiseTrace::new(1e-3, vec![0.0; 512]).unwrap();
        assert!(estimate_psd(&zero).unwrap().y.iter().all(|&v| v == 0.0));

        let dt = 1e-3;
        let f = 62.5;
        let tone = NoiseTrace::new(dt, (0..4096).map(|i| (2.0 * PI * f * i as f64 * dt).cos()).collect()).unwrap();
        let est = estimate_psd(&tone).unwrap();
        let peak = (0..est.y.len()).max_by(|&a, &b| est.y[a].total_cmp(&est.y[b])).unwrap();
        assert!((est.x[peak] - 2.0 * PI * f).abs() <= est.x[1]);
    }

    #[test]
    fn csv_round_trip() {
        let tr = NoiseTrace::new(0.25, vec![0.5, -1.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let back = NoiseTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.samples, tr.samples);
        assert_eq!(back.dt, 0.25);
    }
}

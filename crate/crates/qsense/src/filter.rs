//! Modulation functions, weighting and filter functions, decoherence
//! integrals, spectrum reconstruction and relaxation rates.
//!
//! The filter function is normalized as `Y(ω) = ½∫₀ᵗ y(t′)e^{iωt′}dt′`, which
//! makes the decoherence function `χ = (2/π)∫₀^∞ γ²S(ω)|Y(ω)|²dω` with a
//! two-sided `S`. A free-precession interval then has
//! `|Y|² = sin²(ωt/2)/ω²` and white noise gives `χ = ½γ²S0·t`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::io::write_columns;
use crate::numerics::quad::{gk15, integrate};
use crate::numerics::sinc;
use crate::signal::SpectralDensity;

/// Multipulse family with equally spaced π pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultipulseKind {
    /// Carr-Purcell: pulses at `(2j−1)τ/2`.
    Cp,
    /// Periodic dynamical decoupling: pulses at `jτ`.
    Pdd,
}

/// Piecewise ±1 sign function flipped at each π pulse, starting at +1.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationFunction {
    switches: Vec<f64>,
    total: f64,
}

impl ModulationFunction {
    pub fn new(switches: Vec<f64>, total: f64) -> Result<Self> {
        ensure(total > 0.0 && total.is_finite(), || format!("total time must be positive, got {total}"))?;
        let mut prev = 0.0;
        for &s in &switches {
            ensure(s > prev && s < total, || format!("switch times must increase strictly inside (0, {total})"))?;
            prev = s;
        }
        Ok(Self { switches, total })
    }

    pub fn ramsey(t: f64) -> Result<Self> {
        Self::new(Vec::new(), t)
    }

    pub fn echo(t: f64) -> Result<Self> {
        Self::new(vec![0.5 * t], t)
    }

    /// Sign pattern of an `n`-pulse sequence with spacing `tau`. A PDD pulse
    /// coinciding with the end of the sequence does not change `y` inside the
    /// window and is omitted.
    pub fn multipulse(kind: MultipulseKind, n: usize, tau: f64) -> Result<Self> {
        ensure(n >= 1 && tau > 0.0, || format!("need n >= 1 and tau > 0, got n = {n}, tau = {tau}"))?;
        let switches = match kind {
            MultipulseKind::Cp => (1..=n).map(|j| (j as f64 - 0.5) * tau).collect(),
            MultipulseKind::Pdd => (1..n).map(|j| j as f64 * tau).collect(),
        };
        Self::new(switches, n as f64 * tau)
    }

    pub fn switches(&self) -> &[f64] {
        &self.switches
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn sign_at(&self, t: f64) -> f64 {
        let flips = self.switches.partition_point(|&s| s <= t);
        if flips % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `(start, end, sign)` of each constant piece.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let edges: Vec<f64> = std::iter::once(0.0)
            .chain(self.switches.iter().copied())
            .chain(std::iter::once(self.total))
            .collect();
        (0..edges.len() - 1).map(move |i| (edges[i], edges[i + 1], if i % 2 == 0 { 1.0 } else { -1.0 }))
    }

    /// Net time spent at +1 minus time at −1.
    pub fn imbalance(&self) -> f64 {
        self.segments().map(|(a, b, s)| s * (b - a)).sum()
    }

    /// `∫₀ᵗ y(t′)V(t′)dt′` by adaptive quadrature on each segment.
    pub fn integrate_signal(&self, v: impl Fn(f64) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for (a, b, s) in self.segments() {
            total += s * integrate(&v, a, b, 1e-14 * (b - a), 1e-11)?;
        }
        Ok(total)
    }

    /// `(1/t)∫ y(t′)cos(2πft′ + α)dt′`, evaluated segment by segment in
    /// closed form.
    pub fn tone_weight(&self, f: f64, alpha: f64) -> f64 {
        let w = PI * f;
        self.segments()
            .map(|(a, b, s)| s * (b - a) * (w * (a + b) + alpha).cos() * sinc(w * (b - a)))
            .sum::<f64>()
            / self.total
    }
}

/// Filter function `Y(ω)`, summed exactly over the constant segments.
pub fn filter_function(y: &ModulationFunction, omega: f64) -> Complex64 {
    y.segments()
        .map(|(a, b, s)| {
            s * (b - a) * sinc(0.5 * omega * (b - a)) * Complex64::from_polar(1.0, 0.5 * omega * (a + b))
        })
        .sum::<Complex64>()
        * 0.5
}

/// Sampled `|Y(ω)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterFunctionCurve {
    pub omega: Vec<f64>,
    pub value: Vec<f64>,
}

impl FilterFunctionCurve {
    pub fn sample(y: &ModulationFunction, omega: &[f64]) -> Self {
        Self { omega: omega.to_vec(), value: omega.iter().map(|&w| filter_function(y, w).norm_sqr()).collect() }
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_columns(w, &["omega_rad_s", "value"], &[&self.omega, &self.value])
    }
}

const POLE_GUARD: f64 = 1e-6;

fn near_sec_pole(x: f64) -> bool {
    let r = x / PI - 0.5;
    (r - r.round()).abs() * PI < POLE_GUARD
}

fn check_sequence(n: usize, tau: f64, f: f64) -> Result<()> {
    ensure(n >= 2 && n.is_multiple_of(2), || format!("n must be even and >= 2, got {n}"))?;
    ensure(tau > 0.0, || format!("tau must be positive, got {tau}"))?;
    ensure(f >= 0.0 && f.is_finite(), || format!("frequency must be >= 0, got {f}"))
}

/// Phase transfer `W(f, α)` of an `n`-pulse sequence: the accumulated phase
/// is `γV_pk·t·W` for a tone `V_pk·cos(2πft + α)`.
pub fn weighting_function(kind: MultipulseKind, f: f64, alpha: f64, n: usize, tau: f64) -> Result<f64> {
    check_sequence(n, tau, f)?;
    let x = PI * f * tau;
    if near_sec_pole(x) {
        return Ok(ModulationFunction::multipulse(kind, n, tau)?.tone_weight(f, alpha));
    }
    let envelope = sinc(n as f64 * x);
    Ok(match kind {
        MultipulseKind::Cp => envelope * (1.0 - 1.0 / x.cos()) * (alpha + n as f64 * x).cos(),
        MultipulseKind::Pdd => envelope * x.tan() * (alpha + n as f64 * x).sin(),
    })
}

/// Mean of `W²` over a uniformly random tone phase.
pub fn averaged_weighting(kind: MultipulseKind, f: f64, n: usize, tau: f64) -> Result<f64> {
    check_sequence(n, tau, f)?;
    let x = PI * f * tau;
    if near_sec_pole(x) {
        let y = ModulationFunction::multipulse(kind, n, tau)?;
        let (c, s) = (y.tone_weight(f, 0.0), y.tone_weight(f, 0.5 * PI));
        return Ok(0.5 * (c * c + s * s));
    }
    let envelope = sinc(n as f64 * x).powi(2);
    Ok(match kind {
        MultipulseKind::Cp => 0.5 * envelope * (1.0 - 1.0 / x.cos()).powi(2),
        MultipulseKind::Pdd => 0.5 * envelope * x.tan().powi(2),
    })
}

/// Decoherence integral with its quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoherence {
    pub chi: f64,
    /// Analytic estimate of the part above `cutoff`, already included in `chi`.
    pub tail: f64,
    pub cutoff: f64,
}

/// `χ = (2/π)∫₀^∞ γ²S(ω)|Y(ω)|²dω`.
pub fn decoherence_from_psd(psd: &SpectralDensity, y: &ModulationFunction, gamma: f64) -> Result<f64> {
    Ok(decoherence_detailed(psd, y, gamma)?.chi)
}

/// As [`decoherence_from_psd`], also reporting the tail correction.
///
/// White noise is evaluated exactly through Parseval's identity,
/// `∫₀^∞|Y|²dω = πt/4`. Other spectra are integrated panel by panel up to
/// `Ω = max(2000/t, 10·(spectral support), 300·(highest filter resonance))`;
/// above Ω `|Y|²` is replaced by its mean `(1 + 2n)/(2ω²)` for `n` switches.
pub fn decoherence_detailed(psd: &SpectralDensity, y: &ModulationFunction, gamma: f64) -> Result<Decoherence> {
    psd.validate()?;
    ensure(gamma > 0.0, || format!("gamma must be positive, got {gamma}"))?;
    if psd.is_zero() {
        return Ok(Decoherence { chi: 0.0, tail: 0.0, cutoff: 0.0 });
    }
    let mut breaks = Vec::new();
    let mut cap = f64::INFINITY;
    match *psd {
        SpectralDensity::White { s0 } => {
            return Ok(Decoherence { chi: 0.5 * gamma * gamma * s0 * y.total(), tail: 0.0, cutoff: f64::INFINITY });
        }
        SpectralDensity::Lorentzian { omega_c, half_width, .. } => {
            let lo = (omega_c - 40.0 * half_width).max(0.0);
            let fine = 0.5 * half_width;
            let k = (80.0 * half_width / fine).ceil() as usize;
            if half_width < PI / y.total() {
                breaks.extend((0..=k).map(|i| lo + i as f64 * fine));
            }
        }
        SpectralDensity::PowerLaw { omega_min, omega_max, .. } => {
            breaks.push(omega_min);
            cap = omega_max;
        }
    }
    decoherence_integral(&|w| psd.evaluate(w), psd.support(), &breaks, cap, y, gamma)
}

/// Quadrature core shared by all spectra; `breaks` are extra panel edges and
/// `cap` a frequency above which the spectrum vanishes.
fn decoherence_integral(
    spectrum: &dyn Fn(f64) -> f64,
    support: f64,
    breaks: &[f64],
    cap: f64,
    y: &ModulationFunction,
    gamma: f64,
) -> Result<Decoherence> {
    let t = y.total();
    let n_sw = y.switches().len();
    let resonance = PI * (n_sw as f64 + 1.0) / t;
    let cutoff = (2000.0 / t).max(10.0 * support).max(300.0 * resonance).min(cap);

    let coarse = PI / t;
    let panels = (cutoff / coarse).ceil() as usize;
    let mut edges: Vec<f64> = (0..=panels).map(|i| (i as f64 * coarse).min(cutoff)).collect();
    edges.extend(breaks.iter().filter(|&&b| b > 0.0 && b < cutoff));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * cutoff);

    let integrand = |w: f64| spectrum(w) * filter_function(y, w).norm_sqr();
    let rough: Vec<(f64, f64)> = edges.windows(2).map(|e| gk15(&integrand, e[0], e[1])).collect();
    let scale: f64 = rough.iter().map(|r| r.0.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let per_panel = 1e-9 * scale / rough.len() as f64;
    let mut band = 0.0;
    for (e, r) in edges.windows(2).zip(&rough) {
        band += if r.1 <= per_panel { r.0 } else { integrate(&integrand, e[0], e[1], per_panel, 1e-10)? };
    }

    let tail = if cutoff < cap {
        let mean_weight = 0.5 * (1.0 + 2.0 * n_sw as f64);
        mean_weight * integrate(|u| if u == 0.0 { 0.0 } else { spectrum(1.0 / u) }, 0.0, 1.0 / cutoff, 0.0, 1e-10)?
    } else {
        0.0
    };

    let pre = 2.0 / PI * gamma * gamma;
    let chi = pre * (band + tail);
    if !chi.is_finite() {
        return Err(Error::Convergence(format!("decoherence integral is not finite (band {band}, tail {tail})")));
    }
    Ok(Decoherence { chi, tail: pre * tail, cutoff })
}

/// Delta-peak approximation for an `n`-pulse sequence with spacing `tau`:
/// `χ ≈ (4t/π²) Σ_{k odd ≤ k_max} γ²S(kπ/τ)/k²`.
pub fn decoherence_delta_approx(psd: &SpectralDensity, n: usize, tau: f64, gamma: f64, k_max: usize) -> f64 {
    let t = n as f64 * tau;
    4.0 * t / (PI * PI)
        * (1..=k_max)
            .step_by(2)
            .map(|k| gamma * gamma * psd.evaluate(k as f64 * PI / tau) / (k * k) as f64)
            .sum::<f64>()
}

/// One measured decay: sequence spacing, pulse count and decoherence value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiMeasurement {
    pub tau: f64,
    pub n: usize,
    pub chi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionOptions {
    /// Highest odd harmonic kept in the model.
    pub k_max: usize,
    /// Ridge parameter relative to the largest squared singular value.
    pub ridge: f64,
    /// Power-law exponent used above the highest bin. `None` estimates it
    /// from the first-harmonic spectrum of the top bins.
    pub tail_exponent: Option<f64>,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self { k_max: 5, ridge: 1e-8, tail_exponent: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedSpectrum {
    pub omega: Vec<f64>,
    pub value: Vec<f64>,
    pub tail_exponent: f64,
    pub warning: Option<String>,
}

impl ReconstructedSpectrum {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_columns(w, &["omega_rad_s", "value"], &[&self.omega, &self.value])
    }
}

/// Reconstruction bins `π/τ`, ascending and deduplicated.
pub fn reconstruction_bins(measurements: &[ChiMeasurement]) -> Vec<f64> {
    let mut bins: Vec<f64> = measurements.iter().map(|m| PI / m.tau).collect();
    bins.sort_by(f64::total_cmp);
    bins.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    bins
}

/// Linear map from the spectrum at `bins` to the delta-model χ of each
/// measurement. Harmonics between bins are interpolated linearly; harmonics
/// above the last bin follow `S_last·(ω/ω_last)^tail_exponent`.
pub fn delta_model_matrix(
    measurements: &[ChiMeasurement],
    bins: &[f64],
    gamma: f64,
    k_max: usize,
    tail_exponent: f64,
) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(measurements.len(), bins.len());
    let top = bins.len() - 1;
    for (i, m) in measurements.iter().enumerate() {
        let t = m.n as f64 * m.tau;
        for k in (1..=k_max).step_by(2) {
            let w = k as f64 * PI / m.tau;
            let c = 4.0 * t / (PI * PI) * gamma * gamma / (k * k) as f64;
            if w >= bins[top] * (1.0 - 1e-12) {
                a[(i, top)] += c * (w / bins[top]).powf(tail_exponent);
            } else if w <= bins[0] {
                a[(i, 0)] += c;
            } else {
                let j = bins.partition_point(|&b| b <= w) - 1;
                let frac = (w - bins[j]) / (bins[j + 1] - bins[j]);
                a[(i, j)] += c * (1.0 - frac);
                a[(i, j + 1)] += c * frac;
            }
        }
    }
    a
}

/// Inverts measured decoherence values for the noise spectrum at `ω = π/τ`.
///
/// With `k_max = 1` each measurement maps directly to
/// `S(π/τ) = π²χ/(4tγ²)`. Otherwise the delta-model system over the odd
/// harmonics is solved by ridge-regularized least squares; a warning is
/// attached when the system is ill-conditioned.
pub fn reconstruct_psd(
    measurements: &[ChiMeasurement],
    gamma: f64,
    options: &ReconstructionOptions,
) -> Result<ReconstructedSpectrum> {
    ensure(!measurements.is_empty(), || "no measurements".into())?;
    ensure(gamma > 0.0, || format!("gamma must be positive, got {gamma}"))?;
    ensure(options.k_max >= 1 && options.k_max % 2 == 1, || format!("k_max must be odd, got {}", options.k_max))?;
    for m in measurements {
        ensure(m.tau > 0.0 && m.n >= 1 && m.chi.is_finite(), || format!("invalid measurement {m:?}"))?;
    }
    let bins = reconstruction_bins(measurements);
    let first = |m: &ChiMeasurement| PI * PI * m.chi / (4.0 * m.n as f64 * m.tau * gamma * gamma);
    let bin_of = |m: &ChiMeasurement| bins.partition_point(|&b| b < PI / m.tau * (1.0 - 1e-12));

    let mut first_harmonic = vec![(0.0, 0usize); bins.len()];
    for m in measurements {
        let e = &mut first_harmonic[bin_of(m)];
        e.0 += first(m);
        e.1 += 1;
    }
    let first_harmonic: Vec<f64> = first_harmonic.iter().map(|(s, c)| s / *c as f64).collect();
    if options.k_max == 1 {
        return Ok(ReconstructedSpectrum { omega: bins, value: first_harmonic, tail_exponent: 0.0, warning: None });
    }

    let tail_exponent = options.tail_exponent.unwrap_or_else(|| {
        let k = bins.len().min(3);
        let (xs, ys) = (&bins[bins.len() - k..], &first_harmonic[bins.len() - k..]);
        if k < 2 || ys.iter().any(|v| *v <= 0.0) {
            0.0
        } else {
            crate::numerics::fit::log_log_slope(xs, ys).unwrap_or(0.0).clamp(-6.0, 2.0)
        }
    });

    let a = delta_model_matrix(measurements, &bins, gamma, options.k_max, tail_exponent);
    let b = DVector::from_iterator(measurements.len(), measurements.iter().map(|m| m.chi));
    // equilibrate columns before regularizing
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm().max(f64::MIN_POSITIVE)).collect();
    let mut scaled = a.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= norms[j];
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let lambda = options.ridge * smax * smax;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let utb = u.transpose() * &b;
    let mut coef = DVector::zeros(bins.len());
    for (i, s) in svd.singular_values.iter().enumerate() {
        coef[i] = utb[i] * s / (s * s + lambda);
    }
    let x = vt.transpose() * coef;
    let value: Vec<f64> = x.iter().zip(&norms).map(|(v, n)| v / n).collect();

    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let warning = (cond > 1e8 || measurements.len() < bins.len())
        .then(|| format!("ill-conditioned reconstruction (condition number {cond:.3e}); ridge-regularized"));
    Ok(ReconstructedSpectrum { omega: bins, value, tail_exponent, warning })
}

/// Relaxation process probed by a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxationKind {
    T1,
    T2Star,
    SpinLockResonant,
    SpinLockDetuned,
}

/// Noise and drive parameters for [`relaxation_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationInputs {
    pub psd_par: SpectralDensity,
    pub psd_perp: SpectralDensity,
    pub gamma: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub delta_omega: f64,
}

/// Golden-rule relaxation rate (1/s).
pub fn relaxation_rate(kind: RelaxationKind, p: &RelaxationInputs) -> f64 {
    let g2 = p.gamma * p.gamma;
    let perp = g2 * p.psd_perp.evaluate(p.omega0);
    match kind {
        RelaxationKind::T1 => 0.5 * perp,
        RelaxationKind::T2Star => 0.25 * perp + 0.5 * g2 * p.psd_par.evaluate(0.0),
        RelaxationKind::SpinLockResonant => 0.25 * perp + 0.5 * g2 * p.psd_par.evaluate(p.omega1),
        RelaxationKind::SpinLockDetuned => {
            let w2 = p.omega1 * p.omega1 + p.delta_omega * p.delta_omega;
            let weff = w2.sqrt();
            if w2 == 0.0 {
                return 0.25 * perp + 0.5 * g2 * p.psd_par.evaluate(0.0);
            }
            0.25 * (1.0 + p.delta_omega * p.delta_omega / w2) * perp
                + 0.5 * (p.omega1 * p.omega1 / w2) * g2 * p.psd_par.evaluate(weff)
        }
    }
}

/// Fermi golden-rule transition rate `2γ²S(ω01)|m|²`.
pub fn golden_rule_rate(matrix_element_sq: f64, psd: &SpectralDensity, gamma: f64, omega01: f64) -> Result<f64> {
    ensure((0.0..=1.0).contains(&matrix_element_sq), || {
        format!("squared matrix element must be in [0, 1], got {matrix_element_sq}")
    })?;
    Ok(2.0 * gamma * gamma * psd.evaluate(omega01) * matrix_element_sq)
}

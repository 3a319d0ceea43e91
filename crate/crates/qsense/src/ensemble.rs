//! Multi-qubit sensing: ensemble and GHZ scaling, collective spin states,
//! one-axis twisting and squeezing parameters.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::io::write_columns;
use crate::numerics::optimize::golden_section;
use crate::numerics::Rng;

/// GHZ Ramsey fringe `sin²(Mω0t/2)`.
pub fn ghz_probability(m: usize, omega0: f64, t: f64) -> f64 {
    (0.5 * m as f64 * omega0 * t).sin().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Uncorrelated,
    Ghz,
}

/// Quantum Cramér-Rao bound for `M` probes and `N` repetitions:
/// `e^χ/(γt√(MN))` uncorrelated, `e^χ/(γMt√N)` GHZ.
pub fn qcrb_scaling(m: usize, n: usize, t: f64, chi: f64, gamma: f64, kind: ProbeKind) -> Result<f64> {
    ensure(m >= 1 && n >= 1, || format!("M and N must be >= 1, got {m}, {n}"))?;
    ensure(t > 0.0 && gamma > 0.0, || "t and gamma must be positive".into())?;
    ensure(chi >= 0.0, || format!("chi must be >= 0, got {chi}"))?;
    let (m, n) = (m as f64, n as f64);
    Ok(match kind {
        ProbeKind::Uncorrelated => chi.exp() / (gamma * t * (m * n).sqrt()),
        ProbeKind::Ghz => chi.exp() / (gamma * m * t * n.sqrt()),
    })
}

/// GHZ bound when every qubit dephases independently, so the entangled
/// coherence decays with `Mχ`.
pub fn ghz_qcrb_dephased(m: usize, n: usize, t: f64, chi: f64, gamma: f64) -> Result<f64> {
    qcrb_scaling(m, n, t, m as f64 * chi, gamma, ProbeKind::Ghz)
}

/// Symmetric state of `M` spin-½ particles in the Dicke basis
/// `|J = M/2, m⟩`, stored from `m = −J` up to `m = +J`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveSpinState {
    qubits: usize,
    amps: DVector<Complex64>,
}

/// First and second moments of the collective spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMoments {
    pub mean: Vector3<f64>,
    /// Symmetrized covariance `½⟨{J_a, J_b}⟩ − ⟨J_a⟩⟨J_b⟩`.
    pub cov: Matrix3<f64>,
    /// `⟨J²⟩`.
    pub total: f64,
}

impl SpinMoments {
    /// `ΔJ_n` along a unit direction.
    pub fn spread(&self, n: &Vector3<f64>) -> f64 {
        (n.transpose() * self.cov * n)[(0, 0)].max(0.0).sqrt()
    }
}

fn unit(v: [f64; 3]) -> Result<Vector3<f64>> {
    let v = Vector3::from(v);
    let norm = v.norm();
    ensure(norm > 0.0 && norm.is_finite(), || "direction must be a nonzero vector".into())?;
    ensure((norm - 1.0).abs() < 1e-9, || format!("direction must be a unit vector, norm {norm}"))?;
    Ok(v)
}

impl CollectiveSpinState {
    pub fn new(qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        ensure(qubits >= 1, || "need at least one qubit".into())?;
        ensure(amps.len() == qubits + 1, || format!("expected {} amplitudes, got {}", qubits + 1, amps.len()))?;
        let amps = DVector::from_vec(amps);
        let norm = amps.norm();
        ensure((norm - 1.0).abs() < 1e-12, || format!("state must be normalized, norm {norm}"))?;
        Ok(Self { qubits, amps })
    }

    /// Normalized random state with Gaussian amplitudes.
    pub fn random(qubits: usize, rng: &mut Rng) -> Result<Self> {
        let raw: Vec<Complex64> = (0..=qubits)
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let n = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Self::new(qubits, raw.into_iter().map(|z| z / n).collect())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn j(&self) -> f64 {
        0.5 * self.qubits as f64
    }

    /// Amplitude of `|J, m⟩`; `index = m + J`.
    pub fn amplitudes(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `(J_x, J_y, J_z)` as dense matrices.
    pub fn operators(qubits: usize) -> [DMatrix<Complex64>; 3] {
        let d = qubits + 1;
        let j = 0.5 * qubits as f64;
        let mut jp = DMatrix::zeros(d, d);
        let mut jz = DMatrix::zeros(d, d);
        for k in 0..d {
            let m = k as f64 - j;
            jz[(k, k)] = Complex64::new(m, 0.0);
            if k + 1 < d {
                jp[(k + 1, k)] = Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
            }
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm) * Complex64::new(0.5, 0.0);
        let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
        [jx, jy, jz]
    }

    pub fn moments(&self) -> SpinMoments {
        let ops = Self::operators(self.qubits);
        let applied: Vec<DVector<Complex64>> = ops.iter().map(|o| o * &self.amps).collect();
        let mean = Vector3::from_fn(|a, _| self.amps.dotc(&applied[a]).re);
        let cov = Matrix3::from_fn(|a, b| applied[a].dotc(&applied[b]).re - mean[a] * mean[b]);
        let total = applied.iter().map(|v| v.norm_squared()).sum();
        SpinMoments { mean, cov, total }
    }

    /// Rotation `exp(−iθ n·J)`.
    pub fn rotated(&self, axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = unit(axis)?;
        let ops = Self::operators(self.qubits);
        let gen = &ops[0] * Complex64::new(n[0], 0.0) + &ops[1] * Complex64::new(n[1], 0.0) + &ops[2] * Complex64::new(n[2], 0.0);
        let eig = gen.symmetric_eigen();
        let u = &eig.eigenvectors;
        let phases = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| Complex64::from_polar(1.0, -angle * l)));
        let amps = u * DMatrix::from_diagonal(&phases) * u.adjoint() * &self.amps;
        Ok(Self { qubits: self.qubits, amps })
    }
}

/// Coherent spin state: all qubits along `direction`.
pub fn css(qubits: usize, direction: [f64; 3]) -> Result<CollectiveSpinState> {
    ensure(qubits >= 1, || "need at least one qubit".into())?;
    let n = unit(direction)?;
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let total = qubits as i32;
    let ln_fact = |k: i32| libm::lgamma(k as f64 + 1.0);
    let amps = (0..=total)
        .map(|up| {
            // `up` qubits in |1⟩, m = up − J
            let binom = (0.5 * (ln_fact(total) - ln_fact(up) - ln_fact(total - up))).exp();
            Complex64::from_polar(binom * c.powi(up) * s.powi(total - up), (total - up) as f64 * phi)
        })
        .collect::<Vec<_>>();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    CollectiveSpinState::new(qubits, amps.into_iter().map(|z| z / norm).collect())
}

/// Evolution under `χJ_z²` for `chi_t` radians: `|m⟩ → e^{−iχt m²}|m⟩`.
pub fn one_axis_twisting(state: &CollectiveSpinState, chi_t: f64) -> CollectiveSpinState {
    let j = state.j();
    let amps = state.amps.map_with_location(|k, _, a| {
        let m = k as f64 - j;
        a * Complex64::from_polar(1.0, -chi_t * m * m)
    });
    CollectiveSpinState { qubits: state.qubits, amps }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingParameters {
    /// `ΔJ_α/√(|⟨J_γ⟩|/2)`.
    pub xi: f64,
    /// `√M·min ΔJ_⊥/|⟨J⟩|` over the plane transverse to the mean spin.
    pub xi_r: f64,
    /// Angle of the minimizing transverse direction, measured from
    /// `ẑ × n̂` (or `ŷ` when the mean spin is along `z`) towards `n̂ × (ẑ × n̂)`.
    pub angle: f64,
}

/// Orthonormal pair spanning the plane transverse to `n`.
fn transverse_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let z = Vector3::z();
    let u = z.cross(n);
    let u = if u.norm() < 1e-9 { Vector3::y() } else { u.normalize() };
    (u, n.cross(&u))
}

/// Minimum transverse spread: 256-angle scan followed by golden-section
/// refinement. Returns `(ΔJ_min, angle)`.
fn min_transverse_spread(mom: &SpinMoments, n: &Vector3<f64>) -> (f64, f64) {
    let (u, v) = transverse_basis(n);
    let var = |a: f64| mom.spread(&(u * a.cos() + v * a.sin())).powi(2);
    let step = PI / 256.0;
    let best = (0..256).map(|k| k as f64 * step).fold((0.0, f64::INFINITY), |b, a| {
        let x = var(a);
        if x < b.1 {
            (a, x)
        } else {
            b
        }
    });
    let a = golden_section(var, best.0 - step, best.0 + step, 1e-12);
    let (a, x) = if var(a) <= best.1 { (a, var(a)) } else { best };
    (x.max(0.0).sqrt(), a.rem_euclid(PI))
}

/// Squeezing parameters of `state` for the axis pair (`alpha`, `gamma`).
pub fn squeezing_parameters(state: &CollectiveSpinState, alpha_axis: [f64; 3], gamma_axis: [f64; 3]) -> Result<SqueezingParameters> {
    let (a, g) = (unit(alpha_axis)?, unit(gamma_axis)?);
    let mom = state.moments();
    let jg = mom.mean.dot(&g).abs();
    let len = mom.mean.norm();
    if jg < 1e-12 || len < 1e-12 {
        return Err(Error::Undefined(format!("mean spin vanishes (|⟨J_γ⟩| = {jg:e}, |⟨J⟩| = {len:e})")));
    }
    let xi = mom.spread(&a) / (0.5 * jg).sqrt();
    let (spread, angle) = min_transverse_spread(&mom, &(mom.mean / len));
    Ok(SqueezingParameters { xi, xi_r: (state.qubits as f64).sqrt() * spread / len, angle })
}

/// One-axis-twisting scan from a CSS along `x`: `(chi_t, ξ_R, angle)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingScan {
    pub chi_t: Vec<f64>,
    pub xi_r: Vec<f64>,
    pub angle: Vec<f64>,
}

impl SqueezingScan {
    pub fn minimum(&self) -> (f64, f64, f64) {
        let i = (0..self.xi_r.len()).fold(0, |b, i| if self.xi_r[i] < self.xi_r[b] { i } else { b });
        (self.chi_t[i], self.xi_r[i], self.angle[i])
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_columns(w, &["chi_t", "xi_R", "angle_rad"], &[&self.chi_t, &self.xi_r, &self.angle])
    }
}

pub fn squeezing_scan(qubits: usize, chi_ts: &[f64]) -> Result<SqueezingScan> {
    let start = css(qubits, [1.0, 0.0, 0.0])?;
    let rows = chi_ts
        .par_iter()
        .map(|&c| {
            let s = one_axis_twisting(&start, c);
            squeezing_parameters(&s, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]).map(|p| (c, p.xi_r, p.angle))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SqueezingScan {
        chi_t: rows.iter().map(|r| r.0).collect(),
        xi_r: rows.iter().map(|r| r.1).collect(),
        angle: rows.iter().map(|r| r.2).collect(),
    })
}

/// Random unit vector, uniform on the sphere.
pub fn random_direction(rng: &mut Rng) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let a: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    [r * a.cos(), r * a.sin(), z]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{linspace, stream_rng};
    use crate::protocols::ramsey_probability;
    use rustfft::FftPlanner;

    #[test]
    fn ghz_examples() {
        for t in [0.0, 0.3, 1.7] {
            assert_eq!(ghz_probability(1, 2.0, t), ramsey_probability(2.0, t));
        }
        assert!((ghz_probability(3, 1.0, PI / 3.0) - 1.0).abs() < 1e-15);
        let (w0, n) = (2.0 * PI * 5.0, 1024);
        for m in [1usize, 2, 3, 7] {
            let dt = 1.0 / n as f64;
            let mut x: Vec<Complex64> = (0..n).map(|i| Complex64::new(ghz_probability(m, w0, i as f64 * dt) - 0.5, 0.0)).collect();
            FftPlanner::new().plan_fft_forward(n).process(&mut x);
            let peak = (1..n / 2).fold(1, |b, k| if x[k].norm() > x[b].norm() { k } else { b });
            assert_eq!(peak, (m as f64 * w0 / (2.0 * PI)).round() as usize);
            // fringes over one single-qubit period
            let p: Vec<f64> = linspace(0.0, 2.0 * PI / w0, 4001).iter().map(|&t| ghz_probability(m, w0, t)).collect();
            let maxima = p.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).count();
            assert_eq!(maxima, m);
        }
    }

    #[test]
    fn qcrb_ratios() {
        for m in [1usize, 2, 3, 5, 10] {
            let u = qcrb_scaling(m, 100, 0.5, 0.2, 1.3, ProbeKind::Uncorrelated).unwrap();
            let g = qcrb_scaling(m, 100, 0.5, 0.2, 1.3, ProbeKind::Ghz).unwrap();
            assert!((u / g - (m as f64).sqrt()).abs() < 1e-12);
        }
        // at t = T2* (χ = 1) with M-fold dephasing the entangled state does worse
        let m = 10;
        let single = qcrb_scaling(m, 1, 1.0, 1.0, 1.0, ProbeKind::Uncorrelated).unwrap();
        assert!(ghz_qcrb_dephased(m, 1, 1.0, 1.0, 1.0).unwrap() > single);
        // at the GHZ optimum t = T2*/M the gain is gone: e^χ/(γMt√N) with Mt = T2*
        let g_opt = ghz_qcrb_dephased(m, 1, 1.0 / m as f64, 1.0 / m as f64, 1.0).unwrap();
        let u_opt = qcrb_scaling(m, 1, 0.5, 0.5, 1.0, ProbeKind::Uncorrelated).unwrap();
        assert!(g_opt >= u_opt / (m as f64).sqrt());
    }

    #[test]
    fn css_moments() {
        let m = 12;
        let z = css(m, [0.0, 0.0, 1.0]).unwrap();
        assert!((z.amplitudes()[m].norm() - 1.0).abs() < 1e-15);
        let mom = z.moments();
        assert!((mom.mean[2] - 6.0).abs() < 1e-12);
        assert!((mom.spread(&Vector3::x()) - (m as f64).sqrt() / 2.0).abs() < 1e-12);
        assert!((mom.spread(&Vector3::y()) - (m as f64).sqrt() / 2.0).abs() < 1e-12);
        let mut rng = stream_rng(6, 0);
        for _ in 0..10 {
            let d = random_direction(&mut rng);
            let s = css(m, d).unwrap();
            let mom = s.moments();
            for k in 0..3 {
                assert!((mom.mean[k] - 6.0 * d[k]).abs() < 1e-10, "{d:?}: {:?}", mom.mean);
            }
            let p = squeezing_parameters(&s, transverse_basis(&Vector3::from(d)).0.into(), d).unwrap();
            assert!((p.xi_r - 1.0).abs() < 1e-9 && (p.xi - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn twisting_preserves_norm_and_jz() {
        let s = css(9, [0.6, 0.0, 0.8]).unwrap();
        assert_eq!(one_axis_twisting(&s, 0.0), s);
        for c in [0.01, 0.3, 2.0, 17.0] {
            let t = one_axis_twisting(&s, c);
            assert!((t.norm() - 1.0).abs() < 1e-12);
            let (a, b) = (s.moments(), t.moments());
            assert!((a.mean[2] - b.mean[2]).abs() < 1e-12);
            assert!((b.total - 4.5 * 5.5).abs() < 1e-10);
        }
    }

    #[test]
    fn twisting_squeezes() {
        let scan = squeezing_scan(20, &linspace(0.0, 0.3, 121)).unwrap();
        let (c, xi, angle) = scan.minimum();
        assert!(xi < 1.0 && c > 0.0, "{xi}");
        assert!(angle.abs() > 1e-3 && (angle - PI).abs() > 1e-3);
        assert!((scan.xi_r[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uncertainty_relation_on_random_states() {
        let mut rng = stream_rng(10, 0);
        let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
        for _ in 0..100 {
            let m = rng.random_range(1..=16);
            let s = one_axis_twisting(&CollectiveSpinState::random(m, &mut rng).unwrap(), rng.random_range(0.0..3.0));
            let mom = s.moments();
            assert!((mom.total - s.j() * (s.j() + 1.0)).abs() < 1e-9);
            for k in 0..3 {
                let (a, b, g) = (axes[k], axes[(k + 1) % 3], (k + 2) % 3);
                assert!(mom.spread(&a) * mom.spread(&b) >= 0.5 * mom.mean[g].abs() - 1e-12);
            }
        }
    }

    #[test]
    fn rotation_and_undefined() {
        let s = css(4, [0.0, 0.0, 1.0]).unwrap().rotated([0.0, 1.0, 0.0], PI / 2.0).unwrap();
        let mean = s.moments().mean;
        assert!((mean.norm() - 2.0).abs() < 1e-12 && mean[2].abs() < 1e-12);
        let dicke = CollectiveSpinState::new(2, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert!(matches!(squeezing_parameters(&dicke, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]), Err(Error::Undefined(_))));
        assert!(CollectiveSpinState::new(2, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }
}

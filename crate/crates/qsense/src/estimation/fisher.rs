//! Classical and quantum Fisher information, Cramér-Rao bounds.

use nalgebra::Complex;
use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::qubit::{Mat2, QubitState};

/// Richardson-extrapolated difference quotient (Ridders' tableau).
/// `quotient(h)` must have an error expansion in even powers of `h`.
fn ridders(quotient: impl Fn(f64) -> f64, h0: f64) -> (f64, f64) {
    const TAB: usize = 30;
    const CON: f64 = 2.0;
    const CON2: f64 = CON * CON;
    let mut a = [[0.0f64; TAB]; TAB];
    let mut h = h0;
    a[0][0] = quotient(h);
    let (mut best, mut err) = (a[0][0], f64::INFINITY);
    for i in 1..TAB {
        h /= CON;
        a[0][i] = quotient(h);
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}

/// First derivative of `f` at `x`, with an error estimate.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, h0: f64) -> (f64, f64) {
    ridders(|h| (f(x + h) - f(x - h)) / (2.0 * h), h0)
}

fn second_derivative(f: impl Fn(f64) -> f64, x: f64, h0: f64) -> f64 {
    let fx = f(x);
    ridders(|h| (f(x + h) - 2.0 * fx + f(x - h)) / (h * h), h0).0
}

/// Fisher information of a binary measurement and the matching bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInfo {
    /// Information about the accumulated phase per unit signal, `F_V/γ²`.
    pub fisher: f64,
    /// Information about `V` itself.
    pub fisher_v: f64,
    /// `ΔV = 1/(γ√(N F))`.
    pub bound: f64,
}

/// `F = Σ_x (∂_V p(x|V))²/p(x|V)` for outcomes {1, 0} with `p(1|V) = p_model(V)`,
/// by extrapolated central differences.
///
/// Where `p` is 0 or 1 the quotient is replaced by its limit `2|∂²p|`.
pub fn fisher_information(p_model: impl Fn(f64) -> f64, v: f64, n: usize, gamma: f64) -> Result<FisherInfo> {
    fisher_information_with_step(p_model, v, n, gamma, 1e-2 * v.abs().max(1.0))
}

/// As [`fisher_information`] with an explicit initial difference step.
pub fn fisher_information_with_step(p_model: impl Fn(f64) -> f64, v: f64, n: usize, gamma: f64, h0: f64) -> Result<FisherInfo> {
    ensure(n >= 1, || "N must be at least 1".into())?;
    ensure(gamma > 0.0, || format!("gamma must be positive, got {gamma}"))?;
    ensure(h0 > 0.0, || format!("difference step must be positive, got {h0}"))?;
    let p = p_model(v);
    ensure((0.0..=1.0).contains(&p), || format!("model probability {p} outside [0, 1]"))?;
    let q = p * (1.0 - p);
    let fisher_v = if q < 1e-12 {
        2.0 * second_derivative(&p_model, v, h0).abs()
    } else {
        derivative(&p_model, v, h0).0.powi(2) / q
    };
    let fisher = fisher_v / (gamma * gamma);
    Ok(FisherInfo { fisher, fisher_v, bound: 1.0 / (gamma * (n as f64 * fisher).sqrt()) })
}

/// Probability of the `+x` outcome after Ramsey evolution:
/// `½[1 + e^{−χ} sin(γVt)]`.
pub fn ramsey_outcome_probability(gamma: f64, v: f64, t: f64, chi: f64) -> f64 {
    0.5 * (1.0 + (-chi).exp() * (gamma * v * t).sin())
}

/// `F = t²cos²(γVt)e^{−2χ}/(1 − e^{−2χ}sin²(γVt))`.
pub fn ramsey_fisher(gamma: f64, v: f64, t: f64, chi: f64) -> f64 {
    let d = (-2.0 * chi).exp();
    let phi = gamma * v * t;
    t * t * phi.cos().powi(2) * d / (1.0 - d * phi.sin().powi(2))
}

/// `ΔV_N = e^χ/(γt√N)`.
pub fn ramsey_qcrb(gamma: f64, t: f64, chi: f64, n: usize) -> f64 {
    chi.exp() / (gamma * t * (n as f64).sqrt())
}

/// Sensor state after Ramsey evolution under a signal `V` with decay `χ`.
pub fn ramsey_state(gamma: f64, v: f64, t: f64, chi: f64) -> QubitState {
    let c = Complex64::new(0.0, 0.5) * Complex64::from_polar((-chi).exp(), gamma * v * t);
    QubitState { rho00: 0.5, rho11: 0.5, coherence: c }
}

/// `∂ρ/∂V` of [`ramsey_state`].
pub fn ramsey_state_derivative(gamma: f64, v: f64, t: f64, chi: f64) -> Mat2 {
    let c = ramsey_state(gamma, v, t, chi).coherence * Complex64::new(0.0, gamma * t);
    let z = Complex64::new(0.0, 0.0);
    Mat2::new(z, c.conj(), c, z)
}

/// Quantum Fisher information `Σ_{jk} 2|A_jk|²/(λ_j + λ_k)` with
/// `A = ∂ρ` in the eigenbasis of `ρ`; pairs with `λ_j + λ_k = 0` are skipped.
pub fn quantum_fisher_information(rho: &QubitState, drho: &Mat2) -> Result<f64> {
    let herm = (drho - drho.adjoint()).iter().all(|z| z.norm() < 1e-9);
    ensure(herm, || "derivative of the state must be Hermitian".into())?;
    ensure(drho.trace().norm() < 1e-9, || "derivative of the state must be traceless".into())?;
    let eig = rho.matrix().symmetric_eigen();
    let u = &eig.eigenvectors;
    let a = u.adjoint() * drho * u;
    let mut f = 0.0;
    for j in 0..2 {
        for k in 0..2 {
            let s = eig.eigenvalues[j] + eig.eigenvalues[k];
            if s > 1e-14 {
                f += 2.0 * a[(j, k)].norm_sqr() / s;
            }
        }
    }
    Ok(f)
}

/// `(ΔH)² = ⟨H²⟩ − ⟨H⟩²`, square-rooted.
pub fn energy_spread(state: &QubitState, h: &Mat2) -> f64 {
    let rho = state.matrix();
    let m1: Complex<f64> = (rho * h).trace();
    let m2: Complex<f64> = (rho * h * h).trace();
    (m2.re - m1.re * m1.re).max(0.0).sqrt()
}

/// Pure-state bound `ΔV ≥ 1/(2γ√N ΔH)` for a generator `H` with
/// `|ψ_V⟩ = e^{−iγV H}|ψ⟩`.
pub fn pure_state_bound(delta_h: f64, gamma: f64, n: usize) -> f64 {
    1.0 / (2.0 * gamma * (n as f64).sqrt() * delta_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stream_rng;
    use crate::qubit::sigma_z;
    use rand::Rng as _;
    use std::f64::consts::PI;

    #[test]
    fn derivative_accuracy() {
        let (d, e) = derivative(f64::sin, 0.7, 0.1);
        assert!((d - 0.7f64.cos()).abs() < 1e-12 && e < 1e-10);
        assert!((second_derivative(f64::exp, 0.3, 0.1) - 0.3f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn numeric_matches_ramsey_closed_form() {
        let mut rng = stream_rng(2, 0);
        let (gamma, t, chi) = (1.7, 0.8, 0.3);
        for _ in 0..20 {
            let v = rng.random_range(-5.0..5.0);
            let f = fisher_information(|x| ramsey_outcome_probability(gamma, x, t, chi), v, 1, gamma).unwrap();
            let exact = ramsey_fisher(gamma, v, t, chi);
            assert!((f.fisher - exact).abs() <= 1e-4 * exact + 1e-12, "{v}: {} vs {exact}", f.fisher);
        }
    }

    #[test]
    fn ramsey_bias_points() {
        let (gamma, t, chi) = (2.0, 0.5, 0.2);
        let v_null = 0.5 * PI / (gamma * t);
        assert!(ramsey_fisher(gamma, v_null, t, chi) < 1e-30);
        let v_opt = PI / (gamma * t);
        assert!((ramsey_fisher(gamma, v_opt, t, chi) - t * t * (-2.0 * chi).exp()).abs() < 1e-14);
        for v in [0.1, 0.9, 2.2] {
            assert!((ramsey_fisher(gamma, v, t, 0.0) - t * t).abs() < 1e-14);
        }
        let f = fisher_information(|x| ramsey_outcome_probability(gamma, x, t, chi), v_opt, 100, gamma).unwrap();
        assert!((f.bound / ramsey_qcrb(gamma, t, chi, 100) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn limit_at_certain_outcome() {
        // p = sin²(θ/2) has F = 1 in θ everywhere, including θ = 0
        let f = fisher_information(|x: f64| (0.5 * x).sin().powi(2), 0.0, 1, 1.0).unwrap();
        assert!((f.fisher - 1.0).abs() < 1e-6);
        let f = fisher_information(|x: f64| (0.5 * x).sin().powi(2), PI, 1, 1.0).unwrap();
        assert!((f.fisher - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quantum_fisher() {
        let (gamma, t) = (1.3, 0.9);
        let qfi = quantum_fisher_information(&ramsey_state(gamma, 0.4, t, 0.0), &ramsey_state_derivative(gamma, 0.4, t, 0.0)).unwrap();
        assert!((qfi / (gamma * gamma) - t * t).abs() < 1e-12);
        let mixed = QubitState { rho00: 0.5, rho11: 0.5, coherence: Complex64::new(0.0, 0.0) };
        assert_eq!(quantum_fisher_information(&mixed, &Mat2::zeros()).unwrap(), 0.0);
        assert!(quantum_fisher_information(&mixed, &Mat2::identity()).is_err());
        let mut rng = stream_rng(4, 0);
        for _ in 0..20 {
            let (v, chi) = (rng.random_range(-3.0..3.0), rng.random_range(0.0..1.5));
            let qfi = quantum_fisher_information(&ramsey_state(gamma, v, t, chi), &ramsey_state_derivative(gamma, v, t, chi)).unwrap();
            assert!((qfi / (gamma * gamma) - t * t * (-2.0 * chi).exp()).abs() < 1e-10);
            assert!(ramsey_fisher(gamma, v, t, chi) <= qfi / (gamma * gamma) + 1e-12);
            let bound = 1.0 / (qfi * 10.0).sqrt();
            assert!((bound - ramsey_qcrb(gamma, t, chi, 10)).abs() < 1e-12 * bound);
        }
    }

    #[test]
    fn pure_state_generator_bound() {
        let (gamma, t, n) = (0.7, 2.0, 25);
        let plus = ramsey_state(gamma, 0.0, t, 0.0);
        let h = sigma_z() * Complex64::new(0.5 * t, 0.0);
        let b = pure_state_bound(energy_spread(&plus, &h), gamma, n);
        assert!((b - ramsey_qcrb(gamma, t, 0.0, n)).abs() < 1e-14);
    }
}

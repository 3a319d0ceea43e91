use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qsense::estimation::{allan_variance, qft_distribution, ramsey_outcome_probability, AllanSeries};
use qsense::qubit::{evolve, rotation, InternalHamiltonian, QubitState, SignalHamiltonian};
use qsense::runner::validate_value;
use serde_json::json;

fn unit(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-3).then(|| v.map(|x| x / n))
}

proptest! {
    #[test]
    fn rotations_are_unitary(ax in prop::array::uniform3(-1.0f64..1.0), angle in -10.0f64..10.0) {
        prop_assume!(unit(ax).is_some());
        let u = rotation(unit(ax).unwrap(), angle);
        let err = (u.adjoint() * u - qsense::qubit::Mat2::identity()).norm();
        prop_assert!(err < 1e-12, "‖U†U − 1‖ = {err}");
        let det = u.determinant();
        prop_assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn evolution_keeps_states_physical(
        r in prop::array::uniform3(-0.57f64..0.57),
        omega0 in -5.0f64..5.0,
        amp in 0.0f64..3.0,
        f in 0.1f64..2.0,
        t in 0.0f64..4.0,
    ) {
        let rho = QubitState::from_bloch(r).unwrap();
        let hv = SignalHamiltonian::new(1.0).unwrap()
            .with_parallel(move |s| amp * (2.0 * PI * f * s).cos())
            .with_perp_x(move |s| 0.5 * amp * (2.0 * PI * f * s).sin());
        let out = evolve(&rho, &InternalHamiltonian::new(omega0).unwrap(), &hv, t, 0.01).unwrap();
        prop_assert!(out.is_physical(1e-10));
        prop_assert!((out.purity() - rho.purity()).abs() < 1e-10);
    }

    #[test]
    fn ramsey_probability_is_a_probability(g in 0.1f64..3.0, v in -5.0f64..5.0, t in 0.0f64..5.0, chi in 0.0f64..4.0) {
        let p = ramsey_outcome_probability(g, v, t, chi);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn qft_distribution_is_normalised(phi in 0.0f64..1.0, bits in 1u32..9) {
        let p = qft_distribution(phi, bits).unwrap();
        prop_assert_eq!(p.len(), 1usize << bits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(p.iter().all(|x| *x >= -1e-15));
    }

    #[test]
    fn allan_variance_is_non_negative(xs in prop::collection::vec(-100.0f64..100.0, 3..64), m in 1usize..8) {
        let s = AllanSeries::new(xs.clone(), 0.1).unwrap();
        if let Ok(v) = allan_variance(&s, m) {
            prop_assert!(v >= 0.0);
        } else {
            prop_assert!(2 * m >= xs.len());
        }
    }

    #[test]
    fn validation_never_panics(omega0 in prop::num::f64::ANY, trials in any::<i64>(), name in "[a-z_]{0,12}") {
        let cfg = json!({"experiment": name, "parameters": {"omega0": omega0}, "trials": trials});
        let _ = validate_value(&cfg);
    }
}

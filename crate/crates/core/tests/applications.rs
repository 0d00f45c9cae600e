use std::f64::consts::TAU;

use carleson_core::applications::{gradient_measure, lp_flatten, volterra_demo};
use carleson_core::boundary::GridFunction;
use carleson_core::measure::derivative_measure;
use carleson_core::outer::{derivative_cell_depth, ConstantModulus, LogSymbol, Polynomial};
use proptest::prelude::*;

#[test]
fn gradient_measure_of_cosine_is_that_of_z() {
    // The Herglotz integral of cos(2 pi theta) is z itself.
    let f = GridFunction::from_fn(10, |t| (TAU * t).cos()).unwrap();
    let grad = gradient_measure(&f).unwrap();
    let direct = derivative_measure(&Polynomial::monomial(1), derivative_cell_depth(10)).unwrap();
    assert_eq!(grad.len(), direct.len());
    for (a, b) in grad.atoms().iter().zip(direct.atoms()) {
        assert_eq!(a.point, b.point);
        assert!((a.weight - b.weight).abs() <= 1e-5 * b.weight);
    }
}

#[test]
fn volterra_seminorms_shrink_with_n() {
    let g = Polynomial::log_series(32);
    let r = volterra_demo(
        "log-series:32",
        &g,
        &ConstantModulus(1.0),
        &Polynomial::constant(1.0),
        &[0, 1, 4, 16],
        8,
    )
    .unwrap();
    for w in r.entries.windows(2) {
        assert!(w[1].seminorm <= w[0].seminorm);
        assert!(w[1].sup_norm_est <= w[0].sup_norm_est);
    }
    for p in &r.probe {
        assert!(p.seminorm > 0.0);
    }
    assert!(volterra_demo(
        "log",
        &LogSymbol,
        &ConstantModulus(1.0),
        &Polynomial::constant(1.0),
        &[4, 1],
        6
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flattening_caps_at_one(values in prop::collection::vec(-50.0f64..50.0, 256)) {
        let r = lp_flatten(8, &values).unwrap();
        prop_assert_eq!(r.violations, 0);
        for (p, v) in r.product.iter().zip(&values) {
            prop_assert!((p - v.abs().min(1.0)).abs() <= 1e-12);
        }
        prop_assert!(r.outer.log_modulus().values().iter().all(|&h| h <= 0.0));
        prop_assert!(r.sup() <= 1.0 + 1e-12);
    }
}

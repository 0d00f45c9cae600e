use std::f64::consts::TAU;

use carleson_core::boundary::GridFunction;
use carleson_core::geometry::DiscPoint;
use carleson_core::outer::{
    outer_derivative, outer_eval, poisson_extend, poisson_gradient, AnalyticSampler,
    BlaschkeProduct, HerglotzTransform, Modulus, OuterFunction,
};
use carleson_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

/// Direct `O(N)` sum of the Herglotz kernel at the grid midpoints.
fn herglotz_direct(h: &GridFunction, z: Complex64) -> Complex64 {
    let n = h.len() as f64;
    h.values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let xi = Complex64::from_polar(1.0, TAU * (j as f64 + 0.5) / n);
            v * (xi + z) / (xi - z) / n
        })
        .sum()
}

fn sample_points(limit: f64) -> Vec<DiscPoint> {
    let mut out = vec![DiscPoint::origin()];
    for k in 1..=6 {
        let r = limit * k as f64 / 6.0;
        for a in 0..7 {
            out.push(DiscPoint::from_polar(r, (a as f64 + 0.13) / 7.0));
        }
    }
    out
}

#[test]
fn transform_matches_direct_sum() {
    let h = GridFunction::from_fn(8, |t| {
        (TAU * 3.0 * t).sin() + if t < 0.3 { 2.0 } else { -0.5 }
    })
    .unwrap();
    let t = HerglotzTransform::new(&h);
    for p in sample_points(t.validity_radius()) {
        let fast = t.eval(p.to_complex()).unwrap().0;
        let slow = herglotz_direct(&h, p.to_complex());
        assert!((fast - slow).norm() < 1e-10, "{p:?}: {fast} vs {slow}");
    }
}

#[test]
fn ring_matches_pointwise_evaluation() {
    let h = GridFunction::from_fn(7, |t| (TAU * t).cos() * t).unwrap();
    let t = HerglotzTransform::new(&h);
    let radius = 0.8;
    for (k, v) in t.ring(radius).into_iter().enumerate() {
        let z = Complex64::from_polar(radius, TAU * h.midpoint(k));
        assert!((v - herglotz_direct(&h, z)).norm() < 1e-10);
    }
}

#[test]
fn constant_log_modulus_is_exact() {
    let e = OuterFunction::new(GridFunction::constant(14, 0.7));
    let v = e.value(Complex64::new(0.3, 0.4)).unwrap();
    assert!((v - Complex64::new(0.7f64.exp(), 0.0)).norm() < 1e-6);
    for p in sample_points(0.9) {
        let v = outer_eval(&e, &p).unwrap();
        assert!(
            (v - Complex64::new(0.7f64.exp(), 0.0)).norm() < 1e-12,
            "{p:?}"
        );
        assert!(outer_derivative(&e, &p).unwrap().norm() < 1e-10);
    }
}

#[test]
fn constant_near_the_boundary_carries_the_midpoint_aliasing_term() {
    // Midpoint sum of the kernel alone: (1 - z^N) / (1 + z^N).
    let depth = 10;
    let t = HerglotzTransform::new(&GridFunction::constant(depth, 0.7));
    let n = 1i32 << depth;
    for p in sample_points(t.validity_radius()) {
        let z = p.to_complex();
        let zn = z.powi(n);
        let expected = 0.7 * (1.0 - zn) / (1.0 + zn);
        assert!((t.eval(z).unwrap().0 - expected).norm() < 1e-12);
    }
}

#[test]
fn log_of_one_minus_xi_recovers_one_minus_z() {
    let h = GridFunction::from_fn(14, |t| {
        (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, TAU * t))
            .norm()
            .ln()
    })
    .unwrap();
    let e = OuterFunction::new(h);
    let v = outer_eval(&e, &DiscPoint::from_polar(0.5, 0.0)).unwrap();
    assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-3, "{v}");
}

#[test]
fn derivative_matches_finite_differences() {
    let h = GridFunction::from_fn(12, |t| {
        0.5 * (TAU * 2.0 * t).cos() + if (0.1..0.2).contains(&t) { 1.0 } else { 0.0 }
    })
    .unwrap();
    let e = OuterFunction::new(h);
    let step = 1e-6;
    for p in sample_points(0.9) {
        let z = p.to_complex();
        let d = outer_derivative(&e, &p).unwrap();
        let plus = e.value(z + step).unwrap();
        let minus = e.value(z - step).unwrap();
        let fd = (plus - minus) / (2.0 * step);
        assert!(
            (d - fd).norm() < 1e-4 * (1.0 + d.norm()),
            "{p:?}: {d} vs {fd}"
        );
    }
}

#[test]
fn poisson_extension_of_cosine_is_the_real_part() {
    let f = GridFunction::from_fn(10, |t| (TAU * t).cos()).unwrap();
    for p in sample_points(0.9) {
        let z = p.to_complex();
        assert!((poisson_extend(&f, &p).unwrap() - z.re).abs() < 1e-6);
        let g = poisson_gradient(&f, &p).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-6 && g[1].abs() < 1e-6, "{g:?}");
    }
}

#[test]
fn evaluation_past_the_validity_radius_is_refused() {
    let e = OuterFunction::one(8);
    let far = DiscPoint::from_polar(0.999, 0.2);
    assert!(matches!(
        outer_eval(&e, &far),
        Err(Error::TooCloseToBoundary { .. })
    ));
    let (m, moved) = e.modulus_at(&far);
    assert!(moved && (m - 1.0).abs() < 1e-12);
}

#[test]
fn blaschke_product_is_unimodular_on_the_circle() {
    let b =
        BlaschkeProduct::new(vec![Complex64::new(0.5, 0.1), Complex64::new(-0.3, -0.6)]).unwrap();
    for k in 0..64 {
        let xi = Complex64::from_polar(1.0, TAU * k as f64 / 64.0);
        assert!((b.value(xi).unwrap().norm() - 1.0).abs() < 1e-12);
    }
    assert!(b.value(Complex64::new(0.5, 0.1)).unwrap().norm() < 1e-15);
    assert!(BlaschkeProduct::new(vec![Complex64::new(1.0, 0.0)]).is_err());
}

fn log_modulus_strategy() -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-3.0f64..3.0, 256).prop_map(|v| GridFunction::new(8, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outer_functions_multiply(a in log_modulus_strategy(), b in log_modulus_strategy(),
                                r in 0.0f64..0.98, angle in 0.0f64..1.0) {
        let p = DiscPoint::from_polar(r, angle);
        let ea = OuterFunction::new(a.clone());
        let eb = OuterFunction::new(b.clone());
        let eab = OuterFunction::new(a.try_add(&b).unwrap());
        let lhs = outer_eval(&eab, &p).unwrap();
        let rhs = outer_eval(&ea, &p).unwrap() * outer_eval(&eb, &p).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm());
    }

    #[test]
    fn value_at_origin_is_the_geometric_mean(a in log_modulus_strategy()) {
        let e = OuterFunction::new(a.clone());
        let v = outer_eval(&e, &DiscPoint::origin()).unwrap();
        prop_assert!((v.re - a.mean().exp()).abs() <= 1e-12 * v.re && v.im.abs() <= 1e-12 * v.re);
    }

    #[test]
    fn modulus_is_the_poisson_extension(a in log_modulus_strategy(), r in 0.0f64..0.98, angle in 0.0f64..1.0) {
        let p = DiscPoint::from_polar(r, angle);
        let e = OuterFunction::new(a.clone());
        let (m, moved) = e.modulus_at(&p);
        prop_assert!(!moved);
        prop_assert!((m.ln() - poisson_extend(&a, &p).unwrap()).abs() < 1e-10);
    }
}

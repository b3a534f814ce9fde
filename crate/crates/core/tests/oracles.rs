mod common;

use std::f64::consts::{FRAC_PI_2, PI};

#[test]
fn weighted_integral_closed_forms() {
    // ∫(1−z²)^{1/2} = π/2 and ∫(1−z²)^{−1/2} = π.
    assert!((common::weighted_integral(3.0, |_, _| 1.0) - FRAC_PI_2).abs() < 1e-13);
    assert!((common::weighted_integral(1.0, |_, _| 1.0) - PI).abs() < 1e-12);
    assert!((common::nu_integral(3.0, |z, _| z * z) - 0.25).abs() < 1e-13);
}

#[test]
fn poly_derivatives() {
    assert_eq!(common::poly(&[1.0, 2.0, 3.0], 2.0), (17.0, 14.0, 6.0));
}

#[test]
fn m_roots_double_root_at_critical_exponent() {
    let (lo, hi) = common::m_roots(4.0, 4.0).unwrap();
    assert!((lo - 0.75).abs() < 1e-12 && (hi - 0.75).abs() < 1e-12);
    assert!(common::m_roots(4.0, 5.0).is_none());
}

//! Independent oracles for the integration tests.
//!
//! Nothing here calls into the crate: integrals use double-exponential
//! quadrature on the raw weight, and the admissibility roots are recovered
//! from the quadratic written out term by term.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// `∫_{-1}^{1} g(z) w(z) dz` with `w(z) = (1 − z²)^{(n−2)/2}`, by tanh-sinh.
///
/// `g` receives `z` and `1 − z²` computed without cancellation near the ends.
pub fn weighted_integral(n: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let h = 1.0 / 128.0;
    let half = (n - 2.0) / 2.0;
    let mut total = 0.0;
    let mut k: i64 = 0;
    loop {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        // 1 − tanh(u) = 2 / (1 + e^{2u}).
        let comp = 2.0 / (1.0 + (2.0 * u).exp());
        let x = 1.0 - comp;
        let dx = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        if comp == 0.0 || dx < 1e-300 {
            break;
        }
        let r2 = comp * (2.0 - comp);
        let w = r2.powf(half) * dx;
        let mut term = g(x, r2) * w;
        if k > 0 {
            term += g(-x, r2) * w;
        }
        total += term;
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    total * h
}

/// `∫ g dν_n` with the normalization also computed by quadrature.
pub fn nu_integral(n: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    weighted_integral(n, g) / weighted_integral(n, |_, _| 1.0)
}

/// `δ(β)` written out directly from its definition.
pub fn delta_direct(beta: f64, n: f64, p: f64) -> f64 {
    let first = (n - 1.0) / (n + 2.0) * beta * (p - 1.0);
    first * first - (n / (n + 2.0) * beta * (p - 1.0) + (1.0 + beta * (p - 2.0)) * (beta - 1.0))
}

/// Roots `(m₋, m₊)` of the admissible-`m` boundary, or `None` if `δ > 0` for every `β`.
///
/// The quadratic `δ(β) = Aβ² − 2Bβ + C` is recovered by sampling `δ` at
/// `β = −1, 0, 1`; then `δ = 0` in `s = 1/β` reads `Cs² − 2Bs + A = 0` and
/// `m = 1 + 2(s − 1)/p`.
pub fn m_roots(n: f64, p: f64) -> Option<(f64, f64)> {
    let (dm, d0, dp) = (delta_direct(-1.0, n, p), delta_direct(0.0, n, p), delta_direct(1.0, n, p));
    let c = d0;
    let a = 0.5 * (dp + dm) - c;
    let b = 0.25 * (dm - dp);
    let disc = b * b - a * c;
    if disc < -1e-14 {
        return None;
    }
    let r = disc.max(0.0).sqrt();
    let m = |s: f64| 1.0 + 2.0 * (s - 1.0) / p;
    Some((m((b - r) / c), m((b + r) / c)))
}

/// Monomial polynomial helpers: value, first and second derivative.
pub fn poly(c: &[f64], z: f64) -> (f64, f64, f64) {
    let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
    for &a in c.iter().rev() {
        dd = dd * z + 2.0 * d;
        d = d * z + v;
        v = v * z + a;
    }
    (v, d, dd)
}

/// Relative gap `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_gap(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

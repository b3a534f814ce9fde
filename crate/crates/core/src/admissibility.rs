//! Exponent thresholds, the discriminant `δ(β)`, admissible `m` and `β`
//! ranges, and the regularity coefficients used by the regularized flow.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::GridFn;
use crate::measure::{Quadrature, UltraParams};
use crate::operators::drift_prime;
use crate::spectral::spectral_derivatives;

/// Relative tolerance under which the discriminant is treated as zero.
pub const DISC_TIE: f64 = 1e-13;

/// `(2^#, 2^*)`: the Bakry–Émery exponent and the critical exponent.
///
/// `2^# = +∞` at `n = 1`; `2^* = +∞` for `n ≤ 2`.
pub fn thresholds(n: f64) -> (f64, f64) {
    let p_sharp = if n == 1.0 {
        f64::INFINITY
    } else {
        (2.0 * n * n + 1.0) / ((n - 1.0) * (n - 1.0))
    };
    let p_crit = if n > 2.0 {
        2.0 * n / (n - 2.0)
    } else {
        f64::INFINITY
    };
    (p_sharp, p_crit)
}

/// Coefficients `(A, B, C)` of `δ(β) = Aβ² − 2Bβ + C`.
pub fn delta_coeffs(n: f64, p: f64) -> (f64, f64, f64) {
    let r = (n - 1.0) * (p - 1.0) / (n + 2.0);
    (r * r + 2.0 - p, (n + 3.0 - p) / (n + 2.0), 1.0)
}

/// `δ(β) = Aβ² − 2Bβ + C`.
pub fn delta_of_beta(beta: f64, n: f64, p: f64) -> f64 {
    let (a, b, c) = delta_coeffs(n, p);
    a * beta * beta - 2.0 * b * beta + c
}

/// Coefficients `(b, c)` of the quadratic form, with `κ = β(p − 2) + 1`.
///
/// `δ(β) = b² − c`.
pub fn reduced_coeffs(beta: f64, n: f64, p: f64) -> (f64, f64) {
    let kappa = beta * (p - 2.0) + 1.0;
    let s = kappa + beta - 1.0;
    (
        (n - 1.0) * s / (n + 2.0),
        kappa * (beta - 1.0) + n * s / (n + 2.0),
    )
}

/// Factored form of `B² − AC`: `n (p−1)(2n − (n−2)p) / (n+2)²`.
pub fn factored_disc(n: f64, p: f64) -> f64 {
    n * (p - 1.0) * (2.0 * n - (n - 2.0) * p) / ((n + 2.0) * (n + 2.0))
}

/// `m = 1 + (2/p)(1/β − 1)`.
pub fn m_of_beta(beta: f64, p: f64) -> f64 {
    1.0 + 2.0 / p * (1.0 / beta - 1.0)
}

/// Inverse of [`m_of_beta`]: `1/β = 1 + p (m − 1) / 2`.
pub fn inv_beta_of_m(m: f64, p: f64) -> f64 {
    1.0 + 0.5 * p * (m - 1.0)
}

/// A closed interval of `β` values; ends may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl BetaInterval {
    pub fn contains(&self, beta: f64) -> bool {
        self.lo <= beta && beta <= self.hi
    }
}

/// A union of at most two closed `β` intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BetaSet {
    pub intervals: Vec<BetaInterval>,
}

impl BetaSet {
    pub fn contains(&self, beta: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(beta))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// The set of `β ≠ 0` with `1/β ∈ [s_lo, s_hi]`.
    fn from_reciprocal(s_lo: f64, s_hi: f64) -> Self {
        let inv = |s: f64| 1.0 / s;
        let intervals = if s_lo == 0.0 && s_hi == 0.0 {
            vec![]
        } else if s_lo >= 0.0 {
            let hi = if s_lo == 0.0 { f64::INFINITY } else { inv(s_lo) };
            vec![BetaInterval { lo: inv(s_hi), hi }]
        } else if s_hi <= 0.0 {
            let lo = if s_hi == 0.0 {
                f64::NEG_INFINITY
            } else {
                inv(s_hi)
            };
            vec![BetaInterval { lo, hi: inv(s_lo) }]
        } else {
            vec![
                BetaInterval {
                    lo: f64::NEG_INFINITY,
                    hi: inv(s_lo),
                },
                BetaInterval {
                    lo: inv(s_hi),
                    hi: f64::INFINITY,
                },
            ]
        };
        BetaSet { intervals }
    }
}

/// Shape of the admissible set at a given `(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeStatus {
    /// Two distinct roots; `m_minus < m_plus`.
    Interval,
    /// Discriminant zero up to [`DISC_TIE`]; a single admissible `m`.
    DoubleRoot,
    /// Negative discriminant.
    Empty,
    /// `A = B = 0`, so `δ ≡ 1` and no `β` is admissible at this exact point.
    Degenerate,
}

/// Everything known about admissibility at one `(n, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleRange {
    pub n: f64,
    pub p: f64,
    pub p_sharp: f64,
    pub p_crit: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `B² − AC`, expanded.
    pub disc: f64,
    pub m_minus: Option<f64>,
    pub m_plus: Option<f64>,
    pub status: RangeStatus,
    /// `R(n, p)`.
    pub beta: BetaSet,
    /// `β` values where the flow exponents are singular: `0` and `(n+2)/(n+2−p)`.
    pub excluded_beta: Vec<f64>,
    /// Upper end `n/(n−p)` of the regularity window, present only when `p < n`.
    pub beta_upper: Option<f64>,
}

impl AdmissibleRange {
    /// Whether `β` lies in `R(n, p)` and avoids the excluded values.
    pub fn admits_flow(&self, beta: f64) -> bool {
        self.beta.contains(beta) && self.excluded_beta.iter().all(|&x| x != beta)
    }
}

/// Admissible `m` range and its `β` preimage.
pub fn m_range(n: f64, p: f64) -> Result<AdmissibleRange> {
    if !(n.is_finite() && n > 0.0) {
        return domain(format!("n must be positive, got {n}"));
    }
    if !(p.is_finite() && p > 1.0) {
        return domain(format!("p must be finite and > 1, got {p}"));
    }
    let (p_sharp, p_crit) = thresholds(n);
    let (a, b, c) = delta_coeffs(n, p);
    let disc = b * b - a * c;

    // In s = 1/β, δ = β² (s² − 2Bs + A), so δ ≤ 0 ⇔ s ∈ [B − √disc, B + √disc].
    // At A = B = 0 the single root s = 0 gives an m value but no finite β.
    let (status, roots) = if a.abs() < 1e-14 && b.abs() < 1e-14 {
        (RangeStatus::Degenerate, Some((0.0, 0.0)))
    } else if disc.abs() < DISC_TIE * (1.0 + b * b + (a * c).abs()) {
        (RangeStatus::DoubleRoot, Some((b, b)))
    } else if disc < 0.0 {
        (RangeStatus::Empty, None)
    } else {
        let r = disc.sqrt();
        (RangeStatus::Interval, Some((b - r, b + r)))
    };

    let m_of_s = |s: f64| 1.0 + 2.0 * (s - 1.0) / p;
    let beta = roots
        .map(|(lo, hi)| BetaSet::from_reciprocal(lo, hi))
        .unwrap_or_default();
    let mut excluded_beta = vec![0.0];
    if p != n + 2.0 {
        excluded_beta.push((n + 2.0) / (n + 2.0 - p));
    }
    Ok(AdmissibleRange {
        n,
        p,
        p_sharp,
        p_crit,
        a,
        b,
        c,
        disc,
        m_minus: roots.map(|(lo, _)| m_of_s(lo)),
        m_plus: roots.map(|(_, hi)| m_of_s(hi)),
        status,
        beta,
        excluded_beta,
        beta_upper: (p < n).then(|| n / (n - p)),
    })
}

/// `R(n, p)` as a union of closed intervals.
pub fn beta_range(n: f64, p: f64) -> Result<BetaSet> {
    Ok(m_range(n, p)?.beta)
}

/// Pointwise `q[u] = |u″|² − 2b u″|u′|²/u + c|u′|⁴/u²`.
pub fn qform_value(u: &GridFn, q: &Quadrature, beta: f64, params: &UltraParams) -> Result<GridFn> {
    if u.min() <= 0.0 {
        return domain("the quadratic form needs u > 0");
    }
    let (b, c) = reduced_coeffs(beta, params.n(), params.p());
    let (d1, d2) = spectral_derivatives(u, q)?;
    Ok(GridFn::new(
        (0..u.len())
            .map(|i| {
                let g = d1[i] * d1[i] / u[i];
                d2[i] * d2[i] - 2.0 * b * d2[i] * g + c * g * g
            })
            .collect(),
    ))
}

/// Coefficients of the gradient-bound argument, with `α = 2/((n+2)m − n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityCoeffs {
    pub a: f64,
    pub b_eps: f64,
    pub c_eps: f64,
    /// `b_ε² − 4 a c_ε`.
    pub disc_eps: f64,
    pub alpha: f64,
}

/// `a(z)`, `b_ε(z)`, `c_ε(z) = −ℓ′_{ε,n}(z)` and their discriminant.
pub fn regularity_coeffs(z: f64, params: &UltraParams) -> Result<RegularityCoeffs> {
    let n = params.n();
    let m = params.m();
    let denom = (n + 2.0) * m - n;
    if denom.abs() <= 1e-14 * n.max(1.0) {
        return domain(format!(
            "alpha = 2/((n+2)m - n) has a pole: beta = {} equals (n+2)/(n+2-p)",
            params.beta()
        ));
    }
    let eps = params.eps();
    let gap = 1.0 - m;
    let a = -n * gap * (2.0 - n * gap) * (1.0 - z * z) / (denom * denom);
    let b_eps = if eps == 0.0 {
        0.0
    } else {
        2.0 * gap * (params.d() as f64 - n) * eps * z / (denom * (1.0 + eps - z * z))
    };
    let c_eps = -drift_prime(z, params);
    Ok(RegularityCoeffs {
        a,
        b_eps,
        c_eps,
        disc_eps: b_eps * b_eps - 4.0 * a * c_eps,
        alpha: 2.0 / denom,
    })
}

/// Adjusted constant `λ = n + ε(n−d)(β(p−1)/(n+2) · h1/h0)²`.
pub fn lambda_eps(params: &UltraParams, h0: f64, h1: f64) -> Result<f64> {
    let n = params.n();
    let d = params.d() as f64;
    if n >= d {
        return domain(format!(
            "the adjusted constant needs non-integer n (n < d), got n = {n}, d = {d}"
        ));
    }
    if !(h0 > 0.0 && h0 < 1.0) || !(h1 > 0.0) {
        return domain(format!("need h0 in (0, 1) and h1 > 0, got h0 = {h0}, h1 = {h1}"));
    }
    let r = params.beta() * (params.p() - 1.0) / (n + 2.0) * h1 / h0;
    Ok(n + params.eps() * (n - d) * r * r)
}

/// One row of the admissible-`m` chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    pub p: f64,
    pub m_minus: Option<f64>,
    pub m_plus: Option<f64>,
    /// `n/(n+2)`.
    pub m_dotted: f64,
    /// `(n−2)/n`.
    pub m_dashed: f64,
}

/// Samples `m±` at `steps + 1` equally spaced exponents in `[p_min, p_max]`.
pub fn figure1_rows(n: f64, p_min: f64, p_max: f64, steps: usize) -> Result<Vec<Figure1Row>> {
    if !(p_min > 1.0) || !(p_max >= p_min) || steps == 0 {
        return domain(format!(
            "need 1 < p_min <= p_max and steps >= 1, got [{p_min}, {p_max}] with {steps} steps"
        ));
    }
    (0..=steps)
        .map(|i| {
            let p = if i == steps {
                p_max
            } else {
                p_min + (p_max - p_min) * i as f64 / steps as f64
            };
            let r = m_range(n, p)?;
            Ok(Figure1Row {
                p,
                m_minus: r.m_minus,
                m_plus: r.m_plus,
                m_dotted: n / (n + 2.0),
                m_dashed: (n - 2.0) / n,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn threshold_anchors() {
        assert_eq!(thresholds(3.0), (19.0 / 4.0, 6.0));
        assert_eq!(thresholds(1.0), (f64::INFINITY, f64::INFINITY));
        let (s, c) = thresholds(4.0);
        assert!((s - 33.0 / 9.0).abs() < 1e-15);
        assert_eq!(c, 4.0);
    }

    #[test]
    fn delta_anchors() {
        assert_eq!(delta_of_beta(0.0, 2.3, 4.1), 1.0);
        let (a, b, _) = delta_coeffs(3.0, 6.0);
        assert_eq!((a, b), (0.0, 0.0));
        assert!(delta_of_beta(2.0, 4.0, 4.0).abs() < 1e-15);
        let r = m_range(3.0, 6.0).unwrap();
        assert_eq!(r.status, RangeStatus::Degenerate);
        assert!(r.beta.is_empty());
    }

    #[test]
    fn critical_exponent_is_double_root() {
        let r = m_range(4.0, 4.0).unwrap();
        assert_eq!(r.status, RangeStatus::DoubleRoot);
        assert!((r.m_minus.unwrap() - 0.75).abs() < 1e-15);
        assert!(r.beta.contains(2.0));
        assert!(!r.beta.contains(2.0 + 1e-9));
        assert_eq!(m_range(4.0, 5.0).unwrap().status, RangeStatus::Empty);
    }

    #[test]
    fn regularity_limits() {
        let prm = UltraParams::new(2.5, 5.0).unwrap().with_beta(1.2).unwrap();
        let m = prm.m();
        let denom = 4.5 * m - 2.5;
        for z in [-1.0, -0.4, 0.0, 0.7, 1.0] {
            let r = regularity_coeffs(z, &prm).unwrap();
            assert_eq!(r.b_eps, 0.0);
            assert_eq!(r.c_eps, -2.5);
            let expect = -4.0 * 6.25 * (1.0 - m) * (2.0 - 2.5 * (1.0 - m)) * (1.0 - z * z) / (denom * denom);
            assert!((r.disc_eps - expect).abs() < 1e-14);
        }
        let pole = prm.with_beta(4.5 / (4.5 - 5.0)).unwrap();
        assert!(regularity_coeffs(0.0, &pole).is_err());
    }

    #[test]
    fn adjusted_constant() {
        let prm = UltraParams::new(2.5, 5.0)
            .unwrap()
            .with_beta(1.2)
            .unwrap()
            .with_eps(1e-3)
            .unwrap();
        let direct = 2.5 - 1e-3 * 0.5 * (1.2 * 4.0 / 4.5 * 2.0f64).powi(2);
        assert!((lambda_eps(&prm, 0.5, 1.0).unwrap() - direct).abs() < 1e-15);
        assert!(lambda_eps(&UltraParams::new(3.0, 5.0).unwrap(), 0.5, 1.0).is_err());
        assert_eq!(lambda_eps(&prm.with_eps(0.0).unwrap(), 0.5, 1.0).unwrap(), 2.5);
    }

    #[test]
    fn chart_rows() {
        let rows = figure1_rows(3.0, 2.05, 6.0, 50).unwrap();
        assert_eq!(rows.len(), 51);
        let last = rows.last().unwrap();
        assert!((last.m_minus.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((last.m_plus.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(figure1_rows(1.0, 2.0, 40.0, 20).unwrap().iter().all(|r| r.m_minus.is_some()));
    }

    proptest! {
        #[test]
        fn delta_at_zero_is_one(n in 0.05f64..10.0, p in 1.01f64..20.0) {
            prop_assert_eq!(delta_of_beta(0.0, n, p), 1.0);
        }

        #[test]
        fn reduced_form_agrees(n in 0.05f64..10.0, p in 1.01f64..20.0, beta in -5.0f64..5.0) {
            let (b, c) = reduced_coeffs(beta, n, p);
            let direct = delta_of_beta(beta, n, p);
            prop_assert!((b * b - c - direct).abs() <= 1e-11 * (1.0 + direct.abs() + c.abs()));
        }

        #[test]
        fn factored_disc_matches_expansion(n in 0.05f64..10.0, p in 1.01f64..20.0) {
            let r = m_range(n, p).unwrap();
            prop_assert!((r.disc - factored_disc(n, p)).abs() <= 1e-12 * (1.0 + r.b * r.b + r.a.abs()));
        }

        #[test]
        fn membership_matches_sign_of_delta(n in 0.05f64..10.0, p in 2.01f64..20.0, beta in -20.0f64..20.0) {
            let r = m_range(n, p).unwrap();
            let d = delta_of_beta(beta, n, p);
            prop_assume!(d.abs() > 1e-10 && beta != 0.0);
            prop_assert_eq!(r.beta.contains(beta), d <= 0.0);
        }

        #[test]
        fn heat_exponent_admissible_below_sharp(n in 1.05f64..8.0, p in 1.05f64..30.0) {
            let (p_sharp, _) = thresholds(n);
            prop_assume!((p - p_sharp).abs() > 1e-6);
            prop_assert_eq!(beta_range(n, p).unwrap().contains(1.0), p <= p_sharp);
        }

        #[test]
        fn roots_ordered(n in 0.05f64..10.0, p in 1.01f64..20.0) {
            let r = m_range(n, p).unwrap();
            if let (Some(lo), Some(hi)) = (r.m_minus, r.m_plus) {
                prop_assert!(lo <= hi);
            }
            prop_assert_eq!(r.status == RangeStatus::Empty, n > 2.0 && p > r.p_crit * (1.0 + 1e-9));
        }

        #[test]
        fn quadratic_coefficient_sign_in_regularity_window(n in 2.05f64..6.0, m in 0.0f64..1.0, z in -1.0f64..1.0) {
            let lo = (n - 2.0) / n;
            prop_assume!(m > lo + 1e-6 && m < 1.0 - 1e-6 && (m - n / (n + 2.0)).abs() > 1e-6);
            let p = 4.0;
            let s = inv_beta_of_m(m, p);
            prop_assume!(s.abs() > 1e-6);
            let beta = 1.0 / s;
            let prm = UltraParams::new(n, p).unwrap().with_beta(beta).unwrap();
            prop_assert!(regularity_coeffs(z, &prm).unwrap().a <= 0.0);
        }
    }
}

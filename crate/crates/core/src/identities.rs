//! Integration-by-parts identities checked on seeded test functions.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::GridFn;
use crate::measure::{MeasureKind, Quadrature, UltraParams};
use crate::operators::OperatorCoeffs;
use crate::spectral::spectral_derivatives;

/// Default degree of the random exponent polynomial.
pub const DEFAULT_DEGREE: usize = 6;

/// Largest accepted `|u′(±1)| / (1 + max |u′|)` for the Neumann checks.
pub const NEUMANN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdentityTag {
    Gamma2,
    LGamma,
    Gamma2Eps,
    LGammaEps,
}

impl IdentityTag {
    pub fn label(&self) -> &'static str {
        match self {
            IdentityTag::Gamma2 => "Gamma2",
            IdentityTag::LGamma => "L-Gamma",
            IdentityTag::Gamma2Eps => "Gamma2-eps",
            IdentityTag::LGammaEps => "L-Gamma-eps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / (1 + |lhs| + |rhs|)`.
    pub residual: f64,
    pub identity_tag: IdentityTag,
    pub seed: Option<u64>,
}

impl IdentityReport {
    fn new(tag: IdentityTag, lhs: f64, rhs: f64) -> Self {
        IdentityReport {
            lhs,
            rhs,
            residual: (lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs()),
            identity_tag: tag,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// `u = exp(P)` for a polynomial `P` given by monomial coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub exponent: Vec<f64>,
    pub seed: u64,
    pub neumann: bool,
    /// Lower bound `exp(−max|P|)`; `1/h0` bounds `u` from above.
    pub h0: f64,
}

fn horner(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * z + a)
}

fn derive(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| k as f64 * a)
        .collect()
}

impl TestFunction {
    /// Random exponent of the given degree, scaled so that `max |P| ≤ 1`.
    ///
    /// With `neumann`, `P = c₀ + ∫₀^z (1 − s²) Q(s) ds`, so `P′(±1) = 0`.
    pub fn random(seed: u64, neumann: bool, degree: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let exponent = if neumann && degree >= 3 {
            let c0 = draw(1)[0];
            let q = draw(degree - 2);
            // (1 − s²) Q(s), then integrate term by term.
            let mut integrand = vec![0.0; q.len() + 2];
            for (k, a) in q.iter().enumerate() {
                integrand[k] += a;
                integrand[k + 2] -= a;
            }
            let mut p = vec![c0];
            p.extend(integrand.iter().enumerate().map(|(k, a)| a / (k as f64 + 1.0)));
            p
        } else if neumann {
            draw(1)
        } else {
            draw(degree + 1)
        };
        Self::from_exponent(exponent, seed, neumann)
    }

    /// Wraps an exponent polynomial, rescaling it to `max |P| ≤ 1`.
    pub fn from_exponent(mut exponent: Vec<f64>, seed: u64, neumann: bool) -> Self {
        let peak = (0..=4000)
            .map(|i| horner(&exponent, -1.0 + i as f64 / 2000.0).abs())
            .fold(0.0, f64::max);
        let scale = if peak > 1.0 { 1.0 / peak } else { 1.0 };
        exponent.iter_mut().for_each(|a| *a *= scale);
        TestFunction {
            exponent,
            seed,
            neumann,
            h0: (-peak.min(1.0)).exp(),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        horner(&self.exponent, z).exp()
    }

    pub fn derivative(&self, z: f64) -> f64 {
        horner(&derive(&self.exponent), z) * self.eval(z)
    }

    pub fn second_derivative(&self, z: f64) -> f64 {
        let d1 = derive(&self.exponent);
        let g = horner(&d1, z);
        (horner(&derive(&d1), z) + g * g) * self.eval(z)
    }

    pub fn sample(&self, q: &Quadrature) -> GridFn {
        GridFn::sample(q, |z| self.eval(z))
    }
}

/// Seeded `u = exp(P)` on the nodes of `q` with the default degree.
pub fn make_test_function(seed: u64, q: &Quadrature, neumann: bool) -> GridFn {
    TestFunction::random(seed, neumann, DEFAULT_DEGREE).sample(q)
}

/// `u`, `u′`, `u″` of the interpolant, sampled on the integration rule.
struct Derivs {
    rule: Arc<Quadrature>,
    u: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

/// Differentiates on `q`, then moves everything to `q.resolved()` so that the
/// non-polynomial integrands are integrated accurately.
fn prepare(u: &GridFn, q: &Quadrature) -> Result<Derivs> {
    u.check_on(q)?;
    if u.min() <= 0.0 {
        return domain(format!("identities need u > 0, min u = {:e}", u.min()));
    }
    let (d1, d2) = spectral_derivatives(u, q)?;
    let rule = q.resolved();
    let basis = q.basis();
    let (u, d1, d2) = (
        basis.interpolate(u.values(), rule.nodes()),
        basis.interpolate(d1.values(), rule.nodes()),
        basis.interpolate(d2.values(), rule.nodes()),
    );
    if u.iter().any(|&x| x <= 0.0) {
        return domain("the interpolant of u is not positive between the nodes");
    }
    Ok(Derivs { rule, u, d1, d2 })
}

fn require_plain(q: &Quadrature, params: &UltraParams) -> Result<()> {
    if q.kind() != MeasureKind::Plain || q.n() != params.n() {
        return domain("this identity is stated against the plain measure of the same n");
    }
    Ok(())
}

fn require_regularized(q: &Quadrature, params: &UltraParams) -> Result<()> {
    params.require_regularization()?;
    if q.kind() != MeasureKind::Regularized || q.n() != params.n() || q.eps() != params.eps() {
        return domain("this identity is stated against the regularized measure of the same (n, eps)");
    }
    Ok(())
}

/// Fails unless `u′(±1)` vanishes relative to the size of `u′`.
pub fn check_neumann(u: &GridFn, q: &Quadrature) -> Result<()> {
    u.check_on(q)?;
    let basis = q.basis();
    let ends = basis.derivative_at(u.values(), &[-1.0, 1.0]);
    let scale = 1.0 + spectral_derivatives(u, q)?.0.max_abs();
    let residual = ends[0].abs().max(ends[1].abs());
    if residual > NEUMANN_TOL * scale {
        return Err(Error::Boundary { residual });
    }
    Ok(())
}

/// `Σ wᵢ g(zᵢ, uᵢ, u′ᵢ, u″ᵢ)` on the integration rule.
fn quad(d: &Derivs, g: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
    d.rule
        .nodes()
        .iter()
        .zip(d.rule.weights())
        .enumerate()
        .map(|(i, (&z, &w))| w * g(z, d.u[i], d.d1[i], d.d2[i]))
        .sum()
}

fn gamma2_sides(d: &Derivs, coeffs: &OperatorCoeffs) -> (f64, f64) {
    let n = coeffs.n;
    let eps = coeffs.eps;
    let defect = n - coeffs.d as f64;
    let lhs = quad(d, |z, _, g, h| {
        let lu = (1.0 - z * z) * h - coeffs.ell(z) * g;
        lu * lu
    });
    let rhs = quad(d, |z, _, g, h| {
        let r2 = 1.0 - z * z;
        let mut v = h * h * r2 * r2 + n * r2 * g * g;
        if eps != 0.0 {
            let gap = 1.0 + eps - z * z;
            v -= eps * defect * (1.0 + eps + z * z) / (gap * gap) * r2 * g * g;
        }
        v
    });
    (lhs, rhs)
}

fn lgamma_sides(d: &Derivs, coeffs: &OperatorCoeffs) -> (f64, f64) {
    let n = coeffs.n;
    let eps = coeffs.eps;
    let defect = n - coeffs.d as f64;
    let lhs = quad(d, |z, u, g, h| {
        let r2 = 1.0 - z * z;
        let lu = r2 * h - coeffs.ell(z) * g;
        lu * g * g * r2 / u
    });
    let rhs = quad(d, |z, u, g, h| {
        let r2 = 1.0 - z * z;
        let r4 = r2 * r2;
        let mut v = n / (n + 2.0) * g.powi(4) * r4 / (u * u)
            - 2.0 * (n - 1.0) / (n + 2.0) * g * g * h * r4 / u;
        if eps != 0.0 {
            v += 2.0 * eps * defect / (n + 2.0) * g.powi(3) * r2 * z / ((1.0 + eps - z * z) * u);
        }
        v
    });
    (lhs, rhs)
}

/// `∫(Lu)² = ∫|u″|²ρ⁴ + n∫ρ²|u′|²` without any boundary validation.
pub fn gamma2_report(u: &GridFn, q: &Quadrature, params: &UltraParams) -> Result<IdentityReport> {
    require_plain(q, params)?;
    let (lhs, rhs) = gamma2_sides(&prepare(u, q)?, &OperatorCoeffs::plain(params));
    Ok(IdentityReport::new(IdentityTag::Gamma2, lhs, rhs))
}

/// `⟨|u′|²ρ²/u, Lu⟩ = n/(n+2)∫|u′|⁴ρ⁴/u² − 2(n−1)/(n+2)∫|u′|²u″ρ⁴/u`
/// without any boundary validation.
pub fn lgamma_report(u: &GridFn, q: &Quadrature, params: &UltraParams) -> Result<IdentityReport> {
    require_plain(q, params)?;
    let (lhs, rhs) = lgamma_sides(&prepare(u, q)?, &OperatorCoeffs::plain(params));
    Ok(IdentityReport::new(IdentityTag::LGamma, lhs, rhs))
}

/// [`gamma2_report`] after checking `u′(±1) = 0`.
pub fn check_gamma2(u: &GridFn, q: &Quadrature, params: &UltraParams) -> Result<IdentityReport> {
    check_neumann(u, q)?;
    gamma2_report(u, q, params)
}

/// [`lgamma_report`] after checking `u′(±1) = 0`.
pub fn check_lgamma(u: &GridFn, q: &Quadrature, params: &UltraParams) -> Result<IdentityReport> {
    check_neumann(u, q)?;
    lgamma_report(u, q, params)
}

/// `∫(L_ε u)² = ∫|u″|²ρ⁴ + n∫ρ²|u′|² − ε(n−d)∫(1+ε+z²)/(1+ε−z²)² ρ²|u′|²`
/// against `dν_{ε,n}`.
pub fn check_gamma2_eps(u: &GridFn, q: &Quadrature, params: &UltraParams) -> Result<IdentityReport> {
    require_regularized(q, params)?;
    let (lhs, rhs) = gamma2_sides(&prepare(u, q)?, &OperatorCoeffs::regularized(params)?);
    Ok(IdentityReport::new(IdentityTag::Gamma2Eps, lhs, rhs))
}

/// Regularized counterpart of [`check_lgamma`], with the extra
/// `2ε(n−d)/(n+2) ∫(u′)³ρ²z/((1+ε−z²)u)` on the right.
pub fn check_lgamma_eps(u: &GridFn, q: &Quadrature, params: &UltraParams) -> Result<IdentityReport> {
    require_regularized(q, params)?;
    let (lhs, rhs) = lgamma_sides(&prepare(u, q)?, &OperatorCoeffs::regularized(params)?);
    Ok(IdentityReport::new(IdentityTag::LGammaEps, lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumann_ansatz_has_flat_ends() {
        for seed in 0..20 {
            let t = TestFunction::random(seed, true, DEFAULT_DEGREE);
            assert!(t.derivative(1.0).abs() < 1e-14 && t.derivative(-1.0).abs() < 1e-14);
            assert!(t.h0 >= (-1.0f64).exp() - 1e-15);
            let q = Quadrature::plain(2.7, 48).unwrap();
            assert!(check_neumann(&t.sample(&q), &q).is_ok());
        }
    }

    #[test]
    fn constant_exponent_gives_constant() {
        let t = TestFunction::from_exponent(vec![0.4], 0, true);
        let q = Quadrature::plain(3.0, 16).unwrap();
        let u = t.sample(&q);
        assert!(u.max() - u.min() < 1e-15);
        let r = check_gamma2(&u, &q, &UltraParams::new(3.0, 3.0).unwrap()).unwrap();
        assert!(r.lhs.abs() < 1e-20 && r.rhs.abs() < 1e-20);
    }

    #[test]
    fn generic_function_fails_boundary_validation() {
        let q = Quadrature::plain(2.7, 48).unwrap();
        let u = q.z().map(|z| (0.5 * z).exp());
        let params = UltraParams::new(2.7, 3.0).unwrap();
        assert!(matches!(check_gamma2(&u, &q, &params), Err(Error::Boundary { .. })));
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let t = TestFunction::random(7, false, DEFAULT_DEGREE);
        let h = 1e-5;
        for z in [-0.8, 0.1, 0.6] {
            let fd1 = (t.eval(z + h) - t.eval(z - h)) / (2.0 * h);
            let fd2 = (t.derivative(z + h) - t.derivative(z - h)) / (2.0 * h);
            assert!((fd1 - t.derivative(z)).abs() < 1e-8);
            assert!((fd2 - t.second_derivative(z)).abs() < 1e-7);
        }
    }

    #[test]
    fn measure_kind_is_enforced() {
        let plain = Quadrature::plain(2.5, 32).unwrap();
        let params = UltraParams::new(2.5, 3.0).unwrap().with_eps(0.1).unwrap();
        let u = make_test_function(1, &plain, false);
        assert!(check_gamma2_eps(&u, &plain, &params).is_err());
        let reg = Quadrature::regularized(2.5, 0.1, 32).unwrap();
        assert!(gamma2_report(&make_test_function(1, &reg, false), &reg, &params).is_err());
    }
}

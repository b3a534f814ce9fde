//! The ultraspherical operator `L` and its regularized counterpart `L_{ε,n}`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::GridFn;
use crate::measure::{Quadrature, UltraParams};
use crate::spectral::spectral_derivatives;

/// Drift data of `L_{ε,n} f = ρ² f″ − ℓ f′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorCoeffs {
    pub n: f64,
    pub d: u32,
    pub eps: f64,
}

impl OperatorCoeffs {
    /// Coefficients of the regularized operator; requires `ε > 0` or integer `n`.
    pub fn regularized(params: &UltraParams) -> Result<Self> {
        params.require_regularization()?;
        Ok(raw_coeffs(params))
    }

    /// Coefficients of the plain operator (`ℓ = n z`).
    pub fn plain(params: &UltraParams) -> Self {
        OperatorCoeffs {
            n: params.n(),
            d: params.d(),
            eps: 0.0,
        }
    }

    fn defect(&self) -> f64 {
        self.n - self.d as f64
    }

    /// `ℓ(z) = z (n − ε(n−d)/(1+ε−z²))`.
    pub fn ell(&self, z: f64) -> f64 {
        if self.eps == 0.0 {
            return self.n * z;
        }
        z * (self.n - self.eps * self.defect() / (1.0 + self.eps - z * z))
    }

    /// `ℓ′(z) = n − ε(n−d)(1+ε+z²)/(1+ε−z²)²`.
    pub fn ell_prime(&self, z: f64) -> f64 {
        if self.eps == 0.0 {
            return self.n;
        }
        let gap = 1.0 + self.eps - z * z;
        self.n - self.eps * self.defect() * (1.0 + self.eps + z * z) / (gap * gap)
    }
}

fn raw_coeffs(params: &UltraParams) -> OperatorCoeffs {
    OperatorCoeffs {
        n: params.n(),
        d: params.d(),
        eps: params.eps(),
    }
}

/// `ℓ_{ε,n}(z)`; equals `n z` when `ε = 0`.
pub fn drift(z: f64, params: &UltraParams) -> f64 {
    raw_coeffs(params).ell(z)
}

/// `ℓ′_{ε,n}(z)`.
pub fn drift_prime(z: f64, params: &UltraParams) -> f64 {
    raw_coeffs(params).ell_prime(z)
}

fn apply_with(f: &GridFn, q: &Quadrature, coeffs: &OperatorCoeffs) -> Result<GridFn> {
    let (d1, d2) = spectral_derivatives(f, q)?;
    Ok(GridFn::new(
        q.nodes()
            .iter()
            .enumerate()
            .map(|(i, &z)| (1.0 - z * z) * d2[i] - coeffs.ell(z) * d1[i])
            .collect(),
    ))
}

/// `L f = (1 − z²) f″ − n z f′` at the nodes of `q`.
pub fn apply_l(f: &GridFn, q: &Quadrature, params: &UltraParams) -> Result<GridFn> {
    apply_with(f, q, &OperatorCoeffs::plain(params))
}

/// `L_{ε,n} f = (1 − z²) f″ − ℓ_{ε,n} f′` at the nodes of `q`.
pub fn apply_l_eps(f: &GridFn, q: &Quadrature, params: &UltraParams) -> Result<GridFn> {
    if !params.regularization_defined() {
        return domain(format!(
            "L_eps is not regular for eps = 0 and non-integer n = {}",
            params.n()
        ));
    }
    apply_with(f, q, &OperatorCoeffs::regularized(params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigenvalue;

    fn params(n: f64) -> UltraParams {
        UltraParams::new(n, 3.0).unwrap()
    }

    #[test]
    fn plain_drift_is_linear() {
        let c = OperatorCoeffs::plain(&params(2.5));
        assert_eq!(c.ell(0.3), 2.5 * 0.3);
        assert_eq!(c.ell_prime(0.9), 2.5);
    }

    #[test]
    fn drift_prime_anchor_and_finite_difference() {
        let prm = params(2.5).with_eps(0.05).unwrap();
        let direct = 2.5 + 0.05 * 0.5 * 1.05 / (1.05 * 1.05);
        assert!((drift_prime(0.0, &prm) - direct).abs() < 1e-15);
        let h = 1e-6;
        for z in [-0.95, -0.3, 0.0, 0.4, 0.99] {
            let fd = (drift(z + h, &prm) - drift(z - h, &prm)) / (2.0 * h);
            assert!((fd - drift_prime(z, &prm)).abs() < 1e-7);
        }
    }

    #[test]
    fn eigenfunction_of_degree_one() {
        let q = Quadrature::plain(3.0, 16).unwrap();
        let lz = apply_l(&q.z(), &q, &params(3.0)).unwrap();
        for (z, v) in q.nodes().iter().zip(lz.values()) {
            assert!((v + 3.0 * z).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_functions_are_eigenfunctions() {
        let n = 1.7;
        let q = Quadrature::plain(n, 40).unwrap();
        let basis = q.basis();
        for k in [2, 5, 11, 19] {
            let pk = GridFn::new(basis.values().column(k).iter().copied().collect());
            let lpk = apply_l(&pk, &q, &params(n)).unwrap();
            let lam = eigenvalue(n, k);
            let err = lpk
                .values()
                .iter()
                .zip(pk.values())
                .fold(0.0f64, |e, (a, b)| e.max((a + lam * b).abs()));
            assert!(err < 1e-10 * lam.max(1.0), "k = {k}: {err:e}");
        }
    }

    #[test]
    fn regularized_requires_eps_for_fractional_n() {
        let q = Quadrature::plain(2.5, 16).unwrap();
        let f = q.z();
        assert!(apply_l_eps(&f, &q, &params(2.5)).is_err());
        let int = params(3.0).with_eps(0.2).unwrap();
        let q3 = Quadrature::plain(3.0, 16).unwrap();
        let a = apply_l_eps(&q3.z().map(|z| z * z * z), &q3, &int).unwrap();
        let b = apply_l(&q3.z().map(|z| z * z * z), &q3, &int).unwrap();
        assert!(a.zip_with(&b, |x, y| x - y).max_abs() < 1e-13);
    }
}

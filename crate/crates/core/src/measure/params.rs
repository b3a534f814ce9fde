use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Smallest accepted positive regularization parameter.
pub const MIN_EPS: f64 = 1e-8;

/// The parameter bundle shared by every module.
///
/// `kappa` and `m` are not stored: they are always recomputed from
/// `(beta, p)` so they cannot drift out of sync with the exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UltraParams {
    n: f64,
    d: u32,
    eps: f64,
    p: f64,
    beta: f64,
}

/// `d = inf { k ∈ ℕ : k ≥ n }`.
pub fn ceil_dimension(n: f64) -> u32 {
    n.ceil().max(1.0) as u32
}

impl UltraParams {
    /// Parameters with `beta = 1` and no regularization.
    pub fn new(n: f64, p: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return domain(format!("dimension parameter n must be positive, got {n}"));
        }
        if !(p.is_finite() && p >= 1.0) {
            return domain(format!("exponent p must be finite and >= 1, got {p}"));
        }
        Ok(UltraParams {
            n,
            d: ceil_dimension(n),
            eps: 0.0,
            p,
            beta: 1.0,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta == 0.0 {
            return domain(format!("flow exponent beta must be finite and nonzero, got {beta}"));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return domain(format!("regularization eps must be >= 0, got {eps}"));
        }
        if eps > 0.0 && eps < MIN_EPS {
            return domain(format!(
                "regularization eps = {eps:e} is below the conditioning floor {MIN_EPS:e}"
            ));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn with_p(self, p: f64) -> Result<Self> {
        let mut out = UltraParams::new(self.n, p)?;
        out.eps = self.eps;
        out.beta = self.beta;
        Ok(out)
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// κ = β(p − 2) + 1.
    pub fn kappa(&self) -> f64 {
        self.beta * (self.p - 2.0) + 1.0
    }

    /// m = 1 + (2/p)(1/β − 1).
    pub fn m(&self) -> f64 {
        1.0 + 2.0 / self.p * (1.0 / self.beta - 1.0)
    }

    pub fn is_integer_dimension(&self) -> bool {
        self.n == self.d as f64
    }

    /// Whether the regularized weight and operator are well defined.
    pub fn regularization_defined(&self) -> bool {
        self.eps > 0.0 || self.is_integer_dimension()
    }

    pub(crate) fn require_regularization(&self) -> Result<()> {
        if !self.regularization_defined() {
            return domain(format!(
                "regularized objects need eps > 0 when n = {} is not an integer",
                self.n
            ));
        }
        Ok(())
    }
}

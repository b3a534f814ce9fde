//! The probability measures `dν_n` and `dν_{ε,n}` and quadrature against them.

mod jacobi;
mod params;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::grid::GridFn;
use crate::spectral::Basis;

pub use jacobi::{orthonormal_derivatives, orthonormal_values, recurrence_coeff};
pub use params::{ceil_dimension, UltraParams, MIN_EPS};

/// Default node count.
pub const DEFAULT_NODES: usize = 64;

/// Scale of the `1/√ε` node-count rule for regularized integrals.
pub const RESOLUTION: f64 = 13.0;

/// Which measure a rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureKind {
    /// `dν_n = Z_n⁻¹ ρ^{n−2} dz`.
    Plain,
    /// `dν_{ε,n} ∝ ζ_ε ρ^{d−2} dz`.
    Regularized,
}

/// `Z_n = √π Γ(n/2) / Γ((n+1)/2)`, the mass of `ρ^{n−2} dz` on [-1, 1].
pub fn normalization_constant(n: f64) -> Result<f64> {
    if !(n.is_finite() && n > 0.0) {
        return domain(format!("normalization constant needs n > 0, got {n}"));
    }
    Ok(std::f64::consts::PI.sqrt() * (ln_gamma(0.5 * n) - ln_gamma(0.5 * (n + 1.0))).exp())
}

/// Regularizing weight `ζ_ε(z) = (1 + ε − z²)^{(n−d)/2}`.
pub fn zeta(z: f64, n: f64, d: u32, eps: f64) -> f64 {
    let expo = 0.5 * (n - d as f64);
    if expo == 0.0 {
        1.0
    } else {
        (1.0 + eps - z * z).powf(expo)
    }
}

/// A Gauss-type rule normalized to a probability measure.
///
/// Plain rules are Gauss–Jacobi with exponent `(n−2)/2` at both ends.
/// Regularized rules reuse the Gauss–Jacobi nodes of `ρ^{d−2}` and fold the
/// smooth factor `ζ_ε` into the weights. In both cases the node family is
/// the zero set of a Gegenbauer polynomial with parameter [`family`](Self::family),
/// which is what spectral differentiation is built on.
#[derive(Debug, Clone)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    family_weights: Vec<f64>,
    kind: MeasureKind,
    n: f64,
    d: u32,
    eps: f64,
    family: f64,
    basis: OnceLock<Arc<Basis>>,
    refined: OnceLock<Arc<Quadrature>>,
    resolved: OnceLock<Arc<Quadrature>>,
}

impl Quadrature {
    /// Builds a rule with `count` nodes for the measure selected by `kind`.
    pub fn build(params: &UltraParams, count: usize, kind: MeasureKind) -> Result<Self> {
        Self::build_raw(params.n(), params.eps(), count, kind)
    }

    fn build_raw(n: f64, eps: f64, count: usize, kind: MeasureKind) -> Result<Self> {
        let d = ceil_dimension(n);
        let family = match kind {
            MeasureKind::Plain => n,
            MeasureKind::Regularized => {
                if eps == 0.0 && n != d as f64 {
                    return domain(format!(
                        "the regularized measure needs eps > 0 for non-integer n = {n}"
                    ));
                }
                d as f64
            }
        };
        let (nodes, family_weights) = jacobi::gauss_rule(family, count)?;
        let weights = match kind {
            MeasureKind::Plain => family_weights.clone(),
            MeasureKind::Regularized => {
                let raw: Vec<f64> = nodes
                    .iter()
                    .zip(&family_weights)
                    .map(|(&z, &w)| w * zeta(z, n, d, eps))
                    .collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / total).collect()
            }
        };
        Ok(Quadrature {
            nodes,
            weights,
            family_weights,
            kind,
            n,
            d,
            eps: if kind == MeasureKind::Plain { 0.0 } else { eps },
            family,
            basis: OnceLock::new(),
            refined: OnceLock::new(),
            resolved: OnceLock::new(),
        })
    }

    /// Plain rule for `dν_n`.
    pub fn plain(n: f64, count: usize) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return domain(format!("n must be positive, got {n}"));
        }
        Self::build_raw(n, 0.0, count, MeasureKind::Plain)
    }

    /// Regularized rule for `dν_{ε,n}`.
    pub fn regularized(n: f64, eps: f64, count: usize) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return domain(format!("n must be positive, got {n}"));
        }
        if eps > 0.0 && eps < MIN_EPS {
            return domain(format!("eps = {eps:e} is below {MIN_EPS:e}"));
        }
        Self::build_raw(n, eps, count, MeasureKind::Regularized)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Gauss weights of the node family before any folding of `ζ_ε`.
    pub fn family_weights(&self) -> &[f64] {
        &self.family_weights
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
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

    /// Gegenbauer parameter of the node family (`n` for plain, `d` for regularized rules).
    pub fn family(&self) -> f64 {
        self.family
    }

    /// Exactness degree of the node family's Gauss rule.
    pub fn exactness_degree(&self) -> usize {
        2 * self.len() - 1
    }

    /// `ρ² = 1 − z²` at the nodes.
    pub fn rho_sq(&self) -> GridFn {
        GridFn::new(self.nodes.iter().map(|z| 1.0 - z * z).collect())
    }

    pub fn z(&self) -> GridFn {
        GridFn::new(self.nodes.clone())
    }

    /// Σ wᵢ f(zᵢ).
    pub fn integrate(&self, f: &GridFn) -> Result<f64> {
        f.check_on(self)?;
        Ok(self.sum(f.values()))
    }

    /// Σ wᵢ vᵢ without a shape check.
    pub(crate) fn sum(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Integrates a closure sampled at the nodes.
    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }

    /// `Σ wᵢ f(vᵢ)` for node values `vᵢ`.
    pub fn integrate_fn_values(&self, values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, &v)| w * f(v)).sum()
    }

    /// Same measure with twice the nodes; cached.
    pub fn refined(&self) -> Arc<Quadrature> {
        self.refined
            .get_or_init(|| {
                Arc::new(
                    Self::build_raw(self.n, self.eps, 2 * self.len(), self.kind)
                        .expect("doubling a valid rule stays valid"),
                )
            })
            .clone()
    }

    /// Node count that resolves the singularities of `ζ_ε` and `ℓ_{ε,n}` at
    /// `z = ±√(1+ε)`: `max(2N, ⌈RESOLUTION / √ε⌉)` for regularized rules
    /// with `n < d`, `2N` otherwise.
    pub fn resolved_len(&self) -> usize {
        let doubled = 2 * self.len();
        if self.kind == MeasureKind::Regularized && self.eps > 0.0 && self.n < self.d as f64 {
            doubled.max((RESOLUTION / self.eps.sqrt()).ceil() as usize)
        } else {
            doubled
        }
    }

    /// Same measure on [`resolved_len`](Self::resolved_len) nodes; cached.
    pub fn resolved(&self) -> Arc<Quadrature> {
        self.resolved
            .get_or_init(|| {
                let count = self.resolved_len();
                if count == 2 * self.len() {
                    return self.refined();
                }
                Arc::new(
                    Self::build_raw(self.n, self.eps, count, self.kind)
                        .expect("a finer valid rule stays valid"),
                )
            })
            .clone()
    }

    /// Spectral basis on these nodes; cached.
    pub fn basis(&self) -> Arc<Basis> {
        self.basis
            .get_or_init(|| Arc::new(Basis::new(self.family, &self.nodes, &self.family_weights)))
            .clone()
    }
}

/// Free-function form of [`Quadrature::build`].
pub fn build_quadrature(params: &UltraParams, count: usize, kind: MeasureKind) -> Result<Quadrature> {
    Quadrature::build(params, count, kind)
}

/// Free-function form of [`Quadrature::integrate`].
pub fn integrate(q: &Quadrature, f: &GridFn) -> Result<f64> {
    q.integrate(f)
}

//! Gegenbauer eigenbasis of the ultraspherical operator.

use std::sync::atomic::{AtomicBool, Ordering};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::GridFn;
use crate::measure::{orthonormal_derivatives, orthonormal_values, MeasureKind, Quadrature};

/// Relative spectral tail energy above which differentiation is flagged.
pub const TAIL_WARNING: f64 = 1e-8;

/// `λ_k = k (k + n − 1)`.
pub fn eigenvalue(n: f64, k: usize) -> f64 {
    let k = k as f64;
    k * (k + n - 1.0)
}

/// Coefficients in the basis orthonormal with respect to `dν_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFn {
    pub coeffs: Vec<f64>,
    pub n: f64,
}

impl SpectralFn {
    pub fn max_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `Σ c_k²`, which equals `‖f‖₂²` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Pointwise evaluation by the three-term recurrence.
    pub fn eval(&self, z: f64) -> f64 {
        let mut buf = vec![0.0; self.coeffs.len()];
        orthonormal_values(self.n, z, &mut buf);
        buf.iter().zip(&self.coeffs).map(|(p, c)| p * c).sum()
    }
}

/// Basis values and dense transform matrices on a fixed node set.
///
/// The node set must be the Gauss nodes of the family, so that the degree
/// `N − 1` interpolant is recovered exactly by the analysis matrix.
#[derive(Debug)]
pub struct Basis {
    family: f64,
    /// `P_k(z_i)` with rows indexed by node and columns by degree.
    values: DMatrix<f64>,
    /// Maps node values to the `N` coefficients of the interpolant.
    analysis: DMatrix<f64>,
    diff1: DMatrix<f64>,
    diff2: DMatrix<f64>,
    /// Set once a tail warning has been logged for this basis.
    warned: AtomicBool,
}

impl Basis {
    pub(crate) fn new(family: f64, nodes: &[f64], family_weights: &[f64]) -> Self {
        let count = nodes.len();
        let mut values = DMatrix::zeros(count, count);
        let mut first = DMatrix::zeros(count, count);
        let mut second = DMatrix::zeros(count, count);
        let (mut p, mut dp, mut ddp) = (vec![0.0; count], vec![0.0; count], vec![0.0; count]);
        for (i, &z) in nodes.iter().enumerate() {
            orthonormal_derivatives(family, z, &mut p, &mut dp, &mut ddp);
            for k in 0..count {
                values[(i, k)] = p[k];
                first[(i, k)] = dp[k];
                second[(i, k)] = ddp[k];
            }
        }
        let mut analysis = values.transpose();
        for (i, &w) in family_weights.iter().enumerate() {
            analysis.column_mut(i).scale_mut(w);
        }
        let mut diff1 = &first * &analysis;
        let mut diff2 = &second * &analysis;
        // Constants must differentiate to exactly zero.
        for d in [&mut diff1, &mut diff2] {
            for i in 0..count {
                let off: f64 = (0..count).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
                d[(i, i)] = -off;
            }
        }
        Basis {
            family,
            values,
            analysis,
            diff1,
            diff2,
            warned: AtomicBool::new(false),
        }
    }

    pub fn family(&self) -> f64 {
        self.family
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `P_k` at the nodes.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// First-derivative matrix acting on node values.
    pub fn diff1(&self) -> &DMatrix<f64> {
        &self.diff1
    }

    /// Second-derivative matrix acting on node values.
    pub fn diff2(&self) -> &DMatrix<f64> {
        &self.diff2
    }

    /// All `N` interpolant coefficients of node values.
    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        (&self.analysis * DVector::from_column_slice(values))
            .iter()
            .copied()
            .collect()
    }

    pub(crate) fn apply(matrix: &DMatrix<f64>, values: &[f64]) -> Vec<f64> {
        (matrix * DVector::from_column_slice(values))
            .iter()
            .copied()
            .collect()
    }

    /// Evaluates the interpolant of `values` at arbitrary points.
    pub fn interpolate(&self, values: &[f64], points: &[f64]) -> Vec<f64> {
        let coeffs = self.coefficients(values);
        let mut buf = vec![0.0; coeffs.len()];
        points
            .iter()
            .map(|&z| {
                orthonormal_values(self.family, z, &mut buf);
                buf.iter().zip(&coeffs).map(|(p, c)| p * c).sum()
            })
            .collect()
    }

    /// Derivative of the interpolant of `values` at arbitrary points.
    pub fn derivative_at(&self, values: &[f64], points: &[f64]) -> Vec<f64> {
        let coeffs = self.coefficients(values);
        let count = coeffs.len();
        let (mut p, mut dp, mut ddp) = (vec![0.0; count], vec![0.0; count], vec![0.0; count]);
        points
            .iter()
            .map(|&z| {
                orthonormal_derivatives(self.family, z, &mut p, &mut dp, &mut ddp);
                dp.iter().zip(&coeffs).map(|(d, c)| d * c).sum()
            })
            .collect()
    }

    /// Fraction of the coefficient energy carried by the top quarter of degrees.
    pub fn tail_ratio(&self, values: &[f64]) -> f64 {
        let coeffs = self.coefficients(values);
        let total: f64 = coeffs.iter().map(|c| c * c).sum();
        if total == 0.0 {
            return 0.0;
        }
        let start = coeffs.len() - coeffs.len().div_ceil(4);
        let tail: f64 = coeffs[start..].iter().map(|c| c * c).sum();
        (tail / total).sqrt()
    }
}

/// Coefficients `c_k = ∫ f P_k dν_n` for `k ≤ max_degree`.
///
/// `max_degree = None` uses `N − 2`.
pub fn to_spectral(f: &GridFn, q: &Quadrature, max_degree: Option<usize>) -> Result<SpectralFn> {
    f.check_on(q)?;
    if q.kind() != MeasureKind::Plain {
        return domain("spectral transforms are defined on the plain rule only");
    }
    let k_max = max_degree.unwrap_or(q.len() - 2);
    if k_max >= q.len() {
        return Err(Error::Aliasing {
            degree: k_max,
            nodes: q.len(),
        });
    }
    let mut coeffs = q.basis().coefficients(f.values());
    coeffs.truncate(k_max + 1);
    Ok(SpectralFn { coeffs, n: q.n() })
}

/// Evaluates a spectral expansion at the given points.
pub fn from_spectral(s: &SpectralFn, points: &[f64]) -> GridFn {
    GridFn::new(points.iter().map(|&z| s.eval(z)).collect())
}

/// Logs at most once per basis.
fn warn_on_tail(basis: &Basis, f: &GridFn) {
    if basis.warned.load(Ordering::Relaxed) {
        return;
    }
    let ratio = basis.tail_ratio(f.values());
    if ratio > TAIL_WARNING && !basis.warned.swap(true, Ordering::Relaxed) {
        log::warn!(
            "spectral tail ratio {ratio:.3e} on {} nodes; derivatives may be inaccurate",
            basis.len()
        );
    }
}

/// `f′` at the nodes, by differentiating the interpolant.
pub fn spectral_derivative(f: &GridFn, q: &Quadrature) -> Result<GridFn> {
    f.check_on(q)?;
    let basis = q.basis();
    warn_on_tail(&basis, f);
    Ok(GridFn::new(Basis::apply(basis.diff1(), f.values())))
}

/// `(f′, f″)` at the nodes.
pub fn spectral_derivatives(f: &GridFn, q: &Quadrature) -> Result<(GridFn, GridFn)> {
    f.check_on(q)?;
    let basis = q.basis();
    warn_on_tail(&basis, f);
    Ok((
        GridFn::new(Basis::apply(basis.diff1(), f.values())),
        GridFn::new(Basis::apply(basis.diff2(), f.values())),
    ))
}

/// Moves node values from `from` onto the nodes of `to` through the interpolant.
pub fn transfer(f: &GridFn, from: &Quadrature, to: &Quadrature) -> Result<GridFn> {
    f.check_on(from)?;
    Ok(GridFn::new(from.basis().interpolate(f.values(), to.nodes())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_anchors() {
        assert_eq!(eigenvalue(3.0, 1), 3.0);
        assert_eq!(eigenvalue(4.0, 2), 10.0);
        assert_eq!(eigenvalue(0.7, 0), 0.0);
    }

    #[test]
    fn constant_and_linear() {
        let q = Quadrature::plain(3.0, 24).unwrap();
        let one = to_spectral(&GridFn::constant(&q, 1.0), &q, None).unwrap();
        assert!((one.coeffs[0] - 1.0).abs() < 1e-14);
        assert!(one.coeffs[1..].iter().all(|c| c.abs() < 1e-13));
        let z = to_spectral(&q.z(), &q, None).unwrap();
        assert!((z.coeffs[1].powi(2) - 0.25).abs() < 1e-14);
        assert!((z.energy() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn aliasing_and_kind() {
        let q = Quadrature::plain(3.0, 10).unwrap();
        let f = GridFn::constant(&q, 1.0);
        assert!(matches!(to_spectral(&f, &q, Some(10)), Err(Error::Aliasing { .. })));
        assert!(to_spectral(&f, &q, Some(9)).is_ok());
        let r = Quadrature::regularized(2.5, 0.1, 10).unwrap();
        assert!(to_spectral(&GridFn::constant(&r, 1.0), &r, None).is_err());
    }

    #[test]
    fn derivative_of_square() {
        let q = Quadrature::plain(1.7, 20).unwrap();
        let d = spectral_derivative(&q.z().map(|z| z * z), &q).unwrap();
        for (z, v) in q.nodes().iter().zip(d.values()) {
            assert!((v - 2.0 * z).abs() < 1e-12);
        }
        let c = spectral_derivative(&GridFn::constant(&q, 3.0), &q).unwrap();
        assert!(c.max_abs() < 1e-12);
    }

    #[test]
    fn derivative_of_exponential() {
        let q = Quadrature::plain(3.0, 40).unwrap();
        let f = GridFn::sample(&q, f64::exp);
        let (d1, d2) = spectral_derivatives(&f, &q).unwrap();
        for (i, z) in q.nodes().iter().enumerate() {
            assert!((d1[i] - z.exp()).abs() < 1e-11);
            assert!((d2[i] - z.exp()).abs() < 1e-9);
        }
        let ends = q.basis().derivative_at(f.values(), &[-1.0, 1.0]);
        assert!((ends[1] - 1f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn transfer_between_rules() {
        let a = Quadrature::plain(2.2, 30).unwrap();
        let b = a.refined();
        let f = GridFn::sample(&a, |z| (2.0 * z).sin());
        let g = transfer(&f, &a, &b).unwrap();
        for (z, v) in b.nodes().iter().zip(g.values()) {
            assert!((v - (2.0 * z).sin()).abs() < 1e-13);
        }
    }
}

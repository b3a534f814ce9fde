//! Norms, Fisher information, inequality deficits and the Lyapunov functional.

use serde::{Deserialize, Serialize};

use crate::admissibility::thresholds;
use crate::error::{domain, Result};
use crate::grid::GridFn;
use crate::measure::{Quadrature, UltraParams};
use crate::spectral::{spectral_derivative, transfer};

/// Left side, entropy side and their difference for one inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    /// `∫ ρ² |f′|² dν`.
    pub fisher: f64,
    pub entropy_term: f64,
    /// `fisher − lambda_used · entropy_term`.
    pub deficit: f64,
    pub lambda_used: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovValue {
    pub value: f64,
    pub lambda: f64,
    pub beta: f64,
    /// `∫ u^{βp} dν`.
    pub mass: f64,
    /// `∫ ρ² |(u^β)′|² dν`.
    pub fisher_beta: f64,
}

fn on_refined(f: &GridFn, q: &Quadrature) -> Result<(std::sync::Arc<Quadrature>, GridFn)> {
    let fine = q.refined();
    let g = transfer(f, q, &fine)?;
    Ok((fine, g))
}

/// `(∫ |f|^p dν)^{1/p}` on the doubled rule.
pub fn lp_norm(f: &GridFn, q: &Quadrature, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return domain(format!("Lp norm needs finite p >= 1, got {p}"));
    }
    let (fine, g) = on_refined(f, q)?;
    Ok(fine.integrate_fn_values(g.values(), |v| v.abs().powf(p)).powf(1.0 / p))
}

/// `∫ ρ² |f′|² dν`, exact on the interpolant.
pub fn fisher(f: &GridFn, q: &Quadrature) -> Result<f64> {
    let d = spectral_derivative(f, q)?;
    Ok(q
        .nodes()
        .iter()
        .zip(q.weights())
        .zip(d.values())
        .map(|((z, w), g)| w * (1.0 - z * z) * g * g)
        .sum())
}

fn require_nonzero(f: &GridFn) -> Result<()> {
    if f.max_abs() == 0.0 {
        return domain("the function vanishes identically");
    }
    Ok(())
}

/// Deficit of `‖ρ f′‖₂² ≥ λ/(p−2) (‖f‖_p² − ‖f‖₂²)`.
///
/// At `p = 1` the entropy side uses `(∫ f dν)²` in place of `‖f‖₁²`, which
/// makes it the variance and the inequality the spectral gap estimate; for
/// nonnegative `f` the two agree.
pub fn deficit(f: &GridFn, q: &Quadrature, params: &UltraParams, lambda: f64) -> Result<DeficitReport> {
    f.check_on(q)?;
    require_nonzero(f)?;
    let p = params.p();
    let n = params.n();
    if p == 2.0 {
        return domain("p = 2 is the logarithmic case; use logsob_deficit");
    }
    let (_, p_crit) = thresholds(n);
    if p > p_crit * (1.0 + 1e-12) {
        return domain(format!("p = {p} exceeds the critical exponent {p_crit} for n = {n}"));
    }
    if n > 2.0 && (p - p_crit).abs() <= 1e-12 * p_crit {
        log::warn!("p is the critical exponent; quadrature converges slowly near extremals");
    }
    let (fine, g) = on_refined(f, q)?;
    let l2_sq = fine.integrate_fn_values(g.values(), |v| v * v);
    let lp_sq = if p == 1.0 {
        fine.integrate_fn_values(g.values(), |v| v).powi(2)
    } else {
        fine.integrate_fn_values(g.values(), |v| v.abs().powf(p))
            .powf(2.0 / p)
    };
    let entropy_term = (lp_sq - l2_sq) / (p - 2.0);
    let fisher = fisher(f, q)?;
    Ok(DeficitReport {
        fisher,
        entropy_term,
        deficit: fisher - lambda * entropy_term,
        lambda_used: lambda,
        p,
    })
}

/// Deficit of `‖ρ f′‖₂² ≥ (n/2) ∫ f² log(f²/‖f‖₂²) dν`.
pub fn logsob_deficit(f: &GridFn, q: &Quadrature, params: &UltraParams) -> Result<DeficitReport> {
    f.check_on(q)?;
    require_nonzero(f)?;
    let (fine, g) = on_refined(f, q)?;
    let l2_sq = fine.integrate_fn_values(g.values(), |v| v * v);
    let entropy_term = fine.integrate_fn_values(g.values(), |v| {
        let s = v * v;
        if s == 0.0 {
            0.0
        } else {
            s * (s / l2_sq).ln()
        }
    });
    let lambda = 0.5 * params.n();
    let fisher = fisher(f, q)?;
    Ok(DeficitReport {
        fisher,
        entropy_term,
        deficit: fisher - lambda * entropy_term,
        lambda_used: lambda,
        p: 2.0,
    })
}

/// `F[u] = ∫ρ²|(u^β)′|² + λ/(p−2) (‖u^β‖₂² − ‖u^β‖_p²)` against the measure of `q`.
///
/// Integrals use the rule's own nodes so that the discrete mass conserved by
/// the flows is the one reported here.
pub fn lyapunov_f(u: &GridFn, q: &Quadrature, params: &UltraParams, lambda: f64) -> Result<LyapunovValue> {
    u.check_on(q)?;
    if u.min() <= 0.0 {
        return domain(format!("the Lyapunov functional needs u > 0, min u = {:e}", u.min()));
    }
    let p = params.p();
    if p == 2.0 {
        return domain("the Lyapunov functional is singular at p = 2");
    }
    let beta = params.beta();
    let w = u.map(|x| x.powf(beta));
    let fisher_beta = fisher(&w, q)?;
    let l2_sq = q.sum(&w.values().iter().map(|x| x * x).collect::<Vec<_>>());
    let mass = q.sum(&w.values().iter().map(|x| x.powf(p)).collect::<Vec<_>>());
    let value = fisher_beta + lambda / (p - 2.0) * (l2_sq - mass.powf(2.0 / p));
    Ok(LyapunovValue {
        value,
        lambda,
        beta,
        mass,
        fisher_beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prm(n: f64, p: f64) -> UltraParams {
        UltraParams::new(n, p).unwrap()
    }

    #[test]
    fn norms_of_simple_functions() {
        let q = Quadrature::plain(3.0, 32).unwrap();
        assert!((lp_norm(&GridFn::constant(&q, -2.5), &q, 3.3).unwrap() - 2.5).abs() < 1e-14);
        assert!((lp_norm(&q.z(), &q, 2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(lp_norm(&q.z(), &q, 0.5).is_err());
    }

    #[test]
    fn fisher_of_linear_function() {
        for n in [0.7, 2.0, 4.5] {
            let q = Quadrature::plain(n, 20).unwrap();
            assert!((fisher(&q.z(), &q).unwrap() - n / (n + 1.0)).abs() < 1e-14);
            assert!(fisher(&GridFn::constant(&q, 4.0), &q).unwrap().abs() < 1e-20);
        }
    }

    #[test]
    fn constants_have_zero_deficit() {
        let q = Quadrature::plain(2.0, 24).unwrap();
        let c = GridFn::constant(&q, 2.0);
        let r = deficit(&c, &q, &prm(2.0, 3.0), 2.0).unwrap();
        assert!(r.deficit.abs() < 1e-13 && r.entropy_term.abs() < 1e-13);
        assert!(logsob_deficit(&c, &q, &prm(2.0, 2.0)).unwrap().deficit.abs() < 1e-13);
    }

    #[test]
    fn first_eigenfunction_saturates_spectral_gap() {
        let q = Quadrature::plain(2.5, 24).unwrap();
        let r = deficit(&q.z(), &q, &prm(2.5, 1.0), 2.5).unwrap();
        assert!(r.deficit.abs() < 1e-13);
    }

    #[test]
    fn rejections() {
        let q = Quadrature::plain(4.0, 24).unwrap();
        let f = q.z().map(|z| 1.0 + 0.1 * z);
        assert!(deficit(&f, &q, &prm(4.0, 2.0), 4.0).is_err());
        assert!(deficit(&f, &q, &prm(4.0, 4.5), 4.0).is_err());
        assert!(deficit(&GridFn::constant(&q, 0.0), &q, &prm(4.0, 3.0), 4.0).is_err());
        assert!(lyapunov_f(&f.map(|x| x - 1.0), &q, &prm(4.0, 3.0), 4.0).is_err());
    }

    #[test]
    fn lyapunov_collapses_to_deficit_form() {
        let q = Quadrature::plain(3.0, 32).unwrap();
        let u = q.z().map(|z| 1.0 + 0.3 * z - 0.1 * z * z);
        let params = prm(3.0, 4.0);
        let f = lyapunov_f(&u, &q, &params, 3.0).unwrap();
        let l2 = q.integrate_fn_values(u.values(), |v| v * v);
        let lp = q.integrate_fn_values(u.values(), |v| v.powi(4)).sqrt();
        let direct = fisher(&u, &q).unwrap() + 3.0 / 2.0 * (l2 - lp);
        assert!((f.value - direct).abs() < 1e-14);
        assert!(lyapunov_f(&GridFn::constant(&q, 1.0), &q, &params, 3.0).unwrap().value.abs() < 1e-15);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::GridFn;
use crate::measure::Quadrature;
use crate::spectral::spectral_derivatives;

use super::{FlowConfig, FlowKind};

/// Instantaneous derivative of `F` along the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfDt {
    /// `(1/2β²) dF/dt`.
    pub normalized: f64,
    /// `dF/dt`.
    pub rate: f64,
}

/// Closed-form `dF/dt` at the state `u`, integrated on the flow's own rule.
///
/// With `γ = (κ+β−1)/(n+2)`,
/// `(1/2β²) dF/dt = (λ−n)I₀ − ∫|u″|²ρ⁴ + 2(n−1)γ ∫u″|u′|²ρ⁴/u
///   − [κ(β−1) + nγ] ∫|u′|⁴ρ⁴/u² − ε(n−d)(2γ Y − J)`
/// where `I₀ = ∫ρ²|u′|²`, `Y = ∫(u′)³ρ²z/((1+ε−z²)u)` and
/// `J = ∫|u′|²(1+ε+z²)ρ²/(1+ε−z²)²`.
pub fn df_dt_closed_form(u: &GridFn, q: &Quadrature, cfg: &FlowConfig) -> Result<DfDt> {
    cfg.check_rule(q)?;
    u.check_on(q)?;
    if u.min() <= 0.0 {
        return domain("dF/dt needs u > 0");
    }
    let params = &cfg.params;
    let n = params.n();
    let beta = params.beta();
    let kappa = params.kappa();
    let lambda = cfg.resolved_lambda()?;
    let eps = if cfg.kind == FlowKind::Regularized {
        params.eps()
    } else {
        0.0
    };
    let defect = n - params.d() as f64;
    let gamma = (kappa + beta - 1.0) / (n + 2.0);
    let (d1, d2) = spectral_derivatives(u, q)?;
    let mut total = 0.0;
    for (i, (&z, &w)) in q.nodes().iter().zip(q.weights()).enumerate() {
        let (v, g, h) = (u[i], d1[i], d2[i]);
        let r2 = 1.0 - z * z;
        let r4 = r2 * r2;
        let mut term = (lambda - n) * r2 * g * g - h * h * r4
            + 2.0 * (n - 1.0) * gamma * h * g * g * r4 / v
            - (kappa * (beta - 1.0) + n * gamma) * g.powi(4) * r4 / (v * v);
        if eps != 0.0 {
            let gap = 1.0 + eps - z * z;
            let y = g.powi(3) * r2 * z / (gap * v);
            let j = g * g * (1.0 + eps + z * z) * r2 / (gap * gap);
            term -= eps * defect * (2.0 * gamma * y - j);
        }
        total += w * term;
    }
    Ok(DfDt {
        normalized: total,
        rate: 2.0 * beta * beta * total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::run_heat_flow;
    use crate::measure::UltraParams;

    #[test]
    fn vanishes_at_constants() {
        let q = Quadrature::plain(3.0, 16).unwrap();
        let prm = UltraParams::new(3.0, 4.0).unwrap().with_beta(1.5).unwrap();
        let cfg = FlowConfig::new(FlowKind::Nonlinear, prm).unwrap();
        let d = df_dt_closed_form(&GridFn::constant(&q, 2.0), &q, &cfg).unwrap();
        assert!(d.rate.abs() < 1e-20);
    }

    #[test]
    fn matches_finite_differences_along_heat_flow() {
        let q = Quadrature::plain(3.0, 40).unwrap();
        let h = 1e-6;
        let cfg = FlowConfig::new(FlowKind::Heat, UltraParams::new(3.0, 4.0).unwrap())
            .unwrap()
            .with_time(h, 2.0 * h);
        let u = GridFn::sample(&q, |z| (0.3 * z + 0.2 * z * z).exp());
        let closed = df_dt_closed_form(&u, &q, &cfg).unwrap();
        let f = run_heat_flow(&u, &q, &cfg).unwrap().f_values;
        let fd = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        assert!((closed.rate - fd).abs() < 1e-6 * fd.abs(), "{} vs {fd}", closed.rate);
        assert!((closed.rate - 2.0 * closed.normalized).abs() < 1e-15);
    }
}

use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::measure::Quadrature;
use crate::spectral::eigenvalue;

use super::{require_positive, schedule, FlowConfig, FlowKind, FlowTrace, POSITIVITY_FLOOR};

/// Heat flow for `v = u^p`, integrated exactly mode by mode.
///
/// `v(t) = Σ c_k e^{−λ_k t} P_k` with all `N` coefficients of the
/// interpolant of `v(0)`, so `v(0)` is reproduced at the nodes and
/// `∫ v dν = c_0` is conserved exactly.
pub fn run_heat_flow(u0: &GridFn, q: &Quadrature, cfg: &FlowConfig) -> Result<FlowTrace> {
    cfg.validate()?;
    if cfg.kind != FlowKind::Heat {
        return Err(Error::Domain(format!("run_heat_flow got a {:?} configuration", cfg.kind)));
    }
    cfg.check_rule(q)?;
    u0.check_on(q)?;
    require_positive(u0)?;
    let p = cfg.params.p();
    let n = cfg.params.n();
    let basis = q.basis();
    let coeffs = basis.coefficients(&u0.values().iter().map(|u| u.powf(p)).collect::<Vec<_>>());
    let mut trace = FlowTrace::new(cfg, q, cfg.resolved_lambda()?);
    let times = schedule(cfg);
    let last = times.len() - 1;
    for (j, &t) in times.iter().enumerate() {
        if j % cfg.record_every != 0 && j != last {
            continue;
        }
        let decayed: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (-eigenvalue(n, k) * t).exp())
            .collect();
        let v = basis.values() * nalgebra::DVector::from_vec(decayed);
        let u = GridFn::new(v.iter().map(|x| x.max(0.0).powf(1.0 / p)).collect());
        let min_u = v.iter().copied().fold(f64::INFINITY, f64::min).max(0.0).powf(1.0 / p);
        if !(min_u >= POSITIVITY_FLOOR) {
            return Err(Error::PositivityLost {
                time: t,
                min_u,
                partial: Box::new(trace),
            });
        }
        trace.record(t, &u, q, cfg)?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::UltraParams;
    use crate::spectral::to_spectral;

    fn config(n: f64, p: f64) -> FlowConfig {
        FlowConfig::new(FlowKind::Heat, UltraParams::new(n, p).unwrap())
            .unwrap()
            .with_time(0.05, 0.2)
    }

    #[test]
    fn first_mode_decays_at_rate_n() {
        let (n, p) = (2.4, 3.0);
        let q = Quadrature::plain(n, 24).unwrap();
        // v = u^p = 1 + 0.1 z is a pure first mode.
        let u0 = GridFn::sample(&q, |z| (1.0 + 0.1 * z).powf(1.0 / p));
        let cfg = config(n, p);
        let trace = run_heat_flow(&u0, &q, &cfg).unwrap();
        let v = trace.final_u.map(|u| u.powf(p));
        for (z, v) in q.nodes().iter().zip(v.values()) {
            assert!((v - (1.0 + 0.1 * z * (-n * 0.2f64).exp())).abs() < 1e-14);
        }
        let c = to_spectral(&v, &q, Some(4)).unwrap().coeffs;
        assert!(c[2..].iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn mass_is_conserved() {
        let q = Quadrature::plain(3.0, 32).unwrap();
        let u0 = GridFn::sample(&q, |z| (0.4 * z - 0.3 * z * z * z).exp());
        let trace = run_heat_flow(&u0, &q, &config(3.0, 4.0)).unwrap();
        assert!(trace.mass_drift() < 1e-13);
        assert_eq!(trace.len(), 5);
    }

    #[test]
    fn rejects_wrong_kind_and_nonpositive_data() {
        let q = Quadrature::plain(3.0, 16).unwrap();
        let prm = UltraParams::new(3.0, 3.0).unwrap();
        let nl = FlowConfig::new(FlowKind::Nonlinear, prm).unwrap();
        assert!(run_heat_flow(&GridFn::constant(&q, 1.0), &q, &nl).is_err());
        assert!(run_heat_flow(&q.z(), &q, &config(3.0, 3.0)).is_err());
    }
}

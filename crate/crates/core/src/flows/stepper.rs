use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::measure::Quadrature;
use crate::spectral::eigenvalue;

use super::{require_positive, schedule, FlowConfig, FlowKind, FlowTrace, POSITIVITY_FLOOR};

/// Method-of-lines integrator for `∂v/∂t = (1/m) L v^m`, `v = u^{βp}`.
///
/// The operator is assembled in weak form on the rule's own nodes,
/// `A = −W⁻¹ D₁ᵀ (W ρ²) D₁`, where `W` holds the weights of the flow's
/// measure. Then `Σ wᵢ (A g)ᵢ = 0` for every `g`, so the discrete mass is
/// conserved exactly, and on the plain rule `A` coincides with collocation.
/// For the regularized measure the weights carry `ζ_ε`, which supplies the
/// drift `ℓ_{ε,n}`.
pub struct Stepper {
    operator: DMatrix<f64>,
    /// Spectral radius of the operator, at least `λ_{N−1}`.
    top_rate: f64,
    v: DVector<f64>,
    t: f64,
    m: f64,
    exponent: f64,
    dt_cap: f64,
}

impl Stepper {
    pub fn new(u0: &GridFn, q: &Quadrature, cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        cfg.check_rule(q)?;
        u0.check_on(q)?;
        require_positive(u0)?;
        let count = q.len();
        let d1 = q.basis().diff1().clone();
        let w = q.weights();
        let mut scaled = d1.clone();
        for (i, &z) in q.nodes().iter().enumerate() {
            scaled.row_mut(i).scale_mut(w[i] * (1.0 - z * z));
        }
        let mut operator = -(d1.transpose() * scaled);
        for (i, wi) in w.iter().enumerate() {
            operator.row_mut(i).scale_mut(1.0 / wi);
        }
        // W^{1/2} A W^{-1/2} is symmetric, so its eigenvalues bound the rates.
        let mut sym = operator.clone();
        for i in 0..count {
            for j in 0..count {
                sym[(i, j)] *= (w[i] / w[j]).sqrt();
            }
        }
        let sym = 0.5 * (&sym + sym.transpose());
        let radius = SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, e| acc.max(e.abs()));
        let top_rate = radius.max(eigenvalue(cfg.params.n(), count - 1));
        let exponent = cfg.params.beta() * cfg.params.p();
        Ok(Stepper {
            operator,
            top_rate,
            v: DVector::from_iterator(count, u0.values().iter().map(|u| u.powf(exponent))),
            t: 0.0,
            m: cfg.params.m(),
            exponent,
            dt_cap: f64::INFINITY,
        })
    }

    /// Upper bound on the internal step, on top of the stability limits.
    pub fn with_step_cap(mut self, cap: f64) -> Self {
        self.dt_cap = cap;
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn top_rate(&self) -> f64 {
        self.top_rate
    }

    pub fn u(&self) -> GridFn {
        GridFn::new(self.v.iter().map(|v| v.powf(1.0 / self.exponent)).collect())
    }

    fn rhs(&self, v: &DVector<f64>) -> DVector<f64> {
        let vm = v.map(|x| x.powf(self.m));
        (&self.operator * vm) / self.m
    }

    fn stable_step(&self) -> f64 {
        let peak = self
            .v
            .iter()
            .map(|x| x.powf(self.m - 1.0))
            .fold(0.0f64, f64::max);
        (0.5 / self.top_rate)
            .min(2.5 / (self.top_rate * peak))
            .min(self.dt_cap)
    }

    fn check(&self) -> Result<()> {
        let min_v = self.v.iter().copied().fold(f64::INFINITY, f64::min);
        let min_u = if self.exponent > 0.0 {
            min_v.max(0.0).powf(1.0 / self.exponent)
        } else {
            self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max).powf(1.0 / self.exponent)
        };
        if !(min_v > 0.0 && min_u >= POSITIVITY_FLOOR && self.v.iter().all(|x| x.is_finite())) {
            return Err(Error::Numerical(format!("positivity lost at t = {}: min u = {min_u:e}", self.t)));
        }
        Ok(())
    }

    /// Advances to `target` with classical RK4 sub-steps.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        while self.t < target {
            let remaining = target - self.t;
            let stable = self.stable_step();
            let steps = (remaining / stable).ceil().max(1.0);
            let h = remaining / steps;
            let h = if h >= remaining * (1.0 - 1e-12) { remaining } else { h };
            let k1 = self.rhs(&self.v);
            let k2 = self.rhs(&(&self.v + &k1 * (0.5 * h)));
            let k3 = self.rhs(&(&self.v + &k2 * (0.5 * h)));
            let k4 = self.rhs(&(&self.v + &k3 * h));
            self.v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            self.t = if h == remaining { target } else { self.t + h };
            self.check()?;
        }
        Ok(())
    }
}

fn run(u0: &GridFn, q: &Quadrature, cfg: &FlowConfig) -> Result<FlowTrace> {
    let mut stepper = Stepper::new(u0, q, cfg)?;
    let mut trace = FlowTrace::new(cfg, q, cfg.resolved_lambda()?);
    let times = schedule(cfg);
    let last = times.len() - 1;
    for (j, &t) in times.iter().enumerate() {
        if let Err(err) = stepper.advance_to(t) {
            let min_u = stepper.u().min();
            return Err(match err {
                Error::Numerical(_) => Error::PositivityLost {
                    time: stepper.time(),
                    min_u,
                    partial: Box::new(trace),
                },
                other => other,
            });
        }
        if j % cfg.record_every == 0 || j == last {
            trace.record(t, &stepper.u(), q, cfg)?;
        }
    }
    Ok(trace)
}

/// Nonlinear flow against `dν_n`, with `F` at `λ = n` unless overridden.
pub fn run_nonlinear_flow(u0: &GridFn, q: &Quadrature, cfg: &FlowConfig) -> Result<FlowTrace> {
    if cfg.kind != FlowKind::Nonlinear {
        return Err(Error::Domain(format!("run_nonlinear_flow got a {:?} configuration", cfg.kind)));
    }
    run(u0, q, cfg)
}

/// Regularized nonlinear flow against `dν_{ε,n}`, monitoring the bounds `h0`, `h1`.
pub fn run_regularized_flow(u0: &GridFn, q: &Quadrature, cfg: &FlowConfig) -> Result<FlowTrace> {
    if cfg.kind != FlowKind::Regularized {
        return Err(Error::Domain(format!("run_regularized_flow got a {:?} configuration", cfg.kind)));
    }
    run(u0, q, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::run_heat_flow;
    use crate::measure::UltraParams;

    #[test]
    fn operator_conserves_mass_for_every_vector() {
        let prm = UltraParams::new(2.5, 5.0).unwrap().with_beta(1.2).unwrap();
        for q in [
            Quadrature::plain(2.5, 20).unwrap(),
            Quadrature::regularized(2.5, 1e-2, 20).unwrap(),
        ] {
            let kind = if q.kind() == crate::measure::MeasureKind::Plain {
                FlowKind::Nonlinear
            } else {
                FlowKind::Regularized
            };
            let cfg = FlowConfig::new(kind, prm.with_eps(q.eps()).unwrap()).unwrap();
            let s = Stepper::new(&GridFn::constant(&q, 1.0), &q, &cfg).unwrap();
            for j in 0..q.len() {
                let col = s.operator.column(j);
                let total: f64 = col.iter().zip(q.weights()).map(|(a, w)| a * w).sum();
                assert!(total.abs() < 1e-10 * s.top_rate);
            }
        }
    }

    #[test]
    fn constants_are_stationary() {
        let q = Quadrature::plain(4.0, 16).unwrap();
        let prm = UltraParams::new(4.0, 3.8).unwrap().with_beta(2.0).unwrap();
        let cfg = FlowConfig::new(FlowKind::Nonlinear, prm).unwrap();
        let mut s = Stepper::new(&GridFn::constant(&q, 1.3), &q, &cfg).unwrap();
        s.advance_to(0.1).unwrap();
        assert!(s.u().values().iter().all(|u| (u - 1.3).abs() < 1e-13));
    }

    #[test]
    fn unit_exponent_reproduces_heat_flow() {
        let (n, p) = (3.0, 3.0);
        let q = Quadrature::plain(n, 24).unwrap();
        let u0 = GridFn::sample(&q, |z| 1.0 + 0.2 * z + 0.1 * z * z);
        let prm = UltraParams::new(n, p).unwrap();
        let heat = FlowConfig::new(FlowKind::Heat, prm).unwrap().with_time(0.05, 0.1);
        let nl = FlowConfig::new(FlowKind::Nonlinear, prm).unwrap().with_time(0.05, 0.1);
        let a = run_heat_flow(&u0, &q, &heat).unwrap().final_u;
        let b = run_nonlinear_flow(&u0, &q, &nl).unwrap().final_u;
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn runners_check_kind() {
        let q = Quadrature::plain(3.0, 16).unwrap();
        let cfg = FlowConfig::new(FlowKind::Heat, UltraParams::new(3.0, 3.0).unwrap()).unwrap();
        let u = GridFn::constant(&q, 1.0);
        assert!(run_nonlinear_flow(&u, &q, &cfg).is_err());
        assert!(run_regularized_flow(&u, &q, &cfg).is_err());
    }
}

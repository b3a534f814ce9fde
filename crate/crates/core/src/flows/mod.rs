//! Heat, nonlinear and regularized nonlinear flows with their diagnostics.

mod derivative;
mod heat;
mod stepper;

use serde::{Deserialize, Serialize};

use crate::admissibility::lambda_eps;
use crate::error::{domain, Result};
use crate::functionals::lyapunov_f;
use crate::grid::GridFn;
use crate::measure::{MeasureKind, Quadrature, UltraParams};
use crate::spectral::spectral_derivative;

pub use derivative::{df_dt_closed_form, DfDt};
pub use heat::run_heat_flow;
pub use stepper::{run_nonlinear_flow, run_regularized_flow, Stepper};

/// Node values of `u` below this abort a run.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Slack allowed on the monitored bounds before an event is recorded.
pub const BOUND_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Heat,
    Nonlinear,
    Regularized,
}

impl FlowKind {
    pub fn measure(&self) -> MeasureKind {
        match self {
            FlowKind::Regularized => MeasureKind::Regularized,
            _ => MeasureKind::Plain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub kind: FlowKind,
    pub params: UltraParams,
    /// Recording interval; the integrator may sub-step inside it.
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    /// Constant in `F`; `None` selects `n` (plain flows) or the adjusted constant (regularized).
    pub lambda: Option<f64>,
    pub h0: f64,
    pub h1: f64,
}

impl FlowConfig {
    /// Defaults: `dt = 1e-3`, `t_end = 1`, every step recorded, `h0 = 1/2`, `h1 = 1`.
    ///
    /// The heat flow always runs with `β = 1`.
    pub fn new(kind: FlowKind, params: UltraParams) -> Result<Self> {
        let params = if kind == FlowKind::Heat {
            params.with_beta(1.0)?
        } else {
            params
        };
        Ok(FlowConfig {
            kind,
            params,
            dt: 1e-3,
            t_end: 1.0,
            record_every: 1,
            lambda: None,
            h0: 0.5,
            h1: 1.0,
        })
    }

    pub fn with_time(mut self, dt: f64, t_end: f64) -> Self {
        self.dt = dt;
        self.t_end = t_end;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_bounds(mut self, h0: f64, h1: f64) -> Self {
        self.h0 = h0;
        self.h1 = h1;
        self
    }

    /// `α = 2/((n+2)m − n)`.
    pub fn alpha(&self) -> f64 {
        let n = self.params.n();
        2.0 / ((n + 2.0) * self.params.m() - n)
    }

    /// The constant used in `F`.
    pub fn resolved_lambda(&self) -> Result<f64> {
        match (self.lambda, self.kind) {
            (Some(l), _) => Ok(l),
            (None, FlowKind::Regularized) => lambda_eps(&self.params, self.h0, self.h1),
            (None, _) => Ok(self.params.n()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_end >= 0.0 && self.dt.is_finite() && self.t_end.is_finite()) {
            return domain(format!("need dt > 0 and t_end >= 0, got dt = {}, t_end = {}", self.dt, self.t_end));
        }
        if self.record_every == 0 {
            return domain("record_every must be at least 1");
        }
        if self.params.p() == 2.0 {
            return domain("the flows are monitored through F, which is singular at p = 2");
        }
        let n = self.params.n();
        match self.kind {
            FlowKind::Heat => {
                if self.params.beta() != 1.0 {
                    return domain("the heat flow runs with beta = 1");
                }
            }
            FlowKind::Nonlinear | FlowKind::Regularized => {
                let denom = (n + 2.0) * self.params.m() - n;
                if denom.abs() <= 1e-14 * n.max(1.0) {
                    return domain(format!(
                        "beta = {} is the excluded value (n+2)/(n+2-p)",
                        self.params.beta()
                    ));
                }
            }
        }
        if self.kind == FlowKind::Regularized {
            if !(n < self.params.d() as f64) {
                return domain(format!("the regularized flow needs non-integer n, got {n}"));
            }
            if !(self.params.eps() > 0.0) {
                return domain("the regularized flow needs eps > 0");
            }
            if !(self.h0 > 0.0 && self.h0 < 1.0 && self.h1 > 0.0) {
                return domain(format!("need h0 in (0, 1) and h1 > 0, got {} and {}", self.h0, self.h1));
            }
        }
        Ok(())
    }

    pub(crate) fn check_rule(&self, q: &Quadrature) -> Result<()> {
        let ok = q.kind() == self.kind.measure()
            && q.n() == self.params.n()
            && (self.kind != FlowKind::Regularized || q.eps() == self.params.eps());
        if !ok {
            return domain(format!(
                "the {:?} flow needs a {:?} rule built for its own parameters",
                self.kind,
                self.kind.measure()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `u ≤ h0`.
    Lower,
    /// `u ≥ 1/h0`.
    Upper,
    /// `|u′| > h1`.
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvent {
    pub time: f64,
    pub kind: BoundKind,
    pub value: f64,
}

/// Diagnostics recorded along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    /// `∫ u^{βp} dν`.
    pub mass: Vec<f64>,
    pub fisher_beta: Vec<f64>,
    pub f_values: Vec<f64>,
    pub u_min: Vec<f64>,
    pub u_max: Vec<f64>,
    /// `max |u′|` over the nodes.
    pub grad_max: Vec<f64>,
    /// `max sgn(n+2−β(n+2−p)) u′` over the nodes.
    pub grad_signed_max: Vec<f64>,
    /// `‖u − mass^{1/(βp)}‖∞`.
    pub equilibrium_gap: Vec<f64>,
    pub bound_events: Vec<BoundEvent>,
    pub lambda: f64,
    pub nodes: Vec<f64>,
    pub final_u: GridFn,
    pub params_echo: FlowConfig,
}

impl FlowTrace {
    pub(crate) fn new(cfg: &FlowConfig, q: &Quadrature, lambda: f64) -> Self {
        FlowTrace {
            times: vec![],
            mass: vec![],
            fisher_beta: vec![],
            f_values: vec![],
            u_min: vec![],
            u_max: vec![],
            grad_max: vec![],
            grad_signed_max: vec![],
            equilibrium_gap: vec![],
            bound_events: vec![],
            lambda,
            nodes: q.nodes().to_vec(),
            final_u: GridFn::new(vec![]),
            params_echo: *cfg,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|mass(t) − mass(0)| / |mass(0)|`.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass.first().copied().unwrap_or(0.0);
        self.mass
            .iter()
            .map(|m| (m - m0).abs() / m0.abs())
            .fold(0.0, f64::max)
    }

    /// Largest `F(t_{j+1}) − F(t_j) − (rel |F(t_j)| + abs)`; nonpositive means monotone.
    pub fn worst_f_increase(&self, rel: f64, abs: f64) -> f64 {
        self.f_values
            .windows(2)
            .map(|w| w[1] - w[0] - (rel * w[0].abs() + abs))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Records diagnostics for the state `u` at time `t`.
    pub(crate) fn record(&mut self, t: f64, u: &GridFn, q: &Quadrature, cfg: &FlowConfig) -> Result<()> {
        let params = &cfg.params;
        let f = lyapunov_f(u, q, params, self.lambda)?;
        let du = spectral_derivative(u, q)?;
        let n = params.n();
        let sign = (n + 2.0 - params.beta() * (n + 2.0 - params.p())).signum();
        let level = f.mass.powf(1.0 / (params.beta() * params.p()));
        let (u_min, u_max, grad) = (u.min(), u.max(), du.max_abs());
        self.times.push(t);
        self.mass.push(f.mass);
        self.fisher_beta.push(f.fisher_beta);
        self.f_values.push(f.value);
        self.u_min.push(u_min);
        self.u_max.push(u_max);
        self.grad_max.push(grad);
        self.grad_signed_max.push(du.values().iter().map(|g| sign * g).fold(f64::NEG_INFINITY, f64::max));
        self.equilibrium_gap.push(u.values().iter().map(|x| (x - level).abs()).fold(0.0, f64::max));
        self.final_u = u.clone();
        if cfg.kind == FlowKind::Regularized {
            let mut event = |kind, value| self.bound_events.push(BoundEvent { time: t, kind, value });
            if u_min <= cfg.h0 - BOUND_TOL {
                event(BoundKind::Lower, u_min);
            }
            if u_max >= 1.0 / cfg.h0 + BOUND_TOL {
                event(BoundKind::Upper, u_max);
            }
            if grad > cfg.h1 + BOUND_TOL {
                event(BoundKind::Gradient, grad);
            }
        }
        Ok(())
    }
}

/// Sampling times `j·dt` for `j = 0..=steps`, with the last one pinned to `t_end`.
pub(crate) fn schedule(cfg: &FlowConfig) -> Vec<f64> {
    let steps = (cfg.t_end / cfg.dt).round().max(0.0) as usize;
    let mut times: Vec<f64> = (0..=steps).map(|j| j as f64 * cfg.dt).collect();
    if let Some(last) = times.last_mut() {
        *last = cfg.t_end;
    }
    times
}

pub(crate) fn require_positive(u: &GridFn) -> Result<()> {
    if !(u.min() > 0.0) {
        return domain(format!("initial datum must be positive, min u0 = {:e}", u.min()));
    }
    Ok(())
}

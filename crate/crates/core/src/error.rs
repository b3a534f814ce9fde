use thiserror::Error;

use crate::flows::FlowTrace;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected} node values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("aliasing: degree {degree} cannot be resolved on {nodes} nodes")]
    Aliasing { degree: usize, nodes: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("boundary condition violated: |u'(±1)| = {residual:e}")]
    Boundary { residual: f64 },

    /// A flow lost positivity; the trace recorded up to that point is kept.
    #[error("positivity lost at t = {time}: min u = {min_u:e}")]
    PositivityLost {
        time: f64,
        min_u: f64,
        partial: Box<FlowTrace>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

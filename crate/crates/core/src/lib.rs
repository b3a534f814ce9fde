//! Ultraspherical measures and operators, Gegenbauer spectral tools, heat and
//! nonlinear diffusion flows, Lyapunov functionals, integration-by-parts
//! identities and the admissibility calculus of the carré du champ method.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod error;
pub mod flows;
pub mod functionals;
pub mod grid;
pub mod identities;
pub mod measure;
pub mod operators;
pub mod spectral;

pub use admissibility::{
    beta_range, delta_of_beta, figure1_rows, lambda_eps, m_range, qform_value, regularity_coeffs,
    thresholds, AdmissibleRange, BetaInterval, BetaSet, Figure1Row, RangeStatus, RegularityCoeffs,
};
pub use error::{Error, Result};
pub use flows::{
    df_dt_closed_form, run_heat_flow, run_nonlinear_flow, run_regularized_flow, DfDt, FlowConfig,
    FlowKind, FlowTrace,
};
pub use functionals::{deficit, fisher, logsob_deficit, lp_norm, lyapunov_f, DeficitReport, LyapunovValue};
pub use grid::GridFn;
pub use identities::{
    check_gamma2, check_gamma2_eps, check_lgamma, check_lgamma_eps, make_test_function, IdentityReport,
    IdentityTag, TestFunction,
};
pub use measure::{
    build_quadrature, integrate, normalization_constant, MeasureKind, Quadrature, UltraParams, DEFAULT_NODES,
};
pub use operators::{apply_l, apply_l_eps, drift, drift_prime, OperatorCoeffs};
pub use spectral::{eigenvalue, from_spectral, spectral_derivative, to_spectral, SpectralFn};

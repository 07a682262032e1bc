use thiserror::Error;

/// Errors surfaced by the library.
///
/// A certified-infeasible QP is *not* an error: it is a legitimate outcome
/// reported through [`crate::qp::QpSolution`]. The variants here are
/// conditions that invalidate a run.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The payload angle left the open interval (-pi/2, pi/2) on which the
    /// plant model, the Lyapunov function, and the constraints are defined.
    #[error("model domain violated: |theta| = {theta_abs:.6} rad >= pi/2")]
    DomainViolation { theta_abs: f64 },

    /// A parameter or scenario configuration failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The QP solver hit its iteration cap or an internal numerical failure.
    /// Distinct from certified infeasibility.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// A guarantee of the safety filter was observed to fail at runtime.
    /// Indicates a bug or a configuration outside the filter's contract;
    /// the caller must abort and surface the diagnostics.
    #[error("safety contract violated: {0}")]
    ContractViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

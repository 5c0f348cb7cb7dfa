use std::fmt;

/// Error type shared by all pipeline stages.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Evaluation point outside the domain of validity (e.g. at or beyond
    /// a potential singularity).
    Domain { what: String },
    /// Root finder exhausted its iteration budget.
    Convergence { what: String, t_ns: f64 },
    /// More than one equilibrium candidate and the seed cannot break the tie.
    MultipleRoots { t_ns: f64 },
    /// A derivative or quadrature failed its halving-consistency check.
    GridTooCoarse { what: String, rel_change: f64 },
    /// Spectral maximum sits on the grid boundary.
    Window { what: String },
    /// Quadrature step cannot resolve the requested detuning.
    Resolution { what: String },
    /// Adaptive integrator drove the step size below the usable floor.
    StepUnderflow { t: f64 },
    /// Discrete-bath integration window exceeds a third of the recurrence time.
    Recurrence { t_max: f64, t_recur: f64 },
    /// A NaN or infinity appeared in a pipeline quantity.
    NonFinite { stage: String },
    /// Invalid configuration value.
    Config { what: String },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Domain { what } => write!(f, "domain error: {what}"),
            CoreError::Convergence { what, t_ns } => {
                write!(f, "convergence failure at t = {t_ns} ns: {what}")
            }
            CoreError::MultipleRoots { t_ns } => {
                write!(f, "ambiguous equilibrium at t = {t_ns} ns: two roots equidistant from seed")
            }
            CoreError::GridTooCoarse { what, rel_change } => {
                write!(f, "grid too coarse for {what}: halving changes result by {rel_change:e}")
            }
            CoreError::Window { what } => write!(f, "window error: {what}"),
            CoreError::Resolution { what } => write!(f, "resolution error: {what}"),
            CoreError::StepUnderflow { t } => write!(f, "step-size underflow at t = {t}"),
            CoreError::Recurrence { t_max, t_recur } => write!(
                f,
                "integration window {t_max} exceeds a third of the bath recurrence time {t_recur}"
            ),
            CoreError::NonFinite { stage } => {
                write!(f, "non-finite value produced by stage `{stage}`")
            }
            CoreError::Config { what } => write!(f, "invalid configuration: {what}"),
        }
    }
}

impl std::error::Error for CoreError {}

/// Fail-closed guard: any NaN or infinity aborts the run with the stage name.
pub fn ensure_finite(stage: &str, values: impl IntoIterator<Item = f64>) -> Result<(), CoreError> {
    for v in values {
        if !v.is_finite() {
            return Err(CoreError::NonFinite { stage: stage.to_string() });
        }
    }
    Ok(())
}

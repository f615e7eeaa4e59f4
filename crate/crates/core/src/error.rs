use thiserror::Error;

/// Errors raised by the physical models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode index 0 is excluded from every mode sum")]
    InvalidIndex,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidSpec {
        name: &'static str,
        reason: &'static str,
    },
    #[error("singular input: {0}")]
    SingularInput(&'static str),
    #[error("susceptibility {chi:e} is outside the dispersive limit (|chi| <= 0.01)")]
    DispersiveLimit { chi: f64 },
    #[error("integration diverged at t = {time:e} s")]
    Diverged { time: f64 },
    #[error("spectra are sampled on different grids")]
    GridMismatch,
    #[error("Hilbert space dimension {dim} exceeds the dense budget of {max}")]
    DimensionBudget { dim: usize, max: usize },
    #[error("Schrieffer-Wolff generator is singular: zero cavity-atom detuning in mode {mode}")]
    SingularGenerator { mode: usize },
    #[error("Liouvillian null space is degenerate; steady state is not unique")]
    NonUniqueSteadyState,
    #[error("scan does not bracket a maximum")]
    BadScan,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidSpec { name, reason }
}

//! Error type shared by all engine modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("degenerate squeeze: the two mode indices must differ")]
    DegenerateSqueeze,

    #[error("squeeze parameter r = {0} is negative; fold the sign into the pump phase")]
    NegativeSqueeze(f64),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("power transmission {0} outside [0, 1]")]
    InvalidTransmission(f64),

    #[error("power coupling {0} outside [0, 1]")]
    InvalidCoupling(f64),

    #[error("thermal occupation {0} is negative")]
    NegativeOccupation(f64),

    #[error("dimension mismatch: operator on {op_modes} modes applied to a state with {state_modes}")]
    DimensionMismatch { op_modes: usize, state_modes: usize },

    #[error("degenerate state: covariance determinant {0:.3e} is not invertible")]
    DegenerateState(f64),

    #[error("matrix is not symplectic (max |S Omega S^T - Omega| = {0:.3e})")]
    NotSymplectic(f64),

    #[error("covariance matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("covariance matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("gain below 0 dB ({0} dB) cannot be mapped onto a squeeze parameter")]
    NegativeGainDb(f64),

    #[error("value {value} for {name} outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unity feedforward unsatisfiable: required cosh(r) = {0:.6e}")]
    UnityFeedforwardUnsatisfiable(f64),

    #[error("record mismatch: {0}")]
    RecordMismatch(String),

    #[error("histogram needs at least 8 bins per axis (got {0})")]
    TooFewBins(usize),

    #[error("empty or inverted histogram range")]
    EmptyRange,

    #[error("invalid noise sweep: {0}")]
    InvalidSweep(String),

    #[error("fit did not converge after {iterations} iterations (last residual norm {residual:.3e})")]
    FitDiverged { iterations: usize, residual: f64 },

    #[error("inconsistent calibration: bottom/top gain ratio {0:.4} exceeds 1.05")]
    InconsistentCalibration(f64),
}

pub type Result<T> = std::result::Result<T, CoreError>;

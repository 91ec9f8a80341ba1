use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied an out-of-range or inconsistent parameter.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two holes of a design intersect.
    #[error("holes {first} and {second} overlap (center distance {distance_nm:.3} nm < sum of radii {radius_sum_nm:.3} nm)")]
    HoleOverlap {
        first: usize,
        second: usize,
        distance_nm: f64,
        radius_sum_nm: f64,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("time step violates the Courant bound: {0}")]
    Stability(String),

    #[error("fields diverged (non-finite value) at step {step}")]
    Divergence { step: u64 },

    #[error("estimated memory {required_bytes} bytes exceeds the limit of {limit_bytes} bytes")]
    Memory { required_bytes: u64, limit_bytes: u64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// `g <= kappa / 4`: the polariton lines do not split.
    #[error("no vacuum Rabi splitting: g = {g} ueV does not exceed kappa/4 = {quarter_kappa} ueV")]
    NoSplitting { g: f64, quarter_kappa: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::Degenerate(_) | Error::Invariant(_))
    }
}

use thiserror::Error;

/// Errors raised by the numerical library and the run harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("wavelength {lambda_um} um outside the valid range [{min_um}, {max_um}] um of {crystal}")]
    WavelengthOutOfRange {
        crystal: String,
        lambda_um: f64,
        min_um: f64,
        max_um: f64,
    },

    #[error("angle {0} rad outside [0, pi/2]")]
    AngleOutOfRange(f64),

    #[error("no collinear degenerate type-I phase matching for {crystal} at {lambda_p_nm} nm")]
    NoPhaseMatching { crystal: String, lambda_p_nm: f64 },

    #[error("unknown crystal `{0}`")]
    UnknownCrystal(String),

    #[error("dispersion data line {line}: {message}")]
    DispersionData { line: usize, message: String },

    #[error("evanescent regime: {0}")]
    Evanescent(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid axis: {0}")]
    InvalidAxis(String),

    #[error("no real phase-matching root for theta1 = {theta1} (discriminant {discriminant})")]
    NoRealRoot { theta1: f64, discriminant: f64 },

    #[error("np_eff = 0 has a double root; use the quadrature single-particle path")]
    DegenerateRoots,

    #[error("delta-function approximation not valid: {lhs:.4e} / {rhs:.4e} = {ratio:.3} < {required}")]
    Validity {
        lhs: f64,
        rhs: f64,
        ratio: f64,
        required: f64,
    },

    #[error("quadrature did not converge: achieved relative error {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("grid spacing {spacing} too coarse for oscillation bandwidth {bandwidth} (need spacing * bandwidth <= pi)")]
    Resolution { spacing: f64, bandwidth: f64 },

    #[error("no peak found in curve `{0}`")]
    NoPeak(String),

    #[error("half-height crossing of curve `{0}` lies outside the sampled axis; widen the axis")]
    Truncated(String),

    #[error("unit mismatch: `{0}` vs `{1}`")]
    UnitMismatch(String, String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("config {location}: {message}")]
    Config { location: String, message: String },

    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),

    #[error("{quantity}: {source}")]
    Quantity { quantity: String, source: Box<Error> },
}

impl Error {
    /// Wraps `self` with the name of the quantity being computed.
    pub fn context(self, quantity: impl Into<String>) -> Self {
        Error::Quantity {
            quantity: quantity.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error behind any [`Error::Quantity`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Quantity { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

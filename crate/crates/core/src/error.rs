use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("aliasing risk: sample rate {available:.4e} Hz is below the required {required:.4e} Hz")]
    AliasingRisk { required: f64, available: f64 },

    #[error("{quantity} = {value:.6e} outside [{lo:.6e}, {hi:.6e}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("modulation depth {depth:.4} rad is outside the small-signal regime (first-order discrepancy {discrepancy:.3e})")]
    RegimeViolation { depth: f64, discrepancy: f64 },

    #[error("reference energy {energy:.3e} below floor {floor:.3e}")]
    LowSignal { energy: f64, floor: f64 },

    #[error("no spectral peak above the noise floor")]
    NoSignal,

    #[error("frequency estimation failed: {0}")]
    Estimation(String),

    #[error("calibration fit failed: {0}")]
    Fit(String),

    #[error("calibration curve is not monotone on its valid range")]
    NotMonotone,

    #[error("transmission {value:.6} outside the calibrated range; nearest endpoint is {nearest_endpoint_mm} mm")]
    CalibrationRange { value: f64, nearest_endpoint_mm: f64 },

    #[error("displacement {value_mm} mm outside the calibrated range; nearest endpoint is {nearest_endpoint_mm} mm")]
    DisplacementRange { value_mm: f64, nearest_endpoint_mm: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

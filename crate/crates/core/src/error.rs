use thiserror::Error;

/// Errors raised by the geometry, mapping and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({re}, {im}) is not interior to {region}")]
    OutsideDomain { re: f64, im: f64, region: String },

    #[error("map has a pole at the requested point")]
    Pole,

    #[error("degenerate Möbius map: ad - bc vanishes")]
    DegenerateMap,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("unsupported domain: {0}")]
    Unsupported(String),

    #[error("query at Re z = {re} lies beyond the truncation abscissa {limit}")]
    BeyondTruncation { re: f64, limit: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numeric failure: {what} (residual {residual:e})")]
    Numeric { what: String, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn outside(z: num_complex::Complex64, region: impl Into<String>) -> Self {
        Error::OutsideDomain { re: z.re, im: z.im, region: region.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The normalization of `(t a + r a†)|α⟩` vanished (or went negative).
    #[error("degenerate state: normalization {0:e} is not above 1e-12")]
    DegenerateState(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operator word of length {len} exceeds the limit of {max}")]
    WordTooLong { len: usize, max: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("exact coefficient overflowed 128-bit integers")]
    Overflow,

    #[error("value has imaginary residue {imag:e} (real part {real:e})")]
    NonReal { real: f64, imag: f64 },

    #[error("truncation too small: need n_max >= {needed}, have {have}")]
    TruncationTooSmall { needed: usize, have: usize },

    #[error("grid of {0} points exceeds the limit")]
    GridTooLarge(usize),

    #[error("photon population {population:e} at the cap of mode {mode} exceeds 1e-10")]
    CapExceeded { mode: char, population: f64 },

    #[error("heralding probability {0:e} is below 1e-30")]
    ZeroProbability(f64),

    #[error("sweep of {0} grid points exceeds the limit")]
    SpecTooLarge(usize),

    #[error("invalid sweep spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn out_of_range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }
}
